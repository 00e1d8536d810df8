//! Dense linear-algebra kernels shared by the solvers: Hermitian and
//! symmetric eigendecompositions (backed by `faer`), a scaling-and-squaring
//! Pade matrix exponential, and spectral-abscissa estimation.

use alloc::vec::Vec;

use faer::{c64, Mat, Side};
use nalgebra::{Complex, ComplexField, DMatrix};

/// Eigendecomposition `A = V diag(w) V^H` of a Hermitian matrix.
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, unitary up to roundoff.
    pub vectors: DMatrix<Complex<f64>>,
}

/// Eigendecomposition of a complex Hermitian matrix. Only the lower triangle
/// is read.
pub fn hermitian_eigen(a: &DMatrix<Complex<f64>>) -> HermitianEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "hermitian_eigen needs a square matrix");
    let m = Mat::<c64>::from_fn(n, n, |i, j| c64::new(a[(i, j)].re, a[(i, j)].im));
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigensolve failed to converge");
    let eigenvalues = (0..n).map(|i| eig.S()[i].re).collect();
    let u = eig.U();
    let vectors = DMatrix::from_fn(n, n, |i, j| Complex::new(u[(i, j)].re, u[(i, j)].im));
    HermitianEigen { eigenvalues, vectors }
}

/// Eigendecomposition `A = V diag(w) V^T` of a real symmetric matrix.
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Eigendecomposition of a real symmetric matrix. Only the lower triangle is
/// read.
pub fn symmetric_eigen(a: &DMatrix<f64>) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "symmetric_eigen needs a square matrix");
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .expect("self-adjoint eigensolve failed to converge");
    let eigenvalues = (0..n).map(|i| eig.S()[i]).collect();
    let u = eig.U();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    SymmetricEigen { eigenvalues, vectors }
}

/// All eigenvalues of a real (generally non-normal) matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    a.clone().complex_eigenvalues().iter().copied().collect()
}

/// Maximum real part of the spectrum.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    eigenvalues(a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

fn one_norm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> f64 {
    let mut max = 0.0f64;
    for col in a.column_iter() {
        let s: f64 = col.iter().map(|x| x.clone().modulus()).sum();
        if s > max {
            max = s;
        }
    }
    max
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant.
pub fn expm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> DMatrix<T> {
    const THETA_13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        let ratio = norm / THETA_13;
        <f64 as num_traits::Float>::ceil(<f64 as num_traits::Float>::log2(ratio)).max(0.0) as u32
    } else {
        0
    };
    let scale = T::from_real(<f64 as num_traits::Float>::powi(0.5, squarings as i32));
    let a_scaled = a.map(|x| x * scale.clone());

    let ident = DMatrix::<T>::identity(n, n);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let b = |i: usize| T::from_real(B[i]);
    let u_inner = &a6 * (a6.map(|x| x * b(13)) + a4.map(|x| x * b(11)) + a2.map(|x| x * b(9)))
        + a6.map(|x| x * b(7))
        + a4.map(|x| x * b(5))
        + a2.map(|x| x * b(3))
        + ident.map(|x| x * b(1));
    let u = &a_scaled * u_inner;
    let v = &a6 * (a6.map(|x| x * b(12)) + a4.map(|x| x * b(10)) + a2.map(|x| x * b(8)))
        + a6.map(|x| x * b(6))
        + a4.map(|x| x * b(4))
        + a2.map(|x| x * b(2))
        + ident.map(|x| x * b(0));

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is singular");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Scaled Taylor-series exponential, used as an independent oracle.
    pub fn expm_taylor(a: &DMatrix<f64>, terms: usize) -> DMatrix<f64> {
        let n = a.nrows();
        let norm = one_norm(a);
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = a.map(|x| x * 0.5f64.powi(squarings as i32));
        let mut acc = DMatrix::<f64>::identity(n, n);
        let mut term = DMatrix::<f64>::identity(n, n);
        for k in 1..=terms {
            term = (&term * &scaled).map(|x| x / k as f64);
            acc += &term;
        }
        for _ in 0..squarings {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn expm_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(5, 5);
        let e = expm(&z);
        assert!((e - DMatrix::<f64>::identity(5, 5)).abs().max() < 1e-15);
    }

    #[test]
    fn expm_matches_scalar_exponential() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.5, 3.0]));
        let e = expm(&a);
        for (i, &x) in [-1.0, 0.5, 3.0].iter().enumerate() {
            assert!((e[(i, i)] - f64::exp(x)).abs() < 1e-12 * f64::exp(x));
        }
    }

    #[test]
    fn expm_matches_taylor_on_random_generators() {
        // Random 8x8 conserving generators: off-diagonals >= 0, columns sum
        // to zero.
        let mut seed = 42u64;
        let mut rng = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..5 {
            let n = 8;
            let mut a = DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                for i in 0..n {
                    if i != j {
                        a[(i, j)] = rng();
                    }
                }
                let col_sum: f64 = (0..n).filter(|&i| i != j).map(|i| a[(i, j)]).sum();
                a[(j, j)] = -col_sum;
            }
            let pade = expm(&a);
            let taylor = expm_taylor(&a, 4000);
            assert!((&pade - &taylor).abs().max() < 1e-10);
        }
    }

    #[test]
    fn expm_complex_rotation() {
        // exp(i theta Y-like generator) stays unitary and matches the closed
        // form for a 2x2 rotation.
        let theta = 0.7f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0])
            .map(|x| Complex::new(x, 0.0));
        let e = expm(&a);
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]).map(|_: f64| Complex::new(0.0, 0.0))
            + DMatrix::from_fn(2, 2, |i, j| {
                if (i, j) == (0, 1) {
                    Complex::new(0.0, -1.5)
                } else if (i, j) == (1, 0) {
                    Complex::new(0.0, 1.5)
                } else {
                    Complex::new(2.0 * i as f64, 0.0)
                }
            });
        let eig = hermitian_eigen(&a);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            eig.eigenvalues.iter().map(|&w| Complex::new(w, 0.0)),
        ));
        let rebuilt = &eig.vectors * d * eig.vectors.adjoint();
        assert!((rebuilt - a).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn spectral_abscissa_two_state() {
        // R = [[-a, b], [a, -b]] has eigenvalues 0 and -(a+b).
        let a = DMatrix::from_row_slice(2, 2, &[-0.3, 0.8, 0.3, -0.8]);
        assert!(spectral_abscissa(&a).abs() < 1e-12);
        let evs = eigenvalues(&a);
        let min_re = evs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        assert!((min_re + 1.1).abs() < 1e-12);
    }
}
