//! Experiment execution: generator assembly, solver dispatch, CSV output.

use std::fmt::Write as _;
use std::path::Path;

use qfp_core::classical::{euler_propagate, expm_propagate, sde_monte_carlo, McStart, Trajectory};
use qfp_core::generator::{assemble_multidim, validate_generator, GeneratorMatrix, ValidationReport};
use qfp_core::model::eval_coefficients;
use qfp_core::observables::{mean, trace_distance, variance};
use qfp_core::schrod::{schrod_propagate, FourierRegister};
use qfp_core::{block_euler, lcu, Grid};

use crate::config::{ExperimentConfig, InitialSpec, SolverSpec};
use crate::CliError;

/// Everything an experiment run produces.
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    pub grid: Grid,
    pub generator: GeneratorMatrix,
    pub trajectory: Trajectory,
    /// Per-row solver diagnostics; header names depend on the solver.
    pub log_header: Vec<String>,
    pub log_rows: Vec<Vec<f64>>,
    /// One-line summary facts (name, value).
    pub summary: Vec<(String, f64)>,
}

fn numerical(e: qfp_core::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Default output times when the config gives none: the step stamps for
/// stepped solvers, `0..=4` in steps of `0.25` otherwise.
fn output_times(config: &ExperimentConfig) -> Vec<f64> {
    if let Some(times) = &config.times {
        return times.clone();
    }
    match &config.solver {
        SolverSpec::ClassicalEuler { dt, n_steps }
        | SolverSpec::QBlock { dt, n_steps }
        | SolverSpec::QLcu { dt, n_steps } => (0..=*n_steps).map(|k| k as f64 * dt).collect(),
        SolverSpec::SdeMc { dt, n_steps, .. } => vec![*dt * *n_steps as f64],
        _ => (0..=16).map(|k| k as f64 * 0.25).collect(),
    }
}

pub fn build_generator(config: &ExperimentConfig) -> Result<(Grid, GeneratorMatrix), CliError> {
    let grid = config.build_grid()?;
    let model = config.build_model()?;
    if model.dim() != grid.dim() {
        return Err(CliError::Validation(format!(
            "model dimension {} does not match grid dimension {}",
            model.dim(),
            grid.dim()
        )));
    }
    let scheme = config.parse_scheme()?;
    let bc = config.parse_boundary()?;
    let field = eval_coefficients(&model, &grid)
        .map_err(|e| CliError::Validation(format!("coefficients: {e}")))?;
    let generator = assemble_multidim(&field, scheme, bc)
        .map_err(|e| CliError::Validation(format!("generator: {e}")))?;
    Ok((grid, generator))
}

pub fn execute(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    let (grid, generator) = build_generator(config)?;
    let p0 = config.build_initial(&grid)?;

    let log_header: Vec<String>;
    let log_rows: Vec<Vec<f64>>;
    let mut summary: Vec<(String, f64)> = Vec::new();

    let trajectory = match &config.solver {
        SolverSpec::ClassicalExpm => {
            let times = output_times(config);
            let traj = expm_propagate(&generator, &p0, &times).map_err(numerical)?;
            log_header = vec![String::from("time"), String::from("l1_drift")];
            log_rows =
                traj.times.iter().zip(&traj.l1_drift).map(|(&t, &d)| vec![t, d]).collect();
            traj
        }
        SolverSpec::ClassicalEuler { dt, n_steps } => {
            let traj = euler_propagate(&generator, &p0, *dt, *n_steps).map_err(numerical)?;
            log_header = vec![String::from("time"), String::from("l1_drift")];
            log_rows =
                traj.times.iter().zip(&traj.l1_drift).map(|(&t, &d)| vec![t, d]).collect();
            traj
        }
        SolverSpec::QBlock { dt, n_steps } => {
            let run =
                block_euler::run_block_euler(&generator, &p0, *dt, *n_steps).map_err(numerical)?;
            log_header = ["step", "success_prob", "cumulative_success", "l1_drift"]
                .map(String::from)
                .to_vec();
            log_rows = run
                .steps
                .iter()
                .map(|s| vec![s.step as f64, s.success_prob, s.cumulative_success, s.l1_drift])
                .collect();
            summary.push((String::from("cumulative_success"), run.cumulative_success));
            summary.push((String::from("expected_calls"), run.expected_calls));
            run.trajectory
        }
        SolverSpec::QLcu { dt, n_steps } => {
            let run = lcu::run_lcu(&generator, &p0, *dt, *n_steps).map_err(numerical)?;
            log_header = ["step", "success_prob", "cumulative_success", "l1_drift"]
                .map(String::from)
                .to_vec();
            log_rows = run
                .steps
                .iter()
                .map(|s| vec![s.step as f64, s.success_prob, s.cumulative_success, s.l1_drift])
                .collect();
            summary.push((String::from("cumulative_success"), run.cumulative_success));
            summary.push((String::from("expected_calls"), run.expected_calls));
            run.trajectory
        }
        SolverSpec::QSchrod { eta_max, d_eta } => {
            let register = FourierRegister::new(*eta_max, *d_eta)
                .map_err(|e| CliError::Validation(format!("register: {e}")))?;
            let times = output_times(config);
            let run =
                schrod_propagate(&generator, &p0, &register, &times).map_err(numerical)?;
            log_header =
                ["time", "raw_l1", "min_entry", "max_imag", "w_lo", "w_hi", "window_closed"]
                    .map(String::from)
                    .to_vec();
            log_rows = run
                .diagnostics
                .iter()
                .map(|d| {
                    vec![
                        d.time,
                        d.raw_l1,
                        d.min_entry,
                        d.max_imag,
                        d.w_lo,
                        d.w_hi,
                        if d.window_closed { 1.0 } else { 0.0 },
                    ]
                })
                .collect();
            run.trajectory
        }
        SolverSpec::SdeMc { dt, n_steps, n_samples, seed } => {
            let model = config.build_model()?;
            let start = match &config.initial {
                InitialSpec::Delta { at } => McStart::Point(at.clone()),
                _ => McStart::Distribution(p0.clone()),
            };
            let hist =
                sde_monte_carlo(&model, &grid, &start, *dt, *n_steps, *n_samples, *seed)
                    .map_err(numerical)?;
            let mut traj = Trajectory::new("sde_mc");
            traj.push(*dt * *n_steps as f64, hist, 1.0);
            log_header = ["time", "n_samples", "seed"].map(String::from).to_vec();
            log_rows = vec![vec![*dt * *n_steps as f64, *n_samples as f64, *seed as f64]];
            traj
        }
    };

    Ok(RunArtifacts {
        config: config.clone(),
        grid,
        generator,
        trajectory,
        log_header,
        log_rows,
        summary,
    })
}

// --- CSV helpers ------------------------------------------------------------

/// Formats a float deterministically (shortest round-trip representation).
fn fmt(x: f64) -> String {
    format!("{x}")
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn write_artifacts(artifacts: &RunArtifacts, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Validation(format!("{}: {e}", out_dir.display())))?;

    // Trajectory: one column per grid point.
    let n = artifacts.grid.total_points();
    let mut header = vec![String::from("time")];
    header.extend((0..n).map(|k| format!("p_{k}")));
    let rows: Vec<Vec<f64>> = artifacts
        .trajectory
        .times
        .iter()
        .zip(&artifacts.trajectory.states)
        .map(|(&t, state)| {
            let mut row = Vec::with_capacity(n + 1);
            row.push(t);
            row.extend_from_slice(state.values());
            row
        })
        .collect();
    write_csv(&out_dir.join("trajectory.csv"), &header, &rows)?;

    // Moments per axis.
    let mut header = vec![String::from("time")];
    for axis in artifacts.grid.axes() {
        header.push(format!("mean_{}", axis.name));
    }
    for axis in artifacts.grid.axes() {
        header.push(format!("var_{}", axis.name));
    }
    let mut rows = Vec::new();
    for (&t, state) in artifacts.trajectory.times.iter().zip(&artifacts.trajectory.states) {
        let m = mean(state, &artifacts.grid).map_err(numerical)?;
        let v = variance(state, &artifacts.grid).map_err(numerical)?;
        let mut row = vec![t];
        row.extend(m);
        row.extend(v);
        rows.push(row);
    }
    write_csv(&out_dir.join("moments.csv"), &header, &rows)?;

    write_csv(&out_dir.join("solver_log.csv"), &artifacts.log_header, &artifacts.log_rows)?;

    let config_json = serde_json::to_string_pretty(&artifacts.config)
        .map_err(|e| CliError::Validation(format!("config serialization: {e}")))?;
    std::fs::write(out_dir.join("config.json"), config_json + "\n")
        .map_err(|e| CliError::Validation(format!("config.json: {e}")))?;

    if !artifacts.summary.is_empty() {
        let mut text = String::new();
        for (key, value) in &artifacts.summary {
            let _ = writeln!(text, "{key},{}", fmt(*value));
        }
        std::fs::write(out_dir.join("summary.csv"), text)
            .map_err(|e| CliError::Validation(format!("summary.csv: {e}")))?;
    }
    Ok(())
}

// --- compare ----------------------------------------------------------------

pub struct ComparisonRow {
    pub time: f64,
    pub l1_distance: f64,
    pub mean_gap: f64,
    pub var_gap: f64,
}

/// Pairs up two trajectories on identical time stamps and reports the trace
/// distance and moment gaps at each.
pub fn compare_runs(
    a: &RunArtifacts,
    b: &RunArtifacts,
) -> Result<Vec<ComparisonRow>, CliError> {
    if a.grid.total_points() != b.grid.total_points() {
        return Err(CliError::Validation(format!(
            "grids differ: {} vs {} points",
            a.grid.total_points(),
            b.grid.total_points()
        )));
    }
    let mut rows = Vec::new();
    for (i, &ta) in a.trajectory.times.iter().enumerate() {
        if let Some(j) = b.trajectory.times.iter().position(|&tb| (tb - ta).abs() < 1e-12) {
            let pa = &a.trajectory.states[i];
            let pb = &b.trajectory.states[j];
            let l1 = trace_distance(pa, pb).map_err(numerical)?;
            let ma = mean(pa, &a.grid).map_err(numerical)?;
            let mb = mean(pb, &b.grid).map_err(numerical)?;
            let va = variance(pa, &a.grid).map_err(numerical)?;
            let vb = variance(pb, &b.grid).map_err(numerical)?;
            let mean_gap = ma
                .iter()
                .zip(&mb)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            let var_gap =
                va.iter().zip(&vb).map(|(x, y)| (x - y).abs()).fold(0.0_f64, f64::max);
            rows.push(ComparisonRow { time: ta, l1_distance: l1, mean_gap, var_gap });
        }
    }
    if rows.is_empty() {
        return Err(CliError::Validation(String::from(
            "the two runs share no time stamps; nothing to compare",
        )));
    }
    Ok(rows)
}

pub fn write_comparison(rows: &[ComparisonRow], path: &Path) -> Result<(), CliError> {
    let header =
        ["time", "l1_distance", "mean_gap", "var_gap"].map(String::from).to_vec();
    let data: Vec<Vec<f64>> =
        rows.iter().map(|r| vec![r.time, r.l1_distance, r.mean_gap, r.var_gap]).collect();
    write_csv(path, &header, &data)
}

// --- sweep ------------------------------------------------------------------

/// Steady-state accuracy table for the 1D double well: six parameter groups,
/// each comparing the Fourier-register solver (`dist_schrod`) and the
/// block-encoded Euler solver (`dist_euler`) against the analytic steady
/// state after 40 steps of `dt = 0.1`.
pub fn sweep_steady_state(out_dir: &Path) -> Result<(), CliError> {
    use qfp_core::classical::steady_state_1d;
    let groups: [(f64, f64); 6] = [
        (0.3, 0.15),
        (0.4, 0.15),
        (0.5, 0.15),
        (0.5, 0.12),
        (0.5, 0.15),
        (0.5, 0.18),
    ];
    let header = ["group", "kappa", "d", "dist_schrod", "dist_euler"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for (g, &(kappa, d)) in groups.iter().enumerate() {
        let mut config = crate::config::preset("exp1").expect("builtin preset");
        config.model = crate::config::ModelSpec::DoubleWell { kappa, d };
        let (grid, generator) = build_generator(&config)?;
        let p0 = config.build_initial(&grid)?;
        let steady = steady_state_1d(kappa, d, &grid).map_err(numerical)?;

        let euler_run =
            block_euler::run_block_euler(&generator, &p0, 0.1, 40).map_err(numerical)?;
        let p_euler = euler_run.trajectory.final_state().expect("nonempty run");
        let dist_euler = trace_distance(p_euler, &steady).map_err(numerical)?;

        // d_eta = 0.005 keeps the w-space recovery window open past t = 4
        // for all six parameter groups (the fast contamination front moves
        // at ~16-20 w-units per unit time against a period of 200).
        let register = FourierRegister::new(10.0, 0.005)
            .map_err(|e| CliError::Validation(format!("register: {e}")))?;
        let schrod_run =
            schrod_propagate(&generator, &p0, &register, &[4.0]).map_err(numerical)?;
        let p_schrod = schrod_run.trajectory.final_state().expect("nonempty run");
        let dist_schrod = trace_distance(p_schrod, &steady).map_err(numerical)?;

        rows.push(vec![(g + 1) as f64, kappa, d, dist_schrod, dist_euler]);
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Validation(format!("{}: {e}", out_dir.display())))?;
    write_csv(&out_dir.join("sweep_steady_state.csv"), &header, &rows)
}

/// Variance-versus-time curves for the 2D spiral at `gamma = 0.1` and three
/// noise strengths, comparing the block-encoded Euler solver against the
/// dense-exponential reference on a shared stamp grid.
pub fn sweep_spiral_variance(out_dir: &Path) -> Result<(), CliError> {
    let d_values = [0.25, 0.2, 0.15];
    let header = ["d", "time", "var_x_q", "var_y_q", "var_x_ref", "var_y_ref"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for &d in &d_values {
        let mut config = crate::config::preset("exp2").expect("builtin preset");
        config.model = crate::config::ModelSpec::Spiral { gamma: 0.1, d };
        let (grid, generator) = build_generator(&config)?;
        let p0 = config.build_initial(&grid)?;
        // The 2D generator has eigenvalues down to ~-50, so forward Euler
        // needs dt well under 0.04; step at 0.01 and report every 0.25.
        let run = block_euler::run_block_euler(&generator, &p0, 0.01, 400).map_err(numerical)?;
        let sample: Vec<usize> = (0..=400).step_by(25).collect();
        let times: Vec<f64> = sample.iter().map(|&i| run.trajectory.times[i]).collect();
        let reference = expm_propagate(&generator, &p0, &times).map_err(numerical)?;
        for (k, &i) in sample.iter().enumerate() {
            let vq = variance(&run.trajectory.states[i], &grid).map_err(numerical)?;
            let vr = variance(&reference.states[k], &grid).map_err(numerical)?;
            rows.push(vec![d, times[k], vq[0], vq[1], vr[0], vr[1]]);
        }
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Validation(format!("{}: {e}", out_dir.display())))?;
    write_csv(&out_dir.join("sweep_spiral_variance.csv"), &header, &rows)
}

// --- validate ---------------------------------------------------------------

pub fn validation_text(config: &ExperimentConfig, report: &ValidationReport) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "experiment: {}", config.name);
    let _ = writeln!(text, "dimension: {}", report.dim);
    let _ = writeln!(text, "max |column sum|: {:.3e}", report.max_abs_column_sum);
    let _ = writeln!(text, "min off-diagonal entry: {:.3e}", report.min_off_diagonal);
    let _ = writeln!(text, "max column sparsity: {}", report.max_column_sparsity);
    match report.spectral_abscissa {
        Some(a) => {
            let _ = writeln!(text, "spectral abscissa: {a:.6e}");
        }
        None => {
            let _ = writeln!(text, "spectral abscissa: skipped (dimension above dense limit)");
        }
    }
    if report.warnings.is_empty() {
        let _ = writeln!(text, "warnings: none");
    } else {
        for w in &report.warnings {
            let _ = writeln!(text, "warning: {}", w.message);
        }
    }
    text
}

pub fn run_validate(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<String, CliError> {
    let (_grid, generator) = build_generator(config)?;
    let report = validate_generator(&generator);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Validation(format!("{}: {e}", dir.display())))?;
        // Generator export in coordinate (row, col, value) form.
        let mut text = String::from("row,col,value\n");
        for &(i, j, v) in generator.entries() {
            let _ = writeln!(text, "{i},{j},{}", fmt(v));
        }
        std::fs::write(dir.join("generator.csv"), text)
            .map_err(|e| CliError::Validation(format!("generator.csv: {e}")))?;
    }
    Ok(validation_text(config, &report))
}

/// Applies a seed override to the solvers that consume one.
pub fn override_seed(config: &mut ExperimentConfig, seed: u64) {
    if let SolverSpec::SdeMc { seed: s, .. } = &mut config.solver {
        *s = seed;
    }
}

/// Final-state trace distance between two runs (convenience for `compare`).
pub fn final_distance(a: &RunArtifacts, b: &RunArtifacts) -> Result<f64, CliError> {
    let pa = a
        .trajectory
        .final_state()
        .ok_or_else(|| CliError::Numerical(String::from("empty trajectory")))?;
    let pb = b
        .trajectory
        .final_state()
        .ok_or_else(|| CliError::Numerical(String::from("empty trajectory")))?;
    trace_distance(pa, pb).map_err(numerical)
}
