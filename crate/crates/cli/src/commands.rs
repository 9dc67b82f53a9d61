use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ccilc::lifted::check_size_cap;
use ccilc::{
    build_lifted, compute_filters, contraction_estimate, ilc_update, iteration_weights, run,
    simulate, IlcError, IlcHistory, LqtSolver, Signal, SolverKind,
};

use crate::error::{CliError, CliResult};
use crate::output;
use crate::scenario::Scenario;

/// The bundled two-axis demo, also the default benchmark problem.
pub const DEMO_SCENARIO: &str = include_str!("../scenarios/flatbed_demo.toml");
pub const DEMO_NAME: &str = "flatbed_demo.toml";

/// Maximum solver deviation accepted by `verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub solver: Option<SolverKind>,
    pub iterations: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict_convergence: bool,
    pub dump_matrices: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub history: IlcHistory,
    pub output_dir: PathBuf,
    pub kappa: Option<f64>,
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn cmd_run(path: &Path, opts: &RunOptions) -> CliResult<RunOutcome> {
    let mut sc = Scenario::load(path)?;
    if let Some(s) = opts.solver {
        sc.config.solver = s;
    }
    if let Some(k) = opts.iterations {
        sc.config.iterations = k;
    }
    if let Some(seed) = opts.seed {
        sc.set_seed(seed);
    }
    sc.config.strict_convergence |= opts.strict_convergence;
    let dir = opts.out.clone().unwrap_or_else(|| sc.output_dir.clone());

    let history = run(&sc.config)?;
    create_dir(&dir)?;
    output::write_history(&dir.join("history.csv"), &history)?;
    for j in sc.trajectory_iterations() {
        output::write_trajectory(
            &output::trajectory_path(&dir, j),
            &history.reference,
            &history.records[j],
        )?;
    }
    let kappa = contraction_estimate(&history).ok();
    let report = output::report_text(&sc.name, sc.config.solver.name(), &history, kappa);
    output::write_text(&dir.join("report.txt"), &report)?;
    if opts.dump_matrices {
        dump_matrices(&sc, &history, &dir)?;
    }
    Ok(RunOutcome {
        history,
        output_dir: dir,
        kappa,
    })
}

/// Writes `J.csv`, `Q.csv` and `L.csv` for the first update.
fn dump_matrices(sc: &Scenario, history: &IlcHistory, dir: &Path) -> CliResult<()> {
    let cfg = &sc.config;
    let lifted = build_lifted(&cfg.process_sensitivity, cfg.size_cap)?;
    output::write_matrix(&dir.join("J.csv"), lifted.matrix())?;
    if cfg.iterations == 0 {
        return Ok(());
    }
    let y0 = history.records[0].output(&cfg.reference);
    let (_, aw) = iteration_weights(cfg, &y0, 0)?;
    let filters = compute_filters(
        &lifted,
        &aw.dense_error(),
        &aw.dense_input(),
        &aw.dense_input_change(),
    )?;
    output::write_matrix(&dir.join("Q.csv"), &filters.q)?;
    output::write_matrix(&dir.join("L.csv"), &filters.l)
}

#[derive(Debug)]
pub struct VerifyOutcome {
    /// `(j, deviation)` for every update.
    pub deviations: Vec<(usize, f64)>,
    pub max: f64,
}

/// Runs the configured solver with the dense oracle alongside.
pub fn cmd_verify(path: &Path) -> CliResult<VerifyOutcome> {
    let mut sc = Scenario::load(path)?;
    let j = &sc.config.process_sensitivity;
    if let Err(e) = check_size_cap(sc.config.horizon(), j.n_i(), j.n_o(), sc.config.size_cap) {
        let msg = match e {
            IlcError::SizeCap { .. } => {
                format!("{e}; reduce the horizon N (contour.samples) to verify")
            }
            other => other.to_string(),
        };
        return Err(CliError::config(path, None, msg));
    }
    sc.config.oracle_check = true;
    let history = run(&sc.config)?;
    let deviations: Vec<(usize, f64)> = history
        .records
        .iter()
        .filter_map(|r| r.solver_deviation.map(|d| (r.j, d)))
        .collect();
    let max = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(VerifyOutcome { deviations, max })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchSolvers {
    Both,
    Lqt,
    Lifted,
}

impl BenchSolvers {
    fn kinds(self) -> &'static [SolverKind] {
        match self {
            BenchSolvers::Both => &[SolverKind::Lqt, SolverKind::Lifted],
            BenchSolvers::Lqt => &[SolverKind::Lqt],
            BenchSolvers::Lifted => &[SolverKind::Lifted],
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchCell {
    pub horizon: usize,
    pub solver: SolverKind,
    /// Mean over the repeats, in milliseconds.
    pub wall_ms: f64,
    pub peak_mem_estimate: usize,
    /// The computed first update `f_1`.
    pub update: Signal,
}

/// A benchmark problem: scenario text plus where it came from.
#[derive(Clone, Debug)]
pub struct BenchProblem {
    text: String,
    source: PathBuf,
}

impl BenchProblem {
    pub fn demo() -> Self {
        BenchProblem {
            text: DEMO_SCENARIO.to_string(),
            source: PathBuf::from(DEMO_NAME),
        }
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok(BenchProblem {
            text,
            source: path.to_path_buf(),
        })
    }

    pub fn at_horizon(&self, n: usize) -> CliResult<Scenario> {
        let base = Scenario::parse(&self.text, &self.source)?;
        let sc = base.with_horizon(&self.text, n)?;
        if sc.config.horizon() != n {
            return Err(CliError::Usage(format!(
                "scenario {} cannot be resampled to N = {n}",
                self.source.display()
            )));
        }
        Ok(sc)
    }
}

/// Dense path memory: `J`, the dense weights, `J'W`, `J'WJ`, the normal
/// matrix and its factor, `Q` and `L`.
pub fn lifted_memory_estimate(n: usize, n_i: usize, n_o: usize) -> usize {
    let (r, c) = (n * n_o, n * n_i);
    8 * (2 * r * c + r * r + 7 * c * c)
}

/// Times one update `f_0 -> f_1`. Returns `None` for the dense solver when
/// the horizon exceeds the size cap.
pub fn bench_cell(
    problem: &BenchProblem,
    n: usize,
    solver: SolverKind,
    repeats: usize,
) -> CliResult<Option<BenchCell>> {
    let sc = problem.at_horizon(n)?;
    let cfg = &sc.config;
    let sys = &cfg.process_sensitivity;
    let (n_i, n_o) = (sys.n_i(), sys.n_o());
    if solver == SolverKind::Lifted && check_size_cap(n, n_i, n_o, cfg.size_cap).is_err() {
        return Ok(None);
    }
    let e = simulate(&cfg.sensitivity, &cfg.reference, None)?;
    let f = Signal::zeros(n, n_i);
    let y = cfg.reference.sub(&e)?;
    let (_, aw) = iteration_weights(cfg, &y, 0)?;
    let repeats = repeats.max(1);

    let mut update = None;
    let mut peak = 0;
    let start = Instant::now();
    match solver {
        SolverKind::Lqt => {
            for _ in 0..repeats {
                let mut s = LqtSolver::new();
                update = Some(s.update(sys, &aw, &e, &f)?);
                peak = s.diagnostics().map_or(0, |d| d.peak_memory_bytes);
            }
        }
        SolverKind::Lifted => {
            for _ in 0..repeats {
                let lifted = build_lifted(sys, cfg.size_cap)?;
                let filt = compute_filters(
                    &lifted,
                    &aw.dense_error(),
                    &aw.dense_input(),
                    &aw.dense_input_change(),
                )?;
                update = Some(ilc_update(&filt, &f, &e)?);
            }
            peak = lifted_memory_estimate(n, n_i, n_o);
        }
    }
    let wall_ms = start.elapsed().as_secs_f64() * 1e3 / repeats as f64;
    Ok(Some(BenchCell {
        horizon: n,
        solver,
        wall_ms,
        peak_mem_estimate: peak,
        update: update.expect("at least one repeat"),
    }))
}

pub fn cmd_bench(
    problem: &BenchProblem,
    horizons: &[usize],
    solvers: BenchSolvers,
    repeats: usize,
    out: &Path,
) -> CliResult<Vec<BenchCell>> {
    if horizons.is_empty() {
        return Err(CliError::Usage(
            "--horizons needs at least one value".into(),
        ));
    }
    if let Some(bad) = horizons.iter().find(|n| **n < 2) {
        return Err(CliError::Usage(format!("horizon {bad} is too short")));
    }
    let mut cells = Vec::new();
    for &n in horizons {
        for &solver in solvers.kinds() {
            match bench_cell(problem, n, solver, repeats)? {
                Some(cell) => {
                    log::info!("N = {n} {}: {:.3} ms", solver.name(), cell.wall_ms);
                    cells.push(cell);
                }
                None => log::info!("N = {n} {}: skipped, above the size cap", solver.name()),
            }
        }
    }
    create_dir(out)?;
    let path = out.join("bench.csv");
    let mut w =
        csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, std::io::Error::other(e)))?;
    let io = |e: csv::Error| CliError::io(&path, std::io::Error::other(e));
    w.write_record(["N", "solver", "wall_ms", "peak_mem_estimate"])
        .map_err(io)?;
    for c in &cells {
        w.write_record([
            c.horizon.to_string(),
            c.solver.name().to_string(),
            format!("{:.4}", c.wall_ms),
            c.peak_mem_estimate.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(cells)
}
