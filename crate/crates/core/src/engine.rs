//! The trial loop `e_j = S y_d - J f_j`, `f_{j+1} = update(e_j, f_j)`, with
//! convergence-condition checks and per-iteration history.

use std::time::Instant;

use nalgebra::{Cholesky, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::contour::{
    ContourErrorSample, CouplingMode, CouplingSchedule, InputCoupling, ReferenceContour,
};
use crate::error::{IlcError, Result};
use crate::lifted::{self, IlcFilters, LiftedSystem, DEFAULT_SIZE_CAP};
use crate::linalg;
use crate::lqt::LqtSolver;
use crate::signal::Signal;
use crate::state_space::{simulate, LtvStateSpace};
use crate::weights::{assemble, AssembledWeights, WeightSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Lqt,
    Lifted,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Lqt => "lqt",
            SolverKind::Lifted => "lifted",
        }
    }
}

/// Zero-mean Gaussian disturbance added to every measured error sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    pub std_dev: f64,
    pub seed: u64,
}

/// Defaults for the contraction-margin computation.
pub const DEFAULT_DENSE_MARGIN_LIMIT: usize = 600;
pub const POWER_ITERATIONS: usize = 50;
pub const POWER_RTOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct IlcConfig {
    /// Realization of `J: f -> y`.
    pub process_sensitivity: LtvStateSpace,
    /// Realization of `S: r -> e`.
    pub sensitivity: LtvStateSpace,
    pub reference: Signal,
    pub coupling: CouplingMode,
    pub input_coupling: InputCoupling,
    pub weights: WeightSchedule,
    pub solver: SolverKind,
    pub iterations: usize,
    /// Abort when the convergence conditions fail instead of warning.
    pub strict_convergence: bool,
    pub initial_input: Option<Signal>,
    pub noise: Option<NoiseConfig>,
    pub size_cap: usize,
    /// Margins use a dense SVD when `N * n_i` is at most this, power
    /// iteration otherwise.
    pub dense_margin_limit: usize,
    pub compute_margins: bool,
    /// Also evaluate the dense lifted update at every iteration and record
    /// its deviation from the configured solver.
    pub oracle_check: bool,
}

impl IlcConfig {
    pub fn new(
        process_sensitivity: LtvStateSpace,
        sensitivity: LtvStateSpace,
        reference: Signal,
        weights: WeightSchedule,
    ) -> Self {
        IlcConfig {
            process_sensitivity,
            sensitivity,
            reference,
            coupling: CouplingMode::Identity,
            input_coupling: InputCoupling::SameAsError,
            weights,
            solver: SolverKind::Lqt,
            iterations: 10,
            strict_convergence: false,
            initial_input: None,
            noise: None,
            size_cap: DEFAULT_SIZE_CAP,
            dense_margin_limit: DEFAULT_DENSE_MARGIN_LIMIT,
            compute_margins: true,
            oracle_check: false,
        }
    }

    pub fn horizon(&self) -> usize {
        self.reference.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (j, s) = (&self.process_sensitivity, &self.sensitivity);
        let n = self.reference.len();
        let n_o = self.reference.width();
        if n == 0 {
            return Err(IlcError::Invalid("empty reference".into()));
        }
        for (name, sys) in [("J", j), ("S", s)] {
            if sys.horizon() != n {
                return Err(IlcError::dim(
                    format!("{name} horizon"),
                    None,
                    n,
                    sys.horizon(),
                ));
            }
        }
        if j.n_o() != n_o {
            return Err(IlcError::dim("J outputs", None, n_o, j.n_o()));
        }
        if s.n_i() != n_o || s.n_o() != n_o {
            return Err(IlcError::dim(
                "S inputs/outputs",
                None,
                format!("{n_o}/{n_o}"),
                format!("{}/{}", s.n_i(), s.n_o()),
            ));
        }
        if let Some(f0) = &self.initial_input {
            f0.check_shape("initial input", n, j.n_i())?;
        }
        if self.coupling != CouplingMode::Identity && (n_o != 2 || j.n_i() != 2) {
            return Err(IlcError::Contour(format!(
                "coupling mode {} needs a two-axis system",
                self.coupling.name()
            )));
        }
        if let Some(noise) = self.noise {
            if !(noise.std_dev >= 0.0 && noise.std_dev.is_finite()) {
                return Err(IlcError::Invalid(
                    "noise standard deviation must be >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Which sufficient conditions for monotonic convergence hold at one
/// iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConditionFlags {
    pub error_coupling_full_rank: bool,
    pub error_weight_pd: bool,
    /// Every feedthrough block of `J` has full column rank, which makes the
    /// lifted `J` full column rank.
    pub j_nonsingular: bool,
    pub input_coupling_full_rank: bool,
    pub input_weight_pd: bool,
    pub input_weights_psd: bool,
    /// Required by the LQT solver only.
    pub input_change_weight_pd: bool,
}

impl ConditionFlags {
    pub fn passes(&self) -> bool {
        self.error_coupling_full_rank
            && self.error_weight_pd
            && self.input_weights_psd
            && (self.j_nonsingular || (self.input_weight_pd && self.input_coupling_full_rank))
    }

    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.error_coupling_full_rank {
            v.push("C_e not full column rank");
        }
        if !self.error_weight_pd {
            v.push("W_e not PD");
        }
        if !self.input_weights_psd {
            v.push("W_f or W_df not PSD");
        }
        if !self.j_nonsingular {
            if !self.input_weight_pd {
                v.push("J singular and W_f not PD");
            }
            if !self.input_coupling_full_rank {
                v.push("J singular and C_f not full column rank");
            }
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginMethod {
    /// The margin is zero because `W_dfc` vanishes.
    Trivial,
    Dense,
    PowerIteration,
    Unavailable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceEntry {
    pub j: usize,
    pub flags: ConditionFlags,
    /// `sigma_max((J' W_ec J + W_fc + W_dfc)^-1 W_dfc)`.
    pub rho: Option<f64>,
    pub method: MarginMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    FixedPointConvergent,
    BallConvergent,
    ConditionsViolated,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::FixedPointConvergent => "fixed-point convergent",
            Verdict::BallConvergent => "ball convergent",
            Verdict::ConditionsViolated => "conditions violated",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    /// Largest margin over the run.
    pub worst_rho: Option<f64>,
    /// Every update used the same composed weights.
    pub iteration_invariant: bool,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    fn from_entries(entries: Vec<ConvergenceEntry>, iteration_invariant: bool) -> Self {
        let worst_rho = entries
            .iter()
            .filter_map(|e| e.rho)
            .fold(None, |acc: Option<f64>, r| {
                Some(acc.map_or(r, |a| a.max(r)))
            });
        let verdict = if entries.iter().any(|e| !e.flags.passes()) {
            Verdict::ConditionsViolated
        } else if iteration_invariant {
            Verdict::FixedPointConvergent
        } else {
            Verdict::BallConvergent
        };
        ConvergenceReport {
            entries,
            worst_rho,
            iteration_invariant,
            verdict,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub j: usize,
    pub f: Signal,
    pub e: Signal,
    /// Signed contour errors; empty without a two-axis contour.
    pub contour_errors: Vec<f64>,
    pub tangential_errors: Vec<f64>,
    pub error_norm: f64,
    pub contour_norm: Option<f64>,
    pub tangential_norm: Option<f64>,
    pub axis_norms: Vec<f64>,
    /// `|e_j|^2_{W_ec,j} + |f_j|^2_{W_fc,j}`.
    pub cost: Option<f64>,
    pub rho: Option<f64>,
    /// `|f_solver - f_lifted|_inf / (1 + |f_lifted|_inf)` for the update
    /// computed from this trial, in oracle mode.
    pub solver_deviation: Option<f64>,
    pub wall_ms: f64,
}

impl IterationRecord {
    /// Position output `y_j = y_d - e_j`.
    pub fn output(&self, reference: &Signal) -> Signal {
        reference
            .sub(&self.e)
            .expect("record matches its reference")
    }
}

#[derive(Clone, Debug)]
pub struct IlcHistory {
    pub reference: Signal,
    pub records: Vec<IterationRecord>,
    pub report: ConvergenceReport,
}

impl IlcHistory {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn contour_norms(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.contour_norm).collect()
    }

    pub fn error_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error_norm).collect()
    }
}

fn feedthrough_full_rank(sys: &LtvStateSpace) -> bool {
    if sys.is_lti() {
        linalg::has_full_column_rank(sys.d(0))
    } else {
        (0..sys.horizon()).all(|k| linalg::has_full_column_rank(sys.d(k)))
    }
}

fn flags_for(
    j_nonsingular: bool,
    coupling: &CouplingSchedule,
    weights: &WeightSchedule,
    aw: &AssembledWeights,
    j: usize,
) -> Result<ConditionFlags> {
    let set = weights.set(j)?;
    Ok(ConditionFlags {
        error_coupling_full_rank: coupling.error_rank_deficiency().is_none(),
        error_weight_pd: set.error.definiteness().is_pd(),
        j_nonsingular,
        input_coupling_full_rank: coupling.input_rank_deficiency().is_none(),
        input_weight_pd: set.input.definiteness().is_pd(),
        input_weights_psd: set.input.definiteness().is_psd()
            && set.input_change.definiteness().is_psd(),
        input_change_weight_pd: aw.input_change_pd_violation().is_none(),
    })
}

/// Margin options for [`check_convergence_conditions`].
#[derive(Clone, Copy, Debug)]
pub struct MarginOptions {
    pub dense_limit: usize,
    pub size_cap: usize,
}

impl Default for MarginOptions {
    fn default() -> Self {
        MarginOptions {
            dense_limit: DEFAULT_DENSE_MARGIN_LIMIT,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

fn margin(
    sys: &LtvStateSpace,
    aw: &AssembledWeights,
    lifted: Option<&LiftedSystem>,
    opts: MarginOptions,
) -> (Option<f64>, MarginMethod) {
    if aw.input_change.iter().all(|b| linalg::max_abs(b) == 0.0) {
        return (Some(0.0), MarginMethod::Trivial);
    }
    let size = sys.horizon() * sys.n_i();
    if size <= opts.dense_limit {
        let owned;
        let lifted = match lifted {
            Some(l) => l,
            None => match lifted::build_lifted(sys, opts.size_cap) {
                Ok(l) => {
                    owned = l;
                    &owned
                }
                Err(_) => return (None, MarginMethod::Unavailable),
            },
        };
        return match lifted::contraction_margin(
            lifted,
            &aw.dense_error(),
            &aw.dense_input(),
            &aw.dense_input_change(),
        ) {
            Ok(r) => (Some(r), MarginMethod::Dense),
            Err(_) => (None, MarginMethod::Unavailable),
        };
    }
    match power_margin(sys, aw, POWER_ITERATIONS, POWER_RTOL) {
        Ok(r) => (Some(r), MarginMethod::PowerIteration),
        Err(_) => (None, MarginMethod::Unavailable),
    }
}

/// `sigma_max(T)` for `T = M^-1 W_dfc = Q - L J`, by power iteration on
/// `T'T` without forming `Q` or `L`.
///
/// `T x` is one LQT update with `f_j = x` and `e_j = -J x`. Since `M` and
/// `W_dfc` are symmetric, `T' y = W_dfc T (W_dfc^-1 y)`.
pub fn power_margin(
    sys: &LtvStateSpace,
    aw: &AssembledWeights,
    max_iter: usize,
    rtol: f64,
) -> Result<f64> {
    let (n, n_i) = (sys.horizon(), sys.n_i());
    let chol: Vec<_> = aw
        .input_change
        .iter()
        .enumerate()
        .map(|(k, b)| {
            Cholesky::new(b.clone()).ok_or(IlcError::InputChangeWeightNotPd { sample: k })
        })
        .collect::<Result<_>>()?;
    let mut solver = LqtSolver::new();
    let neg_j = sys.negated();
    let mut apply_t = |x: &Signal| -> Result<Signal> {
        let e = simulate(&neg_j, x, None)?;
        solver.update(sys, aw, &e, x)
    };
    let blockwise = |x: &Signal, f: &dyn Fn(usize, DVector<f64>) -> DVector<f64>| {
        let mut out = x.clone();
        for k in 0..n {
            let v = f(k, DVector::from_column_slice(x.sample(k)));
            out.sample_mut(k).copy_from_slice(v.as_slice());
        }
        out
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut v = Signal::from_stacked(n_i, (0..n * n_i).map(|_| normal.sample(&mut rng)).collect())?;
    v = v.scale(1.0 / v.norm());
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let tv = apply_t(&v)?;
        let z = blockwise(&tv, &|k, x| chol[k].solve(&x));
        let tz = apply_t(&z)?;
        let w = blockwise(&tz, &|k, x| &aw.input_change[k] * x);
        let next_lambda: f64 = v
            .as_slice()
            .iter()
            .zip(w.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v = w.scale(1.0 / norm);
        let converged = (next_lambda - lambda).abs() <= rtol * next_lambda.abs();
        lambda = next_lambda;
        if converged {
            break;
        }
    }
    Ok(lambda.max(0.0).sqrt())
}

/// Evaluates the convergence conditions and the contraction margin for the
/// weights and couplings of iteration `j`.
pub fn check_convergence_conditions(
    sys: &LtvStateSpace,
    coupling: &CouplingSchedule,
    weights: &WeightSchedule,
    j: usize,
    opts: MarginOptions,
) -> Result<ConvergenceEntry> {
    let aw = assemble(coupling, weights, j)?;
    let flags = flags_for(feedthrough_full_rank(sys), coupling, weights, &aw, j)?;
    let (rho, method) = margin(sys, &aw, None, opts);
    Ok(ConvergenceEntry {
        j,
        flags,
        rho,
        method,
    })
}

/// Empirical contraction ratio `max_j |f_{j+1} - f_K| / |f_j - f_K|` with the
/// final iterate `f_K` standing in for the fixed point.
pub fn contraction_estimate(history: &IlcHistory) -> Result<f64> {
    let recs = &history.records;
    if recs.len() < 4 {
        return Err(IlcError::InsufficientIterations {
            needed: 3,
            got: history.iterations(),
        });
    }
    let last = &recs[recs.len() - 1].f;
    let floor = 1e-12 * last.norm().max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for w in recs.windows(2) {
        let den = w[0].f.sub(last)?.norm();
        if den <= floor {
            continue;
        }
        let num = w[1].f.sub(last)?.norm();
        worst = worst.max(num / den);
    }
    Ok(worst)
}

fn weighted_cost(aw: &AssembledWeights, e: &Signal, f: &Signal) -> f64 {
    let mut total = 0.0;
    for k in 0..aw.horizon() {
        let ek = DVector::from_column_slice(e.sample(k));
        let fk = DVector::from_column_slice(f.sample(k));
        total += ek.dot(&(&aw.error[k] * &ek)) + fk.dot(&(&aw.input[k] * &fk));
    }
    total
}

fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn reference_contour(config: &IlcConfig) -> Result<Option<ReferenceContour>> {
    if config.reference.width() != 2 {
        return Ok(None);
    }
    match ReferenceContour::new(config.reference.clone()) {
        Ok(c) => Ok(Some(c)),
        Err(e) if config.coupling != CouplingMode::Identity => Err(e),
        Err(_) => Ok(None),
    }
}

fn static_coupling(
    config: &IlcConfig,
    contour: Option<&ReferenceContour>,
) -> Option<CouplingSchedule> {
    let (n, n_o, n_i) = (
        config.horizon(),
        config.reference.width(),
        config.process_sensitivity.n_i(),
    );
    match (config.coupling, contour) {
        (CouplingMode::Identity, _) => Some(CouplingSchedule::identity(n, n_o, n_i)),
        (CouplingMode::AxesLinear, Some(c)) => {
            Some(CouplingSchedule::axes_linear(c, config.input_coupling))
        }
        (CouplingMode::LinearRotation, Some(c)) => {
            Some(CouplingSchedule::linear_rotation(c, config.input_coupling))
        }
        _ => None,
    }
}

/// Coupling and composed weights that iteration `j` uses when its trial
/// produced the output `y`.
pub fn iteration_weights(
    config: &IlcConfig,
    y: &Signal,
    j: usize,
) -> Result<(CouplingSchedule, AssembledWeights)> {
    config.validate()?;
    let contour = reference_contour(config)?;
    let coupling = match static_coupling(config, contour.as_ref()) {
        Some(c) => c,
        None => {
            let errors = contour.as_ref().expect("contour exists").errors(y)?;
            CouplingSchedule::exact_from_errors(&errors, config.input_coupling)
        }
    };
    let aw = assemble(&coupling, &config.weights, j)?;
    Ok((coupling, aw))
}

/// Runs `config.iterations` trials. Row `j = 0` is the baseline with the
/// initial input.
pub fn run(config: &IlcConfig) -> Result<IlcHistory> {
    config.validate()?;
    let j_sys = &config.process_sensitivity;
    let (n, n_i, n_o) = (config.horizon(), j_sys.n_i(), j_sys.n_o());

    let contour = reference_contour(config)?;
    let static_coupling = static_coupling(config, contour.as_ref());

    let dense_required = config.solver == SolverKind::Lifted || config.oracle_check;
    let needs_dense =
        dense_required || (config.compute_margins && n * n_i <= config.dense_margin_limit);
    let lifted = if needs_dense {
        match lifted::build_lifted(j_sys, config.size_cap) {
            Ok(l) => Some(l),
            Err(e) if dense_required => return Err(e),
            Err(_) => None,
        }
    } else {
        None
    };
    let margin_opts = MarginOptions {
        dense_limit: config.dense_margin_limit,
        size_cap: config.size_cap,
    };
    let j_nonsingular = feedthrough_full_rank(j_sys);

    let e_ref = simulate(&config.sensitivity, &config.reference, None)?;
    let mut f = config
        .initial_input
        .clone()
        .unwrap_or_else(|| Signal::zeros(n, n_i));
    let mut noise = config.noise.filter(|c| c.std_dev > 0.0).map(|c| {
        (
            ChaCha8Rng::seed_from_u64(c.seed),
            Normal::new(0.0, c.std_dev).expect("validated std_dev"),
        )
    });

    let mut lqt = LqtSolver::new();
    let mut filters: Option<(AssembledWeights, IlcFilters)> = None;
    let mut last_margin: Option<(AssembledWeights, Option<f64>, MarginMethod)> = None;
    let mut first_aw: Option<AssembledWeights> = None;
    let mut iteration_invariant = true;
    let mut records = Vec::with_capacity(config.iterations + 1);
    let mut entries = Vec::with_capacity(config.iterations + 1);

    for j in 0..=config.iterations {
        let started = Instant::now();
        let jf = simulate(j_sys, &f, None).map_err(|e| e.at_iteration(j))?;
        let mut e = e_ref.sub(&jf)?;
        if let Some((rng, dist)) = noise.as_mut() {
            for k in 0..n {
                for v in e.sample_mut(k) {
                    *v += dist.sample(rng);
                }
            }
        }

        let errors: Vec<ContourErrorSample> = match &contour {
            Some(c) => c.errors(&config.reference.sub(&e)?)?,
            None => Vec::new(),
        };
        let coupling = match &static_coupling {
            Some(c) => c.clone(),
            None => CouplingSchedule::exact_from_errors(&errors, config.input_coupling),
        };

        let is_last = j == config.iterations;
        let aw = match assemble(&coupling, &config.weights, j) {
            Ok(aw) => Some(aw),
            Err(IlcError::IterationOutOfRange { .. }) if is_last => None,
            Err(err) => return Err(err.at_iteration(j)),
        };

        let mut rho = None;
        let mut cost = None;
        if let Some(aw) = &aw {
            match &first_aw {
                None => first_aw = Some(aw.clone()),
                Some(first) if !is_last && first != aw => iteration_invariant = false,
                _ => {}
            }
            let flags = flags_for(j_nonsingular, &coupling, &config.weights, aw, j)?;
            if !flags.passes() {
                let reasons = flags.violations().join(", ");
                if config.strict_convergence {
                    return Err(IlcError::ConvergenceViolation { j, reasons });
                }
                log::warn!("iteration {j}: monotonic convergence not guaranteed: {reasons}");
            }
            let (r, method) = if !config.compute_margins {
                (None, MarginMethod::Unavailable)
            } else {
                match &last_margin {
                    Some((prev, r, m)) if prev == aw => (*r, *m),
                    _ => {
                        let (r, m) = margin(j_sys, aw, lifted.as_ref(), margin_opts);
                        last_margin = Some((aw.clone(), r, m));
                        (r, m)
                    }
                }
            };
            rho = r;
            cost = Some(weighted_cost(aw, &e, &f));
            entries.push(ConvergenceEntry {
                j,
                flags,
                rho: r,
                method,
            });
        }

        let mut solver_deviation = None;
        let next = if is_last {
            None
        } else {
            let aw = aw.as_ref().expect("weights exist for update iterations");
            let mut dense_update = || -> Result<Signal> {
                let lifted = lifted.as_ref().expect("lifted system built");
                let reuse = matches!(&filters, Some((prev, _)) if prev == aw);
                if !reuse {
                    let mut filt = lifted::compute_filters(
                        lifted,
                        &aw.dense_error(),
                        &aw.dense_input(),
                        &aw.dense_input_change(),
                    )?;
                    filt.iteration = j;
                    filters = Some((aw.clone(), filt));
                }
                lifted::ilc_update(&filters.as_ref().unwrap().1, &f, &e)
            };
            let next = match config.solver {
                SolverKind::Lqt => lqt.update(j_sys, aw, &e, &f),
                SolverKind::Lifted => dense_update(),
            }
            .map_err(|err| err.at_iteration(j))?;
            if config.oracle_check {
                let oracle = match config.solver {
                    SolverKind::Lqt => dense_update(),
                    SolverKind::Lifted => LqtSolver::new().update(j_sys, aw, &e, &f),
                }
                .map_err(|err| err.at_iteration(j))?;
                let (a, b) = match config.solver {
                    SolverKind::Lqt => (&next, &oracle),
                    SolverKind::Lifted => (&oracle, &next),
                };
                let dev = a.sub(b)?.max_abs() / (1.0 + b.max_abs());
                solver_deviation = Some(dev);
            }
            Some(next)
        };

        let contour_errors: Vec<f64> = errors.iter().map(|s| s.contour_error).collect();
        let tangential_errors: Vec<f64> = errors.iter().map(|s| s.tangential_error).collect();
        records.push(IterationRecord {
            j,
            error_norm: e.norm(),
            contour_norm: contour.as_ref().map(|_| norm_of(&contour_errors)),
            tangential_norm: contour.as_ref().map(|_| norm_of(&tangential_errors)),
            axis_norms: (0..n_o).map(|i| e.channel_norm(i)).collect(),
            contour_errors,
            tangential_errors,
            cost,
            rho,
            solver_deviation,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            f: f.clone(),
            e,
        });
        if let Some(next) = next {
            f = next;
        }
    }

    Ok(IlcHistory {
        reference: config.reference.clone(),
        records,
        report: ConvergenceReport::from_entries(entries, iteration_invariant),
    })
}
