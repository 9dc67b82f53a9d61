// Random instances and independent dense oracles shared by the integration
// tests and the acceptance suite.
#![allow(dead_code)]

use ccilc::{
    assemble, AssembledWeights, BlockSchedule, CouplingMode, CouplingSchedule, InputCoupling,
    LtvStateSpace, ReferenceContour, Signal, WeightSchedule, WeightSegment, WeightSet,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut TestRng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn rand_signal(rng: &mut TestRng, n: usize, width: usize, scale: f64) -> Signal {
    let data = (0..n * width)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect();
    Signal::from_stacked(width, data).unwrap()
}

fn scaled_to(m: DMatrix<f64>, bound: f64) -> DMatrix<f64> {
    if m.is_empty() {
        return m;
    }
    let s = m.singular_values().max();
    if s > bound {
        m * (bound / s)
    } else {
        m
    }
}

/// Random stable two-axis system with `n_x <= 4`. `singular` zeroes the
/// feedthrough so that the lifted matrix loses rank.
pub fn random_system(rng: &mut TestRng, n: usize, ltv: bool, singular: bool) -> LtvStateSpace {
    let n_x = rng.random_range(0..=4);
    let d0 = if singular {
        DMatrix::zeros(2, 2)
    } else {
        DMatrix::identity(2, 2) + randn(rng, 2, 2) * 0.3
    };
    let a0 = scaled_to(randn(rng, n_x, n_x), 0.9);
    let b0 = randn(rng, n_x, 2);
    let c0 = randn(rng, 2, n_x);
    if !ltv {
        return LtvStateSpace::lti(a0, b0, c0, d0, n).unwrap();
    }
    let (a1, b1, c1) = (randn(rng, n_x, n_x), randn(rng, n_x, 2), randn(rng, 2, n_x));
    let d1 = randn(rng, 2, 2);
    let w: f64 = rng.random_range(0.05..0.5);
    let mut sys = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for k in 0..n {
        let s = (w * k as f64).sin();
        sys.0.push(scaled_to(&a0 + &a1 * (0.2 * s), 0.9));
        sys.1.push(&b0 + &b1 * (0.2 * s));
        sys.2.push(&c0 + &c1 * (0.2 * s));
        sys.3.push(if singular {
            DMatrix::zeros(2, 2)
        } else {
            &d0 + &d1 * (0.05 * s)
        });
    }
    LtvStateSpace::ltv(sys.0, sys.1, sys.2, sys.3).unwrap()
}

/// Feedthrough-dominated system whose lifted matrix is well conditioned,
/// for the deadbeat checks where `J` is inverted in one step.
pub fn random_invertible_system(rng: &mut TestRng, n: usize) -> LtvStateSpace {
    let n_x = rng.random_range(0..=4);
    let d = DMatrix::identity(2, 2) * 2.0 + randn(rng, 2, 2) * 0.3;
    let a = scaled_to(randn(rng, n_x, n_x), 0.8);
    let b = randn(rng, n_x, 2) * 0.3;
    let c = randn(rng, 2, n_x) * 0.3;
    LtvStateSpace::lti(a, b, c, d, n).unwrap()
}

/// Random walk polyline through `n` samples, channels ordered `[y, x]`.
pub fn random_contour(rng: &mut TestRng, n: usize) -> Signal {
    let mut heading: f64 = rng.random_range(-3.1..3.1);
    let (mut x, mut y) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut data = Vec::with_capacity(2 * n);
    for k in 0..n {
        data.push(y);
        data.push(x);
        // occasional standstill sample exercises zero-length segments
        if k > 0 && rng.random_bool(0.05) {
            continue;
        }
        heading += 0.5 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
        let step = rng.random_range(0.5..1.5);
        x += step * heading.cos();
        y += step * heading.sin();
    }
    Signal::from_stacked(2, data).unwrap()
}

pub fn random_psd(rng: &mut TestRng, dim: usize, pd: bool) -> DMatrix<f64> {
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    let g = randn(rng, dim, dim);
    let mut m = &g * g.transpose() * scale;
    if pd {
        m += DMatrix::identity(dim, dim) * (0.1 * scale);
    } else if rng.random_bool(0.5) {
        // knock out one direction
        let v = randn(rng, dim, 1);
        let p = DMatrix::identity(dim, dim) - &v * v.transpose() / v.norm_squared();
        m = &p * m * &p;
    }
    (&m + m.transpose()) * 0.5
}

fn random_blocks(rng: &mut TestRng, dim: usize, n: usize, pd: bool, zero: bool) -> BlockSchedule {
    let make = |rng: &mut TestRng| {
        if zero {
            DMatrix::zeros(dim, dim)
        } else {
            random_psd(rng, dim, pd)
        }
    };
    let default = make(rng);
    let mut segments = Vec::new();
    if n >= 4 && rng.random_bool(0.5) {
        let start = rng.random_range(0..n / 2);
        let end = rng.random_range(start + 1..=n);
        segments.push(WeightSegment {
            start,
            end,
            block: make(rng),
        });
    }
    BlockSchedule::new(default, segments).unwrap()
}

/// Random time-varying weights with `W_df` positive definite.
pub fn random_weights(rng: &mut TestRng, n_ce: usize, n_cf: usize, n: usize) -> WeightSet {
    let error = random_blocks(rng, n_ce, n, true, false);
    let zero_f = rng.random_bool(0.2);
    let pd_f = rng.random_bool(0.5);
    let input = random_blocks(rng, n_cf, n, pd_f, zero_f);
    let input_change = random_blocks(rng, n_cf, n, true, false);
    WeightSet::new(error, input, input_change).unwrap()
}

pub const MODES: [CouplingMode; 4] = [
    CouplingMode::Identity,
    CouplingMode::AxesLinear,
    CouplingMode::LinearRotation,
    CouplingMode::ExactRotation,
];

pub struct Instance {
    pub sys: LtvStateSpace,
    pub reference: Signal,
    pub coupling: CouplingSchedule,
    pub weights: WeightSchedule,
    pub aw: AssembledWeights,
    pub e: Signal,
    pub f: Signal,
}

pub fn coupling_for(
    mode: CouplingMode,
    input: InputCoupling,
    reference: &Signal,
    e: &Signal,
) -> CouplingSchedule {
    let n = reference.len();
    if mode == CouplingMode::Identity {
        return CouplingSchedule::identity(n, 2, 2);
    }
    let contour = ReferenceContour::new(reference.clone()).unwrap();
    match mode {
        CouplingMode::AxesLinear => CouplingSchedule::axes_linear(&contour, input),
        CouplingMode::LinearRotation => CouplingSchedule::linear_rotation(&contour, input),
        _ => {
            let y = reference.sub(e).unwrap();
            CouplingSchedule::exact_from_errors(&contour.errors(&y).unwrap(), input)
        }
    }
}

pub fn random_instance(rng: &mut TestRng, n: usize, mode: CouplingMode) -> Instance {
    let ltv = rng.random_bool(0.5);
    let singular = rng.random_bool(0.1);
    let sys = random_system(rng, n, ltv, singular);
    let reference = random_contour(rng, n);
    let e = rand_signal(rng, n, 2, 0.5);
    let f = rand_signal(rng, n, 2, 1.0);
    let input = if rng.random_bool(0.3) {
        InputCoupling::Identity
    } else {
        InputCoupling::SameAsError
    };
    let coupling = coupling_for(mode, input, &reference, &e);
    let mut set = random_weights(rng, coupling.n_ce(), coupling.n_cf(), n);
    if singular {
        // keep the problem well posed: W_f positive definite
        set.input = BlockSchedule::constant(random_psd(rng, coupling.n_cf(), true)).unwrap();
    }
    let weights = WeightSchedule::fixed(set);
    let aw = assemble(&coupling, &weights, 0).unwrap();
    Instance {
        sys,
        reference,
        coupling,
        weights,
        aw,
        e,
        f,
    }
}

/// Lifted matrix from explicit Markov parameters
/// `J[i][j] = C_i A_{i-1} ... A_{j+1} B_j`, `J[i][i] = D_i`.
pub fn oracle_lifted(sys: &LtvStateSpace) -> DMatrix<f64> {
    let (n, n_i, n_o, n_x) = (sys.horizon(), sys.n_i(), sys.n_o(), sys.n_x());
    let mut j = DMatrix::zeros(n * n_o, n * n_i);
    for col in 0..n {
        j.view_mut((col * n_o, col * n_i), (n_o, n_i))
            .copy_from(sys.d(col));
        let mut phi = sys.b(col).clone();
        for row in col + 1..n {
            if n_x > 0 {
                j.view_mut((row * n_o, col * n_i), (n_o, n_i))
                    .copy_from(&(sys.c(row) * &phi));
                phi = sys.a(row) * phi;
            }
        }
    }
    j
}

pub fn dense(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = blocks[0].nrows();
    let mut m = DMatrix::zeros(d * blocks.len(), d * blocks.len());
    for (k, b) in blocks.iter().enumerate() {
        m.view_mut((k * d, k * d), (d, d)).copy_from(b);
    }
    m
}

/// Minimizer of the next-trial cost from the normal equations, solved by LU.
pub fn oracle_update(
    j: &DMatrix<f64>,
    aw: &AssembledWeights,
    e: &Signal,
    f: &Signal,
) -> DVector<f64> {
    let (we, wf, wd) = (dense(&aw.error), dense(&aw.input), dense(&aw.input_change));
    let fv = f.to_lifted();
    let h = j.transpose() * &we * j + &wf + &wd;
    let rhs = j.transpose() * &we * (e.to_lifted() + j * &fv) + &wd * &fv;
    h.lu().solve(&rhs).expect("well-posed instance")
}

/// Cost of candidate `f_next` with the predicted error `e - J (f_next - f)`.
pub fn oracle_cost(
    j: &DMatrix<f64>,
    aw: &AssembledWeights,
    e: &Signal,
    f: &Signal,
    f_next: &DVector<f64>,
) -> f64 {
    let (we, wf, wd) = (dense(&aw.error), dense(&aw.input), dense(&aw.input_change));
    let df = f_next - f.to_lifted();
    let en = e.to_lifted() - j * &df;
    en.dot(&(&we * &en)) + f_next.dot(&(&wf * f_next)) + df.dot(&(&wd * &df))
}

pub fn oracle_gradient(
    j: &DMatrix<f64>,
    aw: &AssembledWeights,
    e: &Signal,
    f: &Signal,
    f_next: &DVector<f64>,
) -> DVector<f64> {
    let (we, wf, wd) = (dense(&aw.error), dense(&aw.input), dense(&aw.input_change));
    let df = f_next - f.to_lifted();
    let en = e.to_lifted() - j * &df;
    (-(j.transpose() * (&we * en)) + &wf * f_next + &wd * df) * 2.0
}

pub fn sup(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// `|a - b|_inf / (1 + |b|_inf)`.
pub fn rel_sup(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    sup(&(a - b)) / (1.0 + sup(b))
}
