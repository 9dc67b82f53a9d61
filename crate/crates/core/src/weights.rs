//! Time- and iteration-varying weights and their composition with the
//! coupling blocks: `W_ec^k = C_e^k' W_e^k C_e^k`, `W_fc^k = C_f^k' W_f^k C_f^k`
//! and `W_dfc^k = C_f^k' W_df^k C_f^k`.

use nalgebra::DMatrix;

use crate::contour::CouplingSchedule;
use crate::error::{IlcError, Result};
use crate::linalg::{self, Definiteness};

/// Block applied on samples `start..end`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSegment {
    pub start: usize,
    pub end: usize,
    pub block: DMatrix<f64>,
}

/// Piecewise-constant block schedule: a default block overridden on
/// non-overlapping sample ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSchedule {
    default: DMatrix<f64>,
    segments: Vec<WeightSegment>,
    definiteness: Definiteness,
}

fn validate_block(what: &str, m: &DMatrix<f64>) -> Result<Definiteness> {
    if !m.is_square() {
        return Err(IlcError::Weights(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(IlcError::Weights(format!("{what} has non-finite entries")));
    }
    if linalg::asymmetry(m) > linalg::SYMMETRY_ATOL {
        return Err(IlcError::Weights(format!("{what} is not symmetric")));
    }
    let def = linalg::classify(m);
    if !def.is_psd() {
        return Err(IlcError::Weights(format!(
            "{what} is not positive semidefinite"
        )));
    }
    Ok(def)
}

impl BlockSchedule {
    pub fn constant(block: DMatrix<f64>) -> Result<Self> {
        Self::new(block, Vec::new())
    }

    pub fn new(default: DMatrix<f64>, mut segments: Vec<WeightSegment>) -> Result<Self> {
        let mut definiteness = validate_block("default block", &default)?;
        segments.sort_by_key(|s| s.start);
        for (i, s) in segments.iter().enumerate() {
            if s.start >= s.end {
                return Err(IlcError::Weights(format!(
                    "segment [{}, {}) is empty",
                    s.start, s.end
                )));
            }
            if s.block.shape() != default.shape() {
                return Err(IlcError::Weights(format!(
                    "segment [{}, {}) block is {}x{}, default is {}x{}",
                    s.start,
                    s.end,
                    s.block.nrows(),
                    s.block.ncols(),
                    default.nrows(),
                    default.ncols()
                )));
            }
            if i > 0 && segments[i - 1].end > s.start {
                return Err(IlcError::Weights(format!(
                    "segments [{}, {}) and [{}, {}) overlap",
                    segments[i - 1].start,
                    segments[i - 1].end,
                    s.start,
                    s.end
                )));
            }
            let def = validate_block(&format!("segment [{}, {}) block", s.start, s.end), &s.block)?;
            definiteness = definiteness.meet(def);
        }
        Ok(BlockSchedule {
            default,
            segments,
            definiteness,
        })
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        self.segments
            .iter()
            .find(|s| s.start <= k && k < s.end)
            .map_or(&self.default, |s| &s.block)
    }

    pub fn dim(&self) -> usize {
        self.default.nrows()
    }

    /// Weakest definiteness over all blocks.
    pub fn definiteness(&self) -> Definiteness {
        self.definiteness
    }

    pub fn default_block(&self) -> &DMatrix<f64> {
        &self.default
    }

    pub fn segments(&self) -> &[WeightSegment] {
        &self.segments
    }
}

/// Weights on the coupled error, the coupled input and the coupled input
/// change.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub error: BlockSchedule,
    pub input: BlockSchedule,
    pub input_change: BlockSchedule,
}

impl WeightSet {
    pub fn new(
        error: BlockSchedule,
        input: BlockSchedule,
        input_change: BlockSchedule,
    ) -> Result<Self> {
        if input.dim() != input_change.dim() {
            return Err(IlcError::Weights(format!(
                "input weight is {0}x{0} but input-change weight is {1}x{1}",
                input.dim(),
                input_change.dim()
            )));
        }
        Ok(WeightSet {
            error,
            input,
            input_change,
        })
    }

    pub fn constant(
        error: DMatrix<f64>,
        input: DMatrix<f64>,
        input_change: DMatrix<f64>,
    ) -> Result<Self> {
        Self::new(
            BlockSchedule::constant(error)?,
            BlockSchedule::constant(input)?,
            BlockSchedule::constant(input_change)?,
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IterationSelector {
    Fixed(WeightSet),
    /// One weight set per iteration; a finite table.
    PerIteration(Vec<WeightSet>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSchedule {
    selector: IterationSelector,
}

impl WeightSchedule {
    pub fn fixed(set: WeightSet) -> Self {
        WeightSchedule {
            selector: IterationSelector::Fixed(set),
        }
    }

    pub fn per_iteration(table: Vec<WeightSet>) -> Result<Self> {
        if table.is_empty() {
            return Err(IlcError::Weights("per-iteration table is empty".into()));
        }
        Ok(WeightSchedule {
            selector: IterationSelector::PerIteration(table),
        })
    }

    pub fn selector(&self) -> &IterationSelector {
        &self.selector
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.selector, IterationSelector::Fixed(_))
    }

    pub fn set(&self, j: usize) -> Result<&WeightSet> {
        match &self.selector {
            IterationSelector::Fixed(s) => Ok(s),
            IterationSelector::PerIteration(t) => t
                .get(j)
                .ok_or(IlcError::IterationOutOfRange { j, len: t.len() }),
        }
    }

    /// Number of distinct weight sets.
    pub fn table_len(&self) -> usize {
        match &self.selector {
            IterationSelector::Fixed(_) => 1,
            IterationSelector::PerIteration(t) => t.len(),
        }
    }
}

/// Time- and iteration-invariant weights that favour the contour error over
/// the tangential error, with a smaller input penalty along the contour
/// error: `W_e = diag(1.5, 0.5)`, `W_f = diag(1e-10, 1e-9)`,
/// `W_df = 1e-10 I`.
pub fn example_contour_weights() -> WeightSchedule {
    let set = WeightSet::constant(
        DMatrix::from_diagonal(&nalgebra::dvector![1.5, 0.5]),
        DMatrix::from_diagonal(&nalgebra::dvector![1e-10, 1e-9]),
        DMatrix::identity(2, 2) * 1e-10,
    )
    .expect("constant diagonal weights are valid");
    WeightSchedule::fixed(set)
}

/// Per-sample composed blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct AssembledWeights {
    pub error: Vec<DMatrix<f64>>,
    pub input: Vec<DMatrix<f64>>,
    pub input_change: Vec<DMatrix<f64>>,
}

impl AssembledWeights {
    pub fn horizon(&self) -> usize {
        self.error.len()
    }

    pub fn dense_error(&self) -> DMatrix<f64> {
        linalg::block_diag(&self.error)
    }

    pub fn dense_input(&self) -> DMatrix<f64> {
        linalg::block_diag(&self.input)
    }

    pub fn dense_input_change(&self) -> DMatrix<f64> {
        linalg::block_diag(&self.input_change)
    }

    /// First sample whose composed input-change block is not PD.
    pub fn input_change_pd_violation(&self) -> Option<usize> {
        self.input_change
            .iter()
            .position(|b| !linalg::classify(b).is_pd())
    }
}

fn compose(c: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = c.transpose() * w * c;
    linalg::symmetrize(&mut m);
    m
}

/// Composes the weights of iteration `j` with the coupling blocks.
pub fn assemble(
    coupling: &CouplingSchedule,
    weights: &WeightSchedule,
    j: usize,
) -> Result<AssembledWeights> {
    let set = weights.set(j)?;
    if set.error.dim() != coupling.n_ce() {
        return Err(IlcError::dim(
            "error weight",
            None,
            format!("{0}x{0} (n_ce)", coupling.n_ce()),
            format!("{0}x{0}", set.error.dim()),
        ));
    }
    if set.input.dim() != coupling.n_cf() {
        return Err(IlcError::dim(
            "input weight",
            None,
            format!("{0}x{0} (n_cf)", coupling.n_cf()),
            format!("{0}x{0}", set.input.dim()),
        ));
    }
    let n = coupling.horizon();
    let mut out = AssembledWeights {
        error: Vec::with_capacity(n),
        input: Vec::with_capacity(n),
        input_change: Vec::with_capacity(n),
    };
    for k in 0..n {
        let (ce, cf) = (coupling.error_block(k), coupling.input_block(k));
        out.error.push(compose(ce, set.error.block(k)));
        out.input.push(compose(cf, set.input.block(k)));
        out.input_change
            .push(compose(cf, set.input_change.block(k)));
    }
    Ok(out)
}
