//! Norm-optimal cross-coupled iterative learning control (ILC) for multi-axis
//! contour tracking.
//!
//! The crate is organised bottom-up:
//!
//! - [`state_space`]: discrete-time LTV/LTI systems, simulation and the
//!   feedback interconnection producing the process sensitivity `J` and the
//!   sensitivity `S`.
//! - [`lifted`]: the dense lifted convolution matrix and the closed-form
//!   norm-optimal filters `Q`, `L`. This is the reference solver.
//! - [`contour`]: exact closest-point contour errors and the per-sample
//!   coupling blocks for the supported coupling modes.
//! - [`weights`]: time- and iteration-varying weight schedules and their
//!   composition with the coupling blocks.
//! - [`lqt`]: the O(N) update obtained by solving a linear quadratic tracking
//!   problem with a backward Riccati sweep.
//! - [`engine`]: the trial loop, convergence-condition checks and history.

pub mod contour;
pub mod engine;
pub mod error;
pub mod lifted;
pub mod linalg;
pub mod lqt;
pub mod signal;
pub mod state_space;
pub mod weights;

pub use contour::{
    coupling_axes_linear, coupling_rotation, exact_coupling_schedule, ClosestPoint,
    ContourErrorSample, CouplingMode, CouplingSchedule, InputCoupling, Point2, ReferenceContour,
};
pub use engine::{
    check_convergence_conditions, contraction_estimate, iteration_weights, power_margin, run,
    ConditionFlags, ConvergenceEntry, ConvergenceReport, IlcConfig, IlcHistory, IterationRecord,
    MarginMethod, MarginOptions, NoiseConfig, SolverKind, Verdict,
};
pub use error::{IlcError, Result};
pub use lifted::{build_lifted, compute_filters, ilc_update, IlcFilters, LiftedSystem};
pub use lqt::{lqt_update, LqtSolver, SweepDiagnostics};
pub use signal::Signal;
pub use state_space::{closed_loop, simulate, LtvStateSpace};
pub use weights::{
    assemble, example_contour_weights, AssembledWeights, BlockSchedule, WeightSchedule,
    WeightSegment, WeightSet,
};
