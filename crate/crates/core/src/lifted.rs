//! Dense lifted representation and closed-form norm-optimal filters.
//!
//! Over a horizon `N` the system `J` acts on stacked signals as one
//! block-lower-triangular matrix. The update minimizing
//!
//! ```text
//! |e_{j+1}|^2_{W_ec} + |f_{j+1}|^2_{W_fc} + |f_{j+1} - f_j|^2_{W_dfc}
//! ```
//!
//! is `f_{j+1} = Q f_j + L e_j` with `M = J' W_ec J + W_fc + W_dfc`,
//! `Q = M^-1 (J' W_ec J + W_dfc)` and `L = M^-1 J' W_ec`.
//!
//! Memory and time grow as `O(N^2)` and `O(N^3)`; this path is the oracle for
//! [`crate::lqt`], guarded by a size cap.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{IlcError, Result};
use crate::linalg::{self, Definiteness};
use crate::signal::Signal;
use crate::state_space::LtvStateSpace;

/// Default cap on `N * max(n_i, n_o)` for dense computations.
pub const DEFAULT_SIZE_CAP: usize = 6000;

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedSystem {
    matrix: DMatrix<f64>,
    n_o: usize,
    n_i: usize,
    horizon: usize,
}

impl LiftedSystem {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_o(&self) -> usize {
        self.n_o
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    /// Block `(i, j)`: the response at sample `i` to an input at sample `j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.matrix
            .view((i * self.n_o, j * self.n_i), (self.n_o, self.n_i))
            .into_owned()
    }

    pub fn apply(&self, u: &Signal) -> Result<Signal> {
        u.check_shape("lifted input", self.horizon, self.n_i)?;
        Signal::from_lifted(self.n_o, &(&self.matrix * u.to_lifted()))
    }
}

pub fn check_size_cap(horizon: usize, n_i: usize, n_o: usize, cap: usize) -> Result<()> {
    let size = horizon * n_i.max(n_o);
    if size > cap {
        Err(IlcError::SizeCap { size, cap })
    } else {
        Ok(())
    }
}

/// Block `(i, i)` is `D(i)`, block `(i, j)` for `i > j` is
/// `C(i) A(i-1) ... A(j+1) B(j)`, blocks above the diagonal are zero.
pub fn build_lifted(sys: &LtvStateSpace, cap: usize) -> Result<LiftedSystem> {
    let (n, n_i, n_o) = (sys.horizon(), sys.n_i(), sys.n_o());
    check_size_cap(n, n_i, n_o, cap)?;
    let mut matrix = DMatrix::zeros(n * n_o, n * n_i);
    for j in 0..n {
        matrix
            .view_mut((j * n_o, j * n_i), (n_o, n_i))
            .copy_from(sys.d(j));
        // state response at sample i to a unit input at j
        let mut x = sys.b(j).clone();
        for i in (j + 1)..n {
            matrix
                .view_mut((i * n_o, j * n_i), (n_o, n_i))
                .copy_from(&(sys.c(i) * &x));
            if i + 1 < n {
                x = sys.a(i) * x;
            }
        }
    }
    Ok(LiftedSystem {
        matrix,
        n_o,
        n_i,
        horizon: n,
    })
}

#[derive(Clone, Debug)]
pub struct IlcFilters {
    pub q: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub iteration: usize,
}

fn check_weight(name: &str, w: &DMatrix<f64>, side: usize) -> Result<()> {
    if w.shape() != (side, side) {
        return Err(IlcError::dim(
            name,
            None,
            format!("{side}x{side}"),
            format!("{}x{}", w.nrows(), w.ncols()),
        ));
    }
    let tol = linalg::SYMMETRY_ATOL * linalg::max_abs(w).max(1.0);
    if linalg::asymmetry(w) > tol {
        return Err(IlcError::Weights(format!("{name} is not symmetric")));
    }
    Ok(())
}

struct NormalEquations {
    /// `J' W_ec`
    jtw: DMatrix<f64>,
    /// `J' W_ec J`
    jtwj: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

fn factor_normal_matrix(
    lifted: &LiftedSystem,
    w_ec: &DMatrix<f64>,
    w_fc: &DMatrix<f64>,
    w_dfc: &DMatrix<f64>,
) -> Result<NormalEquations> {
    let (rows, cols) = lifted.matrix.shape();
    check_weight("W_ec", w_ec, rows)?;
    check_weight("W_fc", w_fc, cols)?;
    check_weight("W_dfc", w_dfc, cols)?;

    let j = &lifted.matrix;
    let jtw = j.transpose() * w_ec;
    let mut jtwj = &jtw * j;
    linalg::symmetrize(&mut jtwj);
    let m = &jtwj + w_fc + w_dfc;
    let chol = Cholesky::new(m).ok_or_else(|| IlcError::SingularNormalMatrix {
        reason: diagnose_singular(w_ec, w_fc),
    })?;
    Ok(NormalEquations { jtw, jtwj, chol })
}

fn diagnose_singular(w_ec: &DMatrix<f64>, w_fc: &DMatrix<f64>) -> String {
    let fc = linalg::classify(w_fc);
    if fc.is_pd() {
        "numerically singular although W_fc is positive definite".into()
    } else if linalg::classify(w_ec) != Definiteness::PositiveDefinite {
        "W_ec not positive definite and W_fc not positive definite".into()
    } else {
        "J singular and W_fc not positive definite".into()
    }
}

/// Closed-form filters for the dense weighting-coupling matrices.
pub fn compute_filters(
    lifted: &LiftedSystem,
    w_ec: &DMatrix<f64>,
    w_fc: &DMatrix<f64>,
    w_dfc: &DMatrix<f64>,
) -> Result<IlcFilters> {
    let ne = factor_normal_matrix(lifted, w_ec, w_fc, w_dfc)?;
    let q = ne.chol.solve(&(&ne.jtwj + w_dfc));
    let l = ne.chol.solve(&ne.jtw);
    Ok(IlcFilters { q, l, iteration: 0 })
}

/// `f_{j+1} = Q f_j + L e_j`.
pub fn ilc_update(filters: &IlcFilters, f: &Signal, e: &Signal) -> Result<Signal> {
    let (n_fi, n_e) = (filters.l.nrows(), filters.l.ncols());
    if f.as_slice().len() != n_fi {
        return Err(IlcError::dim(
            "f_j (stacked)",
            None,
            n_fi,
            f.as_slice().len(),
        ));
    }
    if e.as_slice().len() != n_e {
        return Err(IlcError::dim(
            "e_j (stacked)",
            None,
            n_e,
            e.as_slice().len(),
        ));
    }
    let next = &filters.q * f.to_lifted() + &filters.l * e.to_lifted();
    Signal::from_lifted(f.width(), &next)
}

/// `sigma_max(M^-1 W_dfc)`, the 2-norm of the iteration map `Q - L J`.
pub fn contraction_margin(
    lifted: &LiftedSystem,
    w_ec: &DMatrix<f64>,
    w_fc: &DMatrix<f64>,
    w_dfc: &DMatrix<f64>,
) -> Result<f64> {
    if linalg::max_abs(w_dfc) == 0.0 {
        // Q - L J vanishes identically; also valid when M is singular.
        check_weight("W_dfc", w_dfc, lifted.matrix.ncols())?;
        return Ok(0.0);
    }
    let ne = factor_normal_matrix(lifted, w_ec, w_fc, w_dfc)?;
    Ok(linalg::spectral_norm(&ne.chol.solve(w_dfc)))
}

/// Cost of the norm-optimal criterion for candidate `f_next`, with the next
/// error predicted as `e_j - J (f_next - f_j)`.
pub fn lifted_cost(
    lifted: &LiftedSystem,
    w_ec: &DMatrix<f64>,
    w_fc: &DMatrix<f64>,
    w_dfc: &DMatrix<f64>,
    e: &Signal,
    f: &Signal,
    f_next: &Signal,
) -> Result<f64> {
    let df = f_next.to_lifted() - f.to_lifted();
    let e_next: DVector<f64> = e.to_lifted() - &lifted.matrix * &df;
    let fv = f_next.to_lifted();
    Ok(e_next.dot(&(w_ec * &e_next)) + fv.dot(&(w_fc * &fv)) + df.dot(&(w_dfc * &df)))
}
