//! O(N) norm-optimal update via linear quadratic tracking.
//!
//! With `Df = f_{j+1} - f_j` the next error is `e_{j+1} = e_j - J Df`, so the
//! lifted criterion becomes a finite-horizon tracking problem for the
//! realization `(A, B, C, D)` of `J`, driven by `Df` and with the augmented
//! output
//!
//! ```text
//! y(k) = [C; 0] dx(k) + [D; I] Df(k)          (Cbar, Dbar)
//! ```
//!
//! tracking `r(k) = [e_j(k); -f_j(k)]` under stage weights
//! `S^k = blockdiag(W_ec^k, W_fc^k)` and `R^k = W_dfc^k`. Every sample
//! `k = 0..N-1` carries a full stage cost and the sweep starts from
//! `P(N) = 0`, `v(N) = 0`. The backward sweep is
//!
//! ```text
//! Rbar(k) = R^k + Dbar' S^k Dbar + B' P(k+1) B
//! Pbar(k) = B' P(k+1) A + Dbar' S^k Cbar
//! P(k)    = A' P(k+1) A + Cbar' S^k Cbar - Pbar' Rbar^-1 Pbar
//! v(k)    = -(Pbar' Rbar^-1 Dbar' - Cbar') S^k r(k) - (Pbar' Rbar^-1 B' - A') v(k+1)
//! ```
//!
//! and the forward pass from `dx(0) = 0` applies
//! `Df(k) = Rbar^-1 (-Pbar dx(k) + Dbar' S^k r(k) + B' v(k+1))`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{IlcError, Result};
use crate::linalg;
use crate::signal::Signal;
use crate::state_space::LtvStateSpace;
use crate::weights::AssembledWeights;

/// Condition numbers of `Rbar(k)` above this are flagged.
pub const CONDITION_FLAG_THRESHOLD: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepDiagnostics {
    /// Largest eigenvalue ratio of `Rbar(k)` over the sweep.
    pub max_condition: f64,
    pub ill_conditioned: bool,
    /// Largest `max |P - P'|` before symmetrization, relative to `max |P|`.
    pub max_asymmetry: f64,
    /// Bytes held by the stored sweep (`P`, `v`, gains).
    pub peak_memory_bytes: usize,
    pub state_dim: usize,
    /// `n_x = 0`: the problem decouples per sample and no Riccati matrices
    /// are produced.
    pub degenerate_state: bool,
}

/// Reusable solver; keeps the last sweep for inspection.
#[derive(Clone, Debug, Default)]
pub struct LqtSolver {
    riccati: Vec<DMatrix<f64>>,
    adjoint: Vec<DVector<f64>>,
    diagnostics: Option<SweepDiagnostics>,
}

struct Stage {
    /// `Rbar^-1 Pbar`
    gain: DMatrix<f64>,
    /// `Rbar^-1 (Dbar' S r + B' v(k+1))`
    feedforward: DVector<f64>,
}

fn stage_weight(aw: &AssembledWeights, k: usize) -> DMatrix<f64> {
    let (we, wf) = (&aw.error[k], &aw.input[k]);
    let (no, ni) = (we.nrows(), wf.nrows());
    let mut s = DMatrix::zeros(no + ni, no + ni);
    s.view_mut((0, 0), (no, no)).copy_from(we);
    s.view_mut((no, no), (ni, ni)).copy_from(wf);
    s
}

fn finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

impl LqtSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Riccati matrices `P(0..N)` of the last sweep; empty when `n_x = 0`.
    pub fn riccati(&self) -> &[DMatrix<f64>] {
        &self.riccati
    }

    /// Adjoint vectors `v(0..N)` of the last sweep.
    pub fn adjoint(&self) -> &[DVector<f64>] {
        &self.adjoint
    }

    pub fn diagnostics(&self) -> Option<&SweepDiagnostics> {
        self.diagnostics.as_ref()
    }

    fn check_inputs(
        sys: &LtvStateSpace,
        aw: &AssembledWeights,
        e: &Signal,
        f: &Signal,
    ) -> Result<()> {
        let (n, n_i, n_o) = (sys.horizon(), sys.n_i(), sys.n_o());
        e.check_shape("e_j", n, n_o)?;
        f.check_shape("f_j", n, n_i)?;
        if aw.horizon() != n {
            return Err(IlcError::dim("weight horizon", None, n, aw.horizon()));
        }
        for k in 0..n {
            let shape_ok = aw.error[k].shape() == (n_o, n_o)
                && aw.input[k].shape() == (n_i, n_i)
                && aw.input_change[k].shape() == (n_i, n_i);
            if !shape_ok {
                return Err(IlcError::dim(
                    "composed weight blocks",
                    Some(k),
                    format!("{n_o}x{n_o}, {n_i}x{n_i}, {n_i}x{n_i}"),
                    format!(
                        "{:?}, {:?}, {:?}",
                        aw.error[k].shape(),
                        aw.input[k].shape(),
                        aw.input_change[k].shape()
                    ),
                ));
            }
        }
        if let Some(k) = aw.input_change_pd_violation() {
            return Err(IlcError::InputChangeWeightNotPd { sample: k });
        }
        Ok(())
    }

    /// Optimal `f_{j+1}` for the trial data `(e_j, f_j)`.
    pub fn update(
        &mut self,
        sys: &LtvStateSpace,
        aw: &AssembledWeights,
        e: &Signal,
        f: &Signal,
    ) -> Result<Signal> {
        Self::check_inputs(sys, aw, e, f)?;
        let (n, n_x, n_i, n_o) = (sys.horizon(), sys.n_x(), sys.n_i(), sys.n_o());

        self.riccati = vec![DMatrix::zeros(n_x, n_x); if n_x > 0 { n + 1 } else { 0 }];
        self.adjoint = vec![DVector::zeros(n_x); if n_x > 0 { n + 1 } else { 0 }];
        self.diagnostics = None;
        let mut stages: Vec<Stage> = Vec::with_capacity(n);

        let mut p_next = DMatrix::<f64>::zeros(n_x, n_x);
        let mut v_next = DVector::<f64>::zeros(n_x);
        let mut max_condition = 0.0_f64;
        let mut max_asymmetry = 0.0_f64;

        for k in (0..n).rev() {
            let r_k = &aw.input_change[k];
            let (a, b, c, d) = (sys.a(k), sys.b(k), sys.c(k), sys.d(k));
            let s = stage_weight(aw, k);
            let mut c_bar = DMatrix::zeros(n_o + n_i, n_x);
            c_bar.view_mut((0, 0), (n_o, n_x)).copy_from(c);
            let mut d_bar = DMatrix::zeros(n_o + n_i, n_i);
            d_bar.view_mut((0, 0), (n_o, n_i)).copy_from(d);
            d_bar.view_mut((n_o, 0), (n_i, n_i)).fill_with_identity();
            let mut r = DVector::zeros(n_o + n_i);
            r.rows_mut(0, n_o).copy_from_slice(e.sample(k));
            r.rows_mut(n_o, n_i)
                .iter_mut()
                .zip(f.sample(k))
                .for_each(|(dst, v)| *dst = -v);

            let dts = d_bar.transpose() * &s;
            let cts = c_bar.transpose() * &s;
            let btp = b.transpose() * &p_next;

            let mut r_bar = r_k + &dts * &d_bar + &btp * b;
            linalg::symmetrize(&mut r_bar);
            let p_bar = &btp * a + &dts * &c_bar;
            let sr = &s * &r;

            let ev = linalg::symmetric_eigenvalues(&r_bar);
            if let (Some(lo), Some(hi)) = (ev.first(), ev.last()) {
                let cond = if *lo > 0.0 { hi / lo } else { f64::INFINITY };
                max_condition = max_condition.max(cond);
            }
            let chol = Cholesky::new(r_bar).ok_or(IlcError::RiccatiBreakdown { sample: k })?;
            let gain = chol.solve(&p_bar);
            let h = d_bar.transpose() * &sr + b.transpose() * &v_next;
            let feedforward = chol.solve(&h);

            if n_x > 0 {
                let mut p = a.transpose() * &p_next * a + &cts * &c_bar - p_bar.transpose() * &gain;
                let scale = linalg::max_abs(&p).max(f64::MIN_POSITIVE);
                max_asymmetry = max_asymmetry.max(linalg::asymmetry(&p) / scale);
                linalg::symmetrize(&mut p);
                // v = C̄'S r + A'v' - Pbar' Rbar^-1 (D̄'S r + B'v')
                let v = c_bar.transpose() * &sr + a.transpose() * &v_next
                    - p_bar.transpose() * &feedforward;
                if !finite(&p) {
                    return Err(IlcError::NonFinite {
                        stage: "Riccati matrix",
                        sample: k,
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(IlcError::NonFinite {
                        stage: "adjoint vector",
                        sample: k,
                    });
                }
                self.riccati[k] = p.clone();
                self.adjoint[k] = v.clone();
                p_next = p;
                v_next = v;
            }
            if !finite(&gain) || feedforward.iter().any(|x| !x.is_finite()) {
                return Err(IlcError::NonFinite {
                    stage: "stage gain",
                    sample: k,
                });
            }
            stages.push(Stage { gain, feedforward });
        }
        stages.reverse();

        let mut next = f.clone();
        let mut dx = DVector::<f64>::zeros(n_x);
        for (k, st) in stages.iter().enumerate() {
            let df = &st.feedforward - &st.gain * &dx;
            next.sample_mut(k)
                .iter_mut()
                .zip(df.iter())
                .for_each(|(fk, d)| *fk += d);
            if n_x > 0 {
                dx = sys.a(k) * &dx + sys.b(k) * &df;
            }
        }
        if !next.is_finite() {
            return Err(IlcError::NonFinite {
                stage: "forward pass",
                sample: n.saturating_sub(1),
            });
        }

        let f64_bytes = std::mem::size_of::<f64>();
        let stored =
            self.riccati.len() * n_x * n_x + self.adjoint.len() * n_x + n * (n_i * n_x + n_i);
        self.diagnostics = Some(SweepDiagnostics {
            max_condition,
            ill_conditioned: max_condition > CONDITION_FLAG_THRESHOLD,
            max_asymmetry,
            peak_memory_bytes: stored * f64_bytes,
            state_dim: n_x,
            degenerate_state: n_x == 0,
        });
        Ok(next)
    }
}

/// One-shot [`LqtSolver::update`].
pub fn lqt_update(
    sys: &LtvStateSpace,
    aw: &AssembledWeights,
    e: &Signal,
    f: &Signal,
) -> Result<Signal> {
    LqtSolver::new().update(sys, aw, e, f)
}
