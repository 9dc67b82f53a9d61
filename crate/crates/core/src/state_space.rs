//! Discrete-time LTV/LTI state-space systems.
//!
//! ```text
//! x(k+1) = A(k) x(k) + B(k) u(k)
//!   y(k) = C(k) x(k) + D(k) u(k),     k = 0..N-1
//! ```
//!
//! An LTI system stores one matrix per role and reports it for every `k`.

use nalgebra::{DMatrix, DVector};

use crate::error::{IlcError, Result};
use crate::signal::Signal;

#[derive(Clone, Debug, PartialEq)]
pub struct LtvStateSpace {
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
    d: Vec<DMatrix<f64>>,
    horizon: usize,
    n_x: usize,
    n_i: usize,
    n_o: usize,
}

impl LtvStateSpace {
    /// A time-invariant realization broadcast over `horizon` samples.
    pub fn lti(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        horizon: usize,
    ) -> Result<Self> {
        Self::build(vec![a], vec![b], vec![c], vec![d], horizon)
    }

    /// A time-varying realization; the horizon is the sequence length.
    pub fn ltv(
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        c: Vec<DMatrix<f64>>,
        d: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let horizon = a.len();
        for (name, len) in [("B", b.len()), ("C", c.len()), ("D", d.len())] {
            if len != horizon {
                return Err(IlcError::dim(
                    format!("{name} sequence length"),
                    None,
                    horizon,
                    len,
                ));
            }
        }
        if horizon == 0 {
            return Err(IlcError::Invalid("empty LTV system".into()));
        }
        Self::build(a, b, c, d, horizon)
    }

    /// Static gain `y = D u`.
    pub fn gain(d: DMatrix<f64>, horizon: usize) -> Result<Self> {
        let (n_o, n_i) = d.shape();
        Self::lti(
            DMatrix::zeros(0, 0),
            DMatrix::zeros(0, n_i),
            DMatrix::zeros(n_o, 0),
            d,
            horizon,
        )
    }

    fn build(
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        c: Vec<DMatrix<f64>>,
        d: Vec<DMatrix<f64>>,
        horizon: usize,
    ) -> Result<Self> {
        let n_x = a[0].nrows();
        let n_i = b[0].ncols();
        let n_o = c[0].nrows();
        let per_sample = a.len() > 1;
        for k in 0..a.len() {
            let at = per_sample.then_some(k);
            let check = |name: &str, m: &DMatrix<f64>, rows: usize, cols: usize| {
                if m.shape() != (rows, cols) {
                    Err(IlcError::dim(
                        name,
                        at,
                        format!("{rows}x{cols}"),
                        format!("{}x{}", m.nrows(), m.ncols()),
                    ))
                } else if m.iter().any(|v| !v.is_finite()) {
                    Err(IlcError::Invalid(format!(
                        "non-finite entry in {name}{}",
                        at.map(|k| format!(" at sample {k}")).unwrap_or_default()
                    )))
                } else {
                    Ok(())
                }
            };
            check("A", &a[k], n_x, n_x)?;
            check("B", &b[k], n_x, n_i)?;
            check("C", &c[k], n_o, n_x)?;
            check("D", &d[k], n_o, n_i)?;
        }
        Ok(LtvStateSpace {
            a,
            b,
            c,
            d,
            horizon,
            n_x,
            n_i,
            n_o,
        })
    }

    /// Same LTI realization over a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if !self.is_lti() {
            return Err(IlcError::Invalid(
                "cannot change the horizon of a time-varying system".into(),
            ));
        }
        let mut s = self.clone();
        s.horizon = horizon;
        Ok(s)
    }

    #[inline]
    fn idx(&self, k: usize) -> usize {
        if self.a.len() == 1 {
            0
        } else {
            k
        }
    }

    pub fn a(&self, k: usize) -> &DMatrix<f64> {
        &self.a[self.idx(k)]
    }

    pub fn b(&self, k: usize) -> &DMatrix<f64> {
        &self.b[self.idx(k)]
    }

    pub fn c(&self, k: usize) -> &DMatrix<f64> {
        &self.c[self.idx(k)]
    }

    pub fn d(&self, k: usize) -> &DMatrix<f64> {
        &self.d[self.idx(k)]
    }

    pub fn is_lti(&self) -> bool {
        self.a.len() == 1
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_i(&self) -> usize {
        self.n_i
    }

    pub fn n_o(&self) -> usize {
        self.n_o
    }

    /// Negated output map, `-J`.
    pub fn negated(&self) -> Self {
        let mut s = self.clone();
        s.c.iter_mut().for_each(|m| m.neg_mut());
        s.d.iter_mut().for_each(|m| m.neg_mut());
        s
    }

    pub fn simulate(&self, u: &Signal, x0: Option<&DVector<f64>>) -> Result<Signal> {
        simulate(self, u, x0)
    }
}

/// Runs the state recursion with direct feedthrough; `x0 = None` means zero
/// initial state.
pub fn simulate(sys: &LtvStateSpace, u: &Signal, x0: Option<&DVector<f64>>) -> Result<Signal> {
    u.check_shape("input", sys.horizon, sys.n_i)?;
    let mut x = match x0 {
        Some(x0) if x0.len() != sys.n_x => {
            return Err(IlcError::dim("initial state", None, sys.n_x, x0.len()))
        }
        Some(x0) => x0.clone(),
        None => DVector::zeros(sys.n_x),
    };
    let mut x_next = DVector::zeros(sys.n_x);
    let mut y = Signal::zeros(sys.horizon, sys.n_o);
    for k in 0..sys.horizon {
        let uk = DVector::from_column_slice(u.sample(k));
        let mut yk = sys.d(k) * &uk;
        yk.gemv(1.0, sys.c(k), &x, 1.0);
        y.sample_mut(k).copy_from_slice(yk.as_slice());
        x_next.gemv(1.0, sys.a(k), &x, 0.0);
        x_next.gemv(1.0, sys.b(k), &uk, 1.0);
        std::mem::swap(&mut x, &mut x_next);
    }
    Ok(y)
}

/// Feedback interconnection of `plant` (inputs `u`, outputs `y`) and
/// `controller` (input `e = r - y`, output added to the feedforward `f`):
///
/// ```text
/// u = C e + f,   e = r - y,   y = P u
/// ```
///
/// Returns `(J, S)` with `J: f -> y` the process sensitivity `P (I + C P)^-1`
/// and `S: r -> e` the sensitivity `(I + P C)^-1`, so that
/// `e = S r - J f`. States are stacked as `[x_plant; x_controller]`.
pub fn closed_loop(
    plant: &LtvStateSpace,
    controller: &LtvStateSpace,
) -> Result<(LtvStateSpace, LtvStateSpace)> {
    let (n_i, n_o) = (plant.n_i, plant.n_o);
    if controller.n_i != n_o || controller.n_o != n_i {
        return Err(IlcError::dim(
            "controller I/O",
            None,
            format!("{n_o} inputs, {n_i} outputs"),
            format!("{} inputs, {} outputs", controller.n_i, controller.n_o),
        ));
    }
    let lti = plant.is_lti() && controller.is_lti();
    let horizon = if plant.is_lti() && !controller.is_lti() {
        controller.horizon
    } else {
        plant.horizon
    };
    if !plant.is_lti() && !controller.is_lti() && plant.horizon != controller.horizon {
        return Err(IlcError::dim(
            "controller horizon",
            None,
            plant.horizon,
            controller.horizon,
        ));
    }
    let (npx, ncx) = (plant.n_x, controller.n_x);
    let n = npx + ncx;
    let steps = if lti { 1 } else { horizon };

    let mut j_parts = (vec![], vec![], vec![], vec![]);
    let mut s_parts = (vec![], vec![], vec![], vec![]);
    for k in 0..steps {
        let (ap, bp, cp, dp) = (plant.a(k), plant.b(k), plant.c(k), plant.d(k));
        let (ac, bc, cc, dc) = (
            controller.a(k),
            controller.b(k),
            controller.c(k),
            controller.d(k),
        );
        // u = E (-Dc Cp xp + Cc xc + Dc r + f),  E = (I + Dc Dp)^-1
        let loop_gain = DMatrix::identity(n_i, n_i) + dc * dp;
        let e_inv = loop_gain
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or(IlcError::AlgebraicLoop { sample: k })?;

        let mut gu = DMatrix::zeros(n_i, n);
        gu.view_mut((0, 0), (n_i, npx))
            .copy_from(&(-(&e_inv * dc * cp)));
        gu.view_mut((0, npx), (n_i, ncx)).copy_from(&(&e_inv * cc));

        let mut cy = DMatrix::zeros(n_o, n);
        cy.view_mut((0, 0), (n_o, npx)).copy_from(cp);
        cy += dp * &gu;

        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (npx, npx)).copy_from(ap);
        a.view_mut((npx, npx), (ncx, ncx)).copy_from(ac);
        let mut bp_ext = DMatrix::zeros(n, n_i);
        bp_ext.view_mut((0, 0), (npx, n_i)).copy_from(bp);
        let mut bc_ext = DMatrix::zeros(n, n_o);
        bc_ext.view_mut((npx, 0), (ncx, n_o)).copy_from(bc);
        a += &bp_ext * &gu - &bc_ext * &cy;

        // J: input f, output y
        let dj = dp * &e_inv;
        let bj = &bp_ext * &e_inv - &bc_ext * &dj;
        // S: input r, output e = r - y
        let dy_r = dp * &e_inv * dc;
        let ds = DMatrix::identity(n_o, n_o) - &dy_r;
        let bs = &bp_ext * (&e_inv * dc) + &bc_ext * &ds;

        j_parts.0.push(a.clone());
        j_parts.1.push(bj);
        j_parts.2.push(cy.clone());
        j_parts.3.push(dj);
        s_parts.0.push(a);
        s_parts.1.push(bs);
        s_parts.2.push(-cy);
        s_parts.3.push(ds);
    }

    let j = LtvStateSpace::build(j_parts.0, j_parts.1, j_parts.2, j_parts.3, horizon)?;
    let s = LtvStateSpace::build(s_parts.0, s_parts.1, s_parts.2, s_parts.3, horizon)?;
    Ok((j, s))
}
