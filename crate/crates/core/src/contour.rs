//! Contour errors and per-sample coupling blocks for two-axis systems.
//!
//! Channel order follows the machine axes: channel 0 is the `y` axis and
//! channel 1 the `x` axis, so an error sample is `e(k) = [e_y, e_x]'`. With
//! that order the rotation block with angle `a` maps `e(k)` to
//! `[cos a * e_y - sin a * e_x, sin a * e_y + cos a * e_x]`, which is the
//! (contour, tangential) pair when `a` is the direction of the contour.
//!
//! Geometry is done on [`Point2`] in the `(x, y)` plane. The contour is the
//! piecewise-linear interpolation of the reference samples.

use nalgebra::DMatrix;

use crate::error::{IlcError, Result};
use crate::linalg;
use crate::signal::Signal;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[allow(clippy::should_implement_trait)]
impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Position from a two-channel sample `[y, x]`.
    pub fn from_sample(s: &[f64]) -> Self {
        Point2 { x: s[1], y: s[0] }
    }

    /// Two-channel sample `[y, x]`.
    pub fn to_sample(self) -> [f64; 2] {
        [self.y, self.x]
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn from_angle(a: f64) -> Point2 {
        Point2::new(a.cos(), a.sin())
    }
}

/// Result of projecting a position onto the contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPoint {
    pub point: Point2,
    /// Signed distance, positive when the position lies left of the
    /// directed contour.
    pub contour_error: f64,
    /// Direction perpendicular to the contour-error vector, oriented along
    /// the contour; the local tangent when the error vanishes.
    pub phi: f64,
    pub segment: usize,
    pub arc_length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourErrorSample {
    pub contour_error: f64,
    pub tangential_error: f64,
    pub closest: Point2,
    pub phi: f64,
    pub segment: usize,
    pub arc_length: f64,
}

#[derive(Clone, Debug)]
pub struct ReferenceContour {
    reference: Signal,
    points: Vec<Point2>,
    /// Arc length at each vertex.
    arc: Vec<f64>,
    /// Direction of each segment; zero-length segments inherit a neighbour's.
    segment_angle: Vec<f64>,
    theta: Vec<f64>,
    /// Distances below this are treated as zero when choosing `phi`.
    zero_tol: f64,
}

/// Fills `None` entries with the previous valid value, and leading ones with
/// the first valid value.
fn fill_gaps(raw: &[Option<f64>]) -> Option<Vec<f64>> {
    let first = raw.iter().flatten().next().copied()?;
    let mut last = first;
    Some(
        raw.iter()
            .map(|v| {
                if let Some(v) = v {
                    last = *v;
                }
                last
            })
            .collect(),
    )
}

impl ReferenceContour {
    pub fn new(reference: Signal) -> Result<Self> {
        if reference.width() != 2 {
            return Err(IlcError::Contour(format!(
                "contour errors need exactly 2 output channels, got {}",
                reference.width()
            )));
        }
        let points: Vec<Point2> = reference.samples().map(Point2::from_sample).collect();
        if points.len() < 2 {
            return Err(IlcError::Contour("contour needs at least 2 samples".into()));
        }
        let mut arc = Vec::with_capacity(points.len());
        arc.push(0.0);
        let mut raw_seg = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            let d = w[1].sub(w[0]);
            let len = d.norm();
            arc.push(arc.last().unwrap() + len);
            raw_seg.push((len > 0.0).then(|| d.angle()));
        }
        let segment_angle = fill_gaps(&raw_seg)
            .ok_or_else(|| IlcError::Contour("contour has fewer than 2 distinct points".into()))?;

        let n = points.len();
        let raw_theta: Vec<Option<f64>> = (0..n)
            .map(|k| {
                let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
                let d = points[hi].sub(points[lo]);
                (d.norm() > 0.0).then(|| d.angle())
            })
            .collect();
        // at least one segment is non-degenerate, so some difference is nonzero
        let theta = fill_gaps(&raw_theta).unwrap_or_else(|| segment_angle.clone());

        let extent = points
            .iter()
            .fold(0.0_f64, |m, p| m.max(p.x.abs()).max(p.y.abs()));
        Ok(ReferenceContour {
            reference,
            points,
            zero_tol: 1e-12 * extent.max(*arc.last().unwrap()),
            arc,
            segment_angle,
            theta,
        })
    }

    pub fn reference(&self) -> &Signal {
        &self.reference
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// Reference direction at sample `k` (central differences).
    pub fn theta(&self, k: usize) -> f64 {
        self.theta[k]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn segment_angle(&self, i: usize) -> f64 {
        self.segment_angle[i]
    }

    /// Point at arc-length coordinate `s`, clamped to the contour.
    pub fn point_at(&self, s: f64) -> Point2 {
        let s = s.clamp(0.0, self.total_length());
        let i = match self.arc.binary_search_by(|a| a.total_cmp(&s)) {
            Ok(i) => return self.points[i],
            Err(i) => i.saturating_sub(1).min(self.points.len() - 2),
        };
        let len = self.arc[i + 1] - self.arc[i];
        let t = if len > 0.0 {
            (s - self.arc[i]) / len
        } else {
            0.0
        };
        let (p, q) = (self.points[i], self.points[i + 1]);
        p.add(q.sub(p).scale(t))
    }

    /// Nearest point on the contour; ties go to the smallest arc length.
    pub fn closest_point(&self, y: Point2) -> ClosestPoint {
        let mut best_d2 = f64::INFINITY;
        let (mut seg, mut t_best, mut q_best) = (0, 0.0, self.points[0]);
        for (i, w) in self.points.windows(2).enumerate() {
            let (p, d) = (w[0], w[1].sub(w[0]));
            let len2 = d.dot(d);
            let t = if len2 > 0.0 {
                (y.sub(p).dot(d) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let q = p.add(d.scale(t));
            let r = y.sub(q);
            let d2 = r.dot(r);
            if d2 < best_d2 {
                best_d2 = d2;
                seg = i;
                t_best = t;
                q_best = q;
            }
        }
        let seg_len = self.arc[seg + 1] - self.arc[seg];
        let tangent = self.segment_angle[seg];
        let err_vec = q_best.sub(y);
        let dist = err_vec.norm();
        let phi = if dist > self.zero_tol {
            let mut perp = Point2::new(-err_vec.y, err_vec.x).scale(1.0 / dist);
            if perp.dot(Point2::from_angle(tangent)) < 0.0 {
                perp = perp.scale(-1.0);
            }
            perp.angle()
        } else {
            tangent
        };
        let side = Point2::from_angle(phi).cross(y.sub(q_best));
        ClosestPoint {
            point: q_best,
            contour_error: if side < 0.0 { -dist } else { dist },
            phi,
            segment: seg,
            arc_length: self.arc[seg] + t_best * seg_len,
        }
    }

    /// Contour and tangential error of output sample `y` at time `k`.
    ///
    /// The tangential error is the second component of the rotation by `phi`
    /// applied to the time-based error `e(k) = y_d(k) - y`.
    pub fn error_at(&self, k: usize, y: &[f64]) -> ContourErrorSample {
        let cp = self.closest_point(Point2::from_sample(y));
        let yd = self.reference.sample(k);
        let (e_y, e_x) = (yd[0] - y[0], yd[1] - y[1]);
        ContourErrorSample {
            contour_error: cp.contour_error,
            tangential_error: cp.phi.sin() * e_y + cp.phi.cos() * e_x,
            closest: cp.point,
            phi: cp.phi,
            segment: cp.segment,
            arc_length: cp.arc_length,
        }
    }

    /// Per-sample errors of an output trajectory.
    pub fn errors(&self, y: &Signal) -> Result<Vec<ContourErrorSample>> {
        y.check_shape("output", self.len(), 2)?;
        Ok((0..y.len())
            .map(|k| self.error_at(k, y.sample(k)))
            .collect())
    }
}

/// Axis errors plus the linearized contour error: `[[1,0],[0,1],[cos, -sin]]`.
pub fn coupling_axes_linear(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, theta.cos(), -theta.sin()])
}

/// `[[cos a, -sin a], [sin a, cos a]]`.
pub fn coupling_rotation(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingMode {
    /// Individual axis errors only.
    Identity,
    /// Axis errors and the linearized contour error (3 rows).
    AxesLinear,
    /// Linearized contour and tangential errors, rotation by `theta(k)`.
    LinearRotation,
    /// Exact contour and tangential errors, rotation by `phi(k, j)`, rebuilt
    /// from each trial's output.
    ExactRotation,
}

impl CouplingMode {
    pub fn name(self) -> &'static str {
        match self {
            CouplingMode::Identity => "identity",
            CouplingMode::AxesLinear => "axes_linear",
            CouplingMode::LinearRotation => "linear_rotation",
            CouplingMode::ExactRotation => "exact_rotation",
        }
    }

    pub fn is_iteration_varying(self) -> bool {
        self == CouplingMode::ExactRotation
    }
}

/// How the input coupling `C_f` relates to the error coupling `C_e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InputCoupling {
    #[default]
    SameAsError,
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSchedule {
    mode: CouplingMode,
    error_blocks: Vec<DMatrix<f64>>,
    input_blocks: Vec<DMatrix<f64>>,
}

impl CouplingSchedule {
    /// General constructor; blocks must have uniform shapes and equal length.
    pub fn from_blocks(
        mode: CouplingMode,
        error_blocks: Vec<DMatrix<f64>>,
        input_blocks: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if error_blocks.is_empty() || error_blocks.len() != input_blocks.len() {
            return Err(IlcError::dim(
                "input coupling length",
                None,
                error_blocks.len(),
                input_blocks.len(),
            ));
        }
        for (name, blocks) in [("C_e", &error_blocks), ("C_f", &input_blocks)] {
            let shape = blocks[0].shape();
            if let Some(k) = blocks.iter().position(|b| b.shape() != shape) {
                return Err(IlcError::dim(
                    name,
                    Some(k),
                    format!("{}x{}", shape.0, shape.1),
                    format!("{}x{}", blocks[k].nrows(), blocks[k].ncols()),
                ));
            }
        }
        Ok(CouplingSchedule {
            mode,
            error_blocks,
            input_blocks,
        })
    }

    pub fn identity(horizon: usize, n_o: usize, n_i: usize) -> Self {
        CouplingSchedule {
            mode: CouplingMode::Identity,
            error_blocks: vec![DMatrix::identity(n_o, n_o); horizon],
            input_blocks: vec![DMatrix::identity(n_i, n_i); horizon],
        }
    }

    fn with_error_blocks(
        mode: CouplingMode,
        error_blocks: Vec<DMatrix<f64>>,
        input: InputCoupling,
    ) -> Self {
        let input_blocks = match input {
            InputCoupling::SameAsError => error_blocks.clone(),
            InputCoupling::Identity => vec![DMatrix::identity(2, 2); error_blocks.len()],
        };
        CouplingSchedule {
            mode,
            error_blocks,
            input_blocks,
        }
    }

    pub fn axes_linear(contour: &ReferenceContour, input: InputCoupling) -> Self {
        let blocks = contour
            .thetas()
            .iter()
            .map(|&t| coupling_axes_linear(t))
            .collect();
        Self::with_error_blocks(CouplingMode::AxesLinear, blocks, input)
    }

    pub fn linear_rotation(contour: &ReferenceContour, input: InputCoupling) -> Self {
        let blocks = contour
            .thetas()
            .iter()
            .map(|&t| coupling_rotation(t))
            .collect();
        Self::with_error_blocks(CouplingMode::LinearRotation, blocks, input)
    }

    /// Rotation blocks from already computed contour errors of one trial.
    pub fn exact_from_errors(errors: &[ContourErrorSample], input: InputCoupling) -> Self {
        let blocks = errors.iter().map(|s| coupling_rotation(s.phi)).collect();
        Self::with_error_blocks(CouplingMode::ExactRotation, blocks, input)
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    pub fn horizon(&self) -> usize {
        self.error_blocks.len()
    }

    pub fn error_block(&self, k: usize) -> &DMatrix<f64> {
        &self.error_blocks[k]
    }

    pub fn input_block(&self, k: usize) -> &DMatrix<f64> {
        &self.input_blocks[k]
    }

    /// Number of coupled error components `n_ce`.
    pub fn n_ce(&self) -> usize {
        self.error_blocks[0].nrows()
    }

    pub fn n_cf(&self) -> usize {
        self.input_blocks[0].nrows()
    }

    pub fn error_columns(&self) -> usize {
        self.error_blocks[0].ncols()
    }

    pub fn input_columns(&self) -> usize {
        self.input_blocks[0].ncols()
    }

    /// First sample whose error block is rank deficient.
    pub fn error_rank_deficiency(&self) -> Option<usize> {
        self.error_blocks
            .iter()
            .position(|b| !linalg::has_full_column_rank(b))
    }

    pub fn input_rank_deficiency(&self) -> Option<usize> {
        self.input_blocks
            .iter()
            .position(|b| !linalg::has_full_column_rank(b))
    }
}

/// Exact rotation coupling from the output `y_j` of trial `j`.
pub fn exact_coupling_schedule(
    contour: &ReferenceContour,
    y_j: &Signal,
) -> Result<CouplingSchedule> {
    let errors = contour.errors(y_j)?;
    Ok(CouplingSchedule::exact_from_errors(
        &errors,
        InputCoupling::SameAsError,
    ))
}
