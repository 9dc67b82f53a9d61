//! Small dense helpers shared by the solvers.

use nalgebra::DMatrix;

/// Relative tolerance on singular values for the full-column-rank test.
pub const RANK_RTOL: f64 = 1e-8;
/// Relative eigenvalue tolerance below which a symmetric block is not PSD.
pub const PSD_RTOL: f64 = 1e-12;
/// Absolute tolerance on `max |W - W'|` for user-supplied weight blocks.
pub const SYMMETRY_ATOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl Definiteness {
    pub fn is_pd(self) -> bool {
        self == Definiteness::PositiveDefinite
    }

    pub fn is_psd(self) -> bool {
        self != Definiteness::Indefinite
    }

    /// The weaker of two classifications.
    pub fn meet(self, other: Definiteness) -> Definiteness {
        use Definiteness::*;
        match (self, other) {
            (Indefinite, _) | (_, Indefinite) => Indefinite,
            (PositiveSemidefinite, _) | (_, PositiveSemidefinite) => PositiveSemidefinite,
            _ => PositiveDefinite,
        }
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `max |m - m'|`; infinite for non-square input.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut s = m.clone();
    symmetrize(&mut s);
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn classify(m: &DMatrix<f64>) -> Definiteness {
    let ev = symmetric_eigenvalues(m);
    let Some((&lo, &hi)) = ev.first().zip(ev.last()) else {
        return Definiteness::PositiveDefinite;
    };
    let scale = hi.abs().max(lo.abs());
    if scale == 0.0 {
        return Definiteness::PositiveSemidefinite;
    }
    if lo > PSD_RTOL * scale {
        Definiteness::PositiveDefinite
    } else if lo >= -PSD_RTOL * scale {
        Definiteness::PositiveSemidefinite
    } else {
        Definiteness::Indefinite
    }
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Smallest singular value at least [`RANK_RTOL`] times the largest.
pub fn has_full_column_rank(m: &DMatrix<f64>) -> bool {
    if m.ncols() == 0 {
        return true;
    }
    if m.ncols() > m.nrows() {
        return false;
    }
    let sv = singular_values(m);
    let hi = sv[0];
    let lo = sv[sv.len() - 1];
    hi > 0.0 && hi.is_finite() && lo >= RANK_RTOL * hi
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        let pd = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let psd = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let ind = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(classify(&pd), Definiteness::PositiveDefinite);
        assert_eq!(classify(&psd), Definiteness::PositiveSemidefinite);
        assert_eq!(classify(&ind), Definiteness::Indefinite);
        assert_eq!(
            classify(&DMatrix::zeros(2, 2)),
            Definiteness::PositiveSemidefinite
        );
        // tiny but well-conditioned weights remain PD
        let tiny = DMatrix::from_row_slice(2, 2, &[1e-10, 0.0, 0.0, 1e-9]);
        assert!(classify(&tiny).is_pd());
    }

    #[test]
    fn rank() {
        let full = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let deficient = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(has_full_column_rank(&full));
        assert!(!has_full_column_rank(&deficient));
        assert!(!has_full_column_rank(&DMatrix::zeros(2, 2)));
        assert!(!has_full_column_rank(&DMatrix::from_element(1, 2, 1.0)));
    }

    #[test]
    fn block_diagonal_layout() {
        let a = DMatrix::from_element(1, 2, 1.0);
        let b = DMatrix::from_element(2, 1, 2.0);
        let m = block_diag(&[a, b]);
        assert_eq!(m.shape(), (3, 3));
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(2, 2)], 2.0);
        assert_eq!(m[(1, 0)], 0.0);
        assert_eq!(m[(0, 2)], 0.0);
    }
}
