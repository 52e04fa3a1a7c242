use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// How least-squares problems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solver {
    /// QR, then minimum-norm solve of the triangular factor; rank-deficient
    /// directions get zero weight.
    #[default]
    MinNorm,
    /// Normal equations with a ridge term `lambda · I`.
    Ridge { lambda: f64 },
    /// Like `MinNorm` but rank deficiency is an error.
    Strict,
}

/// Relative singular-value cutoff for rank decisions.
const RCOND: f64 = 1e-10;

pub(crate) enum LstsqError {
    Singular,
}

/// Solves `min ||phi · x - y||`.
pub(crate) fn lstsq(
    phi: &DMatrix<f64>,
    y: &DVector<f64>,
    solver: Solver,
) -> Result<DVector<f64>, LstsqError> {
    let p = phi.ncols();
    if p == 0 {
        return Ok(DVector::zeros(0));
    }
    if phi.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(LstsqError::Singular);
    }
    if let Solver::Ridge { lambda } = solver {
        let mut ata = phi.tr_mul(phi);
        for i in 0..p {
            ata[(i, i)] += lambda;
        }
        let atb = phi.tr_mul(y);
        return ata
            .cholesky()
            .map(|c| c.solve(&atb))
            .ok_or(LstsqError::Singular);
    }
    // Reduce to a p x p problem first so the SVD stays small.
    let (r, qtb) = if phi.nrows() > p {
        let qr = phi.clone().qr();
        let qtb = qr.q().tr_mul(y);
        (qr.r(), qtb)
    } else {
        (phi.clone(), y.clone())
    };
    let svd = r.svd(true, true);
    let smax = svd.singular_values.max();
    if smax.is_nan() || smax <= 0.0 || smax.is_infinite() {
        return Err(LstsqError::Singular);
    }
    let cutoff = smax * RCOND;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if solver == Solver::Strict && rank < p {
        return Err(LstsqError::Singular);
    }
    svd.solve(&qtb, cutoff).map_err(|_| LstsqError::Singular)
}

/// Spectral radius of a square matrix.
pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Largest root magnitude of `z^n - c_1 z^{n-1} - ... - c_n`, i.e. the
/// recursion `x(t) = sum c_i x(t-i)`.
pub(crate) fn recursion_radius(coeffs: &[f64]) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let mut comp = DMatrix::zeros(n, n);
    for (i, c) in coeffs.iter().enumerate() {
        comp[(0, i)] = *c;
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    spectral_radius(&comp)
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub(crate) fn from_rows(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}
