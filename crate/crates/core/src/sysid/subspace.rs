//! Subspace identification (past-output MOESP).
//!
//! The extended observability matrix comes from the SVD of the projected
//! future outputs; `F` and `H` follow from its shift structure, and `G`, `D`
//! and a shared initial state are a linear least-squares problem on the
//! simulation error once `F`, `H` are fixed.

use nalgebra::{DMatrix, DVector};

use super::linalg::{from_rows, lstsq, to_rows, Solver};
use super::{Experiment, StateSpaceMatrices};

/// Block rows of the Hankel matrices for order `n` with `p` outputs.
fn block_rows(n: usize, p: usize) -> usize {
    (n + 1).max(2 * n.div_ceil(p.max(1)))
}

pub(super) fn fit_state_space(
    exps: &[Experiment],
    n: usize,
    solver: Solver,
) -> Option<StateSpaceMatrices> {
    let m = exps[0].u.len();
    let p = exps[0].y.len();
    let i = block_rows(n, p);
    let width = 2 * i * (m + p);
    let cols: usize = exps
        .iter()
        .map(|e| (e.len() + 1).saturating_sub(2 * i))
        .sum();
    if cols < width || i * p < n {
        return None;
    }

    // Transposed data matrix [Uf; Up; Yp; Yf]^T, one row per Hankel column.
    let mut mt = DMatrix::zeros(cols, width);
    let mut c = 0;
    for e in exps {
        for j in 0..(e.len() + 1).saturating_sub(2 * i) {
            for r in 0..i {
                for (ch, u) in e.u.iter().enumerate() {
                    mt[(c, r * m + ch)] = u[j + i + r];
                    mt[(c, i * m + r * m + ch)] = u[j + r];
                }
                for (ch, y) in e.y.iter().enumerate() {
                    mt[(c, 2 * i * m + r * p + ch)] = y[j + r];
                    mt[(c, 2 * i * m + i * p + r * p + ch)] = y[j + i + r];
                }
            }
            c += 1;
        }
    }
    let l = mt.qr().r().transpose();
    let r1 = i * m;
    let r2 = i * (m + p);
    let l32 = l.view((r1 + r2, r1), (i * p, r2)).into_owned();
    let svd = l32.svd(true, false);
    let u = svd.u?;
    // nalgebra does not sort singular values
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    if order.len() < n
        || svd.singular_values[order[0]].is_nan()
        || svd.singular_values[order[0]] <= 0.0
    {
        return None;
    }
    let gamma = DMatrix::from_fn(i * p, n, |row, k| {
        u[(row, order[k])] * svd.singular_values[order[k]].sqrt()
    });

    let h = gamma.rows(0, p).into_owned();
    let up = gamma.rows(0, (i - 1) * p).into_owned();
    let down = gamma.rows(p, (i - 1) * p).into_owned();
    let pinv = up.pseudo_inverse(1e-12).ok()?;
    let f = pinv * down;

    // Least squares for vec(G), vec(D) and x0 on the simulation error.
    let unknowns = n * m + p * m + n;
    let rows: usize = exps.iter().map(|e| e.len() * p).sum();
    let mut phi = DMatrix::zeros(rows, unknowns);
    let mut target = DVector::zeros(rows);
    let mut base = 0;
    for e in exps {
        let len = e.len();
        // unit-input responses for each entry of G
        for r in 0..n {
            for ch in 0..m {
                let mut x = DVector::<f64>::zeros(n);
                let col = r * m + ch;
                for k in 0..len {
                    let y = &h * &x;
                    for o in 0..p {
                        phi[(base + k * p + o, col)] = y[o];
                    }
                    let mut next = &f * &x;
                    next[r] += e.u[ch][k];
                    x = next;
                }
            }
        }
        for o in 0..p {
            for ch in 0..m {
                let col = n * m + o * m + ch;
                for k in 0..len {
                    phi[(base + k * p + o, col)] = e.u[ch][k];
                }
            }
        }
        for r in 0..n {
            let mut x = DVector::<f64>::zeros(n);
            x[r] = 1.0;
            let col = n * m + p * m + r;
            for k in 0..len {
                let y = &h * &x;
                for o in 0..p {
                    phi[(base + k * p + o, col)] = y[o];
                }
                x = &f * &x;
            }
        }
        for k in 0..len {
            for o in 0..p {
                target[base + k * p + o] = e.y[o][k];
            }
        }
        base += len * p;
    }
    let theta = lstsq(&phi, &target, solver).ok()?;
    let g = DMatrix::from_fn(n, m, |r, ch| theta[r * m + ch]);
    let d = DMatrix::from_fn(p, m, |o, ch| theta[n * m + o * m + ch]);
    let x0 = (0..n).map(|r| theta[n * m + p * m + r]).collect();
    Some(StateSpaceMatrices {
        f: to_rows(&f),
        g: to_rows(&g),
        h: to_rows(&h),
        d: to_rows(&d),
        x0,
    })
}

/// Free run from the fitted initial state.
pub(super) fn simulate(ss: &StateSpaceMatrices, u: &[&[f64]], p: usize) -> Vec<Vec<f64>> {
    let n = ss.x0.len();
    let m = u.len();
    let f = from_rows(&ss.f, n);
    let g = from_rows(&ss.g, m);
    let h = from_rows(&ss.h, n);
    let d = from_rows(&ss.d, m);
    let len = u.first().map_or(0, |x| x.len());
    let mut x = DVector::from_column_slice(&ss.x0);
    let mut out = vec![Vec::with_capacity(len); p];
    let mut uk = DVector::zeros(m);
    for k in 0..len {
        for (slot, ch) in uk.iter_mut().zip(u) {
            *slot = ch[k];
        }
        let y = &h * &x + &d * &uk;
        for o in 0..p {
            out[o].push(y[o]);
        }
        x = &f * &x + &g * &uk;
    }
    out
}
