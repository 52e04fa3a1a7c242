use nalgebra::{DMatrix, DVector};

use super::linalg::{lstsq, recursion_radius, Solver};
use super::{Experiment, FitOptions, MisoPolynomial, ModelStructure};

#[inline]
fn lag(x: &[f64], t: usize, k: usize) -> f64 {
    if t >= k {
        x[t - k]
    } else {
        0.0
    }
}

/// Input part `Σ_j Σ_k b_jk u_j(t-nk-k)` of a MISO polynomial.
fn input_term(b: &[Vec<f64>], u: &[&[f64]], nk: usize, t: usize) -> f64 {
    let mut s = 0.0;
    for (bj, uj) in b.iter().zip(u) {
        for (k, c) in bj.iter().enumerate() {
            s += c * lag(uj, t, nk + k);
        }
    }
    s
}

pub(super) fn fit_arx(
    exps: &[Experiment],
    o: usize,
    na: usize,
    nb: usize,
    nk: usize,
    skip: usize,
    solver: Solver,
) -> Option<MisoPolynomial> {
    let m = exps[0].u.len();
    let cols = na + m * nb;
    let rows: usize = exps.iter().map(|e| e.len().saturating_sub(skip)).sum();
    let mut phi = DMatrix::zeros(rows, cols);
    let mut target = DVector::zeros(rows);
    let mut r = 0;
    for e in exps {
        let y = &e.y[o];
        for t in skip..e.len() {
            for i in 0..na {
                phi[(r, i)] = y[t - 1 - i];
            }
            for (j, uj) in e.u.iter().enumerate() {
                for k in 0..nb {
                    phi[(r, na + j * nb + k)] = uj[t - nk - k];
                }
            }
            target[r] = y[t];
            r += 1;
        }
    }
    let theta = lstsq(&phi, &target, solver).ok()?;
    Some(MisoPolynomial {
        a: theta.rows(0, na).iter().copied().collect(),
        b: (0..m)
            .map(|j| theta.rows(na + j * nb, nb).iter().copied().collect())
            .collect(),
        ..Default::default()
    })
}

/// Extended least squares: ARX start, then regress on lagged innovation
/// estimates until the coefficients settle.
#[allow(clippy::too_many_arguments)]
pub(super) fn fit_armax(
    exps: &[Experiment],
    o: usize,
    na: usize,
    nb: usize,
    nc: usize,
    nk: usize,
    skip: usize,
    opts: &FitOptions,
) -> Option<MisoPolynomial> {
    let mut model = fit_arx(exps, o, na, nb, nk, skip, opts.solver)?;
    model.c = vec![0.0; nc];
    if nc == 0 {
        return Some(model);
    }
    let structure = ModelStructure::Armax { na, nb, nc, nk };
    let m = exps[0].u.len();
    let cols = na + m * nb + nc;
    let rows: usize = exps.iter().map(|e| e.len().saturating_sub(skip)).sum();
    let mut theta_old = flatten(&model);
    for _ in 0..opts.max_iterations {
        let innovations: Vec<Vec<f64>> = exps
            .iter()
            .map(|e| {
                let u: Vec<&[f64]> = e.u.iter().map(Vec::as_slice).collect();
                prediction_errors(&model, structure, &u, &e.y[o], skip)
            })
            .collect();
        if innovations.iter().flatten().any(|v| !v.is_finite()) {
            break;
        }
        let mut phi = DMatrix::zeros(rows, cols);
        let mut target = DVector::zeros(rows);
        let mut r = 0;
        for (e, eps) in exps.iter().zip(&innovations) {
            let y = &e.y[o];
            for t in skip..e.len() {
                for i in 0..na {
                    phi[(r, i)] = y[t - 1 - i];
                }
                for (j, uj) in e.u.iter().enumerate() {
                    for k in 0..nb {
                        phi[(r, na + j * nb + k)] = uj[t - nk - k];
                    }
                }
                for i in 0..nc {
                    phi[(r, na + m * nb + i)] = lag(eps, t, i + 1);
                }
                target[r] = y[t];
                r += 1;
            }
        }
        let theta = lstsq(&phi, &target, opts.solver).ok()?;
        let next = MisoPolynomial {
            a: theta.rows(0, na).iter().copied().collect(),
            b: (0..m)
                .map(|j| theta.rows(na + j * nb, nb).iter().copied().collect())
                .collect(),
            c: theta.rows(na + m * nb, nc).iter().copied().collect(),
            ..Default::default()
        };
        // an unstable noise filter makes the next innovations explode; keep
        // the last invertible estimate instead
        let neg_c: Vec<f64> = next.c.iter().map(|c| -c).collect();
        if recursion_radius(&neg_c) >= 1.0 {
            break;
        }
        let theta_new = flatten(&next);
        let change = max_abs_diff(&theta_old, &theta_new);
        model = next;
        theta_old = theta_new;
        if change < opts.tolerance {
            break;
        }
    }
    Some(model)
}

fn flatten(p: &MisoPolynomial) -> Vec<f64> {
    let mut v = p.a.clone();
    p.b.iter().for_each(|b| v.extend(b));
    p.f.iter().for_each(|f| v.extend(f));
    v.extend(&p.c);
    v.extend(&p.d);
    v
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

struct BjLayout {
    m: usize,
    nb: usize,
    nc: usize,
    nd: usize,
    nf: usize,
}

impl BjLayout {
    fn len(&self) -> usize {
        self.m * (self.nb + self.nf) + self.nc + self.nd
    }

    fn unpack(&self, theta: &[f64]) -> MisoPolynomial {
        let (m, nb, nf) = (self.m, self.nb, self.nf);
        let fo = m * nb;
        let co = fo + m * nf;
        let dof = co + self.nc;
        MisoPolynomial {
            a: Vec::new(),
            b: (0..m)
                .map(|j| theta[j * nb..(j + 1) * nb].to_vec())
                .collect(),
            f: (0..m)
                .map(|j| theta[fo + j * nf..fo + (j + 1) * nf].to_vec())
                .collect(),
            c: theta[co..dof].to_vec(),
            d: theta[dof..dof + self.nd].to_vec(),
        }
    }
}

/// Prediction-error fit of a Box-Jenkins model by Levenberg-damped
/// Gauss-Newton with a forward-difference Jacobian, started from an ARX fit
/// whose denominator seeds every `F_j`.
#[allow(clippy::too_many_arguments)]
pub(super) fn fit_bj(
    exps: &[Experiment],
    o: usize,
    nb: usize,
    nc: usize,
    nd: usize,
    nf: usize,
    nk: usize,
    skip: usize,
    opts: &FitOptions,
) -> Option<MisoPolynomial> {
    let m = exps[0].u.len();
    let layout = BjLayout { m, nb, nc, nd, nf };
    let structure = ModelStructure::Bj { nb, nc, nd, nf, nk };
    let init = fit_arx(exps, o, nf, nb, nk, skip.max(nf.max(nb + nk)), opts.solver)?;
    let mut theta = Vec::with_capacity(layout.len());
    init.b.iter().for_each(|b| theta.extend(b));
    for _ in 0..m {
        theta.extend(&init.a);
    }
    theta.extend(std::iter::repeat_n(0.0, nc + nd));

    let residuals = |theta: &[f64]| -> Vec<f64> {
        let p = layout.unpack(theta);
        let mut out = Vec::new();
        for e in exps {
            let u: Vec<&[f64]> = e.u.iter().map(Vec::as_slice).collect();
            out.extend(
                prediction_errors(&p, structure, &u, &e.y[o], skip)
                    .into_iter()
                    .skip(skip),
            );
        }
        out
    };
    let cost = |r: &[f64]| -> f64 {
        let s: f64 = r.iter().map(|v| v * v).sum();
        if s.is_finite() {
            s
        } else {
            f64::INFINITY
        }
    };

    let mut r = residuals(&theta);
    let mut c = cost(&r);
    if !c.is_finite() {
        // the ARX denominator can be unstable; fall back to an FIR start
        theta.iter_mut().skip(m * nb).for_each(|v| *v = 0.0);
        r = residuals(&theta);
        c = cost(&r);
        if !c.is_finite() {
            return None;
        }
    }
    let np = layout.len();
    let mut mu = 1e-3;
    for _ in 0..opts.max_iterations {
        let rows = r.len();
        let mut jac = DMatrix::zeros(rows, np);
        for k in 0..np {
            let h = 1e-7 * theta[k].abs().max(1.0);
            let mut th = theta.clone();
            th[k] += h;
            let rk = residuals(&th);
            for i in 0..rows {
                jac[(i, k)] = (rk[i] - r[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.tr_mul(&jac);
        let jtr = jac.tr_mul(&rv);
        let mut accepted = None;
        while mu < 1e12 {
            let mut lhs = jtj.clone();
            for i in 0..np {
                lhs[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&jtr));
            let cand: Vec<f64> = theta.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let rc = residuals(&cand);
            let cc = cost(&rc);
            if cc < c {
                let step = delta.amax();
                accepted = Some((cand, rc, cc, step));
                mu = (mu / 10.0).max(1e-12);
                break;
            }
            mu *= 10.0;
        }
        let Some((cand, rc, cc, step)) = accepted else {
            break;
        };
        theta = cand;
        r = rc;
        c = cc;
        if step < opts.tolerance {
            break;
        }
    }
    Some(layout.unpack(&theta))
}

/// Free-run output of one MISO submodel: noise terms are zero and all
/// signals are zero before `t = 0`.
pub(super) fn simulate_miso(
    p: &MisoPolynomial,
    structure: ModelStructure,
    u: &[&[f64]],
) -> Vec<f64> {
    let n = u.first().map_or(0, |x| x.len());
    let nk = nk_of(structure);
    match structure {
        ModelStructure::Bj { .. } => {
            let mut y = vec![0.0; n];
            for (j, uj) in u.iter().enumerate() {
                let w = filter_input(&p.b[j], &p.f[j], uj, nk);
                for (yt, wt) in y.iter_mut().zip(w) {
                    *yt += wt;
                }
            }
            y
        }
        _ => {
            let mut y = vec![0.0; n];
            for t in 0..n {
                let mut s = input_term(&p.b, u, nk, t);
                for (i, a) in p.a.iter().enumerate() {
                    s += a * lag(&y, t, i + 1);
                }
                y[t] = s;
            }
            y
        }
    }
}

/// `w(t) = Σ b_k u(t-nk-k) + Σ f_i w(t-i)`
fn filter_input(b: &[f64], f: &[f64], u: &[f64], nk: usize) -> Vec<f64> {
    let n = u.len();
    let mut w = vec![0.0; n];
    for t in 0..n {
        let mut s = 0.0;
        for (k, c) in b.iter().enumerate() {
            s += c * lag(u, t, nk + k);
        }
        for (i, c) in f.iter().enumerate() {
            s += c * lag(&w, t, i + 1);
        }
        w[t] = s;
    }
    w
}

/// One-step-ahead prediction errors `e(t)` of one output, from `t = 0`.
/// Errors before `skip` are pinned to zero so the recursion starts clean.
pub(super) fn prediction_errors(
    p: &MisoPolynomial,
    structure: ModelStructure,
    u: &[&[f64]],
    y: &[f64],
    skip: usize,
) -> Vec<f64> {
    let n = y.len();
    let nk = nk_of(structure);
    match structure {
        ModelStructure::Bj { .. } => {
            let sim = simulate_miso(p, structure, u);
            let v: Vec<f64> = y.iter().zip(&sim).map(|(a, b)| a - b).collect();
            let mut e = vec![0.0; n];
            for t in skip..n {
                let mut s = v[t];
                for (i, d) in p.d.iter().enumerate() {
                    s -= d * lag(&v, t, i + 1);
                }
                for (i, c) in p.c.iter().enumerate() {
                    s -= c * lag(&e, t, i + 1);
                }
                e[t] = s;
            }
            e
        }
        _ => {
            let mut e = vec![0.0; n];
            for t in skip..n {
                let mut pred = input_term(&p.b, u, nk, t);
                for (i, a) in p.a.iter().enumerate() {
                    pred += a * lag(y, t, i + 1);
                }
                for (i, c) in p.c.iter().enumerate() {
                    pred += c * lag(&e, t, i + 1);
                }
                e[t] = y[t] - pred;
            }
            e
        }
    }
}

fn nk_of(s: ModelStructure) -> usize {
    match s {
        ModelStructure::Arx { nk, .. }
        | ModelStructure::Armax { nk, .. }
        | ModelStructure::Bj { nk, .. } => nk,
        ModelStructure::StateSpace { .. } => 0,
    }
}
