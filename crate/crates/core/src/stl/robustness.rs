use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Interval, Predicate, StlFormula};
use crate::error::{Error, Result};
use crate::signals::{SignalSet, TimeDomain};

/// Three-way reading of a test objective value.
///
/// The falsification loops stop on `objective <= 0`; a value of exactly zero
/// is reported as `Boundary` so it can be told apart from a strict violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violated,
    Boundary,
    Satisfied,
}

impl Verdict {
    pub fn of(objective: f64) -> Self {
        if objective < 0.0 {
            Verdict::Violated
        } else if objective == 0.0 {
            Verdict::Boundary
        } else {
            Verdict::Satisfied
        }
    }

    /// Satisfaction per the `>= 0 is satisfied` reading.
    pub fn is_satisfied(self) -> bool {
        self != Verdict::Violated
    }
}

/// Robustness of `formula` on `trace` at time `t0`.
pub fn robustness(formula: &StlFormula, trace: &SignalSet, t0: f64) -> Result<f64> {
    let domain = trace.domain();
    let k0 = domain.grid_index(t0).ok_or_else(|| {
        Error::structural(format!("evaluation time {t0} is not on the sample grid"))
    })?;
    let needed = t0 + formula.horizon();
    if needed > domain.end() * (1.0 + 1e-9) {
        return Err(Error::Horizon {
            needed,
            available: domain.end(),
        });
    }
    let sig = robustness_signal(formula, trace)?;
    Ok(sig[k0])
}

/// The test objective: robustness of the output trace at time zero.
pub fn test_objective(formula: &StlFormula, _input: &SignalSet, output: &SignalSet) -> Result<f64> {
    robustness(formula, output, 0.0)
}

/// Robustness at every sample of the trace. Temporal windows are truncated
/// at the end of the trace, so values near the end are only meaningful when
/// the formula's horizon fits.
pub fn robustness_signal(formula: &StlFormula, trace: &SignalSet) -> Result<Vec<f64>> {
    let domain = trace.domain();
    eval(formula, trace, &domain)
}

fn eval(f: &StlFormula, trace: &SignalSet, d: &TimeDomain) -> Result<Vec<f64>> {
    use StlFormula::*;
    let n = d.len();
    Ok(match f {
        True => vec![f64::INFINITY; n],
        Atom(p) => atom(p, trace)?,
        Not(a) => eval(a, trace, d)?.into_iter().map(|v| -v).collect(),
        And(a, b) => zip(eval(a, trace, d)?, eval(b, trace, d)?, f64::min),
        Or(a, b) => zip(eval(a, trace, d)?, eval(b, trace, d)?, f64::max),
        Implies(a, b) => zip(eval(a, trace, d)?, eval(b, trace, d)?, |x, y| (-x).max(y)),
        Globally(i, a) => {
            let (lo, hi) = window(i, d)?;
            sliding(&eval(a, trace, d)?, lo, hi, |x, y| x <= y)
        }
        Eventually(i, a) => {
            let (lo, hi) = window(i, d)?;
            sliding(&eval(a, trace, d)?, lo, hi, |x, y| x >= y)
        }
        Until(i, a, b) => {
            let (lo, hi) = window(i, d)?;
            until(&eval(a, trace, d)?, &eval(b, trace, d)?, lo, hi)
        }
    })
}

fn atom(p: &Predicate, trace: &SignalSet) -> Result<Vec<f64>> {
    let n = trace.domain().len();
    let mut expr = vec![p.offset; n];
    for (c, name) in &p.terms {
        let sig = trace.get(name).ok_or_else(|| Error::UnknownChannel {
            name: name.clone(),
            pos: 0,
        })?;
        for (e, v) in expr.iter_mut().zip(sig.values()) {
            *e += c * v;
        }
    }
    // offset is folded into expr, so the bound is zero
    if p.relation.is_upper() {
        expr.iter_mut().for_each(|e| *e = -*e);
    }
    Ok(expr)
}

fn zip(a: Vec<f64>, b: Vec<f64>, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

fn window(i: &Interval, d: &TimeDomain) -> Result<(usize, usize)> {
    let idx = |t: f64| {
        d.grid_index(t)
            .or_else(|| (t > d.end()).then(|| (t / d.step()).round() as usize))
            .ok_or_else(|| {
                Error::structural(format!(
                    "interval bound {t} is not a multiple of the step {}",
                    d.step()
                ))
            })
    };
    Ok((idx(i.lo)?, idx(i.hi)?))
}

/// Sliding extremum over `[k+lo, k+hi]` (monotone deque). `keep(x, y)` is
/// true when `x` dominates `y`.
fn sliding(x: &[f64], lo: usize, hi: usize, keep: impl Fn(f64, f64) -> bool) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = lo;
    for (k, o) in out.iter_mut().enumerate() {
        let end = (k + hi).min(n - 1);
        while next <= end {
            while dq.back().is_some_and(|&j| keep(x[next], x[j])) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&j| j < k + lo) {
            dq.pop_front();
        }
        *o = match dq.front() {
            Some(&j) => x[j],
            // window lies entirely past the end of the trace
            None => x[n - 1],
        };
    }
    out
}

fn until(phi: &[f64], psi: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    let n = phi.len();
    (0..n)
        .map(|k| {
            let mut best = f64::NEG_INFINITY;
            let mut run = f64::INFINITY;
            for j in k..=(k + hi).min(n - 1) {
                run = run.min(phi[j]);
                if j >= k + lo {
                    best = best.max(psi[j].min(run));
                }
            }
            best
        })
        .collect()
}
