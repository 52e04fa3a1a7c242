#![allow(dead_code)]

use falsur::model::{Executable, FnModel};
use falsur::signals::{InputChannelSpec, InputProfile, SignalSet, TimeDomain};
use falsur::stl::{Interval, Predicate, Relation, StlFormula};
use falsur::Rng;
use rand::Rng as _;

pub const CHANNELS: [&str; 2] = ["x", "y"];

/// 100 samples, half-second step.
pub fn oracle_domain() -> TimeDomain {
    TimeDomain::new(49.5, 0.5).unwrap()
}

/// Two channels, each linear between 2 to 8 random breakpoints.
pub fn piecewise_linear_trace(rng: &mut Rng, d: TimeDomain) -> SignalSet {
    let n = d.len();
    let cols = CHANNELS
        .iter()
        .map(|&name| {
            let pieces = rng.random_range(1..8usize);
            let mut knots: Vec<usize> = (0..pieces - 1)
                .map(|_| rng.random_range(1..n - 1))
                .collect();
            knots.push(0);
            knots.push(n - 1);
            knots.sort_unstable();
            knots.dedup();
            let vals: Vec<f64> = knots.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut v = vec![0.0; n];
            for w in 0..knots.len() - 1 {
                let (k0, k1) = (knots[w], knots[w + 1]);
                for (k, slot) in v.iter_mut().enumerate().take(k1 + 1).skip(k0) {
                    let s = (k - k0) as f64 / (k1 - k0) as f64;
                    *slot = vals[w] + s * (vals[w + 1] - vals[w]);
                }
            }
            (name, v)
        })
        .collect();
    SignalSet::from_columns(d, cols).unwrap()
}

fn predicate(rng: &mut Rng) -> Predicate {
    let relation = [Relation::Lt, Relation::Le, Relation::Gt, Relation::Ge][rng.random_range(0..4)];
    let bound = rng.random_range(-2.0..2.0);
    if rng.random_bool(0.7) {
        Predicate::simple(CHANNELS[rng.random_range(0..2)], relation, bound)
    } else {
        Predicate {
            terms: vec![(1.0, "x".into()), (rng.random_range(-1.5..1.5), "y".into())],
            offset: -bound,
            relation,
        }
    }
}

/// A random formula of operator depth at most `depth` whose total horizon
/// stays within `budget` samples of `step`.
pub fn random_formula(rng: &mut Rng, depth: usize, budget: usize, step: f64) -> StlFormula {
    if depth == 0 || rng.random_bool(0.15) {
        return StlFormula::Atom(predicate(rng));
    }
    let sub = |rng: &mut Rng, b| random_formula(rng, depth - 1, b, step);
    let window = |rng: &mut Rng| {
        let hi = rng.random_range(0..=budget);
        let lo = rng.random_range(0..=hi);
        (lo as f64 * step, hi as f64 * step, budget - hi)
    };
    match rng.random_range(0..7) {
        0 => StlFormula::not(sub(rng, budget)),
        1 => StlFormula::and(sub(rng, budget), sub(rng, budget)),
        2 => StlFormula::or(sub(rng, budget), sub(rng, budget)),
        3 => StlFormula::implies(sub(rng, budget), sub(rng, budget)),
        4 => {
            let (lo, hi, rest) = window(rng);
            StlFormula::globally(lo, hi, sub(rng, rest))
        }
        5 => {
            let (lo, hi, rest) = window(rng);
            StlFormula::eventually(lo, hi, sub(rng, rest))
        }
        _ => {
            let (lo, hi, rest) = window(rng);
            StlFormula::until(lo, hi, sub(rng, rest), sub(rng, rest))
        }
    }
}

fn holds_atom(p: &Predicate, trace: &SignalSet, k: usize) -> bool {
    let e = p.offset
        + p.terms
            .iter()
            .map(|(c, n)| c * trace.get(n).unwrap().values()[k])
            .sum::<f64>();
    match p.relation {
        Relation::Lt => e < 0.0,
        Relation::Le => e <= 0.0,
        Relation::Gt => e > 0.0,
        Relation::Ge => e >= 0.0,
    }
}

/// Boolean satisfaction at every sample, by direct quantification over
/// each window. Windows are clipped at the last sample; `until` needs the
/// left operand up to and including the instant the right one holds.
pub fn holds(f: &StlFormula, trace: &SignalSet) -> Vec<bool> {
    let d = trace.domain();
    let n = d.len();
    let idx = |t: f64| (t / d.step()).round() as usize;
    let span = |i: &Interval, k: usize| (k + idx(i.lo), (k + idx(i.hi)).min(n - 1));
    match f {
        StlFormula::True => vec![true; n],
        StlFormula::Atom(p) => (0..n).map(|k| holds_atom(p, trace, k)).collect(),
        StlFormula::Not(a) => holds(a, trace).iter().map(|v| !v).collect(),
        StlFormula::And(a, b) => holds(a, trace)
            .iter()
            .zip(holds(b, trace))
            .map(|(x, y)| *x && y)
            .collect(),
        StlFormula::Or(a, b) => holds(a, trace)
            .iter()
            .zip(holds(b, trace))
            .map(|(x, y)| *x || y)
            .collect(),
        StlFormula::Implies(a, b) => holds(a, trace)
            .iter()
            .zip(holds(b, trace))
            .map(|(x, y)| !*x || y)
            .collect(),
        StlFormula::Globally(i, a) => {
            let s = holds(a, trace);
            (0..n)
                .map(|k| {
                    let (lo, hi) = span(i, k);
                    lo > hi || (lo..=hi).all(|j| s[j])
                })
                .collect()
        }
        StlFormula::Eventually(i, a) => {
            let s = holds(a, trace);
            (0..n)
                .map(|k| {
                    let (lo, hi) = span(i, k);
                    (lo..=hi).any(|j| s[j])
                })
                .collect()
        }
        StlFormula::Until(i, a, b) => {
            let (sa, sb) = (holds(a, trace), holds(b, trace));
            (0..n)
                .map(|k| {
                    let (lo, hi) = span(i, k);
                    (lo..=hi).any(|j| sb[j] && (k..=j).all(|m| sa[m]))
                })
                .collect()
        }
    }
}

pub const ARX_A: [f64; 2] = [0.6, -0.08];
pub const ARX_B: [f64; 2] = [0.5, 0.2];

/// `y(t) = 0.6 y(t-1) - 0.08 y(t-2) + 0.5 u(t-1) + 0.2 u(t-2)`, from rest.
pub fn arx_mut() -> impl Executable {
    FnModel::new("arx-mut", &["u"], &["y"], |input: &SignalSet| {
        let u = input.signals()[0].values();
        let mut y = vec![0.0; u.len()];
        for t in 0..u.len() {
            for lag in 1..=2 {
                if t >= lag {
                    y[t] += ARX_A[lag - 1] * y[t - lag] + ARX_B[lag - 1] * u[t - lag];
                }
            }
        }
        vec![y]
    })
}

pub fn arx_profile() -> InputProfile {
    let d = TimeDomain::new(50.0, 0.1).unwrap();
    InputProfile::new(
        d,
        vec![InputChannelSpec::from_notation("u", "pchip(10)", (-1.0, 1.0)).unwrap()],
    )
    .unwrap()
}

/// Runs `steps` refinements on benchmark `id`, feeding back the surrogate's
/// best candidate each time (a random one if the surrogate search fails).
/// Per step: one-step MSE of the previous and of the refitted surrogate,
/// both on the combined training set.
pub fn refinement_steps(id: &str, seed: u64, steps: usize) -> Vec<(f64, f64)> {
    use falsur::refinement::{approximate, check_on_mut};
    use falsur::search::{falsify, generate, FalsificationConfig, SearchStrategy};
    use falsur::sysid::{one_step_mse, refine, FitOptions, ModelStructure};

    let b = falsur::model::benchmarks::get(id).unwrap();
    let f = b.formula().unwrap();
    let structure = ModelStructure::Arx {
        na: 2,
        nb: 2,
        nk: 1,
    };
    let mut rng = falsur::seeded(seed);
    let (mut surrogate, mut data) =
        approximate(b.model.as_ref(), &b.profile, structure, &mut rng).unwrap();
    let mut out = Vec::new();
    for i in 0..steps {
        let cfg =
            FalsificationConfig::new(20, SearchStrategy::UniformRandom, seed * 100 + i as u64);
        let candidate = match falsify(&surrogate, &b.profile, &f, &cfg) {
            Ok(r) => r.best_input,
            Err(_) => generate(&b.profile, &mut rng).unwrap(),
        };
        let (_, output) = check_on_mut(b.model.as_ref(), &candidate, &f).unwrap();
        let (next, combined) = refine(
            structure,
            &data,
            candidate.signals().clone(),
            output,
            &FitOptions::default(),
        )
        .unwrap();
        out.push((
            one_step_mse(&surrogate, &combined).unwrap(),
            one_step_mse(&next, &combined).unwrap(),
        ));
        surrogate = next;
        data = combined;
    }
    out
}
