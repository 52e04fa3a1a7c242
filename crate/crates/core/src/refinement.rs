//! The surrogate refinement loop.
//!
//! One MUT execution trains an initial surrogate. Each iteration falsifies
//! the surrogate, replays the candidate on the MUT, and either stops on a
//! real violation or refits the surrogate with the spurious candidate's
//! trace appended to the training data.
//!
//! Accounting: `mut_executions = 1 + iterations`; the approximation run is
//! not counted against `max_refinements`, every validation is.

use std::fmt;
use std::io::Write;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Executable;
use crate::search::{self, evaluate, CandidateTest, FalsificationConfig};
use crate::signals::{InputProfile, SignalSet};
use crate::stl::StlFormula;
use crate::sysid::{self, FitOptions, ModelStructure, SurrogateModel, TrainingData};
use crate::{seeded, Rng};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AristeoConfig {
    /// MAX_REF: loop iterations, each with one MUT validation.
    pub max_refinements: usize,
    pub structure: ModelStructure,
    /// Falsification of the surrogate. Its seed is also the run seed.
    pub inner: FalsificationConfig,
    #[serde(default)]
    pub fit: FitOptions,
}

impl AristeoConfig {
    pub fn new(
        structure: ModelStructure,
        max_refinements: usize,
        inner: FalsificationConfig,
    ) -> Self {
        AristeoConfig {
            max_refinements,
            structure,
            inner,
            fit: FitOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_refinements == 0 {
            return Err(Error::Config("MAX_REF must be at least 1".into()));
        }
        self.structure.validate()?;
        self.inner.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ViolationFound,
    BudgetExhausted,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::ViolationFound => "violation_found",
            Outcome::BudgetExhausted => "budget_exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    /// Whether the inner search found a surrogate violation. When it did
    /// not, its best candidate was validated anyway.
    pub surrogate_falsified: bool,
    pub surrogate_objective: f64,
    pub mut_objective: f64,
    /// One-step MSE of the surrogate used in this iteration.
    pub train_mse: f64,
    pub surrogate_executions: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AristeoReport {
    pub outcome: Outcome,
    pub failing_input: Option<CandidateTest>,
    /// Lowest MUT objective over all validations.
    pub best_objective: f64,
    pub best_input: CandidateTest,
    /// Objective of the approximation run (not a validation).
    pub approximation_objective: f64,
    pub mut_executions: usize,
    pub refinements_performed: usize,
    pub iterations: Vec<IterationLog>,
    pub surrogate: SurrogateModel,
}

impl AristeoReport {
    pub fn falsified(&self) -> bool {
        self.outcome == Outcome::ViolationFound
    }

    /// `iter,surrogate_obj,mut_obj,train_mse,falsified` rows.
    pub fn write_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "surrogate_obj", "mut_obj", "train_mse", "falsified"])?;
        for it in &self.iterations {
            w.write_record([
                it.iteration.to_string(),
                it.surrogate_objective.to_string(),
                it.mut_objective.to_string(),
                it.train_mse.to_string(),
                it.surrogate_falsified.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Executes one random input on the MUT and fits the initial surrogate.
pub fn approximate(
    mut_model: &dyn Executable,
    profile: &InputProfile,
    structure: ModelStructure,
    rng: &mut Rng,
) -> Result<(SurrogateModel, TrainingData)> {
    let (surrogate, data, _) =
        approximate_with(mut_model, profile, structure, &FitOptions::default(), rng)?;
    Ok((surrogate, data))
}

fn approximate_with(
    mut_model: &dyn Executable,
    profile: &InputProfile,
    structure: ModelStructure,
    opts: &FitOptions,
    rng: &mut Rng,
) -> Result<(SurrogateModel, TrainingData, (CandidateTest, SignalSet))> {
    let candidate = search::generate(profile, rng)?;
    let output = mut_model.execute(candidate.signals())?;
    let data = TrainingData::new(candidate.signals().clone(), output.clone())?;
    let surrogate = sysid::fit_with(structure, &data, opts)?;
    Ok((surrogate, data, (candidate, output)))
}

/// Replays `candidate` on the MUT: one execution.
pub fn check_on_mut(
    mut_model: &dyn Executable,
    candidate: &CandidateTest,
    formula: &StlFormula,
) -> Result<(f64, SignalSet)> {
    evaluate(mut_model, formula, candidate)
}

/// Rng for the surrogate search of `iteration`: seed `seed + iteration` on
/// a stream separate from the approximation input.
fn inner_rng(seed: u64, iteration: usize) -> Rng {
    let mut rng = Rng::seed_from_u64(seed.wrapping_add(iteration as u64));
    rng.set_stream(1);
    rng
}

/// Runs the loop for at most `config.max_refinements` iterations.
pub fn run(
    mut_model: &dyn Executable,
    profile: &InputProfile,
    formula: &StlFormula,
    config: &AristeoConfig,
) -> Result<AristeoReport> {
    config.validate()?;
    search::check_interface(mut_model, profile)?;
    let at = |iteration: usize| {
        move |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        }
    };

    let mut rng = seeded(config.inner.seed);
    let (mut surrogate, mut data, (first_input, first_output)) =
        approximate_with(mut_model, profile, config.structure, &config.fit, &mut rng)
            .map_err(at(0))?;
    let approximation_objective =
        crate::stl::test_objective(formula, first_input.signals(), &first_output)?;

    let mut iterations = Vec::with_capacity(config.max_refinements);
    let mut mut_executions = 1;
    let mut refinements = 0;
    let mut best: Option<(CandidateTest, f64)> = None;
    let mut pending: Option<(CandidateTest, SignalSet)> = None;

    for iteration in 1..=config.max_refinements {
        if let Some((input, output)) = pending.take() {
            let (s, d) = sysid::refine(
                config.structure,
                &data,
                input.signals().clone(),
                output,
                &config.fit,
            )
            .map_err(at(iteration))?;
            surrogate = s;
            data = d;
            refinements += 1;
        }
        debug_assert_eq!(data.len(), iteration);

        let inner = search::falsify_with_rng(
            &surrogate,
            profile,
            formula,
            &config.inner,
            &mut inner_rng(config.inner.seed, iteration),
        )
        .map_err(at(iteration))?;
        let candidate = inner.best_input;
        let (mut_objective, output) =
            check_on_mut(mut_model, &candidate, formula).map_err(at(iteration))?;
        mut_executions += 1;

        iterations.push(IterationLog {
            iteration,
            surrogate_falsified: inner.falsified,
            surrogate_objective: inner.best_objective,
            mut_objective,
            train_mse: surrogate.train_mse,
            surrogate_executions: inner.executions_used,
            warnings: surrogate.warnings.clone(),
        });
        if best.as_ref().is_none_or(|(_, b)| mut_objective < *b) {
            best = Some((candidate.clone(), mut_objective));
        }
        if mut_objective <= 0.0 {
            return Ok(AristeoReport {
                outcome: Outcome::ViolationFound,
                failing_input: Some(candidate.clone()),
                best_objective: mut_objective,
                best_input: candidate,
                approximation_objective,
                mut_executions,
                refinements_performed: refinements,
                iterations,
                surrogate,
            });
        }
        pending = Some((candidate, output));
    }

    let (best_input, best_objective) = best.expect("at least one iteration");
    Ok(AristeoReport {
        outcome: Outcome::BudgetExhausted,
        failing_input: None,
        best_objective,
        best_input,
        approximation_objective,
        mut_executions,
        refinements_performed: refinements,
        iterations,
        surrogate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnModel;
    use crate::search::SearchStrategy;
    use crate::signals::{InputChannelSpec, TimeDomain};
    use crate::stl::parse_stl;

    fn profile() -> InputProfile {
        let d = TimeDomain::new(60.0, 0.5).unwrap();
        InputProfile::new(
            d,
            vec![InputChannelSpec::from_notation("u", "pchip(6)", (-1.0, 1.0)).unwrap()],
        )
        .unwrap()
    }

    fn constant(value: f64) -> impl Executable {
        FnModel::new("const", &["u"], &["y"], move |u: &SignalSet| {
            let noise = u.signals()[0]
                .values()
                .iter()
                .map(|v| value + 1e-3 * v)
                .collect();
            vec![noise]
        })
    }

    fn config(max_ref: usize) -> AristeoConfig {
        AristeoConfig::new(
            ModelStructure::Arx {
                na: 1,
                nb: 1,
                nk: 1,
            },
            max_ref,
            FalsificationConfig::new(20, SearchStrategy::UniformRandom, 5),
        )
    }

    #[test]
    fn always_violating_model_stops_in_first_iteration() {
        let f = parse_stl("G[0,60] (y < 2)", &["y"]).unwrap();
        let r = run(&constant(3.0), &profile(), &f, &config(10)).unwrap();
        assert_eq!(r.outcome, Outcome::ViolationFound);
        assert_eq!(r.mut_executions, 2);
        assert_eq!(r.iterations.len(), 1);
        assert_eq!(r.refinements_performed, 0);
        assert!(r.failing_input.is_some());
    }

    #[test]
    fn never_violating_model_exhausts_budget() {
        let f = parse_stl("G[0,60] (y < 2)", &["y"]).unwrap();
        let r = run(&constant(0.0), &profile(), &f, &config(4)).unwrap();
        assert_eq!(r.outcome, Outcome::BudgetExhausted);
        assert_eq!(r.mut_executions, 5);
        assert_eq!(r.refinements_performed, 3);
        assert_eq!(r.surrogate.experiments, 4);
        assert!(r.failing_input.is_none());
        assert!(r
            .iterations
            .iter()
            .all(|it| !it.surrogate_falsified && it.mut_objective > 0.0));
    }

    #[test]
    fn approximate_uses_one_execution() {
        let calls = std::sync::atomic::AtomicUsize::new(0);
        let m = FnModel::new("count", &["u"], &["y"], |u: &SignalSet| {
            calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
            vec![u.signals()[0].values().to_vec()]
        });
        let (s, d) = approximate(
            &m,
            &profile(),
            ModelStructure::Arx {
                na: 1,
                nb: 1,
                nk: 0,
            },
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(calls.load(std::sync::atomic::Ordering::SeqCst), 1);
        assert_eq!(d.len(), 1);
        assert_eq!(s.inputs, vec!["u"]);
        assert_eq!(s.outputs, vec!["y"]);
    }

    #[test]
    fn log_csv_has_one_row_per_iteration() {
        let f = parse_stl("G[0,60] (y < 2)", &["y"]).unwrap();
        let r = run(&constant(0.0), &profile(), &f, &config(3)).unwrap();
        let mut buf = Vec::new();
        r.write_log_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iter,surrogate_obj,mut_obj,train_mse,falsified");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("3,"));
    }

    #[test]
    fn rejects_zero_budgets() {
        let f = parse_stl("G[0,60] (y < 2)", &["y"]).unwrap();
        assert!(run(&constant(0.0), &profile(), &f, &config(0)).is_err());
        let mut c = config(2);
        c.inner.max_executions = 0;
        assert!(run(&constant(0.0), &profile(), &f, &c).is_err());
    }
}
