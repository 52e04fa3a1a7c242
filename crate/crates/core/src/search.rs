//! The baseline falsification loop and the strategies that propose its
//! candidates.
//!
//! A candidate is a vector of control-point values (times stay fixed by the
//! profile). The loop runs the model on each candidate, scores the output
//! with the requirement's robustness and stops as soon as a score is `<= 0`.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Executable;
use crate::signals::{
    generate_control_points, interpolate, ControlPoints, InputProfile, SignalSet,
};
use crate::stl::{test_objective, StlFormula, Verdict};
use crate::{seeded, Rng};

/// A test input: control points per channel plus the interpolated signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTest {
    pub points: Vec<ControlPoints>,
    #[serde(skip_serializing, default)]
    signals: Option<SignalSet>,
}

impl CandidateTest {
    pub fn from_points(profile: &InputProfile, points: Vec<ControlPoints>) -> Result<Self> {
        if points.len() != profile.channels.len() {
            return Err(Error::structural(format!(
                "candidate has {} channels, profile has {}",
                points.len(),
                profile.channels.len()
            )));
        }
        let signals = profile
            .channels
            .iter()
            .zip(&points)
            .map(|(spec, cp)| {
                if cp.len() != spec.points {
                    return Err(Error::structural(format!(
                        "channel `{}` expects {} control points, got {}",
                        spec.name,
                        spec.points,
                        cp.len()
                    )));
                }
                interpolate(
                    &spec.name,
                    cp,
                    spec.interpolation,
                    &profile.domain,
                    spec.range,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CandidateTest {
            points,
            signals: Some(SignalSet::new(profile.domain, signals)?),
        })
    }

    /// The interpolated input signals.
    pub fn signals(&self) -> &SignalSet {
        self.signals
            .as_ref()
            .expect("candidate built without a profile")
    }

    /// Rebuilds the signal cache after deserialization.
    pub fn rebind(self, profile: &InputProfile) -> Result<Self> {
        Self::from_points(profile, self.points)
    }

    /// Flattened control-point values, channel by channel.
    pub fn values(&self) -> Vec<f64> {
        self.points
            .iter()
            .flat_map(|p| p.values.iter().copied())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// Independent uniform draw of every channel's control points.
pub fn generate(profile: &InputProfile, rng: &mut Rng) -> Result<CandidateTest> {
    let points = profile
        .channels
        .iter()
        .map(|spec| generate_control_points(spec, &profile.domain, rng))
        .collect();
    CandidateTest::from_points(profile, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchStrategy {
    /// Fresh uniform sample every step.
    UniformRandom,
    /// Gaussian perturbation of the incumbent; restart after `restart_after`
    /// consecutive non-improving steps.
    HillClimbRestart {
        step_fraction: f64,
        restart_after: usize,
    },
    /// Gaussian proposals accepted with probability `min(1, exp(-Δ/T))`,
    /// where Δ is normalized by the first objective's magnitude.
    SimulatedAnnealing {
        initial_temperature: f64,
        cooling_rate: f64,
        proposal_sigma_fraction: f64,
    },
}

impl SearchStrategy {
    pub fn hill_climb() -> Self {
        SearchStrategy::HillClimbRestart {
            step_fraction: 0.1,
            restart_after: 10,
        }
    }

    pub fn annealing() -> Self {
        SearchStrategy::SimulatedAnnealing {
            initial_temperature: 1.0,
            cooling_rate: 0.95,
            proposal_sigma_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let frac = |f: f64| f > 0.0 && f <= 1.0;
        match *self {
            SearchStrategy::UniformRandom => Ok(()),
            SearchStrategy::HillClimbRestart {
                step_fraction,
                restart_after,
            } => {
                if !frac(step_fraction) || restart_after == 0 {
                    return Err(Error::Config(format!(
                        "hill climbing needs step_fraction in (0,1] and restart_after >= 1, got {step_fraction}, {restart_after}"
                    )));
                }
                Ok(())
            }
            SearchStrategy::SimulatedAnnealing {
                initial_temperature,
                cooling_rate,
                proposal_sigma_fraction,
            } => {
                let positive = initial_temperature > 0.0;
                let decays = cooling_rate > 0.0 && cooling_rate < 1.0;
                if !positive || !decays || !frac(proposal_sigma_fraction) {
                    return Err(Error::Config(format!(
                        "invalid annealing parameters {self:?}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Parses the CLI names `random`, `hill-climb`, `annealing`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "random" | "uniform" | "uniform-random" => Ok(SearchStrategy::UniformRandom),
            "hill-climb" | "hillclimb" => Ok(Self::hill_climb()),
            "annealing" | "sa" => Ok(Self::annealing()),
            _ => Err(Error::Config(format!("unknown strategy `{name}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SearchStrategy::UniformRandom => "random",
            SearchStrategy::HillClimbRestart { .. } => "hill-climb",
            SearchStrategy::SimulatedAnnealing { .. } => "annealing",
        }
    }
}

/// Gaussian perturbation of every control value, `σ = fraction · width`,
/// clipped to the channel range.
pub fn perturb(
    profile: &InputProfile,
    current: &CandidateTest,
    fraction: f64,
    rng: &mut Rng,
) -> Result<CandidateTest> {
    let points = profile
        .channels
        .iter()
        .zip(&current.points)
        .map(|(spec, cp)| {
            let sigma = fraction * spec.width();
            let values = cp
                .values
                .iter()
                .map(|&v| {
                    if sigma > 0.0 {
                        let n = Normal::new(0.0, sigma).expect("sigma is positive");
                        spec.clip(v + n.sample(rng))
                    } else {
                        v
                    }
                })
                .collect();
            ControlPoints {
                times: cp.times.clone(),
                values,
            }
        })
        .collect();
    CandidateTest::from_points(profile, points)
}

/// Proposes the next candidate from `current` without any search memory.
///
/// Uniform random ignores `current`; the local strategies perturb it.
/// Acceptance, restarts and cooling are handled by [`SearchState`].
pub fn search_step(
    strategy: &SearchStrategy,
    profile: &InputProfile,
    current: &CandidateTest,
    _current_objective: f64,
    rng: &mut Rng,
) -> Result<CandidateTest> {
    match *strategy {
        SearchStrategy::UniformRandom => generate(profile, rng),
        SearchStrategy::HillClimbRestart { step_fraction, .. } => {
            perturb(profile, current, step_fraction, rng)
        }
        SearchStrategy::SimulatedAnnealing {
            proposal_sigma_fraction,
            ..
        } => perturb(profile, current, proposal_sigma_fraction, rng),
    }
}

/// Metropolis acceptance: improvements always, worsening moves with
/// probability `exp(-delta / temperature)`.
pub fn accept_probability(delta: f64, temperature: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else if temperature <= 0.0 {
        0.0
    } else {
        (-delta / temperature).exp()
    }
}

/// Incumbent, restart counter and temperature carried across steps.
#[derive(Debug, Clone)]
pub struct SearchState {
    strategy: SearchStrategy,
    incumbent: Option<(CandidateTest, f64)>,
    failures: usize,
    temperature: f64,
    scale: Option<f64>,
    restarts: usize,
}

impl SearchState {
    pub fn new(strategy: SearchStrategy) -> Self {
        let temperature = match strategy {
            SearchStrategy::SimulatedAnnealing {
                initial_temperature,
                ..
            } => initial_temperature,
            _ => 0.0,
        };
        SearchState {
            strategy,
            incumbent: None,
            failures: 0,
            temperature,
            scale: None,
            restarts: 0,
        }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    pub fn propose(&self, profile: &InputProfile, rng: &mut Rng) -> Result<CandidateTest> {
        match &self.incumbent {
            Some((cur, obj)) => search_step(&self.strategy, profile, cur, *obj, rng),
            None => generate(profile, rng),
        }
    }

    /// Records the evaluated `candidate` and updates the incumbent.
    pub fn observe(&mut self, candidate: CandidateTest, objective: f64, rng: &mut Rng) {
        let scale = *self.scale.get_or_insert_with(|| {
            if objective.abs() > 1e-12 {
                objective.abs()
            } else {
                1.0
            }
        });
        match self.strategy {
            SearchStrategy::UniformRandom => {}
            SearchStrategy::HillClimbRestart { restart_after, .. } => match &self.incumbent {
                Some((_, best)) if objective >= *best => {
                    self.failures += 1;
                    if self.failures >= restart_after {
                        self.incumbent = None;
                        self.failures = 0;
                        self.restarts += 1;
                    }
                }
                _ => {
                    self.incumbent = Some((candidate, objective));
                    self.failures = 0;
                }
            },
            SearchStrategy::SimulatedAnnealing { cooling_rate, .. } => {
                let accept = match &self.incumbent {
                    None => true,
                    Some((_, cur)) => {
                        let p = accept_probability((objective - cur) / scale, self.temperature);
                        p >= 1.0 || rng.random::<f64>() < p
                    }
                };
                if accept {
                    if self.incumbent.is_some() {
                        self.temperature *= cooling_rate;
                    }
                    self.incumbent = Some((candidate, objective));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsificationConfig {
    pub max_executions: usize,
    pub strategy: SearchStrategy,
    pub seed: u64,
}

impl FalsificationConfig {
    pub fn new(max_executions: usize, strategy: SearchStrategy, seed: u64) -> Self {
        FalsificationConfig {
            max_executions,
            strategy,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_executions == 0 {
            return Err(Error::Config("MAX must be at least 1".into()));
        }
        self.strategy.validate()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FalsificationResult {
    pub falsified: bool,
    pub verdict: Verdict,
    pub best_input: CandidateTest,
    pub best_objective: f64,
    pub executions_used: usize,
    pub objective_history: Vec<f64>,
}

impl FalsificationResult {
    /// `iteration,objective` rows.
    pub fn write_history_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "objective"])?;
        for (i, o) in self.objective_history.iter().enumerate() {
            w.write_record([(i + 1).to_string(), o.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `model` on `candidate` and scores the output.
pub fn evaluate(
    model: &dyn Executable,
    formula: &StlFormula,
    candidate: &CandidateTest,
) -> Result<(f64, SignalSet)> {
    let output = model
        .execute(candidate.signals())
        .map_err(|e| Error::Execution {
            model: model.id().to_string(),
            reason: e.to_string(),
            candidate: candidate.to_json(),
        })?;
    let objective = test_objective(formula, candidate.signals(), &output)?;
    Ok((objective, output))
}

/// Fails with a structural error unless the profile drives exactly the
/// model's inputs, in order.
pub fn check_interface(model: &dyn Executable, profile: &InputProfile) -> Result<()> {
    let names = profile.names();
    if names
        .iter()
        .copied()
        .ne(model.inputs().iter().map(String::as_str))
    {
        return Err(Error::structural(format!(
            "profile channels [{}] do not match the inputs of {} [{}]",
            names.join(", "),
            model.id(),
            model.inputs().join(", ")
        )));
    }
    Ok(())
}

/// The baseline falsification loop: generate, execute, score, stop at the
/// first objective `<= 0` or after `max_executions` runs.
pub fn falsify(
    model: &dyn Executable,
    profile: &InputProfile,
    formula: &StlFormula,
    config: &FalsificationConfig,
) -> Result<FalsificationResult> {
    config.validate()?;
    let mut rng = seeded(config.seed);
    falsify_with_rng(model, profile, formula, config, &mut rng)
}

pub(crate) fn falsify_with_rng(
    model: &dyn Executable,
    profile: &InputProfile,
    formula: &StlFormula,
    config: &FalsificationConfig,
    rng: &mut Rng,
) -> Result<FalsificationResult> {
    check_interface(model, profile)?;
    let mut state = SearchState::new(config.strategy);
    let mut history = Vec::with_capacity(config.max_executions);
    let mut best: Option<(CandidateTest, f64)> = None;
    for _ in 0..config.max_executions {
        let candidate = state.propose(profile, rng)?;
        let (objective, _) = evaluate(model, formula, &candidate)?;
        history.push(objective);
        if best.as_ref().is_none_or(|(_, b)| objective < *b) {
            best = Some((candidate.clone(), objective));
        }
        if objective <= 0.0 {
            break;
        }
        state.observe(candidate, objective, rng);
    }
    let (best_input, best_objective) = best.expect("at least one execution");
    Ok(FalsificationResult {
        falsified: best_objective <= 0.0,
        verdict: Verdict::of(best_objective),
        best_input,
        best_objective,
        executions_used: history.len(),
        objective_history: history,
    })
}
