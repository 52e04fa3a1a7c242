//! Campaigns, sweeps and reports.
//!
//! A campaign repeats one configuration over consecutive seeds and writes a
//! results directory:
//!
//! ```text
//! <out>/config.toml                     the resolved configuration
//! <out>/rows.csv                        seed,mode,outcome,best_objective,mut_executions,iterations,wall_ms
//! <out>/runs/seed-<n>/report.json       full run report
//! <out>/runs/seed-<n>/history.csv       iteration,objective        (baseline)
//! <out>/runs/seed-<n>/aristeo_log.csv   iter,surrogate_obj,...     (surrogate)
//! <out>/runs/seed-<n>/failing_input.csv the violating input trace, when found
//! <out>/summary.json                    aggregate metrics
//! ```

mod campaign;
mod report;
mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{benchmarks, CostWrapper, Executable};
use crate::refinement::{self, AristeoConfig, AristeoReport};
use crate::search::{self, FalsificationConfig, FalsificationResult, SearchStrategy};
use crate::signals::InputProfile;
use crate::stl::{parse_stl, StlFormula};
use crate::sysid::ModelStructure;

pub use campaign::{
    read_rows, replay, run_campaign, CampaignReport, ReplayCheck, RunRow, ROW_HEADER,
};
pub use report::{report, Summary};
pub use sweep::{default_ladder, pareto_front, sweep, SweepConfig, SweepRow, SweepVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    Surrogate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Surrogate => "surrogate",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "surrogate" | "aristeo" => Ok(Mode::Surrogate),
            _ => Err(Error::Config(format!(
                "unknown mode `{s}` (baseline, surrogate)"
            ))),
        }
    }
}

fn default_structure() -> String {
    "arx".into()
}
fn default_max() -> usize {
    100
}
fn default_max_ref() -> usize {
    10
}
fn one() -> usize {
    1
}

/// One experiment, as stored in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Benchmark id.
    pub model: String,
    /// Requirement; defaults to the benchmark's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stl: Option<String>,
    /// Input profile; defaults to the benchmark's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<InputProfile>,
    pub mode: Mode,
    #[serde(default = "default_structure")]
    pub structure: String,
    /// Empty means the default orders of `structure`.
    #[serde(default)]
    pub orders: Vec<usize>,
    /// random, hill-climb or annealing. Required: there is no default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// MAX: executions for baseline mode, surrogate executions per
    /// iteration in surrogate mode.
    #[serde(default = "default_max")]
    pub max: usize,
    #[serde(default = "default_max_ref")]
    pub max_ref: usize,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Each MUT execution is repeated this many times (`CostWrapper`).
    #[serde(default = "one")]
    pub cost_factor: usize,
}

impl ExperimentConfig {
    pub fn new(model: &str, mode: Mode) -> Self {
        ExperimentConfig {
            model: model.to_string(),
            stl: None,
            profile: None,
            mode,
            structure: default_structure(),
            orders: Vec::new(),
            strategy: None,
            max: default_max(),
            max_ref: default_max_ref(),
            reps: 1,
            seed: 0,
            cost_factor: 1,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// The surrogate structure with default orders filled in.
    pub fn model_structure(&self) -> Result<ModelStructure> {
        let orders = if self.orders.is_empty() {
            match self.structure.as_str() {
                "arx" => vec![2, 2, 1],
                "armax" => vec![2, 2, 1, 1],
                "bj" => vec![2, 1, 1, 2, 1],
                "ss" => vec![2],
                other => return Err(Error::Config(format!("unknown model structure `{other}`"))),
            }
        } else {
            self.orders.clone()
        };
        ModelStructure::from_orders(&self.structure, &orders)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategy.is_none() {
            return Err(Error::Config(
                "no search strategy given (random, hill-climb or annealing)".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.cost_factor == 0 {
            return Err(Error::Config("cost_factor must be at least 1".into()));
        }
        if self.max == 0 {
            return Err(Error::Config("max must be at least 1".into()));
        }
        if self.mode == Mode::Surrogate {
            if self.max_ref == 0 {
                return Err(Error::Config("max_ref must be at least 1".into()));
            }
            self.model_structure()?;
        }
        SearchStrategy::from_name(self.strategy.as_deref().unwrap_or_default())?;
        Ok(())
    }

    /// Resolves ids and text into runnable objects.
    pub fn resolve(&self) -> Result<Experiment> {
        self.validate()?;
        let bench = benchmarks::get(&self.model)?;
        let model: Arc<dyn Executable> = if self.cost_factor > 1 {
            Arc::new(CostWrapper::new(bench.model.clone(), self.cost_factor))
        } else {
            bench.model.clone()
        };
        let profile = self
            .profile
            .clone()
            .unwrap_or_else(|| bench.profile.clone());
        profile.validate()?;
        search::check_interface(model.as_ref(), &profile)?;
        let text = self.stl.as_deref().unwrap_or(bench.requirement);
        let formula = parse_stl(text, model.outputs())?;
        if formula.horizon() > profile.domain.end() * (1.0 + 1e-9) {
            return Err(Error::Horizon {
                needed: formula.horizon(),
                available: profile.domain.end(),
            });
        }
        let structure = match self.mode {
            Mode::Surrogate => Some(self.model_structure()?),
            Mode::Baseline => None,
        };
        Ok(Experiment {
            config: self.clone(),
            model,
            profile,
            formula,
            structure,
            strategy: SearchStrategy::from_name(self.strategy.as_deref().unwrap_or_default())?,
        })
    }
}

/// A resolved configuration.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: Arc<dyn Executable>,
    pub profile: InputProfile,
    pub formula: StlFormula,
    pub structure: Option<ModelStructure>,
    pub strategy: SearchStrategy,
}

/// What a single run produced.
#[derive(Debug, Clone)]
pub enum RunDetail {
    Baseline(FalsificationResult),
    Surrogate(Box<AristeoReport>),
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub mode: Mode,
    pub result: std::result::Result<RunDetail, String>,
    pub wall_ms: u64,
}

impl RunOutput {
    pub fn falsified(&self) -> bool {
        match &self.result {
            Ok(RunDetail::Baseline(r)) => r.falsified,
            Ok(RunDetail::Surrogate(r)) => r.falsified(),
            Err(_) => false,
        }
    }

    pub fn row(&self) -> RunRow {
        let (outcome, best, execs, iters) = match &self.result {
            Ok(RunDetail::Baseline(r)) => (
                if r.falsified {
                    "violation_found"
                } else {
                    "budget_exhausted"
                }
                .to_string(),
                Some(r.best_objective),
                Some(r.executions_used),
                Some(r.executions_used),
            ),
            Ok(RunDetail::Surrogate(r)) => (
                r.outcome.to_string(),
                Some(r.best_objective),
                Some(r.mut_executions),
                Some(r.iterations.len()),
            ),
            Err(_) => ("error".to_string(), None, None, None),
        };
        RunRow {
            seed: self.seed,
            mode: self.mode.to_string(),
            outcome,
            best_objective: best,
            mut_executions: execs,
            iterations: iters,
            wall_ms: self.wall_ms,
        }
    }

    /// Writes the per-run artifacts into `dir` and returns the path of the
    /// failing input trace, when there is one.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Option<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let failing = match &self.result {
            Ok(RunDetail::Baseline(r)) => {
                std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(r)?)?;
                r.write_history_csv(std::fs::File::create(dir.join("history.csv"))?)?;
                r.falsified.then_some(&r.best_input)
            }
            Ok(RunDetail::Surrogate(r)) => {
                std::fs::write(dir.join("report.json"), r.to_json()?)?;
                r.write_log_csv(std::fs::File::create(dir.join("aristeo_log.csv"))?)?;
                r.failing_input.as_ref()
            }
            Err(e) => {
                std::fs::write(dir.join("error.txt"), format!("{e}\n"))?;
                None
            }
        };
        match failing {
            Some(c) => {
                let path = dir.join("failing_input.csv");
                c.signals().write_csv(std::fs::File::create(&path)?)?;
                std::fs::write(dir.join("failing_input.json"), c.to_json())?;
                Ok(Some(path))
            }
            None => Ok(None),
        }
    }
}

impl Experiment {
    /// One repetition with the given seed. Model failures are captured in
    /// the output; configuration problems are returned as errors.
    pub fn run_seed(&self, seed: u64) -> RunOutput {
        let start = Instant::now();
        let inner = FalsificationConfig::new(self.config.max, self.strategy, seed);
        let result = match self.structure {
            None => search::falsify(self.model.as_ref(), &self.profile, &self.formula, &inner)
                .map(RunDetail::Baseline),
            Some(structure) => {
                let config = AristeoConfig::new(structure, self.config.max_ref, inner);
                refinement::run(self.model.as_ref(), &self.profile, &self.formula, &config)
                    .map(|r| RunDetail::Surrogate(Box::new(r)))
            }
        };
        RunOutput {
            seed,
            mode: self.config.mode,
            result: result.map_err(|e| e.to_string()),
            wall_ms: start.elapsed().as_millis() as u64,
        }
    }

    /// Seeds of the campaign: `seed, seed + 1, ...`.
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.config.reps as u64).map(|i| self.config.seed.wrapping_add(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = ExperimentConfig::new("heat2r", Mode::Surrogate);
        c.orders = vec![1, 1, 1];
        c.reps = 3;
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn minimal_toml_uses_defaults() {
        let c = ExperimentConfig::from_toml("model = \"satlite\"\nmode = \"baseline\"\n").unwrap();
        assert_eq!(c.max, 100);
        assert_eq!(c.max_ref, 10);
        assert_eq!(c.reps, 1);
        assert_eq!(c.model_structure().unwrap().to_string(), "arx(2,2,1)");
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("model = \"x\"\nmode = \"fast\"\n").is_err());
        assert!(
            ExperimentConfig::from_toml("model = \"x\"\nmode = \"baseline\"\nbogus = 1\n").is_err()
        );
        let mut c = ExperimentConfig::new("nope", Mode::Baseline);
        assert!(c.resolve().is_err());
        c.model = "heat2r".into();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("strategy"), "{err}");
        c.strategy = Some("tabu".into());
        assert!(c.resolve().is_err());
        c.strategy = Some("annealing".into());
        assert!(c.resolve().is_ok());
        c.reps = 0;
        assert!(c.resolve().is_err());
        c.reps = 1;
        c.stl = Some("G[0,24] (speed < 3)".into());
        assert!(matches!(c.resolve(), Err(Error::UnknownChannel { .. })));
    }

    #[test]
    fn inline_profile_is_used() {
        let text = r#"
model = "satlite"
mode = "baseline"
strategy = "hill-climb"

[profile.domain]
end = 100.0
step = 0.5

[[profile.channels]]
name = "mag_temp"
interpolation = { kind = "pchip" }
range = [-20.0, 50.0]
points = 4

[[profile.channels]]
name = "gyro_temp"
interpolation = { kind = "constant" }
range = [0.0, 0.0]
points = 1

[[profile.channels]]
name = "wheel_temp"
interpolation = { kind = "linear" }
range = [-20.0, 50.0]
points = 3

[[profile.channels]]
name = "torquer_temp"
interpolation = { kind = "piecewise_constant" }
range = [-20.0, 50.0]
points = 5
"#;
        let mut c = ExperimentConfig::from_toml(text).unwrap();
        c.stl = Some("G[0,100] (error < 2)".into());
        let e = c.resolve().unwrap();
        assert_eq!(e.profile.domain.len(), 201);
        assert_eq!(e.profile.channels[1].points, 1);
    }
}
