//! Surrogate models fitted by system identification.
//!
//! Four discrete-time structures are supported. Polynomial structures are
//! identified per output channel (multi-input, single-output) with every
//! model input as a regressor:
//!
//! ```text
//! arx    y(t) = Σ a_i y(t-i) + Σ_j Σ_k b_jk u_j(t-nk-k) + e(t)
//! armax  y(t) = Σ a_i y(t-i) + Σ_j Σ_k b_jk u_j(t-nk-k) + e(t) + Σ c_i e(t-i)
//! bj     y(t) = Σ_j w_j(t) + v(t)
//!        w_j(t) = Σ_k b_jk u_j(t-nk-k) + Σ_i f_ji w_j(t-i)
//!        v(t)   = e(t) + Σ c_i e(t-i) + Σ d_i v(t-i)
//! ss     x(t+1) = F x(t) + G u(t),  y(t) = H x(t) + D u(t)
//! ```
//!
//! All polynomials use the recursion sign convention shown above, so `a_1`
//! is the coefficient that multiplies `y(t-1)` directly. Fitting minimizes
//! one-step prediction error; [`simulate`] is a free run with `e ≡ 0` and
//! zero initial conditions (fitted `x0` for state space).

mod linalg;
mod poly;
mod subspace;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Executable;
use crate::signals::{SignalSet, TimeDomain};

pub use linalg::Solver;

/// Version tag written into serialized surrogate files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "snake_case")]
pub enum ModelStructure {
    Arx {
        na: usize,
        nb: usize,
        nk: usize,
    },
    Armax {
        na: usize,
        nb: usize,
        nc: usize,
        nk: usize,
    },
    Bj {
        nb: usize,
        nc: usize,
        nd: usize,
        nf: usize,
        nk: usize,
    },
    StateSpace {
        n: usize,
    },
}

impl ModelStructure {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ModelStructure::Arx { na, nb, .. } | ModelStructure::Armax { na, nb, .. } => {
                na + nb > 0
            }
            ModelStructure::Bj { nb, nf, .. } => nb + nf > 0 && nb > 0,
            ModelStructure::StateSpace { n } => n >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{self} has no free dynamics")))
        }
    }

    /// Leading rows of each experiment excluded from the regression, so
    /// regressors never reach before the start of an experiment.
    pub fn skip_rows(&self) -> usize {
        match *self {
            ModelStructure::Arx { na, nb, nk } | ModelStructure::Armax { na, nb, nk, .. } => {
                na.max(nb + nk)
            }
            ModelStructure::Bj { nb, nf, nk, .. } => (nb + nk).max(nf + nk),
            ModelStructure::StateSpace { .. } => 0,
        }
    }

    /// Free parameters for a model with `m` inputs and `p` outputs.
    pub fn parameter_count(&self, m: usize, p: usize) -> usize {
        match *self {
            ModelStructure::Arx { na, nb, .. } => p * (na + m * nb),
            ModelStructure::Armax { na, nb, nc, .. } => p * (na + m * nb + nc),
            ModelStructure::Bj { nb, nc, nd, nf, .. } => p * (m * (nb + nf) + nc + nd),
            ModelStructure::StateSpace { n } => n * n + n * m + p * n + p * m + n,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelStructure::Arx { .. } => "arx",
            ModelStructure::Armax { .. } => "armax",
            ModelStructure::Bj { .. } => "bj",
            ModelStructure::StateSpace { .. } => "ss",
        }
    }

    /// Order vector as written on the CLI (`--orders 2,2,1`).
    pub fn orders(&self) -> Vec<usize> {
        match *self {
            ModelStructure::Arx { na, nb, nk } => vec![na, nb, nk],
            ModelStructure::Armax { na, nb, nc, nk } => vec![na, nb, nc, nk],
            ModelStructure::Bj { nb, nc, nd, nf, nk } => vec![nb, nc, nd, nf, nk],
            ModelStructure::StateSpace { n } => vec![n],
        }
    }

    /// Builds a structure from a family name and an order vector.
    pub fn from_orders(family: &str, orders: &[usize]) -> Result<Self> {
        let want = |n: usize| {
            if orders.len() == n {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{family} takes {n} orders, got {}",
                    orders.len()
                )))
            }
        };
        let s = match family {
            "arx" => {
                want(3)?;
                ModelStructure::Arx {
                    na: orders[0],
                    nb: orders[1],
                    nk: orders[2],
                }
            }
            "armax" => {
                want(4)?;
                ModelStructure::Armax {
                    na: orders[0],
                    nb: orders[1],
                    nc: orders[2],
                    nk: orders[3],
                }
            }
            "bj" => {
                want(5)?;
                ModelStructure::Bj {
                    nb: orders[0],
                    nc: orders[1],
                    nd: orders[2],
                    nf: orders[3],
                    nk: orders[4],
                }
            }
            "ss" => {
                want(1)?;
                ModelStructure::StateSpace { n: orders[0] }
            }
            _ => return Err(Error::Config(format!("unknown model structure `{family}`"))),
        };
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for ModelStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o: Vec<String> = self.orders().iter().map(ToString::to_string).collect();
        write!(f, "{}({})", self.family(), o.join(","))
    }
}

/// Input/output experiments, one per model execution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainingData {
    experiments: Vec<(SignalSet, SignalSet)>,
}

impl TrainingData {
    pub fn new(input: SignalSet, output: SignalSet) -> Result<Self> {
        let mut d = TrainingData::default();
        d.push(input, output)?;
        Ok(d)
    }

    pub fn push(&mut self, input: SignalSet, output: SignalSet) -> Result<()> {
        if !input.domain().same_as(&output.domain()) {
            return Err(Error::structural(
                "experiment input and output must share a time domain",
            ));
        }
        if let Some((u0, y0)) = self.experiments.first() {
            if (u0.domain().step() - input.domain().step()).abs() > 1e-12 * u0.domain().step() {
                return Err(Error::structural(
                    "experiments must share the sampling step",
                ));
            }
            input.expect_channels(&u0.names())?;
            output.expect_channels(&y0.names())?;
        }
        self.experiments.push((input, output));
        Ok(())
    }

    /// `self ⊕ (input, output)`
    pub fn with(&self, input: SignalSet, output: SignalSet) -> Result<Self> {
        let mut d = self.clone();
        d.push(input, output)?;
        Ok(d)
    }

    pub fn experiments(&self) -> &[(SignalSet, SignalSet)] {
        &self.experiments
    }

    pub fn len(&self) -> usize {
        self.experiments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experiments.is_empty()
    }

    pub fn total_samples(&self) -> usize {
        self.experiments.iter().map(|(u, _)| u.domain().len()).sum()
    }

    fn first(&self) -> Result<&(SignalSet, SignalSet)> {
        self.experiments
            .first()
            .ok_or_else(|| Error::structural("training data has no experiments"))
    }

    pub fn input_names(&self) -> Vec<String> {
        self.experiments
            .first()
            .map(|(u, _)| u.names().into_iter().map(String::from).collect())
            .unwrap_or_default()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.experiments
            .first()
            .map(|(_, y)| y.names().into_iter().map(String::from).collect())
            .unwrap_or_default()
    }

    pub fn step(&self) -> Option<f64> {
        self.experiments.first().map(|(u, _)| u.domain().step())
    }

    /// Column-major views used by the fitting code.
    fn columns(&self) -> Vec<Experiment> {
        self.experiments
            .iter()
            .map(|(u, y)| Experiment {
                u: u.signals().iter().map(|s| s.values().to_vec()).collect(),
                y: y.signals().iter().map(|s| s.values().to_vec()).collect(),
            })
            .collect()
    }
}

pub(crate) struct Experiment {
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl Experiment {
    pub fn len(&self) -> usize {
        self.u.first().or(self.y.first()).map_or(0, Vec::len)
    }
}

/// Polynomial coefficients of one output's MISO submodel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MisoPolynomial {
    pub a: Vec<f64>,
    /// `b[j]`: numerator coefficients for input `j`.
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    /// `f[j]`: denominator coefficients for input `j` (Box-Jenkins only).
    pub f: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceMatrices {
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Coefficients {
    Polynomial { outputs: Vec<MisoPolynomial> },
    StateSpace(StateSpaceMatrices),
}

/// A fitted surrogate with the same channel interface as the data source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub format_version: u32,
    pub structure: ModelStructure,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub step: f64,
    pub coefficients: Coefficients,
    /// Largest pole magnitude; `>= 1` means the free run can grow.
    pub spectral_radius: f64,
    pub warnings: Vec<String>,
    /// One-step prediction MSE on the training data.
    pub train_mse: f64,
    pub experiments: usize,
    #[serde(skip)]
    id: String,
}

impl SurrogateModel {
    pub fn is_stable(&self) -> bool {
        self.spectral_radius < 1.0 + 1e-6
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: SurrogateModel = serde_json::from_str(text)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::structural(format!(
                "unsupported surrogate format version {}",
                m.format_version
            )));
        }
        m.id = format!("surrogate:{}", m.structure);
        Ok(m)
    }
}

impl Executable for SurrogateModel {
    fn id(&self) -> &str {
        &self.id
    }
    fn inputs(&self) -> &[String] {
        &self.inputs
    }
    fn outputs(&self) -> &[String] {
        &self.outputs
    }
    fn execute(&self, input: &SignalSet) -> Result<SignalSet> {
        simulate(self, input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub solver: Solver,
    /// Iteration cap for ARMAX and Box-Jenkins.
    pub max_iterations: usize,
    /// Stop when no coefficient moves by more than this.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            solver: Solver::MinNorm,
            max_iterations: 50,
            tolerance: 1e-6,
        }
    }
}

/// Fits `structure` to `data` with default options.
pub fn fit(structure: ModelStructure, data: &TrainingData) -> Result<SurrogateModel> {
    fit_with(structure, data, &FitOptions::default())
}

pub fn fit_with(
    structure: ModelStructure,
    data: &TrainingData,
    opts: &FitOptions,
) -> Result<SurrogateModel> {
    structure.validate()?;
    let (u0, y0) = data.first()?;
    let inputs: Vec<String> = u0.names().into_iter().map(String::from).collect();
    let outputs: Vec<String> = y0.names().into_iter().map(String::from).collect();
    let (m, p) = (inputs.len(), outputs.len());
    let skip = structure.skip_rows();
    let samples: usize = data
        .experiments
        .iter()
        .map(|(u, _)| u.domain().len().saturating_sub(skip))
        .sum();
    let params = structure.parameter_count(m, p);
    // polynomial outputs are fitted one at a time; the state-space fit uses
    // every output sample jointly
    let (usable, needed) = if matches!(structure, ModelStructure::StateSpace { .. }) {
        (samples * p, params)
    } else {
        (samples, params / p.max(1))
    };
    if usable <= 10 * needed {
        return Err(Error::structural(format!(
            "{structure} needs more than {} usable rows, have {usable}",
            10 * needed
        )));
    }
    let exps = data.columns();
    let singular = || Error::SingularFit {
        structure: structure.to_string(),
    };
    let coefficients = match structure {
        ModelStructure::Arx { na, nb, nk } => Coefficients::Polynomial {
            outputs: (0..p)
                .map(|o| poly::fit_arx(&exps, o, na, nb, nk, skip, opts.solver))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(singular)?,
        },
        ModelStructure::Armax { na, nb, nc, nk } => Coefficients::Polynomial {
            outputs: (0..p)
                .map(|o| poly::fit_armax(&exps, o, na, nb, nc, nk, skip, opts))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(singular)?,
        },
        ModelStructure::Bj { nb, nc, nd, nf, nk } => Coefficients::Polynomial {
            outputs: (0..p)
                .map(|o| poly::fit_bj(&exps, o, nb, nc, nd, nf, nk, skip, opts))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(singular)?,
        },
        ModelStructure::StateSpace { n } => Coefficients::StateSpace(
            subspace::fit_state_space(&exps, n, opts.solver).ok_or_else(singular)?,
        ),
    };
    let mut model = SurrogateModel {
        format_version: MODEL_FORMAT_VERSION,
        structure,
        inputs,
        outputs,
        step: u0.domain().step(),
        spectral_radius: 0.0,
        coefficients,
        warnings: Vec::new(),
        train_mse: 0.0,
        experiments: data.len(),
        id: format!("surrogate:{structure}"),
    };
    model.spectral_radius = poles_radius(&model);
    if !model.is_stable() {
        model.warnings.push(format!(
            "identified {structure} is unstable (spectral radius {:.6})",
            model.spectral_radius
        ));
    }
    model.train_mse = one_step_mse(&model, data)?;
    Ok(model)
}

fn poles_radius(model: &SurrogateModel) -> f64 {
    match &model.coefficients {
        Coefficients::Polynomial { outputs } => outputs
            .iter()
            .flat_map(|o| {
                std::iter::once(linalg::recursion_radius(&o.a))
                    .chain(o.f.iter().map(|f| linalg::recursion_radius(f)))
            })
            .fold(0.0, f64::max),
        Coefficients::StateSpace(ss) => {
            linalg::spectral_radius(&linalg::from_rows(&ss.f, ss.x0.len()))
        }
    }
}

/// Refits the same structure on the old data plus one new experiment.
pub fn refine(
    structure: ModelStructure,
    old: &TrainingData,
    input: SignalSet,
    output: SignalSet,
    opts: &FitOptions,
) -> Result<(SurrogateModel, TrainingData)> {
    let data = old.with(input, output)?;
    let model = fit_with(structure, &data, opts)?;
    Ok((model, data))
}

/// Magnitude above which a free run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Free-run simulation of the surrogate on `input`.
pub fn simulate(model: &SurrogateModel, input: &SignalSet) -> Result<SignalSet> {
    input.expect_channels(&model.inputs)?;
    let domain = input.domain();
    if (domain.step() - model.step).abs() > 1e-9 * model.step {
        return Err(Error::structural(format!(
            "input step {} does not match the surrogate step {}",
            domain.step(),
            model.step
        )));
    }
    let u: Vec<&[f64]> = input.signals().iter().map(|s| s.values()).collect();
    let cols = match &model.coefficients {
        Coefficients::Polynomial { outputs } => outputs
            .iter()
            .map(|o| poly::simulate_miso(o, model.structure, &u))
            .collect::<Vec<_>>(),
        Coefficients::StateSpace(ss) => subspace::simulate(ss, &u, model.outputs.len()),
    };
    check_divergence(&cols, domain)?;
    let columns = model.outputs.iter().cloned().zip(cols).collect();
    SignalSet::from_columns(domain, columns)
}

fn check_divergence(cols: &[Vec<f64>], domain: TimeDomain) -> Result<()> {
    let first_bad = cols
        .iter()
        .filter_map(|c| {
            c.iter()
                .position(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT)
        })
        .min();
    match first_bad {
        Some(step) => Err(Error::Divergence {
            step,
            time: domain.time(step),
        }),
        None => Ok(()),
    }
}

/// Mean squared difference over all channels and samples.
pub fn mse(reference: &SignalSet, predicted: &SignalSet) -> Result<f64> {
    if !reference.domain().same_as(&predicted.domain()) {
        return Err(Error::structural(
            "mse: signal sets have different time domains",
        ));
    }
    predicted.expect_channels(&reference.names())?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (r, p) in reference.signals().iter().zip(predicted.signals()) {
        for (a, b) in r.values().iter().zip(p.values()) {
            sum += (a - b) * (a - b);
        }
        count += r.values().len();
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// One-step-ahead prediction MSE of `model` over `data`, averaged over
/// outputs and the regression rows of every experiment. For state-space
/// models (no noise model) this is the free-run simulation error.
pub fn one_step_mse(model: &SurrogateModel, data: &TrainingData) -> Result<f64> {
    let exps = data.columns();
    let skip = model.structure.skip_rows();
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in &exps {
        let u: Vec<&[f64]> = e.u.iter().map(Vec::as_slice).collect();
        match &model.coefficients {
            Coefficients::Polynomial { outputs } => {
                for (o, poly) in outputs.iter().enumerate() {
                    let res = poly::prediction_errors(poly, model.structure, &u, &e.y[o], skip);
                    for r in res.iter().skip(skip) {
                        sum += r * r;
                        count += 1;
                    }
                }
            }
            Coefficients::StateSpace(ss) => {
                let sim = subspace::simulate(ss, &u, e.y.len());
                for (s, y) in sim.iter().zip(&e.y) {
                    for (a, b) in s.iter().zip(y) {
                        sum += (a - b) * (a - b);
                        count += 1;
                    }
                }
            }
        }
    }
    if count == 0 {
        return Err(Error::structural("no usable rows for prediction error"));
    }
    Ok(sum / count as f64)
}
