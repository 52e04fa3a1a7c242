//! Models under test.
//!
//! Anything that maps an input [`SignalSet`] to an output [`SignalSet`]
//! deterministically implements [`Executable`]. The benchmark analogs are
//! ODE systems integrated with classical RK4; [`CostWrapper`] makes a model
//! artificially expensive without changing what it computes.

pub mod benchmarks;
mod ode;

use std::hint::black_box;

use crate::error::{Error, Result};
use crate::signals::SignalSet;

pub use ode::{rk4_integrate, OdeModel, OdeSystem};

/// A deterministic, black-box model with named input and output channels.
pub trait Executable: Send + Sync {
    fn id(&self) -> &str;

    fn inputs(&self) -> &[String];

    fn outputs(&self) -> &[String];

    /// Runs the model. The output shares the input's time domain.
    fn execute(&self, input: &SignalSet) -> Result<SignalSet>;

    /// Declared input ranges, when the model has them.
    fn input_ranges(&self) -> Option<Vec<(f64, f64)>> {
        None
    }

    fn check_input(&self, input: &SignalSet) -> Result<()> {
        input.expect_channels(self.inputs())
    }
}

impl<T: Executable + ?Sized> Executable for Box<T> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn inputs(&self) -> &[String] {
        (**self).inputs()
    }
    fn outputs(&self) -> &[String] {
        (**self).outputs()
    }
    fn execute(&self, input: &SignalSet) -> Result<SignalSet> {
        (**self).execute(input)
    }
    fn input_ranges(&self) -> Option<Vec<(f64, f64)>> {
        (**self).input_ranges()
    }
}

impl<T: Executable + ?Sized> Executable for std::sync::Arc<T> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn inputs(&self) -> &[String] {
        (**self).inputs()
    }
    fn outputs(&self) -> &[String] {
        (**self).outputs()
    }
    fn execute(&self, input: &SignalSet) -> Result<SignalSet> {
        (**self).execute(input)
    }
    fn input_ranges(&self) -> Option<Vec<(f64, f64)>> {
        (**self).input_ranges()
    }
}

/// `y_i = u_i` for every channel, renamed to the declared outputs.
#[derive(Debug, Clone)]
pub struct Passthrough {
    id: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Passthrough {
    pub fn new(inputs: &[&str], outputs: &[&str]) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::structural(
                "passthrough needs as many outputs as inputs",
            ));
        }
        Ok(Passthrough {
            id: "passthrough".into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        })
    }
}

impl Executable for Passthrough {
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
        self.check_input(input)?;
        let cols = self
            .outputs
            .iter()
            .zip(input.signals())
            .map(|(n, s)| (n.clone(), s.values().to_vec()))
            .collect();
        SignalSet::from_columns(input.domain(), cols)
    }
}

/// A model whose outputs are fixed functions of time, ignoring the input.
pub struct FnModel<F> {
    id: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&SignalSet) -> Vec<Vec<f64>> + Send + Sync,
{
    /// `f` maps the input set to one value column per output.
    pub fn new(id: &str, inputs: &[&str], outputs: &[&str], f: F) -> Self {
        FnModel {
            id: id.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            f,
        }
    }
}

impl<F> Executable for FnModel<F>
where
    F: Fn(&SignalSet) -> Vec<Vec<f64>> + Send + Sync,
{
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
        self.check_input(input)?;
        let cols = self.outputs.iter().cloned().zip((self.f)(input)).collect();
        SignalSet::from_columns(input.domain(), cols)
    }
}

/// Makes every execution `factor` times as expensive by re-running the
/// inner model; the returned trace is the inner model's.
pub struct CostWrapper<M> {
    inner: M,
    factor: usize,
    id: String,
}

impl<M: Executable> CostWrapper<M> {
    pub fn new(inner: M, factor: usize) -> Self {
        let id = format!("{}x{}", inner.id(), factor.max(1));
        CostWrapper {
            inner,
            factor: factor.max(1),
            id,
        }
    }

    pub fn factor(&self) -> usize {
        self.factor
    }
}

impl<M: Executable> Executable for CostWrapper<M> {
    fn id(&self) -> &str {
        &self.id
    }
    fn inputs(&self) -> &[String] {
        self.inner.inputs()
    }
    fn outputs(&self) -> &[String] {
        self.inner.outputs()
    }
    fn input_ranges(&self) -> Option<Vec<(f64, f64)>> {
        self.inner.input_ranges()
    }
    fn execute(&self, input: &SignalSet) -> Result<SignalSet> {
        for _ in 1..self.factor {
            black_box(self.inner.execute(black_box(input))?);
        }
        self.inner.execute(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::TimeDomain;

    #[test]
    fn passthrough_copies_input() {
        let d = TimeDomain::new(2.0, 0.5).unwrap();
        let u = SignalSet::from_columns(d, vec![("u", vec![1.0, 2.0, 3.0, 4.0, 5.0])]).unwrap();
        let m = Passthrough::new(&["u"], &["y"]).unwrap();
        let y = m.execute(&u).unwrap();
        assert_eq!(y.get("y").unwrap().values(), u.get("u").unwrap().values());
        let wrong = SignalSet::from_columns(d, vec![("v", vec![0.0; 5])]).unwrap();
        assert!(matches!(m.execute(&wrong), Err(Error::Structural(_))));
    }

    #[test]
    fn cost_wrapper_is_transparent() {
        let d = TimeDomain::new(2.0, 0.5).unwrap();
        let u = SignalSet::from_columns(d, vec![("u", vec![1.0, -2.0, 3.0, 0.5, 5.0])]).unwrap();
        let m = Passthrough::new(&["u"], &["y"]).unwrap();
        let w = CostWrapper::new(m.clone(), 7);
        assert_eq!(w.execute(&u).unwrap(), m.execute(&u).unwrap());
        assert_eq!(w.id(), "passthroughx7");
    }
}
