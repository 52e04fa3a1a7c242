use super::Executable;
use crate::error::{Error, Result};
use crate::signals::SignalSet;

/// Continuous dynamics `x' = f(t, x, u)`, `y = h(t, x, u)`.
///
/// Hybrid models keep their discrete mode in a state component with zero
/// derivative and update it in [`OdeSystem::switch_modes`], which runs before
/// every integrator step. There is no zero-crossing localization.
pub trait OdeSystem: Send + Sync {
    fn state_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    fn initial_state(&self) -> Vec<f64>;

    fn derivative(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]);

    fn output(&self, t: f64, x: &[f64], u: &[f64], y: &mut [f64]);

    fn switch_modes(&self, _t: f64, _x: &mut [f64], _u: &[f64]) {}
}

/// An [`OdeSystem`] with a channel interface, integrated with RK4 at
/// `δ / substeps` under zero-order-hold inputs.
pub struct OdeModel<S> {
    id: String,
    system: S,
    inputs: Vec<String>,
    outputs: Vec<String>,
    ranges: Vec<(f64, f64)>,
    substeps: usize,
}

impl<S: OdeSystem> OdeModel<S> {
    pub fn new(id: &str, system: S, inputs: &[(&str, (f64, f64))], outputs: &[&str]) -> Self {
        assert_eq!(
            outputs.len(),
            system.output_dim(),
            "output names must match the system"
        );
        OdeModel {
            id: id.to_string(),
            system,
            inputs: inputs.iter().map(|(n, _)| n.to_string()).collect(),
            ranges: inputs.iter().map(|(_, r)| *r).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
            substeps: 4,
        }
    }

    /// Integrator steps per sample interval (default 4).
    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps.max(1);
        self
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn system(&self) -> &S {
        &self.system
    }
}

impl<S: OdeSystem> Executable for OdeModel<S> {
    fn id(&self) -> &str {
        &self.id
    }
    fn inputs(&self) -> &[String] {
        &self.inputs
    }
    fn outputs(&self) -> &[String] {
        &self.outputs
    }
    fn input_ranges(&self) -> Option<Vec<(f64, f64)>> {
        Some(self.ranges.clone())
    }
    fn execute(&self, input: &SignalSet) -> Result<SignalSet> {
        rk4_integrate(self, input)
    }
}

/// Classical fourth-order Runge-Kutta with inputs held constant over each
/// sample interval; outputs are taken at the sample times.
pub fn rk4_integrate<S: OdeSystem>(model: &OdeModel<S>, input: &SignalSet) -> Result<SignalSet> {
    model.check_input(input)?;
    let sys = &model.system;
    let domain = input.domain();
    let n = sys.state_dim();
    let p = sys.output_dim();
    let m = input.len();
    let h = domain.step() / model.substeps as f64;

    let mut x = sys.initial_state();
    let mut u = vec![0.0; m];
    let mut y = vec![0.0; p];
    let mut cols = vec![Vec::with_capacity(domain.len()); p];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );

    for k in 0..domain.len() {
        let t = domain.time(k);
        for (c, uc) in u.iter_mut().enumerate() {
            *uc = input.sample(c, k);
        }
        sys.output(t, &x, &u, &mut y);
        for (col, v) in cols.iter_mut().zip(&y) {
            col.push(*v);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k, time: t });
        }
        if k == domain.intervals() {
            break;
        }
        for s in 0..model.substeps {
            let ts = t + s as f64 * h;
            sys.switch_modes(ts, &mut x, &u);
            sys.derivative(ts, &x, &u, &mut k1);
            axpy(&x, 0.5 * h, &k1, &mut tmp);
            sys.derivative(ts + 0.5 * h, &tmp, &u, &mut k2);
            axpy(&x, 0.5 * h, &k2, &mut tmp);
            sys.derivative(ts + 0.5 * h, &tmp, &u, &mut k3);
            axpy(&x, h, &k3, &mut tmp);
            sys.derivative(ts + h, &tmp, &u, &mut k4);
            for i in 0..n {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence {
                    step: k,
                    time: ts + h,
                });
            }
        }
    }
    let columns = model.outputs.iter().cloned().zip(cols).collect();
    SignalSet::from_columns(domain, columns)
}

fn axpy(x: &[f64], a: f64, d: &[f64], out: &mut [f64]) {
    for ((o, xi), di) in out.iter_mut().zip(x).zip(d) {
        *o = xi + a * di;
    }
}
