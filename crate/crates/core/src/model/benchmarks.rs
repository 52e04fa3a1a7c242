//! Desk-scale benchmark analogs.
//!
//! Each benchmark bundles a model, its default input profile, a requirement
//! and fixture inputs: one certified to violate the requirement and one
//! certified to satisfy it. The dynamics are original; only the interface
//! shape (inputs, ranges, control-point notation, horizon) follows the
//! classic falsification benchmarks. Time is in seconds.
//!
//! | id            | inputs                                   | horizon | requirement                  |
//! |---------------|------------------------------------------|---------|------------------------------|
//! | `heat2r`      | outside pchip(4), gain const(1)          | 24      | both rooms above the band    |
//! | `autotrans`   | throttle pconst(7)                       | 30      | speed / rpm envelope         |
//! | `fuelctl`     | engine_speed const(1), throttle pulse(10)| 50      | air-fuel error bound         |
//! | `satlite`     | four temperatures pchip(16)              | 200     | `G(error < 2)`               |
//! | `satlite-day` | as `satlite`                             | 86400   | `G(error < 2)`               |

use std::sync::Arc;

use super::{Executable, OdeModel, OdeSystem};
use crate::error::{Error, Result};
use crate::search::CandidateTest;
use crate::signals::{
    ControlPoints, InputChannelSpec, InputProfile, InterpolationKind, TimeDomain,
};
use crate::stl::{parse_stl, StlFormula};

/// Registered benchmark ids.
pub const IDS: &[&str] = &["heat2r", "autotrans", "fuelctl", "satlite", "satlite-day"];

pub struct Benchmark {
    pub id: &'static str,
    pub model: Arc<dyn Executable>,
    pub profile: InputProfile,
    pub requirement: &'static str,
    /// Per-channel control-point values of a violating input.
    violating: Vec<Vec<f64>>,
    /// Per-channel control-point values of a satisfying input.
    satisfying: Vec<Vec<f64>>,
}

impl Benchmark {
    pub fn formula(&self) -> Result<StlFormula> {
        parse_stl(self.requirement, self.model.outputs())
    }

    pub fn violating_input(&self) -> Result<CandidateTest> {
        self.fixture(&self.violating)
    }

    pub fn satisfying_input(&self) -> Result<CandidateTest> {
        self.fixture(&self.satisfying)
    }

    fn fixture(&self, values: &[Vec<f64>]) -> Result<CandidateTest> {
        let points = self
            .profile
            .channels
            .iter()
            .zip(values)
            .map(|(spec, v)| {
                let times = crate::signals::equal_times(spec.points, &self.profile.domain);
                ControlPoints::new(times, v.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        CandidateTest::from_points(&self.profile, points)
    }
}

/// Looks up a benchmark by id.
pub fn get(id: &str) -> Result<Benchmark> {
    match id {
        "heat2r" => heat2r(),
        "autotrans" => autotrans(),
        "fuelctl" => fuelctl(),
        "satlite" => satlite(TimeDomain::new(200.0, 0.25)?),
        "satlite-day" => satlite(TimeDomain::new(86400.0, 0.03125)?),
        _ => Err(Error::Config(format!(
            "unknown benchmark `{id}` (known: {})",
            IDS.join(", ")
        ))),
    }
}

fn profile(domain: TimeDomain, channels: &[(&str, &str, (f64, f64))]) -> Result<InputProfile> {
    let specs = channels
        .iter()
        .map(|(name, notation, range)| InputChannelSpec::from_notation(*name, notation, *range))
        .collect::<Result<Vec<_>>>()?;
    InputProfile::new(domain, specs)
}

fn ranges(profile: &InputProfile) -> Vec<(&str, (f64, f64))> {
    profile
        .channels
        .iter()
        .map(|c| (c.name.as_str(), c.range))
        .collect()
}

// ---------------------------------------------------------------------------
// heat2r

/// Two rooms sharing a wall, each with an on/off heater under a hysteresis
/// thermostat. Outputs are deviations from the 20 degree set point.
#[derive(Debug, Clone)]
pub struct TwoRoomHeating {
    pub loss: [f64; 2],
    pub coupling: f64,
    pub power: [f64; 2],
    pub set_point: f64,
    pub hysteresis: f64,
}

impl Default for TwoRoomHeating {
    fn default() -> Self {
        TwoRoomHeating {
            loss: [0.25, 0.2],
            coupling: 0.15,
            power: [5.5, 4.7],
            set_point: 20.0,
            hysteresis: 0.5,
        }
    }
}

impl OdeSystem for TwoRoomHeating {
    fn state_dim(&self) -> usize {
        4
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![self.set_point, self.set_point, 0.0, 0.0]
    }
    fn derivative(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let (outside, gain) = (u[0], u[1]);
        for r in 0..2 {
            let other = x[1 - r];
            dx[r] = self.loss[r] * (outside - x[r])
                + self.coupling * (other - x[r])
                + gain * self.power[r] * x[2 + r];
        }
        dx[2] = 0.0;
        dx[3] = 0.0;
    }
    fn output(&self, _t: f64, x: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0] - self.set_point;
        y[1] = x[1] - self.set_point;
    }
    fn switch_modes(&self, _t: f64, x: &mut [f64], _u: &[f64]) {
        for r in 0..2 {
            if x[r] < self.set_point - self.hysteresis {
                x[2 + r] = 1.0;
            } else if x[r] > self.set_point + self.hysteresis {
                x[2 + r] = 0.0;
            }
        }
    }
}

fn heat2r() -> Result<Benchmark> {
    let profile = profile(
        TimeDomain::new(24.0, 0.05)?,
        &[
            ("outside", "pchip(4)", (-2.0, 5.0)),
            ("gain", "const(1)", (0.8, 1.2)),
        ],
    )?;
    let model = OdeModel::new(
        "heat2r",
        TwoRoomHeating::default(),
        &ranges(&profile),
        &["t1", "t2"],
    );
    Ok(Benchmark {
        id: "heat2r",
        model: Arc::new(model),
        profile,
        requirement: "G[0,24] ((t1 > -1.4) & (t2 > -1.4))",
        violating: vec![vec![-2.0; 4], vec![0.8]],
        satisfying: vec![vec![5.0; 4], vec![1.2]],
    })
}

// ---------------------------------------------------------------------------
// autotrans

/// Longitudinal vehicle with a four-speed automatic gearbox. Gears shift on
/// speed thresholds with hysteresis; the gear is state component 1.
#[derive(Debug, Clone)]
pub struct AutoTransmission {
    pub ratios: [f64; 4],
    pub up: [f64; 3],
    pub down: [f64; 3],
    /// rpm per mph at ratio 1.
    pub rpm_per_mph: f64,
    pub accel: f64,
    pub drag: f64,
    pub rolling: f64,
}

impl Default for AutoTransmission {
    fn default() -> Self {
        AutoTransmission {
            ratios: [3.5, 2.2, 1.5, 1.0],
            up: [18.0, 38.0, 62.0],
            down: [12.0, 30.0, 52.0],
            rpm_per_mph: 35.0,
            accel: 2.0,
            drag: 2.5e-4,
            rolling: 0.01,
        }
    }
}

impl AutoTransmission {
    fn gear(x: &[f64]) -> usize {
        (x[1].round() as usize).min(3)
    }

    fn rpm(&self, x: &[f64]) -> f64 {
        x[0] * self.ratios[Self::gear(x)] * self.rpm_per_mph
    }

    fn torque(rpm: f64) -> f64 {
        let r = (rpm - 3000.0) / 4000.0;
        (1.0 - r * r).max(0.2)
    }
}

impl OdeSystem for AutoTransmission {
    fn state_dim(&self) -> usize {
        2
    }
    fn output_dim(&self) -> usize {
        2
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0, 0.0]
    }
    fn derivative(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let v = x[0];
        let ratio = self.ratios[Self::gear(x)];
        let drive = u[0] / 100.0 * self.accel * ratio * Self::torque(self.rpm(x));
        dx[0] = drive - self.drag * v * v - self.rolling * v;
        dx[1] = 0.0;
    }
    fn output(&self, _t: f64, x: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0];
        y[1] = self.rpm(x);
    }
    fn switch_modes(&self, _t: f64, x: &mut [f64], _u: &[f64]) {
        let g = Self::gear(x);
        if g < 3 && x[0] > self.up[g] {
            x[1] = (g + 1) as f64;
        } else if g > 0 && x[0] < self.down[g - 1] {
            x[1] = (g - 1) as f64;
        }
    }
}

fn autotrans() -> Result<Benchmark> {
    let profile = profile(
        TimeDomain::new(30.0, 0.05)?,
        &[("throttle", "pconst(7)", (0.0, 100.0))],
    )?;
    let model = OdeModel::new(
        "autotrans",
        AutoTransmission::default(),
        &ranges(&profile),
        &["speed", "rpm"],
    );
    Ok(Benchmark {
        id: "autotrans",
        model: Arc::new(model),
        profile,
        requirement: "G[0,30] ((speed < 56) & (rpm < 4500))",
        violating: vec![vec![100.0; 7]],
        satisfying: vec![vec![0.0; 7]],
    })
}

// ---------------------------------------------------------------------------
// fuelctl

/// Intake manifold filling plus an integral fuel controller that meters fuel
/// from a lagged pressure estimate. Throttle steps make the measured air
/// lead the estimate, which shows up as air-fuel ratio excursions `mu`
/// (relative deviation from stoichiometric). The estimate lags more at low
/// engine speed.
#[derive(Debug, Clone)]
pub struct FuelControl {
    pub inflow: f64,
    pub pump: f64,
    pub fill_rate: f64,
    pub sensor_lag: f64,
    pub integral_gain: f64,
    pub throttle_max: f64,
}

impl Default for FuelControl {
    fn default() -> Self {
        FuelControl {
            inflow: 1.2,
            pump: 1.5,
            fill_rate: 4.0,
            sensor_lag: 0.05,
            integral_gain: 0.5,
            throttle_max: 61.1,
        }
    }
}

impl FuelControl {
    fn opening(&self, throttle: f64) -> f64 {
        0.1 + 0.9 * throttle / self.throttle_max
    }

    fn speed(rpm: f64) -> f64 {
        rpm / 1000.0
    }

    /// Manifold pressure at rest for a closed throttle at 1000 rpm.
    fn rest_pressure(&self) -> f64 {
        let a = self.inflow * self.opening(0.0);
        a / (a + self.pump)
    }

    fn mu(x: &[f64]) -> f64 {
        x[0] / (x[1] * (1.0 + x[2])) - 1.0
    }
}

impl OdeSystem for FuelControl {
    fn state_dim(&self) -> usize {
        3
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        let p = self.rest_pressure();
        vec![p, p, 0.0]
    }
    fn derivative(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let (rpm, throttle) = (u[0], u[1]);
        let w = Self::speed(rpm);
        let q_in = self.inflow * self.opening(throttle) * (1.0 - x[0]);
        let q_out = self.pump * w * x[0];
        dx[0] = self.fill_rate * (q_in - q_out);
        dx[1] = (x[0] - x[1]) * w / self.sensor_lag;
        dx[2] = self.integral_gain * Self::mu(x);
    }
    fn output(&self, _t: f64, x: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = Self::mu(x);
    }
}

fn fuelctl() -> Result<Benchmark> {
    let domain = TimeDomain::new(50.0, 0.05)?;
    let speed = InputChannelSpec::from_notation("engine_speed", "const(1)", (900.0, 1100.0))?;
    let throttle = InputChannelSpec::new(
        "throttle",
        InterpolationKind::Pulse {
            period: None,
            duty: 0.5,
        },
        (0.0, 61.1),
        10,
    )?;
    let profile = InputProfile::new(domain, vec![speed, throttle])?;
    let model = OdeModel::new(
        "fuelctl",
        FuelControl::default(),
        &ranges(&profile),
        &["mu"],
    );
    Ok(Benchmark {
        id: "fuelctl",
        model: Arc::new(model),
        profile,
        requirement: "G[0,50] ((mu < 0.69) & (mu > -0.69))",
        violating: vec![vec![900.0], vec![61.1; 10]],
        satisfying: vec![vec![1000.0], vec![0.0; 10]],
    })
}

// ---------------------------------------------------------------------------
// satlite

/// Single-axis attitude loop whose disturbance torque depends on the
/// temperatures of four components; a temperature-driven gyro bias adds to
/// the reported pointing error. Linear apart from a small wheel/torquer
/// interaction term.
#[derive(Debug, Clone)]
pub struct SatelliteAttitude {
    /// Rad/s.
    pub natural_freq: f64,
    pub damping: f64,
    /// Degrees of steady-state error per degree of temperature.
    pub sensitivity: [f64; 4],
    pub interaction: f64,
    pub bias_gain: f64,
    pub bias_lag: f64,
}

impl Default for SatelliteAttitude {
    fn default() -> Self {
        SatelliteAttitude {
            natural_freq: 0.5,
            damping: 0.7,
            sensitivity: [0.0128, 0.0043, 0.015, 0.0107],
            interaction: 2e-5,
            bias_gain: 0.0064,
            bias_lag: 5.0,
        }
    }
}

impl OdeSystem for SatelliteAttitude {
    fn state_dim(&self) -> usize {
        3
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn initial_state(&self) -> Vec<f64> {
        vec![0.0; 3]
    }
    fn derivative(&self, _t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) {
        let w = self.natural_freq;
        let s = &self.sensitivity;
        let disturbance =
            s[0] * u[0] + s[1] * u[1] + s[2] * u[2] + s[3] * u[3] + self.interaction * u[2] * u[3];
        dx[0] = x[1];
        dx[1] = w * w * (disturbance - x[0]) - 2.0 * self.damping * w * x[1];
        dx[2] = (self.bias_gain * u[1] - x[2]) / self.bias_lag;
    }
    fn output(&self, _t: f64, x: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0] + x[2];
    }
}

fn satlite(domain: TimeDomain) -> Result<Benchmark> {
    let long = domain.end() > 1000.0;
    let profile = profile(
        domain,
        &[
            ("mag_temp", "pchip(16)", (-20.0, 50.0)),
            ("gyro_temp", "pchip(16)", (-15.0, 50.0)),
            ("wheel_temp", "pchip(16)", (-20.0, 50.0)),
            ("torquer_temp", "pchip(16)", (-20.0, 50.0)),
        ],
    )?;
    let id = if long { "satlite-day" } else { "satlite" };
    let model = OdeModel::new(
        id,
        SatelliteAttitude::default(),
        &ranges(&profile),
        &["error"],
    );
    Ok(Benchmark {
        id,
        model: Arc::new(model),
        profile,
        requirement: if long {
            "G[0,86400] (error < 2)"
        } else {
            "G[0,200] (error < 2)"
        },
        violating: vec![vec![50.0; 16]; 4],
        satisfying: vec![vec![0.0; 16]; 4],
    })
}
