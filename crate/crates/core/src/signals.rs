//! Sampled signals over a fixed-rate time domain, input profiles, and the
//! control-point encoding used to describe candidate test inputs.
//!
//! A test input is never stored as raw samples by the search. Each input
//! channel is described by a handful of control points which an
//! [`InterpolationKind`] turns into a [`SampledSignal`] on the grid
//! `0, δ, 2δ, …, b`.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Rng;

const ALIGN_TOL: f64 = 1e-9;

/// The time domain `[0, b]` sampled every `δ` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TimeDomainRepr", into = "TimeDomainRepr")]
pub struct TimeDomain {
    end: f64,
    step: f64,
    intervals: usize,
}

#[derive(Serialize, Deserialize)]
struct TimeDomainRepr {
    end: f64,
    step: f64,
}

impl TryFrom<TimeDomainRepr> for TimeDomain {
    type Error = Error;
    fn try_from(r: TimeDomainRepr) -> Result<Self> {
        TimeDomain::new(r.end, r.step)
    }
}

impl From<TimeDomain> for TimeDomainRepr {
    fn from(d: TimeDomain) -> Self {
        TimeDomainRepr {
            end: d.end,
            step: d.step,
        }
    }
}

impl TimeDomain {
    pub fn new(end: f64, step: f64) -> Result<Self> {
        if !(end.is_finite() && end > 0.0) {
            return Err(Error::structural(format!(
                "time domain end must be > 0, got {end}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::structural(format!(
                "time step must be > 0, got {step}"
            )));
        }
        let ratio = end / step;
        let intervals = ratio.round();
        if (ratio - intervals).abs() > ALIGN_TOL * ratio.max(1.0) {
            return Err(Error::structural(format!(
                "end {end} is not an integer multiple of step {step} (ratio {ratio})"
            )));
        }
        if intervals < 2.0 {
            return Err(Error::structural(format!(
                "time domain needs at least 2 intervals, got {intervals}"
            )));
        }
        Ok(TimeDomain {
            end,
            step,
            intervals: intervals as usize,
        })
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of intervals `l` with `b = l·δ`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of samples, `l + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of sample `k`. The last sample is exactly `b`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.intervals {
            self.end
        } else {
            k as f64 * self.step
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Sample index of `t` if `t` lies on the grid (within tolerance).
    pub fn grid_index(&self, t: f64) -> Option<usize> {
        let r = t / self.step;
        let k = r.round();
        if k < 0.0 || k > self.intervals as f64 {
            return None;
        }
        ((r - k).abs() <= ALIGN_TOL * r.abs().max(1.0)).then_some(k as usize)
    }

    pub(crate) fn same_as(&self, other: &TimeDomain) -> bool {
        self.intervals == other.intervals
            && (self.end - other.end).abs() <= ALIGN_TOL * self.end
            && (self.step - other.step).abs() <= ALIGN_TOL * self.step
    }
}

/// One named channel sampled on a [`TimeDomain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    name: String,
    domain: TimeDomain,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(name: impl Into<String>, domain: TimeDomain, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.len() != domain.len() {
            return Err(Error::structural(format!(
                "signal `{name}` has {} values, domain has {} samples",
                values.len(),
                domain.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::structural(format!(
                "signal `{name}` has a non-finite value at sample {k}"
            )));
        }
        Ok(SampledSignal {
            name,
            domain,
            values,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        domain: TimeDomain,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = domain.times().map(f).collect();
        Self::new(name, domain, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at an arbitrary time, linearly interpolated between samples.
    pub fn value_at(&self, t: f64) -> f64 {
        let d = self.domain;
        if t <= 0.0 {
            return self.values[0];
        }
        if t >= d.end {
            return self.values[d.intervals];
        }
        let r = t / d.step;
        let k = (r.floor() as usize).min(d.intervals - 1);
        let frac = r - k as f64;
        if frac == 0.0 {
            return self.values[k];
        }
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }
}

/// Ordered channels sharing one time domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSet {
    domain: TimeDomain,
    signals: Vec<SampledSignal>,
}

impl SignalSet {
    pub fn new(domain: TimeDomain, signals: Vec<SampledSignal>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &signals {
            if !s.domain.same_as(&domain) {
                return Err(Error::structural(format!(
                    "signal `{}` does not share the set's time domain",
                    s.name
                )));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::structural(format!("duplicate channel `{}`", s.name)));
            }
        }
        Ok(SignalSet { domain, signals })
    }

    /// Builds a set from `(name, values)` columns.
    pub fn from_columns<S: Into<String>>(
        domain: TimeDomain,
        columns: Vec<(S, Vec<f64>)>,
    ) -> Result<Self> {
        let signals = columns
            .into_iter()
            .map(|(n, v)| SampledSignal::new(n, domain, v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, signals)
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn signals(&self) -> &[SampledSignal] {
        &self.signals
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.signals.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&SampledSignal> {
        self.signals.iter().find(|s| s.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s.name == name)
    }

    /// Checks that `names` are exactly this set's channels, in order.
    pub fn expect_channels<S: AsRef<str>>(&self, names: &[S]) -> Result<()> {
        let ok = self.signals.len() == names.len()
            && self
                .signals
                .iter()
                .zip(names)
                .all(|(s, n)| s.name == n.as_ref());
        if ok {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "channel mismatch: have {:?}, expected {:?}",
                self.names(),
                names.iter().map(|n| n.as_ref()).collect::<Vec<_>>()
            )))
        }
    }

    /// Values of channel `c` at sample `k`.
    pub fn sample(&self, c: usize, k: usize) -> f64 {
        self.signals[c].values[k]
    }

    /// Writes `time,<channel>...` rows, one per sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        header.extend(self.signals.iter().map(|s| s.name.clone()));
        w.write_record(&header)?;
        let mut row = Vec::with_capacity(header.len());
        for k in 0..self.domain.len() {
            row.clear();
            row.push(self.domain.time(k).to_string());
            row.extend(self.signals.iter().map(|s| s.values[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`SignalSet::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("time") || header.len() < 2 {
            return Err(Error::structural(
                "signal CSV must start with a `time` column",
            ));
        }
        let mut times = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::structural(format!("bad number `{s}`: {e}")))
            };
            times.push(parse(&rec[0])?);
            for (c, col) in cols.iter_mut().enumerate() {
                col.push(parse(&rec[c + 1])?);
            }
        }
        if times.len() < 3 {
            return Err(Error::structural("signal CSV needs at least 3 rows"));
        }
        let domain = TimeDomain::new(times[times.len() - 1], times[1] - times[0])?;
        if domain.len() != times.len() {
            return Err(Error::structural("signal CSV rows are not evenly spaced"));
        }
        let columns = header
            .iter()
            .skip(1)
            .map(str::to_string)
            .zip(cols)
            .collect();
        Self::from_columns(domain, columns)
    }
}

/// How control points are connected into a signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterpolationKind {
    Constant,
    PiecewiseConstant,
    Linear,
    Pchip,
    /// Each control value is held for `duty · period` seconds from its
    /// segment start, then drops to the channel's lower bound until the next
    /// period begins. `period = None` means one period per segment.
    Pulse {
        #[serde(default)]
        period: Option<f64>,
        #[serde(default = "default_duty")]
        duty: f64,
    },
}

fn default_duty() -> f64 {
    1.0
}

impl InterpolationKind {
    pub fn pulse() -> Self {
        InterpolationKind::Pulse {
            period: None,
            duty: 1.0,
        }
    }

    fn check_count(&self, n: usize) -> Result<()> {
        match self {
            InterpolationKind::Constant if n != 1 => Err(Error::structural(format!(
                "constant interpolation takes exactly 1 control point, got {n}"
            ))),
            InterpolationKind::Constant => Ok(()),
            _ if n < 2 => Err(Error::structural(format!(
                "{self} needs at least 2 control points, got {n}"
            ))),
            _ => Ok(()),
        }
    }

    fn check_params(&self) -> Result<()> {
        if let InterpolationKind::Pulse { period, duty } = *self {
            if !(duty > 0.0 && duty <= 1.0) {
                return Err(Error::structural(format!(
                    "pulse duty must be in (0,1], got {duty}"
                )));
            }
            if let Some(p) = period {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::structural(format!(
                        "pulse period must be > 0, got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for InterpolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InterpolationKind::Constant => "const",
            InterpolationKind::PiecewiseConstant => "pconst",
            InterpolationKind::Linear => "linear",
            InterpolationKind::Pchip => "pchip",
            InterpolationKind::Pulse { .. } => "pulse",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlTimes {
    #[default]
    EquallySpaced,
    Random,
}

/// The triple (interpolation, range, control-point count) for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputChannelSpec {
    pub name: String,
    pub interpolation: InterpolationKind,
    pub range: (f64, f64),
    pub points: usize,
    #[serde(default)]
    pub times: ControlTimes,
}

impl InputChannelSpec {
    pub fn new(
        name: impl Into<String>,
        interpolation: InterpolationKind,
        range: (f64, f64),
        points: usize,
    ) -> Result<Self> {
        let spec = InputChannelSpec {
            name: name.into(),
            interpolation,
            range,
            points,
            times: ControlTimes::EquallySpaced,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the compact `kind(n)` notation, e.g. `pchip(4)` or `const(1)`.
    pub fn from_notation(
        name: impl Into<String>,
        notation: &str,
        range: (f64, f64),
    ) -> Result<Self> {
        let bad = || Error::structural(format!("bad profile notation `{notation}`"));
        let s = notation.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let n: usize = s[open + 1..s.len() - 1].trim().parse().map_err(|_| bad())?;
        let kind = match s[..open].trim() {
            "const" => InterpolationKind::Constant,
            "pconst" => InterpolationKind::PiecewiseConstant,
            "linear" => InterpolationKind::Linear,
            "pchip" => InterpolationKind::Pchip,
            "pulse" => InterpolationKind::pulse(),
            _ => return Err(bad()),
        };
        Self::new(name, kind, range, n)
    }

    pub fn with_times(mut self, times: ControlTimes) -> Self {
        self.times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::structural(format!(
                "channel `{}` has invalid range [{lo}, {hi}]",
                self.name
            )));
        }
        if self.points == 0 {
            return Err(Error::structural(format!(
                "channel `{}` has no control points",
                self.name
            )));
        }
        self.interpolation.check_count(self.points)?;
        self.interpolation.check_params()
    }

    pub fn width(&self) -> f64 {
        self.range.1 - self.range.0
    }

    pub fn clip(&self, v: f64) -> f64 {
        v.clamp(self.range.0, self.range.1)
    }
}

/// One [`InputChannelSpec`] per model input over a shared domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProfile {
    pub domain: TimeDomain,
    pub channels: Vec<InputChannelSpec>,
}

impl InputProfile {
    pub fn new(domain: TimeDomain, channels: Vec<InputChannelSpec>) -> Result<Self> {
        let p = InputProfile { domain, channels };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for c in &self.channels {
            c.validate()?;
            if !seen.insert(c.name.as_str()) {
                return Err(Error::structural(format!(
                    "duplicate input channel `{}`",
                    c.name
                )));
            }
        }
        if self.channels.is_empty() {
            return Err(Error::structural("input profile has no channels"));
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.channels.iter().map(|c| c.name.as_str()).collect()
    }

    /// Total number of control-point values across channels.
    pub fn dimension(&self) -> usize {
        self.channels.iter().map(|c| c.points).sum()
    }
}

/// Control points `(t_i, v_i)` for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPoints {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ControlPoints {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::structural(
                "control points need matching, non-empty times and values",
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::structural("first control point must be at t = 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::structural(
                "control point times must be strictly increasing",
            ));
        }
        Ok(ControlPoints { times, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Equally spaced control times over `[0, b]`.
pub fn equal_times(n: usize, domain: &TimeDomain) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let b = domain.end();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                i as f64 * b / (n - 1) as f64
            }
        })
        .collect()
}

/// Draws control points for one channel: values uniform over the range,
/// times per the channel's time policy.
pub fn generate_control_points(
    spec: &InputChannelSpec,
    domain: &TimeDomain,
    rng: &mut Rng,
) -> ControlPoints {
    let (lo, hi) = spec.range;
    let values: Vec<f64> = (0..spec.points)
        .map(|_| {
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        })
        .collect();
    let times = match spec.times {
        _ if spec.points == 1 => vec![0.0],
        ControlTimes::EquallySpaced => equal_times(spec.points, domain),
        ControlTimes::Random => random_times(spec.points, domain.end(), rng),
    };
    ControlPoints { times, values }
}

fn random_times(n: usize, end: f64, rng: &mut Rng) -> Vec<f64> {
    let mut interior: Vec<f64> = Vec::with_capacity(n - 2);
    while interior.len() < n - 2 {
        let t = rng.random_range(0.0..end);
        if t > 0.0 && !interior.contains(&t) {
            interior.push(t);
        }
    }
    interior.sort_by(f64::total_cmp);
    let mut times = Vec::with_capacity(n);
    times.push(0.0);
    times.extend(interior);
    times.push(end);
    times
}

/// Turns control points into a sampled signal clipped to `range`.
pub fn interpolate(
    name: &str,
    points: &ControlPoints,
    kind: InterpolationKind,
    domain: &TimeDomain,
    range: (f64, f64),
) -> Result<SampledSignal> {
    kind.check_count(points.len())?;
    kind.check_params()?;
    let (lo, hi) = range;
    let ts = &points.times;
    let vs = &points.values;
    let values: Vec<f64> = match kind {
        InterpolationKind::Constant => vec![vs[0]; domain.len()],
        InterpolationKind::PiecewiseConstant => {
            domain.times().map(|t| vs[segment(ts, t)]).collect()
        }
        InterpolationKind::Linear => domain
            .times()
            .map(|t| {
                let i = segment(ts, t);
                if i + 1 == ts.len() {
                    return vs[i];
                }
                let f = (t - ts[i]) / (ts[i + 1] - ts[i]);
                vs[i] + f * (vs[i + 1] - vs[i])
            })
            .collect(),
        InterpolationKind::Pchip => {
            let d = pchip_slopes(ts, vs);
            domain.times().map(|t| hermite(ts, vs, &d, t)).collect()
        }
        InterpolationKind::Pulse { period, duty } => domain
            .times()
            .map(|t| {
                let i = segment(ts, t);
                let seg = ts.get(i + 1).map_or(f64::INFINITY, |next| next - ts[i]);
                let p = period.unwrap_or(seg);
                let phase = (t - ts[i]) % p;
                if phase < duty * p || i + 1 == ts.len() {
                    vs[i]
                } else {
                    lo
                }
            })
            .collect(),
    };
    let values = values.into_iter().map(|v| v.clamp(lo, hi)).collect();
    SampledSignal::new(name, *domain, values)
}

/// Index of the last control time `<= t`.
fn segment(ts: &[f64], t: f64) -> usize {
    ts.partition_point(|&ti| ti <= t).saturating_sub(1)
}

/// Monotone cubic Hermite slopes (Fritsch–Carlson interior rule with the
/// shape-preserving three-point end conditions).
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![del[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (del[i - 1], del[i]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            continue;
        }
        let w1 = 2.0 * h[i] + h[i - 1];
        let w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / a + w2 / b);
    }
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() || del0 == 0.0 {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

fn hermite(x: &[f64], y: &[f64], d: &[f64], t: f64) -> f64 {
    let i = segment(x, t).min(x.len() - 2);
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    if s == 0.0 {
        return y[i];
    }
    if s == 1.0 {
        return y[i + 1];
    }
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1]
}

/// Resamples onto a grid with step `new_step` by linear interpolation.
pub fn resample(signal: &SampledSignal, new_step: f64) -> Result<SampledSignal> {
    let old = signal.domain();
    let domain = TimeDomain::new(old.end(), new_step)?;
    let values = domain.times().map(|t| signal.value_at(t)).collect();
    SampledSignal::new(signal.name(), domain, values)
}

impl FromStr for ControlTimes {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" | "equally_spaced" => Ok(ControlTimes::EquallySpaced),
            "random" => Ok(ControlTimes::Random),
            _ => Err(Error::structural(format!(
                "unknown control time policy `{s}`"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded;

    fn dom(b: f64, d: f64) -> TimeDomain {
        TimeDomain::new(b, d).unwrap()
    }

    #[test]
    fn domain_rejects_bad_values() {
        assert!(TimeDomain::new(0.0, 1.0).is_err());
        assert!(TimeDomain::new(10.0, 0.0).is_err());
        assert!(TimeDomain::new(10.0, 3.0).is_err());
        assert!(TimeDomain::new(1.0, 1.0).is_err());
        assert_eq!(dom(24.0, 0.1).len(), 241);
    }

    #[test]
    fn constant_degenerate_range() {
        let spec = InputChannelSpec::new("u", InterpolationKind::Constant, (5.0, 5.0), 1).unwrap();
        let cp = generate_control_points(&spec, &dom(10.0, 1.0), &mut seeded(1));
        assert_eq!(cp.times, vec![0.0]);
        assert_eq!(cp.values, vec![5.0]);
    }

    #[test]
    fn pchip4_equal_times_over_24() {
        let spec = InputChannelSpec::from_notation("u", "pchip(4)", (-2.0, 5.0)).unwrap();
        let cp = generate_control_points(&spec, &dom(24.0, 0.1), &mut seeded(3));
        assert_eq!(cp.times, vec![0.0, 8.0, 16.0, 24.0]);
        assert!(cp.values.iter().all(|v| (-2.0..=5.0).contains(v)));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = InputChannelSpec::from_notation("u", "pchip(16)", (-20.0, 50.0))
            .unwrap()
            .with_times(ControlTimes::Random);
        let d = dom(100.0, 0.5);
        let a = generate_control_points(&spec, &d, &mut seeded(42));
        let b = generate_control_points(&spec, &d, &mut seeded(42));
        assert_eq!(a, b);
        assert_eq!(a.times[0], 0.0);
        assert_eq!(*a.times.last().unwrap(), 100.0);
        assert!(a.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_interpolation() {
        let cp = ControlPoints::new(vec![0.0], vec![5.0]).unwrap();
        let s = interpolate(
            "u",
            &cp,
            InterpolationKind::Constant,
            &dom(10.0, 1.0),
            (0.0, 10.0),
        )
        .unwrap();
        assert_eq!(s.values(), &[5.0; 11]);
    }

    #[test]
    fn linear_interpolation_is_affine() {
        let cp = ControlPoints::new(vec![0.0, 10.0], vec![0.0, 10.0]).unwrap();
        let s = interpolate(
            "u",
            &cp,
            InterpolationKind::Linear,
            &dom(10.0, 1.0),
            (0.0, 10.0),
        )
        .unwrap();
        for (k, v) in s.values().iter().enumerate() {
            assert_eq!(*v, k as f64);
        }
    }

    #[test]
    fn pchip_plateau_is_flat() {
        let cp = ControlPoints::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let d = dom(3.0, 0.01);
        let s = interpolate("u", &cp, InterpolationKind::Pchip, &d, (-1.0, 2.0)).unwrap();
        for k in 100..=200 {
            assert!(
                (s.values()[k] - 1.0).abs() < 1e-14,
                "k={k} v={}",
                s.values()[k]
            );
        }
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let cp = ControlPoints::new(vec![0.0, 5.0], vec![1.0, 2.0]).unwrap();
        let d = dom(5.0, 1.0);
        assert!(interpolate("u", &cp, InterpolationKind::Constant, &d, (0.0, 3.0)).is_err());
        let one = ControlPoints::new(vec![0.0], vec![1.0]).unwrap();
        assert!(interpolate("u", &one, InterpolationKind::Pchip, &d, (0.0, 3.0)).is_err());
        assert!(InputChannelSpec::new("u", InterpolationKind::Linear, (0.0, 1.0), 1).is_err());
    }

    #[test]
    fn pulse_holds_levels_and_duty() {
        let cp = ControlPoints::new(vec![0.0, 5.0, 10.0], vec![3.0, 6.0, 9.0]).unwrap();
        let d = dom(10.0, 1.0);
        let full = interpolate("u", &cp, InterpolationKind::pulse(), &d, (0.0, 10.0)).unwrap();
        assert_eq!(full.values(), &[3., 3., 3., 3., 3., 6., 6., 6., 6., 6., 9.]);
        let half = InterpolationKind::Pulse {
            period: Some(2.0),
            duty: 0.5,
        };
        let s = interpolate("u", &cp, half, &d, (0.0, 10.0)).unwrap();
        assert_eq!(s.values(), &[3., 0., 3., 0., 3., 6., 0., 6., 0., 6., 9.]);
    }

    #[test]
    fn resample_identity_and_ramp() {
        let d = dom(10.0, 0.5);
        let ramp = SampledSignal::from_fn("r", d, |t| 2.0 * t - 1.0).unwrap();
        assert_eq!(resample(&ramp, 0.5).unwrap(), ramp);
        let fine = resample(&ramp, 0.25).unwrap();
        for (k, v) in fine.values().iter().enumerate() {
            assert!((v - (2.0 * 0.25 * k as f64 - 1.0)).abs() < 1e-12);
        }
        assert!(resample(&ramp, 3.0).is_err());
    }

    #[test]
    fn resample_sine_error_is_second_order() {
        let coarse = SampledSignal::from_fn("s", dom(10.0, 0.1), f64::sin).unwrap();
        let fine = resample(&coarse, 0.05).unwrap();
        // linear interpolation error bound h^2/8 * max|f''| with h = 0.1
        let bound = 0.1 * 0.1 / 8.0;
        let worst = fine
            .domain()
            .times()
            .zip(fine.values())
            .map(|(t, v)| (t.sin() - v).abs())
            .fold(0.0, f64::max);
        assert!(worst <= bound + 1e-12, "worst {worst}");
        assert!(worst > bound / 4.0);
        assert_eq!(fine.values()[0], coarse.values()[0]);
        assert_eq!(fine.values().last(), coarse.values().last());
    }

    #[test]
    fn csv_round_trip() {
        let d = dom(1.0, 0.25);
        let set = SignalSet::from_columns(
            d,
            vec![
                ("a", vec![0.1, 0.2, 0.3, 0.4, 1.0 / 3.0]),
                ("b", vec![1.0; 5]),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time,a,b\n"));
        assert_eq!(SignalSet::read_csv(&buf[..]).unwrap(), set);
    }

    #[test]
    fn signal_set_rejects_duplicates_and_mismatched_domains() {
        let a = SampledSignal::new("x", dom(2.0, 1.0), vec![0.0; 3]).unwrap();
        let b = SampledSignal::new("x", dom(2.0, 1.0), vec![1.0; 3]).unwrap();
        assert!(SignalSet::new(dom(2.0, 1.0), vec![a.clone(), b]).is_err());
        let c = SampledSignal::new("y", dom(4.0, 1.0), vec![1.0; 5]).unwrap();
        assert!(SignalSet::new(dom(2.0, 1.0), vec![a, c]).is_err());
        assert!(SampledSignal::new("z", dom(2.0, 1.0), vec![0.0, f64::NAN, 1.0]).is_err());
    }
}
