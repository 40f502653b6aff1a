use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled sequence of instantaneous grid-frequency estimates.
///
/// Value `i` belongs to time `start_time_s + i * step_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnfSeries {
    pub start_time_s: f64,
    pub step_s: f64,
    pub values_hz: Vec<f64>,
}

impl EnfSeries {
    pub fn new(start_time_s: f64, step_s: f64, values_hz: Vec<f64>) -> Result<Self> {
        if !(step_s > 0.0 && step_s.is_finite()) {
            return Err(Error::invalid(format!("ENF step must be positive, got {step_s}")));
        }
        if !start_time_s.is_finite() {
            return Err(Error::invalid("ENF start time must be finite"));
        }
        if values_hz.is_empty() {
            return Err(Error::invalid("ENF series must hold at least one value"));
        }
        if let Some(i) = values_hz.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("ENF value {i} is not finite")));
        }
        Ok(Self {
            start_time_s,
            step_s,
            values_hz,
        })
    }

    pub fn len(&self) -> usize {
        self.values_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_hz.is_empty()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time_s + i as f64 * self.step_s
    }

    pub fn end_time_s(&self) -> f64 {
        self.time_at(self.len().saturating_sub(1))
    }

    /// Piecewise-linear interpolation, held constant outside the sampled span.
    pub fn value_at(&self, t: f64) -> f64 {
        let pos = (t - self.start_time_s) / self.step_s;
        let last = self.len() - 1;
        if pos <= 0.0 {
            return self.values_hz[0];
        }
        if pos >= last as f64 {
            return self.values_hz[last];
        }
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        self.values_hz[i] + frac * (self.values_hz[i + 1] - self.values_hz[i])
    }

    /// Sub-series of `len` values starting at index `from`.
    pub fn slice(&self, from: usize, len: usize) -> Result<Self> {
        if len == 0 || from + len > self.len() {
            return Err(Error::invalid(format!(
                "slice [{from}, {}) out of range for series of length {}",
                from + len,
                self.len()
            )));
        }
        Ok(Self {
            start_time_s: self.time_at(from),
            step_s: self.step_s,
            values_hz: self.values_hz[from..from + len].to_vec(),
        })
    }

    /// `time_s,freq_hz` CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,freq_hz\n");
        for (i, v) in self.values_hz.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.time_at(i), v));
        }
        out
    }

    /// Parses the format written by [`EnfSeries::to_csv`]. The step is taken
    /// from the first two timestamps and every other timestamp must agree.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("time")) {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |c: Option<&str>| -> Result<f64> {
                c.and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(|| {
                    Error::invalid(format!("ENF csv line {}: expected `time_s,freq_hz`", lineno + 1))
                })
            };
            times.push(parse(cols.next())?);
            values.push(parse(cols.next())?);
        }
        if times.is_empty() {
            return Err(Error::invalid("ENF csv holds no rows"));
        }
        let step = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
        for (i, t) in times.iter().enumerate() {
            let expected = times[0] + i as f64 * step;
            if (t - expected).abs() > 1e-6 * step.abs().max(1.0) {
                return Err(Error::invalid(format!(
                    "ENF csv row {i} at t={t} breaks uniform spacing"
                )));
            }
        }
        Self::new(times[0], step, values)
    }

    /// Cumulative integral of the interpolated frequency, in cycles.
    pub fn phase_integrator(&self) -> PhaseIntegrator<'_> {
        PhaseIntegrator::new(self)
    }
}

/// Evaluates `∫ f(t) dt` from the series start for the piecewise-linear
/// frequency curve, exactly. Before the first knot and after the last one the
/// frequency is held constant.
pub struct PhaseIntegrator<'a> {
    series: &'a EnfSeries,
    knot_cycles: Vec<f64>,
}

impl<'a> PhaseIntegrator<'a> {
    fn new(series: &'a EnfSeries) -> Self {
        let v = &series.values_hz;
        let mut knot_cycles = Vec::with_capacity(v.len());
        let mut acc = 0.0;
        knot_cycles.push(acc);
        for w in v.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * series.step_s;
            knot_cycles.push(acc);
        }
        Self {
            series,
            knot_cycles,
        }
    }

    /// Cycles accumulated between the series start and `t`.
    pub fn cycles_at(&self, t: f64) -> f64 {
        let s = self.series;
        let dt = t - s.start_time_s;
        if dt <= 0.0 {
            return dt * s.values_hz[0];
        }
        let last = s.len() - 1;
        let pos = dt / s.step_s;
        if pos >= last as f64 {
            let tail = dt - last as f64 * s.step_s;
            return self.knot_cycles[last] + tail * s.values_hz[last];
        }
        let i = pos.floor() as usize;
        let tau = dt - i as f64 * s.step_s;
        let f_t = s.value_at(t);
        self.knot_cycles[i] + 0.5 * (s.values_hz[i] + f_t) * tau
    }
}
