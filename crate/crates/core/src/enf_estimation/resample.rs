use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::SampleSeries;

/// Passband edge as a fraction of the output rate.
const CUTOFF_FRAC: f64 = 0.4;
/// Transition width as a fraction of the output rate.
const TRANSITION_FRAC: f64 = 0.2;

/// Blackman-windowed sinc low-pass, unity DC gain.
fn lowpass_taps(cutoff_hz: f64, transition_hz: f64, rate_hz: f64) -> Vec<f64> {
    let mut n = (5.5 * rate_hz / transition_hz).ceil() as usize;
    if n % 2 == 0 {
        n += 1;
    }
    let mid = (n / 2) as f64;
    let fc = cutoff_hz / rate_hz;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            let w = 0.42 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()
                + 0.08 * (4.0 * PI * i as f64 / (n - 1) as f64).cos();
            sinc * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Filtered value at input index `i` (zero-extended at the edges).
fn filtered_at(x: &[f64], taps: &[f64], i: usize) -> f64 {
    let half = taps.len() / 2;
    let lo = i.saturating_sub(half);
    let hi = (i + half).min(x.len() - 1);
    (lo..=hi).map(|j| x[j] * taps[j + half - i]).sum()
}

/// Low-pass then resample to `target_hz`. The ratio need not be an integer:
/// output instants are interpolated linearly between filtered input samples.
pub fn resample_to(series: &SampleSeries, target_hz: f64) -> Result<SampleSeries> {
    if !(target_hz > 0.0 && target_hz.is_finite()) {
        return Err(Error::invalid(format!("target rate must be positive, got {target_hz}")));
    }
    let rate = series.rate_hz;
    if (rate - target_hz).abs() <= 1e-9 * target_hz {
        return Ok(series.clone());
    }
    if rate < target_hz {
        return Err(Error::invalid(format!(
            "cannot upsample from {rate} Hz to {target_hz} Hz"
        )));
    }
    if series.samples.is_empty() {
        return Err(Error::invalid("cannot resample an empty series"));
    }
    let taps = lowpass_taps(CUTOFF_FRAC * target_hz, TRANSITION_FRAC * target_hz, rate);
    let x = &series.samples;
    let span_s = (x.len() - 1) as f64 / rate;
    let n_out = (span_s * target_hz + 1e-9).floor() as usize + 1;
    let ratio = rate / target_hz;
    let samples = (0..n_out)
        .map(|m| {
            let pos = m as f64 * ratio;
            let i0 = pos.floor() as usize;
            let frac = pos - i0 as f64;
            let a = filtered_at(x, &taps, i0);
            if frac == 0.0 || i0 + 1 >= x.len() {
                a
            } else {
                a + frac * (filtered_at(x, &taps, i0 + 1) - a)
            }
        })
        .collect();
    Ok(SampleSeries {
        rate_hz: target_hz,
        start_time_s: series.start_time_s,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: f64, secs: f64) -> SampleSeries {
        let n = (rate * secs) as usize;
        SampleSeries {
            rate_hz: rate,
            start_time_s: 0.0,
            samples: (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect(),
        }
    }

    #[test]
    fn output_length_follows_rate_arithmetic() {
        let out = resample_to(&tone(60.0, 44_100.0, 10.0), 1000.0).unwrap();
        assert!((out.samples.len() as i64 - 10_000).abs() <= 1, "{}", out.samples.len());
    }

    #[test]
    fn same_rate_is_bypassed() {
        let s = tone(60.0, 1000.0, 2.0);
        assert_eq!(resample_to(&s, 1000.0).unwrap(), s);
    }

    #[test]
    fn upsampling_rejected() {
        assert!(resample_to(&tone(60.0, 500.0, 1.0), 1000.0).is_err());
    }

    #[test]
    fn tone_survives_with_small_loss_and_alias_is_suppressed() {
        let out = resample_to(&tone(60.0, 44_100.0, 4.0), 1000.0).unwrap();
        // amplitude from the interior RMS (edges carry the filter transient)
        let mid = &out.samples[500..3500];
        let rms = (mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
        let amp = rms * 2f64.sqrt();
        assert!((1.0 - amp).abs() < 0.01, "amplitude {amp}");
        // 1200 Hz would alias to 200 Hz without the low-pass
        let alias = resample_to(&tone(1200.0, 44_100.0, 4.0), 1000.0).unwrap();
        let mid = &alias.samples[500..3500];
        let rms = (mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt();
        assert!(rms < 1e-3, "alias rms {rms}");
    }
}
