//! Harmonic weighting and combined-slice peak tracking.

use crate::error::{Error, Result};
use crate::series::EnfSeries;

use super::spectrogram::PowerSpectrumMatrix;
use super::EstimatorConfig;

/// Per-order weight, in the order of `EstimatorConfig::harmonics`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicWeights {
    pub orders: Vec<u32>,
    pub weights: Vec<f64>,
}

impl HarmonicWeights {
    pub fn weight_of(&self, order: u32) -> Option<f64> {
        self.orders.iter().position(|&o| o == order).map(|i| self.weights[i])
    }
}

/// Bin index range `[lo, hi]` covering `[low_hz, high_hz]`, clipped.
fn bin_range(psm: &PowerSpectrumMatrix, low_hz: f64, high_hz: f64) -> (usize, usize) {
    let df = psm.bin_width_hz();
    let last = psm.freq_bins.len() - 1;
    let lo = (low_hz / df).ceil().max(0.0) as usize;
    let hi = ((high_hz / df).floor().max(0.0) as usize).min(last);
    (lo, hi)
}

pub(crate) fn check_band(psm: &PowerSpectrumMatrix, cfg: &EstimatorConfig, order: u32) -> Result<()> {
    let centre = order as f64 * cfg.nominal_hz;
    let hw = cfg.halfwidth_for(order);
    let (low, high) = (centre - hw, centre + hw);
    if low <= 0.0 || high >= psm.nyquist_hz() {
        return Err(Error::BandOutsideSpectrum {
            order,
            low_hz: low,
            high_hz: high,
            nyquist_hz: psm.nyquist_hz(),
        });
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Time-averaged in-band SNR of one harmonic: the in-band peak power over the
/// median power of the two flanking bands (each as wide as the band itself
/// on either side), averaged over time bins.
pub fn band_snr(psm: &PowerSpectrumMatrix, cfg: &EstimatorConfig, order: u32) -> Result<f64> {
    check_band(psm, cfg, order)?;
    let centre = order as f64 * cfg.nominal_hz;
    let hw = cfg.halfwidth_for(order);
    let (blo, bhi) = bin_range(psm, centre - hw, centre + hw);
    let (llo, _) = bin_range(psm, centre - 3.0 * hw, centre - hw);
    let (_, rhi) = bin_range(psm, centre + hw, centre + 3.0 * hw);
    let mut total = 0.0;
    for row in &psm.power {
        let peak = row[blo..=bhi].iter().cloned().fold(0.0, f64::max);
        let flanks: Vec<f64> = row[llo..blo].iter().chain(&row[bhi + 1..=rhi]).copied().collect();
        let floor = median(flanks);
        total += if floor > 0.0 { peak / floor } else { 0.0 };
    }
    Ok(total / psm.power.len() as f64)
}

/// Weights proportional to each harmonic's SNR excess over the noise floor,
/// `max(snr − 1, 0)`, normalized to sum to one. When no harmonic stands
/// above the floor the weights are uniform.
pub fn harmonic_weights(psm: &PowerSpectrumMatrix, cfg: &EstimatorConfig) -> Result<HarmonicWeights> {
    cfg.validate()?;
    let raw: Vec<f64> = cfg
        .harmonics
        .iter()
        .map(|&k| band_snr(psm, cfg, k).map(|snr| (snr - 1.0).max(0.0)))
        .collect::<Result<_>>()?;
    let sum: f64 = raw.iter().sum();
    let n = raw.len() as f64;
    let weights = if sum > 0.0 && sum.is_finite() {
        raw.iter().map(|w| w / sum).collect()
    } else {
        vec![1.0 / n; raw.len()]
    };
    Ok(HarmonicWeights {
        orders: cfg.harmonics.clone(),
        weights,
    })
}

/// Folds every harmonic band down to base band and tracks the peak.
///
/// The base-band grid is the spectrogram's own bin grid, so harmonic `k`'s
/// slice is read at bins `k·j` with no interpolation. Each slice is scaled to
/// unit peak per time bin before the weighted sum. The argmax of the combined
/// slice is refined by a parabola through the log-power of it and its two
/// neighbours.
pub fn combine_and_track(
    psm: &PowerSpectrumMatrix,
    weights: &HarmonicWeights,
    cfg: &EstimatorConfig,
) -> Result<EnfSeries> {
    if weights.orders.len() != weights.weights.len() || weights.orders.is_empty() {
        return Err(Error::invalid("harmonic weights are empty or inconsistent"));
    }
    for &k in &weights.orders {
        check_band(psm, cfg, k)?;
    }
    let df = psm.bin_width_hz();
    let hw = cfg.band_halfwidth_hz;
    let (jlo, jhi) = bin_range(psm, cfg.nominal_hz - hw, cfg.nominal_hz + hw);
    if jhi < jlo + 2 {
        return Err(Error::invalid(format!(
            "base band of ±{hw} Hz spans fewer than three {df:.4} Hz bins"
        )));
    }
    let width = jhi - jlo + 1;
    let mut combined = vec![0.0; width];
    let mut values = Vec::with_capacity(psm.power.len());
    for row in &psm.power {
        combined.fill(0.0);
        for (&k, &w) in weights.orders.iter().zip(&weights.weights) {
            if w <= 0.0 {
                continue;
            }
            let k = k as usize;
            let peak = (jlo..=jhi).map(|j| row[k * j]).fold(0.0, f64::max);
            if peak <= 0.0 {
                continue;
            }
            for (c, j) in combined.iter_mut().zip(jlo..=jhi) {
                *c += w * row[k * j] / peak;
            }
        }
        let (imax, _) = combined
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        let offset = if imax > 0 && imax + 1 < width {
            parabolic_offset(combined[imax - 1], combined[imax], combined[imax + 1])
        } else {
            0.0
        };
        values.push((jlo as f64 + imax as f64 + offset) * df);
    }
    let start = psm.time_bins.first().copied().unwrap_or(0.0);
    EnfSeries::new(start, psm.hop_s, values)
}

/// Vertex of the parabola through three equally spaced points, as an offset
/// in (-0.5, 0.5) from the middle one. Uses log values when all are positive.
pub(crate) fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let (a, b, c) = if a > 0.0 && b > 0.0 && c > 0.0 {
        (a.ln(), b.ln(), c.ln())
    } else {
        (a, b, c)
    };
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 || !denom.is_finite() {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_vertex_is_exact_for_quadratics() {
        // y = -(x - 0.3)^2 + 5 sampled at -1, 0, 1 (linear scale, one negative)
        let f = |x: f64| -(x - 0.3f64).powi(2) - 0.5;
        assert!((parabolic_offset(f(-1.0), f(0.0), f(1.0)) - 0.3).abs() < 1e-12);
        // Gaussian is a parabola in log space
        let g = |x: f64| (-(x + 0.2f64).powi(2)).exp();
        assert!((parabolic_offset(g(-1.0), g(0.0), g(1.0)) + 0.2).abs() < 1e-12);
        assert_eq!(parabolic_offset(1.0, 1.0, 1.0), 0.0);
    }
}
