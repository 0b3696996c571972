//! Averaged-periodogram power spectral density estimation.

use crate::error::{Error, Result};
use crate::numerics::{dft, Complex64};

/// PSD over normalized frequency, relative dB scale (0 dB = mean power).
#[derive(Debug, Clone)]
pub struct PsdEstimate {
    /// Bin centers in cycles/sample, ascending from -0.5.
    pub freq_norm: Vec<f64>,
    /// Relative density per bin in dB; floored so values stay finite.
    pub psd_db: Vec<f64>,
}

/// Hann-windowed averaged periodogram over 50%-overlapping segments.
///
/// `segment` must be a power of two and no longer than the input. The
/// output is fftshifted and normalized so the mean linear density sits at
/// 0 dB; empty bins are floored 150 dB below that.
pub fn estimate_psd(samples: &[Complex64], segment: usize) -> Result<PsdEstimate> {
    if segment == 0 || !segment.is_power_of_two() {
        return Err(Error::invalid("segment length must be a power of two"));
    }
    if samples.len() < segment {
        return Err(Error::invalid(format!(
            "need at least {segment} samples, got {}",
            samples.len()
        )));
    }
    let window: Vec<f64> = (0..segment)
        .map(|n| {
            let x = std::f64::consts::TAU * n as f64 / segment as f64;
            0.5 * (1.0 - x.cos())
        })
        .collect();

    let hop = segment / 2;
    let mut acc = vec![0.0f64; segment];
    let mut count = 0usize;
    let mut start = 0usize;
    while start + segment <= samples.len() {
        let mut buf: Vec<Complex64> = samples[start..start + segment]
            .iter()
            .zip(&window)
            .map(|(v, w)| v * *w)
            .collect();
        buf = dft(&buf, false)?;
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
        count += 1;
        start += hop;
    }

    let mean: f64 = acc.iter().sum::<f64>() / (segment * count.max(1)) as f64;
    let floor = mean.max(f64::MIN_POSITIVE) * 1e-15;
    let mut psd_db = Vec::with_capacity(segment);
    let mut freq_norm = Vec::with_capacity(segment);
    for k in 0..segment {
        // fftshift: start at -0.5 cycles/sample.
        let bin = (k + segment / 2) % segment;
        let p = (acc[bin] / count as f64).max(floor);
        psd_db.push(10.0 * (p / mean).log10());
        freq_norm.push((k as f64 - (segment / 2) as f64) / segment as f64);
    }
    Ok(PsdEstimate { freq_norm, psd_db })
}
