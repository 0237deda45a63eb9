//! Periodograms, log-binned spectra and power-law slope fits `S(ν) ~ 1/ν^φ`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Shortest series accepted by [`power_spectrum`].
pub const MIN_SERIES_LEN: usize = 64;
pub const DEFAULT_LOG_BIN_FACTOR: f64 = 1.3;

/// One log-bin of the periodogram: geometric-mean frequency, log-averaged
/// power and the number of raw frequencies it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumBin {
    pub freq: f64,
    pub power: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Length of the transformed segments.
    pub segment_len: usize,
    pub segments: usize,
    /// Positive frequencies `k / segment_len`, `k = 1..=segment_len/2`, in
    /// cycles per bin.
    pub freqs: Vec<f64>,
    /// Periodogram `|X_k|^2 / N` at `freqs`, averaged over segments.
    pub power: Vec<f64>,
    pub binned: Vec<SpectrumBin>,
    /// True when the series had no variance; fits are refused.
    pub constant: bool,
}

/// Least-squares slope of log power against log frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// `φ = -slope`.
    pub phi: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Plain periodogram of the mean-centered series, log-binned with `factor`.
pub fn power_spectrum(series: &[f64], factor: f64) -> Result<Spectrum> {
    power_spectrum_segmented(series, 1, factor)
}

/// Periodogram averaged over `segments` consecutive non-overlapping pieces,
/// each mean-centered separately. A trailing remainder is dropped.
pub fn power_spectrum_segmented(series: &[f64], segments: usize, factor: f64) -> Result<Spectrum> {
    if !(factor > 1.0) {
        return Err(Error::Config(format!("log-bin factor must exceed 1, got {factor}")));
    }
    if segments == 0 {
        return Err(Error::Config("need at least one segment".into()));
    }
    let n = series.len() / segments;
    if n < MIN_SERIES_LEN {
        return Err(Error::Config(format!(
            "segments of {n} points are shorter than the minimum {MIN_SERIES_LEN}"
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let half = n / 2;
    let mut power = vec![0.0; half];
    let mut constant = true;
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for seg in series.chunks_exact(n).take(segments) {
        let mean = seg.iter().sum::<f64>() / n as f64;
        for (b, &x) in buf.iter_mut().zip(seg) {
            *b = Complex::new(x - mean, 0.0);
        }
        if seg.iter().any(|&x| x != seg[0]) {
            constant = false;
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p += buf[k + 1].norm_sqr() / n as f64;
        }
    }
    for p in &mut power {
        *p /= segments as f64;
    }
    let freqs: Vec<f64> = (1..=half).map(|k| k as f64 / n as f64).collect();
    let binned = if constant { Vec::new() } else { log_bin_spectrum(&freqs, &power, factor) };
    Ok(Spectrum {
        segment_len: n,
        segments,
        freqs,
        power,
        binned,
        constant,
    })
}

/// Groups frequencies into bins `[f0 r^j, f0 r^(j+1))` starting at the lowest
/// frequency. Each bin reports the geometric means of its frequencies and
/// powers; zero powers are skipped.
fn log_bin_spectrum(freqs: &[f64], power: &[f64], factor: f64) -> Vec<SpectrumBin> {
    let mut bins = Vec::new();
    let Some(&f0) = freqs.first() else {
        return bins;
    };
    let mut i = 0;
    let mut edge = f0;
    while i < freqs.len() {
        edge *= factor;
        let (mut log_f, mut log_p, mut count) = (0.0, 0.0, 0usize);
        // The tolerance keeps a frequency that sits exactly on an edge in the
        // lower bin despite rounding in the edge product.
        while i < freqs.len() && freqs[i] < edge * (1.0 - 1e-12) {
            if power[i] > 0.0 {
                log_f += freqs[i].ln();
                log_p += power[i].ln();
                count += 1;
            }
            i += 1;
        }
        if count > 0 {
            bins.push(SpectrumBin {
                freq: (log_f / count as f64).exp(),
                power: (log_p / count as f64).exp(),
                count,
            });
        }
    }
    bins
}

impl Spectrum {
    /// Sum of the two-sided periodogram over all nonzero frequencies. For a
    /// single segment this equals `N` times the series variance.
    pub fn two_sided_total(&self) -> f64 {
        let n = self.segment_len;
        let mut total = 0.0;
        for (k, p) in self.power.iter().enumerate() {
            let k = k + 1;
            total += if 2 * k == n { *p } else { 2.0 * p };
        }
        total
    }

    /// Raw frequency with the largest power.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.freqs
            .iter()
            .zip(&self.power)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(&f, &p)| (f, p))
    }

    /// Fits `ln S = c - φ ln ν` over binned points with `lo <= ν <= hi`,
    /// weighting each bin by the number of frequencies it averages.
    pub fn fit(&self, lo: f64, hi: f64) -> Result<SlopeFit> {
        if self.constant {
            return Err(Error::FitRefused("constant series has no spectrum".into()));
        }
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Config(format!("bad fit range [{lo}, {hi}]")));
        }
        let pts: Vec<(f64, f64, f64)> = self
            .binned
            .iter()
            .filter(|b| b.freq >= lo && b.freq <= hi)
            .map(|b| (b.freq.ln(), b.power.ln(), b.count as f64))
            .collect();
        let (slope, intercept, stderr) = weighted_line_fit(&pts)
            .ok_or_else(|| Error::FitRefused(format!("fewer than 3 binned points in [{lo}, {hi}]")))?;
        Ok(SlopeFit {
            phi: -slope,
            stderr,
            intercept,
            points: pts.len(),
            lo,
            hi,
        })
    }
}

/// Weighted least-squares line through `(x, y, w)`; returns
/// `(slope, intercept, slope standard error)`. Needs at least 3 points with
/// distinct `x`.
pub(crate) fn weighted_line_fit(pts: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    if pts.len() < 3 {
        return None;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mx = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    // Weights are treated as relative, so the residual scale comes from the
    // data themselves.
    let n = pts.len() as f64;
    let sigma2 = ssr / sw * n / (n - 2.0);
    let stderr = (sigma2 * sw / n / sxx).sqrt();
    Some((slope, intercept, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::long_memory_noise;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::PI;

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn sinusoid_peaks_at_its_frequency() {
        let x: Vec<f64> = (0..4032).map(|t| (2.0 * PI * t as f64 / 288.0).sin()).collect();
        let s = power_spectrum(&x, DEFAULT_LOG_BIN_FACTOR).unwrap();
        let (f, _) = s.peak().unwrap();
        assert!((f - 1.0 / 288.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_holds() {
        for n in [64, 65, 1000, 4033] {
            let x = white(n, n as u64);
            let mean = x.iter().sum::<f64>() / n as f64;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let s = power_spectrum(&x, 1.3).unwrap();
            let rel = (s.two_sided_total() - n as f64 * var).abs() / (n as f64 * var);
            assert!(rel < 1e-6, "n={n}: {rel}");
        }
    }

    #[test]
    fn direct_dft_agrees() {
        let x = white(100, 3);
        let s = power_spectrum(&x, 1.3).unwrap();
        let mean = x.iter().sum::<f64>() / 100.0;
        for k in [1usize, 7, 50] {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * t) as f64 / 100.0;
                re += (v - mean) * ang.cos();
                im += (v - mean) * ang.sin();
            }
            let expected = (re * re + im * im) / 100.0;
            assert!((s.power[k - 1] - expected).abs() < 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn constant_series_refuses_fit() {
        let s = power_spectrum(&[3.0; 200], 1.3).unwrap();
        assert!(s.constant);
        assert!(s.power.iter().all(|&p| p == 0.0));
        assert!(matches!(s.fit(0.01, 0.4), Err(Error::FitRefused(_))));
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(power_spectrum(&[1.0; 63], 1.3).is_err());
        assert!(power_spectrum(&white(100, 1), 1.0).is_err());
    }

    #[test]
    fn white_noise_is_flat_on_average() {
        let phis: Vec<f64> = (0..20)
            .map(|seed| {
                let s = power_spectrum(&white(4032, 100 + seed), 1.3).unwrap();
                s.fit(1.0 / 2000.0, 1.0 / 24.0).unwrap().phi
            })
            .collect();
        let mean = phis.iter().sum::<f64>() / 20.0;
        assert!(mean.abs() < 0.15, "mean φ {mean}");
    }

    #[test]
    fn long_memory_surrogate_slope_is_recovered() {
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = long_memory_noise(4096, 1.5, &mut rng);
            let s = power_spectrum(&x, 1.3).unwrap();
            let fit = s.fit(1.0 / 2000.0, 0.5).unwrap();
            assert!((fit.phi - 1.5).abs() < 0.2, "seed {seed}: φ {}", fit.phi);
        }
    }

    #[test]
    fn segment_averaging_reduces_scatter() {
        let x = white(8192, 4);
        let one = power_spectrum(&x, 1.3).unwrap();
        let eight = power_spectrum_segmented(&x, 8, 1.3).unwrap();
        assert_eq!(eight.segment_len, 1024);
        let spread = |s: &Spectrum| {
            let m = s.power.iter().sum::<f64>() / s.power.len() as f64;
            s.power.iter().map(|p| (p / m - 1.0).powi(2)).sum::<f64>() / s.power.len() as f64
        };
        assert!(spread(&eight) < spread(&one) / 4.0);
    }

    #[test]
    fn bins_cover_every_frequency_once() {
        let s = power_spectrum(&white(1000, 8), 1.3).unwrap();
        let total: usize = s.binned.iter().map(|b| b.count).sum();
        assert_eq!(total, s.freqs.len());
        assert!(s.binned.windows(2).all(|w| w[0].freq < w[1].freq));
    }

    #[test]
    fn line_fit_is_exact_on_a_line() {
        let pts: Vec<(f64, f64, f64)> = (0..10).map(|i| (i as f64, 2.0 - 0.7 * i as f64, 1.0 + i as f64)).collect();
        let (slope, intercept, se) = weighted_line_fit(&pts).unwrap();
        assert!((slope + 0.7).abs() < 1e-12 && (intercept - 2.0).abs() < 1e-12 && se < 1e-9);
    }
}
