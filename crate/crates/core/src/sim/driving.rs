//! Synthetic arrival series p(t): Poisson counts around a daily cycle,
//! optionally modulated by long-memory noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::config::{NoiseSpec, SyntheticDriving};

/// Draws `steps` arrival counts with mean
/// `base_rate * (1 + amplitude * sin(2πt/period))`, times the noise factor.
pub fn synthesize_driving<R: Rng + ?Sized>(spec: &SyntheticDriving, steps: usize, rng: &mut R) -> Vec<u32> {
    let modulation: Vec<f64> = match spec.noise {
        NoiseSpec::None => vec![1.0; steps],
        NoiseSpec::LongMemory { exponent, strength } => long_memory_noise(steps, exponent, rng)
            .into_iter()
            // Log-normal factor with unit mean.
            .map(|x| (strength * x - 0.5 * strength * strength).exp())
            .collect(),
    };
    (0..steps)
        .map(|t| {
            let phase = 2.0 * PI * (t as f64) / spec.period;
            let rate = spec.base_rate * (1.0 + spec.amplitude * phase.sin()) * modulation[t];
            poisson(rate, rng)
        })
        .collect()
}

fn poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u32 {
    if rate <= 0.0 {
        return 0;
    }
    let d = Poisson::new(rate).expect("positive finite rate");
    let x: f64 = d.sample(rng);
    x as u32
}

/// Zero-mean, unit-variance Gaussian series whose power spectrum follows
/// `1/ν^exponent`, generated by shaping white noise in the frequency domain.
pub fn long_memory_noise<R: Rng + ?Sized>(n: usize, exponent: f64, rng: &mut R) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let amp = (k as f64 / n as f64).powf(-exponent / 2.0);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        spectrum[k] = Complex::new(re * amp, im * amp);
        if k != n - k {
            spectrum[n - k] = spectrum[k].conj();
        } else {
            spectrum[k].im = 0.0;
        }
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut spectrum);
    let mut x: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt().max(f64::MIN_POSITIVE);
    for v in &mut x {
        *v = (*v - mean) / sd;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_driving_has_base_rate_mean() {
        let spec = SyntheticDriving {
            base_rate: 6.0,
            amplitude: 0.0,
            ..SyntheticDriving::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = synthesize_driving(&spec, 4032, &mut rng);
        let mean = p.iter().map(|&x| f64::from(x)).sum::<f64>() / p.len() as f64;
        // Poisson standard error: sqrt(6/4032) ≈ 0.039.
        assert!((mean - 6.0).abs() < 0.2, "mean {mean}");
        let var = p.iter().map(|&x| (f64::from(x) - mean).powi(2)).sum::<f64>() / p.len() as f64;
        assert!((var / mean - 1.0).abs() < 0.15, "dispersion {}", var / mean);
    }

    #[test]
    fn cycle_follows_the_sine() {
        let spec = SyntheticDriving {
            base_rate: 20.0,
            amplitude: 0.8,
            ..SyntheticDriving::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = synthesize_driving(&spec, 288 * 20, &mut rng);
        // Quarter-period bins: peak near t = 72, trough near t = 216.
        let at = |phase: usize| -> f64 {
            (0..20).map(|d| f64::from(p[d * 288 + phase])).sum::<f64>() / 20.0
        };
        assert!(at(72) > 30.0 && at(216) < 10.0, "{} {}", at(72), at(216));
    }

    #[test]
    fn noise_is_standardized_and_deterministic() {
        let a = long_memory_noise(1000, 1.5, &mut ChaCha8Rng::seed_from_u64(5));
        let b = long_memory_noise(1000, 1.5, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / 1000.0;
        let var = a.iter().map(|v| v * v).sum::<f64>() / 1000.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-9);
    }
}
