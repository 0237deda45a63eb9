//! Discrete probability tables used for delays, lifetimes and new-post
//! propensities, with the parametric fallbacks used when no empirical table
//! is supplied.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::event_log;

/// Probabilities must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A finite distribution over ascending, distinct real values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteDist {
    /// Builds a table from `(value, probability)` pairs. Pairs are sorted by
    /// value; duplicate values are merged.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::Distribution("no support points".into()));
        }
        for &(v, p) in &pairs {
            if !v.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::Distribution(format!("bad entry ({v}, {p})")));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            if values.last() == Some(&v) {
                *probs.last_mut().unwrap() += p;
            } else {
                values.push(v);
                probs.push(p);
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Distribution(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::assemble(values, probs))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Distribution("weights must have a positive finite sum".into()));
        }
        Self::from_pairs(pairs.into_iter().map(|(v, w)| (v, w / total)))
    }

    /// Empirical distribution of a sample.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Distribution("empty sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for v in sorted {
            match pairs.last_mut() {
                Some(last) if last.0 == v => last.1 += 1.0,
                _ => pairs.push((v, 1.0)),
            }
        }
        Self::from_pairs(pairs.into_iter().map(|(v, c)| (v, c / n)))
    }

    fn assemble(values: Vec<f64>, mut probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            values,
            probs,
            cumulative,
        }
    }

    /// Integer power law `P(x) ∝ (x + shift)^(-exponent)` on `lo..=hi`.
    pub fn power_law(exponent: f64, lo: u64, hi: u64, shift: f64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Distribution(format!("empty range {lo}..={hi}")));
        }
        if (lo as f64 + shift) <= 0.0 {
            return Err(Error::Distribution("power law base must be positive".into()));
        }
        Self::from_weights((lo..=hi).map(|x| (x as f64, (x as f64 + shift).powf(-exponent))))
    }

    pub fn point_mass(value: f64) -> Self {
        Self::assemble(vec![value], vec![1.0])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.pairs().map(|(v, p)| v * p).sum()
    }

    /// Probability of exactly `value` (0 off the support).
    pub fn prob_of(&self, value: f64) -> f64 {
        match self.values.binary_search_by(|v| v.total_cmp(&value)) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// Inverse-CDF sample; consumes exactly one uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }

    /// Total-variation distance `0.5 Σ |p - q|` over the union of supports.
    pub fn total_variation(&self, other: &DiscreteDist) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.values.len() || j < other.values.len() {
            let a = self.values.get(i).copied().unwrap_or(f64::INFINITY);
            let b = other.values.get(j).copied().unwrap_or(f64::INFINITY);
            if a == b {
                acc += (self.probs[i] - other.probs[j]).abs();
                i += 1;
                j += 1;
            } else if a < b {
                acc += self.probs[i];
                i += 1;
            } else {
                acc += other.probs[j];
                j += 1;
            }
        }
        0.5 * acc
    }

    /// Writes the table as `value,probability` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        event_log::write_pairs(w, ("value", "probability"), self.pairs())
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let pairs = event_log::read_pairs(File::open(path)?, path)?;
        Self::from_pairs(pairs).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// A geometric bin of a distribution: `[lo, hi)` with the probability mass
/// divided by the bin width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBin {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub mass: f64,
    pub density: f64,
}

/// Log-bins a distribution over nonnegative integers. Zero, if present,
/// gets its own unit bin; the rest use edges `1, f, f^2, ...`.
pub fn log_bin(dist: &DiscreteDist, factor: f64) -> Vec<LogBin> {
    assert!(factor > 1.0, "log-bin factor must exceed 1");
    let mut bins = Vec::new();
    let zero = dist.prob_of(0.0);
    if zero > 0.0 {
        bins.push(LogBin {
            lo: 0.0,
            hi: 1.0,
            center: 0.0,
            mass: zero,
            density: zero,
        });
    }
    let max = dist.values().last().copied().unwrap_or(0.0);
    let mut lo = 1.0f64;
    while lo <= max {
        let hi = (lo * factor).max(lo + 1.0);
        let mass: f64 = dist
            .pairs()
            .filter(|&(v, _)| v >= lo && v < hi)
            .map(|(_, p)| p)
            .sum();
        // Integer points covered by [lo, hi).
        let width = (hi.ceil() - lo.ceil()).max(1.0);
        if mass > 0.0 {
            bins.push(LogBin {
                lo,
                hi,
                center: (lo * (hi - 1.0).max(lo)).sqrt(),
                mass,
                density: mass / width,
            });
        }
        lo = hi.ceil();
    }
    bins
}

/// Upper truncation of the delay fallback, in bins.
pub const DELAY_FALLBACK_MAX: u64 = 10_000;
/// Upper truncation of the lifetime fallback, in bins.
pub const LIFETIME_FALLBACK_MAX: u64 = 100_000;

/// Fallback delay table: `P(Δt) ∝ Δt^-1.5` on `1..=10^4`.
pub fn fallback_delay() -> DiscreteDist {
    DiscreteDist::power_law(1.5, 1, DELAY_FALLBACK_MAX, 0.0).expect("valid fallback")
}

/// Fallback lifetime table: `P(t_P) ∝ t_P^-1.2` on `t0..=10^5`.
pub fn fallback_lifetime(t0: u64) -> DiscreteDist {
    let lo = t0.max(1);
    DiscreteDist::power_law(1.2, lo, LIFETIME_FALLBACK_MAX.max(lo), 0.0).expect("valid fallback")
}

/// Fallback new-post propensity: `P(g = 0) = 0.9`, remaining mass spread over
/// `g = 0.05, 0.10, ..., 1.0` with weights `∝ 1/g`.
pub fn fallback_new_post() -> DiscreteDist {
    let grid: Vec<f64> = (1..=20).map(|k| f64::from(k) * 0.05).collect();
    let norm: f64 = grid.iter().map(|g| 1.0 / g).sum();
    let mut pairs = vec![(0.0, 0.9)];
    pairs.extend(grid.iter().map(|&g| (g, 0.1 * (1.0 / g) / norm)));
    DiscreteDist::from_pairs(pairs).expect("valid fallback")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tables_must_be_normalized() {
        assert!(DiscreteDist::from_pairs([(1.0, 0.5), (2.0, 0.4)]).is_err());
        assert!(DiscreteDist::from_pairs([(1.0, 0.5), (2.0, -0.1), (3.0, 0.6)]).is_err());
        let d = DiscreteDist::from_pairs([(2.0, 0.25), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(d.values(), &[1.0, 2.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn fallbacks_are_proper() {
        for d in [fallback_delay(), fallback_lifetime(576), fallback_new_post()] {
            let total: f64 = d.probs().iter().sum();
            assert!((total - 1.0).abs() < NORMALIZATION_TOLERANCE);
            assert!(d.probs().iter().all(|&p| p >= 0.0));
        }
        assert!((fallback_new_post().prob_of(0.0) - 0.9).abs() < 1e-12);
        assert_eq!(fallback_lifetime(576).values()[0], 576.0);
        let delay = fallback_delay();
        assert_eq!(delay.values()[0], 1.0);
        let ratio = delay.prob_of(2.0) / delay.prob_of(1.0);
        assert!((ratio - 2f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn sampling_matches_probabilities() {
        let d = DiscreteDist::from_pairs([(0.0, 0.2), (3.0, 0.5), (7.0, 0.3)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let x = d.sample(&mut rng);
            counts[d.values().iter().position(|&v| v == x).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(d.probs()) {
            let freq = *c as f64 / n as f64;
            assert!((freq - p).abs() < 0.005, "{freq} vs {p}");
        }
        assert_eq!(d.quantile(0.0), 0.0);
        assert_eq!(d.quantile(0.2), 3.0);
        assert_eq!(d.quantile(0.999_999), 7.0);
    }

    #[test]
    fn total_variation_examples() {
        let a = DiscreteDist::from_pairs([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let b = DiscreteDist::from_pairs([(1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!((a.total_variation(&b) - 0.5).abs() < 1e-15);
        assert_eq!(a.total_variation(&a), 0.0);
        let c = DiscreteDist::point_mass(9.0);
        assert!((a.total_variation(&c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_bins_conserve_mass() {
        let d = DiscreteDist::power_law(1.2, 0, 500, 1.0).unwrap();
        let bins = log_bin(&d, 2.0);
        let mass: f64 = bins.iter().map(|b| b.mass).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert_eq!(bins[0].lo, 0.0);
        assert_eq!((bins[1].lo, bins[1].hi), (1.0, 2.0));
        assert_eq!((bins[2].lo, bins[2].hi), (2.0, 4.0));
        assert_eq!((bins[3].lo, bins[3].hi), (4.0, 8.0));
    }
}
