//! Degree histograms of both partitions and the fit families used to describe
//! them: the power law with exponential cut-off for agents, the q-exponential
//! for posts, and pure exponential and pure power-law references.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};

use crate::dist::{log_bin, DiscreteDist, LogBin};
use crate::error::{Error, Result};
use crate::model::{BipartiteGraph, Partition};

/// Fits need at least this many nonempty log-bins.
pub const MIN_FIT_BINS: usize = 5;
pub const DEFAULT_DEGREE_BIN_FACTOR: f64 = 2.0;

/// Node counts per unweighted degree on one side of the graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub nodes: u64,
}

impl DegreeHistogram {
    pub fn of(graph: &BipartiteGraph, side: Partition) -> Self {
        let mut counts = BTreeMap::new();
        let n = graph.side_len(side);
        for i in 0..n {
            *counts.entry(graph.degree(side, i) as u64).or_insert(0) += 1;
        }
        Self {
            counts,
            nodes: n as u64,
        }
    }

    /// Degrees of nodes with at least one link, as a distribution.
    pub fn distribution(&self) -> Result<DiscreteDist> {
        DiscreteDist::from_weights(
            self.counts
                .iter()
                .filter(|(&k, _)| k > 0)
                .map(|(&k, &c)| (k as f64, c as f64)),
        )
    }

    /// Sum of degree times count: the number of edges.
    pub fn degree_sum(&self) -> u64 {
        self.counts.iter().map(|(k, c)| k * c).sum()
    }

    pub fn log_binned(&self, factor: f64) -> Result<Vec<LogBin>> {
        Ok(log_bin(&self.distribution()?, factor))
    }
}

/// `P(k) = C k^-τ exp(-k / X0)`. A nonpositive `x0` means the fitted
/// exponential factor grows rather than cuts off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPowerLawFit {
    pub c: f64,
    pub tau: f64,
    pub x0: f64,
    pub rss: f64,
}

/// `P(k) = C exp(-k / X0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub c: f64,
    pub x0: f64,
    pub rss: f64,
}

/// `P(k) = C k^-τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub c: f64,
    pub tau: f64,
    pub rss: f64,
}

/// `P(k) = C [1 - (1 - q) k / X0]^(1 / (1 - q))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QExponentialFit {
    pub c: f64,
    pub q: f64,
    pub x0: f64,
    pub rss: f64,
}

/// Histogram, log-bins and all four fits for one partition. `fit_error`
/// explains why the fits are missing when there are too few bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionDegrees {
    pub side: Partition,
    pub histogram: DegreeHistogram,
    pub bins: Vec<LogBin>,
    pub fits: Option<DegreeFits>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFits {
    pub cutoff_power_law: CutoffPowerLawFit,
    pub q_exponential: QExponentialFit,
    pub exponential: ExponentialFit,
    pub power_law: PowerLawFit,
}

pub fn degree_distributions(graph: &BipartiteGraph, factor: f64) -> Result<(PartitionDegrees, PartitionDegrees)> {
    if graph.n_edges() == 0 {
        return Err(Error::Empty("graph has no links"));
    }
    let one = |side| -> Result<PartitionDegrees> {
        let histogram = DegreeHistogram::of(graph, side);
        let bins = histogram.log_binned(factor)?;
        let (fits, fit_error) = match fit_all(&bins) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(PartitionDegrees {
            side,
            histogram,
            bins,
            fits,
            fit_error,
        })
    };
    Ok((one(Partition::Agents)?, one(Partition::Posts)?))
}

pub fn fit_all(bins: &[LogBin]) -> Result<DegreeFits> {
    Ok(DegreeFits {
        cutoff_power_law: fit_cutoff_power_law(bins)?,
        q_exponential: fit_q_exponential(bins)?,
        exponential: fit_exponential(bins)?,
        power_law: fit_power_law(bins)?,
    })
}

/// `(k, ln P)` for the bins with positive `k` and density.
fn log_points(bins: &[LogBin]) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.center > 0.0 && b.density > 0.0)
        .map(|b| (b.center, b.density.ln()))
        .collect();
    if pts.len() < MIN_FIT_BINS {
        return Err(Error::FitRefused(format!(
            "{} usable bins, need at least {MIN_FIT_BINS}",
            pts.len()
        )));
    }
    Ok(pts)
}

/// Ordinary least squares of `y` on the given regressor columns (at most 3).
fn least_squares(rows: &[([f64; 3], f64)], cols: usize) -> Result<(Vector3<f64>, f64)> {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (x, y) in rows {
        for i in 0..cols {
            aty[i] += x[i] * y;
            for j in 0..cols {
                ata[(i, j)] += x[i] * x[j];
            }
        }
    }
    for i in cols..3 {
        ata[(i, i)] = 1.0;
    }
    let beta = ata
        .cholesky()
        .ok_or_else(|| Error::FitRefused("degenerate regressors".into()))?
        .solve(&aty);
    let rss = rows
        .iter()
        .map(|(x, y)| {
            let pred: f64 = (0..cols).map(|i| beta[i] * x[i]).sum();
            (y - pred).powi(2)
        })
        .sum();
    Ok((beta, rss))
}

pub fn fit_cutoff_power_law(bins: &[LogBin]) -> Result<CutoffPowerLawFit> {
    let rows: Vec<([f64; 3], f64)> = log_points(bins)?
        .into_iter()
        .map(|(k, y)| ([1.0, k.ln(), k], y))
        .collect();
    let (b, rss) = least_squares(&rows, 3)?;
    Ok(CutoffPowerLawFit {
        c: b[0].exp(),
        tau: -b[1],
        x0: -1.0 / b[2],
        rss,
    })
}

pub fn fit_exponential(bins: &[LogBin]) -> Result<ExponentialFit> {
    let rows: Vec<([f64; 3], f64)> = log_points(bins)?
        .into_iter()
        .map(|(k, y)| ([1.0, k, 0.0], y))
        .collect();
    let (b, rss) = least_squares(&rows, 2)?;
    Ok(ExponentialFit {
        c: b[0].exp(),
        x0: -1.0 / b[1],
        rss,
    })
}

pub fn fit_power_law(bins: &[LogBin]) -> Result<PowerLawFit> {
    let rows: Vec<([f64; 3], f64)> = log_points(bins)?
        .into_iter()
        .map(|(k, y)| ([1.0, k.ln(), 0.0], y))
        .collect();
    let (b, rss) = least_squares(&rows, 2)?;
    Ok(PowerLawFit {
        c: b[0].exp(),
        tau: -b[1],
        rss,
    })
}

/// `ln e_q(-k / x0)`, or `None` outside the support.
pub fn ln_q_exponential(k: f64, q: f64, x0: f64) -> Option<f64> {
    if (q - 1.0).abs() < 1e-12 {
        return Some(-k / x0);
    }
    let base = 1.0 - (1.0 - q) * k / x0;
    (base > 0.0).then(|| base.ln() / (1.0 - q))
}

/// Residual sum and best `ln C` for fixed `(q, x0)`; `ln C` enters linearly.
fn q_exp_rss(pts: &[(f64, f64)], q: f64, x0: f64) -> Option<(f64, f64)> {
    let shape: Option<Vec<f64>> = pts.iter().map(|&(k, _)| ln_q_exponential(k, q, x0)).collect();
    let shape = shape?;
    let n = pts.len() as f64;
    let ln_c = pts.iter().zip(&shape).map(|(p, s)| p.1 - s).sum::<f64>() / n;
    let rss = pts.iter().zip(&shape).map(|(p, s)| (p.1 - ln_c - s).powi(2)).sum();
    Some((rss, ln_c))
}

/// Grid search over `(q, ln x0)` followed by a shrinking pattern search.
/// The start set includes the point equivalent to the pure power-law fit.
pub fn fit_q_exponential(bins: &[LogBin]) -> Result<QExponentialFit> {
    let pts = log_points(bins)?;
    let kmin = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let kmax = pts.iter().map(|p| p.0).fold(0.0, f64::max);
    let eval = |q: f64, lx: f64| q_exp_rss(&pts, q, lx.exp()).map(|r| r.0).unwrap_or(f64::INFINITY);

    let mut best = (f64::INFINITY, 1.5, kmax.ln());
    let (lx_lo, lx_hi) = ((kmin * 1e-3).ln(), (kmax * 1e3).ln());
    for qi in 0..=80 {
        let q = 0.02 + 0.05 * f64::from(qi);
        for xi in 0..=60 {
            let lx = lx_lo + (lx_hi - lx_lo) * f64::from(xi) / 60.0;
            let r = eval(q, lx);
            if r < best.0 {
                best = (r, q, lx);
            }
        }
    }
    let pl = fit_power_law(bins)?;
    if pl.tau > 0.0 {
        // [1 + (q-1) k / x0]^(-1/(q-1)) tends to a power law as x0 -> 0.
        let q = 1.0 + 1.0 / pl.tau;
        let lx = (kmin * 1e-6).ln();
        let r = eval(q, lx);
        if r < best.0 {
            best = (r, q, lx);
        }
    }
    let (mut rss, mut q, mut lx) = best;
    let (mut dq, mut dx) = (0.05, 0.25);
    for _ in 0..400 {
        let mut improved = false;
        for (sq, sx) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let (nq, nx) = (q + sq * dq, lx + sx * dx);
            if nq <= 0.0 {
                continue;
            }
            let r = eval(nq, nx);
            if r < rss {
                (rss, q, lx) = (r, nq, nx);
                improved = true;
            }
        }
        if !improved {
            dq *= 0.5;
            dx *= 0.5;
            if dq < 1e-9 && dx < 1e-9 {
                break;
            }
        }
    }
    let (rss, ln_c) =
        q_exp_rss(&pts, q, lx.exp()).ok_or_else(|| Error::FitRefused("q-exponential search failed".into()))?;
    Ok(QExponentialFit {
        c: ln_c.exp(),
        q,
        x0: lx.exp(),
        rss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, PostId};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn histogram_of(samples: &[u64]) -> DegreeHistogram {
        let mut counts = BTreeMap::new();
        for &k in samples {
            *counts.entry(k).or_insert(0) += 1;
        }
        DegreeHistogram {
            counts,
            nodes: samples.len() as u64,
        }
    }

    #[test]
    fn star_graph_degrees() {
        let g = BipartiteGraph::from_edges((0..7).map(|a| (AgentId(a), PostId(0), 1)));
        let (agents, posts) = degree_distributions(&g, 2.0).unwrap();
        assert_eq!(posts.histogram.counts, BTreeMap::from([(7, 1)]));
        assert_eq!(agents.histogram.counts, BTreeMap::from([(1, 7)]));
        assert!(agents.fits.is_none() && agents.fit_error.is_some());
    }

    #[test]
    fn degree_sums_match_edge_count() {
        let g = BipartiteGraph::from_edges([
            (AgentId(0), PostId(0), 3),
            (AgentId(0), PostId(1), 1),
            (AgentId(1), PostId(1), 2),
            (AgentId(2), PostId(2), 1),
        ]);
        for side in [Partition::Agents, Partition::Posts] {
            assert_eq!(DegreeHistogram::of(&g, side).degree_sum(), g.n_edges() as u64);
        }
    }

    #[test]
    fn cutoff_power_law_round_trip() {
        let (tau, x0) = (1.2, 100.0);
        let table = DiscreteDist::from_weights(
            (1..=3000u32).map(|k| (f64::from(k), f64::from(k).powf(-tau) * (-f64::from(k) / x0).exp())),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let samples: Vec<u64> = (0..50_000).map(|_| table.sample(&mut rng) as u64).collect();
        let bins = histogram_of(&samples).log_binned(2.0).unwrap();
        let fit = fit_cutoff_power_law(&bins).unwrap();
        assert!((fit.tau - tau).abs() < 0.2, "τ {}", fit.tau);
        assert!(fit.x0 > 30.0 && fit.x0 < 300.0, "X0 {}", fit.x0);
    }

    #[test]
    fn exact_curves_are_recovered() {
        let bin = |k: f64, d: f64| LogBin {
            lo: k,
            hi: k + 1.0,
            center: k,
            mass: d,
            density: d,
        };
        let ks = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
        let bins: Vec<LogBin> = ks.iter().map(|&k| bin(k, 0.3 * k.powf(-1.7) * (-k / 20.0).exp())).collect();
        let f = fit_cutoff_power_law(&bins).unwrap();
        assert!((f.tau - 1.7).abs() < 1e-9 && (f.x0 - 20.0).abs() < 1e-7 && (f.c - 0.3).abs() < 1e-9);

        let bins: Vec<LogBin> = ks.iter().map(|&k| bin(k, ln_q_exponential(k, 1.4, 5.0).unwrap().exp())).collect();
        let f = fit_q_exponential(&bins).unwrap();
        assert!((f.q - 1.4).abs() < 1e-4 && (f.x0 / 5.0 - 1.0).abs() < 1e-3, "{f:?}");
        assert!(f.rss < 1e-10);
    }

    #[test]
    fn nested_families_never_beat_the_general_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let table = DiscreteDist::power_law(2.1, 1, 500, 0.0).unwrap();
        let samples: Vec<u64> = (0..5000).map(|_| table.sample(&mut rng) as u64).collect();
        let bins = histogram_of(&samples).log_binned(2.0).unwrap();
        let fits = fit_all(&bins).unwrap();
        assert!(fits.cutoff_power_law.rss <= fits.exponential.rss + 1e-12);
        assert!(fits.cutoff_power_law.rss <= fits.power_law.rss + 1e-12);
        assert!(fits.q_exponential.rss <= fits.power_law.rss * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn too_few_bins_are_refused() {
        let bins = histogram_of(&[1, 2, 3, 1, 2]).log_binned(2.0).unwrap();
        assert!(matches!(fit_power_law(&bins), Err(Error::FitRefused(_))));
    }
}
