//! Community extraction from the low eigenvectors: choose the number of
//! communities from the largest relative gap in the low spectrum, embed each
//! node as the unit-normalized row of the eigenvector matrix, and cluster the
//! rows with seeded k-means++.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eigen::{LowSpectrum, ZERO_TOL};
use crate::error::{Error, Result};

/// Nonzero eigenvalues inspected when looking for the gap.
pub const GAP_WINDOW: usize = 10;
pub const DEFAULT_MAX_COMMUNITIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterOptions {
    pub max_communities: usize,
    pub seed: u64,
    /// Independent k-means++ starts; the lowest within-cluster sum wins.
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            max_communities: DEFAULT_MAX_COMMUNITIES,
            seed: 0,
            restarts: 10,
            max_iterations: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Communities {
    /// Number of communities.
    pub k: usize,
    /// Label per node (indexed like the projected graph), `0` the largest.
    pub labels: Vec<usize>,
    /// Node count per label, descending.
    pub sizes: Vec<usize>,
    /// Numerically zero eigenvalues seen.
    pub zero_eigenvalues: usize,
    /// Set when extraction fell back to a single community.
    pub diagnostic: Option<String>,
}

/// Number of communities: zero eigenvalues plus the position of the largest
/// ratio `lambda_{j+1} / lambda_j` among the lowest nonzero eigenvalues,
/// capped at `max_communities`.
pub fn choose_k(values: &[f64], max_communities: usize) -> Result<(usize, usize)> {
    let zeros = values.iter().filter(|&&v| v.abs() < ZERO_TOL).count();
    let nonzero: Vec<f64> = values.iter().copied().filter(|v| v.abs() >= ZERO_TOL).take(GAP_WINDOW).collect();
    if nonzero.len() < 2 {
        return Err(Error::Empty("fewer than two nonzero eigenvalues available"));
    }
    let mut best = (f64::NEG_INFINITY, 1);
    for j in 1..nonzero.len() {
        let gap = (nonzero[j] / nonzero[j - 1]).ln();
        if gap > best.0 {
            best = (gap, j);
        }
    }
    Ok(((zeros + best.1).min(max_communities).max(1), zeros))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm from k-means++ seeds. Returns labels and inertia.
fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng, max_iterations: usize) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }
    let dim = points[0].len();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iterations {
        let mut changed = false;
        for (l, p) in labels.iter_mut().zip(points) {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])))
                .unwrap();
            if *l != best {
                *l = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = labels.iter().zip(points).map(|(&l, p)| sq_dist(p, &centers[l])).sum();
    (labels, inertia)
}

/// Relabels so that label 0 is the largest cluster; ties go to the cluster
/// holding the lowest node index. Empty clusters are dropped.
fn order_by_size(labels: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut size = vec![0usize; k];
    let mut first = vec![usize::MAX; k];
    for (i, &l) in labels.iter().enumerate() {
        size[l] += 1;
        first[l] = first[l].min(i);
    }
    let mut order: Vec<usize> = (0..k).filter(|&c| size[c] > 0).collect();
    order.sort_by(|&a, &b| size[b].cmp(&size[a]).then(first[a].cmp(&first[b])));
    let mut rename = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        rename[old] = new;
    }
    (labels.iter().map(|&l| rename[l]).collect(), order.iter().map(|&c| size[c]).collect())
}

/// Partitions the nodes of `spectrum` into communities.
pub fn extract_communities(spectrum: &LowSpectrum, opts: &ClusterOptions) -> Result<Communities> {
    let (k, zeros) = choose_k(&spectrum.values, opts.max_communities)?;
    let n = spectrum.vectors.nrows();
    let cols = k.min(spectrum.len());
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..cols).map(|c| spectrum.vectors[(i, c)]).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
            row
        })
        .collect();
    let distinct = points.iter().any(|p| sq_dist(p, &points[0]) > 1e-20);
    if !distinct || k < 2 || n < 2 {
        return Ok(Communities {
            k: 1,
            labels: vec![0; n],
            sizes: vec![n],
            zero_eigenvalues: zeros,
            diagnostic: Some(if distinct {
                "gap rule selected a single community".to_string()
            } else {
                "all embedded rows coincide; returning a single community".to_string()
            }),
        });
    }
    let k = k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..opts.restarts.max(1) {
        let (labels, inertia) = kmeans(&points, k, &mut rng, opts.max_iterations);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((labels, inertia));
        }
    }
    let (labels, _) = best.expect("at least one restart");
    let (labels, sizes) = order_by_size(&labels, k);
    Ok(Communities {
        k: sizes.len(),
        labels,
        sizes,
        zero_eigenvalues: zeros,
        diagnostic: None,
    })
}
