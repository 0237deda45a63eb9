//! Lowest eigenpairs of the normalized Laplacian.
//!
//! Small problems go through a dense symmetric eigensolver. Larger connected
//! components use a thick-restart Lanczos iteration with full
//! reorthogonalization on `N = I - L`, with the known null vector `sqrt(l)`
//! deflated. Each connected component is solved separately so that the
//! repeated zero eigenvalue of a disconnected graph is resolved exactly.
//! Eigenvector signs are fixed so that the entry of largest magnitude is
//! positive.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::laplacian::NormalizedAdjacency;
use super::projection::ProjectedGraph;
use crate::error::{Error, Result};

pub const DEFAULT_DENSE_LIMIT: usize = 6000;
/// Largest accepted residual `||L v - lambda v||`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Eigenvalues below this are counted as zero.
pub const ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Dense per component up to the dense limit, Lanczos beyond it.
    #[default]
    Auto,
    /// Dense only; components above the dense limit are refused.
    Dense,
    /// Lanczos for every component larger than a few hundred nodes.
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub k_max: usize,
    pub dense_limit: usize,
    pub solver: Solver,
    /// Iteration cap for the Lanczos solver, in operator applications.
    pub max_matvecs: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            k_max: 12,
            dense_limit: DEFAULT_DENSE_LIMIT,
            solver: Solver::Auto,
            max_matvecs: 200_000,
        }
    }
}

/// The `k` lowest eigenpairs, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct LowSpectrum {
    pub values: Vec<f64>,
    /// Column `c` is the eigenvector of `values[c]`.
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
}

impl LowSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v.abs() < ZERO_TOL).count()
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(m: &DMatrix<f64>, v: &[f64], lambda: f64) -> f64 {
    let x = DMatrix::from_column_slice(v.len(), 1, v);
    (m * &x - x * lambda).norm()
}

/// Lowest `k_max` eigenpairs of a dense symmetric matrix.
pub fn low_spectrum(l: &DMatrix<f64>, k_max: usize, dense_limit: usize) -> Result<LowSpectrum> {
    let n = l.nrows();
    if n != l.ncols() {
        return Err(Error::Config(format!("matrix is {}x{}, not square", n, l.ncols())));
    }
    if n > dense_limit {
        return Err(Error::TooLarge { dim: n, limit: dense_limit });
    }
    if n == 0 {
        return Err(Error::Empty("empty matrix"));
    }
    let scale = l.abs().max().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (l[(i, j)] - l[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Config(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(l.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = k_max.min(n);
    let mut vectors = DMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        fix_sign(&mut v);
        let lambda = eig.eigenvalues[idx];
        let r = residual(l, &v, lambda);
        if r > RESIDUAL_TOL * scale {
            return Err(Error::NoConvergence {
                iterations: 0,
                last_step: r,
            });
        }
        vectors.column_mut(c).copy_from_slice(&v);
        values.push(lambda);
        residuals.push(r);
    }
    Ok(LowSpectrum {
        values,
        vectors,
        residuals,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Removes from `w` its components along `basis` (two passes) and returns the
/// accumulated coefficients.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut coef = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, b) in coef.iter_mut().zip(basis) {
            let h = dot(b, w);
            axpy(-h, b, w);
            *c += h;
        }
    }
    coef
}

/// Largest `nev` eigenpairs of `op` on the orthogonal complement of the unit
/// vector `null`, returned in descending order.
fn lanczos_top(
    op: &NormalizedAdjacency,
    null: &[f64],
    nev: usize,
    max_matvecs: usize,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = op.len();
    let dim = n - 1;
    let m = (2 * nev + 40).max(80).min(dim);
    let keep = (nev + (m - nev) / 3).min(m - 1);
    let tol = 1e-11;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deflate = vec![null.to_vec()];

    let fresh = |rng: &mut ChaCha8Rng, basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..5 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(&mut v, &deflate);
            orthogonalize(&mut v, basis);
            if normalize(&mut v) > 1e-8 {
                return Some(v);
            }
        }
        None
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(fresh(&mut rng, &basis).ok_or(Error::Empty("no start vector"))?);
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut start = 0;
    let mut matvecs = 0;
    let mut w = vec![0.0; n];
    loop {
        let mut beta = 0.0;
        for j in start..m {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            orthogonalize(&mut w, &deflate);
            let coef = orthogonalize(&mut w, &basis[..=j]);
            for (i, &h) in coef.iter().enumerate() {
                t[(i, j)] = h;
                t[(j, i)] = h;
            }
            beta = normalize(&mut w);
            if j + 1 < m {
                let next = if beta > 1e-10 {
                    w.clone()
                } else {
                    // Invariant subspace found: continue with a new direction.
                    beta = 0.0;
                    match fresh(&mut rng, &basis) {
                        Some(v) => v,
                        None => break,
                    }
                };
                basis.push(next);
            }
        }
        let size = basis.len();
        let tm = t.view((0, 0), (size, size)).into_owned();
        let eig = SymmetricEigen::new(tm);
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let want = nev.min(size);
        let bound = |idx: usize| beta * eig.eigenvectors[(size - 1, idx)].abs();
        let last_residual = order[..want].iter().map(|&i| bound(i)).fold(0.0, f64::max);
        let converged = last_residual <= tol || size < m;
        let ritz = |idx: usize| -> Vec<f64> {
            let mut v = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                axpy(eig.eigenvectors[(i, idx)], b, &mut v);
            }
            v
        };
        if converged {
            let mut out = Vec::with_capacity(want);
            let mut kept: Vec<Vec<f64>> = Vec::with_capacity(want);
            for &idx in &order[..want] {
                let mut v = ritz(idx);
                orthogonalize(&mut v, &deflate);
                orthogonalize(&mut v, &kept);
                normalize(&mut v);
                kept.push(v.clone());
                out.push((eig.eigenvalues[idx], v));
            }
            return Ok(out);
        }
        if matvecs >= max_matvecs {
            return Err(Error::NoConvergence {
                iterations: matvecs,
                last_step: last_residual,
            });
        }
        // Thick restart: keep the leading Ritz vectors and continue from the
        // residual direction.
        let mut next_basis: Vec<Vec<f64>> = order[..keep].iter().map(|&idx| ritz(idx)).collect();
        t.fill(0.0);
        for (c, &idx) in order[..keep].iter().enumerate() {
            t[(c, c)] = eig.eigenvalues[idx];
        }
        let residual_dir = if beta > 1e-10 { Some(w.clone()) } else { None };
        let cont = match residual_dir {
            Some(mut r) => {
                orthogonalize(&mut r, &next_basis);
                if normalize(&mut r) > 1e-8 {
                    Some(r)
                } else {
                    None
                }
            }
            None => None,
        };
        let cont = match cont {
            Some(r) => r,
            None => fresh(&mut rng, &next_basis).ok_or(Error::NoConvergence {
                iterations: matvecs,
                last_step: last_residual,
            })?,
        };
        next_basis.push(cont);
        basis = next_basis;
        start = keep;
    }
}

/// Problems up to this size are always solved densely.
const SMALL_COMPONENT: usize = 400;

fn component_spectrum(op: &NormalizedAdjacency, k: usize, opts: &SpectrumOptions, seed: u64) -> Result<LowSpectrum> {
    let n = op.len();
    let dense = match opts.solver {
        Solver::Dense => true,
        Solver::Auto => n <= opts.dense_limit,
        Solver::Lanczos => n <= SMALL_COMPONENT,
    };
    if dense || n <= SMALL_COMPONENT.min(2 * k + 2) {
        let limit = if matches!(opts.solver, Solver::Dense) { opts.dense_limit } else { usize::MAX };
        return low_spectrum(&op.dense_laplacian(), k, limit);
    }
    let norm: f64 = dot(op.sqrt_strength(), op.sqrt_strength()).sqrt();
    let null: Vec<f64> = op.sqrt_strength().iter().map(|x| x / norm).collect();
    let top = lanczos_top(op, &null, k.saturating_sub(1).max(1), opts.max_matvecs, seed)?;
    let mut pairs = vec![(0.0, null)];
    pairs.extend(top.into_iter().map(|(theta, v)| (1.0 - theta, v)));
    pairs.truncate(k);
    let mut vectors = DMatrix::zeros(n, pairs.len());
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut y = vec![0.0; n];
    for (c, (lambda, mut v)) in pairs.into_iter().enumerate() {
        fix_sign(&mut v);
        op.apply(&v, &mut y);
        // L v - lambda v = v - N v - lambda v.
        let r = v.iter().zip(&y).map(|(x, nx)| (x - nx - lambda * x).powi(2)).sum::<f64>().sqrt();
        if r > RESIDUAL_TOL {
            return Err(Error::NoConvergence {
                iterations: opts.max_matvecs,
                last_step: r,
            });
        }
        vectors.column_mut(c).copy_from_slice(&v);
        values.push(lambda);
        residuals.push(r);
    }
    Ok(LowSpectrum {
        values,
        vectors,
        residuals,
    })
}

/// Lowest `opts.k_max` eigenpairs of the normalized Laplacian of `pg`, with
/// eigenvectors indexed like `pg.nodes`.
pub fn laplacian_spectrum(pg: &ProjectedGraph, opts: &SpectrumOptions) -> Result<LowSpectrum> {
    if pg.is_empty() {
        return Err(Error::Empty("projected graph has no nodes"));
    }
    if let Some(i) = pg.strengths.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::ZeroStrength(i));
    }
    let (count, label) = pg.components();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (i, &c) in label.iter().enumerate() {
        members[c].push(i);
    }
    // (value, component, column within the component's spectrum)
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut spectra = Vec::with_capacity(count);
    for (c, nodes) in members.iter().enumerate() {
        let op = NormalizedAdjacency::restricted(pg, nodes.clone());
        let s = component_spectrum(&op, opts.k_max.min(nodes.len()), opts, c as u64)?;
        candidates.extend(s.values.iter().enumerate().map(|(col, &v)| (v, c, col)));
        spectra.push(s);
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    candidates.truncate(opts.k_max);
    let mut vectors = DMatrix::zeros(pg.len(), candidates.len());
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    for (col, &(v, c, src)) in candidates.iter().enumerate() {
        for (pos, &node) in members[c].iter().enumerate() {
            vectors[(node, col)] = spectra[c].vectors[(pos, src)];
        }
        values.push(v);
        residuals.push(spectra[c].residuals[src]);
    }
    Ok(LowSpectrum {
        values,
        vectors,
        residuals,
    })
}
