//! Normalized Laplacian `L_ij = delta_ij - C_ij / sqrt(l_i l_j)` of a
//! projected graph, as a dense matrix or as a sparse operator.

use nalgebra::DMatrix;

use super::projection::ProjectedGraph;
use crate::error::{Error, Result};

fn check_strengths(pg: &ProjectedGraph) -> Result<()> {
    match pg.strengths.iter().position(|&l| !(l > 0.0)) {
        Some(i) => Err(Error::ZeroStrength(i)),
        None => Ok(()),
    }
}

/// Dense normalized Laplacian. Refuses graphs with more than `dense_limit`
/// nodes.
pub fn laplacian(pg: &ProjectedGraph, dense_limit: usize) -> Result<DMatrix<f64>> {
    let n = pg.len();
    if n > dense_limit {
        return Err(Error::TooLarge { dim: n, limit: dense_limit });
    }
    check_strengths(pg)?;
    let l = &pg.strengths;
    let mut m = DMatrix::identity(n, n);
    for (i, row) in pg.rows.iter().enumerate() {
        for &(j, c) in row {
            let j = j as usize;
            m[(i, j)] = -c / (l[i] * l[j]).sqrt();
        }
    }
    Ok(m)
}

/// `N = D^-1/2 C D^-1/2` as an operator over the rows of a projected graph,
/// so that `L = I - N`. It borrows the graph rather than copying it.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency<'a> {
    rows: &'a [Vec<(u32, f64)>],
    members: Vec<usize>,
    /// Position of each graph node in `members`, `u32::MAX` if absent.
    local: Vec<u32>,
    /// `sqrt(l_i)` per member, the eigenvector of `N` for eigenvalue 1 up to
    /// scale.
    sqrt_strength: Vec<f64>,
}

impl<'a> NormalizedAdjacency<'a> {
    pub fn new(pg: &'a ProjectedGraph) -> Result<Self> {
        check_strengths(pg)?;
        Ok(Self::restricted(pg, (0..pg.len()).collect()))
    }

    /// Operator restricted to the nodes in `members` (ascending), which must
    /// be a union of connected components.
    pub(crate) fn restricted(pg: &'a ProjectedGraph, members: Vec<usize>) -> Self {
        let mut local = vec![u32::MAX; pg.len()];
        for (pos, &i) in members.iter().enumerate() {
            local[i] = pos as u32;
        }
        let sqrt_strength = members.iter().map(|&i| pg.strengths[i].sqrt()).collect();
        Self {
            rows: &pg.rows,
            members,
            local,
            sqrt_strength,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `y = N x`, computed as `D^-1/2 C (D^-1/2 x)`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z: Vec<f64> = x.iter().zip(&self.sqrt_strength).map(|(a, s)| a / s).collect();
        for ((yi, &i), s) in y.iter_mut().zip(&self.members).zip(&self.sqrt_strength) {
            let sum: f64 = self.rows[i].iter().map(|&(j, c)| c * z[self.local[j as usize] as usize]).sum();
            *yi = sum / s;
        }
    }

    pub fn sqrt_strength(&self) -> &[f64] {
        &self.sqrt_strength
    }

    /// Dense `L = I - N`.
    pub fn dense_laplacian(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::identity(n, n);
        for (pos, &i) in self.members.iter().enumerate() {
            for &(j, c) in &self.rows[i] {
                let q = self.local[j as usize] as usize;
                m[(pos, q)] = -c / (self.sqrt_strength[pos] * self.sqrt_strength[q]);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::communities::projection::CommonsRule;
    use crate::model::Partition;

    fn pg(rows: Vec<Vec<(u32, f64)>>) -> ProjectedGraph {
        ProjectedGraph::from_rows(Partition::Agents, CommonsRule::Min, rows).unwrap()
    }

    #[test]
    fn single_edge_matrix() {
        let l = laplacian(&pg(vec![vec![(1, 7.0)], vec![(0, 7.0)]]), 10).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn diagonal_is_one_and_rows_match_operator() {
        let g = pg(vec![vec![(1, 1.0), (2, 3.0)], vec![(0, 1.0)], vec![(0, 3.0)]]);
        let l = laplacian(&g, 10).unwrap();
        for i in 0..3 {
            assert_eq!(l[(i, i)], 1.0);
        }
        assert!((l[(0, 2)] + 3.0 / (4.0f64 * 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(l, l.transpose());
        let op = NormalizedAdjacency::new(&g).unwrap();
        assert!((op.dense_laplacian() - &l).abs().max() < 1e-14);
        // sqrt(l) is annihilated by L.
        let mut y = vec![0.0; 3];
        op.apply(op.sqrt_strength(), &mut y);
        for (a, b) in y.iter().zip(op.sqrt_strength()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn limit_and_zero_strength_are_refused() {
        let g = pg(vec![vec![(1, 1.0)], vec![(0, 1.0)]]);
        assert!(matches!(laplacian(&g, 1), Err(Error::TooLarge { dim: 2, limit: 1 })));
        let mut bad = g.clone();
        bad.strengths[1] = 0.0;
        assert!(matches!(laplacian(&bad, 10), Err(Error::ZeroStrength(1))));
    }
}
