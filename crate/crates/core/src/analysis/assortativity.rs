//! Degree–degree correlations across the bipartite graph: for each degree `k`
//! on one side, the mean degree of the neighbors on the other side.

use std::collections::BTreeMap;

use super::spectrum::weighted_line_fit;
use crate::model::{BipartiteGraph, Partition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnPoint {
    pub k: u64,
    /// Mean over nodes of degree `k` of their neighbors' mean degree.
    pub knn: f64,
    pub nodes: u64,
}

/// `k_nn(k)` for nodes on `side`, ascending in `k`. Isolated nodes are skipped.
pub fn knn_curve(graph: &BipartiteGraph, side: Partition) -> Vec<KnnPoint> {
    let other = side.other();
    let mut acc: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for i in 0..graph.side_len(side) {
        let nbrs = graph.neighbors(side, i);
        if nbrs.is_empty() {
            continue;
        }
        let mean = nbrs.iter().map(|&(j, _)| graph.degree(other, j) as f64).sum::<f64>() / nbrs.len() as f64;
        let e = acc.entry(nbrs.len() as u64).or_insert((0.0, 0));
        e.0 += mean;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (sum, n))| KnnPoint {
            k,
            knn: sum / n as f64,
            nodes: n,
        })
        .collect()
}

/// Both directions: agents' post-neighbors, then posts' agent-neighbors.
pub fn assortativity(graph: &BipartiteGraph) -> (Vec<KnnPoint>, Vec<KnnPoint>) {
    (knn_curve(graph, Partition::Agents), knn_curve(graph, Partition::Posts))
}

/// Log–log slope of `k_nn(k)` over `k <= k_max`, each point weighted by its
/// node count. `None` with fewer than three points.
pub fn knn_slope(curve: &[KnnPoint], k_max: u64) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64, f64)> = curve
        .iter()
        .filter(|p| p.k <= k_max && p.knn > 0.0)
        .map(|p| ((p.k as f64).ln(), p.knn.ln(), p.nodes as f64))
        .collect();
    weighted_line_fit(&pts).map(|(slope, _, se)| (slope, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, PostId};

    #[test]
    fn complete_bipartite_is_flat() {
        let (n, m) = (4u32, 7u32);
        let g = BipartiteGraph::from_edges((0..n).flat_map(|a| (0..m).map(move |p| (AgentId(a), PostId(p), 1))));
        let (agents, posts) = assortativity(&g);
        assert_eq!(agents, vec![KnnPoint { k: 7, knn: 4.0, nodes: 4 }]);
        assert_eq!(posts, vec![KnnPoint { k: 4, knn: 7.0, nodes: 7 }]);
    }

    #[test]
    fn single_edge() {
        let g = BipartiteGraph::from_edges([(AgentId(0), PostId(0), 5)]);
        let (agents, posts) = assortativity(&g);
        assert_eq!(agents, vec![KnnPoint { k: 1, knn: 1.0, nodes: 1 }]);
        assert_eq!(posts, agents);
    }

    #[test]
    fn star_with_a_tail() {
        // Agent 0 on posts 0,1; agents 1,2 on post 0 only.
        let g = BipartiteGraph::from_edges([
            (AgentId(0), PostId(0), 1),
            (AgentId(0), PostId(1), 1),
            (AgentId(1), PostId(0), 1),
            (AgentId(2), PostId(0), 1),
        ]);
        let agents = knn_curve(&g, Partition::Agents);
        // Agents of degree 1 see post 0 (degree 3); agent 0 sees (3 + 1) / 2.
        assert_eq!(agents[0], KnnPoint { k: 1, knn: 3.0, nodes: 2 });
        assert_eq!(agents[1], KnnPoint { k: 2, knn: 2.0, nodes: 1 });
        let posts = knn_curve(&g, Partition::Posts);
        assert_eq!(posts[0], KnnPoint { k: 1, knn: 2.0, nodes: 1 });
        assert!((posts[1].knn - 4.0 / 3.0).abs() < 1e-15);
    }
}
