//! One-mode projection of the bipartite graph: two nodes on the same side are
//! linked by the posts (or agents) they share, weighted by the commons rule.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{BipartiteGraph, Partition};

/// How the link weights of a shared neighbor combine into a commons weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommonsRule {
    /// `min(w_ip, w_jp)`: the number of interactions both nodes have in common.
    #[default]
    Min,
    /// `w_ip * w_jp`.
    Product,
}

impl CommonsRule {
    fn combine(self, a: u32, b: u32) -> f64 {
        match self {
            CommonsRule::Min => a.min(b) as f64,
            CommonsRule::Product => a as f64 * b as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CommonsRule::Min => "min",
            CommonsRule::Product => "product",
        }
    }
}

impl FromStr for CommonsRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(CommonsRule::Min),
            "product" => Ok(CommonsRule::Product),
            other => Err(Error::Config(format!("unknown commons rule {other:?}; expected min or product"))),
        }
    }
}

/// Nodes are kept when their bipartite degree exceeds `min_degree` and their
/// bipartite strength exceeds `min_strength`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NodeFilter {
    pub min_degree: usize,
    pub min_strength: u64,
}

impl NodeFilter {
    pub fn degree_above(min_degree: usize) -> Self {
        Self {
            min_degree,
            min_strength: 0,
        }
    }

    pub fn strength_above(min_strength: u64) -> Self {
        Self {
            min_degree: 0,
            min_strength,
        }
    }

    pub fn keeps(&self, graph: &BipartiteGraph, side: Partition, i: usize) -> bool {
        graph.degree(side, i) > self.min_degree && graph.strength(side, i) > self.min_strength
    }
}

/// Weighted one-mode graph stored as sorted sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGraph {
    pub side: Partition,
    pub rule: CommonsRule,
    /// Original index on `side` of each retained node, ascending.
    pub nodes: Vec<usize>,
    /// Row `i` lists `(j, C_ij)` for `j != i` with `C_ij > 0`, ascending in `j`.
    pub rows: Vec<Vec<(u32, f64)>>,
    /// `l_i = sum_j C_ij`, all positive.
    pub strengths: Vec<f64>,
}

impl ProjectedGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of stored off-diagonal entries (each link counted twice).
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        match row.binary_search_by_key(&(j as u32), |&(k, _)| k) {
            Ok(pos) => row[pos].1,
            Err(_) => 0.0,
        }
    }

    /// Builds a projected graph from explicit symmetric rows. Intended for
    /// tests and for callers that assemble commons weights themselves.
    pub fn from_rows(side: Partition, rule: CommonsRule, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Config(format!("row {i} repeats column {}", w[0].0)));
                }
            }
            for &(j, c) in row.iter() {
                if j as usize >= n || j as usize == i || !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("invalid entry ({i}, {j}) = {c}")));
                }
            }
        }
        let g = Self {
            side,
            rule,
            nodes: (0..n).collect(),
            strengths: rows.iter().map(|r| r.iter().map(|&(_, c)| c).sum()).collect(),
            rows,
        };
        for i in 0..n {
            for &(j, c) in &g.rows[i] {
                if g.weight(j as usize, i) != c {
                    return Err(Error::Config(format!("entry ({i}, {j}) is not symmetric")));
                }
            }
        }
        if let Some(i) = g.strengths.iter().position(|&l| l <= 0.0) {
            return Err(Error::ZeroStrength(i));
        }
        Ok(g)
    }

    /// Connected-component label of every node, numbered in order of the
    /// lowest node index in each component.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for &(j, _) in &self.rows[i] {
                    let j = j as usize;
                    if label[j] == usize::MAX {
                        label[j] = count;
                        stack.push(j);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Same graph with every weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for e in row.iter_mut() {
                e.1 *= factor;
            }
        }
        for l in &mut out.strengths {
            *l *= factor;
        }
        out
    }
}

/// Projects `graph` onto `side`. Nodes failing `filter` are removed first;
/// retained nodes left without any commons are then dropped as well, since
/// they would have zero strength.
pub fn project(graph: &BipartiteGraph, side: Partition, filter: NodeFilter, rule: CommonsRule) -> Result<ProjectedGraph> {
    let n_side = graph.side_len(side);
    if n_side == 0 || graph.n_edges() == 0 {
        return Err(Error::Empty("graph has no links to project"));
    }
    let other = side.other();
    let kept: Vec<usize> = (0..n_side).filter(|&i| filter.keeps(graph, side, i)).collect();
    let mut position = vec![u32::MAX; n_side];
    for (pos, &i) in kept.iter().enumerate() {
        position[i] = pos as u32;
    }
    let mut acc = vec![0.0f64; kept.len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut rows = Vec::with_capacity(kept.len());
    for (pos, &i) in kept.iter().enumerate() {
        for (p, w_ip) in graph.neighbors(side, i) {
            for (j, w_jp) in graph.neighbors(other, p) {
                let q = position[j];
                if q == u32::MAX || q as usize == pos {
                    continue;
                }
                if acc[q as usize] == 0.0 {
                    touched.push(q);
                }
                acc[q as usize] += rule.combine(w_ip, w_jp);
            }
        }
        touched.sort_unstable();
        rows.push(touched.iter().map(|&q| (q, std::mem::take(&mut acc[q as usize]))).collect::<Vec<_>>());
        touched.clear();
    }

    // Drop nodes left without commons and renumber.
    let mut renumber = vec![u32::MAX; kept.len()];
    let mut nodes = Vec::new();
    for (pos, row) in rows.iter().enumerate() {
        if !row.is_empty() {
            renumber[pos] = nodes.len() as u32;
            nodes.push(kept[pos]);
        }
    }
    if nodes.is_empty() {
        return Err(Error::Empty("no node survives the filter with a nonzero commons weight"));
    }
    let rows: Vec<Vec<(u32, f64)>> = rows
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.into_iter().map(|(q, c)| (renumber[q as usize], c)).collect())
        .collect();
    let strengths = rows.iter().map(|r| r.iter().map(|&(_, c)| c).sum()).collect();
    Ok(ProjectedGraph {
        side,
        rule,
        nodes,
        rows,
        strengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, PostId};
    use proptest::prelude::*;

    fn g(edges: &[(u32, u32, u32)]) -> BipartiteGraph {
        BipartiteGraph::from_edges(edges.iter().map(|&(a, p, w)| (AgentId(a), PostId(p), w)))
    }

    #[test]
    fn min_rule_on_a_shared_post() {
        let pg = project(&g(&[(0, 0, 3), (1, 0, 2)]), Partition::Agents, NodeFilter::default(), CommonsRule::Min).unwrap();
        assert_eq!(pg.rows, vec![vec![(1, 2.0)], vec![(0, 2.0)]]);
        assert_eq!(pg.strengths, vec![2.0, 2.0]);
        let pg = project(&g(&[(0, 0, 3), (1, 0, 2)]), Partition::Agents, NodeFilter::default(), CommonsRule::Product).unwrap();
        assert_eq!(pg.weight(0, 1), 6.0);
    }

    #[test]
    fn disjoint_posts_have_no_commons() {
        let graph = g(&[(0, 0, 1), (1, 1, 1), (2, 1, 1)]);
        let pg = project(&graph, Partition::Agents, NodeFilter::default(), CommonsRule::Min).unwrap();
        // Agent 0 has nothing in common with anyone and is dropped.
        assert_eq!(pg.nodes, vec![1, 2]);
        assert!(project(&g(&[(0, 0, 1), (1, 1, 1)]), Partition::Agents, NodeFilter::default(), CommonsRule::Min).is_err());
    }

    #[test]
    fn one_post_gives_a_clique() {
        let pg = project(&g(&[(0, 0, 1), (1, 0, 1), (2, 0, 1)]), Partition::Agents, NodeFilter::default(), CommonsRule::Min)
            .unwrap();
        assert_eq!(pg.rows, vec![vec![(1, 1.0), (2, 1.0)], vec![(0, 1.0), (2, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        assert_eq!(pg.components(), (1, vec![0, 0, 0]));
    }

    #[test]
    fn filters_apply_before_projection() {
        // Agent 0 touches two posts, agents 1 and 2 one each.
        let graph = g(&[(0, 0, 1), (0, 1, 4), (1, 0, 1), (2, 1, 1), (1, 1, 1)]);
        let pg = project(&graph, Partition::Agents, NodeFilter::degree_above(1), CommonsRule::Min).unwrap();
        assert_eq!(pg.nodes, vec![0, 1]);
        assert_eq!(pg.weight(0, 1), 2.0);
        let pg = project(&graph, Partition::Posts, NodeFilter::strength_above(3), CommonsRule::Min);
        // Only post 1 (strength 6) survives and it has no partner.
        assert!(pg.is_err());
    }

    #[test]
    fn from_rows_validates() {
        assert!(ProjectedGraph::from_rows(Partition::Agents, CommonsRule::Min, vec![vec![(1, 1.0)], vec![(0, 2.0)]]).is_err());
        assert!(ProjectedGraph::from_rows(Partition::Agents, CommonsRule::Min, vec![vec![(0, 1.0)]]).is_err());
        assert!(ProjectedGraph::from_rows(Partition::Agents, CommonsRule::Min, vec![vec![(1, 1.0)], vec![(0, 1.0)]]).is_ok());
    }

    fn edges() -> impl Strategy<Value = Vec<(u32, u32, u32)>> {
        proptest::collection::vec((0u32..12, 0u32..12, 1u32..5), 1..60)
    }

    proptest! {
        #[test]
        fn mirror_swaps_partitions(e in edges(), min_degree in 0usize..3, rule in prop_oneof![Just(CommonsRule::Min), Just(CommonsRule::Product)]) {
            let graph = g(&e);
            let filter = NodeFilter::degree_above(min_degree);
            let a = project(&graph, Partition::Agents, filter, rule);
            let b = project(&graph.mirrored(), Partition::Posts, filter, rule);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(&a.nodes, &b.nodes);
                    prop_assert_eq!(&a.rows, &b.rows);
                    prop_assert_eq!(&a.strengths, &b.strengths);
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_ok(), b.is_ok()),
            }
        }

        #[test]
        fn projection_is_symmetric_with_zero_diagonal(e in edges()) {
            if let Ok(pg) = project(&g(&e), Partition::Agents, NodeFilter::default(), CommonsRule::Min) {
                for i in 0..pg.len() {
                    prop_assert_eq!(pg.weight(i, i), 0.0);
                    prop_assert!(pg.strengths[i] > 0.0);
                    for &(j, c) in &pg.rows[i] {
                        prop_assert_eq!(pg.weight(j as usize, i), c);
                    }
                }
            }
        }
    }
}
