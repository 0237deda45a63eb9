//! Time series restricted to the agents of each community.

use crate::analysis::{build_series, SeriesBundle};
use crate::model::CommentEvent;

/// Per-community series plus one for every agent outside all communities.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunitySeries {
    /// Index `c` holds the series of community `c`.
    pub communities: Vec<SeriesBundle>,
    pub other: SeriesBundle,
}

/// Splits `events` by the community of the acting agent. `agent_labels[a]`
/// is the community of agent `a`, or `None` for agents left out of the
/// projection; agents beyond the slice count as `other`.
pub fn community_series(
    agent_labels: &[Option<usize>],
    k: usize,
    events: &[CommentEvent],
    n_bins: usize,
) -> CommunitySeries {
    let mut groups: Vec<Vec<CommentEvent>> = vec![Vec::new(); k];
    let mut other = Vec::new();
    for e in events {
        match agent_labels.get(e.agent.index()).copied().flatten() {
            Some(c) if c < k => groups[c].push(*e),
            _ => other.push(*e),
        }
    }
    CommunitySeries {
        communities: groups.iter().map(|g| build_series(g, n_bins)).collect(),
        other: build_series(&other, n_bins),
    }
}

/// `agent_labels` for [`community_series`] from a projection's node list and
/// the labels assigned to those nodes.
pub fn labels_by_agent(nodes: &[usize], labels: &[usize], n_agents: usize) -> Vec<Option<usize>> {
    let mut out = vec![None; n_agents];
    for (&node, &label) in nodes.iter().zip(labels) {
        if node < n_agents {
            out[node] = Some(label);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AgentId, EventKind, PostId};
    use proptest::prelude::*;

    fn ev(time: u64, agent: u32, valence: f64) -> CommentEvent {
        CommentEvent {
            time,
            agent: AgentId(agent),
            post: PostId(0),
            kind: EventKind::Comment,
            arousal: 0.5,
            valence,
        }
    }

    #[test]
    fn one_community_reproduces_the_global_series() {
        let events = vec![ev(0, 0, 0.3), ev(0, 1, -0.2), ev(2, 1, -0.4)];
        let s = community_series(&[Some(0), Some(0)], 1, &events, 3);
        assert_eq!(s.communities[0], build_series(&events, 3));
        assert_eq!(s.other, build_series(&[], 3));
    }

    #[test]
    fn label_lookup() {
        assert_eq!(labels_by_agent(&[3, 1], &[0, 1], 5), vec![None, Some(1), None, Some(0), None]);
    }

    proptest! {
        #[test]
        fn charges_add_up(
            raw in proptest::collection::vec((0u64..20, 0u32..15, -1.0f64..1.0), 0..200),
            labels in proptest::collection::vec(proptest::option::of(0usize..3), 0..15),
        ) {
            let events: Vec<CommentEvent> = raw.iter().map(|&(t, a, v)| ev(t, a, v)).collect();
            let s = community_series(&labels, 3, &events, 20);
            let global = build_series(&events, 20);
            for t in 0..20 {
                let q: i64 = s.communities.iter().map(|c| c.q[t]).sum::<i64>() + s.other.q[t];
                let n: i64 = s.communities.iter().map(|c| c.n_c[t]).sum::<i64>() + s.other.n_c[t];
                prop_assert_eq!(q, global.q[t]);
                prop_assert_eq!(n, global.n_c[t]);
            }
        }
    }
}
