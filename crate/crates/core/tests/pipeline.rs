//! Library-level runs through simulation, inference, analysis and community
//! extraction.

use emoblog::analysis::{build_series, circumplex_point, power_spectrum};
use emoblog::communities::{
    extract_communities, laplacian_spectrum, project, ClusterOptions, CommonsRule, NodeFilter, SpectrumOptions,
};
use emoblog::event_log::{read_edges, read_log, write_edges, write_events, LogRecord};
use emoblog::infer::{infer_delay_distribution, infer_mu, EmpiricalLog};
use emoblog::sim::{run, Driving, SimConfig};
use emoblog::{AgentId, BipartiteGraph, Partition, PostId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

fn short_run(seed: u64) -> emoblog::sim::SimOutput {
    run(SimConfig {
        seed,
        steps: 600,
        driving: Driving::Constant(6),
        ..SimConfig::default()
    })
    .expect("simulation")
}

#[test]
fn logs_round_trip_and_reproduce_the_series() {
    let out = short_run(11);
    let mut bytes = Vec::new();
    write_events(&mut bytes, &out.events).unwrap();
    let records = read_log(bytes.as_slice(), Path::new("memory")).unwrap();
    assert_eq!(records.len(), out.events.len());
    let events: Vec<_> = records.iter().map(LogRecord::to_event).collect();
    assert_eq!(events, out.events);
    assert_eq!(build_series(&events, out.series.len()), out.series);

    let mut edges = Vec::new();
    write_edges(&mut edges, &out.network.graph).unwrap();
    let graph = read_edges(edges.as_slice(), Path::new("memory")).unwrap();
    assert_eq!(graph.n_edges(), out.network.graph.n_edges());
}

#[test]
fn inference_on_a_simulated_log() {
    let out = short_run(12);
    let log = EmpiricalLog::new(out.events.iter().map(LogRecord::from).collect()).unwrap();
    let delay = infer_delay_distribution(&log).unwrap();
    assert!((delay.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(delay.values().iter().all(|&d| d >= 1.0));
    let mu = infer_mu(&log, 100).unwrap();
    assert!((0.0..=1.0).contains(&mu));
}

#[test]
fn simulated_actions_stay_on_the_circumplex_disk() {
    let out = short_run(13);
    for e in &out.events {
        let (x, y) = circumplex_point(e.arousal, e.valence);
        assert!(x * x + y * y <= 1.0 + 1e-12);
    }
    let nc: Vec<f64> = out.series.n_c[1..].iter().map(|&c| c as f64).collect();
    let fit = power_spectrum(&nc, 1.3).unwrap().fit(1.0 / 500.0, 1.0 / 24.0).unwrap();
    assert!(fit.phi.is_finite());
}

/// Agents split into groups that comment only inside their own block of
/// posts, apart from occasional strays.
fn planted(blocks: usize, seed: u64) -> (BipartiteGraph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (agents_per, posts_per) = (40usize, 20usize);
    let mut edges = Vec::new();
    let mut truth = Vec::new();
    for b in 0..blocks {
        for i in 0..agents_per {
            let agent = AgentId((b * agents_per + i) as u32);
            truth.push(b);
            for _ in 0..6 {
                let post = PostId((b * posts_per + rng.random_range(0..posts_per)) as u32);
                edges.push((agent, post, rng.random_range(1..3)));
            }
            if rng.random::<f64>() < 0.15 {
                edges.push((agent, PostId(rng.random_range(0..blocks * posts_per) as u32), 1));
            }
        }
    }
    (BipartiteGraph::from_edges(edges), truth)
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut map = std::collections::HashMap::new();
    a.iter().zip(b).all(|(x, y)| *map.entry(*x).or_insert(*y) == *y)
}

#[test]
fn planted_blocks_are_recovered() {
    let (graph, truth) = planted(4, 21);
    let pg = project(&graph, Partition::Agents, NodeFilter::default(), CommonsRule::Min).unwrap();
    let spectrum = laplacian_spectrum(&pg, &SpectrumOptions::default()).unwrap();
    let found = extract_communities(&spectrum, &ClusterOptions::default()).unwrap();
    assert_eq!(found.k, 4);
    let truth: Vec<usize> = pg.nodes.iter().map(|&a| truth[a]).collect();
    let agree = (0..truth.len()).filter(|&i| {
        let mut votes = [0usize; 4];
        for j in 0..truth.len() {
            if found.labels[j] == found.labels[i] {
                votes[truth[j]] += 1;
            }
        }
        votes.iter().enumerate().max_by_key(|v| v.1).unwrap().0 == truth[i]
    });
    assert!(agree.count() as f64 >= 0.95 * truth.len() as f64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assignments_ignore_weight_scale(seed in 0u64..1000, factor in 0.01f64..100.0) {
        let (graph, _) = planted(3, seed);
        let pg = project(&graph, Partition::Agents, NodeFilter::default(), CommonsRule::Min).unwrap();
        let opts = SpectrumOptions::default();
        let a = extract_communities(&laplacian_spectrum(&pg, &opts).unwrap(), &ClusterOptions::default()).unwrap();
        let b = extract_communities(&laplacian_spectrum(&pg.scaled(factor), &opts).unwrap(), &ClusterOptions::default()).unwrap();
        prop_assert_eq!(a.k, b.k);
        prop_assert!(same_partition(&a.labels, &b.labels) && same_partition(&b.labels, &a.labels));
    }
}
