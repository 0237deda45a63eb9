//! The time-stepped agent rules.
//!
//! Random draws all come from one ChaCha8 stream seeded with the config seed,
//! in this order:
//!
//! * initialization: per initial agent `arousal, valence, g, delay`; per
//!   initial post `lifetime`;
//! * per step: per arriving agent `arousal, valence, g`; per exposed agent
//!   (ascending id) `delay`; per prompted agent (ascending id) `activation`
//!   and, if not activated, `delay`; per acting agent (ascending id) the
//!   action draws (`new-post`, then `lifetime` or `old-branch` + `choice`)
//!   followed by `delay`. The exposed-post choice uses rejection sampling and
//!   may take several draws.
//!
//! Synthetic driving is generated up front from a second ChaCha8 stream
//! (stream id 1) with the same seed, so the arrival series does not depend on
//! the model's draws.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Driving, SimConfig};
use super::driving::synthesize_driving;
use super::sampler::WeightTree;
use crate::analysis::series::{build_series, SeriesBundle};
use crate::dist::DiscreteDist;
use crate::dynamics::{self, ActivePost, ActiveRegionSnapshot, Fields};
use crate::error::Result;
use crate::model::{AgentId, CommentEvent, EmotionState, EventKind, Network, PostId, TimeBin};

/// What happened during one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepReport {
    pub time: TimeBin,
    pub arrivals: u32,
    pub exposed: u32,
    pub prompted: u32,
    pub acting: u32,
    /// Index range of this step's events in [`Simulation::events`].
    pub events_start: usize,
    pub events_end: usize,
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub events: Vec<CommentEvent>,
    pub network: Network,
    /// Series over bins `0..=steps_run`; bin 0 holds the initial links.
    pub series: SeriesBundle,
    pub steps_run: u64,
}

pub struct Simulation {
    config: SimConfig,
    rng: ChaCha8Rng,
    net: Network,
    events: Vec<CommentEvent>,
    arrivals: Arrivals,
    delay: DiscreteDist,
    lifetime: DiscreteDist,
    new_post: DiscreteDist,
    time: TimeBin,
    /// Per-agent step stamps used as "already marked this step" flags.
    exposed_at: Vec<TimeBin>,
    active_at: Vec<TimeBin>,
    /// Where each post currently is: exposure window, old, or expired.
    region: Vec<Region>,
    /// Posts with id below this have left the exposure window.
    exposed_from: usize,
    /// Doubled proposal weights for exposed-post selection: `1 + 2 N_p`, or
    /// `2 + 2 N_p` for active-region posts during a step. Zero outside the
    /// window.
    window: WeightTree,
    /// Doubled old-post weights `1 + 2 max(0, -Q)`; zero unless old and alive.
    old: WeightTree,
    /// Active-region posts inside the window for the current step.
    held: Vec<PostId>,
    is_held: Vec<bool>,
    expiry: BinaryHeap<Reverse<(TimeBin, u32)>>,
    finished: bool,
}

enum Arrivals {
    Constant(u32),
    Series(Vec<u32>),
}

impl Arrivals {
    /// New agents for step `t >= 1`; `None` once a finite series is exhausted.
    fn at(&self, t: TimeBin) -> Option<u32> {
        match self {
            Arrivals::Constant(p) => Some(*p),
            Arrivals::Series(s) => s.get((t - 1) as usize).copied(),
        }
    }
}

const NEVER: TimeBin = TimeBin::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Window,
    Old,
    Gone,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let arrivals = match &config.driving {
            Driving::Constant(p) => Arrivals::Constant(*p),
            Driving::Series { counts, .. } => Arrivals::Series(counts.clone()),
            Driving::Synthetic(spec) => {
                let mut stream = ChaCha8Rng::seed_from_u64(config.seed);
                stream.set_stream(1);
                Arrivals::Series(synthesize_driving(spec, config.steps as usize, &mut stream))
            }
        };
        let mut sim = Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            delay: config.delay_dist(),
            lifetime: config.lifetime_dist(),
            new_post: config.new_post_dist(),
            config,
            net: Network::new(),
            events: Vec::new(),
            arrivals,
            time: 0,
            exposed_at: Vec::new(),
            active_at: Vec::new(),
            region: Vec::new(),
            exposed_from: 0,
            window: WeightTree::default(),
            old: WeightTree::default(),
            held: Vec::new(),
            is_held: Vec::new(),
            expiry: BinaryHeap::new(),
            finished: false,
        };
        sim.initialize()?;
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn events(&self) -> &[CommentEvent] {
        &self.events
    }

    /// Last completed step (0 right after initialization).
    pub fn time(&self) -> TimeBin {
        self.time
    }

    pub fn is_finished(&self) -> bool {
        self.finished || self.time >= self.config.steps
    }

    fn push_agent(&mut self, emotion: EmotionState, g: f64, t: TimeBin) -> AgentId {
        let id = self.net.add_agent(emotion, g, t);
        self.exposed_at.push(NEVER);
        self.active_at.push(NEVER);
        id
    }

    /// Seeds `init_agents` agents on `init_posts` posts at bin 0: posts are
    /// authored round-robin, then every agent without a link comments on post
    /// `i mod init_posts`.
    fn initialize(&mut self) -> Result<()> {
        for _ in 0..self.config.init_agents {
            let a = self.rng.random::<f64>();
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let g = self.new_post.sample(&mut self.rng);
            let id = self.push_agent(EmotionState::new(a, v), g, 0);
            self.net.agents[id.index()].delay_remaining = self.delay.sample(&mut self.rng);
        }
        let n_agents = self.config.init_agents;
        if n_agents == 0 {
            return Ok(());
        }
        for j in 0..self.config.init_posts {
            self.new_post(AgentId(j % n_agents), 0)?;
        }
        if self.config.init_posts > 0 {
            for i in 0..n_agents {
                let agent = AgentId(i);
                if self.net.graph.agent_degree(agent) == 0 {
                    self.emit(0, agent, PostId(i % self.config.init_posts), EventKind::Comment)?;
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, time: TimeBin, agent: AgentId, post: PostId, kind: EventKind) -> Result<()> {
        let emotion = self.net.agents[agent.index()].emotion;
        let event = CommentEvent {
            time,
            agent,
            post,
            kind,
            arousal: emotion.arousal,
            valence: emotion.valence,
        };
        self.net.record_event(&event)?;
        self.events.push(event);
        self.refresh_weight(post);
        Ok(())
    }

    fn refresh_weight(&mut self, post: PostId) {
        let i = post.index();
        let state = &self.net.posts[i];
        match self.region[i] {
            Region::Window => {
                let held = u64::from(self.is_held[i]);
                self.window.set(i, 1 + held + 2 * u64::from(state.total_comments()));
            }
            Region::Old => {
                let negative = (-state.cumulative_charge()).max(0) as u64;
                self.old.set(i, 1 + 2 * negative);
            }
            Region::Gone => {}
        }
    }

    /// The posts active in the two bins preceding `t`.
    fn snapshot(&self, t: TimeBin) -> ActiveRegionSnapshot {
        let from = t.saturating_sub(2);
        let to = t.saturating_sub(1);
        let posts = self.net.active_posts(from, to).into_iter().filter_map(|p| {
            ActivePost::from_tally(p, &self.net.posts[p.index()].window(from, to))
        });
        ActiveRegionSnapshot::new(posts)
    }

    fn fields_for(&self, agent: AgentId, snapshot: &ActiveRegionSnapshot) -> Fields {
        let valence = self.net.agents[agent.index()].emotion.valence;
        let incident = self
            .net
            .graph
            .agent_links(agent)
            .iter()
            .filter_map(|&(p, w)| snapshot.get(p).map(|ap| (f64::from(w), ap)));
        dynamics::fields_for(valence, incident, snapshot)
    }

    /// Runs one step. Returns `None` when the run is over (step budget spent
    /// or driving series exhausted).
    pub fn step(&mut self) -> Result<Option<StepReport>> {
        if self.is_finished() {
            return Ok(None);
        }
        let t = self.time + 1;
        let Some(arrivals) = self.arrivals.at(t) else {
            self.finished = true;
            return Ok(None);
        };
        let params = self.config.map;
        let snapshot = self.snapshot(t);
        let mut report = StepReport {
            time: t,
            arrivals,
            events_start: self.events.len(),
            ..StepReport::default()
        };
        let mut active: Vec<AgentId> = Vec::new();

        // (1) Arrivals: random emotion, one mean-field-only update, g, active.
        for _ in 0..arrivals {
            let a = self.rng.random::<f64>();
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let g = self.new_post.sample(&mut self.rng);
            let start = EmotionState::new(a, v);
            let fields = Fields {
                arousal_local: 0.0,
                arousal_mf: snapshot.arousal_mean_field(),
                valence_local: 0.0,
                valence_mf: snapshot.valence_mean_field(dynamics::polarity(v)),
            };
            let emotion = dynamics::update_emotion(start, &fields, &params, true);
            let id = self.push_agent(emotion, g, t);
            self.active_at[id.index()] = t;
            active.push(id);
        }

        // (2) Everyone relaxes.
        for agent in &mut self.net.agents {
            agent.emotion = dynamics::relax(agent.emotion, &params);
        }

        // (3) Agents linked to active posts are exposed and get a new delay.
        let mut exposed: Vec<AgentId> = Vec::new();
        for ap in snapshot.posts() {
            for &(agent, _) in self.net.graph.post_links(ap.post) {
                let stamp = &mut self.exposed_at[agent.index()];
                if *stamp != t {
                    *stamp = t;
                    exposed.push(agent);
                }
            }
        }
        exposed.sort_unstable();
        report.exposed = exposed.len() as u32;
        for &agent in &exposed {
            self.net.agents[agent.index()].delay_remaining = self.delay.sample(&mut self.rng);
        }

        // (4) Prompted agents update with their fields and may activate.
        let a0 = self.config.a0;
        for i in 0..self.net.agents.len() {
            let id = AgentId(i as u32);
            if self.active_at[i] == t || self.net.agents[i].delay_remaining >= 1.0 {
                continue;
            }
            report.prompted += 1;
            let fields = self.fields_for(id, &snapshot);
            let agent = &mut self.net.agents[i];
            agent.emotion = dynamics::update_emotion(agent.emotion, &fields, &params, true);
            let u: f64 = self.rng.random();
            if u < a0 * agent.emotion.arousal {
                self.active_at[i] = t;
                active.push(id);
            } else {
                agent.delay_remaining = self.delay.sample(&mut self.rng);
            }
        }

        // (5) Every active agent acts once, in ascending id order.
        active.sort_unstable();
        self.advance_exposure_window(t);
        for ap in snapshot.posts() {
            let i = ap.post.index();
            if self.region[i] == Region::Window {
                self.held.push(ap.post);
                self.is_held[i] = true;
                self.refresh_weight(ap.post);
            }
        }
        for &agent in &active {
            self.act(agent, t, &snapshot)?;
            self.net.agents[agent.index()].delay_remaining = self.delay.sample(&mut self.rng);
        }
        for post in std::mem::take(&mut self.held) {
            self.is_held[post.index()] = false;
            self.refresh_weight(post);
        }
        report.acting = active.len() as u32;

        // (6) Clocks of everyone else run down.
        for (i, agent) in self.net.agents.iter_mut().enumerate() {
            if self.active_at[i] != t {
                agent.delay_remaining = (agent.delay_remaining - 1.0).max(0.0);
            }
        }

        self.time = t;
        report.events_end = self.events.len();
        Ok(Some(report))
    }

    /// Drops expired posts from selection and moves posts older than `t0`
    /// from the exposure window to the old set.
    fn advance_exposure_window(&mut self, t: TimeBin) {
        while let Some(&Reverse((expires_after, id))) = self.expiry.peek() {
            if expires_after >= t {
                break;
            }
            self.expiry.pop();
            let i = id as usize;
            self.region[i] = Region::Gone;
            self.window.set(i, 0);
            self.old.set(i, 0);
        }
        let t0 = self.config.t0;
        while self.exposed_from < self.net.posts.len() && self.net.posts[self.exposed_from].age(t) > t0 {
            let i = self.exposed_from;
            if self.region[i] == Region::Window {
                self.region[i] = Region::Old;
                self.window.set(i, 0);
                self.refresh_weight(PostId(i as u32));
            }
            self.exposed_from += 1;
        }
    }

    fn act(&mut self, agent: AgentId, t: TimeBin, snapshot: &ActiveRegionSnapshot) -> Result<()> {
        let g = self.net.agents[agent.index()].new_post_prob;
        if self.rng.random::<f64>() < g {
            return self.new_post(agent, t);
        }
        let old_branch = self.rng.random::<f64>() < self.config.mu;
        let target = if old_branch {
            self.choose_old_post().or_else(|| self.choose_exposed_post(agent, snapshot))
        } else {
            self.choose_exposed_post(agent, snapshot)
        };
        match target {
            Some(post) => self.emit(t, agent, post, EventKind::Comment),
            None => self.new_post(agent, t),
        }
    }

    fn new_post(&mut self, agent: AgentId, t: TimeBin) -> Result<()> {
        let lifetime = self.lifetime.sample(&mut self.rng) as TimeBin;
        let post = self.net.create_post(agent, t, lifetime);
        self.window.push(0);
        self.old.push(0);
        self.region.push(Region::Window);
        self.is_held.push(false);
        self.expiry.push(Reverse((self.net.posts[post.index()].expires_after(), post.0)));
        self.emit(t, agent, post, EventKind::NewPost)
    }

    /// Old, unexpired posts weighted by `0.5 + |Q|` when the charge is
    /// negative and `0.5` otherwise. Consumes one draw when candidates exist.
    fn choose_old_post(&mut self) -> Option<PostId> {
        let total = self.old.total();
        if total == 0 {
            return None;
        }
        let target = self.rng.random_range(0..total);
        Some(PostId(self.old.find(target) as u32))
    }

    /// Posts inside the exposure window weighted by
    /// `0.5 (1 + v_p v_i) + N_p`, with `v_p` the window-mean valence (0 for
    /// posts not in the active region) and `N_p` the post's comment count.
    ///
    /// Draws from the proposal weights in the tree, which bound the target
    /// weights from above, and accepts active-region posts with probability
    /// `target / proposal >= 1/2`.
    fn choose_exposed_post(&mut self, agent: AgentId, snapshot: &ActiveRegionSnapshot) -> Option<PostId> {
        let v_i = self.net.agents[agent.index()].emotion.valence;
        let total = self.window.total();
        if total == 0 {
            return None;
        }
        loop {
            let i = self.window.find(self.rng.random_range(0..total));
            if !self.is_held[i] {
                return Some(PostId(i as u32));
            }
            let n_p = f64::from(self.net.posts[i].total_comments());
            let v_p = snapshot.get(PostId(i as u32)).map_or(0.0, |ap| ap.mean_valence);
            let weight = 0.5 * (1.0 + v_p * v_i) + n_p;
            if self.rng.random::<f64>() * (1.0 + n_p) < weight {
                return Some(PostId(i as u32));
            }
        }
    }

    pub fn run_to_end(mut self) -> Result<SimOutput> {
        while self.step()?.is_some() {}
        let n_bins = self.time as usize + 1;
        let series = build_series(&self.events, n_bins);
        Ok(SimOutput {
            series,
            steps_run: self.time,
            events: self.events,
            network: self.net,
        })
    }
}

/// Simulates `config` from scratch.
pub fn run(config: SimConfig) -> Result<SimOutput> {
    Simulation::new(config)?.run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::sim::config::DistSource;

    fn small(steps: u64, seed: u64) -> SimConfig {
        SimConfig {
            steps,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn initialization_links_every_agent() {
        let sim = Simulation::new(small(1, 0)).unwrap();
        let net = sim.network();
        assert_eq!(net.agents.len(), 10);
        assert_eq!(net.posts.len(), 10);
        assert!((0..10).all(|i| net.graph.agent_degree(AgentId(i)) >= 1));
        assert!(sim.events().iter().all(|e| e.time == 0));
    }

    #[test]
    fn same_seed_same_log() {
        let a = run(small(300, 3)).unwrap();
        let b = run(small(300, 3)).unwrap();
        assert_eq!(a.events, b.events);
        let c = run(small(300, 4)).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn no_driving_and_no_activation_means_silence() {
        let cfg = SimConfig {
            a0: 0.0,
            driving: Driving::Constant(0),
            ..small(200, 1)
        };
        let out = run(cfg).unwrap();
        assert!(out.events.iter().all(|e| e.time == 0));
        assert!(out.series.n_c[1..].iter().all(|&n| n == 0));
    }

    #[test]
    fn single_exposed_post_receives_the_comment() {
        let cfg = SimConfig {
            a0: 1.0,
            mu: 0.0,
            init_agents: 1,
            init_posts: 1,
            driving: Driving::Constant(0),
            new_post: DistSource::Table {
                path: None,
                dist: DiscreteDist::point_mass(0.0),
            },
            delay: DistSource::Table {
                path: None,
                dist: DiscreteDist::point_mass(1.0),
            },
            ..small(50, 11)
        };
        let out = run(cfg).unwrap();
        assert_eq!(out.network.posts.len(), 1);
        assert!(out.events.len() > 1, "agent never acted");
        assert!(out.events.iter().all(|e| e.post == PostId(0)));
    }

    #[test]
    fn events_per_step_equal_acting_agents() {
        let mut sim = Simulation::new(small(400, 8)).unwrap();
        while let Some(r) = sim.step().unwrap() {
            assert_eq!(r.events_end - r.events_start, r.acting as usize);
            assert!(r.acting >= r.arrivals);
            for e in &sim.events()[r.events_start..r.events_end] {
                assert_eq!(e.time, r.time);
            }
        }
        assert_eq!(sim.network().graph.total_weight() as usize, sim.events().len());
        assert!(sim.network().agents.iter().all(|a| a.emotion.is_valid() && a.delay_remaining >= 0.0));
    }

    #[test]
    fn comments_respect_exposure_window_and_lifetimes() {
        let cfg = SimConfig {
            t0: 20,
            mu: 0.3,
            lifetime: DistSource::Table {
                path: None,
                dist: DiscreteDist::from_pairs([(30.0, 0.5), (200.0, 0.5)]).unwrap(),
            },
            ..small(600, 2)
        };
        let out = run(cfg).unwrap();
        let mut old_hits = 0;
        for e in &out.events {
            let post = &out.network.posts[e.post.index()];
            assert!(!post.is_expired(e.time));
            if post.age(e.time) > 20 {
                old_hits += 1;
            }
        }
        assert!(old_hits > 0, "old-post branch never used");
    }

    #[test]
    fn empirical_series_ends_the_run() {
        let cfg = SimConfig {
            driving: Driving::Series {
                path: None,
                counts: vec![1, 0, 2, 5],
            },
            ..small(100, 0)
        };
        let out = run(cfg).unwrap();
        assert_eq!(out.steps_run, 4);
        assert_eq!(out.series.n_c.len(), 5);
        assert_eq!(out.network.agents.len(), 10 + 8);
    }
}
