//! Domain types shared by the simulator and the analysis pipeline.
//!
//! The network is bipartite: agents (bloggers) only ever link to posts, and
//! the weight of a link is the number of actions the agent took on the post.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One simulation step. One bin corresponds to five minutes of real time.
pub type TimeBin = u64;

/// Valences inside `(-NEUTRAL_BAND, NEUTRAL_BAND)` are neutral.
pub const NEUTRAL_BAND: f64 = 0.01;

/// Per-bin ledgers older than this many bins are folded into the running totals.
pub const LEDGER_RETENTION: TimeBin = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AgentId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PostId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl PostId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arousal in `[0, 1]` and valence in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmotionState {
    pub arousal: f64,
    pub valence: f64,
}

impl EmotionState {
    /// Builds a state, clamping both components into their intervals.
    pub fn new(arousal: f64, valence: f64) -> Self {
        Self {
            arousal: arousal.clamp(0.0, 1.0),
            valence: valence.clamp(-1.0, 1.0),
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.arousal) && (-1.0..=1.0).contains(&self.valence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValenceClass {
    Positive,
    Negative,
    Neutral,
}

impl ValenceClass {
    pub fn of(valence: f64) -> Self {
        if valence > NEUTRAL_BAND {
            ValenceClass::Positive
        } else if valence < -NEUTRAL_BAND {
            ValenceClass::Negative
        } else {
            ValenceClass::Neutral
        }
    }

    /// Contribution to the charge: +1, -1 or 0.
    pub fn charge(self) -> i64 {
        match self {
            ValenceClass::Positive => 1,
            ValenceClass::Negative => -1,
            ValenceClass::Neutral => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    NewPost,
    Comment,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::NewPost => "new_post",
            EventKind::Comment => "comment",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "new_post" => Ok(EventKind::NewPost),
            "comment" => Ok(EventKind::Comment),
            other => Err(format!("unknown event kind {other:?}")),
        }
    }
}

/// An action: the agent's emotion at the moment of acting is stamped on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommentEvent {
    pub time: TimeBin,
    pub agent: AgentId,
    pub post: PostId,
    pub kind: EventKind,
    pub arousal: f64,
    pub valence: f64,
}

impl CommentEvent {
    pub fn valence_class(&self) -> ValenceClass {
        ValenceClass::of(self.valence)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub emotion: EmotionState,
    /// Bins left until the agent is prompted; never negative.
    pub delay_remaining: f64,
    /// Probability of starting a new post instead of commenting, fixed at arrival.
    pub new_post_prob: f64,
    pub arrival_time: TimeBin,
}

/// Comment counts and emotion sums collected on one post over some set of bins.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BinTally {
    pub n_comments: u32,
    pub sum_arousal: f64,
    pub sum_valence: f64,
    pub n_pos: u32,
    pub n_neg: u32,
}

impl BinTally {
    pub fn add_event(&mut self, arousal: f64, valence: f64) {
        self.n_comments += 1;
        self.sum_arousal += arousal;
        self.sum_valence += valence;
        match ValenceClass::of(valence) {
            ValenceClass::Positive => self.n_pos += 1,
            ValenceClass::Negative => self.n_neg += 1,
            ValenceClass::Neutral => {}
        }
    }

    pub fn merge(&mut self, other: &BinTally) {
        self.n_comments += other.n_comments;
        self.sum_arousal += other.sum_arousal;
        self.sum_valence += other.sum_valence;
        self.n_pos += other.n_pos;
        self.n_neg += other.n_neg;
    }

    pub fn charge(&self) -> i64 {
        i64::from(self.n_pos) - i64::from(self.n_neg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostState {
    pub id: PostId,
    pub author: AgentId,
    pub created_at: TimeBin,
    /// Lifetime in bins; the post expires once `now > created_at + lifetime`.
    pub lifetime: TimeBin,
    ledger: BTreeMap<TimeBin, BinTally>,
    compacted: BinTally,
    cumulative_charge: i64,
}

impl PostState {
    pub fn new(id: PostId, author: AgentId, created_at: TimeBin, lifetime: TimeBin) -> Self {
        Self {
            id,
            author,
            created_at,
            lifetime,
            ledger: BTreeMap::new(),
            compacted: BinTally::default(),
            cumulative_charge: 0,
        }
    }

    pub fn expires_after(&self) -> TimeBin {
        self.created_at.saturating_add(self.lifetime)
    }

    pub fn is_expired(&self, now: TimeBin) -> bool {
        now > self.expires_after()
    }

    pub fn age(&self, now: TimeBin) -> TimeBin {
        now.saturating_sub(self.created_at)
    }

    /// Q_j: positive minus negative comments over the whole life of the post.
    pub fn cumulative_charge(&self) -> i64 {
        self.cumulative_charge
    }

    /// Totals over every bin, compacted or not.
    pub fn totals(&self) -> BinTally {
        let mut total = self.compacted;
        for tally in self.ledger.values() {
            total.merge(tally);
        }
        total
    }

    pub fn total_comments(&self) -> u32 {
        self.compacted.n_comments + self.ledger.values().map(|t| t.n_comments).sum::<u32>()
    }

    /// Sum of the retained per-bin tallies with `from <= bin <= to`.
    pub fn window(&self, from: TimeBin, to: TimeBin) -> BinTally {
        let mut acc = BinTally::default();
        if from > to {
            return acc;
        }
        for tally in self.ledger.range(from..=to).map(|(_, t)| t) {
            acc.merge(tally);
        }
        acc
    }

    /// Retained (uncompacted) bins.
    pub fn ledger(&self) -> &BTreeMap<TimeBin, BinTally> {
        &self.ledger
    }

    fn record(&mut self, time: TimeBin, arousal: f64, valence: f64) {
        self.ledger.entry(time).or_default().add_event(arousal, valence);
        self.cumulative_charge += ValenceClass::of(valence).charge();
        let horizon = time.saturating_sub(LEDGER_RETENTION);
        while let Some(entry) = self.ledger.first_entry() {
            if *entry.key() >= horizon {
                break;
            }
            let tally = entry.remove();
            self.compacted.merge(&tally);
        }
    }
}

/// Weighted agent–post adjacency. Both sides are kept in insertion order so
/// iteration is deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BipartiteGraph {
    agent_links: Vec<Vec<(PostId, u32)>>,
    post_links: Vec<Vec<(AgentId, u32)>>,
    slots: HashMap<(u32, u32), (u32, u32)>,
    total_weight: u64,
}

impl BipartiteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from `(agent, post, weight)` triples. Node counts grow to
    /// cover the largest id seen; repeated pairs accumulate.
    pub fn from_edges<I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (AgentId, PostId, u32)>,
    {
        let mut graph = Self::new();
        for (agent, post, weight) in edges {
            graph.ensure_agents(agent.index() + 1);
            graph.ensure_posts(post.index() + 1);
            graph.add_weight(agent, post, weight);
        }
        graph
    }

    pub fn ensure_agents(&mut self, n: usize) {
        if self.agent_links.len() < n {
            self.agent_links.resize_with(n, Vec::new);
        }
    }

    pub fn ensure_posts(&mut self, n: usize) {
        if self.post_links.len() < n {
            self.post_links.resize_with(n, Vec::new);
        }
    }

    pub fn n_agents(&self) -> usize {
        self.agent_links.len()
    }

    pub fn n_posts(&self) -> usize {
        self.post_links.len()
    }

    pub fn n_edges(&self) -> usize {
        self.slots.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn agent_links(&self, agent: AgentId) -> &[(PostId, u32)] {
        &self.agent_links[agent.index()]
    }

    pub fn post_links(&self, post: PostId) -> &[(AgentId, u32)] {
        &self.post_links[post.index()]
    }

    pub fn weight(&self, agent: AgentId, post: PostId) -> u32 {
        self.slots
            .get(&(agent.0, post.0))
            .map(|&(ia, _)| self.agent_links[agent.index()][ia as usize].1)
            .unwrap_or(0)
    }

    pub fn agent_degree(&self, agent: AgentId) -> usize {
        self.agent_links[agent.index()].len()
    }

    pub fn post_degree(&self, post: PostId) -> usize {
        self.post_links[post.index()].len()
    }

    pub fn agent_strength(&self, agent: AgentId) -> u64 {
        self.agent_links[agent.index()].iter().map(|&(_, w)| u64::from(w)).sum()
    }

    pub fn post_strength(&self, post: PostId) -> u64 {
        self.post_links[post.index()].iter().map(|&(_, w)| u64::from(w)).sum()
    }

    /// Adds `weight` to the link, creating it if needed. Returns the new weight.
    ///
    /// Panics if either id is outside the node range.
    pub fn add_weight(&mut self, agent: AgentId, post: PostId, weight: u32) -> u32 {
        assert!(agent.index() < self.agent_links.len(), "agent {agent} out of range");
        assert!(post.index() < self.post_links.len(), "post {post} out of range");
        self.total_weight += u64::from(weight);
        match self.slots.get(&(agent.0, post.0)) {
            Some(&(ia, ip)) => {
                let a = &mut self.agent_links[agent.index()][ia as usize].1;
                *a += weight;
                self.post_links[post.index()][ip as usize].1 += weight;
                *a
            }
            None => {
                let ia = self.agent_links[agent.index()].len() as u32;
                let ip = self.post_links[post.index()].len() as u32;
                self.agent_links[agent.index()].push((post, weight));
                self.post_links[post.index()].push((agent, weight));
                self.slots.insert((agent.0, post.0), (ia, ip));
                weight
            }
        }
    }

    /// All links as `(agent, post, weight)`, ordered by agent then insertion.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, PostId, u32)> + '_ {
        self.agent_links.iter().enumerate().flat_map(|(a, links)| {
            links
                .iter()
                .map(move |&(p, w)| (AgentId(a as u32), p, w))
        })
    }

    /// The same graph with the partitions swapped: agent `i` becomes post `i`
    /// and vice versa.
    pub fn mirrored(&self) -> Self {
        let mut out = Self::new();
        out.ensure_agents(self.n_posts());
        out.ensure_posts(self.n_agents());
        for (a, p, w) in self.edges() {
            out.add_weight(AgentId(p.0), PostId(a.0), w);
        }
        out
    }

    pub fn side_len(&self, side: Partition) -> usize {
        match side {
            Partition::Agents => self.n_agents(),
            Partition::Posts => self.n_posts(),
        }
    }

    /// Neighbors of node `i` of `side` as `(index on the other side, weight)`.
    pub fn neighbors(&self, side: Partition, i: usize) -> Vec<(usize, u32)> {
        match side {
            Partition::Agents => self.agent_links[i].iter().map(|&(p, w)| (p.index(), w)).collect(),
            Partition::Posts => self.post_links[i].iter().map(|&(a, w)| (a.index(), w)).collect(),
        }
    }

    /// Number of distinct neighbors of node `i` of `side`.
    pub fn degree(&self, side: Partition, i: usize) -> usize {
        match side {
            Partition::Agents => self.agent_links[i].len(),
            Partition::Posts => self.post_links[i].len(),
        }
    }

    /// Total link weight of node `i` of `side`.
    pub fn strength(&self, side: Partition, i: usize) -> u64 {
        match side {
            Partition::Agents => self.agent_strength(AgentId(i as u32)),
            Partition::Posts => self.post_strength(PostId(i as u32)),
        }
    }
}

/// One side of the bipartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Agents,
    Posts,
}

impl Partition {
    pub fn other(self) -> Self {
        match self {
            Partition::Agents => Partition::Posts,
            Partition::Posts => Partition::Agents,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Agents => "agents",
            Partition::Posts => "posts",
        }
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agents" => Ok(Partition::Agents),
            "posts" => Ok(Partition::Posts),
            other => Err(Error::Config(format!("unknown partition {other:?}; expected agents or posts"))),
        }
    }
}

/// Agents, posts, and the bipartite graph linking them.
#[derive(Debug, Clone, Default)]
pub struct Network {
    pub agents: Vec<AgentState>,
    pub posts: Vec<PostState>,
    pub graph: BipartiteGraph,
    recent: BTreeMap<TimeBin, Vec<PostId>>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_agent(
        &mut self,
        emotion: EmotionState,
        new_post_prob: f64,
        arrival_time: TimeBin,
    ) -> AgentId {
        let id = AgentId(self.agents.len() as u32);
        self.agents.push(AgentState {
            id,
            emotion,
            delay_remaining: 0.0,
            new_post_prob,
            arrival_time,
        });
        self.graph.ensure_agents(self.agents.len());
        id
    }

    /// Registers a post. The creating action still has to be recorded with
    /// [`Network::record_event`].
    pub fn create_post(&mut self, author: AgentId, created_at: TimeBin, lifetime: TimeBin) -> PostId {
        let id = PostId(self.posts.len() as u32);
        self.posts.push(PostState::new(id, author, created_at, lifetime));
        self.graph.ensure_posts(self.posts.len());
        id
    }

    pub fn agent(&self, id: AgentId) -> Result<&AgentState> {
        self.agents.get(id.index()).ok_or(Error::UnknownAgent(id))
    }

    pub fn post(&self, id: PostId) -> Result<&PostState> {
        self.posts.get(id.index()).ok_or(Error::UnknownPost(id))
    }

    /// Applies one action: bumps the link weight, the post's per-bin ledger
    /// and its cumulative charge.
    pub fn record_event(&mut self, event: &CommentEvent) -> Result<()> {
        if event.agent.index() >= self.agents.len() {
            return Err(Error::UnknownAgent(event.agent));
        }
        let post = self
            .posts
            .get_mut(event.post.index())
            .ok_or(Error::UnknownPost(event.post))?;
        if post.is_expired(event.time) {
            return Err(Error::ExpiredPost {
                post: event.post,
                time: event.time,
                expired_after: post.expires_after(),
            });
        }
        post.record(event.time, event.arousal, event.valence);
        self.graph.add_weight(event.agent, event.post, 1);

        let bin = self.recent.entry(event.time).or_default();
        if !bin.contains(&event.post) {
            bin.push(event.post);
        }
        let horizon = event.time.saturating_sub(LEDGER_RETENTION);
        while let Some(entry) = self.recent.first_entry() {
            if *entry.key() >= horizon {
                break;
            }
            entry.remove();
        }
        Ok(())
    }

    /// Posts with at least one event in bins `from..=to`, in first-touch order.
    /// Only bins within the retention horizon of the latest event are known.
    pub fn active_posts(&self, from: TimeBin, to: TimeBin) -> Vec<PostId> {
        let mut out: Vec<PostId> = Vec::new();
        if from > to {
            return out;
        }
        for posts in self.recent.range(from..=to).map(|(_, p)| p) {
            for &p in posts {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Rebuilds a network from a log. Agents and posts are created at first
    /// appearance and must carry dense ids in that order. Replayed posts never
    /// expire; emotions are left at the origin.
    pub fn replay<'a, I>(events: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a CommentEvent>,
    {
        let mut net = Network::new();
        for event in events {
            let next_agent = net.agents.len() as u32;
            if event.agent.0 == next_agent {
                net.add_agent(EmotionState::default(), 0.0, event.time);
            } else if event.agent.0 > next_agent {
                return Err(Error::NonDenseId {
                    expected: next_agent,
                    got: event.agent.0,
                });
            }
            let next_post = net.posts.len() as u32;
            if event.post.0 == next_post {
                net.create_post(event.agent, event.time, TimeBin::MAX);
            } else if event.post.0 > next_post {
                return Err(Error::NonDenseId {
                    expected: next_post,
                    got: event.post.0,
                });
            }
            net.record_event(event)?;
        }
        Ok(net)
    }
}
