//! Per-agent emotion maps and the network fields that drive them.
//!
//! Everything here is a pure function of a frozen snapshot of the posts that
//! were active in the two bins preceding the current step.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{BinTally, EmotionState, PostId};

/// Coefficients of the arousal and valence maps plus the mean-field fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    pub d1: f64,
    pub d2: f64,
    pub c1: f64,
    pub c2: f64,
    /// Relaxation rate, shared by arousal and valence.
    pub gamma: f64,
    /// Weight of the mean field relative to the local field.
    pub q: f64,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            d1: 1.0,
            d2: 0.5,
            c1: 1.0,
            c2: 2.0,
            gamma: 0.05,
            q: 0.4,
        }
    }
}

impl MapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma must lie in (0,1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Config(format!("q must lie in [0,1], got {}", self.q)));
        }
        for (name, v) in [("d1", self.d1), ("d2", self.d2), ("c1", self.c1), ("c2", self.c2)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// What one active post contributed during the current window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivePost {
    pub post: PostId,
    /// Sum of comment arousals in the window.
    pub arousal_sum: f64,
    /// Mean comment valence in the window.
    pub mean_valence: f64,
    pub n_comments: u32,
    pub n_pos: u32,
    pub n_neg: u32,
}

impl ActivePost {
    /// Returns `None` when the tally holds no comments.
    pub fn from_tally(post: PostId, tally: &BinTally) -> Option<Self> {
        (tally.n_comments > 0).then(|| ActivePost {
            post,
            arousal_sum: tally.sum_arousal,
            mean_valence: tally.sum_valence / f64::from(tally.n_comments),
            n_comments: tally.n_comments,
            n_pos: tally.n_pos,
            n_neg: tally.n_neg,
        })
    }

    pub fn n_emotional(&self) -> u32 {
        self.n_pos + self.n_neg
    }
}

/// The active part of the network, C(t, t-1), with the totals the mean
/// fields need precomputed.
#[derive(Debug, Clone, Default)]
pub struct ActiveRegionSnapshot {
    posts: Vec<ActivePost>,
    index: HashMap<PostId, usize>,
    arousal_total: f64,
    comments_total: f64,
    pos_total: f64,
    neg_total: f64,
}

impl ActiveRegionSnapshot {
    pub fn new(posts: impl IntoIterator<Item = ActivePost>) -> Self {
        let mut snap = Self::default();
        for p in posts {
            debug_assert!(p.n_comments >= 1 && p.n_pos + p.n_neg <= p.n_comments);
            snap.arousal_total += p.arousal_sum;
            snap.comments_total += f64::from(p.n_comments);
            snap.pos_total += f64::from(p.n_pos);
            snap.neg_total += f64::from(p.n_neg);
            snap.index.insert(p.post, snap.posts.len());
            snap.posts.push(p);
        }
        snap
    }

    pub fn posts(&self) -> &[ActivePost] {
        &self.posts
    }

    pub fn get(&self, post: PostId) -> Option<&ActivePost> {
        self.index.get(&post).map(|&i| &self.posts[i])
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    /// Mean-field arousal: total window arousal over total window comments.
    pub fn arousal_mean_field(&self) -> f64 {
        if self.comments_total > 0.0 {
            self.arousal_total / self.comments_total
        } else {
            0.0
        }
    }

    /// Mean-field valence as perceived by an agent of the given polarity.
    pub fn valence_mean_field(&self, polarity: f64) -> f64 {
        valence_combination(self.pos_total, self.neg_total, polarity)
    }
}

/// The four fields acting on one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fields {
    pub arousal_local: f64,
    pub arousal_mf: f64,
    pub valence_local: f64,
    pub valence_mf: f64,
}

impl Fields {
    pub fn combined_arousal(&self, q: f64) -> f64 {
        self.arousal_local + q * self.arousal_mf
    }

    pub fn combined_valence(&self, q: f64) -> f64 {
        self.valence_local + q * self.valence_mf
    }
}

/// Polarity r_i = sign(v_i), with 0 for |v_i| < 1e-9.
pub fn polarity(valence: f64) -> f64 {
    if valence.abs() < 1e-9 {
        0.0
    } else {
        valence.signum()
    }
}

fn valence_combination(pos: f64, neg: f64, polarity: f64) -> f64 {
    let emo = pos + neg;
    if emo <= 0.0 {
        return 0.0;
    }
    (1.0 - 0.4 * polarity) / 1.4 * (pos / emo) - (1.0 + 0.4 * polarity) / 1.4 * (neg / emo)
}

/// Local and mean-field arousal for an agent with valence `valence`.
///
/// `incident` lists `(A_ip, post)` for the agent's links to active posts.
/// Returns `(h_a_local, h_a_mf)`; the local field is 0 when its denominator
/// vanishes.
pub fn arousal_field<'a, I>(valence: f64, incident: I, snapshot: &ActiveRegionSnapshot) -> (f64, f64)
where
    I: IntoIterator<Item = (f64, &'a ActivePost)>,
{
    let mut num = 0.0;
    let mut den = 0.0;
    for (weight, post) in incident {
        let similarity = 1.0 + valence * post.mean_valence;
        num += weight * post.arousal_sum * similarity;
        den += weight * f64::from(post.n_comments) * similarity;
    }
    let local = if den > 0.0 { num / den } else { 0.0 };
    (local, snapshot.arousal_mean_field())
}

/// Local and mean-field valence for an agent of the given polarity.
/// Neutral comments do not contribute; with no emotional comments the
/// corresponding field is 0.
pub fn valence_field<'a, I>(polarity: f64, incident: I, snapshot: &ActiveRegionSnapshot) -> (f64, f64)
where
    I: IntoIterator<Item = (f64, &'a ActivePost)>,
{
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (weight, post) in incident {
        pos += weight * f64::from(post.n_pos);
        neg += weight * f64::from(post.n_neg);
    }
    (
        valence_combination(pos, neg, polarity),
        snapshot.valence_mean_field(polarity),
    )
}

/// All four fields for one agent.
pub fn fields_for<'a, I>(valence: f64, incident: I, snapshot: &ActiveRegionSnapshot) -> Fields
where
    I: IntoIterator<Item = (f64, &'a ActivePost)>,
    I::IntoIter: Clone,
{
    let incident = incident.into_iter();
    let (arousal_local, arousal_mf) = arousal_field(valence, incident.clone(), snapshot);
    let (valence_local, valence_mf) = valence_field(polarity(valence), incident, snapshot);
    Fields {
        arousal_local,
        arousal_mf,
        valence_local,
        valence_mf,
    }
}

/// Prompted arousal map for a given combined field.
pub fn arousal_map(a: f64, field: f64, p: &MapParams) -> f64 {
    (1.0 - p.gamma) * a + field * (p.d1 + p.d2 * (a - a * a)) * (1.0 - a)
}

/// Prompted valence map for a given combined field.
pub fn valence_map(v: f64, field: f64, p: &MapParams) -> f64 {
    (1.0 - p.gamma) * v + field * (p.c1 + p.c2 * (v - v * v * v)) * (1.0 - v.abs())
}

/// One update of an agent's emotion. Prompted agents follow the full maps
/// with combined fields `h + q h_mf`; others only relax by `1 - gamma`.
/// The result is clamped into `[0,1] x [-1,1]`.
pub fn update_emotion(state: EmotionState, fields: &Fields, params: &MapParams, prompted: bool) -> EmotionState {
    if prompted {
        EmotionState::new(
            arousal_map(state.arousal, fields.combined_arousal(params.q), params),
            valence_map(state.valence, fields.combined_valence(params.q), params),
        )
    } else {
        relax(state, params)
    }
}

pub fn relax(state: EmotionState, params: &MapParams) -> EmotionState {
    EmotionState::new(
        (1.0 - params.gamma) * state.arousal,
        (1.0 - params.gamma) * state.valence,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Arousal,
    Valence,
}

pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
pub const FIXED_POINT_BUDGET: usize = 1_000_000;

/// Attracting fixed point of one map under a constant combined field,
/// reached by iterating from `initial` (clamped to the component's interval).
pub fn map_fixed_point(params: &MapParams, constant_field: f64, which: Component, initial: f64) -> Result<f64> {
    let (lo, hi) = match which {
        Component::Arousal => (0.0, 1.0),
        Component::Valence => (-1.0, 1.0),
    };
    let mut x = initial.clamp(lo, hi);
    let mut last_step = f64::INFINITY;
    for _ in 0..FIXED_POINT_BUDGET {
        let next = match which {
            Component::Arousal => arousal_map(x, constant_field, params),
            Component::Valence => valence_map(x, constant_field, params),
        }
        .clamp(lo, hi);
        last_step = (next - x).abs();
        x = next;
        if last_step < FIXED_POINT_TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: FIXED_POINT_BUDGET,
        last_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn post(id: u32, arousal_sum: f64, mean_valence: f64, n: u32, pos: u32, neg: u32) -> ActivePost {
        ActivePost {
            post: PostId(id),
            arousal_sum,
            mean_valence,
            n_comments: n,
            n_pos: pos,
            n_neg: neg,
        }
    }

    #[test]
    fn single_post_arousal_field_is_mean_arousal() {
        let p = post(0, 0.6, -0.3, 2, 0, 1);
        let snap = ActiveRegionSnapshot::new([p]);
        for v in [-0.9, 0.0, 0.4, 1.0] {
            let (local, mf) = arousal_field(v, [(1.0, &p)], &snap);
            assert!((local - 0.3).abs() < 1e-15);
            assert!((mf - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn no_incident_posts_gives_zero_local_field() {
        let p = post(0, 0.6, 0.3, 2, 1, 0);
        let snap = ActiveRegionSnapshot::new([p]);
        let f = fields_for(0.5, std::iter::empty(), &snap);
        assert_eq!(f.arousal_local, 0.0);
        assert_eq!(f.valence_local, 0.0);
        assert!((f.arousal_mf - 0.3).abs() < 1e-15);
    }

    #[test]
    fn identical_posts_match_single_post() {
        let a = post(0, 1.2, 0.2, 3, 2, 0);
        let b = post(1, 1.2, 0.2, 3, 2, 0);
        let snap = ActiveRegionSnapshot::new([a, b]);
        let (one, _) = arousal_field(0.7, [(2.0, &a)], &snap);
        let (two, _) = arousal_field(0.7, [(2.0, &a), (2.0, &b)], &snap);
        assert!((one - two).abs() < 1e-15);
        assert!((one - 0.4).abs() < 1e-15);
    }

    #[test]
    fn total_opposition_zeroes_local_arousal() {
        let p = post(0, 0.8, -1.0, 1, 0, 1);
        let snap = ActiveRegionSnapshot::new([p]);
        let (local, _) = arousal_field(1.0, [(1.0, &p)], &snap);
        assert_eq!(local, 0.0);
    }

    #[test]
    fn valence_field_examples() {
        let pos = post(0, 1.0, 0.5, 2, 2, 0);
        let neg = post(1, 1.0, -0.5, 3, 0, 3);
        let snap = ActiveRegionSnapshot::new([pos]);
        let (local, mf) = valence_field(1.0, [(1.0, &pos)], &snap);
        assert!((local - 0.6 / 1.4).abs() < 1e-15);
        assert!((mf - 0.6 / 1.4).abs() < 1e-15);

        let snap = ActiveRegionSnapshot::new([neg]);
        let (local, _) = valence_field(1.0, [(1.0, &neg)], &snap);
        assert!((local + 1.0).abs() < 1e-15);

        let neutral = post(2, 1.0, 0.0, 4, 0, 0);
        let snap = ActiveRegionSnapshot::new([neutral]);
        assert_eq!(valence_field(1.0, [(1.0, &neutral)], &snap), (0.0, 0.0));
    }

    #[test]
    fn zero_valence_agent_weights_both_signs_equally() {
        let p = post(0, 1.0, 0.0, 2, 1, 1);
        let snap = ActiveRegionSnapshot::new([p]);
        assert_eq!(polarity(0.0), 0.0);
        assert_eq!(polarity(5e-10), 0.0);
        let (local, _) = valence_field(polarity(0.0), [(1.0, &p)], &snap);
        assert!(local.abs() < 1e-15);
    }

    #[test]
    fn relaxation_multiplies_by_one_minus_gamma() {
        let p = MapParams::default();
        let s = update_emotion(EmotionState::new(0.8, -0.5), &Fields::default(), &p, false);
        assert!((s.arousal - 0.76).abs() < 1e-15);
        assert!((s.valence + 0.475).abs() < 1e-15);
    }

    #[test]
    fn origin_is_fixed_without_fields() {
        let s = update_emotion(EmotionState::default(), &Fields::default(), &MapParams::default(), true);
        assert_eq!(s, EmotionState::default());
    }

    #[test]
    fn stronger_arousal_field_gives_higher_fixed_point() {
        let p = MapParams::default();
        assert!(map_fixed_point(&p, 0.0, Component::Arousal, 0.7).unwrap() < 1e-10);
        let mut last = -1.0;
        for i in 1..=10 {
            let h = 0.01 * f64::from(i);
            let fp = map_fixed_point(&p, h, Component::Arousal, 0.5).unwrap();
            assert!(fp > last, "field {h}: {fp} <= {last}");
            // The iterate is a genuine fixed point.
            assert!((arousal_map(fp, h, &p) - fp).abs() < 1e-11);
            last = fp;
        }
    }

    #[test]
    fn valence_fixed_points_follow_field_sign() {
        let p = MapParams::default();
        for h in [0.01, 0.03, 0.08, 0.2] {
            let up = map_fixed_point(&p, h, Component::Valence, 0.3).unwrap();
            let down = map_fixed_point(&p, -h, Component::Valence, -0.3).unwrap();
            assert!(up > 0.0 && down < 0.0, "field {h}: {up} {down}");
            assert!((valence_map(up, h, &p) - up).abs() < 1e-11);
            assert!((valence_map(down, -h, &p) - down).abs() < 1e-11);
            // The cubic term favours the positive branch.
            assert!(up > -down);
        }
    }

    #[test]
    fn mirrored_fixed_points_without_cubic_term() {
        let p = MapParams { c2: 0.0, ..MapParams::default() };
        for h in [0.01, 0.03, 0.08] {
            let up = map_fixed_point(&p, h, Component::Valence, 0.3).unwrap();
            let down = map_fixed_point(&p, -h, Component::Valence, -0.3).unwrap();
            assert!((up + down).abs() < 1e-10, "{up} {down}");
        }
    }

    proptest! {
        #[test]
        fn updates_stay_in_bounds(
            a in 0.0f64..=1.0, v in -1.0f64..=1.0,
            ha in 0.0f64..=1.0, hamf in 0.0f64..=1.0,
            hv in -1.0f64..=1.0, hvmf in -1.0f64..=1.0,
            prompted: bool,
        ) {
            let f = Fields { arousal_local: ha, arousal_mf: hamf, valence_local: hv, valence_mf: hvmf };
            let s = update_emotion(EmotionState::new(a, v), &f, &MapParams::default(), prompted);
            prop_assert!(s.is_valid());
        }

        #[test]
        fn valence_map_odd_part(v in -1.0f64..=1.0, h in -1.4f64..=1.4, c2 in 0.0f64..4.0) {
            let p = MapParams { c2, ..MapParams::default() };
            // Only the c2 (v - v^3) term breaks the symmetry (v, h) -> (-v, -h).
            let excess = valence_map(v, h, &p) + valence_map(-v, -h, &p);
            let expected = 2.0 * h * c2 * (v - v * v * v) * (1.0 - v.abs());
            prop_assert!((excess - expected).abs() < 1e-12);
            let p0 = MapParams { c2: 0.0, ..p };
            prop_assert!((valence_map(-v, -h, &p0) + valence_map(v, h, &p0)).abs() < 1e-15);
        }

        #[test]
        fn field_bounds_hold(
            posts in proptest::collection::vec((0u32..6, 0u32..6, 0u32..6, 0.0f64..=1.0, -1.0f64..=1.0, 1.0f64..5.0), 1..6),
            v in -1.0f64..=1.0,
        ) {
            let active: Vec<ActivePost> = posts.iter().enumerate().map(|(i, &(np, nn, nz, a, mv, _))| {
                let n = (np + nn + nz).max(1);
                post(i as u32, a * f64::from(n), mv, n, np, nn)
            }).collect();
            let snap = ActiveRegionSnapshot::new(active.iter().copied());
            let incident: Vec<(f64, &ActivePost)> = posts.iter().zip(&active).map(|(p, a)| (p.5, a)).collect();
            let f = fields_for(v, incident.iter().copied(), &snap);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f.arousal_local));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f.arousal_mf));
            prop_assert!((-1.0..=1.0).contains(&f.valence_local));
            prop_assert!((-1.0..=1.0).contains(&f.valence_mf));
        }
    }
}
