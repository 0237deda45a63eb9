//! Per-bin activity series.

use std::collections::HashSet;

use crate::model::{CommentEvent, ValenceClass};

/// The global time series, one entry per bin.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeriesBundle {
    /// Comments (all actions) per bin.
    pub n_c: Vec<i64>,
    pub n_plus: Vec<i64>,
    pub n_minus: Vec<i64>,
    /// Charge, `n_plus - n_minus`.
    pub q: Vec<i64>,
    /// Distinct posts receiving actions.
    pub n_ap: Vec<i64>,
    /// Distinct acting agents.
    pub n_au: Vec<i64>,
}

pub const SERIES_NAMES: [&str; 6] = ["N_c", "N_plus", "N_minus", "Q", "N_ap", "N_au"];

impl SeriesBundle {
    pub fn zeros(n_bins: usize) -> Self {
        Self {
            n_c: vec![0; n_bins],
            n_plus: vec![0; n_bins],
            n_minus: vec![0; n_bins],
            q: vec![0; n_bins],
            n_ap: vec![0; n_bins],
            n_au: vec![0; n_bins],
        }
    }

    pub fn len(&self) -> usize {
        self.n_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_c.is_empty()
    }

    /// Looks a series up by its column name (`N_c`, `N_plus`, ...).
    pub fn by_name(&self, name: &str) -> Option<&[i64]> {
        Some(match name {
            "N_c" => &self.n_c,
            "N_plus" => &self.n_plus,
            "N_minus" => &self.n_minus,
            "Q" => &self.q,
            "N_ap" => &self.n_ap,
            "N_au" => &self.n_au,
            _ => return None,
        })
    }

    /// Writes `t,N_c,N_plus,N_minus,Q,N_ap,N_au`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,{}", SERIES_NAMES.join(","))?;
        for t in 0..self.len() {
            writeln!(
                w,
                "{t},{},{},{},{},{},{}",
                self.n_c[t], self.n_plus[t], self.n_minus[t], self.q[t], self.n_ap[t], self.n_au[t]
            )?;
        }
        w.flush()
    }
}

/// Bins events by time. Events at or beyond `n_bins` are ignored.
pub fn build_series(events: &[CommentEvent], n_bins: usize) -> SeriesBundle {
    let mut s = SeriesBundle::zeros(n_bins);
    let mut agents: Vec<HashSet<u32>> = vec![HashSet::new(); n_bins];
    let mut posts: Vec<HashSet<u32>> = vec![HashSet::new(); n_bins];
    for e in events {
        let t = e.time as usize;
        if t >= n_bins {
            continue;
        }
        s.n_c[t] += 1;
        match e.valence_class() {
            ValenceClass::Positive => s.n_plus[t] += 1,
            ValenceClass::Negative => s.n_minus[t] += 1,
            ValenceClass::Neutral => {}
        }
        agents[t].insert(e.agent.0);
        posts[t].insert(e.post.0);
    }
    for t in 0..n_bins {
        s.q[t] = s.n_plus[t] - s.n_minus[t];
        s.n_au[t] = agents[t].len() as i64;
        s.n_ap[t] = posts[t].len() as i64;
    }
    s
}

/// Number of bins needed to cover every event.
pub fn bins_spanned(events: &[CommentEvent]) -> usize {
    events.iter().map(|e| e.time as usize + 1).max().unwrap_or(0)
}
