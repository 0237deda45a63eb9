//! Estimating the model's data-driven inputs from an event log: the delay
//! and lifetime distributions, the old-post probability μ(T0), the
//! distribution of new-post fractions g, and the arrival series p(t).

use std::collections::BTreeMap;

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::event_log::LogRecord;
use crate::model::{EventKind, TimeBin};

/// A validated event log: times are nondecreasing and no post is commented
/// before its `new_post` row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLog {
    rows: Vec<LogRecord>,
}

impl EmpiricalLog {
    pub fn new(rows: Vec<LogRecord>) -> Result<Self> {
        let mut seen_posts: BTreeMap<u32, bool> = BTreeMap::new();
        for (i, w) in rows.windows(2).enumerate() {
            if w[1].time < w[0].time {
                return Err(Error::InconsistentLog(format!(
                    "row {} goes back in time ({} after {})",
                    i + 2,
                    w[1].time,
                    w[0].time
                )));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            let seen = seen_posts.entry(r.post.0).or_insert(false);
            if r.kind == EventKind::NewPost && *seen {
                return Err(Error::InconsistentLog(format!(
                    "row {}: new_post for post {} after earlier activity on it",
                    i + 1,
                    r.post
                )));
            }
            *seen = true;
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[LogRecord] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn times_by_user(&self) -> BTreeMap<u32, Vec<TimeBin>> {
        let mut m: BTreeMap<u32, Vec<TimeBin>> = BTreeMap::new();
        for r in &self.rows {
            m.entry(r.agent.0).or_default().push(r.time);
        }
        m
    }

    fn times_by_post(&self) -> BTreeMap<u32, Vec<TimeBin>> {
        let mut m: BTreeMap<u32, Vec<TimeBin>> = BTreeMap::new();
        for r in &self.rows {
            m.entry(r.post.0).or_default().push(r.time);
        }
        m
    }
}

/// Pooled histogram of gaps between consecutive actions of the same user.
pub fn infer_delay_distribution(log: &EmpiricalLog) -> Result<DiscreteDist> {
    if log.is_empty() {
        return Err(Error::Empty("event log"));
    }
    let mut gaps: Vec<f64> = Vec::new();
    for times in log.times_by_user().values() {
        gaps.extend(times.windows(2).map(|w| (w[1] - w[0]) as f64));
    }
    if gaps.is_empty() {
        return Err(Error::Empty("no user acts more than once, so there are no delays"));
    }
    DiscreteDist::from_samples(&gaps)
}

/// Histogram of per-post spans, last activity minus first. Single-event posts
/// contribute a zero span. Use [`crate::dist::log_bin`] for log-binned output.
pub fn infer_lifetime_distribution(log: &EmpiricalLog) -> Result<DiscreteDist> {
    if log.is_empty() {
        return Err(Error::Empty("event log"));
    }
    let spans: Vec<f64> = log
        .times_by_post()
        .values()
        .map(|t| (t[t.len() - 1] - t[0]) as f64)
        .collect();
    DiscreteDist::from_samples(&spans)
}

/// μ(T0): the per-post fraction of events later than `created + t0`,
/// averaged over posts. A post's creation time is its first event.
pub fn infer_mu(log: &EmpiricalLog, t0: TimeBin) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::Empty("event log"));
    }
    let by_post = log.times_by_post();
    let total: f64 = by_post
        .values()
        .map(|times| {
            let created = times[0];
            let late = times.iter().filter(|&&t| t > created + t0).count();
            late as f64 / times.len() as f64
        })
        .sum();
    Ok(total / by_post.len() as f64)
}

/// Per-user fraction of authored posts among all posts the user acted on,
/// as a distribution over users.
pub fn infer_g_distribution(log: &EmpiricalLog) -> Result<DiscreteDist> {
    if log.is_empty() {
        return Err(Error::Empty("event log"));
    }
    // user -> (authored, posts touched)
    let mut per_user: BTreeMap<u32, (usize, BTreeMap<u32, ()>)> = BTreeMap::new();
    for r in log.rows() {
        let entry = per_user.entry(r.agent.0).or_default();
        if r.kind == EventKind::NewPost {
            entry.0 += 1;
        }
        entry.1.insert(r.post.0, ());
    }
    let ratios: Vec<f64> = per_user
        .values()
        .map(|(authored, touched)| *authored as f64 / touched.len() as f64)
        .collect();
    DiscreteDist::from_samples(&ratios)
}

/// Number of users making their first appearance in each bin of width
/// `bin_width`, from bin 0 through the bin holding the last event.
pub fn extract_arrival_series(log: &EmpiricalLog, bin_width: u64) -> Result<Vec<u32>> {
    if bin_width < 1 {
        return Err(Error::Config("bin width must be at least 1".into()));
    }
    let Some(last) = log.rows().last() else {
        return Ok(Vec::new());
    };
    let mut series = vec![0u32; (last.time / bin_width) as usize + 1];
    for times in log.times_by_user().values() {
        series[(times[0] / bin_width) as usize] += 1;
    }
    Ok(series)
}
