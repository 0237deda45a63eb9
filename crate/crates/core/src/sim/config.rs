//! Simulation configuration and its flat `key = value` file format.
//!
//! Recognized keys (all optional, defaults in brackets):
//!
//! ```text
//! d1 [1]  d2 [0.5]  c1 [1]  c2 [2]  gamma [0.05]  q [0.4]
//! a0 [0.5]  t0 [576]  mu [0.05]
//! driving [constant:6]    constant:<p> | synthetic | empirical:<csv>
//! base_rate [6]  amplitude [0.8]  period [288]  noise [none]
//!                         noise = none | long_memory:<exponent>:<strength>
//! delay [fallback]  lifetime [fallback]  g [fallback]   fallback | <csv>
//! seed [0]  steps [4032]  init_agents [10]  init_posts [10]
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dist::{self, DiscreteDist};
use crate::dynamics::MapParams;
use crate::error::{Error, Result};
use crate::event_log;
use crate::model::TimeBin;

pub const DAILY_PERIOD: f64 = 288.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    /// Multiplicative log-normal modulation by Gaussian noise with spectrum
    /// `1/ν^exponent`, scaled to standard deviation `strength`.
    LongMemory { exponent: f64, strength: f64 },
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::None => f.write_str("none"),
            NoiseSpec::LongMemory { exponent, strength } => {
                write!(f, "long_memory:{exponent}:{strength}")
            }
        }
    }
}

impl NoiseSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(NoiseSpec::None);
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["long_memory", e, st] => Ok(NoiseSpec::LongMemory {
                exponent: parse_f64("noise exponent", e)?,
                strength: parse_f64("noise strength", st)?,
            }),
            _ => Err(Error::Config(format!("bad noise spec {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticDriving {
    pub base_rate: f64,
    pub period: f64,
    pub amplitude: f64,
    pub noise: NoiseSpec,
}

impl Default for SyntheticDriving {
    fn default() -> Self {
        Self {
            base_rate: 6.0,
            period: DAILY_PERIOD,
            amplitude: 0.8,
            noise: NoiseSpec::None,
        }
    }
}

/// Source of p(t), the number of new agents per step.
#[derive(Debug, Clone, PartialEq)]
pub enum Driving {
    Constant(u32),
    Synthetic(SyntheticDriving),
    /// Explicit series; element `k` drives step `k + 1`.
    Series { path: Option<PathBuf>, counts: Vec<u32> },
}

impl Driving {
    /// Parses `constant:<p>`, `synthetic` or `empirical:<csv>`.
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        let s = s.trim();
        if s == "synthetic" {
            return Ok(Driving::Synthetic(SyntheticDriving::default()));
        }
        if let Some(p) = s.strip_prefix("constant:") {
            let p = p
                .trim()
                .parse::<u32>()
                .map_err(|e| Error::Config(format!("constant driving {p:?}: {e}")))?;
            return Ok(Driving::Constant(p));
        }
        if let Some(path) = s.strip_prefix("empirical:") {
            let path = resolve(base, path.trim());
            let counts = read_driving_series(&path)?;
            return Ok(Driving::Series {
                path: Some(path),
                counts,
            });
        }
        Err(Error::Config(format!(
            "driving must be constant:<p>, synthetic or empirical:<csv>, got {s:?}"
        )))
    }

    fn describe(&self) -> String {
        match self {
            Driving::Constant(p) => format!("constant:{p}"),
            Driving::Synthetic(_) => "synthetic".into(),
            Driving::Series { path: Some(p), .. } => format!("empirical:{}", p.display()),
            Driving::Series { path: None, counts } => format!("series[{}]", counts.len()),
        }
    }
}

/// Reads a driving series: a headed two-column CSV `(t, count)` as written by
/// the arrivals inference. Rows are taken in file order.
pub fn read_driving_series(path: &Path) -> Result<Vec<u32>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read driving series {}: {e}", path.display())))?;
    let pairs = event_log::read_pairs(text.as_bytes(), path)?;
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (_, c))| {
            if c < 0.0 || c.fract() != 0.0 || c > f64::from(u32::MAX) {
                Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i as u64 + 2,
                    message: format!("column 2: count must be a nonnegative integer, got {c}"),
                })
            } else {
                Ok(c as u32)
            }
        })
        .collect()
}

/// A distribution input: the labeled fallback or a table loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum DistSource {
    Fallback,
    Table { path: Option<PathBuf>, dist: DiscreteDist },
}

impl DistSource {
    fn parse(s: &str, base: &Path) -> Result<Self> {
        let s = s.trim();
        if s == "fallback" {
            return Ok(DistSource::Fallback);
        }
        let path = resolve(base, s);
        let dist = DiscreteDist::read_csv_file(&path)?;
        Ok(DistSource::Table {
            path: Some(path),
            dist,
        })
    }

    fn describe(&self) -> String {
        match self {
            DistSource::Fallback => "fallback".into(),
            DistSource::Table { path: Some(p), .. } => p.display().to_string(),
            DistSource::Table { path: None, .. } => "table".into(),
        }
    }

    pub fn resolve_or(&self, fallback: impl FnOnce() -> DiscreteDist) -> DiscreteDist {
        match self {
            DistSource::Fallback => fallback(),
            DistSource::Table { dist, .. } => dist.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub map: MapParams,
    /// Activation scale: a prompted agent becomes active with probability `a0 * arousal`.
    pub a0: f64,
    /// Exposure window in bins.
    pub t0: TimeBin,
    /// Probability of commenting on a post older than `t0`.
    pub mu: f64,
    pub driving: Driving,
    pub delay: DistSource,
    pub lifetime: DistSource,
    pub new_post: DistSource,
    pub seed: u64,
    pub steps: u64,
    pub init_agents: u32,
    pub init_posts: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            map: MapParams::default(),
            a0: 0.5,
            t0: 576,
            mu: 0.05,
            driving: Driving::Constant(6),
            delay: DistSource::Fallback,
            lifetime: DistSource::Fallback,
            new_post: DistSource::Fallback,
            seed: 0,
            steps: 4032,
            init_agents: 10,
            init_posts: 10,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "d1", "d2", "c1", "c2", "gamma", "q", "a0", "t0", "mu", "driving", "base_rate", "amplitude",
    "period", "noise", "delay", "lifetime", "g", "seed", "steps", "init_agents", "init_posts",
];

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        if !(self.a0 >= 0.0 && self.a0 <= 1.0) {
            return Err(Error::Config(format!("a0 must lie in [0,1], got {}", self.a0)));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Config(format!("mu must lie in [0,1], got {}", self.mu)));
        }
        if self.t0 < 1 {
            return Err(Error::Config("t0 must be at least 1".into()));
        }
        if self.steps < 1 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if let Driving::Synthetic(s) = &self.driving {
            if !(s.base_rate > 0.0) {
                return Err(Error::Config("base_rate must be positive".into()));
            }
            if !(0.0..1.0).contains(&s.amplitude) {
                return Err(Error::Config("amplitude must lie in [0,1)".into()));
            }
            if !(s.period > 0.0) {
                return Err(Error::Config("period must be positive".into()));
            }
        }
        if let DistSource::Table { dist, .. } = &self.delay {
            if dist.values().iter().any(|&v| v < 0.0) {
                return Err(Error::Config("delay table has negative values".into()));
            }
        }
        if let DistSource::Table { dist, .. } = &self.lifetime {
            if dist.values().iter().any(|&v| v < 0.0) {
                return Err(Error::Config("lifetime table has negative values".into()));
            }
        }
        if let DistSource::Table { dist, .. } = &self.new_post {
            if dist.values().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::Config("g table values must lie in [0,1]".into()));
            }
        }
        Ok(())
    }

    pub fn delay_dist(&self) -> DiscreteDist {
        self.delay.resolve_or(dist::fallback_delay)
    }

    pub fn lifetime_dist(&self) -> DiscreteDist {
        self.lifetime.resolve_or(|| dist::fallback_lifetime(self.t0))
    }

    pub fn new_post_dist(&self) -> DiscreteDist {
        self.new_post.resolve_or(dist::fallback_new_post)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let pairs = parse_key_values(&text, path)?;
        let mut cfg = SimConfig::default();
        cfg.apply(&pairs, base)?;
        Ok(cfg)
    }

    /// Applies parsed key/value pairs on top of the current values.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>, base: &Path) -> Result<()> {
        let mut synth = match &self.driving {
            Driving::Synthetic(s) => *s,
            _ => SyntheticDriving::default(),
        };
        for (key, value) in pairs {
            let v = value.as_str();
            match key.as_str() {
                "d1" => self.map.d1 = parse_f64(key, v)?,
                "d2" => self.map.d2 = parse_f64(key, v)?,
                "c1" => self.map.c1 = parse_f64(key, v)?,
                "c2" => self.map.c2 = parse_f64(key, v)?,
                "gamma" => self.map.gamma = parse_f64(key, v)?,
                "q" => self.map.q = parse_f64(key, v)?,
                "a0" => self.a0 = parse_f64(key, v)?,
                "t0" => self.t0 = parse_u64(key, v)?,
                "mu" => self.mu = parse_f64(key, v)?,
                "driving" => self.driving = Driving::parse(v, base)?,
                "base_rate" => synth.base_rate = parse_f64(key, v)?,
                "amplitude" => synth.amplitude = parse_f64(key, v)?,
                "period" => synth.period = parse_f64(key, v)?,
                "noise" => synth.noise = NoiseSpec::parse(v)?,
                "delay" => self.delay = DistSource::parse(v, base)?,
                "lifetime" => self.lifetime = DistSource::parse(v, base)?,
                "g" => self.new_post = DistSource::parse(v, base)?,
                "seed" => self.seed = parse_u64(key, v)?,
                "steps" => self.steps = parse_u64(key, v)?,
                "init_agents" => self.init_agents = parse_u64(key, v)? as u32,
                "init_posts" => self.init_posts = parse_u64(key, v)? as u32,
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        if let Driving::Synthetic(s) = &mut self.driving {
            *s = synth;
        }
        Ok(())
    }

    /// Flat snapshot of every setting, in [`CONFIG_KEYS`] order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let synth = match &self.driving {
            Driving::Synthetic(s) => *s,
            _ => SyntheticDriving::default(),
        };
        vec![
            ("d1", self.map.d1.to_string()),
            ("d2", self.map.d2.to_string()),
            ("c1", self.map.c1.to_string()),
            ("c2", self.map.c2.to_string()),
            ("gamma", self.map.gamma.to_string()),
            ("q", self.map.q.to_string()),
            ("a0", self.a0.to_string()),
            ("t0", self.t0.to_string()),
            ("mu", self.mu.to_string()),
            ("driving", self.driving.describe()),
            ("base_rate", synth.base_rate.to_string()),
            ("amplitude", synth.amplitude.to_string()),
            ("period", synth.period.to_string()),
            ("noise", synth.noise.to_string()),
            ("delay", self.delay.describe()),
            ("lifetime", self.lifetime.describe()),
            ("g", self.new_post.describe()),
            ("seed", self.seed.to_string()),
            ("steps", self.steps.to_string()),
            ("init_agents", self.init_agents.to_string()),
            ("init_posts", self.init_posts.to_string()),
        ]
    }
}

/// Parses `key = value` lines. Duplicate keys are a conflict.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i as u64 + 1,
            message,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(parse_err("empty key".into()));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(parse_err(format!("key {key:?} given more than once")));
        }
    }
    Ok(out)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: {e} ({v:?})")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: {e} ({v:?})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_operating_point() {
        let c = SimConfig::default();
        assert_eq!((c.map.d1, c.map.d2, c.map.c1, c.map.c2), (1.0, 0.5, 1.0, 2.0));
        assert_eq!((c.map.gamma, c.map.q, c.a0), (0.05, 0.4, 0.5));
        assert_eq!((c.t0, c.mu), (576, 0.05));
        c.validate().unwrap();
    }

    #[test]
    fn parses_flat_file() {
        let text = "# comment\nsteps = 100\nseed=7\ndriving = synthetic\namplitude = 0.5\nnoise = long_memory:1.5:0.3\n";
        let kv = parse_key_values(text, Path::new("cfg")).unwrap();
        let mut c = SimConfig::default();
        c.apply(&kv, Path::new(".")).unwrap();
        assert_eq!(c.steps, 100);
        assert_eq!(c.seed, 7);
        match c.driving {
            Driving::Synthetic(s) => {
                assert_eq!(s.amplitude, 0.5);
                assert_eq!(s.noise, NoiseSpec::LongMemory { exponent: 1.5, strength: 0.3 });
            }
            other => panic!("unexpected driving {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_keys_fail() {
        assert!(parse_key_values("a=1\na=2\n", Path::new("c")).is_err());
        let kv = parse_key_values("colour = red\n", Path::new("c")).unwrap();
        assert!(SimConfig::default().apply(&kv, Path::new(".")).is_err());
        assert!(parse_key_values("no equals sign\n", Path::new("c")).is_err());
    }

    #[test]
    fn invalid_ranges_fail_validation() {
        let c = SimConfig { a0: 1.5, ..SimConfig::default() };
        assert!(c.validate().is_err());
        let c = SimConfig { t0: 0, ..SimConfig::default() };
        assert!(c.validate().is_err());
        let c = SimConfig { steps: 0, ..SimConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn unreadable_files_are_config_errors() {
        assert!(Driving::parse("empirical:/nonexistent/p.csv", Path::new(".")).is_err());
        assert!(DistSource::parse("/nonexistent/delay.csv", Path::new(".")).is_err());
        assert!(Driving::parse("sometimes", Path::new(".")).is_err());
    }

    #[test]
    fn key_value_snapshot_lists_every_key() {
        let kv = SimConfig::default().to_key_values();
        let keys: Vec<&str> = kv.iter().map(|(k, _)| *k).collect();
        assert_eq!(keys, CONFIG_KEYS);
    }
}
