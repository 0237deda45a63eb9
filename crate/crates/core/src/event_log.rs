//! Flat-file formats: the event log, the weighted edge list, and two-column
//! value tables.
//!
//! Event log header: `time_bin,agent_id,post_id,kind,arousal,valence`.
//! Empirical logs may leave `arousal` (and `valence`) blank.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AgentId, BipartiteGraph, CommentEvent, EventKind, PostId, TimeBin, ValenceClass};

pub const EVENT_LOG_HEADER: &str = "time_bin,agent_id,post_id,kind,arousal,valence";
pub const EDGE_LIST_HEADER: &str = "agent_id,post_id,weight";

/// One row of an event log as read from disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub time: TimeBin,
    pub agent: AgentId,
    pub post: PostId,
    pub kind: EventKind,
    pub arousal: Option<f64>,
    pub valence: Option<f64>,
}

impl LogRecord {
    pub fn valence_class(&self) -> Option<ValenceClass> {
        self.valence.map(ValenceClass::of)
    }

    /// Missing emotion values become 0 (a neutral, unaroused action).
    pub fn to_event(&self) -> CommentEvent {
        CommentEvent {
            time: self.time,
            agent: self.agent,
            post: self.post,
            kind: self.kind,
            arousal: self.arousal.unwrap_or(0.0),
            valence: self.valence.unwrap_or(0.0),
        }
    }
}

impl From<&CommentEvent> for LogRecord {
    fn from(e: &CommentEvent) -> Self {
        LogRecord {
            time: e.time,
            agent: e.agent,
            post: e.post,
            kind: e.kind,
            arousal: Some(e.arousal),
            valence: Some(e.valence),
        }
    }
}

pub fn write_events<W: Write>(mut w: W, events: &[CommentEvent]) -> io::Result<()> {
    writeln!(w, "{EVENT_LOG_HEADER}")?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.time, e.agent, e.post, e.kind, e.arousal, e.valence
        )?;
    }
    w.flush()
}

pub fn write_events_file(path: &Path, events: &[CommentEvent]) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    write_events(w, events)?;
    Ok(())
}

pub fn read_log_file(path: &Path) -> Result<Vec<LogRecord>> {
    read_log(File::open(path)?, path)
}

/// Parses an event log. `origin` only labels error messages.
pub fn read_log<R: Read>(reader: R, origin: &Path) -> Result<Vec<LogRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    expect_header(&mut rdr, EVENT_LOG_HEADER, origin)?;
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let field = |i: usize| row.get(i).unwrap_or("");
        let err = |column: &str, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message: format!("column {column}: {msg}"),
        };
        if row.len() != 6 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: format!("expected 6 columns, found {}", row.len()),
            });
        }
        let time = field(0)
            .parse::<TimeBin>()
            .map_err(|e| err("time_bin", e.to_string()))?;
        let agent = field(1)
            .parse::<u32>()
            .map_err(|e| err("agent_id", e.to_string()))?;
        let post = field(2)
            .parse::<u32>()
            .map_err(|e| err("post_id", e.to_string()))?;
        let kind = field(3).parse::<EventKind>().map_err(|e| err("kind", e))?;
        let arousal = optional_f64(field(4)).map_err(|e| err("arousal", e))?;
        let valence = optional_f64(field(5)).map_err(|e| err("valence", e))?;
        out.push(LogRecord {
            time,
            agent: AgentId(agent),
            post: PostId(post),
            kind,
            arousal,
            valence,
        });
    }
    Ok(out)
}

fn optional_f64(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if !v.is_finite() {
        return Err(format!("non-finite value {s}"));
    }
    Ok(Some(v))
}

fn line_of(row: &csv::StringRecord) -> u64 {
    row.position().map(|p| p.line()).unwrap_or(0)
}

fn expect_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &str, origin: &Path) -> Result<()> {
    let headers = rdr.headers()?.clone();
    let got: Vec<&str> = headers.iter().collect();
    let want: Vec<&str> = expected.split(',').collect();
    if got != want {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: 1,
            message: format!("expected header {expected:?}, found {:?}", got.join(",")),
        });
    }
    Ok(())
}

pub fn write_edges<W: Write>(mut w: W, graph: &BipartiteGraph) -> io::Result<()> {
    writeln!(w, "{EDGE_LIST_HEADER}")?;
    for (a, p, weight) in graph.edges() {
        writeln!(w, "{a},{p},{weight}")?;
    }
    w.flush()
}

pub fn write_edges_file(path: &Path, graph: &BipartiteGraph) -> Result<()> {
    write_edges(BufWriter::new(File::create(path)?), graph)?;
    Ok(())
}

pub fn read_edges_file(path: &Path) -> Result<BipartiteGraph> {
    read_edges(File::open(path)?, path)
}

pub fn read_edges<R: Read>(reader: R, origin: &Path) -> Result<BipartiteGraph> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    expect_header(&mut rdr, EDGE_LIST_HEADER, origin)?;
    let mut edges = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let parse = |i: usize, name: &str| -> Result<u32> {
            row.get(i)
                .unwrap_or("")
                .parse::<u32>()
                .map_err(|e| Error::Parse {
                    path: origin.to_path_buf(),
                    line,
                    message: format!("column {name}: {e}"),
                })
        };
        let (a, p, w) = (parse(0, "agent_id")?, parse(1, "post_id")?, parse(2, "weight")?);
        if w == 0 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: "column weight: must be at least 1".into(),
            });
        }
        edges.push((AgentId(a), PostId(p), w));
    }
    Ok(BipartiteGraph::from_edges(edges))
}

/// Writes a headed CSV of `(x, y)` rows.
pub fn write_pairs<W, X, Y>(mut w: W, header: (&str, &str), rows: impl IntoIterator<Item = (X, Y)>) -> io::Result<()>
where
    W: Write,
    X: std::fmt::Display,
    Y: std::fmt::Display,
{
    writeln!(w, "{},{}", header.0, header.1)?;
    for (x, y) in rows {
        writeln!(w, "{x},{y}")?;
    }
    w.flush()
}

/// Reads a headed two-column numeric CSV (any header names).
pub fn read_pairs<R: Read>(reader: R, origin: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = line_of(&row);
        let parse = |i: usize| -> Result<f64> {
            row.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    path: origin.to_path_buf(),
                    line,
                    message: format!("column {}: {e}", i + 1),
                })
        };
        if row.len() != 2 {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: format!("expected 2 columns, found {}", row.len()),
            });
        }
        out.push((parse(0)?, parse(1)?));
    }
    Ok(out)
}

pub fn read_pairs_file(path: &Path) -> Result<Vec<(f64, f64)>> {
    read_pairs(File::open(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_log_round_trips() {
        let events = vec![
            CommentEvent {
                time: 0,
                agent: AgentId(0),
                post: PostId(0),
                kind: EventKind::NewPost,
                arousal: 0.123456789,
                valence: -0.5,
            },
            CommentEvent {
                time: 3,
                agent: AgentId(1),
                post: PostId(0),
                kind: EventKind::Comment,
                arousal: 1.0,
                valence: 1.0 / 3.0,
            },
        ];
        let mut buf = Vec::new();
        write_events(&mut buf, &events).unwrap();
        let back = read_log(buf.as_slice(), Path::new("mem")).unwrap();
        let back: Vec<CommentEvent> = back.iter().map(LogRecord::to_event).collect();
        assert_eq!(back, events);
    }

    #[test]
    fn blank_arousal_is_allowed() {
        let text = format!("{EVENT_LOG_HEADER}\n5,1,2,comment,,-0.3\n");
        let rows = read_log(text.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(rows[0].arousal, None);
        assert_eq!(rows[0].valence_class(), Some(ValenceClass::Negative));
    }

    #[test]
    fn malformed_rows_report_line_and_column() {
        let text = format!("{EVENT_LOG_HEADER}\n0,0,0,new_post,0.5,0.1\n1,x,0,comment,0.5,0.1\n");
        let err = read_log(text.as_bytes(), Path::new("log.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("log.csv:3"), "{msg}");
        assert!(msg.contains("agent_id"), "{msg}");

        let bad_kind = format!("{EVENT_LOG_HEADER}\n0,0,0,reply,0.5,0.1\n");
        assert!(read_log(bad_kind.as_bytes(), Path::new("m")).is_err());
        let bad_header = "t,a,p,k,a,v\n";
        assert!(read_log(bad_header.as_bytes(), Path::new("m")).is_err());
    }

    #[test]
    fn edge_list_round_trips() {
        let g = BipartiteGraph::from_edges([
            (AgentId(0), PostId(0), 3),
            (AgentId(2), PostId(1), 1),
        ]);
        let mut buf = Vec::new();
        write_edges(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("agent_id,post_id,weight\n0,0,3\n2,1,1\n"));
        let back = read_edges(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back.weight(AgentId(0), PostId(0)), 3);
        assert_eq!(back.n_agents(), 3);
        assert_eq!(back.total_weight(), 4);
    }
}
