//! Line-oriented text formats for instances and solutions.
//!
//! Matching instance:
//!
//! ```text
//! [proposers]
//! 1: 1 2
//! 2: 2 1
//! [responders]
//! 1: 1 2
//! 2: 2 1
//! ```
//!
//! Placement instance: `[vacancies]` (ids), `[teachers]` (ranked ids on one
//! line), `[preferences]` (`teacher: vacancies...`) and `[initial]`
//! (`teacher vacancy` pairs).
//!
//! Graph: a `D` or `U` header, then `v <id>` and `e <id> <id>` lines.
//!
//! In every format `#` starts a comment and blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::graphs::{DiGraph, UGraph, Vertex};
use crate::matching::{AgentId, Matching, PlacementInstance, PrefTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        message: message.into(),
    })
}

/// Nonblank lines with comments stripped, paired with 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_id<T: FromStr>(line: usize, token: &str) -> Result<T, FormatError> {
    token
        .parse()
        .or_else(|_| err(line, format!("expected a non-negative integer id, found {token:?}")))
}

fn parse_ids<T: FromStr>(line: usize, text: &str) -> Result<Vec<T>, FormatError> {
    text.split_whitespace().map(|t| parse_id(line, t)).collect()
}

type Sections<'a> = BTreeMap<String, Vec<(usize, &'a str)>>;

/// Splits a file into `[name]` sections, rejecting unknown or repeated
/// names and content before the first header.
fn sections<'a>(text: &'a str, allowed: &[&str]) -> Result<Sections<'a>, FormatError> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (n, line) in content_lines(text) {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_ascii_lowercase();
            if !allowed.contains(&name.as_str()) {
                return err(n, format!("unknown section [{name}]"));
            }
            if out.contains_key(&name) {
                return err(n, format!("section [{name}] appears twice"));
            }
            out.insert(name.clone(), Vec::new());
            current = Some(name);
        } else {
            match &current {
                Some(name) => out.get_mut(name).expect("inserted above").push((n, line)),
                None => return err(n, "content before the first [section]"),
            }
        }
    }
    Ok(out)
}

fn parse_pref_rows(rows: &[(usize, &str)]) -> Result<PrefTable, FormatError> {
    let mut prefs = BTreeMap::new();
    for &(n, line) in rows {
        let Some((agent, list)) = line.split_once(':') else {
            return err(n, "expected `id: id id ...`");
        };
        let agent: AgentId = parse_id(n, agent.trim())?;
        let list = parse_ids(n, list)?;
        if prefs.insert(agent, list).is_some() {
            return err(n, format!("agent {agent} listed twice"));
        }
    }
    PrefTable::new(prefs).or_else(|e| {
        let n = rows
            .iter()
            .find(|(_, l)| l.trim_start().starts_with(&format!("{}:", e.agent)))
            .map_or(0, |r| r.0);
        err(n, e.to_string())
    })
}

pub fn parse_matching_instance(text: &str) -> Result<(PrefTable, PrefTable), FormatError> {
    let s = sections(text, &["proposers", "responders"])?;
    let table = |name: &str| parse_pref_rows(s.get(name).map(Vec::as_slice).unwrap_or(&[]));
    Ok((table("proposers")?, table("responders")?))
}

pub fn parse_placement_instance(text: &str) -> Result<PlacementInstance, FormatError> {
    let s = sections(text, &["vacancies", "teachers", "preferences", "initial"])?;
    let rows = |name: &str| s.get(name).map(Vec::as_slice).unwrap_or(&[]);

    let mut vacancies = BTreeSet::new();
    for &(n, line) in rows("vacancies") {
        vacancies.extend(parse_ids::<AgentId>(n, line)?);
    }
    let teachers = match rows("teachers") {
        [] => Vec::new(),
        [(n, line)] => parse_ids(*n, line)?,
        [_, (n, _), ..] => return err(*n, "[teachers] takes a single ranked line"),
    };
    let preferences = parse_pref_rows(rows("preferences"))?;
    let mut initial = BTreeMap::new();
    for &(n, line) in rows("initial") {
        match parse_ids::<AgentId>(n, line)?.as_slice() {
            &[t, v] => {
                if initial.insert(t, v).is_some() {
                    return err(n, format!("teacher {t} placed twice"));
                }
            }
            _ => return err(n, "expected `teacher vacancy`"),
        }
    }
    Ok(PlacementInstance {
        vacancies,
        teachers,
        preferences,
        initial,
    })
}

/// `proposer -> responder` lines.
pub fn parse_matching(text: &str) -> Result<Matching, FormatError> {
    let mut m = Matching::new();
    for (n, line) in content_lines(text) {
        let Some((p, r)) = line.split_once("->") else {
            return err(n, "expected `proposer -> responder`");
        };
        let p: AgentId = parse_id(n, p.trim())?;
        if m.contains(p) {
            return err(n, format!("proposer {p} matched twice"));
        }
        m.insert(p, parse_id(n, r.trim())?);
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphInput {
    Directed(DiGraph),
    Undirected(UGraph),
}

pub fn parse_graph(text: &str) -> Result<GraphInput, FormatError> {
    let mut lines = content_lines(text);
    let directed = match lines.next() {
        Some((_, "D")) => true,
        Some((_, "U")) => false,
        Some((n, other)) => return err(n, format!("expected header `D` or `U`, found {other:?}")),
        None => return err(0, "empty graph file"),
    };
    let mut vertices = BTreeSet::new();
    let mut edges: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    for (n, line) in lines {
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next(), tokens.next(), tokens.next()) {
            (Some("v"), Some(v), None, None) => {
                vertices.insert(parse_id(n, v)?);
            }
            (Some("e"), Some(a), Some(b), None) => {
                let (a, b): (Vertex, Vertex) = (parse_id(n, a)?, parse_id(n, b)?);
                if !directed {
                    if a == b {
                        return err(n, format!("self-loop at {a} in an undirected graph"));
                    }
                    if edges.contains(&(b, a)) {
                        return err(n, format!("edge {a}-{b} listed twice"));
                    }
                }
                if !edges.insert((a, b)) {
                    return err(n, format!("edge {a} {b} listed twice"));
                }
                vertices.extend([a, b]);
            }
            _ => return err(n, "expected `v <id>` or `e <id> <id>`"),
        }
    }
    Ok(if directed {
        GraphInput::Directed(DiGraph::new(vertices, edges))
    } else {
        GraphInput::Undirected(UGraph::from_edges(vertices, edges).expect("self-loops rejected above"))
    })
}

/// One vertex sequence per nonblank line.
pub fn parse_sequences(text: &str) -> Result<Vec<Vec<Vertex>>, FormatError> {
    content_lines(text).map(|(n, line)| parse_ids(n, line)).collect()
}

pub fn render_sequence(s: &[Vertex]) -> String {
    s.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn render_prefs(out: &mut String, table: &PrefTable) {
    for (agent, list) in table.iter() {
        let _ = writeln!(out, "{agent}: {}", render_sequence(list));
    }
}

pub fn render_matching_instance(men: &PrefTable, women: &PrefTable) -> String {
    let mut out = String::from("[proposers]\n");
    render_prefs(&mut out, men);
    out.push_str("[responders]\n");
    render_prefs(&mut out, women);
    out
}

pub fn render_placement_instance(inst: &PlacementInstance) -> String {
    let mut out = String::from("[vacancies]\n");
    let _ = writeln!(
        out,
        "{}",
        render_sequence(&inst.vacancies.iter().copied().collect::<Vec<_>>())
    );
    out.push_str("[teachers]\n");
    let _ = writeln!(out, "{}", render_sequence(&inst.teachers));
    out.push_str("[preferences]\n");
    render_prefs(&mut out, &inst.preferences);
    out.push_str("[initial]\n");
    for (t, v) in &inst.initial {
        let _ = writeln!(out, "{t} {v}");
    }
    out
}

pub fn render_digraph(g: &DiGraph) -> String {
    let mut out = String::from("D\n");
    for v in g.vertices() {
        let _ = writeln!(out, "v {v}");
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "e {a} {b}");
    }
    out
}

pub fn render_ugraph(g: &UGraph) -> String {
    let mut out = String::from("U\n");
    for v in g.vertices() {
        let _ = writeln!(out, "v {v}");
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "e {a} {b}");
    }
    out
}
