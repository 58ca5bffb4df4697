//! Deliberately naive reference implementations, used to cross-check the
//! solvers and predicates on small instances. Each oracle refuses inputs
//! above its size bound rather than run for hours.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graphs::{is_euler_circuit, is_top_sorting, DiGraph, UGraph, Vertex};
use crate::matching::{AgentId, Matching, PlacementInstance, PrefTable};
use crate::search_sort::Key;
use crate::seq::{multiset_add, multiset_remove, Multiset};

pub const MAX_PATH_EDGES: usize = 20;
pub const MAX_ORDER_VERTICES: usize = 8;
pub const MAX_MATCHING_AGENTS: usize = 4;
pub const MAX_EULER_EDGES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} has size {actual}, above the oracle bound {limit}")]
    SizeExceeded {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("{command:?} is not a {kind} command")]
    IllFormed { kind: ContainerKind, command: Command },
}

fn bounded(what: &'static str, limit: usize, actual: usize) -> Result<(), OracleError> {
    if actual > limit {
        Err(OracleError::SizeExceeded { what, limit, actual })
    } else {
        Ok(())
    }
}

/// A nonempty path from `u` to `v` that repeats no edge, evaluated by the
/// literal recursive definition: either `(u, v)` is an edge, or some edge
/// leaves `u` and the rest of the path exists without that edge.
pub fn exists_simple_path(g: &DiGraph, u: Vertex, v: Vertex) -> Result<bool, OracleError> {
    bounded("edge set", MAX_PATH_EDGES, g.edges().len())?;
    let edges: Vec<(Vertex, Vertex)> = g.edges().iter().copied().collect();
    Ok(path_rec(&edges, &mut vec![false; edges.len()], u, v))
}

fn path_rec(edges: &[(Vertex, Vertex)], removed: &mut [bool], u: Vertex, v: Vertex) -> bool {
    if edges.iter().zip(removed.iter()).any(|(&e, &r)| !r && e == (u, v)) {
        return true;
    }
    for i in 0..edges.len() {
        if removed[i] || edges[i].0 != u {
            continue;
        }
        removed[i] = true;
        let found = path_rec(edges, removed, edges[i].1, v);
        removed[i] = false;
        if found {
            return true;
        }
    }
    false
}

/// Acyclicity by definition: no vertex has a simple path to itself.
pub fn acyclic_by_definition(g: &DiGraph) -> Result<bool, OracleError> {
    for &v in g.vertices() {
        if exists_simple_path(g, v, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every permutation of the vertices that is a topological sorting.
pub fn all_topological_orders(g: &DiGraph) -> Result<BTreeSet<Vec<Vertex>>, OracleError> {
    bounded("vertex set", MAX_ORDER_VERTICES, g.vertices().len())?;
    let mut out = BTreeSet::new();
    let mut perm: Vec<Vertex> = g.vertices().iter().copied().collect();
    permutations(&mut perm, 0, &mut |p| {
        if is_top_sorting(p, g) {
            out.insert(p.to_vec());
        }
    });
    Ok(out)
}

fn permutations<T: Copy>(xs: &mut [T], k: usize, visit: &mut impl FnMut(&[T])) {
    if k == xs.len() {
        visit(xs);
        return;
    }
    for i in k..xs.len() {
        xs.swap(k, i);
        permutations(xs, k + 1, visit);
        xs.swap(k, i);
    }
}

fn rank(list: &[AgentId], x: AgentId) -> Option<usize> {
    list.iter().position(|&y| y == x)
}

/// Every pair that blocks `couples`, found by comparing list positions
/// directly rather than through the stability predicate. A missing
/// partner ranks below everyone listed.
pub fn blocking_pairs(couples: &Matching, men: &PrefTable, women: &PrefTable) -> Vec<(AgentId, AgentId)> {
    let mut out = Vec::new();
    for (m, m_list) in men.iter() {
        for (w, w_list) in women.iter() {
            let (Some(m_rank_w), Some(w_rank_m)) = (rank(m_list, w), rank(w_list, m)) else {
                continue;
            };
            let m_better = match couples.get(m) {
                None => true,
                Some(cur) => rank(m_list, cur).is_some_and(|r| m_rank_w < r),
            };
            let w_better = couples
                .pairs()
                .filter(|&(_, r)| r == w)
                .all(|(m2, _)| rank(w_list, m2).is_some_and(|r| w_rank_m < r));
            if m_better && w_better {
                out.push((m, w));
            }
        }
    }
    out
}

fn mutually_acceptable(m: AgentId, w: AgentId, men: &PrefTable, women: &PrefTable) -> bool {
    men.get(m).is_some_and(|l| l.contains(&w)) && women.get(w).is_some_and(|l| l.contains(&m))
}

/// Enumerates every injective assignment of proposers to acceptable
/// counterparts, including leaving proposers unmatched.
fn partial_matchings(
    proposers: &[AgentId],
    acceptable: &dyn Fn(AgentId, AgentId) -> bool,
    counterparts: &[AgentId],
) -> Vec<Matching> {
    fn go(
        i: usize,
        proposers: &[AgentId],
        acceptable: &dyn Fn(AgentId, AgentId) -> bool,
        counterparts: &[AgentId],
        current: &mut Matching,
        taken: &mut BTreeSet<AgentId>,
        out: &mut Vec<Matching>,
    ) {
        let Some(&p) = proposers.get(i) else {
            out.push(current.clone());
            return;
        };
        go(i + 1, proposers, acceptable, counterparts, current, taken, out);
        for &c in counterparts {
            if !taken.contains(&c) && acceptable(p, c) {
                taken.insert(c);
                current.insert(p, c);
                go(i + 1, proposers, acceptable, counterparts, current, taken, out);
                current.remove(p);
                taken.remove(&c);
            }
        }
    }
    let mut out = Vec::new();
    go(
        0,
        proposers,
        acceptable,
        counterparts,
        &mut Matching::new(),
        &mut BTreeSet::new(),
        &mut out,
    );
    out
}

/// Every valid, injective, possibly partial matching with no blocking pair.
pub fn all_stable_matchings(men: &PrefTable, women: &PrefTable) -> Result<BTreeSet<Matching>, OracleError> {
    bounded("proposer side", MAX_MATCHING_AGENTS, men.len())?;
    bounded("responder side", MAX_MATCHING_AGENTS, women.len())?;
    let proposers: Vec<AgentId> = men.agents().collect();
    let responders: Vec<AgentId> = women.agents().collect();
    Ok(
        partial_matchings(&proposers, &|m, w| mutually_acceptable(m, w, men, women), &responders)
            .into_iter()
            .filter(|c| blocking_pairs(c, men, women).is_empty())
            .collect(),
    )
}

/// Why a placement fails the placement postconditions, if it does. The
/// checks restate the blocking condition with explicit ranks.
pub fn placement_violation(inst: &PlacementInstance, placement: &Matching) -> Option<String> {
    if !placement.is_injective() {
        return Some("two teachers share a vacancy".into());
    }
    for (t, v) in placement.pairs() {
        if !inst.teachers.contains(&t) {
            return Some(format!("{t} is not a ranked teacher"));
        }
        if !inst.preferences.get(t).is_some_and(|l| l.contains(&v)) {
            return Some(format!("teacher {t} did not ask for vacancy {v}"));
        }
    }
    let incumbent: BTreeMap<AgentId, AgentId> = inst.initial.iter().map(|(&t, &v)| (v, t)).collect();
    let teacher_rank = |t: AgentId| rank(&inst.teachers, t).unwrap_or(usize::MAX);
    // Vacancy-side priority: incumbent first, then global rank.
    let priority = |v: AgentId, t: AgentId| (incumbent.get(&v) != Some(&t), teacher_rank(t));
    for &t in &inst.teachers {
        let list = inst.preferences.get(t).unwrap_or(&[]);
        let current = placement.get(t).and_then(|v| rank(list, v)).unwrap_or(usize::MAX);
        for (r, &v) in list.iter().enumerate().take(current) {
            let beats_holder = match placement.partner_of(v) {
                None => true,
                Some(holder) => priority(v, t) < priority(v, holder),
            };
            if beats_holder {
                return Some(format!(
                    "teacher {t} and vacancy {v} block (teacher's choice #{})",
                    r + 1
                ));
            }
        }
    }
    if let Some((&t, _)) = inst.initial.iter().find(|&(t, _)| !placement.contains(*t)) {
        return Some(format!("initially placed teacher {t} lost their placement"));
    }
    None
}

/// Every placement that passes [`placement_violation`].
pub fn all_stable_placements(inst: &PlacementInstance) -> Result<BTreeSet<Matching>, OracleError> {
    bounded("teacher list", MAX_MATCHING_AGENTS, inst.teachers.len())?;
    bounded("vacancy set", MAX_MATCHING_AGENTS, inst.vacancies.len())?;
    let vacancies: Vec<AgentId> = inst.vacancies.iter().copied().collect();
    let acceptable = |t: AgentId, v: AgentId| inst.preferences.get(t).is_some_and(|l| l.contains(&v));
    Ok(partial_matchings(&inst.teachers, &acceptable, &vacancies)
        .into_iter()
        .filter(|p| placement_violation(inst, p).is_none())
        .collect())
}

/// Some Euler circuit found by backtracking over edge orders from each
/// start vertex in turn.
pub fn exhaustive_euler_circuit(g: &UGraph) -> Result<Option<Vec<Vertex>>, OracleError> {
    let edges = g.edges();
    bounded("edge set", MAX_EULER_EDGES, edges.len())?;
    for start in g.vertices() {
        let mut used = vec![false; edges.len()];
        let mut walk = vec![start];
        if euler_rec(&edges, &mut used, &mut walk) {
            debug_assert!(is_euler_circuit(&walk, g));
            return Ok(Some(walk));
        }
    }
    Ok(None)
}

fn euler_rec(edges: &[(Vertex, Vertex)], used: &mut [bool], walk: &mut Vec<Vertex>) -> bool {
    let at = *walk.last().expect("walk starts nonempty");
    if used.iter().all(|&u| u) {
        return at == walk[0];
    }
    for i in 0..edges.len() {
        let (a, b) = edges[i];
        let next = if a == at {
            b
        } else if b == at {
            a
        } else {
            continue;
        };
        if used[i] {
            continue;
        }
        used[i] = true;
        walk.push(next);
        if euler_rec(edges, used, walk) {
            return true;
        }
        walk.pop();
        used[i] = false;
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContainerKind {
    Heap,
    HashSet,
    TreeSet,
}

impl ContainerKind {
    pub const ALL: [ContainerKind; 3] = [ContainerKind::Heap, ContainerKind::HashSet, ContainerKind::TreeSet];

    pub fn name(self) -> &'static str {
        match self {
            ContainerKind::Heap => "heap",
            ContainerKind::HashSet => "hashset",
            ContainerKind::TreeSet => "treeset",
        }
    }

    pub fn accepts(self, command: &Command) -> bool {
        use Command::*;
        match self {
            ContainerKind::Heap => matches!(command, Insert(_) | DeleteMax | Max | Len),
            ContainerKind::HashSet => matches!(command, Insert(_) | Delete(_) | Contains(_) | Len),
            ContainerKind::TreeSet => {
                matches!(command, Insert(_) | Delete(_) | Contains(_) | Min | Max | Len | Sorted)
            }
        }
    }
}

impl fmt::Display for ContainerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Insert(Key),
    Delete(Key),
    DeleteMax,
    Contains(Key),
    Min,
    Max,
    Len,
    Sorted,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Insert(x) => write!(f, "insert {x}"),
            Command::Delete(x) => write!(f, "delete {x}"),
            Command::DeleteMax => f.write_str("delete-max"),
            Command::Contains(x) => write!(f, "contains {x}"),
            Command::Min => f.write_str("min"),
            Command::Max => f.write_str("max"),
            Command::Len => f.write_str("len"),
            Command::Sorted => f.write_str("sorted"),
        }
    }
}

/// What a caller can see after one command. `Refused` is a call whose
/// precondition does not hold (deleting from an empty heap, inserting a
/// present value into the hash set, ...).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observable {
    Unit,
    Refused,
    Bool(bool),
    Value(Key),
    Size(usize),
    Seq(Vec<Key>),
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Unit => f.write_str("ok"),
            Observable::Refused => f.write_str("refused"),
            Observable::Bool(b) => write!(f, "{b}"),
            Observable::Value(x) => write!(f, "{x}"),
            Observable::Size(n) => write!(f, "size {n}"),
            Observable::Seq(s) => write!(f, "{s:?}"),
        }
    }
}

/// The abstract contents of a container: a multiset for the heap, a set
/// (all counts 1) for the others.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelState {
    pub elems: Multiset<Key>,
}

impl ModelState {
    pub fn len(&self) -> usize {
        self.elems.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn set(&self) -> BTreeSet<Key> {
        self.elems.keys().copied().collect()
    }
}

pub fn reference_model_step(
    kind: ContainerKind,
    command: &Command,
    state: &ModelState,
) -> Result<(ModelState, Observable), OracleError> {
    if !kind.accepts(command) {
        return Err(OracleError::IllFormed {
            kind,
            command: *command,
        });
    }
    let same = |obs| Ok((state.clone(), obs));
    let with = |elems| Ok((ModelState { elems }, Observable::Unit));
    let present = |x: &Key| state.elems.contains_key(x);
    match (*command, kind) {
        (Command::Insert(x), ContainerKind::Heap) => with(multiset_add(&state.elems, &x)),
        (Command::Insert(x), ContainerKind::HashSet) if present(&x) => same(Observable::Refused),
        (Command::Insert(x), _) if present(&x) => same(Observable::Unit),
        (Command::Insert(x), _) => with(multiset_add(&state.elems, &x)),
        (Command::Delete(x), ContainerKind::HashSet) if !present(&x) => same(Observable::Refused),
        (Command::Delete(x), _) => with(multiset_remove(&state.elems, &x)),
        (Command::DeleteMax, _) => match state.elems.keys().next_back() {
            None => same(Observable::Refused),
            Some(&x) => Ok((
                ModelState {
                    elems: multiset_remove(&state.elems, &x),
                },
                Observable::Value(x),
            )),
        },
        (Command::Contains(x), _) => same(Observable::Bool(present(&x))),
        (Command::Min, _) => same(
            state
                .elems
                .keys()
                .next()
                .map_or(Observable::Refused, |&x| Observable::Value(x)),
        ),
        (Command::Max, _) => same(
            state
                .elems
                .keys()
                .next_back()
                .map_or(Observable::Refused, |&x| Observable::Value(x)),
        ),
        (Command::Len, _) => same(Observable::Size(state.len())),
        (Command::Sorted, _) => same(Observable::Seq(state.elems.keys().copied().collect())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Agree,
    Disagree,
}

/// One oracle comparison, printable as a replay record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    pub instance: String,
    pub expected: String,
    pub actual: String,
    pub verdict: Verdict,
}

impl OracleReport {
    pub fn new(
        instance: impl Into<String>,
        expected: impl Into<String>,
        actual: impl Into<String>,
        agree: bool,
    ) -> Self {
        OracleReport {
            instance: instance.into(),
            expected: expected.into(),
            actual: actual.into(),
            verdict: if agree { Verdict::Agree } else { Verdict::Disagree },
        }
    }

    pub fn agrees(&self) -> bool {
        self.verdict == Verdict::Agree
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict:  {:?}", self.verdict)?;
        writeln!(f, "instance: {}", self.instance)?;
        writeln!(f, "expected: {}", self.expected)?;
        write!(f, "actual:   {}", self.actual)
    }
}
