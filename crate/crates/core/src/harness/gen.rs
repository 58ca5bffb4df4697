//! Seeded instance generators. All randomness comes from `ChaCha8Rng`, whose
//! output stream is fixed by its algorithm, so a seed replays the same
//! instance on every platform and build.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graphs::{DiGraph, UGraph, Vertex};
use crate::matching::{AgentId, PlacementInstance, PrefTable};
use crate::oracles::{Command, ContainerKind};
use crate::search_sort::Key;

pub use rand::SeedableRng;

pub type CaseRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CaseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const MAX_COMMANDS: usize = 64;

/// Values small enough that inserts, deletes and lookups keep colliding.
const VALUE_RANGE: std::ops::RangeInclusive<Key> = -3..=12;

pub fn command(rng: &mut CaseRng, kind: ContainerKind) -> Command {
    let x = rng.gen_range(VALUE_RANGE);
    let choices: &[Command] = match kind {
        ContainerKind::Heap => &[Command::Insert(x), Command::DeleteMax, Command::Max, Command::Len],
        ContainerKind::HashSet => &[
            Command::Insert(x),
            Command::Delete(x),
            Command::Contains(x),
            Command::Len,
        ],
        ContainerKind::TreeSet => &[
            Command::Insert(x),
            Command::Delete(x),
            Command::Contains(x),
            Command::Min,
            Command::Max,
            Command::Len,
            Command::Sorted,
        ],
    };
    // Inserts get double weight so containers actually fill up.
    if rng.gen_bool(0.3) {
        Command::Insert(x)
    } else {
        *choices.choose(rng).expect("nonempty")
    }
}

pub fn commands(rng: &mut CaseRng, kind: ContainerKind) -> Vec<Command> {
    let len = rng.gen_range(1..=MAX_COMMANDS);
    (0..len).map(|_| command(rng, kind)).collect()
}

/// Initial capacity for fuzzed hash sets: tiny, so rehashing happens.
pub fn hash_capacity(rng: &mut CaseRng) -> usize {
    *[1usize, 2, 3, 5, 7].choose(rng).expect("nonempty")
}

fn pref_list(rng: &mut CaseRng, others: &[AgentId]) -> Vec<AgentId> {
    let len = rng.gen_range(0..=others.len());
    let mut list = others.to_vec();
    list.shuffle(rng);
    list.truncate(len);
    list
}

/// Proposer and responder tables with up to `max_side` agents per side and
/// incomplete lists of uniform length.
pub fn matching_instance(rng: &mut CaseRng, max_side: usize) -> (PrefTable, PrefTable) {
    let men: Vec<AgentId> = (1..=rng.gen_range(0..=max_side) as AgentId).collect();
    let women: Vec<AgentId> = (1..=rng.gen_range(0..=max_side) as AgentId).collect();
    let table = |rng: &mut CaseRng, side: &[AgentId], other: &[AgentId]| {
        PrefTable::new(side.iter().map(|&a| (a, pref_list(rng, other))).collect()).expect("shuffled, no duplicates")
    };
    let m = table(rng, &men, &women);
    let w = table(rng, &women, &men);
    (m, w)
}

/// A placement instance satisfying every placement precondition: an
/// initially placed teacher lists their current vacancy last.
pub fn placement_instance(rng: &mut CaseRng, max_side: usize) -> PlacementInstance {
    let vacancies: Vec<AgentId> = (1..=rng.gen_range(0..=max_side) as AgentId).collect();
    let mut teachers: Vec<AgentId> = (1..=rng.gen_range(0..=max_side) as AgentId).collect();
    teachers.shuffle(rng);

    let mut free = vacancies.clone();
    free.shuffle(rng);
    let mut initial = BTreeMap::new();
    let mut prefs = BTreeMap::new();
    for &t in &teachers {
        let mut list = pref_list(rng, &vacancies);
        if rng.gen_bool(0.4) {
            if let Some(v) = free.pop() {
                initial.insert(t, v);
                list.retain(|&x| x != v);
                list.push(v);
            }
        }
        prefs.insert(t, list);
    }
    PlacementInstance {
        vacancies: vacancies.into_iter().collect(),
        teachers,
        preferences: PrefTable::new(prefs).expect("no duplicates"),
        initial,
    }
}

/// Vertices spread over random layers, edges only from lower to higher
/// layers. Labels are shuffled so that id order says nothing about layers.
pub fn layered_dag(rng: &mut CaseRng, max_vertices: usize) -> DiGraph {
    let n = rng.gen_range(0..=max_vertices);
    let layers = rng.gen_range(1..=n.max(1));
    let mut labels: Vec<Vertex> = (1..=n as Vertex).collect();
    labels.shuffle(rng);
    let layer: Vec<usize> = (0..n).map(|_| rng.gen_range(0..layers)).collect();
    let density = rng.gen_range(0.1..0.7);
    let mut g = DiGraph::new(labels.iter().copied(), []);
    for i in 0..n {
        for j in 0..n {
            if layer[i] < layer[j] && rng.gen_bool(density) {
                g.add_edge(labels[i], labels[j]);
            }
        }
    }
    g
}

/// A layered DAG that, a third of the time, also gets a few arbitrary
/// edges (self-loops included) that may close cycles.
pub fn digraph(rng: &mut CaseRng, max_vertices: usize) -> DiGraph {
    let mut g = layered_dag(rng, max_vertices);
    let vs: Vec<Vertex> = g.vertices().iter().copied().collect();
    if !vs.is_empty() && rng.gen_bool(1.0 / 3.0) {
        for _ in 0..rng.gen_range(1..=2) {
            let a = *vs.choose(rng).expect("nonempty");
            let b = *vs.choose(rng).expect("nonempty");
            g.add_edge(a, b);
        }
    }
    g
}

/// A connected graph with all degrees even, built by superposing
/// edge-disjoint cycles that each touch the graph built so far. Stops
/// before exceeding `max_edges`.
pub fn even_connected_graph(rng: &mut CaseRng, max_vertices: usize, max_edges: usize) -> UGraph {
    let n = rng.gen_range(1..=max_vertices.max(1)) as Vertex;
    let start = rng.gen_range(1..=n);
    let mut g = UGraph::from_edges([start], []).expect("no edges");
    let mut edges: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    let attempts = rng.gen_range(0..=4);
    for _ in 0..attempts {
        if n < 3 {
            break;
        }
        let touched: Vec<Vertex> = g.vertices().collect();
        let anchor = *touched.choose(rng).expect("nonempty");
        let mut others: Vec<Vertex> = (1..=n).filter(|&v| v != anchor).collect();
        others.shuffle(rng);
        let len = rng.gen_range(3..=n as usize);
        let mut cycle = vec![anchor];
        cycle.extend_from_slice(&others[..len - 1]);
        let cycle_edges: Vec<(Vertex, Vertex)> = (0..len)
            .map(|i| {
                let (a, b) = (cycle[i], cycle[(i + 1) % len]);
                (a.min(b), a.max(b))
            })
            .collect();
        if edges.len() + len > max_edges || cycle_edges.iter().any(|e| edges.contains(e)) {
            continue;
        }
        edges.extend(cycle_edges);
        g = UGraph::from_edges([start], edges.iter().copied()).expect("no self-loops");
    }
    g
}

/// Any small graph without isolated vertices (except the one-vertex
/// graph): degrees and connectivity are left to chance.
pub fn small_ugraph(rng: &mut CaseRng, max_vertices: usize, max_edges: usize) -> UGraph {
    let n = rng.gen_range(1..=max_vertices.max(2)) as Vertex;
    let mut pairs: Vec<(Vertex, Vertex)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    pairs.truncate(rng.gen_range(0..=max_edges.min(pairs.len())));
    if pairs.is_empty() {
        UGraph::from_edges([rng.gen_range(1..=n)], []).expect("no edges")
    } else {
        UGraph::from_edges([], pairs).expect("no self-loops")
    }
}

/// A random trail (no repeated edge) over up to `n` vertices; the graph
/// made of exactly its edges has it as an Euler trail.
pub fn random_trail(rng: &mut CaseRng, n: Vertex, max_len: usize) -> Vec<Vertex> {
    let mut used = BTreeSet::new();
    let mut at = rng.gen_range(1..=n);
    let mut trail = vec![at];
    for _ in 0..max_len {
        let next: Vec<Vertex> = (1..=n)
            .filter(|&w| w != at && !used.contains(&(at.min(w), at.max(w))))
            .collect();
        let Some(&w) = next.choose(rng) else { break };
        used.insert((at.min(w), at.max(w)));
        trail.push(w);
        at = w;
    }
    trail
}

pub fn keys(rng: &mut CaseRng, max_len: usize, range: std::ops::RangeInclusive<Key>) -> Vec<Key> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(range.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{has_even_degrees, is_acyclic, is_connected};
    use crate::matching::stable_matching;

    #[test]
    fn same_seed_same_instances() {
        let a: Vec<_> = (0..5).map(|_| commands(&mut rng(3), ContainerKind::TreeSet)).collect();
        let b: Vec<_> = (0..5).map(|_| commands(&mut rng(3), ContainerKind::TreeSet)).collect();
        assert_eq!(a, b);
        assert_eq!(layered_dag(&mut rng(9), 10), layered_dag(&mut rng(9), 10));
    }

    #[test]
    fn generated_instances_meet_their_promises() {
        let mut r = rng(1);
        for _ in 0..200 {
            assert!(is_acyclic(&layered_dag(&mut r, 10)));
            let g = even_connected_graph(&mut r, 7, 8);
            assert!(has_even_degrees(&g) && is_connected(&g) && g.edge_count() <= 8, "{g:?}");
            let inst = placement_instance(&mut r, 4);
            assert!(inst.p1() && inst.p2() && inst.p3() && inst.p4() && inst.initial_is_injective());
            let (m, w) = matching_instance(&mut r, 6);
            assert!(stable_matching(&mut crate::contract::ContractContext::default(), &m, &w).is_ok());
            let c = commands(&mut r, ContainerKind::Heap);
            assert!(!c.is_empty() && c.len() <= MAX_COMMANDS);
        }
    }
}
