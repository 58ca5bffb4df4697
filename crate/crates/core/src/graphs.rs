//! Kahn's topological sort on directed graphs and Hierholzer's Euler
//! circuit construction on undirected graphs, together with the predicates
//! that certify their outputs.
//!
//! Every free choice is made deterministically: Kahn takes the smallest
//! vertex with no incoming edges, the Euler DFS starts at the smallest
//! vertex and follows the smallest remaining neighbour, and subcircuits are
//! spliced in at the lowest index that still has unexplored edges.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::contract::{ContractContext, ContractViolation, Fault};
use crate::seq::multiset;

pub type Vertex = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    /// Kahn's loop ran out of zero-indegree vertices; `remaining` is the
    /// subgraph's vertex set at that point.
    #[error("cycle detected among vertices {remaining:?}")]
    CycleDetected { remaining: Vec<Vertex> },
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// A directed graph as a vertex set and an edge set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiGraph {
    vertices: BTreeSet<Vertex>,
    edges: BTreeSet<(Vertex, Vertex)>,
}

impl DiGraph {
    /// No validation: use [`DiGraph::is_valid`] to check that edges stay in
    /// the vertex set.
    pub fn new(vertices: impl IntoIterator<Item = Vertex>, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        DiGraph {
            vertices: vertices.into_iter().collect(),
            edges: edges.into_iter().collect(),
        }
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(Vertex, Vertex)> {
        &self.edges
    }

    pub fn add_vertex(&mut self, v: Vertex) {
        self.vertices.insert(v);
    }

    /// Adds the edge and both endpoints.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) {
        self.vertices.insert(u);
        self.vertices.insert(v);
        self.edges.insert((u, v));
    }

    pub fn is_valid(&self) -> bool {
        self.edges
            .iter()
            .all(|(u, v)| self.vertices.contains(u) && self.vertices.contains(v))
    }

    pub fn has_incoming_edges(&self, v: Vertex) -> bool {
        self.vertices.iter().any(|&u| self.edges.contains(&(u, v)))
    }

    /// The graph without `v` and its incident edges.
    pub fn remove_vertex(&self, v: Vertex) -> DiGraph {
        DiGraph {
            vertices: self.vertices.iter().copied().filter(|&u| u != v).collect(),
            edges: self.edges.iter().copied().filter(|&(a, b)| a != v && b != v).collect(),
        }
    }

    fn without(&self, removed: &BTreeSet<Vertex>) -> DiGraph {
        DiGraph {
            vertices: self.vertices.difference(removed).copied().collect(),
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|(a, b)| !removed.contains(a) && !removed.contains(b))
                .collect(),
        }
    }
}

/// Every vertex exactly once and no edge from a later to an earlier (or the
/// same) position.
pub fn is_top_sorting(s: &[Vertex], g: &DiGraph) -> bool {
    multiset(s) == multiset(&g.vertices.iter().copied().collect::<Vec<_>>())
        && (0..s.len()).all(|i| (i..s.len()).all(|j| !g.edges.contains(&(s[j], s[i]))))
}

/// Three-colour DFS; a self-loop or back edge means a cycle.
pub fn is_acyclic(g: &DiGraph) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut succ: BTreeMap<Vertex, Vec<Vertex>> = g.vertices.iter().map(|&v| (v, Vec::new())).collect();
    for &(u, v) in &g.edges {
        succ.entry(u).or_default().push(v);
    }
    let mut colour: BTreeMap<Vertex, Colour> = succ.keys().map(|&v| (v, Colour::White)).collect();
    for &root in succ.keys() {
        if colour[&root] != Colour::White {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour.insert(root, Colour::Grey);
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let out = &succ[&v];
            if *next < out.len() {
                let w = out[*next];
                *next += 1;
                match colour.get(&w).copied().unwrap_or(Colour::White) {
                    Colour::Grey => return false,
                    Colour::White => {
                        colour.insert(w, Colour::Grey);
                        stack.push((w, 0));
                    }
                    Colour::Black => {}
                }
            } else {
                colour.insert(v, Colour::Black);
                stack.pop();
            }
        }
    }
    true
}

pub fn topsort(ctx: &mut ContractContext, g: &DiGraph) -> Result<Vec<Vertex>, GraphError> {
    ctx.operation("topsort", |ctx| {
        ctx.require("validGraph", g.is_valid())?;
        let mut indegree: BTreeMap<Vertex, usize> = g.vertices.iter().map(|&v| (v, 0)).collect();
        let mut succ: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
        for &(u, v) in &g.edges {
            *indegree.get_mut(&v).expect("validGraph") += 1;
            succ.entry(u).or_default().push(v);
        }
        let mut ready: BTreeSet<Vertex> = indegree.iter().filter(|&(_, &d)| d == 0).map(|(&v, _)| v).collect();
        let mut s = Vec::with_capacity(g.vertices.len());
        let mut placed = BTreeSet::new();
        let mut iterations = 0usize;

        while placed.len() < g.vertices.len() {
            iterations += 1;
            ctx.check_invariant("iterations<=|V|", || iterations <= g.vertices.len())?;
            if ctx.enabled() {
                let remaining = g.without(&placed);
                ctx.check_invariant("R==G-s", || {
                    remaining.vertices.iter().all(|v| !placed.contains(v))
                        && remaining.vertices.len() + s.len() == g.vertices.len()
                })?;
                let done = g.without(&remaining.vertices);
                ctx.check_invariant("isTopSorting(s, G-R)", || is_top_sorting(&s, &done))?;
                ctx.check_invariant("no edge from R into s", || {
                    s.iter()
                        .all(|x| remaining.vertices.iter().all(|&v| !g.edges.contains(&(v, *x))))
                })?;
            }

            let Some(v) = ready.pop_first() else {
                let remaining = g.without(&placed);
                ctx.check_assert("no zero-indegree vertex remains", || {
                    remaining.vertices.iter().all(|&v| remaining.has_incoming_edges(v))
                })?;
                return Err(GraphError::CycleDetected {
                    remaining: remaining.vertices.into_iter().collect(),
                });
            };
            s.push(v);
            placed.insert(v);
            for &w in succ.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if w == v {
                    continue;
                }
                let d = indegree.get_mut(&w).expect("validGraph");
                *d -= 1;
                if *d == 0 {
                    ready.insert(w);
                }
            }
        }

        ctx.check_post("isTopSorting", || is_top_sorting(&s, g))?;
        Ok(s)
    })
}

/// An undirected graph as a symmetric, anti-reflexive adjacency map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UGraph {
    adj: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

impl UGraph {
    pub fn new(adj: BTreeMap<Vertex, BTreeSet<Vertex>>) -> Result<Self, GraphError> {
        for (&v, ns) in &adj {
            for &w in ns {
                if w == v {
                    return Err(GraphError::Invalid(format!("self-loop at {v}")));
                }
                if !adj.get(&w).is_some_and(|back| back.contains(&v)) {
                    return Err(GraphError::Invalid(format!("edge {v}-{w} is not symmetric")));
                }
            }
        }
        Ok(UGraph { adj })
    }

    pub fn from_edges(
        vertices: impl IntoIterator<Item = Vertex>,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let mut adj: BTreeMap<Vertex, BTreeSet<Vertex>> = vertices.into_iter().map(|v| (v, BTreeSet::new())).collect();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::Invalid(format!("self-loop at {u}")));
            }
            adj.entry(u).or_default().insert(v);
            adj.entry(v).or_default().insert(u);
        }
        Ok(UGraph { adj })
    }

    pub fn adjacency(&self) -> &BTreeMap<Vertex, BTreeSet<Vertex>> {
        &self.adj
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adj.keys().copied()
    }

    pub fn neighbours(&self, v: Vertex) -> Option<&BTreeSet<Vertex>> {
        self.adj.get(&v)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Each edge once, as `(min, max)`.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.adj
            .iter()
            .flat_map(|(&u, ns)| ns.iter().filter(move |&&w| u < w).map(move |&w| (u, w)))
            .collect()
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    fn remove_edge(&mut self, u: Vertex, v: Vertex) {
        if let Some(ns) = self.adj.get_mut(&u) {
            ns.remove(&v);
        }
        if let Some(ns) = self.adj.get_mut(&v) {
            ns.remove(&u);
        }
    }

    fn add_edge(&mut self, u: Vertex, v: Vertex) {
        self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
    }

    fn empty_like(&self) -> UGraph {
        UGraph {
            adj: self.adj.keys().map(|&v| (v, BTreeSet::new())).collect(),
        }
    }
}

pub fn has_even_degrees(g: &UGraph) -> bool {
    g.adj.values().all(|ns| ns.len() % 2 == 0)
}

/// Every pair of vertices is joined by a path.
pub fn is_connected(g: &UGraph) -> bool {
    let Some(&start) = g.adj.keys().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &g.adj[&v] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == g.adj.len()
}

pub fn is_valid_walk(s: &[Vertex], g: &UGraph) -> bool {
    s.iter().all(|v| g.contains(*v)) && s.windows(2).all(|w| g.adj[&w[0]].contains(&w[1]))
}

/// Some consecutive pair of `s` is the edge `{u, v}`.
pub fn traverses_edge(s: &[Vertex], u: Vertex, v: Vertex) -> bool {
    s.windows(2)
        .any(|w| (w[0] == u && w[1] == v) || (w[0] == v && w[1] == u))
}

/// A walk that never repeats an edge.
pub fn is_valid_trail(s: &[Vertex], g: &UGraph) -> bool {
    is_valid_walk(s, g) && (1..s.len()).all(|i| !traverses_edge(&s[..i], s[i - 1], s[i]))
}

pub fn is_valid_circuit(s: &[Vertex], g: &UGraph) -> bool {
    is_valid_trail(s, g) && !s.is_empty() && s.first() == s.last()
}

fn covers_every_edge(s: &[Vertex], g: &UGraph) -> bool {
    let walked: HashSet<(Vertex, Vertex)> = s.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
    g.edges().iter().all(|e| walked.contains(e))
}

pub fn is_euler_circuit(s: &[Vertex], g: &UGraph) -> bool {
    is_valid_circuit(s, g) && covers_every_edge(s, g)
}

pub fn is_euler_trail(s: &[Vertex], g: &UGraph) -> bool {
    !s.is_empty() && is_valid_trail(s, g) && covers_every_edge(s, g)
}

/// For an Euler trail: a vertex has odd degree iff it is exactly one of the
/// two endpoints.
pub fn euler_trail_degrees(g: &UGraph, s: &[Vertex]) -> bool {
    let (Some(&first), Some(&last)) = (s.first(), s.last()) else {
        return false;
    };
    g.adj
        .iter()
        .all(|(&x, ns)| ((x == first) != (x == last)) == (ns.len() % 2 == 1))
}

pub fn find_euler_circuit(ctx: &mut ContractContext, g: &UGraph) -> Result<Vec<Vertex>, GraphError> {
    ctx.operation("find_euler_circuit", |ctx| {
        ctx.require("nonempty", g.vertex_count() > 0)?;
        ctx.require("connected", is_connected(g))?;
        ctx.require("evenDegrees", has_even_degrees(g))?;

        let start = *g.adj.keys().next().expect("nonempty");
        let (mut r, mut remaining) = euler_dfs(ctx, start, g)?;
        let bound = g.vertex_count();
        let mut iterations = 0usize;

        while let Some(i) = r.iter().position(|v| !remaining.adj[v].is_empty()) {
            iterations += 1;
            ctx.check_invariant("iterations<=|V|", || iterations <= bound)?;
            let u = r[i];
            let (c, rest) = euler_dfs(ctx, u, &remaining)?;
            remaining = rest;
            let tail = if ctx.fault_active(Fault::EulerSpliceOffByOne) {
                i
            } else {
                i + 1
            };
            let mut spliced = r[..i].to_vec();
            spliced.extend_from_slice(&c);
            spliced.extend_from_slice(&r[tail..]);
            r = spliced;
            ctx.check_invariant("isValidCircuit(r) && r[0]==v", || {
                is_valid_circuit(&r, g) && r[0] == start
            })?;
            ctx.check_invariant("evenDegrees(R)", || has_even_degrees(&remaining))?;
        }

        ctx.check_post("isEulerCircuit", || is_euler_circuit(&r, g))?;
        Ok(r)
    })
}

/// Walks unexplored edges from `v`, always to the smallest neighbour, until
/// stuck. Returns the closed trail and the graph of untraversed edges.
pub fn euler_dfs(ctx: &mut ContractContext, v: Vertex, g: &UGraph) -> Result<(Vec<Vertex>, UGraph), GraphError> {
    ctx.operation("euler_dfs", |ctx| {
        ctx.require("evenDegrees && v in G", has_even_degrees(g) && g.contains(v))?;
        let mut remaining = g.clone();
        let mut traversed = g.empty_like();
        let mut r = vec![v];
        let mut u = v;
        let bound = g.edge_count();
        let mut iterations = 0usize;
        while let Some(&w) = remaining.adj[&u].iter().next() {
            iterations += 1;
            ctx.check_invariant("iterations<=|E|", || iterations <= bound)?;
            r.push(w);
            remaining.remove_edge(u, w);
            traversed.add_edge(u, w);
            u = w;
            ctx.check_invariant("isValidTrail(r, T)", || is_valid_trail(&r, &traversed))?;
        }
        ctx.check_assert("u==v", || u == v)?;
        ctx.check_post("R[v]=={}", || remaining.adj[&v].is_empty())?;
        ctx.check_post("evenDegrees(R)", || has_even_degrees(&remaining))?;
        Ok((r, remaining))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::ContractMode;

    fn ctx() -> ContractContext {
        ContractContext::new(ContractMode::Assert)
    }

    fn chain() -> DiGraph {
        DiGraph::new([1, 2, 3], [(1, 2), (2, 3)])
    }

    pub(crate) fn circuit_fixture() -> UGraph {
        UGraph::from_edges([], [(1, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)]).unwrap()
    }

    #[test]
    fn top_sorting_predicate() {
        assert!(is_top_sorting(&[1, 2, 3], &chain()));
        assert!(is_top_sorting(&[], &DiGraph::default()));
        assert!(!is_top_sorting(&[2, 1], &DiGraph::new([1, 2], [(1, 2)])));
        assert!(!is_top_sorting(&[1, 2, 2], &chain()));
        assert!(!is_top_sorting(&[1], &DiGraph::new([1], [(1, 1)])));
    }

    #[test]
    fn topsort_examples() {
        assert_eq!(topsort(&mut ctx(), &chain()).unwrap(), [1, 2, 3]);
        let fork = DiGraph::new([1, 2, 3], [(1, 2), (1, 3)]);
        assert_eq!(topsort(&mut ctx(), &fork).unwrap(), [1, 2, 3]);
        let cyc = DiGraph::new([1, 2], [(1, 2), (2, 1)]);
        assert_eq!(
            topsort(&mut ctx(), &cyc).unwrap_err(),
            GraphError::CycleDetected { remaining: vec![1, 2] }
        );
    }

    #[test]
    fn topsort_partial_cycle_and_self_loop() {
        let g = DiGraph::new([0, 1, 2, 3], [(0, 1), (1, 2), (2, 1), (2, 3)]);
        assert_eq!(
            topsort(&mut ctx(), &g).unwrap_err(),
            GraphError::CycleDetected {
                remaining: vec![1, 2, 3]
            }
        );
        let g = DiGraph::new([5], [(5, 5)]);
        assert!(matches!(topsort(&mut ctx(), &g), Err(GraphError::CycleDetected { .. })));
    }

    #[test]
    fn topsort_rejects_dangling_edges() {
        let g = DiGraph::new([1], [(1, 2)]);
        assert!(matches!(topsort(&mut ctx(), &g), Err(GraphError::Contract(v)) if v.label == "validGraph"));
    }

    #[test]
    fn acyclicity() {
        assert!(is_acyclic(&chain()));
        assert!(!is_acyclic(&DiGraph::new([1, 2], [(1, 2), (2, 1)])));
        assert!(!is_acyclic(&DiGraph::new([1], [(1, 1)])));
        let dag = DiGraph::new(0..6, (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))));
        assert!(is_acyclic(&dag));
    }

    #[test]
    fn ugraph_validation() {
        let asym = BTreeMap::from([(1, BTreeSet::from([2])), (2, BTreeSet::new())]);
        assert!(UGraph::new(asym).is_err());
        let self_loop = BTreeMap::from([(1, BTreeSet::from([1]))]);
        assert!(UGraph::new(self_loop).is_err());
        assert_eq!(circuit_fixture().edge_count(), 6);
    }

    #[test]
    fn degrees_and_connectivity() {
        let g = circuit_fixture();
        assert!(has_even_degrees(&g));
        assert!(is_connected(&g));
        let lone = UGraph::from_edges([7], []).unwrap();
        assert!(has_even_degrees(&lone));
        let path = UGraph::from_edges([], [(1, 2)]).unwrap();
        assert!(!has_even_degrees(&path));
        assert!(!is_connected(&UGraph::from_edges([1, 2], []).unwrap()));
        assert!(is_connected(&UGraph::default()));
    }

    #[test]
    fn circuit_and_trail_predicates() {
        let g = circuit_fixture();
        assert!(is_euler_circuit(&[1, 2, 3, 4, 5, 3, 1], &g));
        assert!(is_euler_trail(&[1, 2, 3, 4, 5, 3, 1], &g));
        assert!(is_euler_circuit(&[7], &UGraph::from_edges([7], []).unwrap()));
        let triangle = UGraph::from_edges([], [(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(!is_euler_circuit(&[1, 2, 3], &triangle));
        let trail_graph = UGraph::from_edges([], [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5)]).unwrap();
        assert!(is_euler_trail(&[3, 2, 1, 3, 4, 5], &trail_graph));
        assert!(euler_trail_degrees(&trail_graph, &[3, 2, 1, 3, 4, 5]));
        let edge = UGraph::from_edges([], [(1, 2)]).unwrap();
        assert!(!is_euler_trail(&[1, 2, 1, 2], &edge));
        assert!(!is_valid_trail(&[1, 2, 1], &edge));
    }

    #[test]
    fn hierholzer_examples() {
        let g = circuit_fixture();
        assert_eq!(find_euler_circuit(&mut ctx(), &g).unwrap(), [1, 2, 3, 4, 5, 3, 1]);
        let lone = UGraph::from_edges([4], []).unwrap();
        assert_eq!(find_euler_circuit(&mut ctx(), &lone).unwrap(), [4]);
        let triangle = UGraph::from_edges([], [(1, 2), (2, 3), (1, 3)]).unwrap();
        let c = find_euler_circuit(&mut ctx(), &triangle).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!((c[0], c[3]), (1, 1));
        assert!(is_euler_circuit(&c, &triangle));
    }

    #[test]
    fn hierholzer_preconditions() {
        let label = |g: &UGraph| match find_euler_circuit(&mut ctx(), g) {
            Err(GraphError::Contract(v)) => v.label,
            other => panic!("expected contract error, got {other:?}"),
        };
        assert_eq!(label(&UGraph::default()), "nonempty");
        assert_eq!(label(&UGraph::from_edges([1, 2], []).unwrap()), "connected");
        assert_eq!(label(&UGraph::from_edges([], [(1, 2)]).unwrap()), "evenDegrees");
    }

    #[test]
    fn splice_off_by_one_is_caught() {
        let mut c = ContractContext::new(ContractMode::Assert).with_fault(Some(Fault::EulerSpliceOffByOne));
        assert!(find_euler_circuit(&mut c, &circuit_fixture()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn topsort_certifies_or_finds_a_cycle(
            n in 0u64..8,
            raw in proptest::collection::vec((1u64..8, 1u64..8), 0..16),
        ) {
            let g = DiGraph::new(1..=n, raw.into_iter().filter(|&(u, v)| u <= n && v <= n));
            match topsort(&mut ctx(), &g) {
                Ok(s) => {
                    proptest::prop_assert!(is_acyclic(&g));
                    proptest::prop_assert!(is_top_sorting(&s, &g));
                }
                Err(GraphError::CycleDetected { remaining }) => {
                    proptest::prop_assert!(!is_acyclic(&g));
                    proptest::prop_assert!(!remaining.is_empty());
                }
                Err(e) => proptest::prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn euler_circuit_exists_iff_even_and_connected(
            raw in proptest::collection::vec((1u64..7, 1u64..7), 1..12),
        ) {
            let edges: BTreeSet<(Vertex, Vertex)> =
                raw.into_iter().filter(|(u, v)| u != v).map(|(u, v)| (u.min(v), u.max(v))).collect();
            proptest::prop_assume!(!edges.is_empty());
            let g = UGraph::from_edges([], edges).unwrap();
            let possible = has_even_degrees(&g) && is_connected(&g);
            match find_euler_circuit(&mut ctx(), &g) {
                Ok(c) => {
                    proptest::prop_assert!(possible);
                    proptest::prop_assert!(is_euler_circuit(&c, &g));
                }
                Err(_) => proptest::prop_assert!(!possible),
            }
        }
    }
}
