//! Randomized differential testing against the oracles.
//!
//! Case `i` of a run with seed `s` is generated from seed `s + i`, so any
//! failing case replays alone with `--seed s+i --cases 1`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::gen::{self, CaseRng};
use crate::collections::{BstSet, MaxHeap, OpenHashSet};
use crate::contract::{ClauseKind, ContractContext, ContractMode, ContractViolation, Fault};
use crate::formats::{
    render_digraph, render_matching_instance, render_placement_instance, render_sequence, render_ugraph,
};
use crate::graphs::{find_euler_circuit, is_acyclic, is_euler_circuit, topsort, GraphError};
use crate::matching::{stable_matching, teachers_placement};
use crate::numerics::{div, power_dc, power_naive, Rational};
use crate::oracles::{
    acyclic_by_definition, all_stable_matchings, all_stable_placements, all_topological_orders, blocking_pairs,
    exhaustive_euler_circuit, placement_violation, reference_model_step, Command, ContainerKind, ModelState,
    Observable, OracleReport, MAX_MATCHING_AGENTS, MAX_PATH_EDGES,
};
use crate::search_sort::{binary_search, insertion_sort, Key, SearchResult};
use crate::seq::Multiset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Problem {
    Div,
    Power,
    Search,
    Sort,
    Heap,
    HashSet,
    TreeSet,
    Match,
    Placement,
    Topsort,
    Euler,
}

impl Problem {
    pub const ALL: [Problem; 11] = [
        Problem::Div,
        Problem::Power,
        Problem::Search,
        Problem::Sort,
        Problem::Heap,
        Problem::HashSet,
        Problem::TreeSet,
        Problem::Match,
        Problem::Placement,
        Problem::Topsort,
        Problem::Euler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Div => "div",
            Problem::Power => "power",
            Problem::Search => "search",
            Problem::Sort => "sort",
            Problem::Heap => "heap",
            Problem::HashSet => "hashset",
            Problem::TreeSet => "treeset",
            Problem::Match => "match",
            Problem::Placement => "placement",
            Problem::Topsort => "topsort",
            Problem::Euler => "euler",
        }
    }

    pub fn container(self) -> Option<ContainerKind> {
        match self {
            Problem::Heap => Some(ContainerKind::Heap),
            Problem::HashSet => Some(ContainerKind::HashSet),
            Problem::TreeSet => Some(ContainerKind::TreeSet),
            _ => None,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Problem::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Problem::ALL.iter().map(|p| p.name()).collect();
            format!("unknown problem `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Preconditions that make a call a no-op refusal rather than a bug.
const REFUSALS: [&str; 3] = ["!isEmpty", "x !in elems", "x in elems"];

pub(crate) fn refusal(v: &ContractViolation) -> bool {
    v.kind == ClauseKind::Pre && REFUSALS.contains(&v.label)
}

/// Hash function for fuzzed hash sets: few distinct home slots, so probe
/// chains and wraparound are common.
fn fuzz_hash(x: &Key) -> u64 {
    x.rem_euclid(5) as u64
}

/// One of the three containers, driven through the same command language as
/// the reference model.
pub enum Container {
    Heap(MaxHeap),
    HashSet(OpenHashSet<Key>),
    TreeSet(BstSet),
}

impl Container {
    pub fn new(kind: ContainerKind, hash_capacity: usize) -> Self {
        match kind {
            ContainerKind::Heap => Container::Heap(MaxHeap::new()),
            ContainerKind::HashSet => Container::HashSet(OpenHashSet::with_capacity(fuzz_hash, hash_capacity)),
            ContainerKind::TreeSet => Container::TreeSet(BstSet::new()),
        }
    }

    /// Applies `command`; a refused precondition is an observation, any
    /// other violation is an error.
    pub fn apply(&mut self, ctx: &mut ContractContext, command: &Command) -> Result<Observable, ContractViolation> {
        let result = match (self, *command) {
            (Container::Heap(h), Command::Insert(x)) => h.insert(ctx, x).map(|_| Observable::Unit),
            (Container::Heap(h), Command::DeleteMax) => h.delete_max(ctx).map(Observable::Value),
            (Container::Heap(h), Command::Max) => h.get_max(ctx).map(Observable::Value),
            (Container::Heap(h), Command::Len) => Ok(Observable::Size(h.len())),
            (Container::HashSet(s), Command::Insert(x)) => s.insert(ctx, x).map(|_| Observable::Unit),
            (Container::HashSet(s), Command::Delete(x)) => s.delete(ctx, &x).map(|_| Observable::Unit),
            (Container::HashSet(s), Command::Contains(x)) => s.contains(ctx, &x).map(Observable::Bool),
            (Container::HashSet(s), Command::Len) => Ok(Observable::Size(s.len())),
            (Container::TreeSet(t), Command::Insert(x)) => t.insert(ctx, x).map(|_| Observable::Unit),
            (Container::TreeSet(t), Command::Delete(x)) => t.delete(ctx, x).map(|_| Observable::Unit),
            (Container::TreeSet(t), Command::Contains(x)) => t.contains(ctx, x).map(Observable::Bool),
            (Container::TreeSet(t), Command::Min) => t.min(ctx).map(Observable::Value),
            (Container::TreeSet(t), Command::Max) => t.max(ctx).map(Observable::Value),
            (Container::TreeSet(t), Command::Len) => Ok(Observable::Size(t.elems().len())),
            (Container::TreeSet(t), Command::Sorted) => t.as_sorted_seq(ctx).map(Observable::Seq),
            (_, c) => panic!("{c} is not supported by this container"),
        };
        match result {
            Err(v) if refusal(&v) => Ok(Observable::Refused),
            other => other,
        }
    }

    /// The abstract contents the model should agree with.
    pub fn abstraction(&self) -> Multiset<Key> {
        match self {
            Container::Heap(h) => h.elems(),
            Container::HashSet(s) => s.values().map(|&x| (x, 1)).collect(),
            Container::TreeSet(t) => t.elems().into_iter().map(|x| (x, 1)).collect(),
        }
    }

    pub fn class_invariant(&self) -> bool {
        match self {
            Container::Heap(h) => h.heap_inv(),
            Container::HashSet(s) => s.is_valid(),
            Container::TreeSet(t) => t.is_valid(),
        }
    }
}

/// Replays `commands` against a fresh container and the model; returns the
/// first divergence as (step index, report).
pub fn run_trace(
    ctx: &mut ContractContext,
    kind: ContainerKind,
    hash_capacity: usize,
    commands: &[Command],
) -> Option<(usize, OracleReport)> {
    let mut container = Container::new(kind, hash_capacity);
    let mut model = ModelState::default();
    let describe = |upto: usize| {
        let shown: Vec<String> = commands[..=upto].iter().map(Command::to_string).collect();
        match kind {
            ContainerKind::HashSet => format!("{kind} (capacity {hash_capacity}): {}", shown.join("; ")),
            _ => format!("{kind}: {}", shown.join("; ")),
        }
    };
    for (i, command) in commands.iter().enumerate() {
        let (next, expected) = reference_model_step(kind, command, &model).expect("generated commands are well-formed");
        let violations_before = ctx.violations().len();
        let actual = container.apply(ctx, command);
        let problem = match &actual {
            Err(v) => Some(format!("contract violation: {v}")),
            Ok(obs) if *obs != expected => Some(obs.to_string()),
            Ok(_) if container.abstraction() != next.elems => Some(format!(
                "{} but contents became {:?}",
                expected,
                container.abstraction()
            )),
            Ok(_) if !container.class_invariant() => Some(format!("{expected} but the class invariant broke")),
            Ok(_) => ctx.violations()[violations_before..]
                .iter()
                .find(|v| !refusal(v))
                .map(|v| format!("{expected} but logged {v}")),
        };
        if let Some(actual) = problem {
            let expected = format!("{expected}, contents {:?}", next.elems);
            return Some((i, OracleReport::new(describe(i), expected, actual, false)));
        }
        model = next;
    }
    None
}

/// Greedily drops commands while the trace still diverges.
pub fn shrink_trace(
    mode: ContractMode,
    fault: Option<Fault>,
    kind: ContainerKind,
    hash_capacity: usize,
    commands: &[Command],
) -> Vec<Command> {
    let fails = |cs: &[Command]| {
        let mut ctx = ContractContext::new(mode).with_fault(fault);
        run_trace(&mut ctx, kind, hash_capacity, cs).map(|(i, _)| i)
    };
    let Some(end) = fails(commands) else {
        return commands.to_vec();
    };
    let mut current = commands[..=end].to_vec();
    let mut i = 0;
    while i < current.len() {
        let mut candidate = current.clone();
        candidate.remove(i);
        match fails(&candidate) {
            Some(end) => {
                candidate.truncate(end + 1);
                current = candidate;
            }
            None => i += 1,
        }
    }
    current
}

/// What one case exercised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CaseStats {
    pub commands: usize,
    /// Whether a full oracle (not just a certifier) judged the case.
    pub oracle_checked: bool,
}

type CaseResult = Result<CaseStats, OracleReport>;

fn violation_report(instance: String, expected: &str, v: impl fmt::Display) -> OracleReport {
    OracleReport::new(instance, expected, format!("contract violation: {v}"), false)
}

fn logged(ctx: &ContractContext, before: usize) -> Option<String> {
    ctx.violations().get(before).map(|v| format!("logged {v}"))
}

fn case_div(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let n: u64 = if rng.gen_bool(0.1) {
        rng.gen()
    } else {
        rng.gen_range(0..1000)
    };
    let d: u64 = if rng.gen_bool(0.1) {
        rng.gen_range(1..u64::MAX)
    } else {
        rng.gen_range(1..50)
    };
    let expected = (n / d, n % d);
    let instance = format!("div({n}, {d})");
    match div(ctx, n, d) {
        Ok(got) if got == expected => Ok(CaseStats {
            oracle_checked: true,
            ..Default::default()
        }),
        Ok(got) => Err(OracleReport::new(
            instance,
            format!("{expected:?}"),
            format!("{got:?}"),
            false,
        )),
        Err(v) => Err(violation_report(instance, &format!("{expected:?}"), v)),
    }
}

fn case_power(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let x = Rational::new(rng.gen_range(-6..=6), rng.gen_range(1..=4));
    let n: u32 = rng.gen_range(0..=16);
    let expected = Rational::from(num_traits::pow(x.as_big().clone(), n as usize));
    let instance = format!("power({x}, {n})");
    let naive = power_naive(ctx, &x, n);
    match power_dc(ctx, &x, n) {
        Ok(dc) if dc == expected && naive == expected => Ok(CaseStats {
            oracle_checked: true,
            ..Default::default()
        }),
        Ok(dc) => Err(OracleReport::new(
            instance,
            expected.to_string(),
            format!("naive {naive}, dc {dc}"),
            false,
        )),
        Err(v) => Err(violation_report(instance, &expected.to_string(), v)),
    }
}

fn case_search(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let mut a = gen::keys(rng, 12, -5..=5);
    a.sort_unstable();
    let x = rng.gen_range(-6..=6);
    let instance = format!("search {x} in {a:?}");
    let present = a.contains(&x);
    match binary_search(ctx, &a, x) {
        Ok(SearchResult::Found(i)) if present && a[i] == x => Ok(CaseStats {
            oracle_checked: true,
            ..Default::default()
        }),
        Ok(SearchResult::NotFound) if !present => Ok(CaseStats {
            oracle_checked: true,
            ..Default::default()
        }),
        Ok(got) => Err(OracleReport::new(
            instance,
            if present { "an index holding x" } else { "NotFound" },
            format!("{got:?}"),
            false,
        )),
        Err(v) => Err(violation_report(instance, "a search result", v)),
    }
}

fn case_sort(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let input = gen::keys(rng, 20, -10..=10);
    let mut expected = input.clone();
    expected.sort();
    let mut a = input.clone();
    let instance = format!("sort {input:?}");
    match insertion_sort(ctx, &mut a) {
        Ok(()) if a == expected => Ok(CaseStats {
            oracle_checked: true,
            ..Default::default()
        }),
        Ok(()) => Err(OracleReport::new(
            instance,
            format!("{expected:?}"),
            format!("{a:?}"),
            false,
        )),
        Err(v) => Err(violation_report(instance, &format!("{expected:?}"), v)),
    }
}

fn case_container(ctx: &mut ContractContext, rng: &mut CaseRng, kind: ContainerKind) -> CaseResult {
    let capacity = gen::hash_capacity(rng);
    let commands = gen::commands(rng, kind);
    match run_trace(ctx, kind, capacity, &commands) {
        None => Ok(CaseStats {
            commands: commands.len(),
            oracle_checked: true,
        }),
        Some((_, report)) => {
            let minimal = shrink_trace(ctx.mode(), ctx.fault(), kind, capacity, &commands);
            let mut replay = ContractContext::new(ctx.mode()).with_fault(ctx.fault());
            Err(run_trace(&mut replay, kind, capacity, &minimal).map_or(report, |(_, r)| r))
        }
    }
}

fn case_match(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let (men, women) = gen::matching_instance(rng, 6);
    let instance = render_matching_instance(&men, &women);
    let before = ctx.violations().len();
    let got = match stable_matching(ctx, &men, &women) {
        Ok(m) => m,
        Err(v) => return Err(violation_report(instance, "a stable matching", v)),
    };
    let shown = got.to_string();
    let problem = if !got.is_injective() {
        Some("not injective".to_string())
    } else if let Some((m, w)) = got
        .pairs()
        .find(|&(m, w)| !(men.get(m).is_some_and(|l| l.contains(&w)) && women.get(w).is_some_and(|l| l.contains(&m))))
    {
        Some(format!("couple {m} -> {w} is not mutually acceptable"))
    } else if let Some(&(m, w)) = blocking_pairs(&got, &men, &women).first() {
        Some(format!("blocking pair ({m}, {w})"))
    } else {
        logged(ctx, before)
    };
    if let Some(p) = problem {
        return Err(OracleReport::new(
            instance,
            "a stable matching",
            format!("{shown}({p})"),
            false,
        ));
    }
    let bounded = men.len() <= MAX_MATCHING_AGENTS && women.len() <= MAX_MATCHING_AGENTS;
    if bounded {
        let all = all_stable_matchings(&men, &women).expect("within bounds");
        if !all.contains(&got) {
            let expected: Vec<String> = all
                .iter()
                .map(|m| format!("{{{}}}", m.to_string().trim().replace('\n', ", ")))
                .collect();
            return Err(OracleReport::new(
                instance,
                format!("one of {}", expected.join(" ")),
                shown,
                false,
            ));
        }
    }
    Ok(CaseStats {
        commands: 0,
        oracle_checked: bounded,
    })
}

fn case_placement(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let inst = gen::placement_instance(rng, MAX_MATCHING_AGENTS);
    let instance = render_placement_instance(&inst);
    let before = ctx.violations().len();
    let got = match teachers_placement(ctx, &inst) {
        Ok(p) => p,
        Err(v) => return Err(violation_report(instance, "a stable placement", v)),
    };
    if let Some(p) = placement_violation(&inst, &got).or_else(|| logged(ctx, before)) {
        return Err(OracleReport::new(
            instance,
            "a stable placement",
            format!("{got}({p})"),
            false,
        ));
    }
    let all = all_stable_placements(&inst).expect("within bounds");
    if !all.contains(&got) {
        return Err(OracleReport::new(
            instance,
            format!("one of {} stable placements", all.len()),
            got.to_string(),
            false,
        ));
    }
    Ok(CaseStats {
        commands: 0,
        oracle_checked: true,
    })
}

fn case_topsort(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    let g = gen::digraph(rng, 8);
    let instance = render_digraph(&g);
    let orders = all_topological_orders(&g).expect("within bounds");
    let acyclic = is_acyclic(&g);
    if g.edges().len() <= MAX_PATH_EDGES && acyclic_by_definition(&g).expect("within bounds") != acyclic {
        return Err(OracleReport::new(
            instance,
            "acyclicity by definition",
            "DFS disagrees",
            false,
        ));
    }
    let before = ctx.violations().len();
    let got = topsort(ctx, &g);
    let shown = match &got {
        Ok(s) => render_sequence(s),
        Err(e) => e.to_string(),
    };
    let agree = match &got {
        Ok(s) => orders.contains(s) && acyclic,
        Err(GraphError::CycleDetected { remaining }) => {
            let rest = DiGraphView(&g, remaining);
            orders.is_empty() && !acyclic && rest.every_vertex_has_incoming()
        }
        Err(_) => false,
    } && logged(ctx, before).is_none();
    if agree {
        Ok(CaseStats {
            commands: 0,
            oracle_checked: true,
        })
    } else {
        let expected = match orders.iter().next() {
            Some(o) => format!("one of {} orders, e.g. {}", orders.len(), render_sequence(o)),
            None => "cycle detected".to_string(),
        };
        Err(OracleReport::new(instance, expected, shown, false))
    }
}

/// The subgraph induced by `remaining`.
struct DiGraphView<'a>(&'a crate::graphs::DiGraph, &'a [u64]);

impl DiGraphView<'_> {
    fn every_vertex_has_incoming(&self) -> bool {
        let within = |v: &u64| self.1.contains(v);
        self.1
            .iter()
            .all(|&v| self.0.edges().iter().any(|&(a, b)| b == v && within(&a)))
    }
}

fn case_euler(ctx: &mut ContractContext, rng: &mut CaseRng) -> CaseResult {
    // Half the cases meet the preconditions by construction; the rest are
    // arbitrary and test that success coincides with existence.
    let g = if rng.gen_bool(0.5) {
        gen::even_connected_graph(rng, 7, 8)
    } else {
        gen::small_ugraph(rng, 6, 8)
    };
    let instance = render_ugraph(&g);
    let exists = exhaustive_euler_circuit(&g).expect("within bounds");
    let before = ctx.violations().len();
    let got = find_euler_circuit(ctx, &g);
    let shown = match &got {
        Ok(c) => render_sequence(c),
        Err(e) => e.to_string(),
    };
    let agree = match (&got, &exists) {
        (Ok(c), Some(_)) => is_euler_circuit(c, &g) && logged(ctx, before).is_none(),
        // The refused precondition is itself logged; nothing else may be.
        (Err(GraphError::Contract(v)), None) => v.kind == ClauseKind::Pre && ctx.violations().len() <= before + 1,
        _ => false,
    };
    if agree {
        Ok(CaseStats {
            commands: 0,
            oracle_checked: true,
        })
    } else {
        let expected = exists.map_or("no Euler circuit".to_string(), |c| {
            format!("an Euler circuit, e.g. {}", render_sequence(&c))
        });
        Err(OracleReport::new(instance, expected, shown, false))
    }
}

pub fn run_case(problem: Problem, ctx: &mut ContractContext, case_seed: u64) -> CaseResult {
    let rng = &mut gen::rng(case_seed);
    match problem {
        Problem::Div => case_div(ctx, rng),
        Problem::Power => case_power(ctx, rng),
        Problem::Search => case_search(ctx, rng),
        Problem::Sort => case_sort(ctx, rng),
        Problem::Heap | Problem::HashSet | Problem::TreeSet => {
            case_container(ctx, rng, problem.container().expect("container problem"))
        }
        Problem::Match => case_match(ctx, rng),
        Problem::Placement => case_placement(ctx, rng),
        Problem::Topsort => case_topsort(ctx, rng),
        Problem::Euler => case_euler(ctx, rng),
    }
}

/// The first failing case of a run.
#[derive(Clone, Debug)]
pub struct FuzzFailure {
    pub case: u64,
    pub case_seed: u64,
    pub report: OracleReport,
}

#[derive(Debug)]
pub struct FuzzOutcome {
    pub problem: Problem,
    pub seed: u64,
    pub cases_run: u64,
    pub commands: usize,
    pub oracle_checked: usize,
    pub failure: Option<FuzzFailure>,
    pub ctx: ContractContext,
}

impl FuzzOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `cases` cases, stopping at the first disagreement.
pub fn fuzz(problem: Problem, seed: u64, cases: u64, mode: ContractMode, fault: Option<Fault>) -> FuzzOutcome {
    let mut ctx = ContractContext::new(mode).with_fault(fault);
    let mut out = FuzzOutcome {
        problem,
        seed,
        cases_run: 0,
        commands: 0,
        oracle_checked: 0,
        failure: None,
        ctx: ContractContext::new(mode),
    };
    for case in 0..cases {
        let case_seed = seed.wrapping_add(case);
        out.cases_run += 1;
        match run_case(problem, &mut ctx, case_seed) {
            Ok(stats) => {
                out.commands += stats.commands;
                out.oracle_checked += usize::from(stats.oracle_checked);
            }
            Err(report) => {
                out.failure = Some(FuzzFailure {
                    case,
                    case_seed,
                    report,
                });
                break;
            }
        }
    }
    out.ctx = ctx;
    out
}
