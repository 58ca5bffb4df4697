//! Golden test vectors, grouped by algorithm. Every group compares outputs
//! exactly, so it is meaningful with contracts off as well.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::collections::{BstSet, MaxHeap, OpenHashSet};
use crate::contract::{ContractContext, ContractMode, ContractViolation, Fault};
use crate::graphs::{
    euler_trail_degrees, find_euler_circuit, is_euler_circuit, is_euler_trail, is_top_sorting, topsort, DiGraph,
    GraphError, UGraph,
};
use crate::matching::{
    is_valid, move_to_head, stable_matching, teachers_placement, Matching, PlacementInstance, PrefTable,
};
use crate::numerics::{div, power_dc, power_naive, Rational};
use crate::search_sort::{binary_search, insertion_sort, SearchResult};

/// Why a fixture group failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure(pub String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<ContractViolation> for Failure {
    fn from(v: ContractViolation) -> Self {
        Failure(v.to_string())
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn expect(holds: bool, what: impl FnOnce() -> String) -> Outcome {
    if holds {
        Ok(())
    } else {
        Err(Failure(what()))
    }
}

fn expect_eq<T: PartialEq + fmt::Debug>(what: &str, actual: T, expected: T) -> Outcome {
    expect(actual == expected, || {
        format!("{what}: expected {expected:?}, got {actual:?}")
    })
}

pub struct FixtureGroup {
    pub name: &'static str,
    pub module: &'static str,
    pub run: fn(&mut ContractContext) -> Outcome,
}

pub const GROUPS: [FixtureGroup; 10] = [
    FixtureGroup {
        name: "div",
        module: "numerics",
        run: div_group,
    },
    FixtureGroup {
        name: "power",
        module: "numerics",
        run: power_group,
    },
    FixtureGroup {
        name: "binary_search",
        module: "search_sort",
        run: search_group,
    },
    FixtureGroup {
        name: "insertion_sort",
        module: "search_sort",
        run: sort_group,
    },
    FixtureGroup {
        name: "priority_queue",
        module: "collections",
        run: heap_group,
    },
    FixtureGroup {
        name: "hash_set",
        module: "collections",
        run: hash_group,
    },
    FixtureGroup {
        name: "sorted_set",
        module: "collections",
        run: tree_group,
    },
    FixtureGroup {
        name: "stable_matching",
        module: "matching",
        run: matching_group,
    },
    FixtureGroup {
        name: "topsort",
        module: "graphs",
        run: topsort_group,
    },
    FixtureGroup {
        name: "euler",
        module: "graphs",
        run: euler_group,
    },
];

fn div_group(ctx: &mut ContractContext) -> Outcome {
    expect_eq("div(15, 6)", div(ctx, 15, 6)?, (2, 3))
}

fn power_group(ctx: &mut ContractContext) -> Outcome {
    let cases = [(2, 5, 32), (-2, 2, 4), (-2, 1, -2), (-2, 0, 1), (0, 0, 1)];
    for (x, n, want) in cases {
        let x = Rational::integer(x);
        let want = Rational::integer(want);
        expect_eq(&format!("powerDC({x}, {n})"), power_dc(ctx, &x, n)?, want.clone())?;
        expect_eq(&format!("power({x}, {n})"), power_naive(ctx, &x, n), want)?;
    }
    Ok(())
}

fn search_group(ctx: &mut ContractContext) -> Outcome {
    let a = [1, 4, 4, 6, 8];
    expect_eq("search 6", binary_search(ctx, &a, 6)?, SearchResult::Found(3))?;
    expect_eq("search 3", binary_search(ctx, &a, 3)?.as_sentinel(), -1)?;
    let found = binary_search(ctx, &a, 4)?;
    expect(matches!(found, SearchResult::Found(1 | 2)), || {
        format!("search 4: expected index 1 or 2, got {found:?}")
    })
}

fn sort_group(ctx: &mut ContractContext) -> Outcome {
    for (input, want) in [
        (vec![9, 4, 6, 3, 8], vec![3, 4, 6, 8, 9]),
        (vec![9, 3, 6, 9], vec![3, 6, 9, 9]),
    ] {
        let mut a = input.clone();
        insertion_sort(ctx, &mut a)?;
        expect_eq(&format!("sort {input:?}"), a, want)?;
    }
    Ok(())
}

fn heap_group(ctx: &mut ContractContext) -> Outcome {
    let mut h = MaxHeap::new();
    for x in [2, 5, 1, 1] {
        h.insert(ctx, x)?;
    }
    expect_eq("heap elems", h.elems(), crate::seq::multiset(&[1, 1, 2, 5]))?;
    let mut out = Vec::new();
    for _ in 0..4 {
        out.push(h.delete_max(ctx)?);
    }
    expect_eq("deleteMax sequence", out, vec![5, 2, 1, 1])?;
    expect(h.is_empty(), || "heap not empty after four deletes".into())
}

fn hash_group(ctx: &mut ContractContext) -> Outcome {
    let mut h = OpenHashSet::new(|s: &String| s.chars().count() as u64);
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<HashSet<_>>();
    h.insert(ctx, "Hello".into())?;
    expect_eq("elems after Hello", h.elems(), set(&["Hello"]))?;
    h.insert(ctx, "World".into())?;
    expect_eq("elems after World", h.elems(), set(&["Hello", "World"]))?;
    expect_eq("home slot of World", h.home(&"World".into()), 5)?;
    expect(h.contains(ctx, &"Hello".into())?, || "Hello not found".into())?;
    expect(!h.contains(ctx, &"ANSI".into())?, || "ANSI found".into())?;
    h.delete(ctx, &"Hello".into())?;
    expect_eq("elems after delete", h.elems(), set(&["World"]))?;
    expect(!h.contains(ctx, &"Hello".into())?, || "Hello still found".into())?;
    expect(h.contains(ctx, &"World".into())?, || {
        "World lost behind the deleted slot".into()
    })
}

fn tree_group(ctx: &mut ContractContext) -> Outcome {
    let mut s = BstSet::new();
    for x in [2, 5, 1, 4, 4] {
        s.insert(ctx, x)?;
    }
    expect_eq("elems", s.elems(), BTreeSet::from([1, 2, 4, 5]))?;
    expect_eq("asSeq", s.as_sorted_seq(ctx)?, vec![1, 2, 4, 5])?;
    expect_eq("min", s.min(ctx)?, 1)?;
    expect_eq("max", s.max(ctx)?, 5)?;
    s.delete(ctx, 5)?;
    expect_eq("elems after delete 5", s.elems(), BTreeSet::from([1, 2, 4]))
}

fn table(rows: &[(u64, &[u64])]) -> PrefTable {
    PrefTable::from_pairs(rows.iter().map(|&(a, l)| (a, l.to_vec()))).expect("fixture lists have no duplicates")
}

fn couples(pairs: &[(u64, u64)]) -> Matching {
    Matching::from_pairs(pairs.iter().copied())
}

fn matching_group(ctx: &mut ContractContext) -> Outcome {
    let men = table(&[(1, &[1, 2]), (2, &[1, 2])]);
    let women = table(&[(1, &[1]), (2, &[2])]);
    expect_eq(
        "matching test1",
        stable_matching(ctx, &men, &women)?,
        couples(&[(1, 1), (2, 2)]),
    )?;

    let men = table(&[(1, &[2, 1]), (2, &[1, 2])]);
    let women = table(&[(1, &[1, 2]), (2, &[2, 1])]);
    let got = stable_matching(ctx, &men, &women)?;
    expect(is_valid(&couples(&[(1, 2), (2, 1)]), &men, &women), || {
        "test2 expected couples invalid".into()
    })?;
    expect_eq("matching test2", got, couples(&[(1, 2), (2, 1)]))?;

    // Two outcomes are accepted; the lowest-id proposal order yields the
    // second, which is the only stable one of the pair.
    let men = table(&[(1, &[1, 2]), (2, &[1])]);
    let women = table(&[(1, &[1, 2]), (2, &[2, 1])]);
    let got = stable_matching(ctx, &men, &women)?;
    let accepted = [couples(&[(1, 2), (2, 1)]), couples(&[(1, 1)])];
    expect(is_valid(&accepted[0], &men, &women), || {
        "test3 first accepted outcome invalid".into()
    })?;
    expect(accepted.contains(&got), || {
        format!("matching test3: {got:?} is not an accepted outcome")
    })?;
    expect_eq("matching test3 (deterministic)", got, couples(&[(1, 1)]))?;

    expect_eq("moveToHead", move_to_head(ctx, &[1, 2, 3], 3)?, vec![3, 1, 2])?;

    let mut inst = PlacementInstance {
        vacancies: BTreeSet::from([1, 2]),
        teachers: vec![1, 2, 3],
        preferences: table(&[(1, &[2, 1]), (2, &[1, 2]), (3, &[2])]),
        initial: BTreeMap::from([(1, 1)]),
    };
    expect_eq(
        "placement test1",
        teachers_placement(ctx, &inst)?,
        couples(&[(1, 2), (2, 1)]),
    )?;
    inst.preferences = table(&[(1, &[2, 1]), (2, &[1, 2]), (3, &[2, 1])]);
    inst.initial = BTreeMap::from([(3, 1)]);
    expect_eq(
        "placement test2",
        teachers_placement(ctx, &inst)?,
        couples(&[(1, 2), (3, 1)]),
    )
}

fn topsort_group(ctx: &mut ContractContext) -> Outcome {
    let chain = DiGraph::new([1, 2, 3], [(1, 2), (2, 3)]);
    expect(is_top_sorting(&[1, 2, 3], &chain), || {
        "[1,2,3] rejected for the chain".into()
    })?;
    expect_eq("topsort chain", topsort(ctx, &chain)?, vec![1, 2, 3])?;

    let fork = DiGraph::new([1, 2, 3], [(1, 2), (1, 3)]);
    for s in [[1, 2, 3], [1, 3, 2]] {
        expect(is_top_sorting(&s, &fork), || format!("{s:?} rejected for the fork"))?;
    }
    let t = topsort(ctx, &fork)?;
    expect(t == [1, 2, 3] || t == [1, 3, 2], || {
        format!("topsort fork: {t:?} not accepted")
    })?;
    expect_eq("topsort fork (deterministic)", t, vec![1, 2, 3])
}

fn euler_group(ctx: &mut ContractContext) -> Outcome {
    let g = UGraph::from_edges([], [(1, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)]).expect("valid fixture");
    let c = [1, 2, 3, 4, 5, 3, 1];
    expect(is_euler_circuit(&c, &g), || "fixture circuit rejected".into())?;
    let found = find_euler_circuit(ctx, &g)?;
    expect(is_euler_circuit(&found, &g), || {
        format!("constructed {found:?} is not an Euler circuit")
    })?;
    expect_eq("findEulerCircuit", found, c.to_vec())?;

    let g = UGraph::from_edges([], [(1, 2), (1, 3), (2, 3), (3, 4), (4, 5)]).expect("valid fixture");
    let t = [3, 2, 1, 3, 4, 5];
    expect(is_euler_trail(&t, &g), || "fixture trail rejected".into())?;
    expect(euler_trail_degrees(&g, &t), || {
        "odd-degree vertices are not the trail endpoints".into()
    })
}

/// Result of one group under one configuration.
#[derive(Clone, Debug)]
pub struct GroupOutcome {
    pub name: &'static str,
    pub module: &'static str,
    pub failure: Option<Failure>,
    /// Every `op/label` violated when the group is replayed with logging,
    /// so a failure names all the clauses it breaks, not just the first.
    pub violated: Vec<String>,
    pub elapsed: Duration,
}

impl GroupOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug)]
pub struct FixtureRun {
    pub groups: Vec<GroupOutcome>,
    /// Counters accumulated over all groups.
    pub ctx: ContractContext,
}

impl FixtureRun {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(GroupOutcome::passed)
    }
}

fn violated_labels(ctx: &ContractContext) -> Vec<String> {
    let mut out: Vec<String> = ctx
        .violations()
        .iter()
        .map(|v| format!("{}/{}", v.op, v.label))
        .collect();
    out.dedup();
    let mut seen = BTreeSet::new();
    out.retain(|l| seen.insert(l.clone()));
    out
}

/// Runs every group in `mode`. Under `Log`, a group that logs any
/// violation fails even if its outputs are right.
pub fn run_fixtures(mode: ContractMode, fault: Option<Fault>, timing: bool) -> FixtureRun {
    let mut total = ContractContext::new(mode).with_fault(fault).with_timing(timing);
    let mut groups = Vec::new();
    for group in &GROUPS {
        let mut ctx = ContractContext::new(mode).with_fault(fault).with_timing(timing);
        let start = Instant::now();
        let mut failure = (group.run)(&mut ctx).err();
        let elapsed = start.elapsed();
        if failure.is_none() && !ctx.violations().is_empty() {
            failure = Some(Failure(ctx.violations()[0].to_string()));
        }
        let violated = if failure.is_some() {
            let mut replay = ContractContext::new(ContractMode::Log).with_fault(fault);
            // A replay can still stop early, e.g. on a refused call.
            let _ = (group.run)(&mut replay);
            violated_labels(&replay)
        } else {
            Vec::new()
        };
        total.absorb(&ctx);
        groups.push(GroupOutcome {
            name: group.name,
            module: group.module,
            failure,
            violated,
            elapsed,
        });
    }
    FixtureRun { groups, ctx: total }
}
