//! Runtime design-by-contract machinery.
//!
//! Every algorithm in this crate takes a [`ContractContext`] and states its
//! preconditions, postconditions, loop/class invariants and intermediate
//! assertions as lazily evaluated predicates. The context decides, based on
//! its [`ContractMode`], whether a predicate is evaluated at all, whether a
//! failure aborts the operation, and how many checks were run.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

/// How contract predicates are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ContractMode {
    /// Predicates are never evaluated.
    Off,
    /// A failing predicate aborts the operation with a [`ContractViolation`].
    #[default]
    Assert,
    /// A failing predicate is recorded and execution continues.
    Log,
}

impl ContractMode {
    pub const ALL: [ContractMode; 3] = [ContractMode::Off, ContractMode::Assert, ContractMode::Log];

    pub fn as_str(self) -> &'static str {
        match self {
            ContractMode::Off => "off",
            ContractMode::Assert => "assert",
            ContractMode::Log => "log",
        }
    }
}

impl fmt::Display for ContractMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContractMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(ContractMode::Off),
            "assert" => Ok(ContractMode::Assert),
            "log" => Ok(ContractMode::Log),
            other => Err(format!("unknown contract mode `{other}` (expected off, assert or log)")),
        }
    }
}

/// The clause a contract site belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClauseKind {
    Pre,
    Post,
    Invariant,
    Assertion,
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseKind::Pre => "precondition",
            ClauseKind::Post => "postcondition",
            ClauseKind::Invariant => "invariant",
            ClauseKind::Assertion => "assertion",
        })
    }
}

/// A contract predicate that evaluated to false.
///
/// `(op, label)` identifies exactly one site in [`catalog::SITES`].
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} `{label}` violated in {op}")]
pub struct ContractViolation {
    pub op: &'static str,
    pub label: &'static str,
    pub kind: ClauseKind,
}

/// Deliberate single-line mutations used to demonstrate that the contracts
/// and oracles catch real bugs. Never active unless explicitly installed
/// with [`ContractContext::with_fault`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Sift-down picks the smaller child instead of the larger one.
    HeapChildComparison,
    /// Hash-set delete writes `Nil` where a tombstone belongs.
    TombstoneAsNil,
    /// BST two-child delete copies the predecessor up but leaves it in the
    /// left subtree.
    BstDeleteSkipsRestore,
    /// Gale-Shapley displacement engages the new proposer without freeing
    /// the previous partner.
    MatchingSkipsRejection,
    /// Hierholzer splice keeps the splice vertex twice.
    EulerSpliceOffByOne,
}

impl Fault {
    pub const ALL: [Fault; 5] = [
        Fault::HeapChildComparison,
        Fault::TombstoneAsNil,
        Fault::BstDeleteSkipsRestore,
        Fault::MatchingSkipsRejection,
        Fault::EulerSpliceOffByOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fault::HeapChildComparison => "heap-child-cmp",
            Fault::TombstoneAsNil => "tombstone-as-nil",
            Fault::BstDeleteSkipsRestore => "bst-skip-restore",
            Fault::MatchingSkipsRejection => "gs-skip-rejection",
            Fault::EulerSpliceOffByOne => "euler-splice-off-by-one",
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fault::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| {
            let names: Vec<_> = Fault::ALL.iter().map(|f| f.name()).collect();
            format!("unknown fault `{s}` (expected one of {})", names.join(", "))
        })
    }
}

/// Per-operation counters. `time` is self time (nested operations are
/// charged to themselves) and stays zero unless timing is enabled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpStats {
    pub checks: u64,
    pub violations: u64,
    pub time: Duration,
}

const NO_OP: &str = "-";

/// Evaluation state for one thread of contract checking.
#[derive(Clone, Debug, Default)]
pub struct ContractContext {
    mode: ContractMode,
    checks_evaluated: u64,
    violations: Vec<ContractViolation>,
    per_op: BTreeMap<&'static str, OpStats>,
    op_stack: Vec<&'static str>,
    fault: Option<Fault>,
    timing: bool,
    child_time: Vec<Duration>,
}

impl ContractContext {
    pub fn new(mode: ContractMode) -> Self {
        ContractContext {
            mode,
            ..Default::default()
        }
    }

    /// Installs a fault for every operation run under this context.
    pub fn with_fault(mut self, fault: Option<Fault>) -> Self {
        self.fault = fault;
        self
    }

    /// Records wall time per operation.
    pub fn with_timing(mut self, on: bool) -> Self {
        self.timing = on;
        self
    }

    pub fn mode(&self) -> ContractMode {
        self.mode
    }

    pub fn checks_evaluated(&self) -> u64 {
        self.checks_evaluated
    }

    pub fn violations(&self) -> &[ContractViolation] {
        &self.violations
    }

    pub fn per_op(&self) -> &BTreeMap<&'static str, OpStats> {
        &self.per_op
    }

    pub fn fault(&self) -> Option<Fault> {
        self.fault
    }

    pub(crate) fn fault_active(&self, fault: Fault) -> bool {
        self.fault == Some(fault)
    }

    pub fn enabled(&self) -> bool {
        self.mode != ContractMode::Off
    }

    /// Runs `body` with `op` as the operation that owns every contract
    /// site evaluated inside it. Operations nest.
    pub fn operation<R>(&mut self, op: &'static str, body: impl FnOnce(&mut Self) -> R) -> R {
        if !self.timing {
            self.op_stack.push(op);
            let out = body(self);
            self.op_stack.pop();
            return out;
        }
        let start = Instant::now();
        self.op_stack.push(op);
        self.child_time.push(Duration::ZERO);
        let out = body(self);
        self.op_stack.pop();
        let total = start.elapsed();
        let children = self.child_time.pop().unwrap_or_default();
        self.per_op.entry(op).or_default().time += total.saturating_sub(children);
        if let Some(parent) = self.child_time.last_mut() {
            *parent += total;
        }
        out
    }

    pub fn check_pre(
        &mut self,
        label: &'static str,
        predicate: impl FnOnce() -> bool,
    ) -> Result<(), ContractViolation> {
        self.check(ClauseKind::Pre, label, predicate)
    }

    pub fn check_post(
        &mut self,
        label: &'static str,
        predicate: impl FnOnce() -> bool,
    ) -> Result<(), ContractViolation> {
        self.check(ClauseKind::Post, label, predicate)
    }

    pub fn check_invariant(
        &mut self,
        label: &'static str,
        predicate: impl FnOnce() -> bool,
    ) -> Result<(), ContractViolation> {
        self.check(ClauseKind::Invariant, label, predicate)
    }

    pub fn check_assert(
        &mut self,
        label: &'static str,
        predicate: impl FnOnce() -> bool,
    ) -> Result<(), ContractViolation> {
        self.check(ClauseKind::Assertion, label, predicate)
    }

    /// A precondition the operation cannot run without. Counted like
    /// [`check_pre`](Self::check_pre) when contracts are enabled, but the
    /// operation is refused in every mode when `holds` is false.
    pub fn require(&mut self, label: &'static str, holds: bool) -> Result<(), ContractViolation> {
        self.check_pre(label, || holds)?;
        if holds {
            Ok(())
        } else {
            Err(ContractViolation {
                op: self.op_stack.last().copied().unwrap_or(NO_OP),
                label,
                kind: ClauseKind::Pre,
            })
        }
    }

    pub fn check(
        &mut self,
        kind: ClauseKind,
        label: &'static str,
        predicate: impl FnOnce() -> bool,
    ) -> Result<(), ContractViolation> {
        if self.mode == ContractMode::Off {
            return Ok(());
        }
        let op = self.op_stack.last().copied().unwrap_or(NO_OP);
        self.checks_evaluated += 1;
        let stats = self.per_op.entry(op).or_default();
        stats.checks += 1;
        if predicate() {
            return Ok(());
        }
        stats.violations += 1;
        let violation = ContractViolation { op, label, kind };
        self.violations.push(violation.clone());
        match self.mode {
            ContractMode::Assert => Err(violation),
            _ => Ok(()),
        }
    }

    /// Folds the counters and violations of `other` into `self`.
    pub fn absorb(&mut self, other: &ContractContext) {
        self.checks_evaluated += other.checks_evaluated;
        self.violations.extend(other.violations.iter().cloned());
        for (op, stats) in &other.per_op {
            let mine = self.per_op.entry(op).or_default();
            mine.checks += stats.checks;
            mine.violations += stats.violations;
            mine.time += stats.time;
        }
    }
}

/// A deep copy of a value captured at operation entry, used by
/// postconditions that talk about the old state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot<V>(V);

impl<V> Snapshot<V> {
    pub fn get(&self) -> &V {
        &self.0
    }

    pub fn into_inner(self) -> V {
        self.0
    }
}

impl<V> Deref for Snapshot<V> {
    type Target = V;

    fn deref(&self) -> &V {
        &self.0
    }
}

pub fn snapshot<V: Clone>(value: &V) -> Snapshot<V> {
    Snapshot(value.clone())
}

/// Takes a snapshot only when contracts are enabled; postconditions that
/// need old state are skipped in `Off` mode anyway.
pub fn snapshot_if<V>(ctx: &ContractContext, make: impl FnOnce() -> V) -> Option<Snapshot<V>> {
    ctx.enabled().then(|| Snapshot(make()))
}

pub mod catalog {
    //! Every contract site in the crate, keyed by `(operation, label)`.

    use super::ClauseKind::{self, *};

    pub const SITES: &[(&str, &str, ClauseKind)] = &[
        // numerics
        ("div", "d>0", Pre),
        ("div", "q*d+r==n", Invariant),
        ("div", "q*d+r==n && r<d", Post),
        ("power_naive", "p==x^n", Post),
        ("power_dc", "depth<=log2(n)+1", Invariant),
        ("power_dc", "p==power(x,n)", Post),
        // search_sort
        ("binary_search", "isSorted", Pre),
        ("binary_search", "0<=low<=high<=len", Invariant),
        ("binary_search", "x !in a[..low] && x !in a[high..]", Invariant),
        ("binary_search", "found ==> a[i]==x", Post),
        ("binary_search", "notFound ==> x !in a", Post),
        ("insertion_sort", "isSorted(a[..i])", Invariant),
        ("insertion_sort", "multiset preserved", Invariant),
        ("insertion_sort", "sorted except at j", Invariant),
        ("insertion_sort", "isSorted", Post),
        ("insertion_sort", "multiset(a)==multiset(old(a))", Post),
        // heap
        ("heap_insert", "heapifyUpInv", Invariant),
        ("heap_insert", "heapInv", Post),
        ("heap_insert", "elems==old(elems)+{x}", Post),
        ("heap_grow", "capacity>size", Post),
        ("heap_delete_max", "!isEmpty", Pre),
        ("heap_delete_max", "maxIsAtTop", Assertion),
        ("heap_delete_max", "heapifyDownInv", Invariant),
        ("heap_delete_max", "isMax(x,old(elems))", Post),
        ("heap_delete_max", "heapInv", Post),
        ("heap_delete_max", "elems==old(elems)-{x}", Post),
        ("heap_get_max", "!isEmpty", Pre),
        ("heap_get_max", "isMax(x,elems)", Post),
        // hash set
        ("hs_contains", "Valid", Pre),
        ("hs_contains", "res<==>x in elems", Post),
        ("hs_locate", "x in elems ==> t[pos]==Some(x)", Post),
        ("hs_locate", "x !in elems ==> free validPos or full", Post),
        ("hs_insert", "x !in elems", Pre),
        ("hs_insert", "!full", Assertion),
        ("hs_insert", "Valid", Post),
        ("hs_insert", "elems==old(elems)+{x}", Post),
        ("hs_rehash", "!full", Post),
        ("hs_rehash", "elems==old(elems)", Post),
        ("hs_delete", "x in elems", Pre),
        ("hs_delete", "Valid", Post),
        ("hs_delete", "elems==old(elems)-{x}", Post),
        // tree set
        ("bst_insert", "Valid", Post),
        ("bst_insert", "elems==old(elems)+{x}", Post),
        ("bst_contains", "res<==>x in elems", Post),
        ("bst_min", "!isEmpty", Pre),
        ("bst_min", "min in elems && min<=all", Post),
        ("bst_max", "!isEmpty", Pre),
        ("bst_max", "max in elems && max>=all", Post),
        ("bst_delete", "Valid", Post),
        ("bst_delete", "elems==old(elems)-{x}", Post),
        ("bst_as_sorted_seq", "isSorted && asSet(s)==elems", Post),
        // matching
        ("stable_matching", "P1", Pre),
        ("stable_matching", "P2", Pre),
        ("stable_matching", "I1", Invariant),
        ("stable_matching", "I2", Invariant),
        ("stable_matching", "I3", Invariant),
        ("stable_matching", "I4", Invariant),
        ("stable_matching", "I5", Invariant),
        ("stable_matching", "iterations<=total list length", Invariant),
        ("stable_matching", "injective", Post),
        ("stable_matching", "Q1", Post),
        ("stable_matching", "Q2", Post),
        ("move_to_head", "x in s", Pre),
        ("move_to_head", "head==x && same elements", Post),
        ("teachers_placement", "P1", Pre),
        ("teachers_placement", "P2", Pre),
        ("teachers_placement", "P3", Pre),
        ("teachers_placement", "P4", Pre),
        ("teachers_placement", "initialInjective", Pre),
        ("teachers_placement", "Q1", Post),
        ("teachers_placement", "Q2", Post),
        ("teachers_placement", "Q3", Post),
        ("teachers_placement", "Q4", Post),
        // graphs
        ("topsort", "validGraph", Pre),
        ("topsort", "R==G-s", Invariant),
        ("topsort", "isTopSorting(s, G-R)", Invariant),
        ("topsort", "no edge from R into s", Invariant),
        ("topsort", "iterations<=|V|", Invariant),
        ("topsort", "no zero-indegree vertex remains", Assertion),
        ("topsort", "isTopSorting", Post),
        ("find_euler_circuit", "nonempty", Pre),
        ("find_euler_circuit", "connected", Pre),
        ("find_euler_circuit", "evenDegrees", Pre),
        ("find_euler_circuit", "isValidCircuit(r) && r[0]==v", Invariant),
        ("find_euler_circuit", "evenDegrees(R)", Invariant),
        ("find_euler_circuit", "iterations<=|V|", Invariant),
        ("find_euler_circuit", "isEulerCircuit", Post),
        ("euler_dfs", "evenDegrees && v in G", Pre),
        ("euler_dfs", "isValidTrail(r, T)", Invariant),
        ("euler_dfs", "iterations<=|E|", Invariant),
        ("euler_dfs", "u==v", Assertion),
        ("euler_dfs", "R[v]=={}", Post),
        ("euler_dfs", "evenDegrees(R)", Post),
    ];

    /// The module an operation belongs to.
    pub fn module_of(op: &str) -> &'static str {
        match op {
            "div" | "power_naive" | "power_dc" => "numerics",
            "binary_search" | "insertion_sort" => "search_sort",
            "stable_matching" | "move_to_head" | "teachers_placement" => "matching",
            "topsort" | "find_euler_circuit" | "euler_dfs" => "graphs",
            _ if op.starts_with("heap_") || op.starts_with("hs_") || op.starts_with("bst_") => "collections",
            _ => "other",
        }
    }

    pub fn modules() -> Vec<&'static str> {
        let mut out: Vec<_> = SITES.iter().map(|(op, _, _)| module_of(op)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn contains(op: &str, label: &str, kind: ClauseKind) -> bool {
        SITES.iter().any(|&(o, l, k)| o == op && l == label && k == kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn passing_predicate_counts() {
        let mut ctx = ContractContext::new(ContractMode::Assert);
        ctx.check_pre("d>0", || true).unwrap();
        assert_eq!(ctx.checks_evaluated(), 1);
        assert!(ctx.violations().is_empty());
    }

    #[test]
    fn failing_pre_in_assert_mode() {
        let mut ctx = ContractContext::new(ContractMode::Assert);
        let err = ctx.check_pre("d>0", || false).unwrap_err();
        assert_eq!(err.label, "d>0");
        assert_eq!(err.kind, ClauseKind::Pre);
        assert_eq!(ctx.violations().len(), 1);
    }

    #[test]
    fn off_mode_skips_evaluation() {
        let mut ctx = ContractContext::new(ContractMode::Off);
        let mut evaluated = false;
        ctx.check_pre("d>0", || {
            evaluated = true;
            false
        })
        .unwrap();
        assert!(!evaluated);
        assert_eq!(ctx.checks_evaluated(), 0);
    }

    #[test]
    fn log_mode_records_and_continues() {
        let mut ctx = ContractContext::new(ContractMode::Log);
        ctx.check_post("sorted", || false).unwrap();
        ctx.check_post("sorted", || true).unwrap();
        assert_eq!(ctx.checks_evaluated(), 2);
        assert_eq!(ctx.violations()[0].kind, ClauseKind::Post);
    }

    #[test]
    fn invariant_and_assertion_kinds() {
        let mut ctx = ContractContext::new(ContractMode::Assert);
        assert!(ctx.check_post("sorted", || true).is_ok());
        let err = ctx.check_invariant("heapInv", || false).unwrap_err();
        assert_eq!((err.label, err.kind), ("heapInv", ClauseKind::Invariant));
        let err = ctx.check_assert("u==v", || false).unwrap_err();
        assert_eq!(err.kind, ClauseKind::Assertion);
    }

    #[test]
    fn operations_nest_and_attribute_checks() {
        let mut ctx = ContractContext::new(ContractMode::Log);
        ctx.operation("outer", |ctx| {
            ctx.check_pre("a", || true).unwrap();
            ctx.operation("inner", |ctx| ctx.check_post("b", || false).unwrap());
            ctx.check_post("c", || true).unwrap();
        });
        assert_eq!(
            ctx.per_op()["outer"],
            OpStats {
                checks: 2,
                violations: 0,
                ..Default::default()
            }
        );
        assert_eq!(
            ctx.per_op()["inner"],
            OpStats {
                checks: 1,
                violations: 1,
                ..Default::default()
            }
        );
        assert_eq!(ctx.violations()[0].op, "inner");
    }

    #[test]
    fn absorb_sums_counters() {
        let mut a = ContractContext::new(ContractMode::Log);
        a.operation("x", |c| c.check_pre("p", || true).unwrap());
        let mut b = ContractContext::new(ContractMode::Log);
        b.operation("x", |c| c.check_pre("p", || false).unwrap());
        a.absorb(&b);
        assert_eq!(a.checks_evaluated(), 2);
        assert_eq!(
            a.per_op()["x"],
            OpStats {
                checks: 2,
                violations: 1,
                ..Default::default()
            }
        );
    }

    #[test]
    fn snapshot_is_a_copy() {
        let mut v = vec![9, 4, 6];
        let old = snapshot(&v);
        v.sort();
        assert_eq!(*old, vec![9, 4, 6]);
        let empty: BTreeSet<i64> = BTreeSet::new();
        assert!(snapshot(&empty).is_empty());
        let bag = crate::seq::multiset(&[1, 1, 2]);
        assert_eq!(snapshot(&bag).into_inner(), bag);
    }

    #[test]
    fn catalog_sites_are_unique() {
        let mut seen = BTreeSet::new();
        for &(op, label, _) in catalog::SITES {
            assert!(seen.insert((op, label)), "duplicate site {op}/{label}");
            assert_ne!(catalog::module_of(op), "other", "{op} has no module");
        }
        assert_eq!(
            catalog::modules(),
            ["collections", "graphs", "matching", "numerics", "search_sort"]
        );
    }

    #[test]
    fn timing_charges_self_time() {
        let mut ctx = ContractContext::new(ContractMode::Off).with_timing(true);
        ctx.operation("outer", |ctx| {
            ctx.operation("inner", |_| std::thread::sleep(Duration::from_millis(5)));
        });
        let inner = ctx.per_op()["inner"].time;
        let outer = ctx.per_op()["outer"].time;
        assert!(inner >= Duration::from_millis(5));
        assert!(outer < inner);
        assert_eq!(ctx.checks_evaluated(), 0);
    }

    #[test]
    fn parse_mode_and_fault() {
        assert_eq!("LOG".parse::<ContractMode>().unwrap(), ContractMode::Log);
        assert!("loud".parse::<ContractMode>().is_err());
        for f in Fault::ALL {
            assert_eq!(f.name().parse::<Fault>().unwrap(), f);
        }
    }
}
