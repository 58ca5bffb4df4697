//! Per-operation contract accounting.
//!
//! Counts are deterministic for a given run and go in the table; wall times
//! vary from run to run and are rendered separately.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use crate::contract::catalog::{self, module_of};
use crate::contract::{ContractContext, ContractMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsRow {
    pub op: &'static str,
    pub module: &'static str,
    pub checks: u64,
    pub violations: u64,
    pub time: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsReport {
    pub mode: ContractMode,
    pub rows: Vec<MetricsRow>,
}

impl MetricsReport {
    /// One row per operation in the site catalog, plus any other operation
    /// the context saw, ordered by module then name.
    pub fn from_context(ctx: &ContractContext) -> Self {
        let mut ops: Vec<&'static str> = catalog::SITES.iter().map(|(op, _, _)| *op).collect();
        ops.extend(ctx.per_op().keys().copied());
        ops.sort_by_key(|op| (module_of(op), *op));
        ops.dedup();
        let rows = ops
            .into_iter()
            .map(|op| {
                let stats = ctx.per_op().get(op).copied().unwrap_or_default();
                MetricsRow {
                    op,
                    module: module_of(op),
                    checks: stats.checks,
                    violations: stats.violations,
                    time: stats.time,
                }
            })
            .collect();
        MetricsReport { mode: ctx.mode(), rows }
    }

    pub fn total_checks(&self) -> u64 {
        self.rows.iter().map(|r| r.checks).sum()
    }

    pub fn total_violations(&self) -> u64 {
        self.rows.iter().map(|r| r.violations).sum()
    }

    pub fn total_time(&self) -> Duration {
        self.rows.iter().map(|r| r.time).sum()
    }

    /// `(checks, violations)` per module.
    pub fn by_module(&self) -> BTreeMap<&'static str, (u64, u64)> {
        let mut out: BTreeMap<&'static str, (u64, u64)> = BTreeMap::new();
        for r in &self.rows {
            let e = out.entry(r.module).or_default();
            e.0 += r.checks;
            e.1 += r.violations;
        }
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "contracts: {}", self.mode);
        let _ = writeln!(
            out,
            "{:<12} {:<20} {:>10} {:>10}",
            "module", "operation", "checks", "violations"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:<20} {:>10} {:>10}",
                r.module, r.op, r.checks, r.violations
            );
        }
        let _ = writeln!(
            out,
            "{:<12} {:<20} {:>10} {:>10}",
            "total",
            "",
            self.total_checks(),
            self.total_violations()
        );
        out
    }

    /// Self time per operation. These are runtime-check timings of this
    /// build only and say nothing about static verification cost.
    pub fn render_timings(&self) -> String {
        let mut out = String::from("wall time per operation (self time, includes contract evaluation)\n");
        for r in self.rows.iter().filter(|r| !r.time.is_zero()) {
            let _ = writeln!(out, "{:<20} {:>12.3?}", r.op, r.time);
        }
        let _ = writeln!(out, "{:<20} {:>12.3?}", "total", self.total_time());
        out
    }
}
