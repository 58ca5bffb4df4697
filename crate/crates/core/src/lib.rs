//! Classic algorithms and data structures with their specifications checked
//! at runtime.
//!
//! Every operation takes a [`ContractContext`] that evaluates its
//! preconditions, postconditions and invariants according to a
//! [`ContractMode`]. The [`oracles`] module holds brute-force references and
//! [`harness`] ties fixtures, fuzzing and metrics together.

pub mod collections;
pub mod contract;
pub mod formats;
pub mod graphs;
pub mod harness;
pub mod matching;
pub mod numerics;
pub mod oracles;
pub mod search_sort;
pub mod seq;

pub use collections::{BstSet, Cell, MaxHeap, OpenHashSet};
pub use contract::{ClauseKind, ContractContext, ContractMode, ContractViolation, Fault, OpStats};
pub use graphs::{DiGraph, GraphError, UGraph, Vertex};
pub use matching::{AgentId, Matching, PlacementInstance, PrefTable};
pub use numerics::Rational;
pub use oracles::{OracleReport, Verdict};
pub use search_sort::{Key, SearchResult};
