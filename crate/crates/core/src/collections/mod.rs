//! The three checked containers. Each exposes its class invariant as a
//! public predicate so tests and the fuzzer can evaluate it after every
//! command.

pub mod bst;
pub mod hashset;
pub mod heap;

pub use bst::BstSet;
pub use hashset::{Cell, HashFn, OpenHashSet, HASH_INITIAL_CAPACITY};
pub use heap::{MaxHeap, HEAP_INITIAL_CAPACITY};
