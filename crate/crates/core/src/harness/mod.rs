//! Fixture suite, seeded fuzzing against the oracles, lemma properties and
//! the contract metrics report. The CLI and the acceptance suite are thin
//! layers over this module.

pub mod fixtures;
pub mod fuzz;
pub mod gen;
pub mod lemmas;
pub mod report;
