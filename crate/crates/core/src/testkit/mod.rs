//! Random program generation and a reference evaluator for differential tests.

pub mod gen;
pub mod oracle;
pub mod suite;
