//! A small calculus whose types carry compile-time properties.
//!
//! Programs go through four stages: [`parser`] builds a surface tree,
//! [`typecheck`] infers its type, [`transform`] evaluates every property
//! construct and monomorphizes functions, and [`runtime`] executes the
//! property-free result by small steps.

pub mod ast;
pub mod cli;
pub mod error;
pub mod ir;
pub mod parser;
pub mod pipeline;
pub mod pretty;
pub mod runtime;
pub mod scope;
pub mod testkit;
pub mod transform;
pub mod typecheck;
