//! Analysis toolkit for C*-algebras of finite directed graphs.
//!
//! Decides whether the graph algebra is residually finite-dimensional
//! (equivalently: no cycle of the graph has an entry) and constructs
//! checkable evidence either way: explicit finite-dimensional matrix
//! representations with a separation rank report when the criterion
//! holds, and an exact symbolic trace-obstruction identity when it fails.

pub mod amalgam;
pub mod certificate;
pub mod error;
pub mod graph;
pub mod rep;
pub mod symbolic;

pub use error::{Error, Result};
