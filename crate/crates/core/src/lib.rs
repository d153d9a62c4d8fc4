//! Weekly rostering of non-teaching staff across the sites of a school
//! network.
//!
//! The crate is `no_std` with `alloc`: it holds the model, the objective,
//! the feasibility checker, instance builders, solvers and the QUBO
//! encoding. File formats and the command-line tool live in the `sitesched`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod feasibility;
pub mod instances;
pub mod model;
pub mod objective;
pub mod qubo;
pub mod solvers;
