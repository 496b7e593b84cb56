//! Paths, path automata, synchronous relations and automatic structures for
//! semigroupoids, with transfer constructions for Rees matrix semigroups.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod automaton;
pub mod error;
pub mod graph;
pub mod rees;
pub mod structure;
pub mod swi;
pub mod sync;

pub use error::{Error, Result};
