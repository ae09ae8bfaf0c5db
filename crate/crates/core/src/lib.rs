//! Effective modular evaluation of integer sequences.
//!
//! The crate computes `a_n mod m` for polynomial recurrence sequences in
//! time that depends on `m` only through a one-off cycle detection, refutes
//! claimed sequence values by comparing residues, and checks the
//! combinatorial machinery behind modular recurrences for density
//! functions of labeled structures: Gaifman degrees, disjoint-union
//! matrices and their rank over GF(2), orbit divisibility, and the
//! stride-`C` linear recurrences those give rise to.

pub mod modarith;
pub mod periodic;
pub mod prs;
pub mod adversary;
pub mod structures;
pub mod du;
pub mod specker;
pub mod falsify;
pub mod cli;
