//! Conjugacy-based key exchange over finite non-commutative groups.
//!
//! Three platforms are provided: the metacyclic and non-metacyclic
//! Miller-Moreno `p`-groups, and the Sylow 2-subgroups of `S_(2^k)` and
//! `A_(2^k)` as binary-tree automorphisms. On top of them sit a Ko-Lee
//! style key agreement, attacks on it, and checks of the structural facts
//! the construction relies on.

pub mod arith;
pub mod cryptanalysis;
pub mod error;
pub mod group;
pub mod heisenberg;
pub mod kex;
pub mod metacyclic;
pub mod treegroup;
pub mod verify;

pub use error::{Error, Result};
