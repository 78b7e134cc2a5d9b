//! Exact active learning of finite piecewise functions over the rationals,
//! and of symbolic automata whose guards are such functions.
//!
//! The learner searches the Stern-Brocot tree for break links: tree edges
//! whose closed span is not monochromatic. Query counts depend on the size
//! of the target, not on the size of the counterexamples it is given.

pub mod gen;
pub mod learner;
pub mod pwf;
pub mod rational;
pub mod sb;
pub mod sfa;
pub mod sfa_learner;
pub mod teacher;

pub use rational::{bitlen, mediant, Rational, RationalError};
pub use pwf::{Interval, Label, Piece, Piecewise, PwfError};
pub use sb::{Direction, SbEncoding, SbNode, SbSign, TreeError};
pub use sfa::{Combine, SfaError, SymbolicAutomaton, Word};
