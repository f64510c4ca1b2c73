//! Causal compatibility tests for correlations in quantum networks.
//!
//! A scenario (parties, arities, sources) fixes an operator algebra. Sets of
//! operator words, optionally extended by unknown scalar expectations, span
//! a moment matrix whose entries are pooled into key classes. Substituting
//! the observed distribution and maximizing the smallest eigenvalue over the
//! remaining unknowns gives a semidefinite program: a negative optimum
//! refutes every model of the chosen kind.

pub mod algebra;
pub mod cli;
pub mod dist;
pub mod error;
pub mod moment;
pub mod par;
pub mod qsim;
pub mod scenario;
pub mod sdp;

pub use algebra::{
    Algebra, EntryKey, ExtendedGenerator, IndependenceStructure, Letter, LetterKind, Mode,
    SymbolMultiset, Word,
};
pub use dist::DistributionTable;
pub use error::{Error, Result};
pub use moment::{assemble, instantiate, problem_stats, InstantiatedProblem, SymbolicMomentMatrix};
pub use par::Execution;
pub use scenario::{LevelSpec, PartySpec, Preset, Scenario};
pub use sdp::{solve, SdpProblem, SolveOptions, SolveReport, SolveStatus};
