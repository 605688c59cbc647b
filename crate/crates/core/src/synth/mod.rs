//! Controller synthesis for co-safety bodies.
//!
//! [`automata`] turns a body into a deterministic automaton accepting exactly
//! its finite witnesses; [`game`] solves the reachability game on it and
//! extracts a Mealy machine whose accepting states mark the first witness;
//! [`mealy`] holds the machine type, the interchange format and the tight
//! product for externally produced controllers.

pub mod automata;
pub mod disambiguate;
pub mod game;
pub mod mealy;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ltl::Ltl;

pub use automata::{aww_to_nfw, build_aww, nfw_to_dfw, Aww, Dfw, Nfw};
pub use disambiguate::{disambiguate, Disambiguated};
pub use game::solve_reachability;
pub use mealy::{mark_tight, InterchangeError, MealyMachine, Move};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("body is not co-safety: {0}")]
    NotCosafety(String),
    #[error("assumption outside γ fragment")]
    AssumptionFragment,
    #[error("{0}")]
    UnsupportedAssumption(String),
    #[error("alphabet mismatch: {0}")]
    Alphabet(String),
    #[error("too large for the builtin backend: {0}")]
    TooLarge(String),
}

/// Builtin backend: a controller tightly realising `assumption -> body`,
/// or `None` if the game is lost.
pub fn synthesize_tight(
    body: &Ltl,
    assumption: &Ltl,
    inputs: &BTreeSet<String>,
    outputs: &BTreeSet<String>,
) -> Result<Option<MealyMachine>, SynthError> {
    let d = Dfw::from_body(body)?;
    solve_reachability(&d, assumption, inputs, outputs)
}
