//! Monitor-triggered temporal logic.
//!
//! Specifications have the shape `assumption -> trigger`, where the trigger
//! is either a simple trigger `D : phi` (once the flagging monitor `D` flags,
//! the suffix starting at the flagging event must satisfy the LTL formula
//! `phi`) or a repeating trigger `(D ; phi)*` (after every flag, a tight
//! witness of the co-safety formula `phi` must follow, after which the
//! monitor restarts).
//!
//! The crate provides:
//!
//! - [`expr`]: guard/action expressions over events and variable valuations;
//! - [`monitor`]: symbolic flagging monitors and their step semantics;
//! - [`ltl`]: LTL formulas, negation normal form, fragment classification and
//!   finite-window, lasso and tight evaluation;
//! - [`mttl`]: specifications and the reference trace-semantics oracle;
//! - [`synth`]: the co-safety automata pipeline (alternating, nondeterministic
//!   and deterministic finite-word automata), a reachability game solver
//!   producing tight Mealy machines, tight marking of external controllers,
//!   disjunction disambiguation, and the controller interchange format;
//! - [`compose`]: composition of a monitor with a Mealy machine into a
//!   symbolic controller, its step semantics and randomized verification;
//! - [`syntax`]: parsers and printers for spec, trace and controller files;
//! - [`cli`]: the command implementations behind the `mttl` binary;
//! - [`cases`]: generators for the bundled case studies.

use std::collections::BTreeSet;

pub mod cases;
pub mod cli;
pub mod compose;
pub mod dot;
pub mod expr;
pub mod ltl;
pub mod monitor;
pub mod mttl;
pub mod random;
pub mod synth;
pub mod syntax;

/// A set of propositions that hold at one time step.
pub type Event = BTreeSet<String>;

/// Builds an event from proposition names.
pub fn event(props: &[&str]) -> Event {
    props.iter().map(|p| p.to_string()).collect()
}

pub use compose::{compose, ControllerState, Location, SymbolicController};
pub use expr::{Action, Expr, Kind, Valuation, Value, VarDecl};
pub use ltl::{Fragment, LassoTrace, Ltl};
pub use monitor::{Configuration, FlagResult, Monitor};
pub use mttl::{MttlSpec, Trigger, TriggerKind, Verdict};
pub use synth::MealyMachine;
