//! Complete deterministic Mealy machines, the JSON controller interchange
//! format, and tight marking against a witness automaton.
//!
//! Interchange schema:
//!
//! ```json
//! {
//!   "inputs": ["a"], "outputs": ["c"],
//!   "states": ["s0", "s1"], "initial": "s0", "accepting": ["s1"],
//!   "transitions": [
//!     {"from": "s0", "input": ["a"], "output": ["c"], "to": "s1"},
//!     {"from": "s0", "input": [],    "output": [],    "to": "s0"}
//!   ]
//! }
//! ```
//!
//! `input` lists exactly the inputs that are true, so every state needs one
//! transition per subset of `inputs`. `accepting` may be omitted.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Event;

use super::automata::{event_of, letter_of, Dfw, Letter, MAX_PROPS};
use super::SynthError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Move {
    pub output: Event,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MealyMachine {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub states: Vec<String>,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    /// `delta[state][letter]` where the letter is a bitmask over `inputs`.
    pub delta: Vec<Vec<Move>>,
}

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("malformed controller: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("incomplete transition function: no transition from `{state}` on input {{{input}}}")]
    Incomplete { state: String, input: String },
    #[error("nondeterministic: two transitions from `{state}` on input {{{input}}}")]
    Nondeterministic { state: String, input: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    inputs: Vec<String>,
    outputs: Vec<String>,
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    accepting: Vec<String>,
    transitions: Vec<DocTransition>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocTransition {
    from: String,
    input: Vec<String>,
    output: Vec<String>,
    to: String,
}

impl MealyMachine {
    pub fn letter(&self, input: &Event) -> usize {
        letter_of(&self.inputs, input) as usize
    }

    pub fn input_event(&self, letter: usize) -> Event {
        event_of(&self.inputs, letter as Letter)
    }

    pub fn letters(&self) -> usize {
        1 << self.inputs.len()
    }

    /// Inputs outside the machine's alphabet are ignored.
    pub fn step(&self, s: usize, input: &Event) -> &Move {
        &self.delta[s][self.letter(input)]
    }

    /// Runs on a sequence of inputs; returns the produced letters (inputs
    /// together with outputs) and the state after each step.
    pub fn run(&self, inputs: &[Event]) -> Vec<(Event, usize)> {
        let mut s = self.initial;
        inputs
            .iter()
            .map(|i| {
                let m = self.step(s, i);
                s = m.target;
                (i.union(&m.output).cloned().collect(), s)
            })
            .collect()
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().map(Vec::len).sum()
    }

    /// Pretty-printed interchange JSON, transitions in state then input order.
    pub fn to_interchange(&self) -> String {
        let mut transitions = Vec::new();
        for (s, row) in self.delta.iter().enumerate() {
            for (l, m) in row.iter().enumerate() {
                transitions.push(DocTransition {
                    from: self.states[s].clone(),
                    input: self.input_event(l).into_iter().collect(),
                    output: m.output.iter().cloned().collect(),
                    to: self.states[m.target].clone(),
                });
            }
        }
        let doc = Doc {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            accepting: self.accepting.iter().map(|&s| self.states[s].clone()).collect(),
            transitions,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_interchange(src: &str) -> Result<MealyMachine, InterchangeError> {
        let doc: Doc = serde_json::from_str(src)?;
        let schema = |m: String| InterchangeError::Schema(m);
        let unique = |what: &str, v: &[String]| -> Result<(), InterchangeError> {
            let set: BTreeSet<&String> = v.iter().collect();
            if set.len() != v.len() {
                return Err(schema(format!("duplicate {what}")));
            }
            Ok(())
        };
        unique("inputs", &doc.inputs)?;
        unique("outputs", &doc.outputs)?;
        unique("states", &doc.states)?;
        if let Some(p) = doc.inputs.iter().find(|p| doc.outputs.contains(p)) {
            return Err(schema(format!("`{p}` is both an input and an output")));
        }
        if doc.inputs.len() > MAX_PROPS {
            return Err(schema(format!("at most {MAX_PROPS} inputs are supported")));
        }
        let index: HashMap<&str, usize> = doc.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let state = |name: &str| index.get(name).copied().ok_or_else(|| schema(format!("unknown state `{name}`")));
        let initial = state(&doc.initial)?;
        let accepting = doc.accepting.iter().map(|s| state(s)).collect::<Result<BTreeSet<_>, _>>()?;
        let n_letters = 1usize << doc.inputs.len();
        let mut delta: Vec<Vec<Option<Move>>> = vec![vec![None; n_letters]; doc.states.len()];
        for t in &doc.transitions {
            let from = state(&t.from)?;
            let to = state(&t.to)?;
            if let Some(p) = t.input.iter().find(|p| !doc.inputs.contains(p)) {
                return Err(schema(format!("unknown input `{p}` in a transition from `{}`", t.from)));
            }
            if let Some(p) = t.output.iter().find(|p| !doc.outputs.contains(p)) {
                return Err(schema(format!("unknown output `{p}` in a transition from `{}`", t.from)));
            }
            let input: Event = t.input.iter().cloned().collect();
            let l = letter_of(&doc.inputs, &input) as usize;
            let slot = &mut delta[from][l];
            if slot.is_some() {
                return Err(InterchangeError::Nondeterministic {
                    state: t.from.clone(),
                    input: t.input.join(", "),
                });
            }
            *slot = Some(Move { output: t.output.iter().cloned().collect(), target: to });
        }
        let mut complete = Vec::with_capacity(delta.len());
        for (s, row) in delta.into_iter().enumerate() {
            let mut r = Vec::with_capacity(n_letters);
            for (l, m) in row.into_iter().enumerate() {
                match m {
                    Some(m) => r.push(m),
                    None => {
                        let input: Vec<String> = event_of(&doc.inputs, l as Letter).into_iter().collect();
                        return Err(InterchangeError::Incomplete { state: doc.states[s].clone(), input: input.join(", ") });
                    }
                }
            }
            complete.push(r);
        }
        Ok(MealyMachine {
            inputs: doc.inputs,
            outputs: doc.outputs,
            states: doc.states,
            initial,
            accepting,
            delta: complete,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    Tracking(usize),
    Accepted,
    Done,
}

/// Product of a controller with the witness automaton of its body. A
/// product state is accepting exactly when the automaton accepts for the
/// first time; afterwards the automaton component is dropped.
pub fn mark_tight(c: &MealyMachine, d: &Dfw) -> Result<MealyMachine, SynthError> {
    if let Some(p) = d.props.iter().find(|p| !c.inputs.contains(p) && !c.outputs.contains(p)) {
        return Err(SynthError::Alphabet(format!("the body mentions `{p}`, which the controller neither reads nor writes")));
    }
    let mut states: Vec<(usize, Phase)> = vec![(c.initial, Phase::Tracking(d.initial))];
    let mut index: HashMap<(usize, Phase), usize> = HashMap::from([(states[0], 0)]);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (s, phase) = states[i];
        let mut row = Vec::with_capacity(c.letters());
        for l in 0..c.letters() {
            let m = &c.delta[s][l];
            let next_phase = match phase {
                Phase::Tracking(q) => {
                    let letter: Event = c.input_event(l).union(&m.output).cloned().collect();
                    let q2 = d.next(q, &letter);
                    if d.accepting[q2] {
                        Phase::Accepted
                    } else {
                        Phase::Tracking(q2)
                    }
                }
                Phase::Accepted | Phase::Done => Phase::Done,
            };
            let key = (m.target, next_phase);
            let id = *index.entry(key).or_insert_with(|| {
                states.push(key);
                states.len() - 1
            });
            row.push(Move { output: m.output.clone(), target: id });
        }
        delta.push(row);
        i += 1;
    }
    let names = states
        .iter()
        .map(|(s, ph)| match ph {
            Phase::Tracking(q) => format!("{}/{q}", c.states[*s]),
            Phase::Accepted => format!("{}/accept", c.states[*s]),
            Phase::Done => format!("{}/done", c.states[*s]),
        })
        .collect();
    let accepting = states.iter().enumerate().filter(|(_, (_, ph))| *ph == Phase::Accepted).map(|(i, _)| i).collect();
    Ok(MealyMachine {
        inputs: c.inputs.clone(),
        outputs: c.outputs.clone(),
        states: names,
        initial: 0,
        accepting,
        delta,
    })
}
