//! Composition of a flagging monitor with a Mealy machine into one symbolic
//! controller.
//!
//! - Monitor transitions into non-flagging states are kept and emit nothing.
//! - A transition into a flagging state is fused with the controller's first
//!   move: one composed transition per (output, successor) group of input
//!   letters, guarded by the monitor guard and the letters' constraint.
//! - Controller transitions are copied.
//! - In repeating mode, moves into accepting controller states go back to
//!   the monitor's initial state and reset all variables.
//!
//! At a monitor location where no guard holds the controller stutters and
//! emits nothing; the sink is such a location.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{initial_valuation, Action, EvalError, Expr, Kind, Valuation, Value, VarDecl};
use crate::ltl::{LassoTrace, Ltl};
use crate::monitor::{fmt_valuation, Monitor};
use crate::mttl::{oracle, MttlSpec, TriggerKind, Verdict};
use crate::synth::MealyMachine;
use crate::syntax::{parse_action, parse_expr, ParseError};
use crate::Event;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Monitor(String),
    Controller(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedTransition {
    pub source: Location,
    pub guard: Expr,
    pub action: Action,
    pub outputs: Event,
    pub target: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicController {
    pub mode: TriggerKind,
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub vars: Vec<VarDecl>,
    pub monitor_states: Vec<String>,
    pub controller_states: Vec<String>,
    pub initial: String,
    pub sink: String,
    pub transitions: Vec<ComposedTransition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControllerState {
    pub location: Location,
    pub val: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("mode mismatch: {0}")]
    Mode(String),
    #[error("alphabet mismatch: {0}")]
    Alphabet(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("composed transition #{index}: {error}")]
pub struct ControllerStepError {
    pub index: usize,
    pub error: EvalError,
}

/// Guard satisfied exactly by the input letters in `letters` (bitmasks over
/// `props`), built by splitting on one proposition at a time.
pub fn letter_guard(props: &[String], letters: &BTreeSet<usize>) -> Expr {
    fn go(props: &[String], bit: usize, letters: &BTreeSet<usize>, base: usize) -> Expr {
        let span = 1usize << (props.len() - bit);
        let count = letters.range(base..base + span).count();
        if count == 0 {
            return Expr::Bool(false);
        }
        if count == span {
            return Expr::Bool(true);
        }
        // letters are numbered with the last proposition as the highest bit;
        // recurse from the highest bit down
        let idx = props.len() - 1 - bit;
        let half = span / 2;
        let lo = go(props, bit + 1, letters, base);
        let hi = go(props, bit + 1, letters, base + half);
        let p = Expr::is_in(props[idx].clone());
        if lo == hi {
            return lo;
        }
        Expr::or(Expr::and(p.clone(), hi), Expr::and(Expr::not(p), lo))
    }
    go(props, 0, letters, 0)
}

fn grouped_moves(c: &MealyMachine, s: usize) -> Vec<(Event, usize, BTreeSet<usize>)> {
    let mut groups: Vec<(Event, usize, BTreeSet<usize>)> = Vec::new();
    for (l, m) in c.delta[s].iter().enumerate() {
        match groups.iter_mut().find(|(o, t, _)| *o == m.output && *t == m.target) {
            Some(g) => {
                g.2.insert(l);
            }
            None => groups.push((m.output.clone(), m.target, [l].into())),
        }
    }
    groups
}

/// Builds the composed controller. Simple mode needs a controller without
/// accepting states; repeating mode needs at least one.
pub fn compose(m: &Monitor, c: &MealyMachine, mode: TriggerKind) -> Result<SymbolicController, ComposeError> {
    match mode {
        TriggerKind::Simple if !c.accepting.is_empty() => {
            return Err(ComposeError::Mode("a simple trigger needs a controller without accepting states".into()))
        }
        TriggerKind::Repeating if c.accepting.is_empty() => {
            return Err(ComposeError::Mode("a repeating trigger needs a tight controller with accepting states".into()))
        }
        _ => {}
    }
    if let Some(p) = c.inputs.iter().find(|p| !m.inputs.contains(*p)) {
        return Err(ComposeError::Alphabet(format!("controller input `{p}` is not a monitor input")));
    }
    if let Some(p) = c.outputs.iter().find(|p| m.inputs.contains(*p)) {
        return Err(ComposeError::Alphabet(format!("controller output `{p}` is a monitor input")));
    }
    // the moves from state `s`, rule 4 applied
    let moves = |s: usize| -> Vec<(Expr, Action, Event, Location)> {
        grouped_moves(c, s)
            .into_iter()
            .map(|(out, target, letters)| {
                let guard = letter_guard(&c.inputs, &letters);
                if mode == TriggerKind::Repeating && c.accepting.contains(&target) {
                    (guard, Action::reset(&m.vars), out, Location::Monitor(m.initial.clone()))
                } else {
                    (guard, Action::default(), out, Location::Controller(target))
                }
            })
            .collect()
    };
    let mut transitions = Vec::new();
    for t in &m.transitions {
        if m.is_flagging(&t.target) {
            for (g, a, out, target) in moves(c.initial) {
                let action = if a.is_empty() { t.action.clone() } else { a };
                transitions.push(ComposedTransition {
                    source: Location::Monitor(t.source.clone()),
                    guard: Expr::and(t.guard.clone(), g),
                    action,
                    outputs: out,
                    target,
                });
            }
        } else {
            transitions.push(ComposedTransition {
                source: Location::Monitor(t.source.clone()),
                guard: t.guard.clone(),
                action: t.action.clone(),
                outputs: Event::new(),
                target: Location::Monitor(t.target.clone()),
            });
        }
    }
    for s in 0..c.states.len() {
        for (guard, action, outputs, target) in moves(s) {
            transitions.push(ComposedTransition { source: Location::Controller(s), guard, action, outputs, target });
        }
    }
    let monitor_states = m.states.iter().filter(|s| !m.is_flagging(s)).cloned().collect();
    Ok(SymbolicController {
        mode,
        inputs: m.inputs.clone(),
        outputs: c.outputs.iter().cloned().collect(),
        vars: m.vars.clone(),
        monitor_states,
        controller_states: c.states.clone(),
        initial: m.initial.clone(),
        sink: m.sink.clone(),
        transitions,
    })
}

impl SymbolicController {
    pub fn initial_state(&self) -> ControllerState {
        ControllerState { location: Location::Monitor(self.initial.clone()), val: initial_valuation(&self.vars) }
    }

    pub fn location_name(&self, l: &Location) -> String {
        match l {
            Location::Monitor(s) => s.clone(),
            Location::Controller(i) => format!("c:{}", self.controller_states[*i]),
        }
    }

    /// Index of the first enabled transition.
    pub fn enabled(&self, s: &ControllerState, input: &Event) -> Result<Option<usize>, ControllerStepError> {
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source == s.location
                && t.guard.eval_bool(input, &s.val).map_err(|error| ControllerStepError { index: i, error })?
            {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// One step: the first enabled transition fires; with none enabled the
    /// state is kept and nothing is emitted.
    pub fn step(&self, s: &ControllerState, input: &Event) -> Result<(ControllerState, Event), ControllerStepError> {
        match self.enabled(s, input)? {
            Some(i) => {
                let t = &self.transitions[i];
                let val = t.action.apply(input, &s.val).map_err(|error| ControllerStepError { index: i, error })?;
                Ok((ControllerState { location: t.target.clone(), val }, t.outputs.clone()))
            }
            None => Ok((s.clone(), Event::new())),
        }
    }

    /// Runs on a sequence of inputs, returning the produced letters.
    pub fn run(&self, inputs: &[Event]) -> Result<Vec<Event>, ControllerStepError> {
        let mut s = self.initial_state();
        let mut out = Vec::with_capacity(inputs.len());
        for i in inputs {
            let (next, o) = self.step(&s, i)?;
            out.push(i.union(&o).cloned().collect());
            s = next;
        }
        Ok(out)
    }

    /// Whether transition `i` hands over to the controller (a flag) and
    /// whether it returns to the initial monitor state (a reset). Monitor
    /// transitions emit nothing, so a monitor-to-monitor move with outputs
    /// is a flag whose witness completes at once.
    pub fn transition_events(&self, i: usize) -> (bool, bool) {
        let t = &self.transitions[i];
        let to_initial = self.mode == TriggerKind::Repeating && t.target == Location::Monitor(self.initial.clone());
        match (&t.source, &t.target) {
            (Location::Monitor(_), Location::Controller(_)) => (true, false),
            (Location::Monitor(_), _) if to_initial && !t.outputs.is_empty() => (true, true),
            (Location::Controller(_), _) => (false, to_initial),
            _ => (false, false),
        }
    }

    /// Copy with the output set of transition `index` cleared.
    pub fn drop_outputs(&self, index: usize) -> SymbolicController {
        let mut sc = self.clone();
        sc.transitions[index].outputs.clear();
        sc
    }

    pub fn to_json(&self) -> String {
        let loc = |l: &Location| match l {
            Location::Monitor(s) => LocationDoc::Monitor(s.clone()),
            Location::Controller(i) => LocationDoc::Controller(self.controller_states[*i].clone()),
        };
        let doc = ControllerDoc {
            mode: self.mode.to_string(),
            inputs: self.inputs.iter().cloned().collect(),
            outputs: self.outputs.iter().cloned().collect(),
            vars: self
                .vars
                .iter()
                .map(|v| VarDoc {
                    name: v.name.clone(),
                    kind: v.kind.to_string(),
                    initial: match v.initial {
                        Value::Int(i) => serde_json::Value::from(i),
                        Value::Bool(b) => serde_json::Value::from(b),
                    },
                })
                .collect(),
            monitor_states: self.monitor_states.clone(),
            controller_states: self.controller_states.clone(),
            initial: self.initial.clone(),
            sink: self.sink.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionDoc {
                    from: loc(&t.source),
                    guard: t.guard.to_string(),
                    action: t.action.to_string(),
                    outputs: t.outputs.iter().cloned().collect(),
                    to: loc(&t.target),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(src: &str) -> Result<SymbolicController, ControllerFileError> {
        let doc: ControllerDoc = serde_json::from_str(src)?;
        let schema = |m: String| ControllerFileError::Schema(m);
        let mode = match doc.mode.as_str() {
            "once" => TriggerKind::Simple,
            "repeat" => TriggerKind::Repeating,
            other => return Err(schema(format!("unknown mode `{other}`"))),
        };
        let mut vars = Vec::new();
        for v in &doc.vars {
            let decl = match (v.kind.as_str(), &v.initial) {
                ("int", serde_json::Value::Number(n)) if n.is_i64() => VarDecl::int(v.name.clone(), n.as_i64().unwrap_or(0)),
                ("bool", serde_json::Value::Bool(b)) => VarDecl::boolean(v.name.clone(), *b),
                _ => return Err(schema(format!("variable `{}` has a bad kind or initial value", v.name))),
            };
            vars.push(decl);
        }
        let ctrl: HashMap<&str, usize> =
            doc.controller_states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let loc = |l: &LocationDoc| -> Result<Location, ControllerFileError> {
            match l {
                LocationDoc::Monitor(s) if doc.monitor_states.contains(s) => Ok(Location::Monitor(s.clone())),
                LocationDoc::Controller(s) => {
                    ctrl.get(s.as_str()).map(|&i| Location::Controller(i)).ok_or_else(|| schema(format!("unknown controller state `{s}`")))
                }
                LocationDoc::Monitor(s) => Err(schema(format!("unknown monitor state `{s}`"))),
            }
        };
        let mut transitions = Vec::new();
        for t in &doc.transitions {
            let guard = parse_expr(&t.guard)?;
            if guard.kind(&vars).map_err(|e| schema(e.to_string()))? != Kind::Bool {
                return Err(schema(format!("guard `{}` is not boolean", t.guard)));
            }
            let action = parse_action(&t.action)?;
            action.check(&vars).map_err(|e| schema(e.to_string()))?;
            if let Some(p) = t.outputs.iter().find(|p| !doc.outputs.contains(p)) {
                return Err(schema(format!("unknown output `{p}`")));
            }
            transitions.push(ComposedTransition {
                source: loc(&t.from)?,
                guard,
                action,
                outputs: t.outputs.iter().cloned().collect(),
                target: loc(&t.to)?,
            });
        }
        for s in [&doc.initial, &doc.sink] {
            if !doc.monitor_states.contains(s) {
                return Err(schema(format!("unknown monitor state `{s}`")));
            }
        }
        Ok(SymbolicController {
            mode,
            inputs: doc.inputs.into_iter().collect(),
            outputs: doc.outputs.into_iter().collect(),
            vars,
            monitor_states: doc.monitor_states,
            controller_states: doc.controller_states,
            initial: doc.initial,
            sink: doc.sink,
            transitions,
        })
    }
}

impl fmt::Display for ControllerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Monitor(s) => write!(f, "monitor {s} {}", fmt_valuation(&self.val)),
            Location::Controller(i) => write!(f, "controller #{i} {}", fmt_valuation(&self.val)),
        }
    }
}

#[derive(Debug, Error)]
pub enum ControllerFileError {
    #[error("malformed controller file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("schema violation: {0}")]
    Schema(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerDoc {
    mode: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    vars: Vec<VarDoc>,
    monitor_states: Vec<String>,
    controller_states: Vec<String>,
    initial: String,
    sink: String,
    transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarDoc {
    name: String,
    kind: String,
    initial: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum LocationDoc {
    Monitor(String),
    Controller(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    from: LocationDoc,
    guard: String,
    action: String,
    outputs: Vec<String>,
    to: LocationDoc,
}

// ---- randomized verification ----

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub episodes: usize,
    /// Steps simulated before looking for a repeated state to close the lasso.
    pub horizon: usize,
    pub seed: u64,
    /// Oracle exploration bound.
    pub bound: usize,
    /// Recurrence assumptions are forced once every this many steps.
    pub recurrence_interval: usize,
    /// Keep every episode's lasso in the report.
    pub keep_traces: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            episodes: 1000,
            horizon: 40,
            seed: 0,
            bound: crate::mttl::DEFAULT_BOUND,
            recurrence_interval: 4,
            keep_traces: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub sat: usize,
    /// Sat because the episode broke the assumption (counted in `sat` too).
    pub vacuous: usize,
    pub unsat: usize,
    pub unknown: usize,
    pub counterexample: Option<LassoTrace>,
    pub traces: Vec<(LassoTrace, Verdict)>,
    pub errors: Vec<String>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sat {} (vacuous {}), unsat {}, unknown {}", self.sat, self.vacuous, self.unsat, self.unknown)
    }
}

/// `f` at a step with letter `now`, where `X` looks at `next`.
fn step_holds(f: &Ltl, now: &Event, next: &Event) -> bool {
    match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Atom(p) => now.contains(p),
        Ltl::Not(a) => !step_holds(a, now, next),
        Ltl::And(a, b) => step_holds(a, now, next) && step_holds(b, now, next),
        Ltl::Or(a, b) => step_holds(a, now, next) || step_holds(b, now, next),
        Ltl::Next(a) => step_holds(a, next, &Event::new()),
        _ => false,
    }
}

struct Env {
    pin: Vec<String>,
    invariants: Vec<Ltl>,
    recurrences: Vec<Ltl>,
    /// For each invariant, the propositions its `X` part can see.
    lookahead: Vec<Vec<String>>,
    lookback: bool,
    interval: usize,
}

impl Env {
    fn new(spec: &MttlSpec, interval: usize) -> Env {
        let parts = spec.assumption.gamma_parts().unwrap_or_default();
        let lookahead = parts.invariants.iter().map(|b| b.props().into_iter().collect()).collect();
        let lookback = parts.invariants.iter().any(crate::synth::game::has_next);
        Env {
            pin: spec.inputs.iter().cloned().collect(),
            invariants: parts.invariants,
            recurrences: parts.recurrences,
            lookahead,
            lookback,
            interval: interval.max(1),
        }
    }

    fn unconstrained(&self) -> bool {
        self.invariants.is_empty() && self.recurrences.is_empty()
    }

    fn random_input(&self, rng: &mut ChaCha8Rng) -> Event {
        self.pin.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
    }

    /// Whether `letter` at step `t` keeps the assumption satisfiable.
    fn admissible(&self, t: usize, prev: Option<&Event>, letter: &Event) -> bool {
        if let Some(p) = prev {
            if !self.invariants.iter().all(|b| step_holds(b, p, letter)) {
                return false;
            }
        }
        for (b, props) in self.invariants.iter().zip(&self.lookahead) {
            let n = props.len().min(12);
            let ok = (0..1usize << n).any(|mask| {
                let next: Event = props.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| p.clone()).collect();
                step_holds(b, letter, &next)
            });
            if !ok {
                return false;
            }
        }
        if t % self.interval == self.interval - 1 {
            return self.recurrences.iter().all(|a| step_holds(a, letter, &Event::new()));
        }
        true
    }
}

type EpisodeKey = (ControllerState, Option<Event>, usize);

/// Drives the controller with random inputs that respect the assumption,
/// closes each run into a lasso at the first repeated state after the
/// horizon, and checks every lasso with the trace oracle.
pub fn verify_against_oracle(spec: &MttlSpec, sc: &SymbolicController, cfg: &VerifyConfig) -> VerifyReport {
    let env = Env::new(spec, cfg.recurrence_interval);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = VerifyReport::default();
    let cap = cfg.horizon * 20 + 1000;
    'episodes: for _ in 0..cfg.episodes {
        let mut s = sc.initial_state();
        let mut letters: Vec<Event> = Vec::new();
        let mut seen: HashMap<EpisodeKey, usize> = HashMap::new();
        let mut lasso = None;
        for t in 0..cap {
            let prev = letters.last().cloned();
            let key = (
                s.clone(),
                if env.lookback { prev.clone() } else { None },
                if env.recurrences.is_empty() { 0 } else { t % env.interval },
            );
            if t >= cfg.horizon {
                if let Some(&i) = seen.get(&key) {
                    lasso = Some(LassoTrace::new(letters[..i].to_vec(), letters[i..].to_vec()));
                    break;
                }
            }
            seen.entry(key).or_insert(t);
            let mut chosen = None;
            let mut attempts = 0;
            loop {
                let input = if attempts < 64 || env.pin.len() > 16 {
                    env.random_input(&mut rng)
                } else {
                    let k = attempts - 64;
                    if k >= 1 << env.pin.len() {
                        break;
                    }
                    env.pin.iter().enumerate().filter(|(i, _)| k & (1 << i) != 0).map(|(_, p)| p.clone()).collect()
                };
                attempts += 1;
                let (next, out) = match sc.step(&s, &input) {
                    Ok(r) => r,
                    Err(e) => {
                        report.errors.push(e.to_string());
                        continue 'episodes;
                    }
                };
                let letter: Event = input.union(&out).cloned().collect();
                let fallback = attempts > 64 + (1 << env.pin.len().min(16)) || (env.pin.len() > 16 && attempts > 256);
                if env.unconstrained() || env.admissible(t, prev.as_ref(), &letter) || fallback {
                    chosen = Some((next, letter));
                    break;
                }
            }
            let (next, letter) = match chosen {
                Some(c) => c,
                None => {
                    // nothing admissible: take any input, the episode becomes vacuous
                    let input = env.random_input(&mut rng);
                    match sc.step(&s, &input) {
                        Ok((n, out)) => (n, input.union(&out).cloned().collect()),
                        Err(e) => {
                            report.errors.push(e.to_string());
                            continue 'episodes;
                        }
                    }
                }
            };
            letters.push(letter);
            s = next;
        }
        let Some(trace) = lasso else {
            report.unknown += 1;
            continue;
        };
        match oracle(spec, &trace, cfg.bound) {
            Ok(r) => {
                match &r.verdict {
                    Verdict::Sat => {
                        report.sat += 1;
                        if r.vacuous {
                            report.vacuous += 1;
                        }
                    }
                    Verdict::Unsat => {
                        report.unsat += 1;
                        if report.counterexample.is_none() {
                            report.counterexample = Some(trace.clone());
                        }
                    }
                    Verdict::Unknown(_) => report.unknown += 1,
                }
                if cfg.keep_traces {
                    report.traces.push((trace, r.verdict));
                }
            }
            Err(e) => report.errors.push(e.to_string()),
        }
    }
    report
}

/// Summary of a composed controller's size.
pub fn stats(sc: &SymbolicController) -> BTreeMap<&'static str, usize> {
    BTreeMap::from([
        ("monitor_states", sc.monitor_states.len()),
        ("controller_states", sc.controller_states.len()),
        ("transitions", sc.transitions.len()),
        ("vars", sc.vars.len()),
    ])
}
