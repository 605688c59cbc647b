//! Flagging monitors: symbolic automata over sets of input propositions with
//! typed variables, guarded transitions with actions, flagging states and a
//! sink.
//!
//! Stepping follows four rules:
//!
//! 1. from a state that is neither flagging nor the sink, the first
//!    transition (in declaration order) whose guard holds fires and its
//!    action updates the valuation;
//! 2. if no guard holds, the configuration stutters;
//! 3. the sink is never left;
//! 4. a flagging state always moves to the sink, valuation unchanged.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{initial_valuation, Action, BinOp, EvalError, Expr, Kind, Valuation, Value, VarDecl};
use crate::Event;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: String,
    pub guard: Expr,
    pub action: Action,
    pub target: String,
}

impl Transition {
    pub fn new(source: &str, guard: Expr, action: Action, target: &str) -> Self {
        Transition { source: source.into(), guard, action, target: target.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitor {
    pub inputs: BTreeSet<String>,
    pub vars: Vec<VarDecl>,
    pub states: Vec<String>,
    pub initial: String,
    pub flagging: BTreeSet<String>,
    pub sink: String,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: String,
    pub val: Valuation,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.state, fmt_valuation(&self.val))
    }
}

/// Formats a valuation as `{x=1, y=true}`.
pub fn fmt_valuation(val: &Valuation) -> String {
    let parts: Vec<String> = val.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlagResult {
    /// The event at this 0-based index made the monitor enter a flagging state.
    Flagged(usize),
    Pending(Configuration),
    /// The sink was entered without flagging.
    Dead(Valuation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { code, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transition #{transition} ({source_state} -> {target}): {error}")]
pub struct StepError {
    pub transition: usize,
    pub source_state: String,
    pub target: String,
    pub error: EvalError,
}

impl Monitor {
    pub fn initial_configuration(&self) -> Configuration {
        Configuration { state: self.initial.clone(), val: initial_valuation(&self.vars) }
    }

    pub fn is_flagging(&self, state: &str) -> bool {
        self.flagging.contains(state)
    }

    /// Structural checks. An empty result means the monitor is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                out.push(Diagnostic::new("duplicate-state", format!("state `{s}` declared twice")));
            }
        }
        let declared = |s: &str| self.states.iter().any(|d| d == s);
        if !declared(&self.initial) {
            out.push(Diagnostic::new("unknown-state", format!("initial state `{}` is not declared", self.initial)));
        }
        if !declared(&self.sink) {
            out.push(Diagnostic::new("unknown-state", format!("sink `{}` is not declared", self.sink)));
        }
        for f in &self.flagging {
            if !declared(f) {
                out.push(Diagnostic::new("unknown-state", format!("flagging state `{f}` is not declared")));
            }
        }
        if self.flagging.contains(&self.initial) {
            out.push(Diagnostic::new(
                "initial-flags",
                format!("initial state `{}` cannot be a flagging state", self.initial),
            ));
        }
        if self.flagging.contains(&self.sink) {
            out.push(Diagnostic::new("sink-flags", format!("sink `{}` cannot be a flagging state", self.sink)));
        }

        let mut names = HashSet::new();
        for v in &self.vars {
            if !names.insert(v.name.as_str()) {
                out.push(Diagnostic::new("duplicate-variable", format!("variable `{}` declared twice", v.name)));
            }
            if v.initial.kind() != v.kind {
                out.push(Diagnostic::new(
                    "variable-kind",
                    format!("variable `{}` is {} but its initial value is {}", v.name, v.kind, v.initial.kind()),
                ));
            }
        }

        for (i, t) in self.transitions.iter().enumerate() {
            let loc = format!("transition #{i} ({} -> {})", t.source, t.target);
            if t.source == self.sink {
                out.push(Diagnostic::new("sink-outgoing", format!("{loc}: sink has an outgoing transition")));
            }
            if self.flagging.contains(&t.source) {
                out.push(Diagnostic::new(
                    "flag-outgoing",
                    format!("{loc}: flagging states always move to the sink, explicit transitions are not allowed"),
                ));
            }
            for s in [&t.source, &t.target] {
                if !declared(s) {
                    out.push(Diagnostic::new("unknown-state", format!("{loc}: state `{s}` is not declared")));
                }
            }
            match t.guard.kind(&self.vars) {
                Ok(Kind::Bool) => {}
                Ok(k) => out.push(Diagnostic::new("guard-kind", format!("{loc}: guard has kind {k}, expected bool"))),
                Err(e) => out.push(Diagnostic::new("guard-kind", format!("{loc}: {e}"))),
            }
            if let Err(e) = t.action.check(&self.vars) {
                out.push(Diagnostic::new("action", format!("{loc}: {e}")));
            }
            let mut unknown = Vec::new();
            let visit = |p: &str| {
                if !self.inputs.contains(p) {
                    unknown.push(p.to_string());
                }
            };
            let mut visit = visit;
            t.guard.visit_props(&mut visit);
            for (_, rhs) in &t.action.assignments {
                rhs.visit_props(&mut visit);
            }
            for p in unknown {
                out.push(Diagnostic::new("unknown-input", format!("{loc}: `{p}` is not an input proposition")));
            }
        }
        out
    }

    /// One step of the monitor semantics.
    pub fn step(&self, c: &Configuration, event: &Event) -> Result<Configuration, StepError> {
        if c.state == self.sink {
            return Ok(c.clone());
        }
        if self.is_flagging(&c.state) {
            return Ok(Configuration { state: self.sink.clone(), val: c.val.clone() });
        }
        match self.enabled(c, event)? {
            Some(i) => {
                let t = &self.transitions[i];
                let val = t.action.apply(event, &c.val).map_err(|error| self.step_error(i, error))?;
                Ok(Configuration { state: t.target.clone(), val })
            }
            None => Ok(c.clone()),
        }
    }

    /// Index of the first transition from `c.state` whose guard holds.
    pub fn enabled(&self, c: &Configuration, event: &Event) -> Result<Option<usize>, StepError> {
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source != c.state {
                continue;
            }
            if t.guard.eval_bool(event, &c.val).map_err(|error| self.step_error(i, error))? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    fn step_error(&self, i: usize, error: EvalError) -> StepError {
        let t = &self.transitions[i];
        StepError { transition: i, source_state: t.source.clone(), target: t.target.clone(), error }
    }

    /// Runs from the initial configuration until the monitor flags, dies, or
    /// the trace ends.
    pub fn run(&self, trace: &[Event]) -> Result<FlagResult, StepError> {
        self.run_from(self.initial_configuration(), trace)
    }

    pub fn run_from(&self, mut c: Configuration, trace: &[Event]) -> Result<FlagResult, StepError> {
        for (j, e) in trace.iter().enumerate() {
            c = self.step(&c, e)?;
            if self.is_flagging(&c.state) {
                return Ok(FlagResult::Flagged(j));
            }
            if c.state == self.sink {
                return Ok(FlagResult::Dead(c.val));
            }
        }
        Ok(FlagResult::Pending(c))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// Warnings that do not make the monitor invalid: guards that overlap on
    /// sampled inputs, and divisors that are zero under the initial valuation.
    pub fn lint(&self, samples: usize, seed: u64) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let inputs: Vec<&String> = self.inputs.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = initial_valuation(&self.vars);
        let mut overlaps = BTreeSet::new();
        for _ in 0..samples {
            let state = &self.states[rng.gen_range(0..self.states.len().max(1))];
            let ev: Event = inputs.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.to_string()).collect();
            let val = sample_valuation(&self.vars, &mut rng);
            let enabled: Vec<usize> = self
                .transitions
                .iter()
                .enumerate()
                .filter(|(_, t)| &t.source == state)
                .filter(|(_, t)| t.guard.eval_bool(&ev, &val).unwrap_or(false))
                .map(|(i, _)| i)
                .collect();
            if enabled.len() >= 2 {
                overlaps.insert((enabled[0], enabled[1]));
            }
        }
        for (a, b) in overlaps {
            out.push(Diagnostic::new(
                "overlapping-guards",
                format!(
                    "transitions #{a} and #{b} from `{}` can be enabled together; the first one declared wins",
                    self.transitions[a].source
                ),
            ));
        }

        for (i, t) in self.transitions.iter().enumerate() {
            let mut divisors = Vec::new();
            collect_divisors(&t.guard, &mut divisors);
            for (_, rhs) in &t.action.assignments {
                collect_divisors(rhs, &mut divisors);
            }
            for d in divisors {
                let mut vars = Vec::new();
                d.visit_vars(&mut |v| vars.push(v));
                if vars.is_empty() && !matches!(d, Expr::Int(_)) {
                    continue;
                }
                if let Ok(Value::Int(0)) = d.eval(&Event::new(), &init) {
                    out.push(Diagnostic::new(
                        "zero-divisor",
                        format!("transition #{i}: divisor `{d}` is zero under the initial valuation"),
                    ));
                }
            }
        }
        out
    }
}

fn collect_divisors<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match e {
        Expr::Binary(op, l, r) => {
            if *op == BinOp::Div {
                out.push(r);
            }
            collect_divisors(l, out);
            collect_divisors(r, out);
        }
        Expr::Unary(_, x) => collect_divisors(x, out),
        Expr::Ite(c, t, f) => {
            collect_divisors(c, out);
            collect_divisors(t, out);
            collect_divisors(f, out);
        }
        _ => {}
    }
}

fn sample_valuation(vars: &[VarDecl], rng: &mut impl Rng) -> Valuation {
    vars.iter()
        .map(|v| {
            let value = match v.initial {
                Value::Int(i) => {
                    let spread = i.unsigned_abs().min(1 << 20) as i64 * 2 + 4;
                    Value::Int(rng.gen_range(-2..=spread))
                }
                Value::Bool(_) => Value::Bool(rng.gen_bool(0.5)),
            };
            (v.name.clone(), value)
        })
        .collect()
}

/// The monitor that flags on every first event: `q0 -> qF` with a true
/// guard and no action.
pub fn star_monitor(inputs: &BTreeSet<String>) -> Monitor {
    Monitor {
        inputs: inputs.clone(),
        vars: Vec::new(),
        states: vec!["q0".into(), "qF".into(), "sink".into()],
        initial: "q0".into(),
        flagging: ["qF".to_string()].into(),
        sink: "sink".into(),
        transitions: vec![Transition::new("q0", Expr::Bool(true), Action::default(), "qF")],
    }
}

/// A monitor that never flags (its only transition has a false guard).
pub fn silent_monitor(inputs: &BTreeSet<String>) -> Monitor {
    let mut m = star_monitor(inputs);
    m.transitions[0].guard = Expr::Bool(false);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::event;

    #[test]
    fn knock_monitor_is_valid() {
        assert_eq!(cases::knock_monitor(2).validate(), vec![]);
    }

    #[test]
    fn initial_state_cannot_flag() {
        let mut m = cases::knock_monitor(2);
        m.flagging.insert("q0".into());
        let d = m.validate();
        assert!(d.iter().any(|d| d.code == "initial-flags"), "{d:?}");
    }

    #[test]
    fn sink_cannot_have_outgoing() {
        let mut m = cases::knock_monitor(2);
        m.transitions.push(Transition::new("sink", Expr::Bool(true), Action::default(), "q0"));
        let d = m.validate();
        assert!(d.iter().any(|d| d.code == "sink-outgoing"), "{d:?}");
    }

    #[test]
    fn undeclared_state_and_bad_guard() {
        let mut m = cases::knock_monitor(2);
        m.transitions.push(Transition::new("q0", Expr::Int(3), Action::default(), "nowhere"));
        let codes: Vec<_> = m.validate().into_iter().map(|d| d.code).collect();
        assert!(codes.contains(&"unknown-state"));
        assert!(codes.contains(&"guard-kind"));
    }

    fn cfg(state: &str, counter: i64, n: i64) -> Configuration {
        Configuration {
            state: state.into(),
            val: [("counter".to_string(), Value::Int(counter)), ("n".to_string(), Value::Int(n))].into(),
        }
    }

    #[test]
    fn knock_flags_on_nth_knock() {
        let m = cases::knock_monitor(1);
        assert_eq!(m.step(&cfg("q0", 1, 1), &event(&["knock"])).unwrap(), cfg("qF", 1, 1));
    }

    #[test]
    fn no_knock_stutters() {
        let m = cases::knock_monitor(1);
        assert_eq!(m.step(&cfg("q0", 1, 1), &Event::new()).unwrap(), cfg("q0", 1, 1));
    }

    #[test]
    fn flag_moves_to_sink_and_sink_stays() {
        let m = cases::knock_monitor(1);
        for e in [Event::new(), event(&["knock"])] {
            assert_eq!(m.step(&cfg("qF", 5, 1), &e).unwrap(), cfg("sink", 5, 1));
            assert_eq!(m.step(&cfg("sink", 5, 1), &e).unwrap(), cfg("sink", 5, 1));
        }
    }

    #[test]
    fn run_knock() {
        let m = cases::knock_monitor(2);
        let k = event(&["knock"]);
        assert_eq!(m.run(&[k.clone(), k.clone()]).unwrap(), FlagResult::Flagged(1));
        assert!(matches!(m.run(&[k]).unwrap(), FlagResult::Pending(_)));
    }

    #[test]
    fn star_monitor_behaviour() {
        let inputs: BTreeSet<String> = ["p".to_string()].into();
        let m = star_monitor(&inputs);
        assert_eq!(m.validate(), vec![]);
        assert_eq!(m.states.len(), 3);
        assert_eq!(m.transitions.len(), 1);
        assert_eq!(m.run(&[event(&["p"])]).unwrap(), FlagResult::Flagged(0));
        assert_eq!(m.run(&[Event::new()]).unwrap(), FlagResult::Flagged(0));
        assert!(matches!(m.run(&[]).unwrap(), FlagResult::Pending(_)));
    }

    #[test]
    fn explicit_sink_transition_is_dead() {
        let mut m = star_monitor(&BTreeSet::new());
        m.transitions[0].target = "sink".into();
        assert_eq!(m.run(&[Event::new(), Event::new()]).unwrap(), FlagResult::Dead(Valuation::new()));
    }

    #[test]
    fn step_error_names_transition() {
        let mut m = star_monitor(&BTreeSet::new());
        m.vars.push(VarDecl::int("z", 0));
        m.transitions[0].guard =
            Expr::binary(BinOp::Gt, Expr::binary(BinOp::Div, Expr::Int(1), Expr::var("z")), Expr::Int(0));
        let err = m.run(&[Event::new()]).unwrap_err();
        assert_eq!(err.transition, 0);
        assert!(matches!(err.error, EvalError::DivisionByZero(_)));
        assert!(m.lint(10, 0).iter().any(|d| d.code == "zero-divisor"));
    }

    #[test]
    fn lint_detects_overlap() {
        let mut m = star_monitor(&BTreeSet::new());
        m.transitions.push(Transition::new("q0", Expr::Bool(true), Action::default(), "sink"));
        assert!(m.lint(50, 1).iter().any(|d| d.code == "overlapping-guards"));
        assert!(cases::knock_monitor(3).lint(200, 1).is_empty());
    }

    #[test]
    fn stutter_without_transitions() {
        let mut m = star_monitor(&BTreeSet::new());
        m.transitions.clear();
        let c = m.initial_configuration();
        assert_eq!(m.step(&c, &Event::new()).unwrap(), c);
    }
}
