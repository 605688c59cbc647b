//! Monitor-triggered specifications and the reference trace oracle.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::ltl::{eval_finite, eval_lasso, Fragment, LassoTrace, Ltl};
use crate::monitor::{Configuration, Diagnostic, Monitor, StepError};
use crate::Event;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriggerKind {
    /// `D : phi`: once `D` flags, the suffix from the flagging event satisfies `phi`.
    Simple,
    /// `(D ; phi)*`: every flag is followed by a tight witness of `phi`, then
    /// the monitor restarts from its initial configuration.
    Repeating,
}

impl fmt::Display for TriggerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriggerKind::Simple => "once",
            TriggerKind::Repeating => "repeat",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trigger {
    pub kind: TriggerKind,
    pub monitor: Monitor,
    pub body: Ltl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MttlSpec {
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    /// `tt` when there is no assumption.
    pub assumption: Ltl,
    pub trigger: Trigger,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sat => f.write_str("sat"),
            Verdict::Unsat => f.write_str("unsat"),
            Verdict::Unknown(why) => write!(f, "unknown ({why})"),
        }
    }
}

/// One monitor run of the oracle: where it started, where it flagged, and
/// where the body's witness ended (repeating triggers only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub flag: Option<usize>,
    pub witness_end: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub verdict: Verdict,
    /// The assumption fails on the trace, so the verdict is vacuous.
    pub vacuous: bool,
    pub segments: Vec<Segment>,
}

impl OracleReport {
    fn new(verdict: Verdict, segments: Vec<Segment>) -> Self {
        OracleReport { verdict, vacuous: false, segments }
    }
}

pub const DEFAULT_BOUND: usize = 100_000;

impl MttlSpec {
    /// The LTL formula a backend controller must realise: `assumption -> body`.
    pub fn t_of(&self) -> Ltl {
        Ltl::implies(self.assumption.clone(), self.trigger.body.clone())
    }

    /// Well-formedness diagnostics; empty means valid.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = self.trigger.monitor.validate();
        for p in self.inputs.intersection(&self.outputs) {
            out.push(Diagnostic::new("io-overlap", format!("`{p}` is both an input and an output")));
        }
        if self.trigger.monitor.inputs != self.inputs {
            out.push(Diagnostic::new("monitor-alphabet", "monitor alphabet differs from the declared inputs"));
        }
        let known: BTreeSet<&String> = self.inputs.iter().chain(&self.outputs).collect();
        for (what, f) in [("body", &self.trigger.body), ("assumption", &self.assumption)] {
            for p in f.props() {
                if !known.contains(&p) {
                    out.push(Diagnostic::new("unknown-proposition", format!("{what} mentions undeclared `{p}`")));
                }
            }
        }
        if self.trigger.kind == TriggerKind::Repeating && self.trigger.body.classify() != Fragment::Cosafety {
            out.push(Diagnostic::new("body-fragment", "body not co-safety (required by a repeating trigger)"));
        }
        if self.assumption.gamma_parts().is_none() {
            out.push(Diagnostic::new("assumption-fragment", "assumption outside γ fragment"));
        }
        out
    }

    pub fn props(&self) -> BTreeSet<String> {
        self.inputs.union(&self.outputs).cloned().collect()
    }
}

/// Position-indexed view of a lasso with cycle-aware keys.
struct Walk<'a> {
    t: &'a LassoTrace,
}

impl Walk<'_> {
    /// Key for loop detection: positions inside the loop collapse to their phase.
    fn phase(&self, pos: usize) -> Option<usize> {
        (pos >= self.t.prefix.len()).then(|| self.t.canonical(pos))
    }
}

enum RunEnd {
    Flagged(usize),
    Never,
    Bound,
}

/// Runs the monitor from its initial configuration starting at `start`.
/// `Never` means it died or provably cycles without flagging.
fn run_segment(m: &Monitor, t: &LassoTrace, start: usize, bound: usize) -> Result<RunEnd, StepError> {
    let walk = Walk { t };
    let mut c = m.initial_configuration();
    let mut seen: HashSet<(Configuration, usize)> = HashSet::new();
    let mut pos = start;
    loop {
        if pos >= bound {
            return Ok(RunEnd::Bound);
        }
        if let Some(ph) = walk.phase(pos) {
            if !seen.insert((c.clone(), ph)) {
                return Ok(RunEnd::Never);
            }
        }
        c = m.step(&c, t.at(pos))?;
        if m.is_flagging(&c.state) {
            return Ok(RunEnd::Flagged(pos));
        }
        if c.state == m.sink {
            return Ok(RunEnd::Never);
        }
        pos += 1;
    }
}

/// `D : body` on a lasso. The flagging event is the body's first event.
pub fn oracle_simple(m: &Monitor, body: &Ltl, t: &LassoTrace, bound: usize) -> Result<OracleReport, StepError> {
    Ok(match run_segment(m, t, 0, bound)? {
        RunEnd::Flagged(j) => {
            let ok = eval_lasso(body, &t.suffix(j));
            let seg = Segment { start: 0, flag: Some(j), witness_end: None };
            OracleReport::new(if ok { Verdict::Sat } else { Verdict::Unsat }, vec![seg])
        }
        RunEnd::Never => OracleReport::new(Verdict::Sat, vec![Segment { start: 0, flag: None, witness_end: None }]),
        RunEnd::Bound => OracleReport::new(
            Verdict::Unknown(format!("monitor neither flagged nor cycled within {bound} steps")),
            vec![Segment { start: 0, flag: None, witness_end: None }],
        ),
    })
}

/// `(D ; body)*` on a lasso. After each flag at `j` the shortest window
/// `j..=k` satisfying the co-safety body must exist; the monitor restarts
/// from its initial configuration at `k + 1`.
pub fn oracle_repeat(m: &Monitor, body: &Ltl, t: &LassoTrace, bound: usize) -> Result<OracleReport, StepError> {
    let walk = Walk { t };
    let mut segments = Vec::new();
    let mut starts = HashSet::new();
    let mut start = 0;
    let mut events: Vec<Event> = Vec::new();
    loop {
        if let Some(ph) = walk.phase(start) {
            if !starts.insert(ph) {
                return Ok(OracleReport::new(Verdict::Sat, segments));
            }
        }
        let j = match run_segment(m, t, start, bound)? {
            RunEnd::Flagged(j) => j,
            RunEnd::Never => {
                segments.push(Segment { start, flag: None, witness_end: None });
                return Ok(OracleReport::new(Verdict::Sat, segments));
            }
            RunEnd::Bound => {
                segments.push(Segment { start, flag: None, witness_end: None });
                let why = format!("monitor neither flagged nor cycled within {bound} steps");
                return Ok(OracleReport::new(Verdict::Unknown(why), segments));
            }
        };
        if !eval_lasso(body, &t.suffix(j)) {
            segments.push(Segment { start, flag: Some(j), witness_end: None });
            return Ok(OracleReport::new(Verdict::Unsat, segments));
        }
        // co-safety: a satisfied infinite suffix has a finite witness
        let mut k = j;
        let end = loop {
            if k >= bound {
                break None;
            }
            while events.len() <= k {
                events.push(t.at(events.len()).clone());
            }
            if eval_finite(body, &events[..=k], j, k) {
                break Some(k);
            }
            k += 1;
        };
        segments.push(Segment { start, flag: Some(j), witness_end: end });
        match end {
            Some(k) => start = k + 1,
            None => {
                let why = format!("no witness for the body within {bound} steps");
                return Ok(OracleReport::new(Verdict::Unknown(why), segments));
            }
        }
    }
}

/// Trace semantics of a full specification: vacuously sat when the
/// assumption fails on the trace.
pub fn oracle(spec: &MttlSpec, t: &LassoTrace, bound: usize) -> Result<OracleReport, StepError> {
    if !eval_lasso(&spec.assumption, t) {
        return Ok(OracleReport { verdict: Verdict::Sat, vacuous: true, segments: Vec::new() });
    }
    let Trigger { kind, monitor, body } = &spec.trigger;
    match kind {
        TriggerKind::Simple => oracle_simple(monitor, body, t, bound),
        TriggerKind::Repeating => oracle_repeat(monitor, body, t, bound),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::event;
    use crate::ltl::LassoTrace;
    use crate::monitor::{silent_monitor, star_monitor};
    use crate::random::{random_formula, random_lasso, FormulaConfig};
    use crate::syntax::parse_ltl;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Ltl {
        parse_ltl(s).unwrap()
    }

    fn lasso(prefix: &[&[&str]], cycle: &[&[&str]]) -> LassoTrace {
        LassoTrace::new(prefix.iter().map(|e| event(e)).collect(), cycle.iter().map(|e| event(e)).collect())
    }

    fn star(props: &[&str]) -> Monitor {
        star_monitor(&props.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn t_of_is_implication() {
        let spec = cases::parity_spec(false);
        assert_eq!(spec.t_of(), Ltl::implies(Ltl::True, p("p & X tt")));
        let room = cases::room_spec(2, 2);
        assert_eq!(room.trigger.body, p("F(isClean & X F !inRoom & X F !doorLocked)"));
        assert_eq!(room.t_of(), Ltl::implies(room.assumption.clone(), room.trigger.body.clone()));
    }

    #[test]
    fn star_trigger_equals_plain_ltl() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = star(&["a", "b"]);
        for _ in 0..300 {
            let f = random_formula(&mut rng, &FormulaConfig::general(&["a", "b"], 3));
            let t = random_lasso(&mut rng, &["a", "b"], 8, 4);
            let r = oracle_simple(&m, &f, &t, DEFAULT_BOUND).unwrap();
            let expected = if eval_lasso(&f, &t) { Verdict::Sat } else { Verdict::Unsat };
            assert_eq!(r.verdict, expected, "{f} on {t:?}");
        }
    }

    #[test]
    fn knock_flags_then_body_from_flag_event() {
        let m = cases::knock_monitor(2);
        let t = lasso(&[], &[&["knock", "a"]]);
        let r = oracle_simple(&m, &p("G a"), &t, DEFAULT_BOUND).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert_eq!(r.segments[0].flag, Some(1));
        // the body starts at the flagging event itself
        let t = lasso(&[&["knock"], &["knock", "a"]], &[&[]]);
        assert_eq!(oracle_simple(&m, &p("a"), &t, DEFAULT_BOUND).unwrap().verdict, Verdict::Sat);
        assert_eq!(oracle_simple(&m, &p("X a"), &t, DEFAULT_BOUND).unwrap().verdict, Verdict::Unsat);
    }

    #[test]
    fn silent_monitor_is_vacuous() {
        let m = silent_monitor(&["a".to_string()].into());
        let t = lasso(&[&["a"]], &[&[]]);
        assert_eq!(oracle_simple(&m, &Ltl::False, &t, DEFAULT_BOUND).unwrap().verdict, Verdict::Sat);
    }

    #[test]
    fn parity_examples() {
        let m = star(&[]);
        let even = p("p & X tt");
        let odd = p("X p");
        let r = oracle_repeat(&m, &even, &lasso(&[], &[&["p"], &[]]), DEFAULT_BOUND).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert_eq!(r.segments[0], Segment { start: 0, flag: Some(0), witness_end: Some(1) });
        assert_eq!(oracle_repeat(&m, &even, &lasso(&[], &[&[], &["p"]]), DEFAULT_BOUND).unwrap().verdict, Verdict::Unsat);
        assert_eq!(oracle_repeat(&m, &odd, &lasso(&[], &[&[], &["p"]]), DEFAULT_BOUND).unwrap().verdict, Verdict::Sat);
        // p at 0, 2, 4 but missing at 6
        let t = lasso(&[&["p"], &[], &["p"], &[], &["p"], &[]], &[&[]]);
        assert_eq!(oracle_repeat(&m, &even, &t, DEFAULT_BOUND).unwrap().verdict, Verdict::Unsat);
    }

    #[test]
    fn repeat_segments_do_not_overlap() {
        let m = star(&[]);
        let r = oracle_repeat(&m, &p("p & X tt"), &lasso(&[], &[&["p"], &[]]), DEFAULT_BOUND).unwrap();
        for w in r.segments.windows(2) {
            assert_eq!(w[1].start, w[0].witness_end.unwrap() + 1);
        }
    }

    #[test]
    fn violated_assumption_is_vacuous() {
        let mut spec = cases::parity_spec(false);
        spec.assumption = p("G F p");
        let r = oracle(&spec, &lasso(&[], &[&[]]), DEFAULT_BOUND).unwrap();
        assert!(r.vacuous);
        assert_eq!(r.verdict, Verdict::Sat);

        let room = cases::room_spec(2, 2);
        // robot locks itself in and the room never gets clean
        let t = lasso(&[], &[&["inRoom", "doorLocked"]]);
        assert!(!eval_lasso(&room.assumption, &t));
        assert_eq!(oracle(&room, &t, DEFAULT_BOUND).unwrap().verdict, Verdict::Sat);
    }

    #[test]
    fn true_assumption_delegates() {
        let spec = cases::parity_spec(false);
        let bad = lasso(&[], &[&[]]);
        let r = oracle(&spec, &bad, DEFAULT_BOUND).unwrap();
        assert!(!r.vacuous);
        assert_eq!(r.verdict, Verdict::Unsat);
    }

    #[test]
    fn variable_free_monitors_never_unknown() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let m = crate::random::random_monitor(&mut rng, &["a", "b"], 4, 0);
            let f = random_formula(&mut rng, &FormulaConfig::cosafety(&["a", "b"], 2));
            let t = random_lasso(&mut rng, &["a", "b"], 6, 4);
            assert!(!matches!(oracle_simple(&m, &f, &t, 1000).unwrap().verdict, Verdict::Unknown(_)));
            assert!(!matches!(oracle_repeat(&m, &f, &t, 1000).unwrap().verdict, Verdict::Unknown(_)));
        }
    }

    #[test]
    fn checks() {
        assert!(cases::knock_spec(2).check().is_empty());
        let mut s = cases::knock_spec(2);
        s.trigger.kind = TriggerKind::Repeating;
        s.trigger.body = p("G open");
        assert!(s.check().iter().any(|d| d.message.contains("body not co-safety")));
        let mut s = cases::knock_spec(2);
        s.assumption = p("G F (knock & X knock)");
        assert!(s.check().iter().any(|d| d.message.contains("assumption outside γ fragment")));
    }
}
