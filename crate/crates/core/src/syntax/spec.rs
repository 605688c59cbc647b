use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Value, VarDecl};
use crate::ltl::Ltl;
use crate::monitor::{star_monitor, Monitor, Transition};
use crate::mttl::{MttlSpec, Trigger, TriggerKind};

use super::lexer::ParseError;
use super::parser::Parser;

/// A parsed spec file, before parameters are bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecDocument {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Integer parameters with their default values.
    pub params: Vec<(String, i64)>,
    pub assume: Option<Ltl>,
    pub monitor: MonitorSection,
    pub trigger: TriggerKind,
    pub body: Ltl,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonitorSection {
    /// The monitor that flags on the first event.
    Star,
    Explicit {
        vars: Vec<VarDecl>,
        states: Vec<String>,
        initial: String,
        flag: Vec<String>,
        sink: String,
        transitions: Vec<Transition>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{0}` clashes with a monitor variable")]
    ParamClash(String),
}

pub fn parse_spec(src: &str) -> Result<SpecDocument, ParseError> {
    let mut p = Parser::new(src)?;
    p.spec()
}

impl SpecDocument {
    /// Binds parameters (defaults overridden by `overrides`) and builds the
    /// specification. Parameters become integer monitor variables that no
    /// transition assigns.
    pub fn to_spec(&self, overrides: &BTreeMap<String, i64>) -> Result<MttlSpec, SpecError> {
        for name in overrides.keys() {
            if !self.params.iter().any(|(p, _)| p == name) {
                return Err(SpecError::UnknownParam(name.clone()));
            }
        }
        let inputs: BTreeSet<String> = self.inputs.iter().cloned().collect();
        let mut monitor = match &self.monitor {
            MonitorSection::Star => star_monitor(&inputs),
            MonitorSection::Explicit { vars, states, initial, flag, sink, transitions } => Monitor {
                inputs: inputs.clone(),
                vars: vars.clone(),
                states: states.clone(),
                initial: initial.clone(),
                flagging: flag.iter().cloned().collect(),
                sink: sink.clone(),
                transitions: transitions.clone(),
            },
        };
        for (name, default) in &self.params {
            if monitor.vars.iter().any(|v| &v.name == name) {
                return Err(SpecError::ParamClash(name.clone()));
            }
            let v = overrides.get(name).copied().unwrap_or(*default);
            monitor.vars.push(VarDecl::int(name.clone(), v));
        }
        Ok(MttlSpec {
            inputs,
            outputs: self.outputs.iter().cloned().collect(),
            assumption: self.assume.clone().unwrap_or(Ltl::True),
            trigger: Trigger { kind: self.trigger, monitor, body: self.body.clone() },
        })
    }
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs: {};", self.inputs.join(", "))?;
        writeln!(f, "outputs: {};", self.outputs.join(", "))?;
        for (name, v) in &self.params {
            writeln!(f, "param {name} = {v};")?;
        }
        if let Some(a) = &self.assume {
            writeln!(f, "assume: {a};")?;
        }
        match &self.monitor {
            MonitorSection::Star => writeln!(f, "monitor star;")?,
            MonitorSection::Explicit { vars, states, initial, flag, sink, transitions } => {
                writeln!(f, "monitor {{")?;
                for v in vars {
                    let lit = match v.initial {
                        Value::Int(i) => i.to_string(),
                        Value::Bool(b) => b.to_string(),
                    };
                    writeln!(f, "  var {}: {} = {};", v.name, v.kind, lit)?;
                }
                writeln!(f, "  states: {};", states.join(", "))?;
                writeln!(f, "  initial {initial};")?;
                if !flag.is_empty() {
                    writeln!(f, "  flag {};", flag.join(", "))?;
                }
                writeln!(f, "  sink {sink};")?;
                for t in transitions {
                    write!(f, "  {} -> {}", t.source, t.target)?;
                    if t.guard != Expr::Bool(true) {
                        write!(f, " [{}]", t.guard)?;
                    }
                    if !t.action.is_empty() {
                        write!(f, " / {{ {}; }}", t.action)?;
                    }
                    writeln!(f, ";")?;
                }
                writeln!(f, "}}")?;
            }
        }
        let kind = match self.trigger {
            TriggerKind::Simple => "once",
            TriggerKind::Repeating => "repeat",
        };
        writeln!(f, "trigger: {kind};")?;
        writeln!(f, "body: {};", self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
        # door
        inputs: knock;
        outputs: open, greet;
        param n = 3;
        monitor {
          var counter: int = 1;
          states: q0, qF, sink;
          initial q0;
          flag qF;
          sink sink;
          q0 -> q0 [in(knock) && counter != n] / { counter := counter + 1; };
          q0 -> qF [in(knock) && counter == n];
        }
        trigger: once;
        body: open & X greet;
    ";

    #[test]
    fn parses_sections() {
        let d = parse_spec(SMALL).unwrap();
        assert_eq!(d.inputs, vec!["knock"]);
        assert_eq!(d.params, vec![("n".to_string(), 3)]);
        assert_eq!(d.trigger, TriggerKind::Simple);
        let MonitorSection::Explicit { transitions, .. } = &d.monitor else { panic!() };
        assert_eq!(transitions.len(), 2);
        assert_eq!(transitions[0].action.assignments.len(), 1);
    }

    #[test]
    fn print_parse_round_trip() {
        let d = parse_spec(SMALL).unwrap();
        assert_eq!(parse_spec(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn params_become_variables() {
        let d = parse_spec(SMALL).unwrap();
        let s = d.to_spec(&[("n".to_string(), 5)].into()).unwrap();
        let n = s.trigger.monitor.vars.iter().find(|v| v.name == "n").unwrap();
        assert_eq!(n.initial, Value::Int(5));
        assert!(matches!(d.to_spec(&[("k".to_string(), 1)].into()), Err(SpecError::UnknownParam(_))));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_spec("inputs: a;\noutputs: b\nbody: a;").unwrap_err();
        assert_eq!((e.line, e.col), (3, 1));
        let e = parse_spec("inputs: a;\noutputs: b;\nmonitor star;\ntrigger: twice;\nbody: a;").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(parse_spec("inputs: a;\noutputs: b;\nmonitor star;\ntrigger: once;").is_err());
    }

    #[test]
    fn state_named_like_keyword() {
        let src = "inputs: a; outputs: b;
            monitor { states: flag, f2, s; initial flag; flag f2; sink s; flag -> f2 [in(a)]; }
            trigger: once; body: b;";
        let d = parse_spec(src).unwrap();
        let MonitorSection::Explicit { transitions, .. } = &d.monitor else { panic!() };
        assert_eq!(transitions[0].source, "flag");
    }
}
