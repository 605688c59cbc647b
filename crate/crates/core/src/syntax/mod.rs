//! Text formats: LTL formulas, guard and action expressions, spec files and
//! trace files.
//!
//! Spec grammar (`#` and `//` start comments):
//!
//! ```text
//! spec       := section*
//! section    := "inputs" ":" idents ";" | "outputs" ":" idents ";"
//!             | "param" IDENT "=" INT ";"
//!             | "assume" ":" ltl ";"
//!             | "monitor" "star" ";" | "monitor" "{" item* "}"
//!             | "trigger" ":" ("once" | "repeat") ";"
//!             | "body" ":" ltl ";"
//! item       := "var" IDENT ":" ("int" | "bool") "=" literal ";"
//!             | "states" ":" idents ";" | "initial" IDENT ";"
//!             | "flag" idents ";" | "sink" IDENT ";"
//!             | IDENT "->" IDENT ["[" expr "]"] ["/" "{" assign* "}"] ";"
//! assign     := IDENT ":=" expr ";"
//! ```
//!
//! Expressions, loosest first: `||`, `&&`, comparisons (`== != < <= > >=`,
//! non-associative), `+ -`, `* /`, unary `! -`; atoms are integers,
//! `true`, `false`, variables, `in(p)` and `ite(c, a, b)`.
//!
//! LTL, loosest first: `<->`, `->` (right associative), `|`, `&`,
//! `U`/`W` (right associative), unary `! X G F`; atoms are `tt`, `ff` and
//! proposition names.
//!
//! Trace files are JSON: `{"prefix": [["a"], []], "loop": [["b"]]}`.

pub mod lexer;
mod parser;
pub mod spec;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Action, Expr};
use crate::ltl::{LassoTrace, Ltl};
use crate::Event;

pub use lexer::ParseError;
pub use spec::{parse_spec, MonitorSection, SpecDocument, SpecError};

use lexer::Tok;
use parser::Parser;

pub fn parse_ltl(src: &str) -> Result<Ltl, ParseError> {
    let mut p = Parser::new(src)?;
    let f = p.ltl()?;
    p.end()?;
    Ok(f)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.end()?;
    Ok(e)
}

/// Parses `x := e; y := f` (trailing `;` optional, empty text is the empty
/// action).
pub fn parse_action(src: &str) -> Result<Action, ParseError> {
    let mut p = Parser::new(src)?;
    let a = p.assignments(&Tok::Eof)?;
    p.end()?;
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceDocument {
    #[serde(default)]
    pub prefix: Vec<Vec<String>>,
    #[serde(rename = "loop")]
    pub cycle: Vec<Vec<String>>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed trace: {0}")]
    Json(#[from] serde_json::Error),
    #[error("trace loop must be nonempty")]
    EmptyLoop,
    #[error("unknown proposition `{0}` in trace")]
    UnknownProp(String),
}

/// Parses a trace file. When `props` is given, every proposition must be in it.
pub fn parse_trace(src: &str, props: Option<&BTreeSet<String>>) -> Result<LassoTrace, TraceError> {
    let doc: TraceDocument = serde_json::from_str(src)?;
    if doc.cycle.is_empty() {
        return Err(TraceError::EmptyLoop);
    }
    let conv = |events: Vec<Vec<String>>| -> Result<Vec<Event>, TraceError> {
        events
            .into_iter()
            .map(|e| {
                if let Some(known) = props {
                    if let Some(bad) = e.iter().find(|p| !known.contains(*p)) {
                        return Err(TraceError::UnknownProp(bad.clone()));
                    }
                }
                Ok(e.into_iter().collect())
            })
            .collect()
    };
    Ok(LassoTrace::new(conv(doc.prefix)?, conv(doc.cycle)?))
}

pub fn trace_to_json(t: &LassoTrace) -> String {
    let conv = |v: &[Event]| v.iter().map(|e| e.iter().cloned().collect()).collect();
    let doc = TraceDocument { prefix: conv(&t.prefix), cycle: conv(&t.cycle) };
    serde_json::to_string(&doc).expect("trace serialization cannot fail")
}
