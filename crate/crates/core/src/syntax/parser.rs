use crate::expr::{Action, BinOp, Expr, Kind, UnOp, Value, VarDecl};
use crate::ltl::Ltl;
use crate::monitor::Transition;
use crate::mttl::TriggerKind;

use super::lexer::{lex, ParseError, Tok, Token};
use super::spec::{MonitorSection, SpecDocument};

const LTL_KEYWORDS: &[&str] = &["tt", "ff", "X", "U", "W", "G", "F"];

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<Token, ParseError> {
        if self.peek_tok() == tok {
            Ok(self.bump())
        } else {
            Err(ParseError::at(self.peek(), format!("expected {tok}, found {}", self.peek_tok())))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek_tok(), Tok::Ident(s) if s == name)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek_tok().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(ParseError::at(self.peek(), format!("expected identifier, found {other}"))),
        }
    }

    pub(crate) fn end(&mut self) -> Result<(), ParseError> {
        self.expect(&Tok::Eof).map(|_| ())
    }

    // ---- LTL ----

    pub(crate) fn ltl(&mut self) -> Result<Ltl, ParseError> {
        let mut lhs = self.ltl_implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.ltl_implies()?;
            lhs = Ltl::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ltl_implies(&mut self) -> Result<Ltl, ParseError> {
        let lhs = self.ltl_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.ltl_implies()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ltl_or(&mut self) -> Result<Ltl, ParseError> {
        let mut lhs = self.ltl_and()?;
        while self.eat(&Tok::Or) || self.eat(&Tok::OrOr) {
            let rhs = self.ltl_and()?;
            lhs = Ltl::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ltl_and(&mut self) -> Result<Ltl, ParseError> {
        let mut lhs = self.ltl_until()?;
        while self.eat(&Tok::And) || self.eat(&Tok::AndAnd) {
            let rhs = self.ltl_until()?;
            lhs = Ltl::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn ltl_until(&mut self) -> Result<Ltl, ParseError> {
        let lhs = self.ltl_unary()?;
        if self.is_ident("U") {
            self.bump();
            return Ok(Ltl::until(lhs, self.ltl_until()?));
        }
        if self.is_ident("W") {
            self.bump();
            return Ok(Ltl::weak_until(lhs, self.ltl_until()?));
        }
        Ok(lhs)
    }

    fn ltl_unary(&mut self) -> Result<Ltl, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Ltl::not(self.ltl_unary()?));
        }
        for (kw, ctor) in [("X", Ltl::next as fn(Ltl) -> Ltl), ("G", Ltl::globally), ("F", Ltl::finally)] {
            if self.is_ident(kw) {
                self.bump();
                return Ok(ctor(self.ltl_unary()?));
            }
        }
        self.ltl_primary()
    }

    fn ltl_primary(&mut self) -> Result<Ltl, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::LParen => {
                self.bump();
                let f = self.ltl()?;
                self.expect(&Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) if s == "tt" || s == "true" => {
                self.bump();
                Ok(Ltl::True)
            }
            Tok::Ident(s) if s == "ff" || s == "false" => {
                self.bump();
                Ok(Ltl::False)
            }
            Tok::Ident(s) if LTL_KEYWORDS.contains(&s.as_str()) => {
                Err(ParseError::at(&t, format!("unexpected operator `{s}`")))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Ltl::Atom(s.clone()))
            }
            other => Err(ParseError::at(&t, format!("expected formula, found {other}"))),
        }
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_and()?;
        while self.eat(&Tok::OrOr) || self.eat(&Tok::Or) {
            let rhs = self.expr_and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_cmp()?;
        while self.eat(&Tok::AndAnd) || self.eat(&Tok::And) {
            let rhs = self.expr_cmp()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn expr_cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.expr_add()?;
        let op = match self.peek_tok() {
            Tok::EqEq | Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.expr_add()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn expr_add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.expr_mul()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn expr_mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_unary()?;
        loop {
            let op = match self.peek_tok() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.expr_unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn expr_unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.expr_unary()?)));
        }
        if self.eat(&Tok::Minus) {
            if let Tok::Int(i) = *self.peek_tok() {
                self.bump();
                return Ok(Expr::Int(-i));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.expr_unary()?)));
        }
        self.expr_primary()
    }

    fn expr_primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Int(*i))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "true" => Ok(Expr::Bool(true)),
                    "false" => Ok(Expr::Bool(false)),
                    "in" if *self.peek_tok() == Tok::LParen => {
                        self.bump();
                        let p = self.ident()?;
                        self.expect(&Tok::RParen)?;
                        Ok(Expr::In(p))
                    }
                    "ite" if *self.peek_tok() == Tok::LParen => {
                        self.bump();
                        let c = self.expr()?;
                        self.expect(&Tok::Comma)?;
                        let a = self.expr()?;
                        self.expect(&Tok::Comma)?;
                        let b = self.expr()?;
                        self.expect(&Tok::RParen)?;
                        Ok(Expr::ite(c, a, b))
                    }
                    _ => Ok(Expr::Var(s.clone())),
                }
            }
            other => Err(ParseError::at(&t, format!("expected expression, found {other}"))),
        }
    }

    /// `x := e; y := f` up to (not including) the closing brace.
    pub(crate) fn assignments(&mut self, close: &Tok) -> Result<Action, ParseError> {
        let mut out = Vec::new();
        while self.peek_tok() != close {
            let var = self.ident()?;
            self.expect(&Tok::Assign)?;
            let rhs = self.expr()?;
            out.push((var, rhs));
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        Ok(Action::new(out))
    }

    // ---- spec files ----

    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek_tok(), Tok::Ident(_)) {
            out.push(self.ident()?);
            while self.eat(&Tok::Comma) {
                out.push(self.ident()?);
            }
        }
        Ok(out)
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            &Tok::Int(i) => {
                self.bump();
                Ok(Value::Int(i))
            }
            Tok::Minus => {
                self.bump();
                match self.bump().tok {
                    Tok::Int(i) => Ok(Value::Int(-i)),
                    _ => Err(ParseError::at(&t, "expected integer literal after `-`")),
                }
            }
            Tok::Ident(ref s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Value::Bool(s == "true"))
            }
            other => Err(ParseError::at(&t, format!("expected literal, found {other}"))),
        }
    }

    pub(crate) fn spec(&mut self) -> Result<SpecDocument, ParseError> {
        let mut inputs = None;
        let mut outputs = None;
        let mut params = Vec::new();
        let mut assume = None;
        let mut monitor = None;
        let mut trigger = None;
        let mut body = None;
        loop {
            let t = self.peek().clone();
            let key = match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                other => return Err(ParseError::at(&t, format!("expected section name, found {other}"))),
            };
            self.bump();
            let dup = |present: bool| -> Result<(), ParseError> {
                if present {
                    Err(ParseError::at(&t, format!("duplicate section `{key}`")))
                } else {
                    Ok(())
                }
            };
            match key.as_str() {
                "inputs" | "outputs" => {
                    self.expect(&Tok::Colon)?;
                    let list = self.ident_list()?;
                    self.expect(&Tok::Semi)?;
                    let slot = if key == "inputs" { &mut inputs } else { &mut outputs };
                    dup(slot.is_some())?;
                    *slot = Some(list);
                }
                "param" => {
                    let name = self.ident()?;
                    self.expect(&Tok::Eq)?;
                    let v = match self.literal()? {
                        Value::Int(i) => i,
                        Value::Bool(_) => return Err(ParseError::at(&t, "parameters are integers")),
                    };
                    self.expect(&Tok::Semi)?;
                    params.push((name, v));
                }
                "assume" => {
                    dup(assume.is_some())?;
                    self.expect(&Tok::Colon)?;
                    assume = Some(self.ltl()?);
                    self.expect(&Tok::Semi)?;
                }
                "body" => {
                    dup(body.is_some())?;
                    self.expect(&Tok::Colon)?;
                    body = Some(self.ltl()?);
                    self.expect(&Tok::Semi)?;
                }
                "trigger" => {
                    dup(trigger.is_some())?;
                    self.expect(&Tok::Colon)?;
                    let kt = self.peek().clone();
                    let kind = match self.ident()?.as_str() {
                        "once" => TriggerKind::Simple,
                        "repeat" => TriggerKind::Repeating,
                        other => {
                            return Err(ParseError::at(&kt, format!("trigger must be `once` or `repeat`, found `{other}`")))
                        }
                    };
                    self.expect(&Tok::Semi)?;
                    trigger = Some(kind);
                }
                "monitor" => {
                    dup(monitor.is_some())?;
                    monitor = Some(self.monitor_section()?);
                }
                other => return Err(ParseError::at(&t, format!("unknown section `{other}`"))),
            }
        }
        let eof = self.peek().clone();
        let missing = |what: &str| ParseError::at(&eof, format!("missing `{what}` section"));
        Ok(SpecDocument {
            inputs: inputs.ok_or_else(|| missing("inputs"))?,
            outputs: outputs.ok_or_else(|| missing("outputs"))?,
            params,
            assume,
            monitor: monitor.ok_or_else(|| missing("monitor"))?,
            trigger: trigger.ok_or_else(|| missing("trigger"))?,
            body: body.ok_or_else(|| missing("body"))?,
        })
    }

    fn monitor_section(&mut self) -> Result<MonitorSection, ParseError> {
        if self.is_ident("star") {
            self.bump();
            self.expect(&Tok::Semi)?;
            return Ok(MonitorSection::Star);
        }
        let open = self.expect(&Tok::LBrace)?;
        let mut vars = Vec::new();
        let mut states = None;
        let mut initial = None;
        let mut flag = Vec::new();
        let mut sink = None;
        let mut transitions = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let t = self.peek().clone();
            let word = self.ident()?;
            let is_transition = *self.peek_tok() == Tok::Arrow;
            match word.as_str() {
                "var" if !is_transition => {
                    let name = self.ident()?;
                    self.expect(&Tok::Colon)?;
                    let kt = self.peek().clone();
                    let kind = match self.ident()?.as_str() {
                        "int" => Kind::Int,
                        "bool" => Kind::Bool,
                        other => return Err(ParseError::at(&kt, format!("unknown kind `{other}`"))),
                    };
                    self.expect(&Tok::Eq)?;
                    let initial = self.literal()?;
                    if initial.kind() != kind {
                        return Err(ParseError::at(&kt, format!("initial value of `{name}` is not {kind}")));
                    }
                    self.expect(&Tok::Semi)?;
                    vars.push(VarDecl { name, kind, initial });
                }
                "states" if !is_transition => {
                    self.expect(&Tok::Colon)?;
                    states = Some(self.ident_list()?);
                    self.expect(&Tok::Semi)?;
                }
                "initial" if !is_transition => {
                    initial = Some(self.ident()?);
                    self.expect(&Tok::Semi)?;
                }
                "flag" if !is_transition => {
                    flag.extend(self.ident_list()?);
                    self.expect(&Tok::Semi)?;
                }
                "sink" if !is_transition => {
                    sink = Some(self.ident()?);
                    self.expect(&Tok::Semi)?;
                }
                source => {
                    if !is_transition {
                        return Err(ParseError::at(&t, format!("unknown monitor item `{source}`")));
                    }
                    self.bump();
                    let target = self.ident()?;
                    let guard = if self.eat(&Tok::LBracket) {
                        let g = self.expr()?;
                        self.expect(&Tok::RBracket)?;
                        g
                    } else {
                        Expr::Bool(true)
                    };
                    let action = if self.eat(&Tok::Slash) {
                        self.expect(&Tok::LBrace)?;
                        let a = self.assignments(&Tok::RBrace)?;
                        self.expect(&Tok::RBrace)?;
                        a
                    } else {
                        Action::default()
                    };
                    self.expect(&Tok::Semi)?;
                    transitions.push(Transition { source: source.to_string(), guard, action, target });
                }
            }
        }
        let states = states.ok_or_else(|| ParseError::at(&open, "monitor is missing `states`"))?;
        let initial = initial.ok_or_else(|| ParseError::at(&open, "monitor is missing `initial`"))?;
        let sink = sink.ok_or_else(|| ParseError::at(&open, "monitor is missing `sink`"))?;
        Ok(MonitorSection::Explicit { vars, states, initial, flag, sink, transitions })
    }
}
