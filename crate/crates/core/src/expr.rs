//! Guard and action expressions evaluated over an input event and a
//! variable valuation.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::Event;

/// Declared kind of a monitor variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Int,
    Bool,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Int => f.write_str("int"),
            Kind::Bool => f.write_str("bool"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn kind(self) -> Kind {
        match self {
            Value::Int(_) => Kind::Int,
            Value::Bool(_) => Kind::Bool,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i),
            Value::Bool(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// A typed variable with its initial value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub kind: Kind,
    pub initial: Value,
}

impl VarDecl {
    pub fn int(name: impl Into<String>, initial: i64) -> Self {
        VarDecl { name: name.into(), kind: Kind::Int, initial: Value::Int(initial) }
    }

    pub fn boolean(name: impl Into<String>, initial: bool) -> Self {
        VarDecl { name: name.into(), kind: Kind::Bool, initial: Value::Bool(initial) }
    }
}

/// Variable name to value.
pub type Valuation = BTreeMap<String, Value>;

/// The initial valuation of a list of declarations.
pub fn initial_valuation(vars: &[VarDecl]) -> Valuation {
    vars.iter().map(|v| (v.name.clone(), v.initial)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    /// `in(p)`: input proposition `p` is present in the current event.
    In(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("kind mismatch: expected {expected}, found {found} in `{expr}`")]
    KindMismatch { expected: Kind, found: Kind, expr: String },
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("integer overflow in `{0}`")]
    Overflow(String),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn is_in(prop: impl Into<String>) -> Self {
        Expr::In(prop.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Self {
        Expr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    /// Conjunction that folds boolean constants.
    pub fn and(lhs: Expr, rhs: Expr) -> Self {
        match (lhs, rhs) {
            (Expr::Bool(true), e) | (e, Expr::Bool(true)) => e,
            (Expr::Bool(false), _) | (_, Expr::Bool(false)) => Expr::Bool(false),
            (l, r) => Expr::binary(BinOp::And, l, r),
        }
    }

    /// Disjunction that folds boolean constants.
    pub fn or(lhs: Expr, rhs: Expr) -> Self {
        match (lhs, rhs) {
            (Expr::Bool(false), e) | (e, Expr::Bool(false)) => e,
            (Expr::Bool(true), _) | (_, Expr::Bool(true)) => Expr::Bool(true),
            (l, r) => Expr::binary(BinOp::Or, l, r),
        }
    }

    /// Number of nodes in the expression tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) | Expr::In(_) => 1,
            Expr::Unary(_, e) => 1 + e.size(),
            Expr::Binary(_, l, r) => 1 + l.size() + r.size(),
            Expr::Ite(c, t, e) => 1 + c.size() + t.size() + e.size(),
        }
    }

    /// Calls `f` on every variable name referenced.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Int(_) | Expr::Bool(_) | Expr::In(_) => {}
            Expr::Unary(_, e) => e.visit_vars(f),
            Expr::Binary(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
            Expr::Ite(c, t, e) => {
                c.visit_vars(f);
                t.visit_vars(f);
                e.visit_vars(f);
            }
        }
    }

    /// Calls `f` on every proposition tested with `in(..)`.
    pub fn visit_props<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::In(p) => f(p),
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) => e.visit_props(f),
            Expr::Binary(_, l, r) => {
                l.visit_props(f);
                r.visit_props(f);
            }
            Expr::Ite(c, t, e) => {
                c.visit_props(f);
                t.visit_props(f);
                e.visit_props(f);
            }
        }
    }

    /// Static kind of the expression against a set of declarations.
    pub fn kind(&self, vars: &[VarDecl]) -> Result<Kind, EvalError> {
        let expect = |e: &Expr, k: Kind| -> Result<(), EvalError> {
            let found = e.kind(vars)?;
            if found == k {
                Ok(())
            } else {
                Err(EvalError::KindMismatch { expected: k, found, expr: e.to_string() })
            }
        };
        match self {
            Expr::Int(_) => Ok(Kind::Int),
            Expr::Bool(_) | Expr::In(_) => Ok(Kind::Bool),
            Expr::Var(v) => vars
                .iter()
                .find(|d| &d.name == v)
                .map(|d| d.kind)
                .ok_or_else(|| EvalError::UndeclaredVariable(v.clone())),
            Expr::Unary(UnOp::Not, e) => expect(e, Kind::Bool).map(|_| Kind::Bool),
            Expr::Unary(UnOp::Neg, e) => expect(e, Kind::Int).map(|_| Kind::Int),
            Expr::Binary(op, l, r) => match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                    expect(l, Kind::Int)?;
                    expect(r, Kind::Int)?;
                    Ok(Kind::Int)
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    expect(l, Kind::Int)?;
                    expect(r, Kind::Int)?;
                    Ok(Kind::Bool)
                }
                BinOp::Eq | BinOp::Ne => {
                    let k = l.kind(vars)?;
                    expect(r, k)?;
                    Ok(Kind::Bool)
                }
                BinOp::And | BinOp::Or => {
                    expect(l, Kind::Bool)?;
                    expect(r, Kind::Bool)?;
                    Ok(Kind::Bool)
                }
            },
            Expr::Ite(c, t, e) => {
                expect(c, Kind::Bool)?;
                let k = t.kind(vars)?;
                expect(e, k)?;
                Ok(k)
            }
        }
    }

    /// Evaluates the expression. Boolean connectives short-circuit.
    pub fn eval(&self, event: &Event, val: &Valuation) -> Result<Value, EvalError> {
        match self {
            Expr::Int(i) => Ok(Value::Int(*i)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(v) => val.get(v).copied().ok_or_else(|| EvalError::UndeclaredVariable(v.clone())),
            Expr::In(p) => Ok(Value::Bool(event.contains(p))),
            Expr::Unary(UnOp::Not, e) => Ok(Value::Bool(!e.eval_bool(event, val)?)),
            Expr::Unary(UnOp::Neg, e) => {
                let i = e.eval_int(event, val)?;
                i.checked_neg().map(Value::Int).ok_or_else(|| EvalError::Overflow(self.to_string()))
            }
            Expr::Binary(op, l, r) => match op {
                BinOp::And => Ok(Value::Bool(l.eval_bool(event, val)? && r.eval_bool(event, val)?)),
                BinOp::Or => Ok(Value::Bool(l.eval_bool(event, val)? || r.eval_bool(event, val)?)),
                BinOp::Eq | BinOp::Ne => {
                    let a = l.eval(event, val)?;
                    let b = r.eval(event, val)?;
                    if a.kind() != b.kind() {
                        return Err(EvalError::KindMismatch {
                            expected: a.kind(),
                            found: b.kind(),
                            expr: self.to_string(),
                        });
                    }
                    Ok(Value::Bool((a == b) == (*op == BinOp::Eq)))
                }
                _ => {
                    let a = l.eval_int(event, val)?;
                    let b = r.eval_int(event, val)?;
                    let overflow = || EvalError::Overflow(self.to_string());
                    Ok(match op {
                        BinOp::Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
                        BinOp::Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
                        BinOp::Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
                        BinOp::Div => {
                            if b == 0 {
                                return Err(EvalError::DivisionByZero(self.to_string()));
                            }
                            // i64 `/` truncates toward zero
                            Value::Int(a.checked_div(b).ok_or_else(overflow)?)
                        }
                        BinOp::Lt => Value::Bool(a < b),
                        BinOp::Le => Value::Bool(a <= b),
                        BinOp::Gt => Value::Bool(a > b),
                        BinOp::Ge => Value::Bool(a >= b),
                        _ => unreachable!(),
                    })
                }
            },
            Expr::Ite(c, t, e) => {
                if c.eval_bool(event, val)? {
                    t.eval(event, val)
                } else {
                    e.eval(event, val)
                }
            }
        }
    }

    pub fn eval_bool(&self, event: &Event, val: &Valuation) -> Result<bool, EvalError> {
        let v = self.eval(event, val)?;
        v.as_bool().ok_or_else(|| EvalError::KindMismatch {
            expected: Kind::Bool,
            found: v.kind(),
            expr: self.to_string(),
        })
    }

    pub fn eval_int(&self, event: &Event, val: &Valuation) -> Result<i64, EvalError> {
        let v = self.eval(event, val)?;
        v.as_int().ok_or_else(|| EvalError::KindMismatch {
            expected: Kind::Int,
            found: v.kind(),
            expr: self.to_string(),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Unary(..) => 7,
            _ => 8,
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, child: &Expr, min: u8) -> fmt::Result {
        let _ = self;
        if child.precedence() < min {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(i) if *i < 0 => write!(f, "({i})"),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v) => f.write_str(v),
            Expr::In(p) => write!(f, "in({p})"),
            Expr::Unary(op, e) => {
                f.write_str(match op {
                    UnOp::Not => "!",
                    UnOp::Neg => "-",
                })?;
                if *op == UnOp::Neg && matches!(**e, Expr::Int(_)) {
                    return write!(f, "({e})");
                }
                self.fmt_child(f, e, 7)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                // comparisons do not chain, so both sides need a strictly higher level
                let left_min = if p == 4 { p + 1 } else { p };
                self.fmt_child(f, l, left_min)?;
                write!(f, " {} ", op.symbol())?;
                self.fmt_child(f, r, p + 1)
            }
            Expr::Ite(c, t, e) => write!(f, "ite({c}, {t}, {e})"),
        }
    }
}

/// Ordered list of assignments with simultaneous semantics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Action {
    pub assignments: Vec<(String, Expr)>,
}

impl Action {
    pub fn new(assignments: Vec<(String, Expr)>) -> Self {
        Action { assignments }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Every right-hand side reads the pre-state valuation.
    pub fn apply(&self, event: &Event, val: &Valuation) -> Result<Valuation, EvalError> {
        let mut updates = Vec::with_capacity(self.assignments.len());
        for (var, rhs) in &self.assignments {
            if !val.contains_key(var) {
                return Err(EvalError::UndeclaredVariable(var.clone()));
            }
            updates.push((var, rhs.eval(event, val)?));
        }
        let mut next = val.clone();
        for (var, value) in updates {
            next.insert(var.clone(), value);
        }
        Ok(next)
    }

    /// Checks assigned variables are declared and right-hand kinds match.
    pub fn check(&self, vars: &[VarDecl]) -> Result<(), EvalError> {
        for (var, rhs) in &self.assignments {
            let decl = vars
                .iter()
                .find(|d| &d.name == var)
                .ok_or_else(|| EvalError::UndeclaredVariable(var.clone()))?;
            let k = rhs.kind(vars)?;
            if k != decl.kind {
                return Err(EvalError::KindMismatch { expected: decl.kind, found: k, expr: rhs.to_string() });
            }
        }
        Ok(())
    }

    /// Resets every declared variable to its initial value.
    pub fn reset(vars: &[VarDecl]) -> Self {
        Action {
            assignments: vars
                .iter()
                .map(|v| {
                    let lit = match v.initial {
                        Value::Int(i) => Expr::Int(i),
                        Value::Bool(b) => Expr::Bool(b),
                    };
                    (v.name.clone(), lit)
                })
                .collect(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (var, rhs)) in self.assignments.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{var} := {rhs}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event;

    fn val(pairs: &[(&str, i64)]) -> Valuation {
        pairs.iter().map(|(k, v)| (k.to_string(), Value::Int(*v))).collect()
    }

    #[test]
    fn membership_of_present_prop() {
        let e = Expr::is_in("knock");
        assert_eq!(e.eval(&event(&["knock"]), &val(&[("counter", 1)])), Ok(Value::Bool(true)));
    }

    #[test]
    fn equality_of_equal_values() {
        let e = Expr::binary(BinOp::Eq, Expr::var("counter"), Expr::var("n"));
        assert_eq!(e.eval(&event(&["knock"]), &val(&[("counter", 1), ("n", 1)])), Ok(Value::Bool(true)));
    }

    // independent oracle: a tiny evaluator over the same tree that only
    // handles the node types used in the example
    fn reference_eval(e: &Expr, ev: &Event, v: &Valuation) -> i64 {
        match e {
            Expr::Int(i) => *i,
            Expr::Var(x) => v[x].as_int().unwrap(),
            Expr::In(p) => ev.contains(p) as i64,
            Expr::Ite(c, t, f) => {
                if reference_eval(c, ev, v) != 0 {
                    reference_eval(t, ev, v)
                } else {
                    reference_eval(f, ev, v)
                }
            }
            Expr::Binary(BinOp::Add, l, r) => reference_eval(l, ev, v) + reference_eval(r, ev, v),
            other => panic!("unsupported in reference evaluator: {other:?}"),
        }
    }

    #[test]
    fn ite_plus_variable() {
        let e = Expr::binary(
            BinOp::Add,
            Expr::ite(Expr::is_in("p1"), Expr::Int(1), Expr::Int(0)),
            Expr::var("c"),
        );
        let ev = event(&["p0"]);
        let v = val(&[("c", 3)]);
        assert_eq!(e.eval(&ev, &v), Ok(Value::Int(3)));
        assert_eq!(reference_eval(&e, &ev, &v), 3);
    }

    #[test]
    fn division_truncates_toward_zero() {
        let e = Expr::binary(BinOp::Div, Expr::Int(-7), Expr::Int(2));
        assert_eq!(e.eval(&Event::new(), &Valuation::new()), Ok(Value::Int(-3)));
    }

    #[test]
    fn division_by_zero_is_error() {
        let e = Expr::binary(BinOp::Div, Expr::var("a"), Expr::var("b"));
        let err = e.eval(&Event::new(), &val(&[("a", 1), ("b", 0)])).unwrap_err();
        assert!(matches!(err, EvalError::DivisionByZero(_)));
    }

    #[test]
    fn undeclared_variable_and_kind_mismatch() {
        let e = Expr::binary(BinOp::Add, Expr::var("x"), Expr::Int(1));
        assert_eq!(
            e.eval(&Event::new(), &Valuation::new()),
            Err(EvalError::UndeclaredVariable("x".into()))
        );
        let bad = Expr::binary(BinOp::Add, Expr::Bool(true), Expr::Int(1));
        assert!(matches!(bad.kind(&[]), Err(EvalError::KindMismatch { .. })));
        assert!(matches!(bad.eval(&Event::new(), &Valuation::new()), Err(EvalError::KindMismatch { .. })));
    }

    #[test]
    fn increment_action() {
        let a = Action::new(vec![(
            "counter".into(),
            Expr::binary(BinOp::Add, Expr::var("counter"), Expr::Int(1)),
        )]);
        assert_eq!(a.apply(&event(&["knock"]), &val(&[("counter", 0)])), Ok(val(&[("counter", 1)])));
    }

    #[test]
    fn empty_action_is_identity() {
        let v = val(&[("a", 4), ("b", -2)]);
        assert_eq!(Action::default().apply(&event(&["x"]), &v), Ok(v));
    }

    #[test]
    fn swap_is_simultaneous() {
        let a = Action::new(vec![("x".into(), Expr::var("y")), ("y".into(), Expr::var("x"))]);
        let before = val(&[("x", 1), ("y", 2)]);
        let after = a.apply(&Event::new(), &before).unwrap();
        // oracle: copy the pre-state, then assign each target from the copy
        let snapshot = before.clone();
        let mut expected = before;
        for (var, rhs) in &a.assignments {
            if let Expr::Var(src) = rhs {
                expected.insert(var.clone(), snapshot[src]);
            }
        }
        assert_eq!(after, expected);
        assert_eq!(after, val(&[("x", 2), ("y", 1)]));
    }

    #[test]
    fn display_respects_precedence() {
        let e = Expr::binary(
            BinOp::Mul,
            Expr::binary(BinOp::Add, Expr::var("a"), Expr::Int(1)),
            Expr::var("b"),
        );
        assert_eq!(e.to_string(), "(a + 1) * b");
        let g = Expr::and(Expr::is_in("knock"), Expr::binary(BinOp::Ne, Expr::var("c"), Expr::var("n")));
        assert_eq!(g.to_string(), "in(knock) && c != n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_int_expr() -> impl Strategy<Value = Expr> {
            let leaf = prop_oneof![
                (-5i64..5).prop_map(Expr::Int),
                Just(Expr::var("x")),
                Just(Expr::var("y")),
            ];
            leaf.prop_recursive(3, 16, 2, |inner| {
                prop_oneof![
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Add, a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinOp::Mul, a, b)),
                    (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::ite(Expr::is_in("p"), a, b)),
                ]
            })
        }

        proptest! {
            #[test]
            fn eval_is_pure(e in arb_int_expr(), x in -4i64..4, y in -4i64..4, p in any::<bool>()) {
                let v = val(&[("x", x), ("y", y)]);
                let ev = if p { event(&["p"]) } else { Event::new() };
                prop_assert_eq!(e.eval(&ev, &v), e.eval(&ev, &v));
            }

            #[test]
            fn unassigned_vars_unchanged(e in arb_int_expr(), x in -4i64..4, y in -4i64..4, z in -4i64..4) {
                let v = val(&[("x", x), ("y", y), ("z", z)]);
                let a = Action::new(vec![("x".into(), e)]);
                let next = a.apply(&Event::new(), &v).unwrap();
                prop_assert_eq!(next["y"], v["y"]);
                prop_assert_eq!(next["z"], v["z"]);
            }
        }
    }
}
