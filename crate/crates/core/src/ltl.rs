//! LTL formulas over propositions: negation normal form, fragment
//! classification, and evaluation over finite windows, lassos and tight
//! witnesses.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::Event;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Iff(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    WeakUntil(Box<Ltl>, Box<Ltl>),
    Globally(Box<Ltl>),
    Finally(Box<Ltl>),
}

/// Syntactic fragments used to restrict bodies and assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fragment {
    /// `G`-free in negation normal form.
    Cosafety,
    /// Boolean combination of propositions.
    AssumptionAlpha,
    /// Boolean combination of `alpha` and `X alpha`.
    AssumptionBeta,
    /// Conjunction of `G beta` and `G F alpha`.
    AssumptionGamma,
    General,
}

impl Ltl {
    pub fn atom(p: impl Into<String>) -> Self {
        Ltl::Atom(p.into())
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Ltl) -> Self {
        Ltl::Not(Box::new(f))
    }
    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Ltl, b: Ltl) -> Self {
        Ltl::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Ltl, b: Ltl) -> Self {
        Ltl::Iff(Box::new(a), Box::new(b))
    }
    pub fn next(f: Ltl) -> Self {
        Ltl::Next(Box::new(f))
    }
    pub fn until(a: Ltl, b: Ltl) -> Self {
        Ltl::Until(Box::new(a), Box::new(b))
    }
    pub fn weak_until(a: Ltl, b: Ltl) -> Self {
        Ltl::WeakUntil(Box::new(a), Box::new(b))
    }
    pub fn globally(f: Ltl) -> Self {
        Ltl::Globally(Box::new(f))
    }
    pub fn finally(f: Ltl) -> Self {
        Ltl::Finally(Box::new(f))
    }

    /// Conjunction of all items; `tt` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = Ltl>) -> Ltl {
        items.into_iter().reduce(Ltl::and).unwrap_or(Ltl::True)
    }

    /// Disjunction of all items; `ff` when empty.
    pub fn disjunction(items: impl IntoIterator<Item = Ltl>) -> Ltl {
        items.into_iter().reduce(Ltl::or).unwrap_or(Ltl::False)
    }

    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(p) => {
                out.insert(p.clone());
            }
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Globally(a) | Ltl::Finally(a) => a.collect_props(out),
            Ltl::And(a, b)
            | Ltl::Or(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Iff(a, b)
            | Ltl::Until(a, b)
            | Ltl::WeakUntil(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => 1,
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Globally(a) | Ltl::Finally(a) => 1 + a.size(),
            Ltl::And(a, b)
            | Ltl::Or(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Iff(a, b)
            | Ltl::Until(a, b)
            | Ltl::WeakUntil(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Negation normal form over `tt ff p !p & | X U G`.
    ///
    /// `F`, `W`, `->` and `<->` are expanded; a negated until becomes
    /// `!b U (!a & !b) | G !b`.
    pub fn normalize(&self) -> Ltl {
        nnf(self, false)
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => true,
            Ltl::Not(a) => matches!(**a, Ltl::Atom(_)),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) => a.is_nnf() && b.is_nnf(),
            Ltl::Next(a) | Ltl::Globally(a) => a.is_nnf(),
            Ltl::Implies(..) | Ltl::Iff(..) | Ltl::WeakUntil(..) | Ltl::Finally(..) => false,
        }
    }

    fn has_globally(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => false,
            Ltl::Globally(_) => true,
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Finally(a) => a.has_globally(),
            Ltl::And(a, b)
            | Ltl::Or(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Iff(a, b)
            | Ltl::Until(a, b)
            | Ltl::WeakUntil(a, b) => a.has_globally() || b.has_globally(),
        }
    }

    /// Classifies a formula; it is normalized first.
    pub fn classify(&self) -> Fragment {
        let f = self.normalize();
        if !f.has_globally() {
            Fragment::Cosafety
        } else if is_gamma(&f) {
            Fragment::AssumptionGamma
        } else {
            Fragment::General
        }
    }

    /// Grammar membership for a specific fragment (after normalization).
    pub fn is_in(&self, fragment: Fragment) -> bool {
        let f = self.normalize();
        match fragment {
            Fragment::Cosafety => !f.has_globally(),
            Fragment::AssumptionAlpha => is_alpha(&f),
            Fragment::AssumptionBeta => is_beta(&f),
            Fragment::AssumptionGamma => is_gamma(&f),
            Fragment::General => true,
        }
    }

    /// Splits a normalized gamma formula into its invariant bodies (`G beta`)
    /// and recurrence bodies (`G F alpha`). Returns `None` outside gamma.
    pub fn gamma_parts(&self) -> Option<GammaParts> {
        let f = self.normalize();
        if f == Ltl::True {
            return Some(GammaParts::default());
        }
        let mut parts = GammaParts::default();
        collect_gamma(&f, &mut parts).then_some(parts)
    }
}

/// The conjuncts of a gamma assumption.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GammaParts {
    pub invariants: Vec<Ltl>,
    pub recurrences: Vec<Ltl>,
}

fn collect_gamma(f: &Ltl, parts: &mut GammaParts) -> bool {
    match f {
        Ltl::And(a, b) => collect_gamma(a, parts) && collect_gamma(b, parts),
        Ltl::Globally(inner) => match &**inner {
            Ltl::Until(l, r) if **l == Ltl::True && is_alpha(r) => {
                parts.recurrences.push((**r).clone());
                true
            }
            b if is_beta(b) => {
                parts.invariants.push(b.clone());
                true
            }
            _ => false,
        },
        _ => false,
    }
}

fn is_alpha(f: &Ltl) -> bool {
    match f {
        Ltl::True | Ltl::False | Ltl::Atom(_) => true,
        Ltl::Not(a) => is_alpha(a),
        Ltl::And(a, b) | Ltl::Or(a, b) => is_alpha(a) && is_alpha(b),
        _ => false,
    }
}

fn is_beta(f: &Ltl) -> bool {
    match f {
        Ltl::Next(a) => is_alpha(a),
        Ltl::And(a, b) | Ltl::Or(a, b) => is_beta(a) && is_beta(b),
        other => is_alpha(other),
    }
}

fn is_gamma(f: &Ltl) -> bool {
    let mut parts = GammaParts::default();
    collect_gamma(f, &mut parts)
}

fn nnf(f: &Ltl, neg: bool) -> Ltl {
    use Ltl::*;
    match (f, neg) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(p), false) => Atom(p.clone()),
        (Atom(p), true) => Ltl::not(Atom(p.clone())),
        (Not(a), _) => nnf(a, !neg),
        (And(a, b), false) => Ltl::and(nnf(a, false), nnf(b, false)),
        (And(a, b), true) => Ltl::or(nnf(a, true), nnf(b, true)),
        (Or(a, b), false) => Ltl::or(nnf(a, false), nnf(b, false)),
        (Or(a, b), true) => Ltl::and(nnf(a, true), nnf(b, true)),
        (Implies(a, b), false) => Ltl::or(nnf(a, true), nnf(b, false)),
        (Implies(a, b), true) => Ltl::and(nnf(a, false), nnf(b, true)),
        (Iff(a, b), false) => Ltl::or(
            Ltl::and(nnf(a, false), nnf(b, false)),
            Ltl::and(nnf(a, true), nnf(b, true)),
        ),
        (Iff(a, b), true) => Ltl::or(
            Ltl::and(nnf(a, false), nnf(b, true)),
            Ltl::and(nnf(a, true), nnf(b, false)),
        ),
        (Next(a), _) => Ltl::next(nnf(a, neg)),
        (Until(a, b), false) => Ltl::until(nnf(a, false), nnf(b, false)),
        (Until(a, b), true) => negated_until(nnf(a, true), nnf(b, true)),
        (WeakUntil(a, b), false) => {
            let (a, b) = (nnf(a, false), nnf(b, false));
            Ltl::or(Ltl::until(a.clone(), b), Ltl::globally(a))
        }
        // !(a W b) == !b U (!a & !b)
        (WeakUntil(a, b), true) => {
            let (na, nb) = (nnf(a, true), nnf(b, true));
            Ltl::until(nb.clone(), Ltl::and(na, nb))
        }
        (Globally(a), false) => Ltl::globally(nnf(a, false)),
        (Globally(a), true) => Ltl::until(True, nnf(a, true)),
        (Finally(a), false) => Ltl::until(True, nnf(a, false)),
        (Finally(a), true) => Ltl::globally(nnf(a, true)),
    }
}

// !(a U b) == (!b U (!a & !b)) | G !b, given the already negated operands
fn negated_until(na: Ltl, nb: Ltl) -> Ltl {
    Ltl::or(Ltl::until(nb.clone(), Ltl::and(na, nb.clone())), Ltl::globally(nb))
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ltl(self, f, 0)
    }
}

type Printer<'a> = Box<dyn Fn(&mut fmt::Formatter<'_>) -> fmt::Result + 'a>;

// precedence: 1 <->, 2 ->, 3 |, 4 &, 5 U W, 6 unary
fn fmt_ltl(ltl: &Ltl, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    let (prec, body): (u8, Printer<'_>) = match ltl {
        Ltl::True => (7, Box::new(|f| f.write_str("tt"))),
        Ltl::False => (7, Box::new(|f| f.write_str("ff"))),
        Ltl::Atom(p) => (7, Box::new(move |f| f.write_str(p))),
        Ltl::Not(a) => (6, Box::new(move |f| unary(f, "!", a))),
        Ltl::Next(a) => (6, Box::new(move |f| unary(f, "X ", a))),
        Ltl::Globally(a) => (6, Box::new(move |f| unary(f, "G ", a))),
        Ltl::Finally(a) => (6, Box::new(move |f| unary(f, "F ", a))),
        Ltl::Iff(a, b) => (1, Box::new(move |f| binary(f, a, "<->", b, 2, 2))),
        Ltl::Implies(a, b) => (2, Box::new(move |f| binary(f, a, "->", b, 3, 2))),
        Ltl::Or(a, b) => (3, Box::new(move |f| binary(f, a, "|", b, 3, 4))),
        Ltl::And(a, b) => (4, Box::new(move |f| binary(f, a, "&", b, 4, 5))),
        Ltl::Until(a, b) => (5, Box::new(move |f| binary(f, a, "U", b, 6, 5))),
        Ltl::WeakUntil(a, b) => (5, Box::new(move |f| binary(f, a, "W", b, 6, 5))),
    };
    if prec < min {
        f.write_str("(")?;
        body(f)?;
        f.write_str(")")
    } else {
        body(f)
    }
}

fn unary(f: &mut fmt::Formatter<'_>, op: &str, a: &Ltl) -> fmt::Result {
    f.write_str(op)?;
    fmt_ltl(a, f, 6)
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Ltl, op: &str, b: &Ltl, lmin: u8, rmin: u8) -> fmt::Result {
    fmt_ltl(a, f, lmin)?;
    write!(f, " {op} ")?;
    fmt_ltl(b, f, rmin)
}

/// An infinite trace `prefix . loop^omega`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoTrace {
    pub prefix: Vec<Event>,
    pub cycle: Vec<Event>,
}

impl LassoTrace {
    /// Panics if `cycle` is empty.
    pub fn new(prefix: Vec<Event>, cycle: Vec<Event>) -> Self {
        assert!(!cycle.is_empty(), "lasso loop must be nonempty");
        LassoTrace { prefix, cycle }
    }

    /// Number of distinct positions (`|prefix| + |loop|`).
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, pos: usize) -> &Event {
        if pos < self.prefix.len() {
            &self.prefix[pos]
        } else {
            &self.cycle[(pos - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Maps a position to its representative in `0..len()`.
    pub fn canonical(&self, pos: usize) -> usize {
        if pos < self.prefix.len() {
            pos
        } else {
            self.prefix.len() + (pos - self.prefix.len()) % self.cycle.len()
        }
    }

    /// The suffix starting at `pos`, as a lasso.
    pub fn suffix(&self, pos: usize) -> LassoTrace {
        if pos < self.prefix.len() {
            LassoTrace::new(self.prefix[pos..].to_vec(), self.cycle.clone())
        } else {
            let shift = (pos - self.prefix.len()) % self.cycle.len();
            let mut cycle = self.cycle[shift..].to_vec();
            cycle.extend_from_slice(&self.cycle[..shift]);
            LassoTrace::new(Vec::new(), cycle)
        }
    }

    /// The first `n` events of the infinite trace.
    pub fn unroll(&self, n: usize) -> Vec<Event> {
        (0..n).map(|i| self.at(i).clone()).collect()
    }
}

/// Satisfaction of `f` on the finite window `trace[i..=j]`.
///
/// `X` needs a following position inside the window, `U` needs its witness
/// inside the window, and `G` never holds on a finite window.
pub fn eval_finite(f: &Ltl, trace: &[Event], i: usize, j: usize) -> bool {
    assert!(i <= j && j < trace.len(), "window {i}..={j} outside trace of length {}", trace.len());
    let mut memo = HashMap::new();
    window_sat(f, trace, i, j, &mut memo)
}

fn window_sat(
    f: &Ltl,
    t: &[Event],
    i: usize,
    j: usize,
    memo: &mut HashMap<(*const Ltl, usize), bool>,
) -> bool {
    let key = (f as *const Ltl, i);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Atom(p) => t[i].contains(p),
        Ltl::Not(a) => !window_sat(a, t, i, j, memo),
        Ltl::And(a, b) => window_sat(a, t, i, j, memo) && window_sat(b, t, i, j, memo),
        Ltl::Or(a, b) => window_sat(a, t, i, j, memo) || window_sat(b, t, i, j, memo),
        Ltl::Implies(a, b) => !window_sat(a, t, i, j, memo) || window_sat(b, t, i, j, memo),
        Ltl::Iff(a, b) => window_sat(a, t, i, j, memo) == window_sat(b, t, i, j, memo),
        Ltl::Next(a) => j > i && window_sat(a, t, i + 1, j, memo),
        Ltl::Until(a, b) => {
            let mut found = false;
            for l in i..=j {
                if window_sat(b, t, l, j, memo) {
                    found = true;
                    break;
                }
                if !window_sat(a, t, l, j, memo) {
                    break;
                }
            }
            found
        }
        Ltl::Finally(a) => (i..=j).any(|l| window_sat(a, t, l, j, memo)),
        Ltl::WeakUntil(a, b) => {
            // (a U b) | G a, and G is false on a finite window
            let mut found = false;
            for l in i..=j {
                if window_sat(b, t, l, j, memo) {
                    found = true;
                    break;
                }
                if !window_sat(a, t, l, j, memo) {
                    break;
                }
            }
            found
        }
        Ltl::Globally(_) => false,
    };
    memo.insert(key, v);
    v
}

/// Exact satisfaction of `f` on the infinite trace denoted by the lasso.
///
/// Each subformula gets a truth vector over the `|prefix| + |loop|`
/// positions; the last position's successor is the loop start. Until is a
/// least fixpoint and globally a greatest fixpoint over that successor map.
pub fn eval_lasso(f: &Ltl, t: &LassoTrace) -> bool {
    let n = t.len();
    let succ = |p: usize| if p + 1 < n { p + 1 } else { t.prefix.len() };
    let mut memo: HashMap<*const Ltl, Rc<Vec<bool>>> = HashMap::new();
    lasso_vec(f, t, &succ, &mut memo)[0]
}

fn lasso_vec(
    f: &Ltl,
    t: &LassoTrace,
    succ: &dyn Fn(usize) -> usize,
    memo: &mut HashMap<*const Ltl, Rc<Vec<bool>>>,
) -> Rc<Vec<bool>> {
    if let Some(v) = memo.get(&(f as *const Ltl)) {
        return v.clone();
    }
    let n = t.len();
    let v: Vec<bool> = match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(p) => (0..n).map(|i| t.at(i).contains(p)).collect(),
        Ltl::Not(a) => lasso_vec(a, t, succ, memo).iter().map(|x| !x).collect(),
        Ltl::And(a, b) => zip(&lasso_vec(a, t, succ, memo), &lasso_vec(b, t, succ, memo), |x, y| x && y),
        Ltl::Or(a, b) => zip(&lasso_vec(a, t, succ, memo), &lasso_vec(b, t, succ, memo), |x, y| x || y),
        Ltl::Implies(a, b) => zip(&lasso_vec(a, t, succ, memo), &lasso_vec(b, t, succ, memo), |x, y| !x || y),
        Ltl::Iff(a, b) => zip(&lasso_vec(a, t, succ, memo), &lasso_vec(b, t, succ, memo), |x, y| x == y),
        Ltl::Next(a) => {
            let va = lasso_vec(a, t, succ, memo);
            (0..n).map(|i| va[succ(i)]).collect()
        }
        Ltl::Until(a, b) => {
            let (va, vb) = (lasso_vec(a, t, succ, memo), lasso_vec(b, t, succ, memo));
            until_fix(&va, &vb, n, succ)
        }
        Ltl::Finally(a) => {
            let vb = lasso_vec(a, t, succ, memo);
            until_fix(&vec![true; n], &vb, n, succ)
        }
        Ltl::WeakUntil(a, b) => {
            let (va, vb) = (lasso_vec(a, t, succ, memo), lasso_vec(b, t, succ, memo));
            let u = until_fix(&va, &vb, n, succ);
            let g = globally_fix(&va, n, succ);
            zip(&u, &g, |x, y| x || y)
        }
        Ltl::Globally(a) => {
            let va = lasso_vec(a, t, succ, memo);
            globally_fix(&va, n, succ)
        }
    };
    let v = Rc::new(v);
    memo.insert(f as *const Ltl, v.clone());
    v
}

fn zip(a: &[bool], b: &[bool], op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect()
}

fn until_fix(a: &[bool], b: &[bool], n: usize, succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let mut v = vec![false; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let nv = b[i] || (a[i] && v[succ(i)]);
            if nv != v[i] {
                v[i] = nv;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

fn globally_fix(a: &[bool], n: usize, succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let mut v = vec![true; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let nv = a[i] && v[succ(i)];
            if nv != v[i] {
                v[i] = nv;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

/// `trace` satisfies the co-safety formula `f` and no strict prefix does.
pub fn tight_sat(f: &Ltl, trace: &[Event]) -> bool {
    if trace.is_empty() {
        return false;
    }
    let last = trace.len() - 1;
    eval_finite(f, trace, 0, last) && (0..last).all(|k| !eval_finite(f, &trace[..=k], 0, k))
}

/// Length of the shortest prefix of `trace` satisfying `f`, if any.
pub fn first_witness(f: &Ltl, trace: &[Event]) -> Option<usize> {
    (0..trace.len()).find(|&k| eval_finite(f, &trace[..=k], 0, k)).map(|k| k + 1)
}
