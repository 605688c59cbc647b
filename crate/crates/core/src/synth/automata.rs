//! Finite-word automata for co-safety formulas.
//!
//! The alternating automaton has one state per obligation (the formula
//! itself, every `X` operand and every `U` subformula). A run is accepting
//! once all obligations are discharged, so the nondeterministic automaton
//! built from sets of obligations has the empty set as its only (absorbing)
//! accepting state. The deterministic automaton is the subset construction
//! over that.

use std::collections::{BTreeSet, HashMap};

use crate::ltl::Ltl;
use crate::Event;

use super::SynthError;

/// Alphabet letters are bitmasks over a proposition list.
pub type Letter = u32;

pub(crate) const MAX_PROPS: usize = 16;

pub(crate) fn letter_of(props: &[String], e: &Event) -> Letter {
    props.iter().enumerate().filter(|(_, p)| e.contains(*p)).fold(0, |acc, (i, _)| acc | (1 << i))
}

pub(crate) fn event_of(props: &[String], l: Letter) -> Event {
    props.iter().enumerate().filter(|(i, _)| l & (1 << i) != 0).map(|(_, p)| p.clone()).collect()
}

/// Positive boolean combination of automaton states in disjunctive normal
/// form: a list of minimal clauses. `[]` is false, `[{}]` is true.
pub type Dnf = Vec<BTreeSet<usize>>;

fn minimize(mut clauses: Dnf) -> Dnf {
    clauses.sort_by_key(|c| c.len());
    clauses.dedup();
    let mut out: Dnf = Vec::new();
    for c in clauses {
        if !out.iter().any(|k| k.is_subset(&c)) {
            out.push(c);
        }
    }
    out.sort();
    out
}

fn dnf_or(a: Dnf, b: Dnf) -> Dnf {
    let mut v = a;
    v.extend(b);
    minimize(v)
}

fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut v = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            v.push(x.union(y).cloned().collect());
        }
    }
    minimize(v)
}

fn dnf_true() -> Dnf {
    vec![BTreeSet::new()]
}

#[derive(Debug, Clone)]
pub struct Aww {
    pub props: Vec<String>,
    /// State 0 is the initial obligation (the whole formula).
    pub states: Vec<Ltl>,
    index: HashMap<Ltl, usize>,
}

pub fn build_aww(body: &Ltl) -> Result<Aww, SynthError> {
    let f = body.normalize();
    if !f.is_in(crate::ltl::Fragment::Cosafety) {
        return Err(SynthError::NotCosafety(body.to_string()));
    }
    let props: Vec<String> = f.props().into_iter().collect();
    if props.len() > MAX_PROPS {
        return Err(SynthError::TooLarge(format!("{} propositions in the body", props.len())));
    }
    let mut a = Aww { props, states: Vec::new(), index: HashMap::new() };
    a.intern(&f);
    a.collect(&f);
    Ok(a)
}

impl Aww {
    fn intern(&mut self, f: &Ltl) -> usize {
        if let Some(&i) = self.index.get(f) {
            return i;
        }
        self.states.push(f.clone());
        self.index.insert(f.clone(), self.states.len() - 1);
        self.states.len() - 1
    }

    fn collect(&mut self, f: &Ltl) {
        match f {
            Ltl::And(a, b) | Ltl::Or(a, b) => {
                self.collect(a);
                self.collect(b);
            }
            Ltl::Until(a, b) => {
                self.intern(f);
                self.collect(a);
                self.collect(b);
            }
            Ltl::Next(a) => {
                self.intern(a);
                self.collect(a);
            }
            _ => {}
        }
    }

    fn holds(&self, p: &str, l: Letter) -> bool {
        let i = self.props.iter().position(|q| q == p).expect("proposition of the formula");
        l & (1 << i) != 0
    }

    fn delta_formula(&self, f: &Ltl, l: Letter) -> Dnf {
        match f {
            Ltl::True => dnf_true(),
            Ltl::False => Vec::new(),
            Ltl::Atom(p) => {
                if self.holds(p, l) {
                    dnf_true()
                } else {
                    Vec::new()
                }
            }
            Ltl::Not(a) => match &**a {
                Ltl::Atom(p) if !self.holds(p, l) => dnf_true(),
                _ => Vec::new(),
            },
            Ltl::And(a, b) => dnf_and(&self.delta_formula(a, l), &self.delta_formula(b, l)),
            Ltl::Or(a, b) => dnf_or(self.delta_formula(a, l), self.delta_formula(b, l)),
            Ltl::Next(a) => vec![[self.index[&**a]].into()],
            Ltl::Until(a, b) => {
                let stay = dnf_and(&self.delta_formula(a, l), &vec![[self.index[f]].into()]);
                dnf_or(self.delta_formula(b, l), stay)
            }
            other => unreachable!("not in negation normal co-safety form: {other}"),
        }
    }

    /// Transition of state `s` on letter `l`, as minimal clauses.
    pub fn delta(&self, s: usize, l: Letter) -> Dnf {
        self.delta_formula(&self.states[s], l)
    }

    pub fn letters(&self) -> Letter {
        1 << self.props.len()
    }

    /// States that can reach themselves in one step.
    pub fn self_loops(&self) -> BTreeSet<usize> {
        (0..self.states.len())
            .filter(|&s| (0..self.letters()).any(|l| self.delta(s, l).iter().any(|c| c.contains(&s))))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Nfw {
    pub props: Vec<String>,
    /// Each state is a set of pending alternating-automaton obligations.
    pub states: Vec<BTreeSet<usize>>,
    pub initial: usize,
    /// Index of the empty obligation set, if reachable.
    pub accepting: Option<usize>,
    /// `delta[state][letter]` lists successor states.
    pub delta: Vec<Vec<Vec<usize>>>,
}

pub fn aww_to_nfw(a: &Aww) -> Nfw {
    let n_letters = a.letters();
    let mut table: Vec<Vec<Dnf>> = Vec::new();
    for s in 0..a.states.len() {
        table.push((0..n_letters).map(|l| a.delta(s, l)).collect());
    }
    let mut states: Vec<BTreeSet<usize>> = vec![[0].into()];
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::from([([0].into(), 0)]);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        let mut row = Vec::with_capacity(n_letters as usize);
        for l in 0..n_letters {
            let mut clauses = dnf_true();
            for &s in &cur {
                clauses = dnf_and(&clauses, &table[s][l as usize]);
                if clauses.is_empty() {
                    break;
                }
            }
            let succ: Vec<usize> = clauses
                .into_iter()
                .map(|c| {
                    *index.entry(c.clone()).or_insert_with(|| {
                        states.push(c);
                        states.len() - 1
                    })
                })
                .collect();
            row.push(succ);
        }
        delta.push(row);
        i += 1;
    }
    let accepting = index.get(&BTreeSet::new()).copied();
    Nfw { props: a.props.clone(), states, initial: 0, accepting, delta }
}

impl Nfw {
    pub fn accepts(&self, word: &[Event]) -> bool {
        let Some(acc) = self.accepting else { return false };
        let mut cur: BTreeSet<usize> = [self.initial].into();
        for e in word {
            let l = letter_of(&self.props, e) as usize;
            cur = cur.iter().flat_map(|&s| self.delta[s][l].iter().copied()).collect();
        }
        cur.contains(&acc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfw {
    pub props: Vec<String>,
    pub initial: usize,
    pub accepting: Vec<bool>,
    /// `delta[state][letter]`, complete.
    pub delta: Vec<Vec<usize>>,
}

pub fn nfw_to_dfw(n: &Nfw) -> Dfw {
    let n_letters = 1usize << n.props.len();
    // Obligation sets that contain another one in the same subset are
    // redundant: their language is included in the smaller set's.
    let reduce = |set: BTreeSet<usize>| -> BTreeSet<usize> {
        if let Some(acc) = n.accepting {
            if set.contains(&acc) {
                return [acc].into();
            }
        }
        set.iter()
            .copied()
            .filter(|&a| !set.iter().any(|&b| b != a && n.states[b].is_subset(&n.states[a])))
            .collect()
    };
    let init = reduce([n.initial].into());
    let mut states = vec![init.clone()];
    let mut index = HashMap::from([(init, 0usize)]);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        let mut row = Vec::with_capacity(n_letters);
        for l in 0..n_letters {
            let next = reduce(cur.iter().flat_map(|&s| n.delta[s][l].iter().copied()).collect());
            let id = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                states.len() - 1
            });
            row.push(id);
        }
        delta.push(row);
        i += 1;
    }
    let accepting = states.iter().map(|s| n.accepting.is_some_and(|a| s.contains(&a))).collect();
    Dfw { props: n.props.clone(), initial: 0, accepting, delta }
}

impl Dfw {
    /// The whole pipeline for a co-safety body.
    pub fn from_body(body: &Ltl) -> Result<Dfw, SynthError> {
        Ok(nfw_to_dfw(&aww_to_nfw(&build_aww(body)?)))
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn letter(&self, e: &Event) -> usize {
        letter_of(&self.props, e) as usize
    }

    pub fn next(&self, q: usize, e: &Event) -> usize {
        self.delta[q][self.letter(e)]
    }

    pub fn accepts(&self, word: &[Event]) -> bool {
        let q = word.iter().fold(self.initial, |q, e| self.next(q, e));
        self.accepting[q]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::eval_finite;
    use crate::syntax::parse_ltl;

    fn p(s: &str) -> Ltl {
        parse_ltl(s).unwrap()
    }

    fn words(props: &[&str], max_len: usize) -> Vec<Vec<Event>> {
        let letters: Vec<Event> = (0..1u32 << props.len())
            .map(|l| props.iter().enumerate().filter(|(i, _)| l & (1 << i) != 0).map(|(_, p)| p.to_string()).collect())
            .collect();
        let mut out = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for e in &letters {
                    let mut v: Vec<Event> = w.clone();
                    v.push(e.clone());
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    fn agrees(f: &Ltl, props: &[&str], max_len: usize) {
        let d = Dfw::from_body(f).unwrap();
        let n = aww_to_nfw(&build_aww(f).unwrap());
        for w in words(props, max_len) {
            let expected = !w.is_empty() && eval_finite(f, &w, 0, w.len() - 1);
            assert_eq!(d.accepts(&w), expected, "{f} on {w:?}");
            assert_eq!(n.accepts(&w), expected, "{f} on {w:?} (nfw)");
        }
    }

    #[test]
    fn atom() {
        agrees(&p("a"), &["a"], 3);
    }

    #[test]
    fn until_brute_force() {
        agrees(&p("a U b"), &["a", "b"], 5);
    }

    #[test]
    fn false_is_empty() {
        let d = Dfw::from_body(&Ltl::False).unwrap();
        assert!(d.accepting.iter().all(|a| !a));
    }

    #[test]
    fn next_tt_needs_two_letters() {
        let f = p("X tt");
        let d = Dfw::from_body(&f).unwrap();
        assert!(!d.accepts(&[Event::new()]));
        assert!(d.accepts(&[Event::new(), Event::new()]));
        assert!(d.accepts(&[Event::new(), Event::new(), Event::new()]));
    }

    #[test]
    fn only_until_states_loop() {
        for s in ["a U b", "X (a U X b) | c", "F (a & X F b)", "(a U b) U c"] {
            let a = build_aww(&p(s)).unwrap();
            for q in a.self_loops() {
                assert!(matches!(a.states[q], Ltl::Until(..)), "{s}: {}", a.states[q]);
            }
        }
        let a = build_aww(&p("a U b")).unwrap();
        assert_eq!(a.self_loops().len(), 1);
    }

    #[test]
    fn rejects_globally() {
        assert!(matches!(build_aww(&p("G a")), Err(SynthError::NotCosafety(_))));
        assert!(matches!(build_aww(&p("!(a U b)")), Err(SynthError::NotCosafety(_))));
    }

    #[test]
    fn mixed_formulas() {
        for s in ["F (a & X F b)", "(a | X b) & X X c", "a U (b & X c)", "X (a U !b) | F c", "tt"] {
            agrees(&p(s), &["a", "b", "c"], 4);
        }
    }
}
