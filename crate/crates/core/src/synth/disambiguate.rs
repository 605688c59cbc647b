//! Rewrites disjunctions into mutually exclusive cases and adds a fresh
//! output that signals the witness.
//!
//! This is for controllers produced by external tools, which need not
//! stop at the first witness. Each flattened disjunction `d1 | ... | dn`
//! becomes the `2^n - 1` cases that fix which disjuncts hold. The result is
//! `cases & (!w U w)`: the controller must raise the fresh proposition `w`
//! at some point, and a controller is expected to raise it on the witness.
//! Negated disjuncts leave the co-safety fragment, so the output needs a
//! full LTL backend. The number of cases grows exponentially.

use std::collections::BTreeSet;

use crate::ltl::Ltl;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disambiguated {
    pub body: Ltl,
    /// The fresh output proposition.
    pub signal: String,
    /// Total number of exclusive cases introduced.
    pub cases: usize,
}

pub fn disambiguate(body: &Ltl) -> Disambiguated {
    let f = body.normalize();
    let used = f.props();
    let signal = fresh_name(&used);
    let mut cases = 0;
    let exclusive = rewrite(&f, &mut cases);
    let w = Ltl::atom(signal.clone());
    let guarantee = Ltl::until(Ltl::not(w.clone()), w);
    Disambiguated { body: Ltl::and(exclusive, guarantee), signal, cases }
}

fn fresh_name(used: &BTreeSet<String>) -> String {
    if !used.contains("w") {
        return "w".into();
    }
    (1..).map(|i| format!("w_{i}")).find(|n| !used.contains(n)).expect("infinitely many names")
}

fn flatten<'a>(f: &'a Ltl, out: &mut Vec<&'a Ltl>) {
    match f {
        Ltl::Or(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        other => out.push(other),
    }
}

/// Exclusive case split of every disjunction, bottom up.
pub fn rewrite(f: &Ltl, cases: &mut usize) -> Ltl {
    match f {
        Ltl::Or(..) => {
            let mut ds = Vec::new();
            flatten(f, &mut ds);
            let ds: Vec<Ltl> = ds.into_iter().map(|d| rewrite(d, cases)).collect();
            let n = ds.len();
            let mut alts = Vec::new();
            for mask in 1u64..(1 << n) {
                let parts = ds.iter().enumerate().map(|(i, d)| {
                    if mask & (1 << i) != 0 {
                        d.clone()
                    } else {
                        Ltl::not(d.clone()).normalize()
                    }
                });
                alts.push(Ltl::conjunction(parts));
            }
            *cases += alts.len();
            Ltl::disjunction(alts)
        }
        Ltl::And(a, b) => Ltl::and(rewrite(a, cases), rewrite(b, cases)),
        Ltl::Next(a) => Ltl::next(rewrite(a, cases)),
        Ltl::Until(a, b) => Ltl::until(rewrite(a, cases), rewrite(b, cases)),
        Ltl::Globally(a) => Ltl::globally(rewrite(a, cases)),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::eval_lasso;
    use crate::random::random_lasso;
    use crate::syntax::parse_ltl;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn count_top_cases(f: &Ltl) -> usize {
        let mut v = Vec::new();
        flatten(f, &mut v);
        v.len()
    }

    #[test]
    fn two_disjuncts_three_cases() {
        let d = disambiguate(&parse_ltl("a | X b").unwrap());
        assert_eq!(d.cases, 3);
        let Ltl::And(cases, _) = &d.body else { panic!() };
        assert_eq!(count_top_cases(cases), 3);
    }

    #[test]
    fn nested_three_disjuncts_seven_cases() {
        let d = disambiguate(&parse_ltl("(a | b) | c").unwrap());
        assert_eq!(d.cases, 7);
    }

    #[test]
    fn atom_unchanged_plus_signal() {
        let d = disambiguate(&parse_ltl("a").unwrap());
        assert_eq!(d.cases, 0);
        assert_eq!(d.body, parse_ltl("a & (!w U w)").unwrap());
        let d = disambiguate(&parse_ltl("w & w_1").unwrap());
        assert_eq!(d.signal, "w_2");
    }

    #[test]
    fn cases_are_equivalent_to_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for s in ["a | X b", "(a | b) | c", "F (a | b) & X (c | a)"] {
            let f = parse_ltl(s).unwrap();
            let mut n = 0;
            let g = rewrite(&f.normalize(), &mut n);
            for _ in 0..200 {
                let t = random_lasso(&mut rng, &["a", "b", "c"], 4, 3);
                assert_eq!(eval_lasso(&f, &t), eval_lasso(&g, &t), "{s}");
            }
        }
    }
}
