//! Reachability game on the witness automaton.
//!
//! The environment picks inputs, the system answers with outputs. The
//! system wins on reaching an accepting automaton state, or when the
//! environment's move makes an invariant assumption `G beta` false no
//! matter which outputs are chosen. When some `beta` uses `X`, positions
//! remember the previous letter and a breach is detected one step late.

use std::collections::{BTreeSet, HashMap};

use crate::ltl::Ltl;

use super::automata::{event_of, Dfw, Letter, MAX_PROPS};
use super::mealy::{MealyMachine, Move};
use super::SynthError;

type Pos = (usize, Option<Letter>);

enum Outcome {
    Accept,
    Next(usize),
}

pub(crate) fn has_next(f: &Ltl) -> bool {
    match f {
        Ltl::Next(_) => true,
        Ltl::Not(a) => has_next(a),
        Ltl::And(a, b) | Ltl::Or(a, b) => has_next(a) || has_next(b),
        _ => false,
    }
}

/// `beta` at a step whose letter is `now`, with `next` the following letter.
fn eval_step(f: &Ltl, idx: &HashMap<&str, usize>, now: Letter, next: Letter) -> bool {
    match f {
        Ltl::True => true,
        Ltl::False => false,
        Ltl::Atom(p) => now & (1 << idx[p.as_str()]) != 0,
        Ltl::Not(a) => !eval_step(a, idx, now, next),
        Ltl::And(a, b) => eval_step(a, idx, now, next) && eval_step(b, idx, now, next),
        Ltl::Or(a, b) => eval_step(a, idx, now, next) || eval_step(b, idx, now, next),
        Ltl::Next(a) => eval_step(a, idx, next, 0),
        other => unreachable!("not an invariant body: {other}"),
    }
}

/// Solves the game; `None` means the system has no winning strategy.
pub fn solve_reachability(
    d: &Dfw,
    assumption: &Ltl,
    inputs: &BTreeSet<String>,
    outputs: &BTreeSet<String>,
) -> Result<Option<MealyMachine>, SynthError> {
    let parts = assumption.gamma_parts().ok_or(SynthError::AssumptionFragment)?;
    if !parts.recurrences.is_empty() {
        return Err(SynthError::UnsupportedAssumption(
            "recurrence assumptions (G F) are not supported by the builtin backend; use an external backend".into(),
        ));
    }
    for p in &d.props {
        if !inputs.contains(p) && !outputs.contains(p) {
            return Err(SynthError::Alphabet(format!("`{p}` is neither an input nor an output")));
        }
    }
    let betas = parts.invariants;
    let mut relevant: BTreeSet<String> = d.props.iter().cloned().collect();
    for b in &betas {
        for p in b.props() {
            if !inputs.contains(&p) && !outputs.contains(&p) {
                return Err(SynthError::Alphabet(format!("assumption mentions undeclared `{p}`")));
            }
            relevant.insert(p);
        }
    }
    let rel_in: Vec<String> = inputs.iter().filter(|p| relevant.contains(*p)).cloned().collect();
    let rel_out: Vec<String> = outputs.iter().filter(|p| relevant.contains(*p)).cloned().collect();
    let (ni, no) = (rel_in.len(), rel_out.len());
    if ni + no > MAX_PROPS {
        return Err(SynthError::TooLarge(format!("{} relevant propositions", ni + no)));
    }
    let full_props: Vec<String> = rel_in.iter().chain(&rel_out).cloned().collect();
    let idx: HashMap<&str, usize> = full_props.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
    let n_in: Letter = 1 << ni;
    let n_out: Letter = 1 << no;
    let compose = |i: Letter, o: Letter| i | (o << ni);
    let proj: Vec<usize> = (0..n_in * n_out).map(|full| d.letter(&event_of(&full_props, full))).collect();

    let lookback = betas.iter().any(has_next);
    let beta_ok = |now: Letter, next: Letter| betas.iter().all(|b| eval_step(b, &idx, now, next));
    let breach = |prev: Option<Letter>, i: Letter| -> bool {
        if betas.is_empty() {
            return false;
        }
        match (lookback, prev) {
            (true, Some(p)) => (0..n_out).all(|o| !beta_ok(p, compose(i, o))),
            (true, None) => false,
            (false, _) => (0..n_out).all(|o| !beta_ok(compose(i, o), 0)),
        }
    };

    // explore positions
    let mut positions: Vec<Pos> = vec![(d.initial, None)];
    let mut index: HashMap<Pos, usize> = HashMap::from([(positions[0], 0)]);
    // moves[pos][i] = None on breach, else one outcome per output
    let mut moves: Vec<Vec<Option<Vec<Outcome>>>> = Vec::new();
    let mut k = 0;
    while k < positions.len() {
        let (q, prev) = positions[k];
        let mut row = Vec::with_capacity(n_in as usize);
        for i in 0..n_in {
            if breach(prev, i) {
                row.push(None);
                continue;
            }
            let mut outs = Vec::with_capacity(n_out as usize);
            for o in 0..n_out {
                let full = compose(i, o);
                let q2 = d.delta[q][proj[full as usize]];
                if d.accepting[q2] {
                    outs.push(Outcome::Accept);
                } else {
                    let pos = (q2, lookback.then_some(full));
                    let id = *index.entry(pos).or_insert_with(|| {
                        positions.push(pos);
                        positions.len() - 1
                    });
                    outs.push(Outcome::Next(id));
                }
            }
            row.push(Some(outs));
        }
        moves.push(row);
        k += 1;
    }

    // attractor, by rounds
    let mut rank: Vec<Option<usize>> = vec![None; positions.len()];
    let mut round = 0;
    loop {
        round += 1;
        let winning: Vec<usize> = (0..positions.len())
            .filter(|&p| rank[p].is_none())
            .filter(|&p| {
                moves[p].iter().all(|m| match m {
                    None => true,
                    Some(outs) => outs.iter().any(|o| match o {
                        Outcome::Accept => true,
                        Outcome::Next(s) => rank[*s].is_some(),
                    }),
                })
            })
            .collect();
        if winning.is_empty() {
            break;
        }
        for p in winning {
            rank[p] = Some(round);
        }
    }
    if rank[0].is_none() {
        return Ok(None);
    }

    // strategy extraction: states in discovery order, then the fixed sinks
    const ACCEPT: usize = usize::MAX;
    const BREACH: usize = usize::MAX - 1;
    let mut order = vec![0usize];
    let mut state_of: HashMap<usize, usize> = HashMap::from([(0, 0)]);
    let mut choice: Vec<Vec<(Letter, usize)>> = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let p = order[k];
        let mut row = Vec::with_capacity(n_in as usize);
        for m in &moves[p] {
            let pick = match m {
                None => (0, BREACH),
                Some(outs) => {
                    if let Some(o) = outs.iter().position(|o| matches!(o, Outcome::Accept)) {
                        (o as Letter, ACCEPT)
                    } else {
                        let (o, s) = outs
                            .iter()
                            .enumerate()
                            .filter_map(|(o, out)| match out {
                                Outcome::Next(s) => rank[*s].map(|r| (r, o, *s)),
                                Outcome::Accept => None,
                            })
                            .min()
                            .map(|(_, o, s)| (o, s))
                            .expect("winning position has a winning move");
                        if let std::collections::hash_map::Entry::Vacant(e) = state_of.entry(s) {
                            e.insert(order.len());
                            order.push(s);
                        }
                        (o as Letter, s)
                    }
                }
            };
            row.push(pick);
        }
        choice.push(row);
        k += 1;
    }

    let n = order.len();
    let mut names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut delta: Vec<Vec<Move>> = Vec::with_capacity(n + 3);
    let used = |target: usize| choice.iter().flatten().any(|&(_, t)| t == target);
    let (uses_accept, uses_breach) = (used(ACCEPT), used(BREACH));
    let mut next_id = n;
    let accept_id = uses_accept.then(|| {
        next_id += 2;
        next_id - 2
    });
    let breach_id = uses_breach.then(|| {
        next_id += 1;
        next_id - 1
    });
    let out_event = |o: Letter| event_of(&rel_out, o);
    for row in &choice {
        delta.push(
            row.iter()
                .map(|&(o, t)| {
                    let target = match t {
                        ACCEPT => accept_id.expect("accept state allocated"),
                        BREACH => breach_id.expect("breach state allocated"),
                        p => state_of[&p],
                    };
                    Move { output: out_event(o), target }
                })
                .collect(),
        );
    }
    let stay = |target: usize| vec![Move { output: Default::default(), target }; n_in as usize];
    let mut accepting = BTreeSet::new();
    if let Some(a) = accept_id {
        names.push("accept".into());
        names.push("done".into());
        delta.push(stay(a + 1));
        delta.push(stay(a + 1));
        accepting.insert(a);
    }
    if let Some(b) = breach_id {
        names.push("breach".into());
        delta.push(stay(b));
    }
    Ok(Some(MealyMachine {
        inputs: rel_in,
        outputs: outputs.iter().cloned().collect(),
        states: names,
        initial: 0,
        accepting,
        delta,
    }))
}
