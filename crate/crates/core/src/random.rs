//! Seeded random generators for formulas, traces and monitors, used by the
//! property suites and the verification harness.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::{Action, BinOp, Expr, VarDecl};
use crate::ltl::{LassoTrace, Ltl};
use crate::monitor::{Monitor, Transition};
use crate::Event;

#[derive(Debug, Clone)]
pub struct FormulaConfig {
    pub props: Vec<String>,
    pub depth: usize,
    /// Restrict to `tt ff p !p & | X U F` (always co-safety).
    pub cosafety: bool,
}

impl FormulaConfig {
    pub fn general(props: &[&str], depth: usize) -> Self {
        FormulaConfig { props: props.iter().map(|s| s.to_string()).collect(), depth, cosafety: false }
    }

    pub fn cosafety(props: &[&str], depth: usize) -> Self {
        FormulaConfig { props: props.iter().map(|s| s.to_string()).collect(), depth, cosafety: true }
    }
}

/// A random formula whose operator nesting depth is at most `cfg.depth`.
pub fn random_formula(rng: &mut impl Rng, cfg: &FormulaConfig) -> Ltl {
    gen_formula(rng, cfg, cfg.depth)
}

fn gen_leaf(rng: &mut impl Rng, cfg: &FormulaConfig) -> Ltl {
    let p = cfg.props.choose(rng).cloned().unwrap_or_else(|| "p".into());
    match rng.gen_range(0..10) {
        0 => Ltl::True,
        1 => Ltl::False,
        2 | 3 => Ltl::not(Ltl::Atom(p)),
        _ => Ltl::Atom(p),
    }
}

fn gen_formula(rng: &mut impl Rng, cfg: &FormulaConfig, depth: usize) -> Ltl {
    if depth == 0 || rng.gen_bool(0.25) {
        return gen_leaf(rng, cfg);
    }
    let d = depth - 1;
    if cfg.cosafety {
        match rng.gen_range(0..5) {
            0 => Ltl::and(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            1 => Ltl::or(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            2 => Ltl::next(gen_formula(rng, cfg, d)),
            3 => Ltl::until(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            _ => Ltl::finally(gen_formula(rng, cfg, d)),
        }
    } else {
        match rng.gen_range(0..11) {
            0 => Ltl::not(gen_formula(rng, cfg, d)),
            1 => Ltl::and(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            2 => Ltl::or(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            3 => Ltl::implies(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            4 => Ltl::iff(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            5 => Ltl::next(gen_formula(rng, cfg, d)),
            6 => Ltl::until(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            7 => Ltl::weak_until(gen_formula(rng, cfg, d), gen_formula(rng, cfg, d)),
            8 => Ltl::globally(gen_formula(rng, cfg, d)),
            9 => Ltl::finally(gen_formula(rng, cfg, d)),
            _ => gen_leaf(rng, cfg),
        }
    }
}

pub fn random_event(rng: &mut impl Rng, props: &[&str]) -> Event {
    props.iter().filter(|_| rng.gen_bool(0.5)).map(|p| p.to_string()).collect()
}

/// A lasso with `0..=max_prefix` prefix events and `1..=max_loop` loop events.
pub fn random_lasso(rng: &mut impl Rng, props: &[&str], max_prefix: usize, max_loop: usize) -> LassoTrace {
    let np = rng.gen_range(0..=max_prefix);
    let nl = rng.gen_range(1..=max_loop.max(1));
    LassoTrace::new(
        (0..np).map(|_| random_event(rng, props)).collect(),
        (0..nl).map(|_| random_event(rng, props)).collect(),
    )
}

/// A random well-formed monitor: up to `max_states` states (sink included),
/// up to `max_vars` integer variables, guards built from membership atoms,
/// comparisons and boolean connectives.
pub fn random_monitor(rng: &mut impl Rng, inputs: &[&str], max_states: usize, max_vars: usize) -> Monitor {
    let n_states = rng.gen_range(2..=max_states.max(2));
    let mut states: Vec<String> = (0..n_states - 1).map(|i| format!("q{i}")).collect();
    states.push("sink".into());
    let flagging: std::collections::BTreeSet<String> =
        states[1..n_states - 1].iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
    let vars: Vec<VarDecl> =
        (0..rng.gen_range(0..=max_vars)).map(|i| VarDecl::int(format!("v{i}"), rng.gen_range(-1..=2))).collect();
    let sources: Vec<String> = states.iter().filter(|s| *s != "sink" && !flagging.contains(*s)).cloned().collect();
    let n_trans = rng.gen_range(1..=6);
    let transitions = (0..n_trans)
        .map(|_| {
            let source = sources.choose(rng).unwrap().clone();
            let target = states.choose(rng).unwrap().clone();
            Transition {
                source,
                guard: random_guard(rng, inputs, &vars, 2),
                action: random_action(rng, &vars),
                target,
            }
        })
        .collect();
    Monitor {
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        vars,
        states,
        initial: "q0".into(),
        flagging,
        sink: "sink".into(),
        transitions,
    }
}

fn random_int_term(rng: &mut impl Rng, vars: &[VarDecl]) -> Expr {
    if vars.is_empty() || rng.gen_bool(0.3) {
        return Expr::Int(rng.gen_range(-1..=4));
    }
    let v = Expr::var(vars.choose(rng).unwrap().name.clone());
    if rng.gen_bool(0.3) {
        Expr::binary(BinOp::Add, v, Expr::var(vars.choose(rng).unwrap().name.clone()))
    } else {
        v
    }
}

fn random_guard(rng: &mut impl Rng, inputs: &[&str], vars: &[VarDecl], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..6) {
            0 => Expr::Bool(rng.gen_bool(0.7)),
            1 | 2 if !vars.is_empty() => {
                let op = *[BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne, BinOp::Gt, BinOp::Ge].choose(rng).unwrap();
                Expr::binary(op, random_int_term(rng, vars), random_int_term(rng, vars))
            }
            _ => match inputs.choose(rng) {
                Some(p) => Expr::is_in(*p),
                None => Expr::Bool(true),
            },
        };
    }
    match rng.gen_range(0..3) {
        0 => Expr::not(random_guard(rng, inputs, vars, depth - 1)),
        1 => Expr::binary(BinOp::And, random_guard(rng, inputs, vars, depth - 1), random_guard(rng, inputs, vars, depth - 1)),
        _ => Expr::binary(BinOp::Or, random_guard(rng, inputs, vars, depth - 1), random_guard(rng, inputs, vars, depth - 1)),
    }
}

fn random_action(rng: &mut impl Rng, vars: &[VarDecl]) -> Action {
    let mut assignments = Vec::new();
    for v in vars {
        if rng.gen_bool(0.5) {
            let rhs = match rng.gen_range(0..4) {
                0 => Expr::binary(BinOp::Add, Expr::var(v.name.clone()), Expr::Int(1)),
                1 => Expr::Int(0),
                2 => Expr::binary(BinOp::Sub, Expr::var(v.name.clone()), Expr::Int(1)),
                _ => random_int_term(rng, vars),
            };
            assignments.push((v.name.clone(), rhs));
        }
    }
    Action::new(assignments)
}
