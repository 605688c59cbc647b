//! Build the witness automaton of a co-safety formula and a tight controller
//! for it, printed in the interchange format.
//!
//! `cargo run --example tight_synthesis -- "a U (g & X h)" a g,h`

use std::collections::BTreeSet;

use mttl::synth::{aww_to_nfw, build_aww, nfw_to_dfw, solve_reachability};
use mttl::syntax::parse_ltl;
use mttl::Ltl;

fn props(s: &str) -> BTreeSet<String> {
    s.split(',').filter(|p| !p.is_empty()).map(str::to_string).collect()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let formula = args.first().map(String::as_str).unwrap_or("a U (g & X h)");
    let inputs = props(args.get(1).map(String::as_str).unwrap_or("a"));
    let outputs = props(args.get(2).map(String::as_str).unwrap_or("g,h"));

    let body = parse_ltl(formula).expect("formula parses");
    let aww = build_aww(&body).expect("co-safety formula");
    let nfw = aww_to_nfw(&aww);
    let dfw = nfw_to_dfw(&nfw);
    println!("alternating: {} states, nondeterministic: {}, deterministic: {}", aww.states.len(), nfw.states.len(), dfw.len());

    match solve_reachability(&dfw, &Ltl::True, &inputs, &outputs).expect("supported") {
        Some(m) => print!("{}", m.to_interchange()),
        None => println!("unrealisable"),
    }
}
