//! Split disjunctions into exclusive cases and add a fresh signal output, so
//! that an external tool's controller can announce its witness.

use mttl::synth::disambiguate;
use mttl::syntax::parse_ltl;

fn main() {
    for s in ["F (a | b)", "(a | X b) & X (c | d | e)"] {
        let d = disambiguate(&parse_ltl(s).expect("parses"));
        println!("{s}\n  {} cases, signal `{}`\n  {}", d.cases, d.signal, d.body);
    }
}
