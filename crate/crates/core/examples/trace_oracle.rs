//! Evaluate lasso traces against a spec and show the segments the oracle used.
//!
//! `cargo run --example trace_oracle -- crates/core/specs/room.spec crates/core/specs/traces/room_unsat.json`

use std::collections::BTreeMap;
use std::fs;

use mttl::mttl::{oracle, DEFAULT_BOUND};
use mttl::syntax::{parse_spec, parse_trace};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (spec_path, trace_path) = match args.as_slice() {
        [s, t] => (s.clone(), t.clone()),
        _ => {
            let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/specs");
            (format!("{dir}/parity.spec"), format!("{dir}/traces/parity_unsat.json"))
        }
    };
    let doc = parse_spec(&fs::read_to_string(&spec_path).expect("readable spec")).unwrap_or_else(|e| panic!("{e}"));
    let spec = doc.to_spec(&BTreeMap::new()).expect("parameters bind");
    let props = spec.props();
    let trace = parse_trace(&fs::read_to_string(&trace_path).expect("readable trace"), Some(&props)).expect("trace");

    let r = oracle(&spec, &trace, DEFAULT_BOUND).expect("monitor runs");
    println!("{} on {} + ({})^w: {}", spec_path, trace.prefix.len(), trace.cycle.len(), r.verdict);
    if r.vacuous {
        println!("(the assumption fails on this trace)");
    }
    for s in &r.segments {
        println!("  start {} flag {:?} witness end {:?}", s.start, s.flag, s.witness_end);
    }
}
