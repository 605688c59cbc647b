//! Cleaning robot: after a room was used for n steps and then left alone for
//! m steps, enter it with the door locked, wait until it is clean, leave.
//!
//! `cargo run --example room_cleaning -- 4 3`

use mttl::cases;
use mttl::compose::{compose, stats, verify_against_oracle, VerifyConfig};
use mttl::synth::synthesize_tight;

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<i64>().expect("integer argument"));
    let n = args.next().unwrap_or(2);
    let m = args.next().unwrap_or(2);
    let spec = cases::room_spec(n, m);
    println!("assumption: {}", spec.assumption);
    println!("body:       {}", spec.trigger.body);

    let machine = synthesize_tight(&spec.trigger.body, &spec.assumption, &spec.inputs, &spec.outputs)
        .expect("builtin backend")
        .expect("realisable under the assumption");
    println!("tight machine: {} states, accepting {:?}", machine.states.len(), machine.accepting);

    let sc = compose(&spec.trigger.monitor, &machine, spec.trigger.kind).expect("composes");
    println!("composed: {:?}", stats(&sc));
    for t in &sc.transitions {
        println!("  {} -> {} [{}] / {:?} {}", sc.location_name(&t.source), sc.location_name(&t.target), t.guard, t.outputs, t.action);
    }

    let report = verify_against_oracle(&spec, &sc, &VerifyConfig::default());
    println!("1000 random episodes: {report}");
}
