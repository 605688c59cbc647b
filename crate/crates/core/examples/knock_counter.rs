//! Door controller that opens after the n-th knock, greets and closes.
//!
//! `cargo run --example knock_counter -- 3`

use mttl::cases;
use mttl::compose::compose;
use mttl::synth::synthesize_tight;
use mttl::{event, Event};

fn main() {
    let n: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let spec = cases::knock_spec(n);
    assert!(spec.check().is_empty());

    let mut machine = synthesize_tight(&spec.trigger.body, &spec.assumption, &spec.inputs, &spec.outputs)
        .expect("body is co-safety")
        .expect("realisable");
    // simple trigger: the witness only has to happen once
    machine.accepting.clear();
    let sc = compose(&spec.trigger.monitor, &machine, spec.trigger.kind).expect("alphabets agree");

    let mut state = sc.initial_state();
    let knocks = [true, false, true, true, false, true, true, false, false];
    for (t, knock) in knocks.iter().enumerate() {
        let input = if *knock { event(&["knock"]) } else { Event::new() };
        let (next, out) = sc.step(&state, &input).expect("guards evaluate");
        println!("t={t} knock={knock:<5} out={out:?} now at {next}");
        state = next;
    }
}
