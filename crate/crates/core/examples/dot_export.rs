//! Graphviz renderings of a monitor, a tight machine and their composition.
//!
//! `cargo run --example dot_export > knock.dot`

use mttl::cases;
use mttl::compose::compose;
use mttl::dot::{controller_dot, mealy_dot, monitor_dot};
use mttl::synth::synthesize_tight;

fn main() {
    let spec = cases::room_spec(2, 2);
    let machine = synthesize_tight(&spec.trigger.body, &spec.assumption, &spec.inputs, &spec.outputs)
        .expect("builtin backend")
        .expect("realisable");
    let sc = compose(&spec.trigger.monitor, &machine, spec.trigger.kind).expect("composes");
    print!("{}", monitor_dot(&spec.trigger.monitor));
    print!("{}", mealy_dot(&machine));
    print!("{}", controller_dot(&sc));
}
