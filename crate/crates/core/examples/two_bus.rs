//! Two request buses: once all lines of both buses were seen in order, raise
//! `acc` infinitely often. The controller is the one-state machine that
//! always raises `acc`; only the monitor grows with the bus widths.
//!
//! `cargo run --release --example two_bus -- 12 12`

use std::time::Instant;

use mttl::cases;
use mttl::compose::{compose, verify_against_oracle, VerifyConfig};
use mttl::synth::MealyMachine;

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(12);
    let m = args.next().unwrap_or(12);
    let spec = cases::two_bus_spec(n, m);
    let guard_size: usize = spec.trigger.monitor.transitions.iter().map(|t| t.guard.size()).sum();
    println!("monitor: {} states, guard size {guard_size}", spec.trigger.monitor.states.len());

    let start = Instant::now();
    let acc = MealyMachine::from_interchange(cases::ALWAYS_ACC).expect("bundled controller");
    let sc = compose(&spec.trigger.monitor, &acc, spec.trigger.kind).expect("composes");
    println!("composed in {:?}: {} transitions", start.elapsed(), sc.transitions.len());

    let report = verify_against_oracle(&spec, &sc, &VerifyConfig::default());
    println!("{report}");
}
