//! `p` on every even step: a property plain LTL over `p` cannot state,
//! written as a repeating trigger on the star monitor.

use mttl::cases;
use mttl::compose::compose;
use mttl::ltl::LassoTrace;
use mttl::mttl::{oracle, DEFAULT_BOUND};
use mttl::synth::synthesize_tight;
use mttl::{event, Event};

fn main() {
    let spec = cases::parity_spec(false);
    for (name, t) in [
        ("p every step", LassoTrace::new(vec![], vec![event(&["p"])])),
        ("p on even steps", LassoTrace::new(vec![], vec![event(&["p"]), Event::new()])),
        ("p on odd steps", LassoTrace::new(vec![], vec![Event::new(), event(&["p"])])),
    ] {
        let r = oracle(&spec, &t, DEFAULT_BOUND).expect("monitor runs");
        println!("{name:<16} {}", r.verdict);
    }

    let machine = synthesize_tight(&spec.trigger.body, &spec.assumption, &spec.inputs, &spec.outputs)
        .expect("co-safety body")
        .expect("realisable");
    let sc = compose(&spec.trigger.monitor, &machine, spec.trigger.kind).expect("composes");
    let word = sc.run(&vec![Event::new(); 8]).expect("runs");
    let shown: Vec<&str> = word.iter().map(|e| if e.contains("p") { "p" } else { "." }).collect();
    println!("controller: {}", shown.join(" "));
}
