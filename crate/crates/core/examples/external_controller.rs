//! Plug in a controller produced elsewhere: load it from the interchange
//! format, mark where it first satisfies the body, compose and verify.

use std::collections::BTreeSet;

use mttl::cases;
use mttl::compose::{compose, verify_against_oracle, VerifyConfig};
use mttl::monitor::star_monitor;
use mttl::synth::{mark_tight, Dfw, MealyMachine};
use mttl::syntax::parse_ltl;
use mttl::{Ltl, MttlSpec, Trigger, TriggerKind};

fn main() {
    let machine = MealyMachine::from_interchange(cases::ALWAYS_ACC).expect("valid interchange");
    // "acc now and on the next step", repeated forever
    let body = parse_ltl("acc & X acc").expect("parses");
    let tight = mark_tight(&machine, &Dfw::from_body(&body).expect("co-safety")).expect("alphabets agree");
    println!("tight product: {:?} accepting {:?}", tight.states, tight.accepting);

    let spec = MttlSpec {
        inputs: BTreeSet::new(),
        outputs: ["acc".to_string()].into(),
        assumption: Ltl::True,
        trigger: Trigger { kind: TriggerKind::Repeating, monitor: star_monitor(&BTreeSet::new()), body },
    };
    let sc = compose(&spec.trigger.monitor, &tight, spec.trigger.kind).expect("composes");
    let report = verify_against_oracle(&spec, &sc, &VerifyConfig { episodes: 100, ..VerifyConfig::default() });
    println!("{report}");
    print!("{}", sc.to_json());
}
