use std::collections::BTreeSet;

use mttl::cases;
use mttl::compose::{compose, verify_against_oracle, Location, VerifyConfig};
use mttl::ltl::LassoTrace;
use mttl::mttl::{oracle, DEFAULT_BOUND};
use mttl::monitor::{star_monitor, FlagResult};
use mttl::synth::{disambiguate, mark_tight, synthesize_tight, Dfw, MealyMachine};
use mttl::syntax::{parse_ltl, parse_spec};
use mttl::{event, Event, MttlSpec, Trigger, TriggerKind, Verdict};

fn builtin(spec: &MttlSpec) -> MealyMachine {
    let mut c = synthesize_tight(&spec.trigger.body, &spec.assumption, &spec.inputs, &spec.outputs).unwrap().unwrap();
    if spec.trigger.kind == TriggerKind::Simple {
        c.accepting.clear();
    }
    c
}

#[test]
fn bundled_specs_round_trip() {
    for (name, text) in cases::all() {
        let doc = parse_spec(text).unwrap();
        assert_eq!(parse_spec(&doc.to_string()).unwrap(), doc, "{name}");
    }
}

#[test]
fn knock_hand_simulation() {
    let spec = cases::knock_spec(3);
    let sc = compose(&spec.trigger.monitor, &builtin(&spec), TriggerKind::Simple).unwrap();
    let k = event(&["knock"]);
    let ins = vec![k.clone(), Event::new(), k.clone(), k.clone(), Event::new(), Event::new(), k.clone(), k];
    let letters = sc.run(&ins).unwrap();
    let outs: Vec<Event> = letters.iter().zip(&ins).map(|(l, i)| l.difference(i).cloned().collect()).collect();
    let want = [
        Event::new(),
        Event::new(),
        Event::new(),
        event(&["open"]),
        event(&["greet"]),
        event(&["close"]),
        Event::new(),
        Event::new(),
    ];
    assert_eq!(outs, want);
}

#[test]
fn averaging_alarm() {
    let spec = cases::averaging_spec(50);
    let sc = compose(&spec.trigger.monitor, &builtin(&spec), TriggerKind::Simple).unwrap();
    // share of e: 1/1, 2/2, 2/3, 2/4 -> flags on the fourth event
    let ins = vec![event(&["e"]), Event::new(), Event::new(), Event::new()];
    let letters = sc.run(&ins).unwrap();
    assert!(letters[..3].iter().all(|l| !l.contains("alarm")));
    assert!(letters[3].contains("alarm"));
    // the counters grow without bound, so random episodes may not close into lassos
    let cfg = VerifyConfig { episodes: 200, horizon: 30, ..VerifyConfig::default() };
    let r = verify_against_oracle(&spec, &sc, &cfg);
    assert_eq!(r.unsat, 0, "{r}");
    assert!(r.sat > 0);
}

#[test]
fn room_parameters_do_not_change_shape() {
    let base = cases::room_spec(2, 2).trigger.monitor;
    for (n, m) in [(3, 7), (10, 1), (100, 100)] {
        let mon = cases::room_spec(n, m).trigger.monitor;
        assert_eq!((mon.states.len(), mon.transitions.len()), (base.states.len(), base.transitions.len()));
        let steps = (n + 1 + m + 1) as usize;
        let mut t: Vec<Event> = vec![event(&["inUse"]); n as usize + 1];
        t.extend(vec![Event::new(); m as usize + 1]);
        assert_eq!(mon.run(&t).unwrap(), FlagResult::Flagged(steps - 1));
    }
}

#[test]
fn room_controller_shape() {
    let spec = cases::room_spec(2, 2);
    let sc = compose(&spec.trigger.monitor, &builtin(&spec), TriggerKind::Repeating).unwrap();
    let back: Vec<_> = sc
        .transitions
        .iter()
        .filter(|t| matches!(t.source, Location::Controller(_)) && t.target == Location::Monitor("q0".into()))
        .collect();
    assert!(!back.is_empty());
    assert!(back.iter().all(|t| t.action.assignments.iter().any(|(v, _)| v == "inUseFor")));
    // the locked-room visit is announced on the flagging step
    assert!(sc.transitions.iter().any(|t| matches!(t.source, Location::Monitor(_))
        && t.outputs == event(&["inRoom", "doorLocked"])));
}

#[test]
fn room_mutant_counterexample_replays() {
    let spec = cases::room_spec(2, 2);
    let mut c = builtin(&spec);
    let (s, l) = (0..c.states.len())
        .flat_map(|s| (0..c.letters()).map(move |l| (s, l)))
        .find(|&(s, l)| !c.delta[s][l].output.is_empty())
        .unwrap();
    c.delta[s][l].output.clear();
    let sc = compose(&spec.trigger.monitor, &c, TriggerKind::Repeating).unwrap();
    let r = verify_against_oracle(&spec, &sc, &VerifyConfig { episodes: 1000, seed: 3, ..VerifyConfig::default() });
    let cex = r.counterexample.expect("mutant caught");
    assert_eq!(oracle(&spec, &cex, DEFAULT_BOUND).unwrap().verdict, Verdict::Unsat);
}

#[test]
fn parity_needs_the_repeating_trigger() {
    // a plain LTL spec cannot say "p on even steps"; the trigger can
    let spec = cases::parity_spec(false);
    let even = LassoTrace::new(vec![], vec![event(&["p"]), Event::new()]);
    let odd = LassoTrace::new(vec![], vec![Event::new(), event(&["p"])]);
    assert_eq!(oracle(&spec, &even, DEFAULT_BOUND).unwrap().verdict, Verdict::Sat);
    assert_eq!(oracle(&spec, &odd, DEFAULT_BOUND).unwrap().verdict, Verdict::Unsat);
    let spec = cases::parity_spec(true);
    assert_eq!(oracle(&spec, &odd, DEFAULT_BOUND).unwrap().verdict, Verdict::Sat);
    let c = builtin(&spec);
    let sc = compose(&spec.trigger.monitor, &c, TriggerKind::Repeating).unwrap();
    let word = sc.run(&vec![Event::new(); 6]).unwrap();
    let ps: Vec<bool> = word.iter().map(|e| e.contains("p")).collect();
    assert_eq!(ps, [false, true, false, true, false, true]);
}

#[test]
fn external_controller_marked_tight() {
    // a repeating trigger over an external machine: acc on every step
    let c = MealyMachine::from_interchange(cases::ALWAYS_ACC).unwrap();
    let body = parse_ltl("X acc").unwrap();
    let tight = mark_tight(&c, &Dfw::from_body(&body).unwrap()).unwrap();
    assert_eq!(tight.accepting.len(), 1);
    let spec = MttlSpec {
        inputs: BTreeSet::new(),
        outputs: ["acc".to_string()].into(),
        assumption: mttl::Ltl::True,
        trigger: Trigger { kind: TriggerKind::Repeating, monitor: star_monitor(&BTreeSet::new()), body },
    };
    let sc = compose(&spec.trigger.monitor, &tight, TriggerKind::Repeating).unwrap();
    let r = verify_against_oracle(&spec, &sc, &VerifyConfig { episodes: 20, ..VerifyConfig::default() });
    assert_eq!((r.sat, r.unsat, r.unknown), (20, 0, 0));
}

#[test]
fn disambiguation_adds_signal() {
    let d = disambiguate(&parse_ltl("F a | X b").unwrap());
    assert_eq!(d.cases, 3);
    assert!(d.body.props().contains(&d.signal));
}

#[test]
fn two_bus_guard_grows_linearly() {
    let sizes: Vec<usize> = [1usize, 2, 3, 4]
        .iter()
        .map(|&n| cases::two_bus_spec(n, n).trigger.monitor.transitions.iter().map(|t| t.guard.size()).sum())
        .collect();
    let steps: Vec<usize> = sizes.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(steps.windows(2).all(|w| w[0] == w[1]), "{sizes:?}");
}
