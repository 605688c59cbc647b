//! Bundled example specifications.
//!
//! Each case is kept as spec text (under `specs/`) so the same files work
//! with the command line tool. The two-bus family is generated.

use std::collections::BTreeMap;

use crate::monitor::Monitor;
use crate::mttl::MttlSpec;
use crate::syntax::parse_spec;

pub const KNOCK: &str = include_str!("../specs/knock.spec");
pub const AVERAGING: &str = include_str!("../specs/averaging.spec");
pub const ROOM: &str = include_str!("../specs/room.spec");
pub const PARITY: &str = include_str!("../specs/parity.spec");
pub const PARITY_ODD: &str = include_str!("../specs/parity_odd.spec");
pub const INCOMPLETE: &str = include_str!("../specs/incomplete.spec");
pub const TWO_BUS: &str = include_str!("../specs/two_bus.spec");
/// Interchange controller that raises `acc` on every step.
pub const ALWAYS_ACC: &str = include_str!("../specs/always_acc.json");

/// Parses bundled spec text with parameter overrides.
///
/// Panics on malformed text; bundled files are covered by tests.
pub fn load(text: &str, params: &[(&str, i64)]) -> MttlSpec {
    let overrides: BTreeMap<String, i64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    parse_spec(text).expect("bundled spec parses").to_spec(&overrides).expect("bundled spec binds")
}

pub fn knock_spec(n: i64) -> MttlSpec {
    load(KNOCK, &[("n", n)])
}

pub fn knock_monitor(n: i64) -> Monitor {
    knock_spec(n).trigger.monitor
}

pub fn averaging_spec(n: i64) -> MttlSpec {
    load(AVERAGING, &[("n", n)])
}

pub fn room_spec(n: i64, m: i64) -> MttlSpec {
    load(ROOM, &[("n", n), ("m", m)])
}

pub fn parity_spec(odd: bool) -> MttlSpec {
    load(if odd { PARITY_ODD } else { PARITY }, &[])
}

pub fn incomplete_spec() -> MttlSpec {
    load(INCOMPLETE, &[])
}

/// Length of the longest run `1..=k` of `prefix` propositions that are
/// either already counted (`k <= counter`) or present now, as an expression.
fn max_in_seq(prefix: &str, counter: &str, n: usize) -> String {
    let mut e = n.to_string();
    for j in (1..=n).rev() {
        e = format!("ite({j} <= {counter} || in({prefix}{j}), {e}, {})", j - 1);
    }
    e
}

/// Spec text for two buses of `n` and `m` request lines. The monitor flags
/// once every line of both buses has been seen, each bus in order; the body
/// then asks for `acc` infinitely often.
pub fn two_bus_spec_text(n: usize, m: usize) -> String {
    let ps: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
    let qs: Vec<String> = (1..=m).map(|i| format!("q{i}")).collect();
    let max_p = max_in_seq("p", "pCount", n);
    let max_q = max_in_seq("q", "qCount", m);
    let done = format!("{max_p} == {n} && {max_q} == {m}");
    let mut s = String::new();
    s.push_str(&format!("# Two request buses with {n} and {m} lines, generated.\n"));
    s.push_str(&format!("inputs: {};\n", ps.iter().chain(&qs).cloned().collect::<Vec<_>>().join(", ")));
    s.push_str("outputs: acc;\n");
    s.push_str("monitor {\n");
    s.push_str("  var pCount: int = 0;\n  var qCount: int = 0;\n");
    s.push_str("  states: q0, qF, sink;\n  initial q0;\n  flag qF;\n  sink sink;\n");
    s.push_str(&format!("  q0 -> q0 [!({done})] / {{ pCount := {max_p}; qCount := {max_q}; }};\n"));
    s.push_str(&format!("  q0 -> qF [{done}];\n"));
    s.push_str("}\ntrigger: once;\nbody: G F acc;\n");
    s
}

pub fn two_bus_spec(n: usize, m: usize) -> MttlSpec {
    load(&two_bus_spec_text(n, m), &[])
}

/// Every bundled spec with its file name.
pub fn all() -> Vec<(&'static str, &'static str)> {
    vec![
        ("knock.spec", KNOCK),
        ("averaging.spec", AVERAGING),
        ("room.spec", ROOM),
        ("parity.spec", PARITY),
        ("parity_odd.spec", PARITY_ODD),
        ("incomplete.spec", INCOMPLETE),
        ("two_bus.spec", TWO_BUS),
    ]
}
