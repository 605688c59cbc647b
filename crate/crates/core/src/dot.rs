//! Graphviz output. Node and edge order follows the source order, so the
//! text is stable across runs.

use std::fmt::Write;

use crate::compose::{Location, SymbolicController};
use crate::monitor::Monitor;
use crate::synth::MealyMachine;
use crate::Event;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn set(e: &Event) -> String {
    format!("{{{}}}", e.iter().cloned().collect::<Vec<_>>().join(","))
}

fn edge_label(guard: &str, action: &str, outputs: Option<&Event>) -> String {
    let mut l = guard.to_string();
    if let Some(o) = outputs {
        l.push_str(&format!(" / {}", set(o)));
    }
    if !action.is_empty() {
        l.push_str(&format!(" / {action}"));
    }
    l
}

pub fn monitor_dot(m: &Monitor) -> String {
    let mut s = String::from("digraph monitor {\n  rankdir=LR;\n  __start [shape=point];\n");
    for q in &m.states {
        let shape = if m.is_flagging(q) { "doublecircle" } else { "circle" };
        let style = if *q == m.sink { ", style=dashed" } else { "" };
        let _ = writeln!(s, "  {} [shape={shape}{style}];", quote(q));
    }
    let _ = writeln!(s, "  __start -> {};", quote(&m.initial));
    for t in &m.transitions {
        let label = edge_label(&t.guard.to_string(), &t.action.to_string(), None);
        let _ = writeln!(s, "  {} -> {} [label={}];", quote(&t.source), quote(&t.target), quote(&label));
    }
    s.push_str("}\n");
    s
}

pub fn mealy_dot(c: &MealyMachine) -> String {
    let mut s = String::from("digraph controller {\n  rankdir=LR;\n  __start [shape=point];\n");
    for (i, q) in c.states.iter().enumerate() {
        let shape = if c.accepting.contains(&i) { "doublecircle" } else { "circle" };
        let _ = writeln!(s, "  {} [shape={shape}];", quote(q));
    }
    let _ = writeln!(s, "  __start -> {};", quote(&c.states[c.initial]));
    for (i, row) in c.delta.iter().enumerate() {
        for (l, mv) in row.iter().enumerate() {
            let label = format!("{} / {}", set(&c.input_event(l)), set(&mv.output));
            let _ = writeln!(s, "  {} -> {} [label={}];", quote(&c.states[i]), quote(&c.states[mv.target]), quote(&label));
        }
    }
    s.push_str("}\n");
    s
}

pub fn controller_dot(sc: &SymbolicController) -> String {
    let node = |l: &Location| quote(&sc.location_name(l));
    let mut s = String::from("digraph composed {\n  rankdir=LR;\n  __start [shape=point];\n");
    for q in &sc.monitor_states {
        let style = if *q == sc.sink { ", style=dashed" } else { "" };
        let _ = writeln!(s, "  {} [shape=circle{style}];", quote(q));
    }
    for i in 0..sc.controller_states.len() {
        let _ = writeln!(s, "  {} [shape=box];", node(&Location::Controller(i)));
    }
    let _ = writeln!(s, "  __start -> {};", quote(&sc.initial));
    for t in &sc.transitions {
        let label = edge_label(&t.guard.to_string(), &t.action.to_string(), Some(&t.outputs));
        let _ = writeln!(s, "  {} -> {} [label={}];", node(&t.source), node(&t.target), quote(&label));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;

    #[test]
    fn monitor_graph() {
        let d = monitor_dot(&cases::knock_monitor(2));
        assert!(d.starts_with("digraph monitor {"));
        assert!(d.contains("\"qF\" [shape=doublecircle];"));
        assert!(d.contains("\"sink\" [shape=circle, style=dashed];"));
        assert!(d.contains("counter := counter + 1"));
        assert_eq!(d, monitor_dot(&cases::knock_monitor(2)));
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
