//! Command implementations behind the `mttl` binary.
//!
//! Exit codes: 0 success, 1 invalid input or backend failure, 2 the
//! backend found no controller, 3 I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::Command;

use clap::{Parser, Subcommand, ValueEnum};

use crate::compose::{compose, verify_against_oracle, SymbolicController, VerifyConfig};
use crate::dot::{controller_dot, mealy_dot, monitor_dot};
use crate::ltl::Fragment;
use crate::mttl::{oracle, MttlSpec, TriggerKind, DEFAULT_BOUND};
use crate::synth::{mark_tight, synthesize_tight, Dfw, MealyMachine};
use crate::syntax::{parse_spec, parse_trace};
use crate::Event;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNREALISABLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Printed when a backend finds no controller.
pub const UNREALISABLE_CAVEAT: &str = "note: reducing to t(π) is sound but not complete; \
a controller for the triggered specification may still exist";

#[derive(Debug, Parser)]
#[command(name = "mttl", version, about = "Flagging monitors as triggers for LTL: check, synthesize, evaluate, simulate")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Validate a spec file.
    Check {
        spec: PathBuf,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
    /// Synthesize and compose a controller.
    Synthesize {
        spec: PathBuf,
        /// `builtin`, or `external:<file>` / `external:<command>`.
        #[arg(long, default_value = "builtin")]
        backend: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
    /// Evaluate a lasso trace against a spec.
    EvalTrace {
        spec: PathBuf,
        trace: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
    /// Step a composed controller with inputs read line by line.
    Simulate { controller: PathBuf },
    /// Export a spec monitor, composed controller or interchange machine.
    Export {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
    /// Check a composed controller against a spec on random episodes.
    Verify {
        spec: PathBuf,
        controller: PathBuf,
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 40)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, i64)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Interchange,
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=INT, got `{s}`"))?;
    let v = v.trim().parse().map_err(|_| format!("`{v}` is not an integer"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Unrealisable(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Unrealisable(_) => EXIT_UNREALISABLE,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path, params: &[(String, i64)]) -> Res<MttlSpec> {
    let text = read(path)?;
    let doc = parse_spec(&text).map_err(|e| Failure::Invalid(format!("{}:{e}", path.display())))?;
    let overrides: BTreeMap<String, i64> = params.iter().cloned().collect();
    doc.to_spec(&overrides).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn valid_spec(path: &Path, params: &[(String, i64)]) -> Res<MttlSpec> {
    let spec = load_spec(path, params)?;
    let diags = spec.check();
    if diags.is_empty() {
        Ok(spec)
    } else {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", path.display())).collect();
        Err(Failure::Invalid(lines.join("\n")))
    }
}

/// Runs the tool; `args` includes the program name.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Check { spec, params } => cmd_check(&spec, &params, out),
        Cmd::Synthesize { spec, backend, out: file, dot, params } => {
            cmd_synthesize(&spec, &backend, file.as_deref(), dot.as_deref(), &params, out, err)
        }
        Cmd::EvalTrace { spec, trace, bound, params } => cmd_eval_trace(&spec, &trace, bound, &params, out),
        Cmd::Simulate { controller } => cmd_simulate(&controller, input, out, err),
        Cmd::Export { path, format, out: file, params } => cmd_export(&path, format, file.as_deref(), &params, out),
        Cmd::Verify { spec, controller, episodes, horizon, seed, params } => {
            let cfg = VerifyConfig { episodes, horizon, seed, ..VerifyConfig::default() };
            cmd_verify(&spec, &controller, &cfg, &params, out)
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let msg = match &f {
                Failure::Invalid(m) | Failure::Unrealisable(m) => m.clone(),
                Failure::Io(m) => format!("I/O error: {m}"),
            };
            let _ = writeln!(err, "error: {msg}");
            if matches!(f, Failure::Unrealisable(_)) {
                let _ = writeln!(err, "{UNREALISABLE_CAVEAT}");
            }
            f.code()
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Failure::Io(e.to_string())
}

fn cmd_check(path: &Path, params: &[(String, i64)], out: &mut dyn Write) -> Res<()> {
    let spec = valid_spec(path, params)?;
    let m = &spec.trigger.monitor;
    for d in m.lint(200, 0) {
        writeln!(out, "warning: {d}").map_err(io)?;
    }
    let body = match spec.trigger.body.classify() {
        Fragment::Cosafety => "co-safety",
        _ => "general",
    };
    writeln!(
        out,
        "ok: {} states, {} transitions, {} trigger, {body} body",
        m.states.len(),
        m.transition_count(),
        spec.trigger.kind
    )
    .map_err(io)
}

/// The backend's controller for `assumption -> body`, with accepting states
/// marking the first witness in repeating mode and none in simple mode.
pub fn backend_controller(spec: &MttlSpec, backend: &str) -> Result<Option<MealyMachine>, String> {
    let body = &spec.trigger.body;
    let repeating = spec.trigger.kind == TriggerKind::Repeating;
    let mut c = if backend == "builtin" {
        if body.classify() != Fragment::Cosafety {
            return Err("the builtin backend needs a co-safety body; use an external backend".into());
        }
        match synthesize_tight(body, &spec.assumption, &spec.inputs, &spec.outputs).map_err(|e| e.to_string())? {
            Some(c) => c,
            None => return Ok(None),
        }
    } else if let Some(target) = backend.strip_prefix("external:") {
        let text = if Path::new(target).is_file() {
            fs::read_to_string(target).map_err(|e| format!("{target}: {e}"))?
        } else {
            match run_external(target, spec)? {
                Some(t) => t,
                None => return Ok(None),
            }
        };
        let c = MealyMachine::from_interchange(&text).map_err(|e| e.to_string())?;
        if let Some(p) = c.outputs.iter().find(|p| !spec.outputs.contains(*p)) {
            return Err(format!("controller output `{p}` is not a declared output"));
        }
        if repeating {
            let d = Dfw::from_body(body).map_err(|e| e.to_string())?;
            mark_tight(&c, &d).map_err(|e| e.to_string())?
        } else {
            c
        }
    } else {
        return Err(format!("unknown backend `{backend}`"));
    };
    if !repeating {
        c.accepting.clear();
    }
    Ok(Some(c))
}

/// Runs `<command> <formula> <inputs> <outputs>` and returns its standard
/// output, or `None` if it answers `unrealizable`.
fn run_external(command: &str, spec: &MttlSpec) -> Result<Option<String>, String> {
    let mut words = command.split_whitespace();
    let program = words.next().ok_or("empty external command")?;
    let csv = |s: &std::collections::BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(",");
    let output = Command::new(program)
        .args(words)
        .arg(spec.t_of().to_string())
        .arg(csv(&spec.inputs))
        .arg(csv(&spec.outputs))
        .output()
        .map_err(|e| format!("cannot run `{program}`: {e}"))?;
    let stdout = String::from_utf8_lossy(&output.stdout).to_string();
    let first = stdout.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim().to_ascii_lowercase();
    if first == "unrealizable" || first == "unrealisable" {
        return Ok(None);
    }
    if !output.status.success() {
        return Err(format!("`{program}` failed with {}", output.status));
    }
    Ok(Some(stdout))
}

fn cmd_synthesize(
    path: &Path,
    backend: &str,
    file: Option<&Path>,
    dot: Option<&Path>,
    params: &[(String, i64)],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Res<()> {
    let spec = valid_spec(path, params)?;
    let c = backend_controller(&spec, backend)
        .map_err(|e| Failure::Invalid(format!("backend failure: {e}")))?
        .ok_or_else(|| Failure::Unrealisable(format!("t(π) unrealisable: no controller for {}", spec.t_of())))?;
    let sc = compose(&spec.trigger.monitor, &c, spec.trigger.kind).map_err(|e| Failure::Invalid(e.to_string()))?;
    let json = sc.to_json();
    match file {
        Some(f) => write_file(f, &json)?,
        None => out.write_all(json.as_bytes()).map_err(io)?,
    }
    if let Some(d) = dot {
        write_file(d, &controller_dot(&sc))?;
    }
    writeln!(
        err,
        "composed controller: {} monitor states, {} controller states, {} transitions",
        sc.monitor_states.len(),
        sc.controller_states.len(),
        sc.transitions.len()
    )
    .map_err(io)
}

fn cmd_eval_trace(path: &Path, trace: &Path, bound: usize, params: &[(String, i64)], out: &mut dyn Write) -> Res<()> {
    let spec = valid_spec(path, params)?;
    let props = spec.props();
    let t = parse_trace(&read(trace)?, Some(&props)).map_err(|e| Failure::Invalid(format!("{}: {e}", trace.display())))?;
    let r = oracle(&spec, &t, bound).map_err(|e| Failure::Invalid(e.to_string()))?;
    writeln!(out, "{}", r.verdict).map_err(io)?;
    if r.vacuous {
        writeln!(out, "assumption violated: verdict is vacuous").map_err(io)?;
    }
    for s in &r.segments {
        let flag = s.flag.map_or("none".to_string(), |j| j.to_string());
        let mut line = format!("segment from {}: flag at {flag}", s.start);
        if let Some(k) = s.witness_end {
            line.push_str(&format!(", witness {}..={k}", s.flag.unwrap_or(s.start)));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

fn load_controller(path: &Path) -> Res<SymbolicController> {
    SymbolicController::from_json(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn fmt_event(e: &Event) -> String {
    format!("{{{}}}", e.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn cmd_simulate(path: &Path, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Res<()> {
    let sc = load_controller(path)?;
    let mut s = sc.initial_state();
    writeln!(out, "start: {s}").map_err(io)?;
    let mut step = 0;
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            break;
        }
        let text = line.trim();
        if text == "quit" {
            break;
        }
        let props: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        if let Some(p) = props.iter().find(|p| !sc.inputs.contains(**p)) {
            writeln!(err, "unknown input proposition `{p}`; step ignored").map_err(io)?;
            continue;
        }
        let e: Event = props.iter().map(|p| p.to_string()).collect();
        let fired = sc.enabled(&s, &e).map_err(|e| Failure::Invalid(e.to_string()))?;
        let (next, outputs) = sc.step(&s, &e).map_err(|e| Failure::Invalid(e.to_string()))?;
        if let Some(i) = fired {
            let (flag, reset) = sc.transition_events(i);
            if flag {
                writeln!(out, "flag").map_err(io)?;
            }
            if reset {
                writeln!(out, "reset").map_err(io)?;
            }
        }
        writeln!(out, "step {step}: in {} out {} -> {next}", fmt_event(&e), fmt_event(&outputs)).map_err(io)?;
        s = next;
        step += 1;
    }
    Ok(())
}

fn cmd_export(path: &Path, format: Format, file: Option<&Path>, params: &[(String, i64)], out: &mut dyn Write) -> Res<()> {
    let text = read(path)?;
    let trimmed = text.trim_start();
    let result = if trimmed.starts_with('{') {
        if let Ok(sc) = SymbolicController::from_json(&text) {
            match format {
                Format::Dot => controller_dot(&sc),
                Format::Interchange => sc.to_json(),
            }
        } else {
            let c = MealyMachine::from_interchange(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            match format {
                Format::Dot => mealy_dot(&c),
                Format::Interchange => c.to_interchange(),
            }
        }
    } else {
        let spec = load_spec(path, params)?;
        match format {
            Format::Dot => monitor_dot(&spec.trigger.monitor),
            Format::Interchange => return Err(Failure::Invalid("a spec file has no interchange form".into())),
        }
    };
    match file {
        Some(f) => write_file(f, &result),
        None => out.write_all(result.as_bytes()).map_err(io),
    }
}

fn cmd_verify(spec: &Path, controller: &Path, cfg: &VerifyConfig, params: &[(String, i64)], out: &mut dyn Write) -> Res<()> {
    let spec = valid_spec(spec, params)?;
    let sc = load_controller(controller)?;
    let r = verify_against_oracle(&spec, &sc, cfg);
    writeln!(out, "{r}").map_err(io)?;
    for e in &r.errors {
        writeln!(out, "error: {e}").map_err(io)?;
    }
    if let Some(t) = &r.counterexample {
        writeln!(out, "counterexample: {}", crate::syntax::trace_to_json(t).trim_end()).map_err(io)?;
    }
    if r.unsat > 0 || !r.errors.is_empty() {
        return Err(Failure::Invalid(format!("{} of {} episodes violate the spec", r.unsat, cfg.episodes)));
    }
    Ok(())
}
