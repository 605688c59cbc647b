use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_mttl");

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn spec(name: &str) -> String {
    specs().join(name).to_string_lossy().into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn mttl(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn mttl_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_accepts_bundled_specs() {
    for name in ["knock.spec", "averaging.spec", "room.spec", "parity.spec", "parity_odd.spec", "incomplete.spec", "two_bus.spec"] {
        let o = mttl(&["check", &spec(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stdout(&o).starts_with("ok:"));
    }
}

#[test]
fn check_reports_fragment_errors() {
    let f = scratch("g_body.spec");
    fs::write(&f, "inputs: a;\noutputs: b;\nmonitor star;\ntrigger: repeat;\nbody: G b;\n").unwrap();
    let o = mttl(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("body not co-safety"));

    let f = scratch("bad_assume.spec");
    fs::write(&f, "inputs: a;\noutputs: b;\nassume: G F (a & X b);\nmonitor star;\ntrigger: once;\nbody: b;\n").unwrap();
    let o = mttl(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("assumption outside γ fragment"));
}

#[test]
fn parse_errors_carry_positions() {
    let f = scratch("broken.spec");
    fs::write(&f, "inputs: a;\noutputs: b\nbody: b;\n").unwrap();
    let o = mttl(&["check", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":3:1"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_io_error() {
    let o = mttl(&["check", "/nonexistent/x.spec"]);
    assert_eq!(o.status.code(), Some(3));
    let o = mttl(&["synthesize", &spec("room.spec"), "--out", "/nonexistent/dir/out.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn params_override_defaults() {
    let o = mttl(&["check", &spec("knock.spec"), "--param", "n=5"]);
    assert_eq!(o.status.code(), Some(0));
    let o = mttl(&["check", &spec("knock.spec"), "--param", "k=5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn synthesize_room_has_loop_back() {
    let out = scratch("room.json");
    let dot = scratch("room.dot");
    let o = mttl(&["synthesize", &spec("room.spec"), "--out", out.to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let back = json["transitions"].as_array().unwrap().iter().any(|t| {
        t["from"].get("controller").is_some() && t["to"] == serde_json::json!({"monitor": "q0"}) && t["action"] != ""
    });
    assert!(back, "no accepting loop back to the initial monitor state");
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph composed {"));

    // byte-identical on rerun
    let again = scratch("room2.json");
    mttl(&["synthesize", &spec("room.spec"), "--out", again.to_str().unwrap()]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());

    let o = mttl(&["verify", &spec("room.spec"), out.to_str().unwrap(), "--episodes", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("unsat 0"));
}

#[test]
fn unrealisable_exits_2_without_file() {
    let out = scratch("never.json");
    let _ = fs::remove_file(&out);
    let f = scratch("env_atom.spec");
    fs::write(&f, "inputs: a;\noutputs: b;\nmonitor star;\ntrigger: once;\nbody: a;\n").unwrap();
    let o = mttl(&["synthesize", f.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("t(π) unrealisable"));
    assert!(stderr(&o).contains("sound but not complete"));
    assert!(!out.exists());

    let o = mttl(&["synthesize", &spec("incomplete.spec")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
}

#[test]
fn two_bus_with_external_file() {
    let out = scratch("two_bus.json");
    let backend = format!("external:{}", spec("always_acc.json"));
    let o = mttl(&["synthesize", &spec("two_bus.spec"), "--backend", &backend, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = mttl(&["verify", &spec("two_bus.spec"), out.to_str().unwrap(), "--episodes", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn builtin_rejects_general_body() {
    let o = mttl(&["synthesize", &spec("two_bus.spec")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("co-safety"));
}

#[cfg(unix)]
#[test]
fn external_command_backend() {
    use std::os::unix::fs::PermissionsExt;
    let script = scratch("backend.sh");
    let args_log = scratch("backend.args");
    fs::write(
        &script,
        format!(
            "#!/bin/sh\nprintf '%s\\n' \"$@\" > {}\ncat {}\n",
            args_log.display(),
            spec("always_acc.json")
        ),
    )
    .unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let o = mttl(&["synthesize", &spec("two_bus.spec"), "--backend", &format!("external:{}", script.display())]);
    // a path to an executable file is read as a controller file, not run
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let o = mttl(&["synthesize", &spec("two_bus.spec"), "--backend", &format!("external:sh {}", script.display())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let args = fs::read_to_string(&args_log).unwrap();
    let lines: Vec<&str> = args.lines().collect();
    assert_eq!(lines[0], "tt -> G F acc");
    assert!(lines[1].starts_with("p1,p10,p11,p12,p2"));
    assert_eq!(lines[2], "acc");

    let refuse = scratch("refuse.sh");
    fs::write(&refuse, "#!/bin/sh\necho UNREALIZABLE\n").unwrap();
    let o = mttl(&["synthesize", &spec("knock.spec"), "--backend", &format!("external:sh {}", refuse.display())]);
    assert_eq!(o.status.code(), Some(2));

    let o = mttl(&["synthesize", &spec("knock.spec"), "--backend", "external:/nonexistent-tool"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eval_trace_verdicts() {
    let o = mttl(&["eval-trace", &spec("parity.spec"), &spec("traces/parity_sat.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("sat"));
    let o = mttl(&["eval-trace", &spec("parity.spec"), &spec("traces/parity_unsat.json")]);
    assert!(stdout(&o).starts_with("unsat"), "{}", stdout(&o));
    let o = mttl(&["eval-trace", &spec("room.spec"), &spec("traces/room_unsat.json")]);
    assert!(stdout(&o).starts_with("unsat"));
    assert!(stdout(&o).contains("flag at 5"));
    let o = mttl(&["eval-trace", &spec("knock.spec"), &spec("traces/knock_sat.json")]);
    assert!(stdout(&o).starts_with("sat"));
    // the odd-position variant rejects the even trace
    let o = mttl(&["eval-trace", &spec("parity_odd.spec"), &spec("traces/parity_sat.json")]);
    assert!(stdout(&o).starts_with("unsat"));
}

#[test]
fn eval_trace_rejects_unknown_props() {
    let f = scratch("bad_trace.json");
    fs::write(&f, r#"{"prefix": [], "loop": [["zzz"]]}"#).unwrap();
    let o = mttl(&["eval-trace", &spec("parity.spec"), f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zzz"));
}

fn knock_controller() -> PathBuf {
    let out = scratch("knock.json");
    let o = mttl(&["synthesize", &spec("knock.spec"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn simulate_knock() {
    let c = knock_controller();
    let o = mttl_stdin(&["simulate", c.to_str().unwrap()], "knock\n\nknock\n\nknock\nbogus\nquit\nknock\n");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let steps: Vec<&str> = out.lines().filter(|l| l.starts_with("step")).collect();
    assert_eq!(steps.len(), 5);
    assert!(steps[0].contains("out {} -> monitor q0"));
    assert!(steps[1].contains("out {} -> monitor q0"), "empty line stutters: {}", steps[1]);
    assert!(steps[2].contains("out {open} -> controller"));
    assert!(steps[3].contains("out {greet}"));
    assert!(steps[4].contains("out {close}"));
    assert_eq!(out.lines().filter(|l| *l == "flag").count(), 1);
    assert!(stderr(&o).contains("unknown input proposition `bogus`"));
}

#[test]
fn simulate_repeating_resets() {
    let out = scratch("parity.json");
    assert_eq!(mttl(&["synthesize", &spec("parity.spec"), "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let o = mttl_stdin(&["simulate", out.to_str().unwrap()], "\n\n\n\n");
    let text = stdout(&o);
    let start = text.lines().next().unwrap().trim_start_matches("start: ").to_string();
    let steps: Vec<&str> = text.lines().filter(|l| l.starts_with("step")).collect();
    assert!(steps[0].contains("out {p}"));
    assert!(steps[1].ends_with(&format!("-> {start}")));
    assert!(steps[2].contains("out {p}"));
    assert_eq!(text.lines().filter(|l| *l == "reset").count(), 2);
}

#[test]
fn export_formats() {
    let o = mttl(&["export", &spec("knock.spec")]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    assert!(dot.contains("counter := counter + 1"));
    assert!(dot.contains("\"qF\" [shape=doublecircle]"));

    let o = mttl(&["export", &spec("parity.spec"), "--format", "dot"]);
    let dot = stdout(&o);
    assert_eq!(dot.lines().filter(|l| l.contains("[shape=")).count() - 1, 3);
    assert_eq!(dot.lines().filter(|l| l.contains("label=")).count(), 1);

    let o = mttl(&["export", &spec("always_acc.json"), "--format", "interchange"]);
    let once = stdout(&o);
    let f = scratch("acc_export.json");
    fs::write(&f, &once).unwrap();
    let twice = stdout(&mttl(&["export", f.to_str().unwrap(), "--format", "interchange"]));
    assert_eq!(once, twice);

    let c = knock_controller();
    let o = mttl(&["export", c.to_str().unwrap(), "--format", "interchange"]);
    assert_eq!(stdout(&o), fs::read_to_string(&c).unwrap());
    assert_eq!(mttl(&["export", &spec("knock.spec"), "--format", "interchange"]).status.code(), Some(1));
}

#[test]
fn verify_catches_mutant() {
    let out = scratch("parity_mut.json");
    mttl(&["synthesize", &spec("parity.spec"), "--out", out.to_str().unwrap()]);
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for t in json["transitions"].as_array_mut().unwrap() {
        t["outputs"] = serde_json::json!([]);
    }
    fs::write(&out, serde_json::to_string(&json).unwrap()).unwrap();
    let o = mttl(&["verify", &spec("parity.spec"), out.to_str().unwrap(), "--episodes", "20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample"));
}
