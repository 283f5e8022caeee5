use std::path::PathBuf;
use std::process::{Command, Output};

fn theoria(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_theoria"))
        .args(args)
        .env_remove("THEORIA_DEPTH")
        .output()
        .expect("binary runs")
}

fn script(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn script_runs_and_exits_zero() {
    let p = script(
        "ok.tl",
        "let A = fan(limit=~0, stride=1, offset=0, dev=)\nlgs closure(A)\nmeetprime gallery(fan-t), gallery(fan-s)\n",
    );
    let o = theoria(&[p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("1~0 isolated by P0"), "{out}");
    assert!(out.lines().any(|l| l == "fin{~0}"), "{out}");
}

#[test]
fn json_output_is_one_object_per_command() {
    let p = script("json.tl", "let A = fan(limit=~0)\nlgs closure(A)\nleq A, closure(A)\n");
    let o = theoria(&[p.to_str().unwrap(), "--json"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2, "{out}");
    assert!(lines[0].contains("\"hasLeast\":true"));
    assert!(lines[0].contains("\"command\":\"lgs\""));
}

#[test]
fn parse_error_exits_two_with_location() {
    let p = script("bad.tl", "let X = fin{");
    let o = theoria(&[p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("parse error at 1:"), "{}", stdout(&o));
}

#[test]
fn undefined_name_exits_two() {
    let p = script("undef.tl", "closure Nope\n");
    assert_eq!(theoria(&[p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_two() {
    assert_eq!(theoria(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn passing_suite_exits_zero() {
    let o = theoria(&["verify", "--suite", "closure", "--seeds", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn violated_property_exits_one() {
    let o = theoria(&["verify", "--suite", "distributivity", "--seeds", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("array-a"));
}

#[test]
fn gallery_output_is_a_runnable_script() {
    let o = theoria(&["gallery", "fan-pair"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o) + "meetprime fan-t, fan-s\n";
    let p = script("gal.tl", &text);
    let o = theoria(&[p.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "fin{~0}");
    assert_eq!(theoria(&["gallery", "nope"]).status.code(), Some(2));
}

#[test]
fn export_formats() {
    let o = theoria(&["export", "array-a", "--format", "dsl"]);
    assert_eq!(stdout(&o).trim(), "fanarray(base=cube(mask=~F0), c=1, stride=4, withbase)");
    let o = theoria(&["export", "fan-t", "fan-s", "--format", "dot"]);
    assert!(stdout(&o).starts_with("digraph"));
    let o = theoria(&["export", "cube0", "--format", "json"]);
    assert!(stdout(&o).contains("\"blocks\""));
}

#[test]
fn depth_from_environment() {
    let p = script("depth.tl", "oracle-check gallery(fan0) --point ~0\n");
    let o = Command::new(env!("CARGO_BIN_EXE_theoria"))
        .arg(&p)
        .env("THEORIA_DEPTH", "5")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("oracle at depth 5"), "{}", stdout(&o));
}
