//! Executes parsed scripts against the engine.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::blocks::{family_count, intersect, union, Family};
use crate::boolean::{build_algebra, cb_profile};
use crate::closure::{closure, is_in_closure, isolated_points, Certificate};
use crate::dsl::{eval, parse_script, Arg, Env, Expr, StatementKind};
use crate::error::{Error, Result};
use crate::lattice::{
    decompose, generate_lattice, leq, meet_prime, LatticeElement, Ops, DEFAULT_CAP,
};
use crate::oracle::{all_words, oracle_in_closure, oracle_isolated, project, Verdict};
use crate::stone::{SentenceExpr, TheoryPoint};
use crate::verify::run_verify;

pub const DEFAULT_DEPTH: usize = 12;

/// Oracle depth from `THEORIA_DEPTH`, or [`DEFAULT_DEPTH`].
pub fn default_depth() -> usize {
    std::env::var("THEORIA_DEPTH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DEPTH)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub output: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub json: bool,
    pub depth: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            json: false,
            depth: DEFAULT_DEPTH,
        }
    }
}

struct CommandResult {
    text: String,
    json: Value,
    violation: bool,
}

impl CommandResult {
    fn ok(text: String, json: Value) -> Self {
        CommandResult {
            text,
            json,
            violation: false,
        }
    }
}

struct Call<'a> {
    name: &'a str,
    exprs: Vec<&'a Expr>,
    flags: BTreeMap<&'a str, Option<&'a str>>,
}

impl<'a> Call<'a> {
    fn new(name: &'a str, args: &'a [Arg], allowed: &[&str]) -> Result<Self> {
        let mut exprs = Vec::new();
        let mut flags = BTreeMap::new();
        for a in args {
            match a {
                Arg::Expr(e) => exprs.push(e),
                Arg::Flag(f, v) => {
                    if !allowed.contains(&f.as_str()) {
                        return Err(Error::Precondition(format!("{name}: unknown flag --{f}")));
                    }
                    flags.insert(f.as_str(), v.as_deref());
                }
            }
        }
        Ok(Call { name, exprs, flags })
    }

    fn arity(&self, lo: usize, hi: usize) -> Result<()> {
        let n = self.exprs.len();
        if n < lo || n > hi {
            let want = if lo == hi {
                lo.to_string()
            } else if hi == usize::MAX {
                format!("at least {lo}")
            } else {
                format!("{lo} to {hi}")
            };
            return Err(Error::Precondition(format!(
                "{} expects {want} arguments, got {n}",
                self.name
            )));
        }
        Ok(())
    }

    fn flag(&self, f: &str) -> Result<Option<&'a str>> {
        match self.flags.get(f) {
            None => Ok(None),
            Some(Some(v)) => Ok(Some(v)),
            Some(None) => Err(Error::Precondition(format!("{}: --{f} needs a value", self.name))),
        }
    }

    fn num_flag<T: std::str::FromStr>(&self, f: &str) -> Result<Option<T>> {
        self.flag(f)?
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Precondition(format!("{}: bad value for --{f}: {v}", self.name)))
            })
            .transpose()
    }
}

fn fam_json(f: &Family) -> Value {
    Value::String(f.to_string())
}

fn element(f: Family) -> Result<LatticeElement> {
    LatticeElement::new(f)
}

pub struct Session {
    env: Env,
    opts: Options,
}

impl Session {
    pub fn new(opts: Options) -> Self {
        Session {
            env: Env::new(),
            opts,
        }
    }

    fn eval_all(&self, c: &Call) -> Result<Vec<Family>> {
        c.exprs.iter().map(|e| eval(e, &self.env)).collect()
    }

    fn command(&mut self, name: &str, args: &[Arg]) -> Result<CommandResult> {
        match name {
            "closure" | "print" => {
                let c = Call::new(name, args, &[])?;
                c.arity(1, 1)?;
                let f = self.eval_all(&c)?.remove(0);
                let f = if name == "closure" { closure(&f) } else { f };
                Ok(CommandResult::ok(f.to_string(), fam_json(&f)))
            }
            "lgs" => {
                let c = Call::new(name, args, &[])?;
                c.arity(1, 1)?;
                let e = element(self.eval_all(&c)?.remove(0))?;
                let r = e.report()?;
                let mut text = format!(
                    "least generating set: {}\nisolated points: {}",
                    match &r.least_gen_set {
                        Some(g) => g.to_string(),
                        None => "none".into(),
                    },
                    r.isolated
                );
                for w in &r.witnesses {
                    text.push_str(&format!("\n  {} isolated by {}", w.point, w.sentence));
                }
                Ok(CommandResult::ok(text, serde_json::to_value(&r).expect("serializable")))
            }
            "meet" | "join" | "meetprime" => {
                let c = Call::new(name, args, &[])?;
                c.arity(2, usize::MAX)?;
                let fs = self.eval_all(&c)?;
                let mut acc = fs[0].clone();
                for f in &fs[1..] {
                    acc = match name {
                        "meet" => intersect(&acc, f)?,
                        "join" => union(&acc, f),
                        _ => meet_prime(&element(acc)?, &element(f.clone())?)?.family,
                    };
                }
                Ok(CommandResult::ok(acc.to_string(), fam_json(&acc)))
            }
            "leq" => {
                let c = Call::new(name, args, &[])?;
                c.arity(2, 2)?;
                let mut fs = self.eval_all(&c)?;
                let b = element(fs.pop().expect("two"))?;
                let a = element(fs.pop().expect("two"))?;
                let r = leq(&a, &b)?;
                Ok(CommandResult::ok(r.to_string(), json!(r)))
            }
            "decompose" => {
                let c = Call::new(name, args, &[])?;
                c.arity(2, 2)?;
                let mut fs = self.eval_all(&c)?;
                let b = element(fs.pop().expect("two"))?;
                let a = element(fs.pop().expect("two"))?;
                let d = decompose(&a, &b)?;
                let text = format!(
                    "shared: {}\nused: {}\nunused: {}",
                    d.part21, d.part22, d.part23
                );
                Ok(CommandResult::ok(text, serde_json::to_value(&d).expect("serializable")))
            }
            "lattice" => {
                let c = Call::new(name, args, &["ops", "format", "cap"])?;
                c.arity(1, usize::MAX)?;
                let ops = match c.flag("ops")?.unwrap_or("both") {
                    "join" => Ops::JOIN,
                    "both" => Ops::BOTH,
                    o => return Err(Error::Precondition(format!("lattice: unknown ops `{o}`"))),
                };
                let cap = c.num_flag("cap")?.unwrap_or(DEFAULT_CAP);
                let xs = self
                    .eval_all(&c)?
                    .into_iter()
                    .map(element)
                    .collect::<Result<Vec<_>>>()?;
                let l = generate_lattice(&xs, ops, cap)?;
                let text = match c.flag("format")?.unwrap_or("text") {
                    "dot" => l.to_dot(),
                    "json" => serde_json::to_string_pretty(&l.to_json()).expect("serializable"),
                    "text" => {
                        let mut s = format!("{} elements", l.len());
                        for (i, e) in l.elements.iter().enumerate() {
                            s.push_str(&format!("\n  [{i}] {}", e.family));
                        }
                        for (i, j) in &l.hasse {
                            s.push_str(&format!("\n  [{i}] < [{j}]"));
                        }
                        s
                    }
                    f => return Err(Error::Precondition(format!("lattice: unknown format `{f}`"))),
                };
                Ok(CommandResult::ok(text, l.to_json()))
            }
            "algebra" => {
                let c = Call::new(name, args, &["generators"])?;
                c.arity(1, 1)?;
                let n = c.num_flag("generators")?.unwrap_or(4);
                let e = element(self.eval_all(&c)?.remove(0))?;
                let a = build_algebra(&e, n)?;
                let iso = a.iso_check()?;
                let gens: Vec<String> = a.generators.iter().map(|g| g.to_string()).collect();
                let text = format!(
                    "generators: {}\nelements: {}\natoms: {}\npowerset isomorphism: {}",
                    gens.join(" "),
                    a.len(),
                    a.atoms().len(),
                    if iso { "holds" } else { "FAILS" }
                );
                let mut j = a.to_json();
                j["isomorphism"] = json!(iso);
                Ok(CommandResult {
                    text,
                    json: j,
                    violation: !iso,
                })
            }
            "cbrank" => {
                let c = Call::new(name, args, &[])?;
                c.arity(1, 1)?;
                let f = self.eval_all(&c)?.remove(0);
                let p = cb_profile(&f)?;
                let mut text = format!("rank: {}\nperfect kernel: {}", p.rank, if p.kernel_empty { "empty" } else { "nonempty" });
                for (i, d) in p.derivative_chain.iter().enumerate() {
                    text.push_str(&format!("\n  F^({i}) = {d}"));
                }
                Ok(CommandResult::ok(text, serde_json::to_value(&p).expect("serializable")))
            }
            "oracle-check" => self.oracle_check(args),
            "verify" => {
                let c = Call::new(name, args, &["suite", "seeds", "base-seed"])?;
                c.arity(0, 0)?;
                let suite = c.flag("suite")?.unwrap_or("all");
                let seeds = c.num_flag("seeds")?.unwrap_or(20);
                let base = c.num_flag("base-seed")?.unwrap_or(0);
                let r = run_verify(suite, seeds, base)?;
                Ok(CommandResult {
                    text: r.to_string(),
                    json: serde_json::to_value(&r).expect("serializable"),
                    violation: !r.passed(),
                })
            }
            "export" => {
                let c = Call::new(name, args, &["format"])?;
                c.arity(1, usize::MAX)?;
                let fs = self.eval_all(&c)?;
                match c.flag("format")?.unwrap_or("dsl") {
                    "dsl" => {
                        let s: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
                        Ok(CommandResult::ok(s.join("\n"), json!(s)))
                    }
                    "json" => {
                        let j: Vec<Value> = fs
                            .iter()
                            .map(|f| {
                                json!({
                                    "name": f.name,
                                    "family": f.to_string(),
                                    "blocks": f.blocks().iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                                })
                            })
                            .collect();
                        let v = Value::Array(j);
                        Ok(CommandResult::ok(serde_json::to_string_pretty(&v).expect("serializable"), v))
                    }
                    "dot" => {
                        let xs = fs.into_iter().map(element).collect::<Result<Vec<_>>>()?;
                        let ops = if xs.iter().all(|e| e.has_lgs()) { Ops::BOTH } else { Ops::JOIN };
                        let l = generate_lattice(&xs, ops, DEFAULT_CAP)?;
                        let dot = l.to_dot();
                        Ok(CommandResult::ok(dot.clone(), json!(dot)))
                    }
                    f => Err(Error::Precondition(format!("export: unknown format `{f}`"))),
                }
            }
            other => Err(Error::Precondition(format!("unknown command `{other}`"))),
        }
    }

    fn oracle_check(&mut self, args: &[Arg]) -> Result<CommandResult> {
        let c = Call::new("oracle-check", args, &["depth", "point"])?;
        c.arity(1, 1)?;
        let depth = c.num_flag("depth")?.unwrap_or(self.opts.depth);
        let f = self.eval_all(&c)?.remove(0);
        if let Some(p) = c.flag("point")? {
            let t: TheoryPoint = p.parse()?;
            let (inside, cert) = is_in_closure(&t, &f);
            let v = oracle_in_closure(&t, &f, depth)?;
            let agree = !matches!((inside, v), (true, Verdict::No) | (false, Verdict::Yes));
            let cert_text = match &cert {
                Certificate::Member => "member".to_string(),
                Certificate::Accumulation => "accumulation point".to_string(),
                Certificate::Separating(s) => format!("separated by {s}"),
            };
            let text = format!(
                "engine: {} ({cert_text})\noracle at depth {depth}: {v:?}\n{}",
                if inside { "in closure" } else { "not in closure" },
                if agree { "agree" } else { "DISAGREE" }
            );
            let j = json!({
                "point": t.to_string(),
                "inClosure": inside,
                "certificate": cert_text,
                "oracle": format!("{v:?}"),
                "depth": depth,
                "agree": agree,
            });
            return Ok(CommandResult {
                text,
                json: j,
                violation: !agree,
            });
        }
        let proj = project(&f, depth)?;
        let mismatches: Vec<String> = all_words(depth)
            .filter(|w| {
                let engine = family_count(&f, &SentenceExpr::prefix(w));
                let oracle = proj.count(w);
                !(engine == oracle || (engine.is_infinite() && oracle.is_infinite()))
            })
            .map(|w| w.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .take(20)
            .collect();
        let iso_engine = isolated_points(&closure(&f))?;
        let stray: Vec<String> = oracle_isolated(&closure(&f), depth)?
            .into_iter()
            .filter(|(p, _)| !iso_engine.member(p))
            .map(|(p, _)| p.to_string())
            .collect();
        let ok = mismatches.is_empty() && stray.is_empty();
        let mut text = format!(
            "depth {depth}: {} occupied cells, {} count mismatches, {} oracle-isolated points outside the engine's",
            proj.cells.len(),
            mismatches.len(),
            stray.len()
        );
        for m in mismatches.iter().chain(&stray) {
            text.push_str(&format!("\n  {m}"));
        }
        let j = json!({
            "depth": depth,
            "cells": proj.cells.len(),
            "mismatches": mismatches,
            "strayIsolated": stray,
            "agree": ok,
        });
        Ok(CommandResult {
            text,
            json: j,
            violation: !ok,
        })
    }

    /// Runs every statement, stopping at the first error.
    pub fn run(&mut self, text: &str) -> RunOutcome {
        let mut out: Vec<String> = Vec::new();
        let script = match parse_script(text) {
            Ok(s) => s,
            Err(e) => return self.fail(out, 0, e),
        };
        let mut violation = false;
        for st in &script.statements {
            match &st.kind {
                StatementKind::Let(name, e) => match eval(e, &self.env) {
                    Ok(f) => {
                        self.env.insert(name.clone(), f.named(name.clone()));
                    }
                    Err(e) => return self.fail(out, st.line, e),
                },
                StatementKind::Command(name, args) => match self.command(name, args) {
                    Ok(r) => {
                        violation |= r.violation;
                        if self.opts.json {
                            out.push(
                                json!({"line": st.line, "command": name, "result": r.json, "violation": r.violation})
                                    .to_string(),
                            );
                        } else {
                            out.push(r.text);
                        }
                    }
                    Err(e) => return self.fail(out, st.line, e),
                },
            }
        }
        RunOutcome {
            output: join_lines(&out),
            exit_code: if violation { 1 } else { 0 },
        }
    }

    fn fail(&self, mut out: Vec<String>, line: usize, e: Error) -> RunOutcome {
        let msg = match (&e, line) {
            (Error::Parse { .. }, _) | (_, 0) => e.to_string(),
            _ => format!("line {line}: {e}"),
        };
        if self.opts.json {
            out.push(json!({"line": line, "error": msg}).to_string());
        } else {
            out.push(format!("error: {msg}"));
        }
        RunOutcome {
            output: join_lines(&out),
            exit_code: 2,
        }
    }
}

fn join_lines(v: &[String]) -> String {
    let mut s = v.join("\n");
    if !s.is_empty() {
        s.push('\n');
    }
    s
}

pub fn run_script(text: &str, opts: Options) -> RunOutcome {
    Session::new(opts).run(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::family_eq;

    fn run(s: &str) -> RunOutcome {
        run_script(s, Options::default())
    }

    #[test]
    fn let_and_closure() {
        let r = run("let F = fan(limit=~0)\nclosure F\n");
        assert_eq!(r.exit_code, 0, "{}", r.output);
        assert!(r.output.contains("withlimit"), "{}", r.output);
    }

    #[test]
    fn parse_error_exits_2() {
        let r = run("let F = fin{");
        assert_eq!(r.exit_code, 2);
        assert!(r.output.starts_with("error: parse error at 1:"), "{}", r.output);
    }

    #[test]
    fn runtime_error_exits_2() {
        let r = run("lgs fan(limit=~0)\n");
        assert_eq!(r.exit_code, 2);
        assert!(r.output.contains("line 1"), "{}", r.output);
        assert_eq!(run("closure X").exit_code, 2);
        assert_eq!(run("verify --suite bogus").exit_code, 2);
    }

    #[test]
    fn oracle_check_point() {
        let r = run("oracle-check gallery(fan0) --point ~0 --depth 8");
        assert_eq!(r.exit_code, 0, "{}", r.output);
        assert!(r.output.contains("agree"));
        let r = run("oracle-check gallery(cube0) --depth 6");
        assert_eq!(r.exit_code, 0, "{}", r.output);
    }

    #[test]
    fn json_lines() {
        let r = run_script("meetprime gallery(fan-t) gallery(fan-s)", Options { json: true, depth: 12 });
        let v: Value = serde_json::from_str(r.output.trim()).unwrap();
        assert_eq!(v["result"], json!("fin{~0}"));
    }

    #[test]
    fn depth_cap() {
        let r = run("oracle-check gallery(fan0) --depth 40");
        assert_eq!(r.exit_code, 2);
    }

    #[test]
    fn equal_exports() {
        let r = run("let A = gallery(array-a)\nexport A --format dsl");
        let f = crate::dsl::parse_family(r.output.trim()).unwrap();
        assert!(family_eq(&f, &crate::gallery::family("array-a").unwrap()).unwrap());
    }
}
