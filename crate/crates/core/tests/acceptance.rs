use std::io::Write;
use std::time::{Duration, Instant};

use theoria_core::blocks::family_eq;
use theoria_core::dsl::{export, parse_family};
use theoria_core::gallery;
use theoria_core::verify::{
    check_algebras, check_closure_additivity, check_distributive_triples, check_fan_pair,
    check_finite_extensions, check_generating_equivalence, check_lattice_laws,
    check_meet_counterexample, check_oracle_agreement, check_projection_consistency,
    check_union_has_lgs, closure_probes, finite_extension_pairs, gallery_lattice_seeds,
    gallery_lgs_elements, gallery_pairs, gallery_triples, random_lgs_elements, random_lgs_pairs,
    random_pairs, random_triples, run_verify, CheckOutcome,
};

/// Writes past the test harness capture so every run shows the verdict.
fn report(n: usize, outcomes: &[&CheckOutcome], extra: &str, elapsed: Duration) {
    let ok = outcomes.iter().all(|o| o.passed() && o.skipped == 0);
    let instances: usize = outcomes.iter().map(|o| o.instances).sum();
    let failures: usize = outcomes.iter().map(|o| o.failures.len()).sum();
    let skipped: usize = outcomes.iter().map(|o| o.skipped).sum();
    let line = format!(
        "criterion {n}: {} ({instances} instances, {failures} failures, {skipped} undecided, {:.2?}){}{extra}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        if extra.is_empty() { "" } else { " " },
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    if !ok {
        let detail: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
        panic!("criterion {n} failed\n{}", detail.join("\n"));
    }
}

#[test]
fn criterion_01_closure_additivity() {
    let t = Instant::now();
    let mut pairs = gallery_pairs();
    pairs.extend(random_pairs(500, 0));
    let o = check_closure_additivity(&pairs);
    let el = t.elapsed();
    let fast = el < Duration::from_secs(60);
    report(1, &[&o], if fast { "" } else { "over the 60 s budget" }, el);
    assert!(fast);
}

#[test]
fn criterion_02_oracle_agreement() {
    let t = Instant::now();
    let probes = closure_probes(240, 0);
    assert!(probes.len() >= 200);
    let o = check_oracle_agreement(&probes, 12);
    report(2, &[&o], "", t.elapsed());
}

#[test]
fn criterion_03_generating_conditions() {
    let t = Instant::now();
    let mut elems = gallery_lgs_elements();
    elems.extend(random_lgs_elements(200, 0));
    let o = check_generating_equivalence(&elems);
    report(3, &[&o], "", t.elapsed());
}

#[test]
fn criterion_04_join_keeps_generators() {
    let t = Instant::now();
    let o = check_union_has_lgs(&random_lgs_pairs(500, 0));
    report(4, &[&o], "", t.elapsed());
}

#[test]
fn criterion_05_intersection_counterexample() {
    let t = Instant::now();
    let o = check_meet_counterexample();
    report(5, &[&o], "", t.elapsed());
}

#[test]
fn criterion_06_fan_pair() {
    let t = Instant::now();
    let o = check_fan_pair();
    report(6, &[&o], "", t.elapsed());
}

#[test]
fn criterion_07_lattice_laws() {
    let t = Instant::now();
    let o = check_lattice_laws(&gallery_lattice_seeds());
    report(7, &[&o], "", t.elapsed());
}

#[test]
fn criterion_08_finite_extensions() {
    let t = Instant::now();
    let o = check_finite_extensions(&finite_extension_pairs(100, 0));
    report(8, &[&o], "", t.elapsed());
}

#[test]
fn criterion_09_distributivity() {
    let t = Instant::now();
    let r = check_distributive_triples("random triples", &random_triples(300, 0));
    let g = check_distributive_triples("gallery triples", &gallery_triples());
    let el = t.elapsed();
    let fast = el < Duration::from_secs(120);
    report(9, &[&r, &g], if fast { "" } else { "over the 120 s budget" }, el);
    assert!(fast);
}

#[test]
fn criterion_10_generator_algebras() {
    let t = Instant::now();
    let elems = gallery_lgs_elements();
    let outcomes: Vec<CheckOutcome> = (0..=10).map(|n| check_algebras(&elems, n)).collect();
    let refs: Vec<&CheckOutcome> = outcomes.iter().collect();
    report(10, &refs, "", t.elapsed());
}

#[test]
fn criterion_11_oracle_self_consistency() {
    let t = Instant::now();
    let o = check_projection_consistency(&gallery::families(), 10);
    report(11, &[&o], "", t.elapsed());
}

#[test]
fn criterion_12_round_trip_and_verify() {
    let t = Instant::now();
    let mut rt = CheckOutcome::new("export round-trip");
    for f in gallery::families() {
        rt.instances += 1;
        let ok = parse_family(&export(&f))
            .and_then(|g| family_eq(&g, &f))
            .unwrap_or(false);
        if !ok {
            rt.failures.push(format!("{:?}", f.name));
        }
    }
    let v = run_verify("all", 20, 0).expect("known suite");
    let mut exit = CheckOutcome::new("verify --suite all exit status");
    exit.instances = 1;
    if v.exit_code() != 0 {
        exit.failures.push(format!("exit {}\n{v}", v.exit_code()));
    }
    report(12, &[&rt, &exit], "", t.elapsed());
}
