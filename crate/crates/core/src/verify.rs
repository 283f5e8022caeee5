//! Property suites over gallery and seeded random instances.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blocks::{family_count, family_eq, family_subset, intersect, union, Block, Family};
use crate::boolean::{build_algebra, cb_profile};
use crate::closure::{
    acc_points, check_generating_conditions, closure, is_in_closure, isolated_points,
    least_generating_set, sample_points,
};
use crate::error::{Error, Result};
use crate::gallery::{self, make_random_family, make_random_lgs_family, random_point};
use crate::lattice::{
    check_distributivity, check_finite_extension, check_order_coherence, check_union_lgs,
    check_used_generators, decompose, generate_lattice, join, meet, meet_prime,
    GeneratedLattice, LatticeElement, Ops, DEFAULT_CAP,
};
use crate::oracle::{all_words, oracle_in_closure, project, Verdict};
use crate::stone::{SentenceExpr, TheoryPoint, Trichotomy};

pub const SUITES: &[&str] = &[
    "closure",
    "lgs",
    "semilattice",
    "lattice",
    "distributivity",
    "boolean",
    "oracle",
];

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub instances: usize,
    /// Instances the block calculus cannot decide.
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn new(name: &str) -> Self {
        CheckOutcome {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, label: impl fmt::Display, r: Result<bool>) {
        self.instances += 1;
        match r {
            Ok(true) => {}
            Ok(false) => self.failures.push(label.to_string()),
            Err(e) => self.error(label, e),
        }
    }
}

impl CheckOutcome {
    fn error(&mut self, label: impl fmt::Display, e: Error) {
        match e {
            Error::UnsupportedComparison(_) | Error::UnsupportedIntersection(_) => self.skipped += 1,
            e => self.failures.push(format!("{label}: {e}")),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {} ({} instances, {} failures",
            self.name,
            self.instances,
            self.failures.len()
        )?;
        if self.skipped > 0 {
            write!(f, ", {} undecided", self.skipped)?;
        }
        write!(f, ")")?;
        for x in self.failures.iter().take(5) {
            write!(f, "\n    {x}")?;
        }
        if self.failures.len() > 5 {
            write!(f, "\n    ... {} more", self.failures.len() - 5)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(
            f,
            "suite {}: {}",
            self.suite,
            if self.passed() { "pass" } else { "FAIL" }
        )
    }
}

fn label(f: &Family) -> String {
    f.name.clone().unwrap_or_else(|| f.to_string())
}

/// Random family pairs; pair `i` uses seeds `2(base+i)` and `2(base+i)+1`.
pub fn random_pairs(count: usize, base: u64) -> Vec<(Family, Family)> {
    (0..count as u64)
        .map(|i| {
            let s = 2 * (base + i);
            (make_random_family(s, 3), make_random_family(s + 1, 3))
        })
        .collect()
}

pub fn random_lgs_elements(count: usize, base: u64) -> Vec<LatticeElement> {
    (0..count as u64)
        .map(|i| LatticeElement::new(make_random_lgs_family(base + i, 2 + (i % 2) as usize)))
        .collect::<Result<_>>()
        .expect("closures of fans and points are closed")
}

/// Distinct closed gallery families with least generating sets.
pub fn gallery_lgs_elements() -> Vec<LatticeElement> {
    gallery::families()
        .into_iter()
        .filter_map(|f| LatticeElement::new(f).ok())
        .filter(|e| e.has_lgs())
        .collect()
}

pub fn gallery_pairs() -> Vec<(Family, Family)> {
    let fs = gallery::families();
    let mut out = Vec::new();
    for a in &fs {
        for b in &fs {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

pub fn check_closure_additivity(pairs: &[(Family, Family)]) -> CheckOutcome {
    let mut out = CheckOutcome::new("closure additivity");
    for (a, b) in pairs {
        let lhs = closure(&union(a, b));
        let rhs = union(&closure(a), &closure(b));
        out.record(format!("{} | {}", label(a), label(b)), family_eq(&lhs, &rhs));
    }
    out
}

pub fn check_closure_axioms(pairs: &[(Family, Family)]) -> CheckOutcome {
    let mut out = CheckOutcome::new("closure extensive, monotone, idempotent");
    for (a, b) in pairs {
        let ca = closure(a);
        let r = (|| {
            let ext = family_subset(a, &ca)?;
            let idem = family_eq(&closure(&ca), &ca)?;
            let ab = union(a, b);
            let mono = family_subset(&ca, &closure(&ab))?;
            Ok(ext && idem && mono)
        })();
        out.record(format!("{} | {}", label(a), label(b)), r);
    }
    out
}

pub fn check_partition(fams: &[Family]) -> CheckOutcome {
    let mut out = CheckOutcome::new("isolated and accumulation points partition");
    for f in fams {
        let c = closure(f);
        let r = (|| {
            let iso = isolated_points(&c)?;
            let acc = acc_points(&c);
            Ok(family_eq(&union(&iso, &acc), &c)? && intersect(&iso, &acc)?.is_empty())
        })();
        out.record(label(f), r);
    }
    out
}

pub fn check_witnesses(fams: &[Family]) -> CheckOutcome {
    let mut out = CheckOutcome::new("isolating witnesses");
    for f in fams {
        let c = closure(f);
        let r = least_generating_set(&c).map(|rep| {
            rep.witnesses
                .iter()
                .all(|w| family_count(&c, &w.sentence) == Trichotomy::Finite(vec![w.point.clone()]))
        });
        out.record(label(f), r);
    }
    out
}

/// The four characterizations agree, both on the least generating set and on
/// the whole family used as a generating set.
pub fn check_generating_equivalence(elems: &[LatticeElement]) -> CheckOutcome {
    let mut out = CheckOutcome::new("generating-set conditions agree");
    for e in elems {
        let Some(g) = &e.lgs else { continue };
        let f = &e.family;
        let pool = vec![f.clone()];
        let r = check_generating_conditions(f, g, &pool)
            .map(|fl| fl.agree() && fl.least);
        out.record(format!("{} with its generators", e.name()), r);
        if g != f {
            let r = check_generating_conditions(f, f, &pool).map(|fl| fl.agree() && !fl.least);
            out.record(format!("{} with itself", e.name()), r);
        }
    }
    out
}

pub fn check_gallery_expectations() -> CheckOutcome {
    let mut out = CheckOutcome::new("gallery expected verdicts");
    for case in gallery::cases() {
        let r = (|| {
            let elems: Vec<LatticeElement> = case
                .families
                .iter()
                .map(|f| LatticeElement::new(f.clone()))
                .collect::<Result<_>>()?;
            let has: Vec<bool> = elems.iter().map(|e| e.has_lgs()).collect();
            let mut ok = has == case.expected.has_least;
            let (a, b) = (&elems[0], &elems[1]);
            if let Some(m) = &case.expected.meet {
                ok &= family_eq(&intersect(&a.family, &b.family)?, m)?;
            }
            if let Some(m) = &case.expected.meet_prime {
                ok &= family_eq(&meet_prime(a, b)?.family, m)?;
            }
            if let Some(d) = case.expected.lgs_disjoint {
                let (la, lb) = (a.lgs.as_ref(), b.lgs.as_ref());
                if let (Some(la), Some(lb)) = (la, lb) {
                    ok &= intersect(la, lb)?.is_empty() == d;
                }
            }
            if let Some(n) = case.expected.lattice_size {
                ok &= generate_lattice(&elems, Ops::BOTH, DEFAULT_CAP)?.len() == n;
            }
            Ok(ok)
        })();
        out.record(case.name, r);
    }
    out
}

pub fn check_union_has_lgs(pairs: &[(LatticeElement, LatticeElement)]) -> CheckOutcome {
    let mut out = CheckOutcome::new("join of generated families is generated");
    for (a, b) in pairs {
        out.record(format!("{} | {}", a.name(), b.name()), check_union_lgs(a, b));
    }
    out
}

pub fn check_meet_counterexample() -> CheckOutcome {
    let mut out = CheckOutcome::new("intersection may lose the least generating set");
    let case = gallery::make_intersection_counterexample();
    let r = (|| {
        let a = LatticeElement::new(case.families[0].clone())?;
        let b = LatticeElement::new(case.families[1].clone())?;
        let m = meet(&a, &b)?;
        let oracle_iso = crate::oracle::oracle_isolated(&m.family, 12)?;
        Ok(a.has_lgs() && b.has_lgs() && !m.has_lgs() && oracle_iso.is_empty())
    })();
    out.record(case.name, r);
    out
}

pub fn check_fan_pair() -> CheckOutcome {
    let mut out = CheckOutcome::new("isolated-point meet of a fan pair");
    let case = gallery::make_fan_pair();
    let r = (|| {
        let a = LatticeElement::new(case.families[0].clone())?;
        let b = LatticeElement::new(case.families[1].clone())?;
        let m = meet_prime(&a, &b)?;
        let lgs_meet = intersect(a.lgs.as_ref().ok_or(Error::NoLgs)?, b.lgs.as_ref().ok_or(Error::NoLgs)?)?;
        Ok(m.family == Family::points([TheoryPoint::zeros()]) && lgs_meet.is_empty())
    })();
    out.record(case.name, r);
    out
}

/// Lattice laws for join and the isolated-point meet on a generated lattice,
/// read off its operation tables.
pub fn lattice_law_failures(l: &GeneratedLattice) -> Vec<String> {
    let n = l.len();
    let jt = &l.tables.join;
    let Some(mt) = &l.tables.meet_prime else {
        return vec!["lattice generated without the isolated-point meet".into()];
    };
    let name = |i: usize| l.elements[i].name();
    let mut bad = Vec::new();
    for i in 0..n {
        if jt[i][i] != i || mt[i][i] != i {
            bad.push(format!("idempotence at {}", name(i)));
        }
        for j in 0..n {
            if jt[i][j] != jt[j][i] || mt[i][j] != mt[j][i] {
                bad.push(format!("commutativity at {}, {}", name(i), name(j)));
            }
            if mt[i][jt[i][j]] != i || jt[i][mt[i][j]] != i {
                bad.push(format!("absorption at {}, {}", name(i), name(j)));
            }
            for k in 0..n {
                if jt[jt[i][j]][k] != jt[i][jt[j][k]] {
                    bad.push(format!("join associativity at {}, {}, {}", name(i), name(j), name(k)));
                }
                if mt[mt[i][j]][k] != mt[i][mt[j][k]] {
                    bad.push(format!(
                        "meet associativity at {}, {}, {}: ({} vs {})",
                        name(i),
                        name(j),
                        name(k),
                        name(mt[mt[i][j]][k]),
                        name(mt[i][mt[j][k]])
                    ));
                }
            }
        }
    }
    bad
}

pub fn check_lattice_laws(sets: &[(String, Vec<LatticeElement>)]) -> CheckOutcome {
    let mut out = CheckOutcome::new("lattice laws on generated lattices");
    for (name, xs) in sets {
        out.instances += 1;
        match generate_lattice(xs, Ops::BOTH, DEFAULT_CAP) {
            Ok(l) => out
                .failures
                .extend(lattice_law_failures(&l).into_iter().map(|m| format!("{name}: {m}"))),
            Err(e) => out.error(name, e),
        }
    }
    out
}

/// Every generating set of one to four elements drawn from a gallery case,
/// restricted to the case's families with least generating sets.
pub fn gallery_lattice_seeds() -> Vec<(String, Vec<LatticeElement>)> {
    let mut out = Vec::new();
    for c in gallery::cases() {
        let pool: Vec<LatticeElement> = c
            .families
            .iter()
            .filter_map(|f| LatticeElement::new(f.clone()).ok())
            .filter(|e| e.has_lgs())
            .collect();
        for bits in 1u32..(1 << pool.len()) {
            if bits.count_ones() > 4 {
                continue;
            }
            let xs: Vec<LatticeElement> = (0..pool.len())
                .filter(|i| bits & (1 << i) != 0)
                .map(|i| pool[i].clone())
                .collect();
            let names: Vec<String> = xs.iter().map(|e| e.name()).collect();
            out.push((format!("{} {{{}}}", c.name, names.join(", ")), xs));
        }
    }
    out
}

pub fn random_lattice_seeds(count: usize, base: u64) -> Vec<(String, Vec<LatticeElement>)> {
    (0..count as u64)
        .map(|i| {
            let s = base + i;
            let xs = random_lgs_elements(2, 1000 + 2 * s);
            (format!("seed {s}"), xs)
        })
        .collect()
}

pub fn check_order(pairs: &[(LatticeElement, LatticeElement)]) -> CheckOutcome {
    let mut out = CheckOutcome::new("order coherence and decompositions");
    for (a, b) in pairs {
        out.record(format!("{} | {}", a.name(), b.name()), check_order_coherence(a, b));
        let big = match join(a, b) {
            Ok(j) => j,
            Err(e) => {
                out.error(format!("{} | {}", a.name(), b.name()), e);
                continue;
            }
        };
        let r = (|| {
            decompose(a, &big)?;
            check_used_generators(a, &big)
        })();
        out.record(format!("decompose {} in {} | {}", a.name(), a.name(), b.name()), r);
    }
    out
}

/// Pairs `a ≤ b` where `b` adds finitely many points to `a`.
pub fn finite_extension_pairs(count: usize, base: u64) -> Vec<(LatticeElement, LatticeElement)> {
    let mut out = Vec::new();
    for i in 0..count as u64 {
        let s = base + i;
        let a = random_lgs_elements(1, 5000 + s).remove(0);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let k = rng.gen_range(1..=3);
        let extra = Family::points((0..k).map(|_| random_point(&mut rng)));
        let b = LatticeElement::new(closure(&union(&a.family, &extra)))
            .expect("closure is closed");
        out.push((a, b));
    }
    out
}

pub fn check_finite_extensions(pairs: &[(LatticeElement, LatticeElement)]) -> CheckOutcome {
    let mut out = CheckOutcome::new("finite extension adds the unused generators");
    for (i, (a, b)) in pairs.iter().enumerate() {
        out.record(format!("pair {i}"), check_finite_extension(a, b));
    }
    out
}

pub type Triple = (LatticeElement, LatticeElement, LatticeElement);

pub fn gallery_triples() -> Vec<Triple> {
    let pool = gallery_lgs_elements();
    let mut out = Vec::new();
    for a in &pool {
        for b in &pool {
            for c in &pool {
                out.push((a.clone(), b.clone(), c.clone()));
            }
        }
    }
    out
}

pub fn random_triples(count: usize, base: u64) -> Vec<Triple> {
    (0..count as u64)
        .map(|i| {
            let mut v = random_lgs_elements(3, 3 * (base + i) + 20_000);
            let c = v.pop().expect("three");
            let b = v.pop().expect("three");
            let a = v.pop().expect("three");
            (a, b, c)
        })
        .collect()
}

pub fn check_distributive_triples(name: &str, triples: &[Triple]) -> CheckOutcome {
    let mut out = CheckOutcome::new(name);
    for (a, b, c) in triples {
        let l = format!("{} | {} | {}", a.name(), b.name(), c.name());
        match check_distributivity(a, b, c) {
            Ok(rep) if rep.holds() => out.instances += 1,
            Ok(rep) => {
                out.instances += 1;
                for fail in rep.failures {
                    out.failures.push(format!(
                        "{l}: identity {} gives {} vs {}",
                        fail.identity, fail.lhs, fail.rhs
                    ));
                }
            }
            Err(e) => {
                out.instances += 1;
                out.error(l, e);
            }
        }
    }
    out
}

pub fn check_algebras(elems: &[LatticeElement], max_generators: usize) -> CheckOutcome {
    let mut out = CheckOutcome::new("generator algebras are powerset algebras");
    for e in elems {
        let r = build_algebra(e, max_generators).and_then(|a| a.iso_check());
        out.record(e.name(), r);
    }
    out
}

pub fn check_cb_profiles(fams: &[Family]) -> CheckOutcome {
    let mut out = CheckOutcome::new("derivative chains and perfect kernels");
    for f in fams {
        let c = closure(f);
        let perfect_piece = c.blocks().iter().any(|b| match b {
            Block::Cube(_) => true,
            Block::FanArray(a) => a.include_base,
            _ => false,
        });
        let r = cb_profile(&c).map(|p| p.kernel_empty != perfect_piece);
        out.record(label(f), r);
    }
    out
}

pub fn check_projection_consistency(fams: &[Family], max_depth: usize) -> CheckOutcome {
    let mut out = CheckOutcome::new("oracle projections match neighbourhood counts");
    for f in fams {
        for d in 0..=max_depth {
            let r = project(f, d).map(|p| {
                all_words(d).all(|w| {
                    let engine = family_count(f, &SentenceExpr::prefix(&w));
                    same_count(&p.count(&w), &engine)
                })
            });
            out.record(format!("{} at depth {d}", label(f)), r);
        }
    }
    out
}

fn same_count(a: &Trichotomy, b: &Trichotomy) -> bool {
    match (a, b) {
        (Trichotomy::Infinite(_), Trichotomy::Infinite(_)) => true,
        _ => a == b,
    }
}

/// Random probes: each family is paired with random points and with points
/// sampled from its closure and their one-bit perturbations.
pub fn closure_probes(count: usize, base: u64) -> Vec<(TheoryPoint, Family)> {
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < count {
        let s = base + i;
        i += 1;
        let f = make_random_family(40_000 + s, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut pts = vec![random_point(&mut rng)];
        for p in sample_points(&closure(&f), 2).into_iter().take(3) {
            let k = rng.gen_range(0..8);
            pts.push(p.flip(k));
            pts.push(p);
        }
        for p in pts {
            out.push((p, f.clone()));
        }
    }
    out.truncate(count);
    out
}

pub fn check_oracle_agreement(probes: &[(TheoryPoint, Family)], max_depth: usize) -> CheckOutcome {
    let mut out = CheckOutcome::new("closure membership agrees with the oracle");
    for (t, f) in probes {
        let (inside, _) = is_in_closure(t, f);
        let r = (|| {
            for d in 0..=max_depth {
                let v = oracle_in_closure(t, f, d)?;
                if (inside && v == Verdict::No) || (!inside && v == Verdict::Yes) {
                    return Ok(false);
                }
            }
            Ok(true)
        })();
        out.record(format!("{t} in closure of {}", label(f)), r);
    }
    out
}

fn lgs_pairs(elems: &[LatticeElement]) -> Vec<(LatticeElement, LatticeElement)> {
    let mut out = Vec::new();
    for a in elems {
        for b in elems {
            out.push((a.clone(), b.clone()));
        }
    }
    out
}

pub fn random_lgs_pairs(count: usize, base: u64) -> Vec<(LatticeElement, LatticeElement)> {
    (0..count as u64)
        .map(|i| {
            let mut v = random_lgs_elements(2, 2 * (base + i) + 60_000);
            let b = v.pop().expect("two");
            (v.pop().expect("two"), b)
        })
        .collect()
}

fn run_suite(suite: &str, seeds: usize, base: u64) -> Vec<CheckOutcome> {
    let gal = gallery::families();
    let rand_fams: Vec<Family> = (0..seeds as u64).map(|i| make_random_family(base + i, 3)).collect();
    let mut fams = gal.clone();
    fams.extend(rand_fams);
    match suite {
        "closure" => {
            let mut pairs = gallery_pairs();
            pairs.extend(random_pairs(seeds, base));
            vec![
                check_closure_additivity(&pairs),
                check_closure_axioms(&pairs),
                check_partition(&fams),
                check_witnesses(&fams),
            ]
        }
        "lgs" => {
            let mut elems = gallery_lgs_elements();
            elems.extend(random_lgs_elements(seeds, base));
            vec![check_gallery_expectations(), check_generating_equivalence(&elems)]
        }
        "semilattice" => {
            let mut pairs = lgs_pairs(&gallery_lgs_elements());
            pairs.extend(random_lgs_pairs(seeds, base));
            vec![check_union_has_lgs(&pairs), check_meet_counterexample()]
        }
        "lattice" => {
            let mut sets = gallery_lattice_seeds();
            sets.extend(random_lattice_seeds(seeds.min(50), base));
            let mut pairs = lgs_pairs(&gallery_lgs_elements());
            pairs.extend(random_lgs_pairs(seeds, base));
            vec![
                check_fan_pair(),
                check_lattice_laws(&sets),
                check_order(&pairs),
                check_finite_extensions(&finite_extension_pairs(seeds.max(1), base)),
            ]
        }
        "distributivity" => vec![
            check_distributive_triples("distributivity on gallery triples", &gallery_triples()),
            check_distributive_triples("distributivity on random triples", &random_triples(seeds, base)),
        ],
        "boolean" => vec![check_algebras(&gallery_lgs_elements(), 10), check_cb_profiles(&fams)],
        "oracle" => vec![
            check_projection_consistency(&gal, 10),
            check_oracle_agreement(&closure_probes(seeds.max(1) * 4, base), 12),
        ],
        _ => unreachable!(),
    }
}

pub fn run_verify(suite: &str, seeds: usize, base_seed: u64) -> Result<VerifyReport> {
    let names: Vec<&str> = match suite {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        s => return Err(Error::UnknownSuite(s.to_string())),
    };
    let checks = names
        .into_iter()
        .flat_map(|s| run_suite(s, seeds, base_seed))
        .collect();
    Ok(VerifyReport {
        suite: suite.to_string(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert_eq!(run_verify("bogus", 0, 0).unwrap_err(), Error::UnknownSuite("bogus".into()));
    }

    #[test]
    fn closure_suite_small() {
        let r = run_verify("closure", 3, 0).unwrap();
        assert!(r.passed(), "{r}");
    }
}
