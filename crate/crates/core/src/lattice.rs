//! Lattice structure on closed families: meet, join, the isolated-point meet,
//! the order with its three-part decomposition, and generated lattices.

use std::fmt::Write as _;

use serde::Serialize;

use crate::blocks::{difference, family_eq, family_subset, intersect, union, Block, Family};
use crate::closure::{
    acc_points, closure, is_closed, isolated_points, least_generating_set, sample_points,
    witness, GenSetReport,
};
use crate::error::{Error, Result};
use crate::stone::TheoryPoint;

pub const DEFAULT_CAP: usize = 4096;

/// A closed family together with its least generating set, when it has one.
#[derive(Clone, Debug)]
pub struct LatticeElement {
    pub family: Family,
    pub lgs: Option<Family>,
}

impl LatticeElement {
    pub fn new(family: Family) -> Result<Self> {
        if !is_closed(&family)? {
            return Err(Error::NotClosed);
        }
        let iso = isolated_points(&family)?;
        let has = family_eq(&closure(&iso), &family)?;
        Ok(LatticeElement {
            family,
            lgs: has.then_some(iso),
        })
    }

    pub fn closure_of(f: &Family) -> Result<Self> {
        Self::new(closure(f))
    }

    pub fn has_lgs(&self) -> bool {
        self.lgs.is_some()
    }

    pub fn report(&self) -> Result<GenSetReport> {
        least_generating_set(&self.family)
    }

    fn lgs_or_err(&self) -> Result<&Family> {
        self.lgs.as_ref().ok_or(Error::NoLgs)
    }

    pub fn name(&self) -> String {
        self.family
            .name
            .clone()
            .unwrap_or_else(|| self.family.to_string())
    }
}

pub fn meet(a: &LatticeElement, b: &LatticeElement) -> Result<LatticeElement> {
    LatticeElement::new(intersect(&a.family, &b.family)?)
}

pub fn join(a: &LatticeElement, b: &LatticeElement) -> Result<LatticeElement> {
    let u = union(&a.family, &b.family);
    debug_assert!(is_closed(&u).unwrap_or(true));
    LatticeElement::new(u)
}

/// Closure of the isolated points of the intersection.
pub fn meet_prime(a: &LatticeElement, b: &LatticeElement) -> Result<LatticeElement> {
    a.lgs_or_err()?;
    b.lgs_or_err()?;
    let i = intersect(&a.family, &b.family)?;
    LatticeElement::new(closure(&isolated_points(&i)?))
}

pub fn leq(a: &LatticeElement, b: &LatticeElement) -> Result<bool> {
    family_subset(&a.family, &b.family)
}

/// Split of the generators of the larger element relative to the smaller.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LeqDecomposition {
    /// Generators shared with the smaller element.
    pub part21: Family,
    /// Generators in blocks accumulating at generators of the smaller element.
    pub part22: Family,
    pub part23: Family,
}

pub fn decompose(a: &LatticeElement, b: &LatticeElement) -> Result<LeqDecomposition> {
    let l1 = a.lgs_or_err()?;
    let l2 = b.lgs_or_err()?;
    if !leq(a, b)? {
        return Err(Error::NotComparable);
    }
    let part21 = intersect(l2, l1)?;
    let rest = difference(l2, l1)?;
    let target = difference(l1, l2)?;
    let mut used = Vec::new();
    let mut unused = Vec::new();
    for blk in rest.blocks() {
        let acc = acc_points(&Family::from_block(blk.clone()));
        if intersect(&acc, &target)?.is_empty() {
            unused.push(blk.clone());
        } else {
            used.push(blk.clone());
        }
    }
    let part22 = Family::from_blocks(used);
    let part23 = difference(&Family::from_blocks(unused), &part22)?;
    let d = LeqDecomposition {
        part21,
        part22,
        part23,
    };
    if !decomposition_conditions(&d, l1, l2)? {
        return Err(Error::Precondition("decomposition conditions violated".into()));
    }
    Ok(d)
}

/// Disjointness, covering, and the containment conditions on the parts.
pub fn decomposition_conditions(d: &LeqDecomposition, l1: &Family, l2: &Family) -> Result<bool> {
    let parts = [&d.part21, &d.part22, &d.part23];
    for i in 0..3 {
        for j in i + 1..3 {
            if !intersect(parts[i], parts[j])?.is_empty() {
                return Ok(false);
            }
        }
    }
    let all = union(&union(&d.part21, &d.part22), &d.part23);
    let outside = union(&d.part22, &d.part23);
    Ok(family_eq(&all, l2)?
        && family_subset(&d.part21, l1)?
        && intersect(&outside, l1)?.is_empty())
}

/// When the larger element adds only finitely many generators, it is the
/// smaller one plus the unused generators.
pub fn check_finite_extension(a: &LatticeElement, b: &LatticeElement) -> Result<bool> {
    let d = decompose(a, b)?;
    let l1 = a.lgs_or_err()?;
    let l2 = b.lgs_or_err()?;
    if difference(l2, l1)?.finite_points().is_none() {
        return Err(Error::Precondition(
            "the larger generating set adds infinitely many points".into(),
        ));
    }
    Ok(family_eq(&b.family, &union(&a.family, &d.part23))?
        && family_eq(l2, &union(l1, &d.part23))?)
}

/// Weakened accumulation check on a decomposition: every isolating sentence
/// of a generator of `a` outside `b`'s generators meets `part22` infinitely.
pub fn check_used_generators(a: &LatticeElement, b: &LatticeElement) -> Result<bool> {
    let d = decompose(a, b)?;
    if d.part22.is_empty() {
        return Ok(true);
    }
    let l1 = a.lgs_or_err()?;
    let l2 = b.lgs_or_err()?;
    let target = difference(l1, l2)?;
    for x in sample_points(&target, 8) {
        let phi = witness(&a.family, &x)?;
        if !crate::blocks::family_count(&d.part22, &phi).is_infinite() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityFailure {
    pub identity: u8,
    pub lhs: Family,
    pub rhs: Family,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DistributivityReport {
    pub meet_over_join: bool,
    pub join_over_meet: bool,
    pub failures: Vec<IdentityFailure>,
}

impl DistributivityReport {
    pub fn holds(&self) -> bool {
        self.meet_over_join && self.join_over_meet
    }
}

/// Both distributive identities for `meet_prime` and `join`.
pub fn check_distributivity(
    a: &LatticeElement,
    b: &LatticeElement,
    c: &LatticeElement,
) -> Result<DistributivityReport> {
    let mut failures = Vec::new();
    let l1 = meet_prime(a, &join(b, c)?)?;
    let r1 = join(&meet_prime(a, b)?, &meet_prime(a, c)?)?;
    let meet_over_join = family_eq(&l1.family, &r1.family)?;
    if !meet_over_join {
        failures.push(IdentityFailure {
            identity: 1,
            lhs: l1.family,
            rhs: r1.family,
        });
    }
    let l2 = join(a, &meet_prime(b, c)?)?;
    let r2 = meet_prime(&join(a, b)?, &join(a, c)?)?;
    let join_over_meet = family_eq(&l2.family, &r2.family)?;
    if !join_over_meet {
        failures.push(IdentityFailure {
            identity: 2,
            lhs: l2.family,
            rhs: r2.family,
        });
    }
    Ok(DistributivityReport {
        meet_over_join,
        join_over_meet,
        failures,
    })
}

/// The union of two elements with least generating sets has one, contained
/// in the union of their closures.
pub fn check_union_lgs(a: &LatticeElement, b: &LatticeElement) -> Result<bool> {
    let la = a.lgs_or_err()?;
    let lb = b.lgs_or_err()?;
    let j = join(a, b)?;
    match &j.lgs {
        None => Ok(false),
        Some(l) => family_subset(l, &union(&closure(la), &closure(lb))),
    }
}

/// `a ≤ b` iff `a ∨ b = b`, and for elements with least generating sets
/// `a ⊆ b` forces `a ∧′ b = a`.
pub fn check_order_coherence(a: &LatticeElement, b: &LatticeElement) -> Result<bool> {
    let le = leq(a, b)?;
    let j = family_eq(&join(a, b)?.family, &b.family)?;
    if le != j {
        return Ok(false);
    }
    if le && a.has_lgs() && b.has_lgs() {
        return family_eq(&meet_prime(a, b)?.family, &a.family);
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ops {
    pub join: bool,
    pub meet_prime: bool,
}

impl Ops {
    pub const JOIN: Ops = Ops {
        join: true,
        meet_prime: false,
    };
    pub const BOTH: Ops = Ops {
        join: true,
        meet_prime: true,
    };
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OpTables {
    pub join: Vec<Vec<usize>>,
    pub meet_prime: Option<Vec<Vec<usize>>>,
    /// Plain intersection, when the result is itself an element.
    pub meet: Vec<Vec<Option<usize>>>,
}

#[derive(Clone, Debug)]
pub struct GeneratedLattice {
    pub elements: Vec<LatticeElement>,
    pub hasse: Vec<(usize, usize)>,
    pub tables: OpTables,
}

fn find(elems: &[LatticeElement], f: &Family) -> Result<Option<usize>> {
    if let Some(i) = elems.iter().position(|e| e.family == *f) {
        return Ok(Some(i));
    }
    for (i, e) in elems.iter().enumerate() {
        if family_eq(&e.family, f)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Closes `xs` under the chosen operations. Fails with `CapExceeded` once more
/// than `cap` distinct elements appear.
pub fn generate_lattice(xs: &[LatticeElement], ops: Ops, cap: usize) -> Result<GeneratedLattice> {
    if ops.meet_prime && xs.iter().any(|x| !x.has_lgs()) {
        return Err(Error::NoLgs);
    }
    let mut elems: Vec<LatticeElement> = Vec::new();
    for x in xs {
        if find(&elems, &x.family)?.is_none() {
            elems.push(x.clone());
        }
    }
    let mut done = 0;
    while done < elems.len() {
        let i = done;
        done += 1;
        for j in 0..=i {
            let mut produced = Vec::new();
            if ops.join {
                produced.push(join(&elems[i], &elems[j])?);
            }
            if ops.meet_prime {
                produced.push(meet_prime(&elems[i], &elems[j])?);
            }
            for p in produced {
                if find(&elems, &p.family)?.is_none() {
                    if elems.len() >= cap {
                        return Err(Error::CapExceeded { cap });
                    }
                    elems.push(p);
                }
            }
        }
    }
    let n = elems.len();
    let idx = |f: &Family, elems: &[LatticeElement]| -> Result<usize> {
        find(elems, f)?.ok_or_else(|| Error::Precondition("operation left the element set".into()))
    };
    let mut jt = vec![vec![0; n]; n];
    let mut mt = vec![vec![0; n]; n];
    let mut meet_t = vec![vec![None; n]; n];
    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            jt[i][j] = idx(&join(&elems[i], &elems[j])?.family, &elems)?;
            if ops.meet_prime {
                mt[i][j] = idx(&meet_prime(&elems[i], &elems[j])?.family, &elems)?;
            }
            meet_t[i][j] = match intersect(&elems[i].family, &elems[j].family) {
                Ok(f) => find(&elems, &f)?,
                Err(_) => None,
            };
            le[i][j] = leq(&elems[i], &elems[j])?;
        }
    }
    let mut hasse = Vec::new();
    for lo in 0..n {
        for hi in 0..n {
            if lo == hi || !le[lo][hi] || le[hi][lo] {
                continue;
            }
            let between = (0..n).any(|k| k != lo && k != hi && le[lo][k] && le[k][hi] && !le[k][lo] && !le[hi][k]);
            if !between {
                hasse.push((lo, hi));
            }
        }
    }
    Ok(GeneratedLattice {
        elements: elems,
        hasse,
        tables: OpTables {
            join: jt,
            meet_prime: ops.meet_prime.then_some(mt),
            meet: meet_t,
        },
    })
}

#[derive(Serialize)]
struct JsonNode {
    id: usize,
    name: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonLattice<'a> {
    nodes: Vec<JsonNode>,
    edges: Vec<[usize; 2]>,
    op_tables: &'a OpTables,
}

impl GeneratedLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, f: &Family) -> Result<Option<usize>> {
        find(&self.elements, f)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lattice {\n  rankdir=BT;\n");
        for (i, e) in self.elements.iter().enumerate() {
            let label = e.name().replace('"', "\\\"");
            let _ = writeln!(s, "  n{i} [label=\"{label}\"];");
        }
        for (lo, hi) in &self.hasse {
            let _ = writeln!(s, "  n{lo} -> n{hi};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = JsonLattice {
            nodes: self
                .elements
                .iter()
                .enumerate()
                .map(|(id, e)| JsonNode { id, name: e.name() })
                .collect(),
            edges: self.hasse.iter().map(|&(a, b)| [a, b]).collect(),
            op_tables: &self.tables,
        };
        serde_json::to_value(j).expect("serializable")
    }
}

/// Representative points of a family, used for membership probes.
pub fn probe_points(f: &Family) -> Vec<TheoryPoint> {
    let mut pts = sample_points(f, 4);
    for b in f.blocks() {
        if let Block::Fan(fan) = b {
            pts.push(fan.limit.clone());
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{Fan, PosSet};

    fn pt(s: &str) -> TheoryPoint {
        s.parse().unwrap()
    }

    fn el(f: Family) -> LatticeElement {
        LatticeElement::closure_of(&f).unwrap()
    }

    fn fan(dev: Vec<bool>) -> Family {
        Family::from_block(Block::Fan(Fan::new(pt("~0"), PosSet::all(), dev, false)))
    }

    #[test]
    fn meet_prime_of_disjoint_fans() {
        let a = el(fan(vec![]));
        let b = el(fan(vec![true]));
        let m = meet_prime(&a, &b).unwrap();
        assert_eq!(m.family, Family::points([pt("~0")]));
        assert!(intersect(a.lgs.as_ref().unwrap(), b.lgs.as_ref().unwrap()).unwrap().is_empty());
        let t2 = el(Family::points([pt("001~0")]));
        assert_eq!(meet_prime(&a, &t2).unwrap().family, t2.family);
    }

    #[test]
    fn order_and_decomposition() {
        let zero = el(Family::points([pt("~0")]));
        let p = Family::points([pt("111~0")]);
        let b = el(union(&fan(vec![]), &p));
        assert!(leq(&zero, &b).unwrap());
        assert!(!leq(&b, &zero).unwrap());
        let d = decompose(&zero, &b).unwrap();
        assert!(d.part21.is_empty());
        assert_eq!(d.part22, fan(vec![]));
        assert_eq!(d.part23, p);
        let a = el(fan(vec![]));
        let d2 = decompose(&a, &b).unwrap();
        assert_eq!(d2.part21, fan(vec![]));
        assert!(d2.part22.is_empty());
        assert!(check_finite_extension(&a, &b).unwrap());
        assert!(check_used_generators(&zero, &b).unwrap());
    }

    #[test]
    fn two_point_lattice() {
        let p = el(Family::points([pt("1~0")]));
        let q = el(Family::points([pt("01~0")]));
        let l = generate_lattice(&[p, q], Ops::BOTH, DEFAULT_CAP).unwrap();
        assert_eq!(l.len(), 4);
        assert_eq!(l.hasse.len(), 4);
        assert!(l.to_dot().contains("->"));
        assert_eq!(l.to_json()["edges"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn union_lgs_and_distributivity_on_fans() {
        let a = el(fan(vec![]));
        let b = el(fan(vec![true]));
        let p = el(Family::points([pt("111~0")]));
        assert!(check_union_lgs(&a, &b).unwrap());
        assert!(check_distributivity(&a, &b, &p).unwrap().holds());
        assert!(check_order_coherence(&p, &join(&a, &p).unwrap()).unwrap());
    }
}
