use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::calculus::{block_is_empty, block_minus, block_subset, mask_block};
use super::{clopen_count, fan_hits, intersect_blocks, Block, Fan, FanArray, Mask, PosSet};
use crate::error::Result;
use crate::stone::{SentenceExpr, TheoryPoint, Trichotomy};

/// Finite union of blocks, kept in normal form.
#[derive(Clone, Debug, Default)]
pub struct Family {
    blocks: Vec<Block>,
    pub name: Option<String>,
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.blocks == other.blocks
    }
}

impl Eq for Family {}

impl Family {
    pub fn empty() -> Self {
        Family::default()
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = Block>) -> Self {
        let mut cur: Vec<Block> = blocks.into_iter().collect();
        loop {
            let next = normalize(&cur);
            if next == cur {
                return Family {
                    blocks: next,
                    name: None,
                };
            }
            cur = next;
        }
    }

    pub fn from_block(b: Block) -> Self {
        Self::from_blocks([b])
    }

    pub fn points(pts: impl IntoIterator<Item = TheoryPoint>) -> Self {
        Self::from_block(Block::finset(pts))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Finitely many points and nothing else.
    pub fn finite_points(&self) -> Option<Vec<TheoryPoint>> {
        match self.blocks.as_slice() {
            [] => Some(Vec::new()),
            [Block::FinSet(s)] => Some(s.iter().cloned().collect()),
            _ => None,
        }
    }

    pub fn member(&self, p: &TheoryPoint) -> bool {
        self.blocks.iter().any(|b| b.member(p))
    }
}

pub fn member(f: &Family, p: &TheoryPoint) -> bool {
    f.member(p)
}

pub fn family_count(f: &Family, phi: &SentenceExpr) -> Trichotomy {
    f.blocks
        .iter()
        .enumerate()
        .fold(Trichotomy::Empty, |acc, (i, b)| {
            acc.merge(clopen_count(b, phi).with_witness(i))
        })
}

pub fn union(a: &Family, b: &Family) -> Family {
    Family::from_blocks(a.blocks.iter().chain(&b.blocks).cloned())
}

pub fn intersect(a: &Family, b: &Family) -> Result<Family> {
    let mut out = Vec::new();
    for x in &a.blocks {
        for y in &b.blocks {
            out.extend(intersect_blocks(x, y)?);
        }
    }
    Ok(Family::from_blocks(out))
}

pub fn family_subset(a: &Family, b: &Family) -> Result<bool> {
    for x in &a.blocks {
        if !block_subset(x, &b.blocks)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn family_eq(a: &Family, b: &Family) -> Result<bool> {
    if a.blocks == b.blocks {
        return Ok(true);
    }
    Ok(family_subset(a, b)? && family_subset(b, a)?)
}

/// Set difference `a ∖ b`.
pub(crate) fn difference(a: &Family, b: &Family) -> Result<Family> {
    let mut out = Vec::new();
    for x in &a.blocks {
        out.extend(block_minus(x, &b.blocks)?);
    }
    Ok(Family::from_blocks(out))
}

#[derive(Default)]
struct Parts {
    points: BTreeSet<TheoryPoint>,
    fans: BTreeMap<(TheoryPoint, Vec<bool>), (PosSet, bool)>,
    cubes: BTreeSet<Mask>,
    arrays: BTreeMap<Mask, Vec<FanArray>>,
}

impl Parts {
    fn add(&mut self, b: &Block) {
        match b {
            Block::FinSet(s) => self.points.extend(s.iter().cloned()),
            Block::Fan(f) => {
                if f.flips.is_finite() {
                    self.points.extend(f.points());
                    if f.include_limit {
                        self.points.insert(f.limit.clone());
                    }
                } else {
                    let e = self
                        .fans
                        .entry((f.limit.clone(), f.dev.clone()))
                        .or_insert((PosSet::empty(), false));
                    e.0 = e.0.union(&f.flips);
                    e.1 |= f.include_limit;
                }
            }
            Block::Cube(m) => match m.finite_points() {
                Some(pts) => self.points.extend(pts),
                None => {
                    self.cubes.insert(m.clone());
                }
            },
            Block::FanArray(a) => {
                if a.include_base {
                    self.add(&mask_block(a.base.clone()));
                }
                if let Some(pts) = a.finite_points() {
                    self.points.extend(pts);
                } else {
                    self.arrays.entry(a.base.clone()).or_default().push(a.without_base());
                }
            }
        }
    }
}

fn merge_arrays(base: &Mask, group: &[FanArray]) -> FanArray {
    let coding = group
        .iter()
        .fold(PosSet::empty(), |acc, a| acc.union(&a.coding));
    let excluded: Vec<TheoryPoint> = group
        .iter()
        .flat_map(|a| a.excluded.iter())
        .filter(|p| !group.iter().any(|a| a.member(p)))
        .cloned()
        .collect();
    FanArray::new(base.clone(), coding, false).with_excluded(excluded)
}

fn normalize(blocks: &[Block]) -> Vec<Block> {
    let mut parts = Parts::default();
    for b in blocks {
        if !block_is_empty(b) {
            parts.add(b);
        }
    }
    let mut arrays: Vec<FanArray> = parts
        .arrays
        .iter()
        .map(|(base, g)| merge_arrays(base, g))
        .collect();

    // Cubes: absorb into equal array bases, drop those contained elsewhere.
    let cubes: Vec<Mask> = parts.cubes.iter().cloned().collect();
    let mut kept_cubes = Vec::new();
    for (i, c) in cubes.iter().enumerate() {
        if let Some(a) = arrays.iter_mut().find(|a| a.base == *c) {
            a.include_base = true;
            continue;
        }
        let inside_other = cubes
            .iter()
            .enumerate()
            .any(|(j, d)| j != i && d.contains_mask(c) && (!c.contains_mask(d) || j < i));
        if !inside_other {
            kept_cubes.push(c.clone());
        }
    }
    let mut kept: Vec<Block> = Vec::new();
    for c in &kept_cubes {
        let in_base = arrays
            .iter()
            .any(|a| a.include_base && a.base.contains_mask(c));
        if !in_base {
            kept.push(Block::Cube(c.clone()));
        }
    }
    for a in &mut arrays {
        if a.include_base && kept_cubes.iter().any(|c| *c != a.base && c.contains_mask(&a.base)) {
            a.include_base = false;
        }
    }
    kept.extend(arrays.into_iter().map(Block::FanArray));

    // Fan points already covered by cubes or arrays are dropped.
    let mut points = parts.points;
    let mut fans: Vec<Fan> = Vec::new();
    for ((limit, dev), (flips, inc)) in parts.fans {
        let fan = Fan::new(limit, flips, dev, inc);
        let covered = kept
            .iter()
            .fold(PosSet::empty(), |acc, x| acc.union(&fan_hits(&fan, x)));
        let fan = Fan::new(fan.limit, fan.flips.difference(&covered), fan.dev, fan.include_limit);
        if fan.flips.is_finite() {
            points.extend(fan.points());
            if fan.include_limit {
                points.insert(fan.limit.clone());
            }
        } else {
            fans.push(fan);
        }
    }

    // Stray points: absorb into fans and array exclusions, drop when covered.
    let mut rest = BTreeSet::new();
    'pts: for q in points {
        for f in &mut fans {
            if f.limit == q {
                f.include_limit = true;
                continue 'pts;
            }
            let h = f.limit.first_difference(&q).expect("distinct");
            if f.point(h) == q {
                f.flips = f.flips.union(&PosSet::finite([h]));
                continue 'pts;
            }
        }
        for b in &mut kept {
            if let Block::FanArray(a) = b {
                if a.excluded.remove(&q) {
                    continue 'pts;
                }
            }
        }
        if !kept.iter().any(|b| b.member(&q)) {
            rest.insert(q);
        }
    }

    let mut out: Vec<Block> = Vec::new();
    if !rest.is_empty() {
        out.push(Block::FinSet(rest));
    }
    let limits: Vec<TheoryPoint> = fans.iter().map(|f| f.limit.clone()).collect();
    let others: Vec<Block> = fans.iter().cloned().map(Block::Fan).chain(kept.iter().cloned()).collect();
    let present = |l: &TheoryPoint| others.iter().any(|b| b.member(l)) || out.iter().any(|b| b.member(l));
    let flags: Vec<bool> = limits.iter().map(present).collect();
    for (mut f, flag) in fans.into_iter().zip(flags) {
        f.include_limit = flag;
        out.push(Block::Fan(f));
    }
    out.extend(kept);
    out.sort();
    out
}

fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::FinSet(s) => write!(f, "fin{{{}}}", join(s)),
            Block::Fan(fan) => {
                write!(f, "fan(limit={}, ", fan.limit)?;
                match fan.flips.as_arithmetic() {
                    Some((a, b)) => write!(f, "stride={a}, offset={b}")?,
                    None => write!(f, "flips={}", fan.flips)?,
                }
                let dev: String = fan.dev.iter().map(|&b| if b { '1' } else { '0' }).collect();
                write!(f, ", dev={dev}")?;
                if fan.include_limit {
                    write!(f, ", withlimit")?;
                }
                write!(f, ")")
            }
            Block::Cube(m) => write!(f, "cube(mask={m})"),
            Block::FanArray(a) => {
                write!(f, "fanarray(base=cube(mask={}), ", a.base)?;
                match a.coding.as_arithmetic() {
                    Some((s, c)) => write!(f, "c={c}, stride={s}")?,
                    None => write!(f, "coding={}", a.coding)?,
                }
                if a.include_base {
                    write!(f, ", withbase")?;
                }
                if !a.excluded.is_empty() {
                    write!(f, ", exclude=[{}]", join(&a.excluded))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// DSL expression denoting the family.
impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.blocks.as_slice() {
            [] => write!(f, "empty"),
            [b] => write!(f, "{b}"),
            bs => write!(f, "union({})", join(bs)),
        }
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stone::SentenceExpr as S;

    fn pt(s: &str) -> TheoryPoint {
        s.parse().unwrap()
    }

    fn fan0(with: bool) -> Family {
        Family::from_block(Block::Fan(Fan::new(pt("~0"), PosSet::all(), vec![], with)))
    }

    fn cube0() -> Family {
        Family::from_block(Block::Cube(Mask::parse("~F0").unwrap()))
    }

    #[test]
    fn union_absorbs_limit_and_points() {
        let u = union(&fan0(false), &Family::points([pt("~0")]));
        assert_eq!(u, fan0(true));
        let v = union(&Family::points([pt("0001~0")]), &fan0(true));
        assert_eq!(v, fan0(true));
        let w = union(&Family::points([pt("1~0")]), &Family::points([pt("01~0")]));
        assert_eq!(w.finite_points().unwrap().len(), 2);
        assert_eq!(union(&cube0(), &Family::empty()), cube0());
    }

    #[test]
    fn subset_and_equality() {
        assert!(family_subset(&fan0(false), &fan0(true)).unwrap());
        assert!(!family_eq(&fan0(false), &fan0(true)).unwrap());
        assert!(family_subset(&Family::points([pt("0001~0")]), &fan0(false)).unwrap());
        assert!(family_eq(&cube0(), &cube0()).unwrap());
    }

    #[test]
    fn intersections() {
        let t = fan0(true);
        let s = Family::from_block(Block::Fan(Fan::new(pt("~0"), PosSet::all(), vec![true], true)));
        let meet = intersect(&t, &s).unwrap();
        assert_eq!(meet, Family::points([pt("~0")]));
        assert_eq!(intersect(&cube0(), &cube0()).unwrap(), cube0());
        let z = intersect(&Family::points([pt("~0")]), &cube0()).unwrap();
        assert_eq!(z, Family::points([pt("~0")]));
        // t_h lies in the cube exactly when h is even.
        let fc = intersect(&fan0(true), &cube0()).unwrap();
        assert!(fc.member(&pt("001~0")) && !fc.member(&pt("01~0")) && fc.member(&pt("~0")));
    }

    #[test]
    fn counts_merge() {
        let f = Family::points([pt("~0"), pt("1~0")]);
        assert_eq!(family_count(&f, &S::atom(0)), Trichotomy::Finite(vec![pt("1~0")]));
        assert!(family_count(&Family::empty(), &S::True).is_empty());
        let g = union(&fan0(false), &Family::points([pt("~01")]));
        assert!(family_count(&g, &S::not(S::atom(0))).is_infinite());
    }

    #[test]
    fn display_is_dsl() {
        assert_eq!(fan0(true).to_string(), "fan(limit=~0, stride=1, offset=0, dev=, withlimit)");
        assert_eq!(cube0().to_string(), "cube(mask=~F0)");
    }
}
