//! Finite-depth ground truth. Families are projected onto their first `n`
//! coordinates by direct enumeration, without going through the symbolic
//! neighbourhood counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::blocks::{Block, Cell, Fan, FanArray, Family, Mask};
use crate::error::{Error, Result};
use crate::stone::{TheoryPoint, Trichotomy};

pub const MAX_DEPTH: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleCell {
    Finite(BTreeSet<TheoryPoint>),
    Infinite,
}

impl OracleCell {
    fn absorb(&mut self, other: OracleCell) {
        match (self as &mut OracleCell, other) {
            (OracleCell::Infinite, _) => {}
            (s, OracleCell::Infinite) => *s = OracleCell::Infinite,
            (OracleCell::Finite(a), OracleCell::Finite(b)) => a.extend(b),
        }
    }

    fn trichotomy(cell: Option<&OracleCell>) -> Trichotomy {
        match cell {
            None => Trichotomy::Empty,
            Some(OracleCell::Infinite) => Trichotomy::Infinite(0),
            Some(OracleCell::Finite(s)) if s.is_empty() => Trichotomy::Empty,
            Some(OracleCell::Finite(s)) => Trichotomy::Finite(s.iter().cloned().collect()),
        }
    }
}

/// Sparse map from length-`depth` words to the family members carrying them.
#[derive(Clone, Debug)]
pub struct DepthProjection {
    pub depth: usize,
    pub cells: BTreeMap<Vec<bool>, OracleCell>,
}

impl DepthProjection {
    fn put(&mut self, word: Vec<bool>, cell: OracleCell) {
        debug_assert_eq!(word.len(), self.depth);
        match self.cells.get_mut(&word) {
            Some(c) => c.absorb(cell),
            None => {
                self.cells.insert(word, cell);
            }
        }
    }

    fn put_point(&mut self, p: &TheoryPoint) {
        let w = p.bits(self.depth);
        self.put(w, OracleCell::Finite(BTreeSet::from([p.clone()])));
    }

    /// Members whose first `word.len() <= depth` bits are `word`.
    pub fn count(&self, word: &[bool]) -> Trichotomy {
        assert!(word.len() <= self.depth);
        let mut acc: Option<OracleCell> = None;
        for (k, c) in self.cells.range(word.to_vec()..) {
            if !k.starts_with(word) {
                break;
            }
            match &mut acc {
                None => acc = Some(c.clone()),
                Some(a) => a.absorb(c.clone()),
            }
        }
        OracleCell::trichotomy(acc.as_ref())
    }

    /// `prefix<TAB>EMPTY|FINITE:k|INF` per line; every word when `full`,
    /// otherwise only reachable cells.
    pub fn dump(&self, full: bool) -> String {
        let mut out = String::new();
        let mut line = |w: &[bool], t: Trichotomy| {
            let bits: String = w.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let v = match t {
                Trichotomy::Empty => "EMPTY".to_string(),
                Trichotomy::Finite(p) => format!("FINITE:{}", p.len()),
                Trichotomy::Infinite(_) => "INF".to_string(),
            };
            let _ = writeln!(out, "{bits}\t{v}");
        };
        if full {
            for w in all_words(self.depth) {
                line(&w, OracleCell::trichotomy(self.cells.get(&w)));
            }
        } else {
            for (w, c) in &self.cells {
                line(w, OracleCell::trichotomy(Some(c)));
            }
        }
        out
    }
}

pub fn all_words(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |m| (0..n).map(|i| m >> (n - 1 - i) & 1 == 1).collect())
}

pub fn project(f: &Family, n: usize) -> Result<DepthProjection> {
    if n > MAX_DEPTH {
        return Err(Error::DepthTooLarge(n));
    }
    let mut proj = DepthProjection {
        depth: n,
        cells: BTreeMap::new(),
    };
    for b in f.blocks() {
        match b {
            Block::FinSet(s) => s.iter().for_each(|p| proj.put_point(p)),
            Block::Fan(fan) => project_fan(&mut proj, fan),
            Block::Cube(m) => project_mask(&mut proj, m),
            Block::FanArray(a) => project_array(&mut proj, a),
        }
    }
    Ok(proj)
}

fn fan_member(fan: &Fan, h: usize) -> TheoryPoint {
    let mut bits: Vec<bool> = (0..h).map(|i| fan.limit.bit(i)).collect();
    bits.push(!fan.limit.bit(h));
    bits.extend(fan.dev.iter().copied());
    TheoryPoint::finite(&bits)
}

fn project_fan(proj: &mut DepthProjection, fan: &Fan) {
    let n = proj.depth;
    for h in (0..n).filter(|&h| fan.flips.contains(h)) {
        proj.put_point(&fan_member(fan, h));
    }
    let lw = fan.limit.bits(n);
    if fan.flips.is_finite() {
        for h in fan.flips.iter().filter(|&h| h >= n) {
            proj.put_point(&fan_member(fan, h));
        }
    } else {
        proj.put(lw, OracleCell::Infinite);
    }
    if fan.include_limit {
        proj.put_point(&fan.limit);
    }
}

/// Mask-consistent words of length `n`.
fn consistent_words(m: &Mask, n: usize) -> Vec<Vec<bool>> {
    let mut words = vec![Vec::with_capacity(n)];
    for i in 0..n {
        let opts: &[bool] = match m.cell(i) {
            Cell::Free => &[false, true],
            Cell::Zero => &[false],
            Cell::One => &[true],
        };
        words = words
            .into_iter()
            .flat_map(|w| {
                opts.iter().map(move |&b| {
                    let mut w2 = w.clone();
                    w2.push(b);
                    w2
                })
            })
            .collect();
    }
    words
}

fn project_mask(proj: &mut DepthProjection, m: &Mask) {
    if m.has_infinite_free() {
        for w in consistent_words(m, proj.depth) {
            proj.put(w, OracleCell::Infinite);
        }
    } else {
        let free: Vec<usize> = (0..m.word().prefix().len())
            .filter(|&i| m.cell(i) == Cell::Free)
            .collect();
        let fill = m.zero_fill();
        for bits in 0u64..1 << free.len() {
            let len = free.last().map_or(0, |x| x + 1);
            let mut w = fill.bits(len);
            for (j, &pos) in free.iter().enumerate() {
                w[pos] = bits >> j & 1 == 1;
            }
            proj.put_point(&fill.with_prefix(&w));
        }
    }
}

/// Fan points of the array coded at `p`, built by brute force.
fn array_column(a: &FanArray, p: usize) -> Vec<TheoryPoint> {
    let Some(v) = a.base.cell(p).fixed() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for w in consistent_words(&a.base, p) {
        let mut bits = w;
        bits.push(!v);
        let tail = a.base.zero_fill();
        let pt = tail.with_prefix(&bits);
        if !a.excluded.contains(&pt) {
            out.push(pt);
        }
    }
    out
}

fn project_array(proj: &mut DepthProjection, a: &FanArray) {
    let n = proj.depth;
    if a.include_base {
        project_mask(proj, &a.base);
    }
    for p in (0..n).filter(|&p| a.coding.contains(p)) {
        for pt in array_column(a, p) {
            proj.put_point(&pt);
        }
    }
    if a.coding.is_finite() {
        for p in a.coding.iter().filter(|&p| p >= n) {
            for pt in array_column(a, p) {
                proj.put_point(&pt);
            }
        }
    } else {
        // Each coding position beyond the depth contributes a point above
        // every consistent word.
        for w in consistent_words(&a.base, n) {
            proj.put(w, OracleCell::Infinite);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    /// Every prefix cell up to the depth is infinite: consistent with
    /// membership in the closure, but not decided.
    Inconclusive,
}

pub fn oracle_in_closure(t: &TheoryPoint, f: &Family, n: usize) -> Result<Verdict> {
    let proj = project(f, n)?;
    let bits = t.bits(n);
    let mut listed = false;
    for k in 0..=n {
        match proj.count(&bits[..k]) {
            Trichotomy::Empty => return Ok(Verdict::No),
            Trichotomy::Finite(pts) => {
                if !pts.contains(t) {
                    return Ok(Verdict::No);
                }
                listed = true;
            }
            Trichotomy::Infinite(_) => {}
        }
    }
    if listed {
        return Ok(Verdict::Yes);
    }
    if let Some(OracleCell::Finite(s)) = proj.cells.get(&bits) {
        if s.contains(t) {
            return Ok(Verdict::Yes);
        }
    }
    Ok(Verdict::Inconclusive)
}

/// Points isolated by a prefix of length at most `n`, with the shortest such
/// prefix.
pub fn oracle_isolated(f: &Family, n: usize) -> Result<Vec<(TheoryPoint, Vec<bool>)>> {
    let proj = project(f, n)?;
    let mut out = Vec::new();
    let candidates: BTreeSet<TheoryPoint> = proj
        .cells
        .values()
        .filter_map(|c| match c {
            OracleCell::Finite(s) => Some(s.iter().cloned()),
            OracleCell::Infinite => None,
        })
        .flatten()
        .collect();
    for p in candidates {
        let bits = p.bits(n);
        let single = Trichotomy::Finite(vec![p.clone()]);
        if let Some(k) = (0..=n).find(|&k| proj.count(&bits[..k]) == single) {
            out.push((p, bits[..k].to_vec()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::PosSet;

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
    fn projections() {
        let p = project(&fan0(false), 2).unwrap();
        assert_eq!(p.count(&[true, false]), Trichotomy::Finite(vec![pt("1~0")]));
        assert_eq!(p.count(&[false, true]), Trichotomy::Finite(vec![pt("01~0")]));
        assert!(p.count(&[false, false]).is_infinite());
        assert!(p.count(&[true, true]).is_empty());
        let z = project(&Family::points([pt("~0")]), 3).unwrap();
        assert_eq!(z.cells.len(), 1);
        let c = project(&cube0(), 2).unwrap();
        assert!(c.count(&[false, false]).is_infinite() && c.count(&[true, false]).is_infinite());
        assert!(c.count(&[false, true]).is_empty());
        assert!(matches!(project(&cube0(), 25), Err(Error::DepthTooLarge(25))));
        assert_eq!(c.dump(true).lines().count(), 4);
        assert!(c.dump(false).contains("10\tINF"));
    }

    #[test]
    fn closure_verdicts() {
        assert_eq!(oracle_in_closure(&pt("~0"), &fan0(false), 8).unwrap(), Verdict::Inconclusive);
        assert_eq!(oracle_in_closure(&pt("11~0"), &fan0(false), 2).unwrap(), Verdict::No);
        let p = Family::points([pt("01~1")]);
        assert_eq!(oracle_in_closure(&pt("01~1"), &p, 1).unwrap(), Verdict::Yes);
    }

    #[test]
    fn isolation() {
        let iso = oracle_isolated(&fan0(true), 6).unwrap();
        let pts: Vec<TheoryPoint> = iso.iter().map(|(p, _)| p.clone()).collect();
        let expect: Vec<TheoryPoint> = (0..6).map(|h| {
            let mut b = vec![false; h];
            b.push(true);
            TheoryPoint::finite(&b)
        }).collect();
        let mut expect_sorted = expect.clone();
        expect_sorted.sort();
        assert_eq!(pts, expect_sorted);
        assert!(oracle_isolated(&cube0(), 12).unwrap().is_empty());
        let two = Family::points([pt("0~0"), pt("01~0")]);
        assert_eq!(oracle_isolated(&two, 2).unwrap().len(), 2);
    }
}
