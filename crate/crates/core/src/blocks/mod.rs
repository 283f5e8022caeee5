//! Symbolic blocks: the four finitely described kinds of theory families and
//! their exact membership and neighbourhood-count procedures.

mod calculus;
mod family;

use std::collections::BTreeSet;
use std::fmt;

use crate::stone::{models, satisfies, SentenceExpr, TheoryPoint, Trichotomy};
use crate::word::{lcm, UltWord};

pub use calculus::{fan_hits, intersect_blocks};
pub use family::{family_count, family_eq, family_subset, intersect, member, union, Family};
pub(crate) use calculus::mask_block;
pub(crate) use family::difference;

/// Ultimately periodic subset of the naturals, stored as its characteristic
/// word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosSet(UltWord<bool>);

impl PosSet {
    pub fn empty() -> Self {
        PosSet(UltWord::constant(false))
    }

    pub fn all() -> Self {
        PosSet(UltWord::constant(true))
    }

    /// `{offset + stride·k : k ≥ 0}`.
    pub fn arithmetic(stride: usize, offset: usize) -> Self {
        assert!(stride > 0);
        let mut period = vec![false; stride];
        period[0] = true;
        PosSet(UltWord::new(vec![false; offset], period).expect("nonempty"))
    }

    pub fn finite(elems: impl IntoIterator<Item = usize>) -> Self {
        let elems: BTreeSet<usize> = elems.into_iter().collect();
        let len = elems.iter().next_back().map_or(0, |m| m + 1);
        let prefix = (0..len).map(|i| elems.contains(&i)).collect();
        PosSet(UltWord::new(prefix, vec![false]).expect("nonempty"))
    }

    /// Positions strictly greater than `n`.
    pub fn above(n: usize) -> Self {
        PosSet(UltWord::new(vec![false; n + 1], vec![true]).expect("nonempty"))
    }

    pub fn from_word(word: UltWord<bool>) -> Self {
        PosSet(word)
    }

    pub fn from_predicate(threshold: usize, modulus: usize, f: impl Fn(usize) -> bool) -> Self {
        let set = PosSet(UltWord::from_fn(threshold, modulus, &f));
        debug_assert!(
            (threshold..threshold + 2 * modulus).all(|i| set.contains(i) == f(i)),
            "sampled predicate is not periodic past its threshold"
        );
        set
    }

    pub fn word(&self) -> &UltWord<bool> {
        &self.0
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.at(n)
    }

    pub fn is_finite(&self) -> bool {
        self.0.period() == [false]
    }

    pub fn is_empty(&self) -> bool {
        self.is_finite() && self.0.prefix().is_empty()
    }

    /// Ascending elements; infinite for infinite sets.
    pub fn iter(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        if self.is_finite() {
            Box::new((0..self.0.prefix().len()).filter(move |&i| self.contains(i)))
        } else {
            Box::new((0..).filter(move |&i| self.contains(i)))
        }
    }

    /// Elements `<= bound`.
    pub fn upto(&self, bound: usize) -> Vec<usize> {
        (0..=bound).filter(|&i| self.contains(i)).collect()
    }

    pub fn count(&self) -> Option<usize> {
        self.is_finite()
            .then(|| self.0.prefix().iter().filter(|&&b| b).count())
    }

    pub fn max_elem(&self) -> Option<usize> {
        if !self.is_finite() {
            return None;
        }
        self.0.prefix().len().checked_sub(1)
    }

    pub fn min_elem(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn union(&self, other: &Self) -> Self {
        PosSet(self.0.zip_with(&other.0, |a, b| a || b))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        PosSet(self.0.zip_with(&other.0, |a, b| a && b))
    }

    pub fn difference(&self, other: &Self) -> Self {
        PosSet(self.0.zip_with(&other.0, |a, b| a && !b))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn modulus(&self) -> usize {
        self.0.period().len()
    }

    pub fn threshold(&self) -> usize {
        self.0.prefix().len()
    }

    /// `Some((stride, offset))` when the set is a single infinite progression.
    pub fn as_arithmetic(&self) -> Option<(usize, usize)> {
        let pre = self.0.prefix();
        let per = self.0.period();
        let ones: Vec<usize> = (0..per.len()).filter(|&i| per[i]).collect();
        if ones.len() != 1 || pre.iter().any(|&b| b) {
            return None;
        }
        Some((per.len(), pre.len() + ones[0]))
    }
}

impl fmt::Display for PosSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        write!(f, "{}~{}", bits(self.0.prefix()), bits(self.0.period()))
    }
}

impl fmt::Debug for PosSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PosSet({self})")
    }
}

/// One coordinate constraint of a cube mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Cell {
    Free,
    Zero,
    One,
}

impl Cell {
    pub fn fixed(self) -> Option<bool> {
        match self {
            Cell::Free => None,
            Cell::Zero => Some(false),
            Cell::One => Some(true),
        }
    }

    pub fn admits(self, bit: bool) -> bool {
        self.fixed().map_or(true, |v| v == bit)
    }


    fn symbol(self) -> char {
        match self {
            Cell::Free => 'F',
            Cell::Zero => '0',
            Cell::One => '1',
        }
    }
}

/// Ultimately periodic map from coordinates to [`Cell`]s; denotes the closed
/// set of points consistent with it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mask(UltWord<Cell>);

impl Mask {
    pub fn new(prefix: Vec<Cell>, period: Vec<Cell>) -> Option<Self> {
        UltWord::new(prefix, period).map(Mask)
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (pre, per) = s.split_once('~')?;
        let cells = |t: &str| -> Option<Vec<Cell>> {
            t.chars()
                .map(|c| match c {
                    'F' | 'f' => Some(Cell::Free),
                    '0' => Some(Cell::Zero),
                    '1' => Some(Cell::One),
                    _ => None,
                })
                .collect()
        };
        Mask::new(cells(pre)?, cells(per)?)
    }

    pub fn word(&self) -> &UltWord<Cell> {
        &self.0
    }

    pub fn cell(&self, i: usize) -> Cell {
        self.0.at(i)
    }

    /// Positions matching `pred`.
    fn positions(&self, pred: impl Fn(Cell) -> bool) -> PosSet {
        PosSet(self.0.map(pred))
    }

    pub fn free_positions(&self) -> PosSet {
        self.positions(|c| c == Cell::Free)
    }

    pub fn fixed_positions(&self) -> PosSet {
        self.positions(|c| c != Cell::Free)
    }

    pub fn has_infinite_free(&self) -> bool {
        self.0.period().contains(&Cell::Free)
    }

    pub fn admits(&self, p: &TheoryPoint) -> bool {
        self.violations(p).is_empty()
    }

    /// Positions where `p` contradicts a fixed cell.
    pub fn violations(&self, p: &TheoryPoint) -> PosSet {
        PosSet(self.0.zip_with(p.word(), |c, b| !c.admits(b)))
    }

    /// Free positions where `p` carries a 1.
    pub fn free_ones(&self, p: &TheoryPoint) -> PosSet {
        PosSet(self.0.zip_with(p.word(), |c, b| c == Cell::Free && b))
    }

    /// The mask point with every free coordinate set to 0.
    pub fn zero_fill(&self) -> TheoryPoint {
        TheoryPoint::from_word(self.0.map(|c| c == Cell::One))
    }

    /// Cellwise meet together with the set of conflicting positions. At a
    /// conflict the merged cell keeps `self`'s value.
    pub fn merge(&self, other: &Mask) -> (Mask, PosSet) {
        let merged = self.0.zip_with(&other.0, |a, b| match (a, b) {
            (Cell::Free, x) => x,
            (x, _) => x,
        });
        let conflicts = self
            .0
            .zip_with(&other.0, |a, b| matches!((a.fixed(), b.fixed()), (Some(x), Some(y)) if x != y));
        (Mask(merged), PosSet(conflicts))
    }

    /// Set containment `other ⊆ self`.
    pub fn contains_mask(&self, other: &Mask) -> bool {
        let bad = self
            .0
            .zip_with(&other.0, |big, small| match big.fixed() {
                None => false,
                Some(v) => small.fixed() != Some(v),
            });
        PosSet(bad).is_empty()
    }

    /// All members, when there are finitely many free coordinates.
    pub fn finite_points(&self) -> Option<Vec<TheoryPoint>> {
        if self.has_infinite_free() {
            return None;
        }
        let free: Vec<usize> = self.free_positions().iter().collect();
        let base = self.zero_fill();
        let len = free.last().map_or(0, |m| m + 1);
        let template = base.bits(len);
        let mut out = Vec::with_capacity(1 << free.len());
        for bits in 0u64..(1u64 << free.len()) {
            let mut w = template.clone();
            for (j, &pos) in free.iter().enumerate() {
                w[pos] = bits >> j & 1 == 1;
            }
            out.push(base.with_prefix(&w));
        }
        out.sort();
        Some(out)
    }

    /// Whether some mask-consistent point satisfies `phi`.
    pub fn satisfiable(&self, phi: &SentenceExpr) -> bool {
        let vars: Vec<usize> = phi
            .atoms()
            .into_iter()
            .filter(|&i| self.cell(i) == Cell::Free)
            .collect();
        !models(phi, &vars, &|i| self.cell(i).fixed(), true).is_empty()
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |v: &[Cell]| v.iter().map(|c| c.symbol()).collect::<String>();
        write!(f, "{}~{}", s(self.0.prefix()), s(self.0.period()))
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask({self})")
    }
}

/// Sequence of points converging to `limit`: the member at flip position `h`
/// agrees with the limit below `h`, flips bit `h`, continues with `dev` and
/// then zeros.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Fan {
    pub limit: TheoryPoint,
    pub flips: PosSet,
    pub dev: Vec<bool>,
    pub include_limit: bool,
}

impl Fan {
    pub fn new(limit: TheoryPoint, flips: PosSet, mut dev: Vec<bool>, include_limit: bool) -> Self {
        while dev.last() == Some(&false) {
            dev.pop();
        }
        Fan {
            limit,
            flips,
            dev,
            include_limit,
        }
    }

    /// The member flipping at `h` (defined for every `h`, whether or not it
    /// is a flip position of this fan).
    pub fn point(&self, h: usize) -> TheoryPoint {
        let mut bits = self.limit.bits(h + 1);
        bits[h] = !bits[h];
        bits.extend_from_slice(&self.dev);
        TheoryPoint::finite(&bits)
    }

    pub fn member(&self, p: &TheoryPoint) -> bool {
        match self.limit.first_difference(p) {
            None => self.include_limit,
            Some(h) => self.flips.contains(h) && self.point(h) == *p,
        }
    }

    /// Members without the limit, in flip order.
    pub fn points(&self) -> impl Iterator<Item = TheoryPoint> + '_ {
        self.flips.iter().map(move |h| self.point(h))
    }

    fn clopen_count(&self, phi: &SentenceExpr) -> Trichotomy {
        let m = phi.max_index().unwrap_or(0);
        let limit_sat = satisfies(&self.limit, phi);
        if limit_sat && !self.flips.is_finite() {
            return Trichotomy::Infinite(0);
        }
        let hs: Vec<usize> = if self.flips.is_finite() {
            self.flips.iter().collect()
        } else {
            self.flips.upto(m)
        };
        let mut pts: Vec<TheoryPoint> = hs
            .into_iter()
            .map(|h| self.point(h))
            .filter(|p| satisfies(p, phi))
            .collect();
        if self.include_limit && limit_sat {
            pts.push(self.limit.clone());
        }
        Trichotomy::from_points(pts)
    }
}

/// Fans attached to the canonical dense subset of a base mask. Members are
/// the points `e ⊕ δ_p` where `e` is mask-consistent with all free
/// coordinates beyond `p` equal to 0 and `p` is a coding position (always a
/// fixed coordinate of the base).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FanArray {
    pub base: Mask,
    pub coding: PosSet,
    pub include_base: bool,
    /// Finitely many fan points removed from the array.
    pub excluded: BTreeSet<TheoryPoint>,
}

impl FanArray {
    pub fn new(base: Mask, coding: PosSet, include_base: bool) -> Self {
        let coding = coding.intersection(&base.fixed_positions());
        FanArray {
            base,
            coding,
            include_base,
            excluded: BTreeSet::new(),
        }
    }

    pub fn with_excluded(mut self, excluded: impl IntoIterator<Item = TheoryPoint>) -> Self {
        let keep: Vec<TheoryPoint> = excluded
            .into_iter()
            .filter(|p| self.is_fan_point(p))
            .collect();
        self.excluded.extend(keep);
        self
    }

    pub fn without_base(&self) -> Self {
        FanArray {
            include_base: false,
            ..self.clone()
        }
    }

    /// Membership in the fan part, ignoring exclusions.
    pub fn is_fan_point(&self, p: &TheoryPoint) -> bool {
        let viol = self.base.violations(p);
        if viol.count() != Some(1) {
            return false;
        }
        let v = viol.min_elem().expect("one violation");
        if !self.coding.contains(v) {
            return false;
        }
        let ones = self.base.free_ones(p);
        ones.max_elem().map_or(ones.is_empty(), |m| m < v)
    }

    pub fn member(&self, p: &TheoryPoint) -> bool {
        if self.excluded.contains(p) {
            return false;
        }
        if self.include_base && self.base.admits(p) {
            return true;
        }
        self.is_fan_point(p)
    }

    /// The fan points coded at `p` whose free coordinates below `p` satisfy
    /// `phi` (together with the rest of the point). Exclusions are applied.
    pub fn column(&self, p: usize, phi: &SentenceExpr) -> Vec<TheoryPoint> {
        let Some(fixed) = self.base.cell(p).fixed() else {
            return Vec::new();
        };
        let vars: Vec<usize> = (0..p).filter(|&i| self.base.cell(i) == Cell::Free).collect();
        let base = &self.base;
        let lookup = |i: usize| -> Option<bool> {
            if i == p {
                Some(!fixed)
            } else if i < p {
                base.cell(i).fixed()
            } else {
                Some(base.cell(i).fixed().unwrap_or(false))
            }
        };
        let fill = self.base.zero_fill();
        models(phi, &vars, &lookup, false)
            .into_iter()
            .map(|assign| {
                let mut bits: Vec<bool> = (0..=p).map(|i| lookup(i).unwrap_or(false)).collect();
                for (j, &pos) in vars.iter().enumerate() {
                    bits[pos] = assign[j];
                }
                fill.with_prefix(&bits)
            })
            .filter(|x| !self.excluded.contains(x))
            .collect()
    }

    /// All fan points, when the coding set is finite.
    pub fn finite_points(&self) -> Option<Vec<TheoryPoint>> {
        if !self.coding.is_finite() {
            return None;
        }
        Some(
            self.coding
                .iter()
                .flat_map(|p| self.column(p, &SentenceExpr::True))
                .collect(),
        )
    }

    /// Fan points in the order (coding position, then column order).
    pub fn points(&self) -> impl Iterator<Item = TheoryPoint> + '_ {
        self.coding
            .iter()
            .flat_map(move |p| self.column(p, &SentenceExpr::True))
    }

    fn clopen_count(&self, phi: &SentenceExpr) -> Trichotomy {
        let m = phi.max_index().unwrap_or(0);
        let mut acc = Trichotomy::Empty;
        if self.include_base {
            acc = acc.merge(mask_count(&self.base, phi));
        }
        if !self.coding.is_finite() && self.base.satisfiable(phi) {
            return acc.merge(Trichotomy::Infinite(0));
        }
        let ps: Vec<usize> = if self.coding.is_finite() {
            self.coding.iter().collect()
        } else {
            self.coding.upto(m)
        };
        let pts: Vec<TheoryPoint> = ps.into_iter().flat_map(|p| self.column(p, phi)).collect();
        acc.merge(Trichotomy::from_points(pts))
    }
}

fn mask_count(mask: &Mask, phi: &SentenceExpr) -> Trichotomy {
    match mask.finite_points() {
        Some(pts) => Trichotomy::from_points(pts.into_iter().filter(|p| satisfies(p, phi)).collect()),
        None if mask.satisfiable(phi) => Trichotomy::Infinite(0),
        None => Trichotomy::Empty,
    }
}

/// One symbolic piece of a family.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Block {
    FinSet(BTreeSet<TheoryPoint>),
    Fan(Fan),
    Cube(Mask),
    FanArray(FanArray),
}

impl Block {
    pub fn finset(points: impl IntoIterator<Item = TheoryPoint>) -> Self {
        Block::FinSet(points.into_iter().collect())
    }

    pub fn member(&self, p: &TheoryPoint) -> bool {
        match self {
            Block::FinSet(s) => s.contains(p),
            Block::Fan(f) => f.member(p),
            Block::Cube(m) => m.admits(p),
            Block::FanArray(a) => a.member(p),
        }
    }

    /// Countable blocks cannot cover any piece of a cube.
    pub fn is_countable(&self) -> bool {
        match self {
            Block::Cube(m) => !m.has_infinite_free(),
            Block::FanArray(a) => !(a.include_base && a.base.has_infinite_free()),
            _ => true,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Block::FinSet(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Block::FinSet(_) => "fin",
            Block::Fan(_) => "fan",
            Block::Cube(_) => "cube",
            Block::FanArray(_) => "fanarray",
        }
    }
}

/// Exact classification of `B ∩ ⟦φ⟧`.
pub fn clopen_count(b: &Block, phi: &SentenceExpr) -> Trichotomy {
    match b {
        Block::FinSet(s) => {
            Trichotomy::from_points(s.iter().filter(|p| satisfies(p, phi)).cloned().collect())
        }
        Block::Fan(f) => f.clopen_count(phi),
        Block::Cube(m) => mask_count(m, phi),
        Block::FanArray(a) => a.clopen_count(phi),
    }
}

/// Threshold and modulus past which `h ↦ [fan.point(h) ∈ block]` is
/// periodic, for cube and fan-array blocks.
pub(crate) fn sampling_window(fan: &Fan, b: &Block) -> (usize, usize) {
    let l = fan.limit.word();
    let lp = l.prefix().len();
    let lper = l.period().len();
    let d = fan.dev.len();
    match b {
        Block::Cube(m) => {
            let per = lcm(lper, m.word().period().len());
            (lp + m.word().prefix().len() + d + 2 * per + 2, per)
        }
        Block::FanArray(a) => {
            let per = lcm(
                lcm(lper, a.base.word().period().len()),
                a.coding.modulus(),
            );
            let excl = a
                .excluded
                .iter()
                .filter_map(|x| fan.limit.first_difference(x))
                .max()
                .map_or(0, |h| h + 1);
            let t = lp + a.base.word().prefix().len() + a.coding.threshold() + d + 4 * per + 4;
            (t.max(excl), per)
        }
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stone::SentenceExpr as S;

    fn pt(s: &str) -> TheoryPoint {
        s.parse().unwrap()
    }

    fn fan0() -> Fan {
        Fan::new(pt("~0"), PosSet::arithmetic(1, 0), vec![], false)
    }

    fn cube0() -> Mask {
        Mask::parse("~F0").unwrap()
    }

    // Oracle: the fan members t_0..t_5 written out by hand.
    fn fan0_members() -> Vec<TheoryPoint> {
        ["1~0", "01~0", "001~0", "0001~0", "00001~0", "000001~0"]
            .iter()
            .map(|s| pt(s))
            .collect()
    }

    #[test]
    fn posset_basics() {
        let ap = PosSet::arithmetic(3, 2);
        assert!(ap.contains(2) && ap.contains(5) && !ap.contains(3));
        assert_eq!(ap.as_arithmetic(), Some((3, 2)));
        assert_eq!(PosSet::arithmetic(1, 0).as_arithmetic(), Some((1, 0)));
        let fin = PosSet::finite([1, 4]);
        assert_eq!(fin.count(), Some(2));
        assert_eq!(fin.max_elem(), Some(4));
        assert!(fin.is_subset(&PosSet::all()));
        assert!(ap.intersection(&PosSet::arithmetic(2, 0)).contains(8));
        assert_eq!(PosSet::finite([1, 3]).union(&PosSet::finite([2])).as_arithmetic(), None);
        assert!(PosSet::empty().is_empty());
    }

    #[test]
    fn fan_members_match_enumeration() {
        let f = fan0();
        let listed: Vec<_> = f.points().take(6).collect();
        assert_eq!(listed, fan0_members());
        assert!(f.member(&pt("001~0")));
        assert!(!f.member(&pt("~0")));
        assert!(!f.member(&pt("011~0")));
    }

    #[test]
    fn cube_membership() {
        assert!(!Block::Cube(cube0()).member(&pt("~01")));
        assert!(Block::Cube(cube0()).member(&pt("~10")));
        assert!(Block::finset([pt("~0")]).member(&pt("~0")));
    }

    #[test]
    fn clopen_count_examples() {
        let f = Block::Fan(fan0());
        // Only t_0 starts with 1.
        let ones: Vec<_> = fan0_members().into_iter().filter(|p| p.bit(0)).collect();
        assert_eq!(ones, vec![pt("1~0")]);
        assert_eq!(clopen_count(&f, &S::atom(0)), Trichotomy::Finite(vec![pt("1~0")]));
        assert!(clopen_count(&f, &S::not(S::atom(0))).is_infinite());
        assert_eq!(clopen_count(&Block::Cube(cube0()), &S::atom(1)), Trichotomy::Empty);
    }

    #[test]
    fn fanarray_membership_and_columns() {
        let a = FanArray::new(cube0(), PosSet::arithmetic(4, 1), true);
        // 0^ω with bit 1 flipped: single violation at a coding position.
        assert!(a.member(&pt("01~0")));
        // Violation at 3 is not a coding position.
        assert!(!a.member(&pt("0001~0")));
        // Free bit 2 set above the violation at 1.
        assert!(!a.member(&pt("011~0")));
        // Free bit 0 set below the violation at 5.
        assert!(a.member(&pt("100001~0")));
        assert!(a.member(&pt("~10")));
        let col = a.column(5, &S::True);
        assert_eq!(col.len(), 8);
        assert!(col.iter().all(|p| a.is_fan_point(p)));
    }

    #[test]
    fn mask_merge_and_containment() {
        let even = cube0();
        let all = Mask::parse("~F").unwrap();
        assert!(all.contains_mask(&even));
        assert!(!even.contains_mask(&all));
        let (_, k) = even.merge(&Mask::parse("~F1").unwrap());
        assert!(!k.is_finite());
        let fixed = Mask::parse("FF~0").unwrap();
        assert_eq!(fixed.finite_points().unwrap().len(), 4);
    }
}
