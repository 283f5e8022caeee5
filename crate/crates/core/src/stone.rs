//! Theory points, sentences over the coordinate basis, and the trichotomy used
//! to classify neighbourhood intersections.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::word::UltWord;

/// A complete theory, seen as the ultimately periodic bit sequence whose `i`-th
/// bit tells whether basis sentence `P_i` belongs to it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TheoryPoint(UltWord<bool>);

/// Result of [`point_compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointOrdering {
    Equal,
    FirstDifference(usize),
}

pub fn normalize_point(prefix: &[bool], period: &[bool]) -> Result<TheoryPoint> {
    UltWord::new(prefix.to_vec(), period.to_vec())
        .map(TheoryPoint)
        .ok_or_else(|| Error::MalformedPoint("empty period".into()))
}

pub fn bit_at(p: &TheoryPoint, i: usize) -> bool {
    p.0.at(i)
}

pub fn satisfies(p: &TheoryPoint, phi: &SentenceExpr) -> bool {
    phi.eval(&|i| p.0.at(i))
}

pub fn point_compare(p: &TheoryPoint, q: &TheoryPoint) -> PointOrdering {
    match p.0.first_difference(&q.0) {
        None => PointOrdering::Equal,
        Some(i) => PointOrdering::FirstDifference(i),
    }
}

impl TheoryPoint {
    pub fn zeros() -> Self {
        TheoryPoint(UltWord::constant(false))
    }

    /// `bits · 0^ω`.
    pub fn finite(bits: &[bool]) -> Self {
        Self::zeros().with_prefix(bits)
    }

    pub fn from_word(word: UltWord<bool>) -> Self {
        TheoryPoint(word)
    }

    pub fn word(&self) -> &UltWord<bool> {
        &self.0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0.at(i)
    }

    pub fn bits(&self, n: usize) -> Vec<bool> {
        self.0.take(n)
    }

    pub fn with_prefix(&self, bits: &[bool]) -> Self {
        TheoryPoint(self.0.overwrite_prefix(bits))
    }

    pub fn flip(&self, i: usize) -> Self {
        let mut bits = self.bits(i + 1);
        bits[i] = !bits[i];
        self.with_prefix(&bits)
    }

    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        self.0.first_difference(&other.0)
    }

    /// Length of the prefix plus the period, a rough description size.
    pub fn size(&self) -> usize {
        self.0.prefix().len() + self.0.period().len()
    }
}

fn bits_str(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub(crate) fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

impl fmt::Display for TheoryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}~{}",
            bits_str(self.0.prefix()),
            bits_str(self.0.period())
        )
    }
}

impl fmt::Debug for TheoryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TheoryPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (pre, per) = s
            .split_once('~')
            .ok_or_else(|| Error::MalformedPoint(format!("missing `~` in `{s}`")))?;
        let pre = parse_bits(pre).ok_or_else(|| Error::MalformedPoint(s.into()))?;
        let per = parse_bits(per).ok_or_else(|| Error::MalformedPoint(s.into()))?;
        normalize_point(&pre, &per)
    }
}

impl Serialize for TheoryPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Finite boolean combination of basis atoms; denotes a clopen set.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum SentenceExpr {
    True,
    False,
    Atom(usize),
    Not(Box<SentenceExpr>),
    And(Vec<SentenceExpr>),
    Or(Vec<SentenceExpr>),
}

impl SentenceExpr {
    pub fn atom(i: usize) -> Self {
        SentenceExpr::Atom(i)
    }

    pub fn not(e: SentenceExpr) -> Self {
        SentenceExpr::Not(Box::new(e))
    }

    pub fn literal(i: usize, value: bool) -> Self {
        if value {
            Self::atom(i)
        } else {
            Self::not(Self::atom(i))
        }
    }

    /// Conjunction of literals fixing coordinates `0..bits.len()`.
    pub fn prefix(bits: &[bool]) -> Self {
        if bits.is_empty() {
            return SentenceExpr::True;
        }
        SentenceExpr::And(
            bits.iter()
                .enumerate()
                .map(|(i, &b)| Self::literal(i, b))
                .collect(),
        )
    }

    /// Largest atom index, `None` for constant sentences.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            SentenceExpr::True | SentenceExpr::False => None,
            SentenceExpr::Atom(i) => Some(*i),
            SentenceExpr::Not(e) => e.max_index(),
            SentenceExpr::And(v) | SentenceExpr::Or(v) => {
                v.iter().filter_map(|e| e.max_index()).max()
            }
        }
    }

    pub fn atoms(&self) -> Vec<usize> {
        fn go(e: &SentenceExpr, out: &mut Vec<usize>) {
            match e {
                SentenceExpr::Atom(i) => out.push(*i),
                SentenceExpr::Not(e) => go(e, out),
                SentenceExpr::And(v) | SentenceExpr::Or(v) => v.iter().for_each(|e| go(e, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn eval(&self, val: &dyn Fn(usize) -> bool) -> bool {
        match self {
            SentenceExpr::True => true,
            SentenceExpr::False => false,
            SentenceExpr::Atom(i) => val(*i),
            SentenceExpr::Not(e) => !e.eval(val),
            SentenceExpr::And(v) => v.iter().all(|e| e.eval(val)),
            SentenceExpr::Or(v) => v.iter().any(|e| e.eval(val)),
        }
    }

    /// Kleene evaluation under a partial valuation.
    pub fn eval_partial(&self, val: &dyn Fn(usize) -> Option<bool>) -> Option<bool> {
        match self {
            SentenceExpr::True => Some(true),
            SentenceExpr::False => Some(false),
            SentenceExpr::Atom(i) => val(*i),
            SentenceExpr::Not(e) => e.eval_partial(val).map(|b| !b),
            SentenceExpr::And(v) => {
                let mut unknown = false;
                for e in v {
                    match e.eval_partial(val) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            SentenceExpr::Or(v) => {
                let mut unknown = false;
                for e in v {
                    match e.eval_partial(val) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
        }
    }
}

/// All assignments to `vars` (in order) which, together with the fixed part
/// `base`, make `phi` true. Branches are pruned as soon as `phi` is decided.
pub(crate) fn models(
    phi: &SentenceExpr,
    vars: &[usize],
    base: &dyn Fn(usize) -> Option<bool>,
    stop_at_first: bool,
) -> Vec<Vec<bool>> {
    fn go(
        phi: &SentenceExpr,
        vars: &[usize],
        base: &dyn Fn(usize) -> Option<bool>,
        assigned: &mut Vec<bool>,
        out: &mut Vec<Vec<bool>>,
        stop: bool,
    ) {
        if stop && !out.is_empty() {
            return;
        }
        let k = assigned.len();
        let lookup = |i: usize| match vars[..k].iter().position(|&v| v == i) {
            Some(j) => Some(assigned[j]),
            None if vars[k..].contains(&i) => None,
            None => base(i),
        };
        match phi.eval_partial(&lookup) {
            Some(false) => return,
            Some(true) => {
                // Remaining variables are unconstrained; expand them all.
                if stop {
                    let mut full = assigned.clone();
                    full.resize(vars.len(), false);
                    out.push(full);
                    return;
                }
            }
            None => {}
        }
        if k == vars.len() {
            out.push(assigned.clone());
            return;
        }
        for b in [false, true] {
            assigned.push(b);
            go(phi, vars, base, assigned, out, stop);
            assigned.pop();
        }
    }
    let mut out = Vec::new();
    go(phi, vars, base, &mut Vec::new(), &mut out, stop_at_first);
    out
}

impl fmt::Display for SentenceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceExpr::True => write!(f, "TRUE"),
            SentenceExpr::False => write!(f, "FALSE"),
            SentenceExpr::Atom(i) => write!(f, "P{i}"),
            SentenceExpr::Not(e) => write!(f, "NOT {e}"),
            SentenceExpr::And(v) | SentenceExpr::Or(v) => {
                let sep = if matches!(self, SentenceExpr::And(_)) {
                    " AND "
                } else {
                    " OR "
                };
                if v.is_empty() {
                    return write!(f, "{}", if sep == " AND " { "TRUE" } else { "FALSE" });
                }
                let parts: Vec<String> = v
                    .iter()
                    .map(|e| match e {
                        SentenceExpr::And(_) | SentenceExpr::Or(_) => format!("({e})"),
                        _ => e.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join(sep))
            }
        }
    }
}

impl Serialize for SentenceExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact classification of a family's intersection with a clopen set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Trichotomy {
    Empty,
    /// Sorted, duplicate-free members.
    Finite(Vec<TheoryPoint>),
    /// Carries the index of a block certifying infinitude.
    Infinite(usize),
}

impl Trichotomy {
    pub fn from_points(mut points: Vec<TheoryPoint>) -> Self {
        points.sort();
        points.dedup();
        if points.is_empty() {
            Trichotomy::Empty
        } else {
            Trichotomy::Finite(points)
        }
    }

    pub fn merge(self, other: Trichotomy) -> Trichotomy {
        match (self, other) {
            (Trichotomy::Infinite(i), _) | (_, Trichotomy::Infinite(i)) => Trichotomy::Infinite(i),
            (Trichotomy::Empty, t) | (t, Trichotomy::Empty) => t,
            (Trichotomy::Finite(mut a), Trichotomy::Finite(b)) => {
                a.extend(b);
                Trichotomy::from_points(a)
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Trichotomy::Infinite(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Trichotomy::Empty)
    }

    pub fn with_witness(self, block: usize) -> Trichotomy {
        match self {
            Trichotomy::Infinite(_) => Trichotomy::Infinite(block),
            t => t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &str) -> TheoryPoint {
        s.parse().unwrap()
    }

    // Brute-force oracle: two descriptors denote the same sequence iff their
    // first 64 bits agree (all descriptors here are far shorter than 32).
    fn expand(pre: &str, per: &str, n: usize) -> Vec<char> {
        pre.chars().chain(per.chars().cycle()).take(n).collect()
    }

    #[test]
    fn normalize_examples() {
        let p = normalize_point(&[true, false], &[false]).unwrap();
        assert_eq!(p.to_string(), "1~0");
        let p = normalize_point(&[], &[false, true, false, true]).unwrap();
        assert_eq!(p.to_string(), "~01");
        // "0101" followed by (10)^ω expands to 0101 1010 …, which differs from
        // 0 (10)^ω at bit 4, so the descriptor is already canonical.
        assert_ne!(expand("0101", "10", 64), expand("0", "10", 64));
        let p = normalize_point(&[false, true, false, true], &[true, false]).unwrap();
        assert_eq!(p.to_string(), "0101~10");
        assert!(matches!(
            normalize_point(&[true], &[]),
            Err(Error::MalformedPoint(_))
        ));
    }

    #[test]
    fn normalize_is_idempotent() {
        let p = pt("0110~0110");
        let q = normalize_point(p.word().prefix(), p.word().period()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn bit_examples() {
        assert!(!bit_at(&pt("~0"), 3));
        assert!(bit_at(&pt("~01"), 1001));
        assert!(bit_at(&pt("101~0"), 0));
    }

    #[test]
    fn satisfies_examples() {
        use SentenceExpr as S;
        assert!(satisfies(&pt("~0"), &S::not(S::atom(3))));
        assert!(satisfies(
            &pt("101~0"),
            &S::And(vec![S::atom(0), S::not(S::atom(1))])
        ));
        // (01)^ω expands to 0,1,0,…: bits 0 and 2 are both 0.
        let bits = expand("", "01", 3);
        assert_eq!(bits, vec!['0', '1', '0']);
        assert!(!satisfies(&pt("~01"), &S::Or(vec![S::atom(0), S::atom(2)])));
    }

    #[test]
    fn compare_examples() {
        assert_eq!(point_compare(&pt("~0"), &pt("~0")), PointOrdering::Equal);
        assert_eq!(
            point_compare(&pt("~0"), &pt("001~0")),
            PointOrdering::FirstDifference(2)
        );
        let a = expand("", "01", 64);
        let b = expand("01", "10", 64);
        let first = (0..64).find(|&i| a[i] != b[i]);
        assert_eq!(first, Some(2));
        assert_eq!(
            point_compare(&pt("~01"), &pt("01~10")),
            PointOrdering::FirstDifference(2)
        );
    }

    #[test]
    fn models_prunes_and_enumerates() {
        use SentenceExpr as S;
        let phi = S::Or(vec![S::atom(0), S::atom(2)]);
        let m = models(&phi, &[0, 2], &|_| None, false);
        assert_eq!(m.len(), 3);
        let m = models(&phi, &[0], &|i| Some(i == 5), false);
        assert_eq!(m, vec![vec![true]]);
    }

    #[test]
    fn trichotomy_merge() {
        let a = Trichotomy::from_points(vec![pt("1~0")]);
        let b = Trichotomy::from_points(vec![pt("1~0"), pt("~0")]);
        assert_eq!(a.clone().merge(b.clone()), b);
        assert!(a.merge(Trichotomy::Infinite(3)).is_infinite());
        assert_eq!(Trichotomy::from_points(vec![]), Trichotomy::Empty);
    }
}
