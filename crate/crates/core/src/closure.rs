//! Closure, accumulation and isolated points, least generating sets.

use serde::Serialize;

use crate::blocks::{
    difference, mask_block, family_count, family_eq, family_subset, intersect, union,
    Block, Family,
};
use crate::error::{Error, Result};
use crate::stone::{SentenceExpr, TheoryPoint, Trichotomy};

const SEARCH_CAP: usize = 1 << 16;
const WITNESSES_PER_BLOCK: usize = 8;

/// Accumulation points, block by block.
pub fn acc_points(f: &Family) -> Family {
    Family::from_blocks(f.blocks().iter().filter_map(|b| match b {
        Block::FinSet(_) => None,
        Block::Fan(fan) => Some(Block::finset([fan.limit.clone()])),
        Block::Cube(m) => Some(Block::Cube(m.clone())),
        Block::FanArray(a) => Some(mask_block(a.base.clone())),
    }))
}

pub fn closure(f: &Family) -> Family {
    union(f, &acc_points(f))
}

pub fn is_closed(f: &Family) -> Result<bool> {
    family_subset(&acc_points(f), f)
}

/// Why a point does or does not lie in a closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    Member,
    Accumulation,
    /// A sentence true in the point whose neighbourhood meets the family in
    /// finitely many points, none of them the point itself.
    Separating(SentenceExpr),
}

pub fn is_in_closure(t: &TheoryPoint, f: &Family) -> (bool, Certificate) {
    if f.member(t) {
        return (true, Certificate::Member);
    }
    if acc_points(f).member(t) {
        return (true, Certificate::Accumulation);
    }
    let n = least_prefix(|n| !family_count(f, &prefix_of(t, n)).is_infinite())
        .expect("a point outside the closure has a finite neighbourhood");
    let n = match family_count(f, &prefix_of(t, n)) {
        Trichotomy::Finite(pts) => pts
            .iter()
            .filter_map(|q| q.first_difference(t))
            .map(|i| i + 1)
            .fold(n, usize::max),
        _ => n,
    };
    (false, Certificate::Separating(prefix_of(t, n)))
}

fn prefix_of(t: &TheoryPoint, n: usize) -> SentenceExpr {
    SentenceExpr::prefix(&t.bits(n))
}

/// Least `n` with `ok(n)`, for a property monotone in `n`.
fn least_prefix(ok: impl Fn(usize) -> bool) -> Option<usize> {
    let mut hi = 1;
    while !ok(hi) {
        hi *= 2;
        if hi > SEARCH_CAP {
            return None;
        }
    }
    if ok(0) {
        return Some(0);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Shortest prefix sentence isolating `t` in `f`.
pub fn witness(f: &Family, t: &TheoryPoint) -> Result<SentenceExpr> {
    let single = Trichotomy::Finite(vec![t.clone()]);
    let n = least_prefix(|n| family_count(f, &prefix_of(t, n)) == single)
        .ok_or_else(|| Error::Precondition(format!("{t} is not an isolated point")))?;
    Ok(prefix_of(t, n))
}

pub fn isolated_points(f: &Family) -> Result<Family> {
    if !is_closed(f)? {
        return Err(Error::NotClosed);
    }
    difference(f, &acc_points(f))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub point: TheoryPoint,
    pub sentence: SentenceExpr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorFlags {
    pub least: bool,
    pub minimal: bool,
    pub isolated_in_generators: bool,
    pub isolated_in_family: bool,
}

impl GeneratorFlags {
    pub fn agree(&self) -> bool {
        let v = [
            self.least,
            self.minimal,
            self.isolated_in_generators,
            self.isolated_in_family,
        ];
        v.iter().all(|&b| b == v[0])
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GenSetReport {
    pub isolated: Family,
    pub has_least: bool,
    pub least_gen_set: Option<Family>,
    pub condition_flags: Option<GeneratorFlags>,
    pub witnesses: Vec<Witness>,
}

/// Sample of points from each block, a few per block.
pub fn sample_points(f: &Family, per_block: usize) -> Vec<TheoryPoint> {
    let mut out = Vec::new();
    for b in f.blocks() {
        match b {
            Block::FinSet(s) => out.extend(s.iter().take(per_block).cloned()),
            Block::Fan(fan) => {
                if fan.include_limit {
                    out.push(fan.limit.clone());
                }
                out.extend(fan.points().take(per_block));
            }
            Block::Cube(m) => out.push(m.zero_fill()),
            Block::FanArray(a) => {
                if a.include_base {
                    out.push(a.base.zero_fill());
                }
                out.extend(a.points().take(per_block));
            }
        }
    }
    out
}

pub fn least_generating_set(f: &Family) -> Result<GenSetReport> {
    let iso = isolated_points(f)?;
    let has_least = family_eq(&closure(&iso), f)?;
    let mut witnesses = Vec::new();
    for p in sample_points(&iso, WITNESSES_PER_BLOCK) {
        let sentence = witness(f, &p)?;
        witnesses.push(Witness { point: p, sentence });
    }
    let condition_flags = if has_least {
        Some(check_generating_conditions(f, &iso, &[])?)
    } else {
        None
    };
    Ok(GenSetReport {
        least_gen_set: has_least.then(|| iso.clone()),
        isolated: iso,
        has_least,
        condition_flags,
        witnesses,
    })
}

fn generates(g: &Family, f: &Family) -> Result<bool> {
    family_eq(&closure(g), f)
}

/// Sub-families of `g` obtained by removing a single point or a whole block.
fn puncturings(g: &Family) -> Result<Vec<Family>> {
    let blocks = g.blocks();
    let mut out = Vec::new();
    let mut candidates: Vec<TheoryPoint> = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        let mut rest = blocks.to_vec();
        rest.remove(i);
        out.push(Family::from_blocks(rest));
        match b {
            Block::FinSet(s) => candidates.extend(s.iter().take(16).cloned()),
            Block::Fan(fan) => {
                candidates.extend(fan.points().take(3));
                if fan.include_limit {
                    candidates.push(fan.limit.clone());
                }
            }
            Block::FanArray(a) => candidates.extend(a.points().take(3)),
            Block::Cube(_) => {}
        }
    }
    let perfect = Family::from_blocks(blocks.iter().filter_map(|b| match b {
        Block::Cube(m) => Some(Block::Cube(m.clone())),
        Block::FanArray(a) if a.include_base => Some(mask_block(a.base.clone())),
        _ => None,
    }));
    for p in candidates {
        if !perfect.member(&p) {
            out.push(difference(g, &Family::points([p]))?);
        }
    }
    Ok(out)
}

/// Evaluates the four equivalent characterizations of a least generating set
/// for a generating set `g` of the closed family `f`.
pub fn check_generating_conditions(f: &Family, g: &Family, pool: &[Family]) -> Result<GeneratorFlags> {
    if !family_subset(g, f)? || !generates(g, f)? {
        return Err(Error::NotGenerating(g.to_string()));
    }
    let acc_g = acc_points(g);
    let isolated_in_generators = intersect(g, &acc_g)?.is_empty();
    let isolated_in_family = intersect(g, &acc_points(f))?.is_empty();

    let mut minimal = true;
    for h in puncturings(g)? {
        if !family_subset(g, &h)? && generates(&h, f)? {
            minimal = false;
            break;
        }
    }
    // Removing a single point of a perfect piece keeps the closure exactly
    // when that point is an accumulation point of what remains.
    if minimal {
        for b in g.blocks() {
            let rep = match b {
                Block::Cube(m) => Some(m.zero_fill()),
                Block::FanArray(a) if a.include_base => Some(a.base.zero_fill()),
                _ => None,
            };
            if rep.is_some_and(|p| acc_g.member(&p)) {
                minimal = false;
            }
        }
    }

    let core = isolated_points(f)?;
    let mut least = family_eq(g, &core)? && generates(&core, f)?;
    for cand in pool {
        if !least {
            break;
        }
        if family_subset(cand, f)? && generates(cand, f)? {
            least = family_subset(g, cand)?;
        }
    }
    Ok(GeneratorFlags {
        least,
        minimal,
        isolated_in_generators,
        isolated_in_family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{Fan, Mask, PosSet};

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
    fn acc_and_closure() {
        assert_eq!(acc_points(&fan0(false)), Family::points([pt("~0")]));
        assert!(acc_points(&Family::points([pt("1~0"), pt("~1")])).is_empty());
        assert_eq!(acc_points(&cube0()), cube0());
        assert_eq!(closure(&fan0(false)), fan0(true));
        assert!(closure(&Family::empty()).is_empty());
    }

    #[test]
    fn closure_membership_certificates() {
        assert_eq!(is_in_closure(&pt("~0"), &fan0(false)), (true, Certificate::Accumulation));
        let (inside, cert) = is_in_closure(&pt("11~0"), &fan0(true));
        assert!(!inside);
        assert_eq!(cert, Certificate::Separating(SentenceExpr::prefix(&[true, true])));
        assert_eq!(cert_string(&cert), "P0 AND P1");
        assert_eq!(is_in_closure(&pt("1~0"), &Family::points([pt("1~0")])).1, Certificate::Member);
    }

    fn cert_string(c: &Certificate) -> String {
        match c {
            Certificate::Separating(s) => s.to_string(),
            _ => String::new(),
        }
    }

    #[test]
    fn isolated_and_least() {
        assert_eq!(isolated_points(&fan0(true)).unwrap(), fan0(false));
        assert!(isolated_points(&cube0()).unwrap().is_empty());
        assert_eq!(isolated_points(&fan0(false)), Err(Error::NotClosed));
        let r = least_generating_set(&fan0(true)).unwrap();
        assert!(r.has_least);
        for w in &r.witnesses {
            assert_eq!(family_count(&fan0(true), &w.sentence), Trichotomy::Finite(vec![w.point.clone()]));
        }
        assert!(!least_generating_set(&cube0()).unwrap().has_least);
    }

    #[test]
    fn generating_condition_flags() {
        let all = check_generating_conditions(&fan0(true), &fan0(false), &[]).unwrap();
        assert!(all.least && all.minimal && all.isolated_in_generators && all.isolated_in_family);
        let none = check_generating_conditions(&fan0(true), &fan0(true), &[]).unwrap();
        assert!(!none.least && !none.minimal && !none.isolated_in_generators && !none.isolated_in_family);
        let p = Family::points([pt("~01")]);
        assert!(check_generating_conditions(&p, &p, &[]).unwrap().agree());
        assert!(matches!(
            check_generating_conditions(&fan0(true), &Family::points([pt("1~0")]), &[]),
            Err(Error::NotGenerating(_))
        ));
    }
}
