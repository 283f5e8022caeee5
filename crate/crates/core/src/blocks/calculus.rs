//! Pairwise block intersection, containment and difference.
//!
//! Every procedure here is exact. Pairs outside the supported table return
//! an error instead of an approximation.

use std::collections::BTreeSet;

use super::{sampling_window, Block, Cell, Fan, FanArray, Mask, PosSet};
use crate::error::{Error, Result};
use crate::stone::{models, SentenceExpr, TheoryPoint};

/// `{h : fan.point(h) ∈ b}` over all `h`, regardless of the fan's own flip set.
pub fn fan_hits(fan: &Fan, b: &Block) -> PosSet {
    match b {
        Block::FinSet(pts) => PosSet::finite(pts.iter().filter_map(|q| {
            let h = fan.limit.first_difference(q)?;
            (fan.point(h) == *q).then_some(h)
        })),
        Block::Fan(other) => {
            if other.limit == fan.limit {
                return if other.dev == fan.dev {
                    other.flips.clone()
                } else {
                    PosSet::empty()
                };
            }
            let k = fan
                .limit
                .first_difference(&other.limit)
                .expect("distinct limits");
            // A member flipping above k agrees with our limit at k, so it can
            // only equal one of the other fan's members flipping at or below k.
            let mut cands: BTreeSet<usize> = (0..=k).collect();
            for h2 in other.flips.upto(k) {
                if let Some(h) = fan.limit.first_difference(&other.point(h2)) {
                    cands.insert(h);
                }
            }
            PosSet::finite(cands.into_iter().filter(|&h| other.member(&fan.point(h))))
        }
        Block::Cube(_) | Block::FanArray(_) => {
            let (t, m) = sampling_window(fan, b);
            PosSet::from_predicate(t, m, |h| b.member(&fan.point(h)))
        }
    }
}

/// Block for the set of mask-consistent points.
pub(crate) fn mask_block(mask: Mask) -> Block {
    match mask.finite_points() {
        Some(pts) => Block::finset(pts),
        None => Block::Cube(mask),
    }
}

fn cube_meet(a: &Mask, b: &Mask) -> Vec<Block> {
    let (merged, conflicts) = a.merge(b);
    if conflicts.is_empty() {
        vec![mask_block(merged)]
    } else {
        Vec::new()
    }
}

/// Cube ∩ fan-array (including its base when flagged).
fn cube_fanarray(cube: &Mask, arr: &FanArray) -> Vec<Block> {
    let mut out = Vec::new();
    if arr.include_base {
        out.extend(cube_meet(cube, &arr.base));
    }
    let (merged, conflicts) = cube.merge(&arr.base);
    if conflicts.is_empty() {
        // Base-free coordinates the cube pins to 1 must lie below the
        // coding position.
        let pinned = PosSet::from_word(
            arr.base
                .word()
                .zip_with(cube.word(), |b, c| b == Cell::Free && c == Cell::One),
        );
        if pinned.is_finite() {
            let mut coding = arr.coding.intersection(&cube.free_positions());
            if let Some(q) = pinned.max_elem() {
                coding = coding.intersection(&PosSet::above(q));
            }
            let sub = FanArray::new(merged, coding, false).with_excluded(arr.excluded.iter().cloned());
            out.push(Block::FanArray(sub));
        }
    } else if conflicts.count() == Some(1) {
        let k = conflicts.min_elem().expect("one conflict");
        if arr.coding.contains(k) {
            let pts: Vec<TheoryPoint> = arr
                .column(k, &SentenceExpr::True)
                .into_iter()
                .filter(|p| cube.admits(p))
                .collect();
            out.push(Block::finset(pts));
        }
    }
    out
}

fn fanarray_meet(a: &FanArray, b: &FanArray) -> Result<Vec<Block>> {
    let mut out = Vec::new();
    if a.include_base && b.include_base {
        out.extend(cube_meet(&a.base, &b.base));
    }
    if a.include_base {
        out.extend(cube_fanarray(&a.base, &b.without_base()));
    }
    if b.include_base {
        out.extend(cube_fanarray(&b.base, &a.without_base()));
    }
    if a.base == b.base {
        // A point violates one mask at exactly one place, so both codings
        // must agree on it.
        let sub = FanArray::new(a.base.clone(), a.coding.intersection(&b.coding), false)
            .with_excluded(a.excluded.iter().chain(&b.excluded).cloned());
        out.push(Block::FanArray(sub));
    } else {
        let (_, conflicts) = a.base.merge(&b.base);
        let disjoint = conflicts.count().map_or(true, |n| n >= 3);
        if !disjoint {
            return Err(Error::UnsupportedIntersection(format!(
                "fan arrays over masks {} and {} that are neither identical nor disjoint",
                a.base, b.base
            )));
        }
    }
    Ok(out)
}

/// Exact intersection of two blocks.
pub fn intersect_blocks(a: &Block, b: &Block) -> Result<Vec<Block>> {
    use Block::*;
    Ok(match (a, b) {
        (FinSet(s), x) | (x, FinSet(s)) => {
            vec![Block::finset(s.iter().filter(|p| x.member(p)).cloned())]
        }
        (Fan(f), x) | (x, Fan(f)) => {
            let flips = f.flips.intersection(&fan_hits(f, x));
            vec![Block::Fan(super::Fan::new(
                f.limit.clone(),
                flips,
                f.dev.clone(),
                f.include_limit && x.member(&f.limit),
            ))]
        }
        (Cube(m1), Cube(m2)) => cube_meet(m1, m2),
        (Cube(m), FanArray(arr)) | (FanArray(arr), Cube(m)) => cube_fanarray(m, arr),
        (FanArray(x), FanArray(y)) => fanarray_meet(x, y)?,
    })
}

/// Masks of the uncountable pieces of a family.
fn covering_masks(blocks: &[Block]) -> Vec<&Mask> {
    blocks
        .iter()
        .filter_map(|b| match b {
            Block::Cube(m) if m.has_infinite_free() => Some(m),
            Block::FanArray(a) if a.include_base && a.base.has_infinite_free() => Some(&a.base),
            _ => None,
        })
        .collect()
}

/// Whether the perfect set of `cube` is covered by `blocks`. Countable blocks
/// never cover a nonempty relatively open piece of a perfect set, so only
/// masks matter.
pub(crate) fn cube_covered(cube: &Mask, blocks: &[Block]) -> bool {
    let mut finite_escapes: Vec<Vec<(usize, bool)>> = Vec::new();
    for m in covering_masks(blocks) {
        let (_, conflicts) = cube.merge(m);
        if !conflicts.is_empty() {
            continue;
        }
        // Coordinates where the cube is free but the covering mask is fixed.
        let escapes = PosSet::from_word(
            cube.word()
                .zip_with(m.word(), |c, d| c == Cell::Free && d != Cell::Free),
        );
        if escapes.is_empty() {
            return true;
        }
        if escapes.is_finite() {
            finite_escapes.push(
                escapes
                    .iter()
                    .map(|i| (i, m.cell(i).fixed().expect("fixed")))
                    .collect(),
            );
        }
    }
    // Masks with infinitely many escape coordinates can always be dodged far
    // out; the finite ones form a small satisfiability problem.
    let clauses: Vec<SentenceExpr> = finite_escapes
        .iter()
        .map(|cl| SentenceExpr::Or(cl.iter().map(|&(i, v)| SentenceExpr::literal(i, !v)).collect()))
        .collect();
    let phi = SentenceExpr::And(clauses);
    let vars = phi.atoms();
    models(&phi, &vars, &|_| None, true).is_empty()
}

fn others_finite_meet(residual: &FanArray, others: &[&Block]) -> Result<Option<Vec<TheoryPoint>>> {
    let mut pts = Vec::new();
    let res_block = Block::FanArray(residual.clone());
    for x in others {
        let inter = intersect_blocks(&res_block, x).map_err(|e| match e {
            Error::UnsupportedIntersection(m) => Error::UnsupportedComparison(m),
            e => e,
        })?;
        for b in inter {
            match b {
                Block::FinSet(s) => pts.extend(s),
                Block::FanArray(a) if a.coding.is_empty() => {}
                _ => return Ok(None),
            }
        }
    }
    Ok(Some(pts))
}

/// Containment of a single block in a union of blocks.
pub(crate) fn block_subset(b: &Block, blocks: &[Block]) -> Result<bool> {
    let member = |p: &TheoryPoint| blocks.iter().any(|x| x.member(p));
    match b {
        Block::FinSet(s) => Ok(s.iter().all(member)),
        Block::Fan(f) => {
            if f.include_limit && !member(&f.limit) {
                return Ok(false);
            }
            let hits = blocks
                .iter()
                .fold(PosSet::empty(), |acc, x| acc.union(&fan_hits(f, x)));
            Ok(f.flips.is_subset(&hits))
        }
        Block::Cube(m) => Ok(match m.finite_points() {
            Some(pts) => pts.iter().all(member),
            None => cube_covered(m, blocks),
        }),
        Block::FanArray(a) => {
            if a.include_base {
                let ok = match a.base.finite_points() {
                    Some(pts) => pts.iter().all(member),
                    None => cube_covered(&a.base, blocks),
                };
                if !ok {
                    return Ok(false);
                }
            }
            let (residual, extra, others) = split_same_base(a, blocks);
            if extra.iter().any(|p| !member(p)) {
                return Ok(false);
            }
            if residual.coding.is_empty() {
                return Ok(true);
            }
            if let Some(pts) = residual.finite_points() {
                return Ok(pts.iter().all(member));
            }
            match others_finite_meet(&residual, &others)? {
                // Infinite residual against finitely many covered points.
                Some(_) => Ok(false),
                None => Err(Error::UnsupportedComparison(format!(
                    "fan array over {} against infinite pieces of other shapes",
                    a.base
                ))),
            }
        }
    }
}

/// Splits the fan part of `a` against same-base arrays in `blocks`: returns
/// the residual array (coding positions nobody covers), points on covered
/// columns that every covering array excludes, and the remaining blocks.
fn split_same_base<'a>(
    a: &FanArray,
    blocks: &'a [Block],
) -> (FanArray, Vec<TheoryPoint>, Vec<&'a Block>) {
    let mut covered = PosSet::empty();
    let mut excluded_elsewhere = BTreeSet::new();
    let mut others = Vec::new();
    let mut same = Vec::new();
    for x in blocks {
        match x {
            Block::FanArray(o) if o.base == a.base => {
                covered = covered.union(&o.coding);
                excluded_elsewhere.extend(o.excluded.iter().cloned());
                same.push(o);
            }
            _ => others.push(x),
        }
    }
    let extra: Vec<TheoryPoint> = excluded_elsewhere
        .into_iter()
        .filter(|p| a.member(p) && a.is_fan_point(p) && !same.iter().any(|o| o.member(p)))
        .collect();
    let residual = FanArray {
        base: a.base.clone(),
        coding: a.coding.difference(&covered),
        include_base: false,
        excluded: a.excluded.clone(),
    };
    (residual, extra, others)
}

/// `b ∖ ⋃ blocks`, exact or an error.
pub(crate) fn block_minus(b: &Block, blocks: &[Block]) -> Result<Vec<Block>> {
    let member = |p: &TheoryPoint| blocks.iter().any(|x| x.member(p));
    let unsupported = |what: &str| {
        Err(Error::UnsupportedComparison(format!(
            "difference of a {what} with a partially overlapping family"
        )))
    };
    match b {
        Block::FinSet(s) => Ok(vec![Block::finset(s.iter().filter(|p| !member(p)).cloned())]),
        Block::Fan(f) => {
            let hits = blocks
                .iter()
                .fold(PosSet::empty(), |acc, x| acc.union(&fan_hits(f, x)));
            Ok(vec![Block::Fan(Fan::new(
                f.limit.clone(),
                f.flips.difference(&hits),
                f.dev.clone(),
                f.include_limit && !member(&f.limit),
            ))])
        }
        Block::Cube(m) => {
            if let Some(pts) = m.finite_points() {
                return Ok(vec![Block::finset(pts.into_iter().filter(|p| !member(p)))]);
            }
            if cube_covered(m, blocks) {
                return Ok(Vec::new());
            }
            if disjoint_from(b, blocks)? {
                Ok(vec![b.clone()])
            } else {
                unsupported("cube")
            }
        }
        Block::FanArray(a) => {
            let mut out = Vec::new();
            if a.include_base {
                let base = super::calculus::mask_block(a.base.clone());
                match &base {
                    Block::FinSet(_) => out.extend(block_minus(&base, blocks)?),
                    _ if cube_covered(&a.base, blocks) => {}
                    _ if disjoint_from(&base, blocks)? => out.push(base),
                    _ => return unsupported("fan-array base"),
                }
            }
            let (mut residual, extra, others) = split_same_base(a, blocks);
            out.push(Block::finset(extra.into_iter().filter(|p| !member(p))));
            if residual.coding.is_empty() {
                return Ok(out);
            }
            match others_finite_meet(&residual, &others)? {
                Some(pts) => {
                    residual.excluded.extend(pts);
                    out.push(Block::FanArray(residual));
                    Ok(out)
                }
                None => unsupported("fan array"),
            }
        }
    }
}

fn disjoint_from(b: &Block, blocks: &[Block]) -> Result<bool> {
    for x in blocks {
        let inter = intersect_blocks(b, x).map_err(|e| match e {
            Error::UnsupportedIntersection(m) => Error::UnsupportedComparison(m),
            e => e,
        })?;
        if inter.iter().any(|r| !block_is_empty(r)) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn block_is_empty(b: &Block) -> bool {
    match b {
        Block::FinSet(s) => s.is_empty(),
        Block::Fan(f) => f.flips.is_empty() && !f.include_limit,
        Block::Cube(_) => false,
        Block::FanArray(a) => {
            !a.include_base
                && (a.coding.is_empty()
                    || a.finite_points().is_some_and(|p| p.is_empty()))
        }
    }
}
