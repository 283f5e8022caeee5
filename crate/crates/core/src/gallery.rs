//! Named example families and a seeded random family generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::{union, Block, Cell, Fan, FanArray, Family, Mask, PosSet};
use crate::closure::closure;
use crate::stone::{normalize_point, TheoryPoint};

#[derive(Clone, Debug, Default)]
pub struct Expected {
    /// Least-generating-set verdict per family, in order.
    pub has_least: Vec<bool>,
    /// Plain intersection of the first two families.
    pub meet: Option<Family>,
    /// Closure of the isolated points of that intersection.
    pub meet_prime: Option<Family>,
    /// Whether the two least generating sets are disjoint.
    pub lgs_disjoint: Option<bool>,
    /// Size of the lattice generated by all families under join and
    /// isolated-point meet.
    pub lattice_size: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GalleryCase {
    pub name: &'static str,
    pub summary: &'static str,
    pub families: Vec<Family>,
    pub expected: Expected,
}

impl GalleryCase {
    pub fn family(&self, name: &str) -> Option<&Family> {
        self.families.iter().find(|f| f.name.as_deref() == Some(name))
    }
}

fn pt(s: &str) -> TheoryPoint {
    s.parse().expect("valid point")
}

/// The fan `0^h 1 0^ω`, `h ≥ 0`, without its limit.
pub fn fan0() -> Family {
    Family::from_block(Block::Fan(Fan::new(
        TheoryPoint::zeros(),
        PosSet::all(),
        vec![],
        false,
    )))
    .named("fan0")
}

/// Even coordinates free, odd coordinates 0.
pub fn cube0_mask() -> Mask {
    Mask::parse("~F0").expect("valid mask")
}

pub fn cube0() -> Family {
    Family::from_block(Block::Cube(cube0_mask())).named("cube0")
}

fn array(coding_offset: usize, name: &str) -> Family {
    Family::from_block(Block::FanArray(FanArray::new(
        cube0_mask(),
        PosSet::arithmetic(4, coding_offset),
        true,
    )))
    .named(name)
}

/// Points of the canonical dense subset of `cube0`.
pub fn dense_points() -> Vec<TheoryPoint> {
    ["~0", "1~0", "001~0", "101~0", "00001~0"]
        .iter()
        .map(|s| pt(s))
        .collect()
}

pub fn make_fan_pair() -> GalleryCase {
    let t = closure(&fan0()).named("fan-t");
    let s = closure(&Family::from_block(Block::Fan(Fan::new(
        TheoryPoint::zeros(),
        PosSet::all(),
        vec![true],
        false,
    ))))
    .named("fan-s");
    let zero = Family::points([TheoryPoint::zeros()]);
    GalleryCase {
        name: "fan-pair",
        summary: "two fans with a common limit and disjoint members",
        families: vec![t, s],
        expected: Expected {
            has_least: vec![true, true],
            meet: Some(zero.clone()),
            meet_prime: Some(zero),
            lgs_disjoint: Some(true),
            lattice_size: Some(4),
        },
    }
}

pub fn make_intersection_counterexample() -> GalleryCase {
    GalleryCase {
        name: "intersection-counterexample",
        summary: "fan arrays over one cube with disjoint codings; their intersection is the cube",
        families: vec![array(1, "array-a"), array(3, "array-b")],
        expected: Expected {
            has_least: vec![true, true],
            meet: Some(cube0()),
            meet_prime: Some(Family::empty()),
            lgs_disjoint: Some(true),
            lattice_size: Some(4),
        },
    }
}

pub fn make_singleton_union_case() -> GalleryCase {
    let dense = dense_points();
    let mut families: Vec<Family> = dense
        .iter()
        .enumerate()
        .map(|(i, p)| Family::points([p.clone()]).named(format!("d{i}")))
        .collect();
    let joined = families
        .iter()
        .fold(Family::empty(), |acc, f| union(&acc, f))
        .named("singletons-join");
    families.push(joined);
    families.push(cube0().named("cube0"));
    GalleryCase {
        name: "singleton-union",
        summary: "singletons from a dense subset of a cube; finite joins keep generators, the cube does not",
        families,
        expected: Expected {
            has_least: vec![true, true, true, true, true, true, false],
            meet: Some(Family::empty()),
            meet_prime: Some(Family::empty()),
            lgs_disjoint: Some(true),
            lattice_size: None,
        },
    }
}

pub fn make_distributivity_counterexample() -> GalleryCase {
    let zero = Family::points([TheoryPoint::zeros()]).named("d0");
    GalleryCase {
        name: "distributivity-counterexample",
        summary: "a dense point between two fan arrays over one cube",
        families: vec![array(1, "array-a"), zero.clone(), array(3, "array-b")],
        expected: Expected {
            has_least: vec![true, true, true],
            meet: Some(zero.clone()),
            meet_prime: Some(zero),
            lgs_disjoint: Some(true),
            lattice_size: None,
        },
    }
}

pub fn cases() -> Vec<GalleryCase> {
    vec![
        make_fan_pair(),
        make_intersection_counterexample(),
        make_singleton_union_case(),
        make_distributivity_counterexample(),
    ]
}

pub fn case(name: &str) -> Option<GalleryCase> {
    cases().into_iter().find(|c| c.name == name)
}

/// Every named gallery family, including the two base fixtures, without
/// duplicates.
pub fn families() -> Vec<Family> {
    let mut out = vec![fan0(), cube0()];
    for c in cases() {
        for f in c.families {
            if !out.iter().any(|g| g.name == f.name) {
                out.push(f);
            }
        }
    }
    out
}

pub fn family(name: &str) -> Option<Family> {
    families().into_iter().find(|f| f.name.as_deref() == Some(name))
}

fn random_bits(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<bool> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| rng.gen_bool(0.5)).collect()
}

pub fn random_point(rng: &mut ChaCha8Rng) -> TheoryPoint {
    let prefix = random_bits(rng, 0, 4);
    let period = random_bits(rng, 1, 2);
    normalize_point(&prefix, &period).expect("nonempty period")
}

fn random_fan(rng: &mut ChaCha8Rng) -> Block {
    let limit = random_point(rng);
    let stride = rng.gen_range(1..=3);
    let offset = rng.gen_range(0..=3);
    let dev = random_bits(rng, 0, 2);
    let inc = rng.gen_bool(0.5);
    Block::Fan(Fan::new(limit, PosSet::arithmetic(stride, offset), dev, inc))
}

fn random_mask(rng: &mut ChaCha8Rng) -> Mask {
    let cell = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => Cell::Free,
        1 => Cell::Zero,
        _ => Cell::One,
    };
    let pre: Vec<Cell> = (0..rng.gen_range(0..=3)).map(|_| cell(rng)).collect();
    let mut per: Vec<Cell> = (0..rng.gen_range(1..=3)).map(|_| cell(rng)).collect();
    let k = rng.gen_range(0..per.len());
    per[k] = Cell::Free;
    Mask::new(pre, per).expect("nonempty period")
}

fn random_finset(rng: &mut ChaCha8Rng) -> Block {
    let n = rng.gen_range(1..=3);
    Block::finset((0..n).map(|_| random_point(rng)))
}

/// Reproducible family of `budget` finite, fan and cube blocks.
pub fn make_random_family(seed: u64, budget: usize) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<Block> = (0..budget)
        .map(|_| match rng.gen_range(0..3) {
            0 => random_finset(&mut rng),
            1 => random_fan(&mut rng),
            _ => Block::Cube(random_mask(&mut rng)),
        })
        .collect();
    Family::from_blocks(blocks).named(format!("random-{seed}"))
}

/// Reproducible closed family with a least generating set: the closure of
/// finitely many fans and points.
pub fn make_random_lgs_family(seed: u64, budget: usize) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1a77_1ce5);
    let blocks: Vec<Block> = (0..budget)
        .map(|_| {
            if rng.gen_bool(0.4) {
                random_finset(&mut rng)
            } else {
                random_fan(&mut rng)
            }
        })
        .collect();
    closure(&Family::from_blocks(blocks)).named(format!("random-lgs-{seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::family_eq;

    #[test]
    fn cases_are_named() {
        let names: Vec<_> = cases().iter().map(|c| c.name).collect();
        assert_eq!(names.len(), 4);
        assert!(family("array-a").is_some());
        assert!(family("fan-t").is_some());
        assert!(case("fan-pair").unwrap().family("fan-s").is_some());
    }

    #[test]
    fn random_is_deterministic() {
        let a = make_random_family(1, 3);
        let b = make_random_family(1, 3);
        assert!(family_eq(&a, &b).unwrap());
        assert!(!a.is_empty());
        let c = make_random_lgs_family(7, 3);
        assert!(family_eq(&c, &make_random_lgs_family(7, 3)).unwrap());
    }
}
