//! Finite Boolean algebras of closures of generator subsets, and
//! Cantor-Bendixson derivative chains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blocks::{difference, family_eq, family_subset, intersect, union, Block, Family};
use crate::closure::{acc_points, closure};
use crate::error::{Error, Result};
use crate::lattice::LatticeElement;
use crate::stone::TheoryPoint;

pub const GENERATOR_CAP: usize = 16;
const EXHAUSTIVE_LIMIT: usize = 1 << 8;
const SAMPLED_PAIRS: usize = 10_000;
const CHAIN_CAP: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraElement {
    /// Bit `i` set when generator `i` is in the subset.
    pub mask: u32,
    pub denotation: Family,
}

#[derive(Clone, Debug)]
pub struct Algebra {
    pub generators: Vec<TheoryPoint>,
    pub elements: Vec<AlgebraElement>,
}

/// Up to `n` points of `f`, taken block by block.
pub fn first_points(f: &Family, n: usize) -> Vec<TheoryPoint> {
    let mut out = Vec::new();
    for b in f.blocks() {
        let room = n - out.len();
        match b {
            Block::FinSet(s) => out.extend(s.iter().take(room).cloned()),
            Block::Fan(fan) => out.extend(fan.points().take(room)),
            Block::FanArray(a) => out.extend(a.points().take(room)),
            Block::Cube(m) => out.extend(std::iter::once(m.zero_fill()).take(room)),
        }
        if out.len() == n {
            break;
        }
    }
    out
}

/// The algebra on the first `n` points of the least generating set.
pub fn build_algebra(f: &LatticeElement, n: usize) -> Result<Algebra> {
    let lgs = f.lgs.as_ref().ok_or(Error::NoLgs)?;
    build_algebra_on(f, first_points(lgs, n))
}

pub fn build_algebra_on(f: &LatticeElement, generators: Vec<TheoryPoint>) -> Result<Algebra> {
    let lgs = f.lgs.as_ref().ok_or(Error::NoLgs)?;
    if generators.len() > GENERATOR_CAP {
        return Err(Error::CapExceeded { cap: GENERATOR_CAP });
    }
    if let Some(p) = generators.iter().find(|p| !lgs.member(p)) {
        return Err(Error::Precondition(format!("{p} is not a generator")));
    }
    let n = generators.len();
    let elements = (0..1u32 << n)
        .map(|mask| AlgebraElement {
            mask,
            denotation: closure(&Family::points(
                (0..n).filter(|i| mask >> i & 1 == 1).map(|i| generators[i].clone()),
            )),
        })
        .collect();
    Ok(Algebra {
        generators,
        elements,
    })
}

impl Algebra {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn top(&self) -> &AlgebraElement {
        self.elements.last().expect("nonempty")
    }

    fn full(&self) -> u32 {
        (self.elements.len() - 1) as u32
    }

    pub fn meet(&self, a: u32, b: u32) -> u32 {
        a & b
    }

    pub fn join(&self, a: u32, b: u32) -> u32 {
        a | b
    }

    pub fn complement(&self, a: u32) -> u32 {
        !a & self.full()
    }

    /// Elements whose denotation is a single point.
    pub fn atoms(&self) -> Vec<u32> {
        self.elements
            .iter()
            .filter(|e| e.denotation.finite_points().is_some_and(|p| p.len() == 1))
            .map(|e| e.mask)
            .collect()
    }

    fn den(&self, m: u32) -> &Family {
        &self.elements[m as usize].denotation
    }

    fn pair_ok(&self, a: u32, b: u32) -> Result<bool> {
        let (da, db) = (self.den(a), self.den(b));
        let order = family_subset(da, db)? == (a & !b == 0);
        let m = family_eq(self.den(self.meet(a, b)), &intersect(da, db)?)?;
        let j = family_eq(self.den(self.join(a, b)), &union(da, db))?;
        let c = family_eq(
            self.den(self.complement(a)),
            &difference(&self.top().denotation, da)?,
        )?;
        Ok(order && m && j && c)
    }

    /// Order isomorphism with the generator powerset, with the operations
    /// commuting. Exhaustive up to 256 elements, sampled beyond.
    pub fn iso_check(&self) -> Result<bool> {
        let n = self.elements.len() as u32;
        if self.elements.len() <= EXHAUSTIVE_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    if !self.pair_ok(a, b)? {
                        return Ok(false);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..SAMPLED_PAIRS {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if !self.pair_ok(a, b)? {
                    return Ok(false);
                }
            }
        }
        let atoms = self.atoms();
        Ok(atoms.len() == self.generators.len() && atoms.iter().all(|m| m.count_ones() == 1))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let atoms = self.atoms();
        serde_json::Value::Array(
            self.elements
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "mask": e.mask,
                        "denotation": e.denotation.to_string(),
                        "atom": atoms.contains(&e.mask),
                    })
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CbProfile {
    pub derivative_chain: Vec<Family>,
    pub rank: usize,
    pub kernel_empty: bool,
}

/// Iterated derivatives until the chain reaches the empty set or a perfect
/// kernel.
pub fn cb_profile(f: &Family) -> Result<CbProfile> {
    let mut chain = vec![f.clone()];
    loop {
        let cur = chain.last().expect("nonempty");
        if cur.is_empty() {
            let rank = chain.len() - 1;
            return Ok(CbProfile {
                derivative_chain: chain,
                rank,
                kernel_empty: true,
            });
        }
        let next = acc_points(cur);
        if family_eq(&next, cur)? {
            chain.push(next);
            let rank = chain.len() - 2;
            return Ok(CbProfile {
                derivative_chain: chain,
                rank,
                kernel_empty: false,
            });
        }
        chain.push(next);
        if chain.len() > CHAIN_CAP {
            return Err(Error::CapExceeded { cap: CHAIN_CAP });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::{Fan, Mask, PosSet};

    fn pt(s: &str) -> TheoryPoint {
        s.parse().unwrap()
    }

    fn fan0() -> LatticeElement {
        LatticeElement::new(Family::from_block(Block::Fan(Fan::new(
            pt("~0"),
            PosSet::all(),
            vec![],
            true,
        ))))
        .unwrap()
    }

    #[test]
    fn small_algebras() {
        let a = build_algebra(&fan0(), 3).unwrap();
        assert_eq!(a.len(), 8);
        assert_eq!(
            a.top().denotation,
            Family::points([pt("1~0"), pt("01~0"), pt("001~0")])
        );
        assert!(a.iso_check().unwrap());
        let p = LatticeElement::new(Family::points([pt("~1")])).unwrap();
        let b = build_algebra(&p, 16).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iso_check().unwrap());
    }

    #[test]
    fn cube_has_no_algebra() {
        let c = LatticeElement::new(Family::from_block(Block::Cube(Mask::parse("~F0").unwrap()))).unwrap();
        assert!(matches!(build_algebra(&c, 2), Err(Error::NoLgs)));
    }

    #[test]
    fn profiles() {
        let p = cb_profile(&fan0().family).unwrap();
        assert_eq!(p.rank, 2);
        assert!(p.kernel_empty);
        assert_eq!(p.derivative_chain[1], Family::points([pt("~0")]));
        let c = Family::from_block(Block::Cube(Mask::parse("~F0").unwrap()));
        let q = cb_profile(&c).unwrap();
        assert_eq!(q.derivative_chain.len(), 2);
        assert!(!q.kernel_empty);
        let s = cb_profile(&Family::points([pt("~1")])).unwrap();
        assert_eq!((s.rank, s.kernel_empty), (1, true));
    }
}
