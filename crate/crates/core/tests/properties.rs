use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use theoria_core::blocks::{family_count, family_eq, family_subset, intersect, union, Family};
use theoria_core::closure::{acc_points, closure, is_in_closure, isolated_points, sample_points, witness};
use theoria_core::dsl::{export, parse_family};
use theoria_core::gallery::{make_random_family, random_point};
use theoria_core::oracle::{oracle_in_closure, Verdict};
use theoria_core::stone::{normalize_point, TheoryPoint, Trichotomy};

fn family() -> impl Strategy<Value = Family> {
    (any::<u64>(), 1usize..4).prop_map(|(s, b)| make_random_family(s, b))
}

/// Random points plus points of both families and their one-bit neighbours.
fn probes(fs: &[&Family], seed: u64) -> Vec<TheoryPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<TheoryPoint> = (0..6).map(|_| random_point(&mut rng)).collect();
    for f in fs {
        for p in sample_points(&closure(f), 2) {
            out.push(p.flip(3));
            out.push(p);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn point_syntax_round_trips(pre in prop::collection::vec(any::<bool>(), 0..6),
                                per in prop::collection::vec(any::<bool>(), 1..4)) {
        let p = normalize_point(&pre, &per).unwrap();
        let q: TheoryPoint = p.to_string().parse().unwrap();
        prop_assert_eq!(&p, &q);
        let mut long = pre.clone();
        long.extend(&per);
        let r = normalize_point(&long, &[per.clone(), per.clone()].concat()).unwrap();
        prop_assert_eq!(p, r);
    }

    #[test]
    fn union_and_intersection_are_pointwise(a in family(), b in family(), s in any::<u64>()) {
        let u = union(&a, &b);
        let i = intersect(&a, &b);
        prop_assume!(i.is_ok());
        let i = i.unwrap();
        for p in probes(&[&a, &b], s) {
            prop_assert_eq!(u.member(&p), a.member(&p) || b.member(&p), "union at {}", p);
            prop_assert_eq!(i.member(&p), a.member(&p) && b.member(&p), "intersection at {}", p);
        }
    }

    #[test]
    fn union_laws(a in family(), b in family(), c in family()) {
        prop_assert!(family_eq(&union(&a, &b), &union(&b, &a)).unwrap());
        prop_assert!(family_eq(&union(&union(&a, &b), &c), &union(&a, &union(&b, &c))).unwrap());
        prop_assert!(family_eq(&union(&a, &a), &a).unwrap());
    }

    #[test]
    fn intersection_laws(a in family(), b in family(), c in family()) {
        let ab = intersect(&a, &b);
        let ba = intersect(&b, &a);
        prop_assume!(ab.is_ok() && ba.is_ok());
        prop_assert!(family_eq(&ab.unwrap(), &ba.unwrap()).unwrap());
        prop_assert!(family_eq(&intersect(&a, &a).unwrap(), &a).unwrap());
        let l = intersect(&a, &b).and_then(|x| intersect(&x, &c));
        let r = intersect(&b, &c).and_then(|x| intersect(&a, &x));
        if let (Ok(l), Ok(r)) = (l, r) {
            prop_assert!(family_eq(&l, &r).unwrap());
        }
    }

    #[test]
    fn closure_is_a_closure_operator(a in family(), b in family()) {
        let ca = closure(&a);
        prop_assert!(family_subset(&a, &ca).unwrap());
        prop_assert!(family_eq(&closure(&ca), &ca).unwrap());
        prop_assert!(family_subset(&ca, &closure(&union(&a, &b))).unwrap());
    }

    #[test]
    fn isolated_and_accumulation_points_partition(a in family()) {
        let c = closure(&a);
        let iso = isolated_points(&c).unwrap();
        let acc = acc_points(&c);
        prop_assert!(intersect(&iso, &acc).unwrap().is_empty());
        prop_assert!(family_eq(&union(&iso, &acc), &c).unwrap());
    }

    #[test]
    fn witnesses_isolate(a in family()) {
        let c = closure(&a);
        let iso = isolated_points(&c).unwrap();
        for t in sample_points(&iso, 3) {
            let phi = witness(&c, &t).unwrap();
            prop_assert_eq!(family_count(&c, &phi), Trichotomy::Finite(vec![t.clone()]));
        }
    }

    #[test]
    fn membership_never_contradicts_the_oracle(a in family(), s in any::<u64>()) {
        for t in probes(&[&a], s) {
            let (inside, _) = is_in_closure(&t, &a);
            for d in [0, 3, 7, 10] {
                let v = oracle_in_closure(&t, &a, d).unwrap();
                prop_assert!(!(inside && v == Verdict::No), "{} at depth {}", t, d);
                prop_assert!(!(!inside && v == Verdict::Yes), "{} at depth {}", t, d);
            }
        }
    }

    #[test]
    fn dsl_round_trip(a in family()) {
        let b = parse_family(&export(&a)).unwrap();
        prop_assert!(family_eq(&a, &b).unwrap());
        let c = closure(&a);
        prop_assert!(family_eq(&parse_family(&export(&c)).unwrap(), &c).unwrap());
    }
}
