use theoria_core::blocks::{family_eq, intersect};
use theoria_core::closure::{isolated_points, least_generating_set};
use theoria_core::gallery::{self, cases};
use theoria_core::lattice::{generate_lattice, meet_prime, LatticeElement, Ops, DEFAULT_CAP};
use theoria_core::oracle::oracle_isolated;

#[test]
fn expected_records_match_engine() {
    for case in cases() {
        let elems: Vec<LatticeElement> = case
            .families
            .iter()
            .map(|f| LatticeElement::new(f.clone()).unwrap())
            .collect();
        let has: Vec<bool> = elems.iter().map(|e| e.has_lgs()).collect();
        assert_eq!(has, case.expected.has_least, "{}", case.name);
        let (a, b) = (&elems[0], &elems[1]);
        if let Some(m) = &case.expected.meet {
            let got = intersect(&a.family, &b.family).unwrap();
            assert!(family_eq(&got, m).unwrap(), "{}: meet {got}", case.name);
        }
        if let Some(m) = &case.expected.meet_prime {
            let got = meet_prime(a, b).unwrap();
            assert!(family_eq(&got.family, m).unwrap(), "{}: meet' {}", case.name, got.family);
        }
        if let Some(d) = case.expected.lgs_disjoint {
            let i = intersect(a.lgs.as_ref().unwrap(), b.lgs.as_ref().unwrap()).unwrap();
            assert_eq!(i.is_empty(), d, "{}", case.name);
        }
        if let Some(n) = case.expected.lattice_size {
            let l = generate_lattice(&elems, Ops::BOTH, DEFAULT_CAP).unwrap();
            assert_eq!(l.len(), n, "{}", case.name);
        }
    }
}

#[test]
fn isolated_points_agree_with_oracle() {
    for f in gallery::families() {
        let Ok(iso) = isolated_points(&f) else {
            continue;
        };
        for (p, _) in oracle_isolated(&f, 12).unwrap() {
            assert!(iso.member(&p), "{:?}: oracle isolates {p}", f.name);
        }
        let report = least_generating_set(&f).unwrap();
        for w in report.witnesses {
            assert!(iso.member(&w.point));
        }
    }
}
