use proptest::prelude::*;
use unitdist::endo_field::{
    conj, counterexample_report, endo_map, endo_map_with, grid20, phi_quad, sweep_pairs,
    QuadExtNumber, QuadPoint, RationalIsometry,
};
use unitdist::rational::{int, rat, Rational};

const PRIMES: [i64; 4] = [2, 3, 5, 7];

fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=9).prop_map(|(p, q)| rat(p, q))
}

fn quad(p: i64) -> impl Strategy<Value = QuadExtNumber> {
    (rational(), rational()).prop_map(move |(a, b)| QuadExtNumber::new(a, b, p).unwrap())
}

fn point(p: i64, dim: usize) -> impl Strategy<Value = QuadPoint> {
    prop::collection::vec(quad(p), dim).prop_map(move |c| QuadPoint::new(p, c).unwrap())
}

fn field_and_two() -> impl Strategy<Value = (i64, QuadExtNumber, QuadExtNumber)> {
    prop::sample::select(PRIMES.to_vec()).prop_flat_map(|p| (Just(p), quad(p), quad(p)))
}

fn two_points() -> impl Strategy<Value = (QuadPoint, QuadPoint)> {
    (prop::sample::select(PRIMES.to_vec()), 1usize..=4)
        .prop_flat_map(|(p, dim)| (point(p, dim), point(p, dim)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn conjugation_is_a_field_automorphism((_p, x, y) in field_and_two()) {
        prop_assert_eq!(conj(&(&x + &y)), &conj(&x) + &conj(&y));
        prop_assert_eq!(conj(&(&x * &y)), &conj(&x) * &conj(&y));
        prop_assert_eq!(conj(&conj(&x)), x.clone());
        prop_assert_eq!((&x * &conj(&x)).a().clone(), x.norm());
        prop_assert!((&x * &conj(&x)).is_rational());
        if !y.is_zero() {
            prop_assert_eq!(conj(&x.checked_div(&y).unwrap()), conj(&x).checked_div(&conj(&y)).unwrap());
        }
    }

    #[test]
    fn phi_commutes_with_conjugation((x, y) in two_points()) {
        let before = phi_quad(&x, &y).unwrap();
        let after = phi_quad(&endo_map(&x), &endo_map(&y)).unwrap();
        prop_assert_eq!(after, conj(&before));
        let r = counterexample_report(&x, &y).unwrap();
        prop_assert!(r.dichotomy_holds());
        prop_assert_eq!(r.preserved, before.is_rational());
    }

    #[test]
    fn rational_isometries_commute_with_phi(a in rational(), b in rational(), t in prop::collection::vec(rational(), 2), pts in prop::collection::vec(point(2, 2), 2)) {
        // rotation from a Pythagorean pair (c, s) = ((1 - u^2), 2u) / (1 + u^2)
        let u = &a / (int(1) + &b * &b);
        let den = int(1) + &u * &u;
        let c = (int(1) - &u * &u) / &den;
        let s = int(2) * &u / &den;
        let iso = RationalIsometry::new(vec![vec![c.clone(), -s.clone()], vec![s, c]], t).unwrap();
        let (x, y) = (&pts[0], &pts[1]);
        let fx = endo_map_with(Some(&iso), x).unwrap();
        let fy = endo_map_with(Some(&iso), y).unwrap();
        prop_assert_eq!(phi_quad(&fx, &fy).unwrap(), conj(&phi_quad(x, y).unwrap()));
    }
}

#[test]
fn non_orthogonal_map_is_refused() {
    let m = vec![vec![int(1), int(1)], vec![int(0), int(1)]];
    assert!(RationalIsometry::new(m, vec![int(0), int(0)]).is_err());
}

#[test]
fn grids_in_several_fields() {
    for p in PRIMES {
        let pts = grid20(p).unwrap();
        assert_eq!(pts.len(), 20);
        let s = sweep_pairs(&pts).unwrap();
        assert_eq!(s.pairs, 190);
        assert!(s.all_rational_preserved());
        assert_eq!(s.rational_pairs + s.irrational_moved, 190, "p={p}");
        assert!(s.irrational_moved > 0);
    }
}

#[test]
fn non_squarefree_field_is_refused() {
    for p in [0, 1, 4, 12, -4] {
        assert!(QuadExtNumber::new(int(1), int(1), p).is_err(), "p={p}");
    }
}
