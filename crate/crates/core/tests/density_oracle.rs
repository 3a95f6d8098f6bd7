use num_traits::{One, ToPrimitive};
use unitdist::density::{approach_sequence, approx_distance, kronecker_slope_check, Target};
use unitdist::rational::{int, rat, Rational};

// Squared family value built from the generators directly:
// n = 2: (11/25)^k 3^l; n >= 3: (2 + 2/n)^k (4/n^2)^l.
fn member_sq(n: usize, k: usize, l: usize) -> Rational {
    let (a, b) = if n == 2 {
        (rat(11, 25), int(3))
    } else {
        let n = n as i64;
        (int(2) + rat(2, n), rat(4, n * n))
    };
    num_traits::pow(a, k) * num_traits::pow(b, l)
}

fn within(a: &Rational, t: &Rational, tol: &Rational) -> bool {
    let one = Rational::one();
    let lo = (&one - tol) * (&one - tol) * t;
    let hi = (&one + tol) * (&one + tol) * t;
    &lo <= a && a <= &hi
}

// First pair in (k + l, k) order whose value lands in the band. Pairs far
// outside the band in log space are skipped before the exact check.
fn brute_force(n: usize, t: &Rational, tol: &Rational, max_sum: usize) -> Option<(usize, usize)> {
    let ln = |q: &Rational| q.to_f64().unwrap().ln();
    let (la, lb) = if n == 2 {
        (ln(&rat(11, 25)), 3f64.ln())
    } else {
        let n = n as i64;
        (ln(&(int(2) + rat(2, n))), ln(&rat(4, n * n)))
    };
    let (lt, slack) = (ln(t), 2.0 * (1.0 + tol.to_f64().unwrap()).ln() + 1e-6);
    (0..=max_sum).find_map(|s| {
        (0..=s)
            .find(|&k| {
                (k as f64 * la + (s - k) as f64 * lb - lt).abs() <= slack
                    && within(&member_sq(n, k, s - k), t, tol)
            })
            .map(|k| (k, s - k))
    })
}

#[test]
fn two_at_one_permille_matches_brute_force() {
    let tol = rat(1, 1000);
    for n in [2, 3, 4] {
        let got = approx_distance(n, &"2".parse().unwrap(), &tol, 10_000).unwrap();
        let want = brute_force(n, &int(4), &tol, 2000).expect("found within k + l <= 2000");
        assert_eq!((got.k, got.l), want, "n={n}");
        assert_eq!(got.achieved_sq, member_sq(n, got.k, got.l));
        assert!(got.rel_error <= 1e-3);
    }
}

#[test]
fn assorted_targets_match_brute_force() {
    let tol = rat(1, 100);
    for target in ["1/3", "5/2", "7", "sqrt(5)", "0.9"] {
        let t: Target = target.parse().unwrap();
        let got = approx_distance(2, &t, &tol, 10_000).unwrap();
        let want = brute_force(2, &t.sq, &tol, 200).unwrap();
        assert_eq!((got.k, got.l), want, "{target}");
    }
}

#[test]
fn success_and_cost_are_monotone_in_kmax() {
    let t: Target = "2.5".parse().unwrap();
    let tol = rat(1, 1000);
    let mut prev: Option<usize> = None;
    for kmax in [1, 5, 20, 80, 320, 1280] {
        match approx_distance(2, &t, &tol, kmax) {
            Ok(a) => {
                if let Some(p) = prev {
                    assert!(a.k + a.l <= p);
                }
                prev = Some(a.k + a.l);
            }
            Err(_) => assert!(prev.is_none(), "success lost at kmax={kmax}"),
        }
    }
    assert!(prev.is_some());
}

#[test]
fn halving_tolerance_never_gets_cheaper() {
    let t: Target = "sqrt(2)".parse().unwrap();
    let mut tol = rat(1, 10);
    let mut prev = 0;
    for _ in 0..8 {
        let a = approx_distance(3, &t, &tol, 10_000).unwrap();
        assert!(a.k + a.l >= prev);
        assert!(within(&a.achieved_sq, &int(2), &tol));
        prev = a.k + a.l;
        tol /= int(2);
    }
}

#[test]
fn pi_approach_improves_strictly() {
    let t: Target = "3.14159265358979".parse().unwrap();
    let seq = approach_sequence(2, &t, 5).unwrap();
    assert_eq!(seq.len(), 5);
    let pi = std::f64::consts::PI;
    for w in seq.windows(2) {
        assert!((w[1].value - pi).abs() < (w[0].value - pi).abs());
        assert!((w[0].k + w[0].l, w[0].k) < (w[1].k + w[1].l, w[1].k));
    }
    for a in &seq {
        assert_eq!(a.value_sq, member_sq(2, a.k, a.l));
    }
}

#[test]
fn certified_target_is_its_own_limit() {
    // 1/2 = 2/4 is one contraction step for n = 4
    let seq = approach_sequence(4, &"1/2".parse().unwrap(), 3).unwrap();
    assert_eq!(seq.len(), 1);
    assert_eq!((seq[0].k, seq[0].l), (0, 1));
    let seq = approach_sequence(2, &"sqrt(3)".parse().unwrap(), 4).unwrap();
    assert_eq!(seq.len(), 1);
    assert_eq!(seq[0].value_sq, int(3));
}

#[test]
fn exact_hit_has_zero_error() {
    let a = approx_distance(
        2,
        &"sqrt(33/25)".parse().unwrap(),
        &rat(1, 1_000_000_000),
        100,
    )
    .unwrap();
    assert_eq!((a.k, a.l), (1, 1));
    assert_eq!(a.rel_error, 0.0);
}

#[test]
fn generator_logs_are_independent() {
    for n in [2, 3, 4, 5, 8] {
        assert!(kronecker_slope_check(n, 60).unwrap(), "n={n}");
    }
    assert!(kronecker_slope_check(1, 10).is_err());
}
