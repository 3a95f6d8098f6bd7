//! The end-to-end checks, one function per criterion, shared by the
//! acceptance tests and `unitdist verify-all`.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::cayley_menger::{
    apex_simplex_independent, verify_lemma1_samples, verify_lemma5_samples,
};
use crate::density::{approx_distance, Target};
use crate::embed::{embed, subset_echo};
use crate::endo_field::{
    conj, counterexample_report, grid20, sweep_pairs, QuadExtNumber, QuadPoint,
};
use crate::par;
use crate::rational::{format_rational, int, rat, Rational};
use crate::sampling::{derive_seed, positive_rational, rng, signed_rational};
use crate::witness::derivation::{k_of_n, rho_sq, DerivationBuilder, NodeId};
use crate::witness::graph::{build_witness, witness_stats};
use crate::witness::membership::{derive_membership, family_target_sq};
use crate::witness::validate::{all_pass, validate_derivation};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed_ms: u128,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({} ms)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed_ms
        )
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> (bool, String)) -> CriterionResult {
    timed_within(id, name, None, f)
}

/// Runs a check; with a budget, exceeding it fails the criterion.
fn timed_within(
    id: u8,
    name: &'static str,
    budget_ms: Option<u128>,
    f: impl FnOnce() -> (bool, String),
) -> CriterionResult {
    let start = Instant::now();
    let (mut pass, mut detail) = f();
    let elapsed_ms = start.elapsed().as_millis();
    if let Some(budget) = budget_ms {
        if elapsed_ms > budget {
            pass = false;
            detail.push_str(&format!("; over the {budget} ms budget"));
        }
    }
    CriterionResult {
        id,
        name,
        pass,
        detail,
        elapsed_ms,
    }
}

pub fn bipyramid_identity(seed: u64) -> CriterionResult {
    timed_within(1, "bipyramid determinant identity", Some(10_000), || {
        let mut total = 0;
        let mut passed = 0;
        for n in 2..=8 {
            let out = verify_lemma1_samples(n, 50, seed);
            total += out.len();
            passed += out.iter().filter(|o| o.pass).count();
        }
        (
            passed == total && total == 350,
            format!("{passed}/{total} exact matches for n=2..8"),
        )
    })
}

pub fn kite_identity(seed: u64) -> CriterionResult {
    timed_within(
        2,
        "planar contraction determinant identity",
        Some(1_000),
        || {
            let out = verify_lemma5_samples(50, seed);
            let passed = out.iter().filter(|o| o.pass).count();
            (passed == 50, format!("{passed}/50 exact matches"))
        },
    )
}

pub fn witness_sizes() -> CriterionResult {
    timed(3, "witness sizes", || {
        let cases = [
            ((2, 0, 0), (2, 1)),
            ((2, 0, 1), (7, 11)),
            ((3, 1, 0), (9, 19)),
        ];
        let mut ok = true;
        let mut parts = Vec::new();
        for ((n, k, l), want) in cases {
            let got = derive_membership(n, k, l)
                .map_err(|e| e.to_string())
                .and_then(|d| build_witness(&d).map_err(|e| e.to_string()))
                .map(|g| {
                    let s = witness_stats(&g);
                    (s.vertex_count, s.edge_count)
                });
            // a pure-unit bipyramid has 2n+3 points and 4n+n(n-1)+1 pairs
            let formula = if l == 0 && k == 0 {
                (2, 1)
            } else {
                (2 * n + 3, 4 * n + n * (n - 1) + 1)
            };
            let good = got.as_ref().is_ok_and(|g| *g == want) && formula == want;
            ok &= good;
            parts.push(format!("({n},{k},{l}) -> {got:?}"));
        }
        (ok, parts.join(", "))
    })
}

pub fn k_and_rho() -> CriterionResult {
    timed_within(4, "k(n) and rho(n)", Some(1_000), || {
        let ks = [(3, 0), (4, 0), (5, 1), (100, 10)];
        let k_ok = ks.iter().all(|&(n, k)| k_of_n(n) == k);
        let quarter = rat(1, 4);
        let bad: Vec<usize> = par::filter_map_range(3..1001, |n| {
            let r = rho_sq(n);
            (!(r >= quarter && r < Rational::one())).then_some(n)
        });
        (
            k_ok && bad.is_empty(),
            format!(
                "k(3,4,5,100)=({},{},{},{}), rho^2 outside [1/4,1) for {} of n=3..1000",
                k_of_n(3),
                k_of_n(4),
                k_of_n(5),
                k_of_n(100),
                bad.len()
            ),
        )
    })
}

/// 100 seeded targets in `[0.1, 10]`, as rationals with six decimals.
pub fn density_targets(seed: u64) -> Vec<Target> {
    let mut r = rng(derive_seed(seed, "density-targets"));
    (0..100)
        .map(|_| {
            let micro: i64 = r.random_range(100_000..=10_000_000);
            let v = Rational::new(BigInt::from(micro), BigInt::from(1_000_000));
            Target::from_sq(&v * &v).expect("positive")
        })
        .collect()
}

pub fn density(seed: u64) -> CriterionResult {
    timed_within(5, "density of certified distances", Some(30_000), || {
        let targets = density_targets(seed);
        let tol = rat(1, 1000);
        let mut failures = Vec::new();
        let mut max_kl = 0;
        for n in [2, 3, 7] {
            let results = par::map(&targets, |t| {
                let a = approx_distance(n, t, &tol, 10_000).map_err(|e| e.to_string())?;
                let d = derive_membership(n, a.k, a.l).map_err(|e| e.to_string())?;
                if d.target_sq() != &a.achieved_sq || a.rel_error > 1e-3 {
                    return Err(format!(
                        "k={} l={} does not certify the reported value",
                        a.k, a.l
                    ));
                }
                Ok(a.k + a.l)
            });
            for (t, r) in targets.iter().zip(results) {
                match r {
                    Ok(s) => max_kl = max_kl.max(s),
                    Err(e) => failures.push(format!("n={n} target {t}: {e}")),
                }
            }
        }
        (
            failures.is_empty(),
            if failures.is_empty() {
                format!("300/300 targets within 1e-3, max k+l = {max_kl}")
            } else {
                format!("{} failures, first: {}", failures.len(), failures[0])
            },
        )
    })
}

/// Every derivation of depth at most `max_depth` in dimension `n`: all rule
/// applications whose inputs are themselves such derivations. Identical
/// applications are shared by the builder, so each appears once.
pub fn shallow_derivations(n: usize, max_depth: usize) -> Vec<crate::witness::Derivation> {
    let mut b = DerivationBuilder::new();
    let base = b.base();
    let mut known: Vec<NodeId> = vec![base];
    for _ in 1..max_depth {
        let level = known.clone();
        let mut fresh = Vec::new();
        for &d in &level {
            for &e in &level {
                for &eps in &level {
                    fresh.extend(b.lemma1(n, d, e, eps).ok());
                }
                if n == 2 {
                    fresh.extend(b.lemma3(d, e).ok());
                }
            }
            fresh.extend(b.lemma2(n, 1, d).ok());
            if n >= 3 {
                fresh.extend(b.star(n, d).ok());
            } else {
                fresh.extend(b.lemma5(d).ok());
            }
        }
        fresh.extend((2..max_depth).filter_map(|m| b.lemma2(n, m, base).ok()));
        for id in fresh {
            if b.node(id).depth <= max_depth && !known.contains(&id) {
                known.push(id);
            }
        }
    }
    known
        .into_iter()
        .map(|id| {
            b.clone()
                .finish(id, n)
                .expect("dimension checked by the builder")
        })
        .collect()
}

pub fn embedding_residuals(seed: u64) -> CriterionResult {
    timed(6, "embedding residuals", || {
        let mut count = 0;
        let mut worst = (0.0f64, 0.0f64, 0.0f64);
        let mut failures = Vec::new();
        for (n, depth) in [(2, 3), (3, 2), (4, 2), (5, 2)] {
            for der in shallow_derivations(n, depth) {
                let g = build_witness(&der).expect("small witness");
                let e = embed(&g, seed).expect("embeds");
                let echo = subset_echo(&g, &e, 20, seed);
                count += 1;
                worst.0 = worst.0.max(e.max_residual);
                worst.1 = worst.1.max(e.target_residual);
                worst.2 = worst.2.max(echo.max_float_abs_det);
                if e.max_residual > 1e-9
                    || e.target_residual > 1e-9
                    || echo.exact_nonzero > 0
                    || echo.exact_subsets == 0 && der.depth() > 1
                {
                    failures.push(format!(
                        "n={n} target_sq={}",
                        format_rational(der.target_sq())
                    ));
                }
            }
        }
        (
            failures.is_empty(),
            format!(
                "{count} witnesses, max edge residual {:.1e}, max target residual {:.1e}, max float det {:.1e}, {} failures",
                worst.0,
                worst.1,
                worst.2,
                failures.len()
            ),
        )
    })
}

pub fn conjugation_mechanism() -> CriterionResult {
    timed(7, "conjugation breaks irrational, keeps rational", || {
        let p = 2;
        let pt = |a: (i64, i64), b: (i64, i64)| {
            QuadPoint::from_parts(p, &[(int(a.0), int(a.1)), (int(b.0), int(b.1))])
                .expect("Q(sqrt 2)")
        };
        let r =
            counterexample_report(&pt((0, 0), (0, 0)), &pt((1, 1), (0, 0))).expect("same field");
        let mech =
            r.phi_before == "3 + 2*sqrt(2)" && r.phi_after == "3 - 2*sqrt(2)" && !r.preserved;
        let s = sweep_pairs(&grid20(p).expect("grid")).expect("same field");
        (
            mech && s.all_rational_preserved() && s.rational_pairs > 0,
            format!(
                "{} -> {}; grid: {}/{} rational pairs preserved, {} irrational pairs moved",
                r.phi_before,
                r.phi_after,
                s.rational_preserved,
                s.rational_pairs,
                s.irrational_moved
            ),
        )
    })
}

fn quad<R: Rng>(r: &mut R, p: i64) -> QuadExtNumber {
    QuadExtNumber::new(signed_rational(r), signed_rational(r), p).expect("squarefree")
}

fn conj_laws(seed: u64) -> Result<usize, String> {
    let mut r = rng(derive_seed(seed, "conj-laws"));
    let primes = [2, 3, 5, 6, 7, 10, 11];
    for i in 0..100 {
        let p = primes[i % primes.len()];
        let (u, v) = (quad(&mut r, p), quad(&mut r, p));
        let zero = QuadExtNumber::rational(Rational::zero(), p).expect("field");
        let one = QuadExtNumber::rational(Rational::one(), p).expect("field");
        let ok = conj(&(&u + &v)) == &conj(&u) + &conj(&v)
            && conj(&(&u * &v)) == &conj(&u) * &conj(&v)
            && conj(&conj(&u)) == u
            && conj(&zero) == zero
            && conj(&one) == one;
        if !ok {
            return Err(format!("sample {i}: u={u} v={v}"));
        }
    }
    Ok(100)
}

fn rational_squares(seed: u64) -> Result<usize, String> {
    let mut r = rng(derive_seed(seed, "rational-squares"));
    for i in 0..100 {
        let n = r.random_range(2..=7);
        let (k, l) = (r.random_range(0..=4), r.random_range(0..=4));
        let d = derive_membership(n, k, l).map_err(|e| e.to_string())?;
        let sq = d.target_sq();
        let every_node_positive = d
            .reachable()
            .iter()
            .all(|&id| d.node(id).target_sq.is_positive());
        if !(sq.is_positive()
            && *sq == family_target_sq(n, k, l)
            && every_node_positive
            && all_pass(&validate_derivation(&d)))
        {
            return Err(format!("sample {i}: n={n} k={k} l={l}"));
        }
    }
    Ok(100)
}

fn substitution_isomorphism(seed: u64) -> Result<usize, String> {
    let mut r = rng(derive_seed(seed, "substitution-iso"));
    let mut b = DerivationBuilder::new();
    let one = b.base();
    let mut pool: Vec<NodeId> = vec![one];
    for m in 1..=2 {
        pool.push(b.lemma2(2, m, one).map_err(|e| e.to_string())?);
    }
    pool.push(b.lemma5(one).map_err(|e| e.to_string())?);
    let pairs: Vec<(NodeId, NodeId)> = pool
        .iter()
        .flat_map(|&a| pool.iter().map(move |&c| (a, c)))
        .filter(|&(a, c)| int(5) * b.target_sq(a) <= int(16) * b.target_sq(c))
        .collect();
    let mut verdicts: std::collections::HashMap<(NodeId, NodeId), bool> =
        std::collections::HashMap::new();
    let mut done = 0;
    for i in 0..100 {
        let (a, c) = pairs[r.random_range(0..pairs.len())];
        if let Some(&ok) = verdicts.get(&(a, c)) {
            if !ok {
                return Err(format!("sample {i}"));
            }
            done += 1;
            continue;
        }
        let via3 = b.lemma3(a, c).map_err(|e| e.to_string())?;
        let via1 = b.lemma1(2, a, c, a).map_err(|e| e.to_string())?;
        let der = b.clone().finish(via3, 2).map_err(|e| e.to_string())?;
        let counts3 = crate::witness::graph::witness_counts(&der);
        if counts3.vertices > num_bigint::BigUint::from(200_000u32) {
            continue;
        }
        let g3 = build_witness(&der).map_err(|e| e.to_string())?;
        let g1 = build_witness(&der.rerooted(via1)).map_err(|e| e.to_string())?;
        let ok = g3.isomorphic_by_id(&g1);
        verdicts.insert((a, c), ok);
        if !ok {
            return Err(format!("sample {i}"));
        }
        done += 1;
    }
    Ok(done)
}

fn cm_cross_check(seed: u64) -> Result<usize, String> {
    let mut r = rng(derive_seed(seed, "cm-cross-check"));
    for i in 0..100 {
        let n: usize = r.random_range(2..=8);
        let d2 = positive_rational(&mut r);
        // every other sample sits exactly on the degenerate boundary
        let e2 = if i % 2 == 0 {
            Rational::new(BigInt::from(n as i64 - 1), BigInt::from(2 * n as i64)) * &d2
        } else {
            positive_rational(&mut r)
        };
        let boundary = int(2 * n as i64) * &e2 == int(n as i64 - 1) * &d2;
        match apex_simplex_independent(n, &d2, &e2) {
            Ok(indep) if indep != boundary => {}
            Ok(_) => return Err(format!("sample {i}: wrong verdict")),
            Err(e) => return Err(format!("sample {i}: {e}")),
        }
    }
    Ok(100)
}

pub fn property_suites(seed: u64) -> CriterionResult {
    timed(8, "property suites", || {
        let runs: [(&str, Result<usize, String>); 4] = [
            ("conj laws", conj_laws(seed)),
            ("rational squares", rational_squares(seed)),
            ("substitution isomorphism", substitution_isomorphism(seed)),
            ("CM cross-check", cm_cross_check(seed)),
        ];
        let pass = runs.iter().all(|(_, r)| matches!(r, Ok(c) if *c > 0));
        let detail = runs
            .iter()
            .map(|(name, r)| match r {
                Ok(c) => format!("{name} {c} ok"),
                Err(e) => format!("{name} FAILED {e}"),
            })
            .collect::<Vec<_>>()
            .join(", ");
        (pass, detail)
    })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        bipyramid_identity(seed),
        kite_identity(seed),
        witness_sizes(),
        k_and_rho(),
        density(seed),
        embedding_residuals(seed),
        conjugation_mechanism(),
        property_suites(seed),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: Vec<CriterionResult>,
    pub pass: bool,
}

pub fn summary(seed: u64) -> SuiteSummary {
    let suite = run_all(seed);
    let pass = suite.iter().all(|c| c.pass);
    SuiteSummary { suite, pass }
}
