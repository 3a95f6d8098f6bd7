//! Independent re-verification of a derivation, node by node.
//!
//! Nothing here trusts the builder: every inequality is re-checked on exact
//! squares, every target is recomputed from the children, and the determinant
//! identity behind each bipyramid or kite is evaluated at the node's own
//! parameters.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cayley_menger::{
    apex_simplex_independent, lemma1_identity, lemma1_root, lemma5_identity,
    triangle_4b_independent,
};
use crate::rational::{format_rational, int, Rational};

use super::derivation::{lemma2_factor, rho_sq, Derivation, NodeId, Step};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub node: usize,
    pub rule: &'static str,
    pub check: &'static str,
    pub pass: bool,
    pub detail: String,
}

struct Checks<'a> {
    node: NodeId,
    rule: &'static str,
    out: &'a mut Vec<CheckResult>,
}

impl Checks<'_> {
    fn push(&mut self, check: &'static str, pass: bool, detail: impl Into<String>) {
        self.out.push(CheckResult {
            node: self.node.index(),
            rule: self.rule,
            check,
            pass,
            detail: detail.into(),
        });
    }

    fn eq(&mut self, check: &'static str, claimed: &Rational, actual: &Rational) {
        let pass = claimed == actual;
        self.push(
            check,
            pass,
            format!(
                "claimed {} recomputed {}",
                format_rational(claimed),
                format_rational(actual)
            ),
        );
    }
}

fn fmt(q: &Rational) -> String {
    format_rational(q)
}

/// The checks shared by every bipyramid-shaped node.
fn bipyramid_checks(
    c: &mut Checks<'_>,
    n: usize,
    d2: &Rational,
    e2: &Rational,
    eps2: &Rational,
    target: &Rational,
) {
    let lhs = int(2 * n as i64) * e2;
    let rhs = int(n as i64 - 1) * d2;
    c.push(
        "apex height: 2ne^2 > (n-1)d^2",
        lhs > rhs,
        format!("2ne^2={} (n-1)d^2={}", fmt(&lhs), fmt(&rhs)),
    );
    let r2 = lemma1_root(n, d2, e2);
    c.eq("target = 4e^2 - 2((n-1)/n)d^2", target, &r2);
    c.push(
        "eps > 0",
        eps2.is_positive(),
        format!("eps^2={}", fmt(eps2)),
    );
    let four_r2 = int(4) * &r2;
    c.push(
        "eps <= 2r",
        *eps2 <= four_r2,
        format!("eps^2={} 4r^2={}", fmt(eps2), fmt(&four_r2)),
    );
    let id = lemma1_identity(n, d2, e2, target);
    c.push(
        "CM determinant matches closed form and vanishes at t = r^2",
        id.holds() && id.determinant.is_zero(),
        format!(
            "det={} closed={}",
            fmt(&id.determinant),
            fmt(&id.closed_form)
        ),
    );
    match apex_simplex_independent(n, d2, e2) {
        Ok(indep) => c.push(
            "apex and simplex affinely independent (CM cross-check)",
            indep,
            format!("2ne^2 != (n-1)d^2 is {indep}"),
        ),
        Err(e) => c.push(
            "apex and simplex affinely independent (CM cross-check)",
            false,
            e.to_string(),
        ),
    }
}

/// Re-verifies every reachable node; failures are reported, never raised.
pub fn validate_derivation(der: &Derivation) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for id in der.reachable() {
        let node = der.node(id);
        let mut c = Checks {
            node: id,
            rule: node.step.rule(),
            out: &mut out,
        };
        let sq = |nid: NodeId| der.node(nid).target_sq.clone();
        let target = &node.target_sq;
        c.push("target positive", target.is_positive(), fmt(target));
        if let Some(n) = node.dim {
            c.push(
                "node dimension matches derivation",
                n == der.dim(),
                format!("node n={n} derivation n={}", der.dim()),
            );
        }
        for child in node.step.children() {
            if let Some(cn) = der.node(child).dim {
                if Some(cn) != node.dim {
                    c.push(
                        "child dimension matches",
                        false,
                        format!("child {child} has n={cn}"),
                    );
                }
            }
        }
        match &node.step {
            Step::Base => c.eq("unit target", target, &int(1)),
            Step::Lemma1 {
                n,
                d2,
                e2,
                eps2,
                d,
                e,
                eps,
            } => {
                c.eq("d^2 matches sub-derivation", d2, &sq(*d));
                c.eq("e^2 matches sub-derivation", e2, &sq(*e));
                c.eq("eps^2 matches sub-derivation", eps2, &sq(*eps));
                bipyramid_checks(&mut c, *n, d2, e2, eps2, target);
            }
            Step::Lemma2 { n, m, base, prev } => {
                c.push("m >= 1", *m >= 1, format!("m={m}"));
                let prev_ok = match &der.node(*prev).step {
                    _ if *m == 1 => prev == base,
                    Step::Lemma2 {
                        n: pn,
                        m: pm,
                        base: pb,
                        ..
                    } => pn == n && *pm + 1 == *m && pb == base,
                    _ => false,
                };
                c.push(
                    "previous scaling step is consistent",
                    prev_ok,
                    format!("prev={prev}"),
                );
                let expected = num_traits::pow(lemma2_factor(*n), *m) * sq(*base);
                c.eq("target = (2+2/n)^m d^2", target, &expected);
                let p2 = sq(*prev);
                bipyramid_checks(&mut c, *n, &p2, &p2, &p2, target);
            }
            Step::Lemma3 { a2, b2, a, b } => {
                c.eq("a^2 matches sub-derivation", a2, &sq(*a));
                c.eq("b^2 matches sub-derivation", b2, &sq(*b));
                let lhs = int(5) * a2;
                let rhs = int(16) * b2;
                c.push(
                    "a <= (4/sqrt5) b",
                    lhs <= rhs,
                    format!("5a^2={} 16b^2={}", fmt(&lhs), fmt(&rhs)),
                );
                c.eq("target = 4b^2 - a^2", target, &(int(4) * b2 - a2));
                bipyramid_checks(&mut c, 2, a2, b2, a2, target);
            }
            Step::Lemma5 {
                d2,
                d,
                sqrt3,
                sqrt11,
                five,
            } => {
                c.eq("d^2 matches sub-derivation", d2, &sq(*d));
                c.eq("sqrt(3) d ingredient", &sq(*sqrt3), &(int(3) * d2));
                c.eq("sqrt(11) d ingredient", &sq(*sqrt11), &(int(11) * d2));
                c.eq("5 d ingredient", &sq(*five), &(int(25) * d2));
                let expected = Rational::new(BigInt::from(11), BigInt::from(25)) * d2;
                c.eq("target = (11/25) d^2", target, &expected);
                let id = lemma5_identity(d2, target);
                c.push(
                    "CM determinant matches closed form and vanishes at t = (11/25)d^2",
                    id.holds() && id.determinant.is_zero(),
                    format!(
                        "det={} closed={}",
                        fmt(&id.determinant),
                        fmt(&id.closed_form)
                    ),
                );
                match triangle_4b_independent(d2) {
                    Ok(v) => c.push("3d^2, 11d^2, 25d^2 triangle independent", v, ""),
                    Err(e) => c.push(
                        "3d^2, 11d^2, 25d^2 triangle independent",
                        false,
                        e.to_string(),
                    ),
                }
            }
            Step::Star {
                n,
                m,
                e2,
                e,
                d,
                eps,
            } => {
                c.push("n >= 3", *n >= 3, format!("n={n}"));
                c.eq("e^2 matches sub-derivation", e2, &sq(*e));
                c.eq("d = sqrt(2+2/n) e", &sq(*d), &(lemma2_factor(*n) * e2));
                if *n >= 3 {
                    let rho2 = rho_sq(*n);
                    let eps_expected = num_traits::pow(rho2.clone(), *m);
                    c.eq("eps = rho(n)^m", &sq(*eps), &eps_expected);
                    let bound = Rational::new(BigInt::from(16), BigInt::from(n * n)) * e2;
                    c.push(
                        "rho(n)^m <= (4/n) e",
                        eps_expected <= bound,
                        format!("rho^2m={} (16/n^2)e^2={}", fmt(&eps_expected), fmt(&bound)),
                    );
                    let minimal = *m == 0 || num_traits::pow(rho2, m - 1) > bound;
                    c.push("m is minimal", minimal, format!("m={m}"));
                    let expected = Rational::new(BigInt::from(4), BigInt::from(n * n)) * e2;
                    c.eq("target = (4/n^2) e^2", target, &expected);
                }
                let (d2, eps2) = (sq(*d), sq(*eps));
                bipyramid_checks(&mut c, *n, &d2, e2, &eps2, target);
            }
        }
    }
    out
}

pub fn all_pass(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}
