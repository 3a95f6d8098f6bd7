//! Approximation of arbitrary positive distances by certified ones.
//!
//! The certified family is `a^k b^l` with `(a, b) = (sqrt(11)/5, sqrt(3))` in
//! the plane and `(sqrt(2+2/n), 2/n)` for `n >= 3`. Its squares are rational,
//! so every candidate can be compared with the target exactly; floating point
//! logarithms are only used to narrow the search.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::rational::{
    cmp_sqrt_distance, format_rational, parse_rational, Rational, RationalError,
};
use crate::witness::derivation::lemma2_factor;
use crate::witness::membership::family_target_sq;

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("{field} must be positive")]
    NonPositive { field: &'static str },
    #[error("{field}: {source}")]
    Parse {
        field: &'static str,
        source: RationalError,
    },
    #[error("no (k, l) with k, l <= {k_max} is within relative error {tol}")]
    NotFound { k_max: usize, tol: String },
}

/// A positive real given by its exact square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub sq: Rational,
}

impl Target {
    pub fn from_sq(sq: Rational) -> Result<Self, DensityError> {
        if !sq.is_positive() {
            return Err(DensityError::NonPositive { field: "target" });
        }
        Ok(Target { sq })
    }

    pub fn ln(&self) -> f64 {
        ln_rational(&self.sq) / 2.0
    }

    pub fn approx(&self) -> f64 {
        self.ln().exp()
    }
}

/// Accepts `p/q`, decimals (including exponents) and `sqrt(...)` of either.
impl FromStr for Target {
    type Err = DensityError;

    fn from_str(s: &str) -> Result<Self, DensityError> {
        let s = s.trim();
        let parse = |t: &str| {
            parse_rational(t).map_err(|source| DensityError::Parse {
                field: "target",
                source,
            })
        };
        let sq = match s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            Some(inner) => parse(inner)?,
            None => {
                let v = parse(s)?;
                if !v.is_positive() {
                    return Err(DensityError::NonPositive { field: "target" });
                }
                &v * &v
            }
        };
        Target::from_sq(sq)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sqrt({})", format_rational(&self.sq))
    }
}

fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigUint = v >> shift;
    top.to_f64().expect("64-bit mantissa").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational, without overflowing on huge parts.
pub fn ln_rational(q: &Rational) -> f64 {
    debug_assert!(q.is_positive());
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    ln_biguint(num) - ln_biguint(den)
}

/// Log of the two family generators `(ln a, ln b)`.
pub fn generator_logs(n: usize) -> (f64, f64) {
    if n == 2 {
        ((11f64).ln() / 2.0 - (5f64).ln(), (3f64).ln() / 2.0)
    } else {
        (ln_rational(&lemma2_factor(n)) / 2.0, (2.0 / n as f64).ln())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximation {
    pub k: usize,
    pub l: usize,
    pub achieved: f64,
    #[serde(with = "crate::rational::rational_string")]
    pub achieved_sq: Rational,
    pub rel_error: f64,
}

fn relative_error(ln_value: f64, ln_target: f64, exact: bool) -> f64 {
    if exact {
        0.0
    } else {
        (ln_value - ln_target).exp_m1().abs()
    }
}

/// `(1 - tol)^2 T^2 <= A <= (1 + tol)^2 T^2`, decided on rationals.
fn within_tolerance(achieved_sq: &Rational, target_sq: &Rational, tol: &Rational) -> bool {
    let one = Rational::one();
    let hi = (&one + tol) * (&one + tol) * target_sq;
    if achieved_sq > &hi {
        return false;
    }
    let lo_factor = &one - tol;
    if !lo_factor.is_positive() {
        return true;
    }
    achieved_sq >= &(&lo_factor * &lo_factor * target_sq)
}

fn check_args(n: usize) -> Result<(), DensityError> {
    if n < 2 {
        Err(DensityError::Dimension(n))
    } else {
        Ok(())
    }
}

/// Finds `(k, l)` with `k, l <= k_max` and relative error at most `tol`,
/// minimising `k + l` and then `k`.
///
/// For each `k` the admissible `l` form an interval in log space; only its
/// smallest member matters for the tie-break. Candidates are then confirmed
/// in order on exact squares, so a float misjudgement at the boundary can
/// cost time but never a wrong answer.
pub fn approx_distance(
    n: usize,
    target: &Target,
    tol: &Rational,
    k_max: usize,
) -> Result<Approximation, DensityError> {
    check_args(n)?;
    if !tol.is_positive() {
        return Err(DensityError::NonPositive { field: "tol" });
    }
    let (la, lb) = generator_logs(n);
    let lt = target.ln();
    let tol_f = crate::rational::to_f64(tol);
    let lo = (1.0 - tol_f).max(0.0).ln();
    let hi = (1.0 + tol_f).ln();
    // absorbs rounding in k*la for k up to ~10^6
    let slack = 1e-9;
    let mut candidates: Vec<(usize, usize)> = par::filter_map_range(0..k_max + 1, |k| {
        let rest = lt - k as f64 * la;
        // lb > 0 for n = 2, lb < 0 for n >= 3
        let (a, b) = ((rest + lo - slack) / lb, (rest + hi + slack) / lb);
        let (from, to) = if a <= b { (a, b) } else { (b, a) };
        let l = from.ceil().max(0.0);
        (l <= to.floor() && l <= k_max as f64).then_some((k, l as usize))
    });
    candidates.sort_by_key(|&(k, l)| (k + l, k));
    let target_sq = &target.sq;
    for (k, l) in candidates {
        // the neighbour l - 1 may pass exactly where the float interval did not
        for l in [l.checked_sub(1), Some(l), Some(l + 1)]
            .into_iter()
            .flatten()
        {
            if l > k_max {
                continue;
            }
            let sq = family_target_sq(n, k, l);
            if within_tolerance(&sq, target_sq, tol) {
                let lv = k as f64 * la + l as f64 * lb;
                return Ok(Approximation {
                    k,
                    l,
                    achieved: lv.exp(),
                    rel_error: relative_error(lv, lt, &sq == target_sq),
                    achieved_sq: sq,
                });
            }
        }
    }
    Err(DensityError::NotFound {
        k_max,
        tol: format_rational(tol),
    })
}

/// True iff no `1 <= a, b <= bound` makes the two generators' logs commensurable
/// through the identity that would collapse the family: `3^a 11^b = 25^b` in
/// the plane, `(2n+2)^b 4^a = n^(b+2a)` above it (from
/// `(2+2/n)^(b/2) = (n/2)^a`, squared and cleared of denominators).
pub fn kronecker_slope_check(n: usize, bound: usize) -> Result<bool, DensityError> {
    check_args(n)?;
    let pairs: Vec<(u32, u32)> = (1..=bound as u32)
        .flat_map(|a| (1..=bound as u32).map(move |b| (a, b)))
        .collect();
    Ok(par::all(&pairs, |&(a, b)| {
        let (lhs, rhs) = if n == 2 {
            (
                BigInt::from(3).pow(a) * BigInt::from(11).pow(b),
                BigInt::from(25).pow(b),
            )
        } else {
            (
                BigInt::from(2 * n + 2).pow(b) * BigInt::from(4).pow(a),
                BigInt::from(n).pow(b + 2 * a),
            )
        };
        lhs != rhs
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximant {
    pub k: usize,
    pub l: usize,
    pub value: f64,
    #[serde(with = "crate::rational::rational_string")]
    pub value_sq: Rational,
}

/// Largest `k` and `l` searched when testing whether a target is itself a
/// family member.
pub const MEMBER_SEARCH_BOUND: usize = 10_000;

/// The family member equal to the target, if one exists with
/// `k, l <= MEMBER_SEARCH_BOUND`.
pub fn exact_member(n: usize, target: &Target) -> Option<(usize, usize)> {
    let (la, lb) = generator_logs(n);
    let lt = target.ln();
    par::filter_map_range(0..MEMBER_SEARCH_BOUND + 1, |k| {
        let l = ((lt - k as f64 * la) / lb).round();
        if l < 0.0 || l > MEMBER_SEARCH_BOUND as f64 {
            return None;
        }
        let l = l as usize;
        let err = (k as f64 * la + l as f64 * lb - lt).abs();
        (err < 1e-8 && family_target_sq(n, k, l) == target.sq).then_some((k, l))
    })
    .into_iter()
    .min_by_key(|&(k, l)| (k + l, k))
}

/// Certified distances with strictly decreasing distance to the target.
///
/// Pairs are visited by increasing `k + l` (then `k`) and each one that beats
/// every earlier pair is recorded; the comparison is exact. A target that is
/// itself certified is its own limit, so it is returned alone.
pub fn approach_sequence(
    n: usize,
    target: &Target,
    count: usize,
) -> Result<Vec<Approximant>, DensityError> {
    check_args(n)?;
    let make = |k: usize, l: usize| {
        let (la, lb) = generator_logs(n);
        Approximant {
            k,
            l,
            value: (k as f64 * la + l as f64 * lb).exp(),
            value_sq: family_target_sq(n, k, l),
        }
    };
    if count == 0 {
        return Ok(vec![]);
    }
    if let Some((k, l)) = exact_member(n, target) {
        return Ok(vec![make(k, l)]);
    }
    let (la, lb) = generator_logs(n);
    let t = target.approx();
    let mut out: Vec<Approximant> = Vec::with_capacity(count);
    let mut best_f = f64::INFINITY;
    let mut s = 0usize;
    while out.len() < count {
        for k in 0..=s {
            let l = s - k;
            let v = (k as f64 * la + l as f64 * lb).exp();
            let dist = (v - t).abs();
            // float prefilter; near-ties go to the exact comparison
            if dist > best_f * (1.0 + 1e-9) + 1e-300 {
                continue;
            }
            let sq = family_target_sq(n, k, l);
            let better = match out.last() {
                None => true,
                Some(prev) => cmp_sqrt_distance(&sq, &prev.value_sq, &target.sq) == Ordering::Less,
            };
            if better {
                best_f = best_f.min(dist);
                out.push(Approximant {
                    k,
                    l,
                    value: v,
                    value_sq: sq,
                });
                if out.len() == count {
                    break;
                }
            }
        }
        s += 1;
    }
    Ok(out)
}

impl Approximation {
    pub fn is_exact(&self) -> bool {
        self.rel_error.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn t(s: &str) -> Target {
        s.parse().unwrap()
    }

    #[test]
    fn target_parsing() {
        assert_eq!(t("sqrt(3)").sq, int(3));
        assert_eq!(t("1/2").sq, rat(1, 4));
        assert_eq!(t("1.5").sq, rat(9, 4));
        assert!("0".parse::<Target>().is_err());
        assert!("-2".parse::<Target>().is_err());
        assert!("sqrt(-1)".parse::<Target>().is_err());
        assert!("abc".parse::<Target>().is_err());
    }

    #[test]
    fn ln_of_huge_rationals() {
        let q = num_traits::pow(rat(11, 25), 5000);
        let expected = 5000.0 * (11f64 / 25.0).ln();
        assert!((ln_rational(&q) - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn trivial_examples() {
        let a = approx_distance(2, &t("sqrt(3)"), &rat(1, 1_000_000_000), 100).unwrap();
        assert_eq!((a.k, a.l, a.rel_error), (0, 1, 0.0));
        let a = approx_distance(2, &t("1"), &rat(1, 1_000_000_000_000), 100).unwrap();
        assert_eq!((a.k, a.l), (0, 0));
    }

    #[test]
    fn reports_failure() {
        let e = approx_distance(2, &t("2"), &rat(1, 1_000_000_000_000), 3).unwrap_err();
        assert!(matches!(e, DensityError::NotFound { .. }));
        assert!(approx_distance(1, &t("2"), &rat(1, 10), 3).is_err());
        assert!(approx_distance(2, &t("2"), &int(0), 3).is_err());
    }

    #[test]
    fn slope_check_examples() {
        assert!(kronecker_slope_check(2, 1).unwrap());
        assert!(kronecker_slope_check(2, 12).unwrap());
        assert!(kronecker_slope_check(3, 10).unwrap());
    }

    #[test]
    fn approach_examples() {
        let s = approach_sequence(2, &t("sqrt(3)"), 1).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].k, s[0].l, s[0].value_sq.clone()), (0, 1, int(3)));
        let s = approach_sequence(2, &t("sqrt(3)"), 5).unwrap();
        assert_eq!(s.len(), 1);
    }
}
