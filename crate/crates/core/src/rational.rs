//! Exact rational scalars and fraction-free determinants.
//!
//! [`Rational`] is `num_rational::BigRational`, which already keeps every
//! value in lowest terms with a positive denominator. This module adds the
//! pieces the rest of the crate needs on top of it: the `"p/q"` string form
//! used by every JSON emitter, a decimal/scientific parser for CLI input,
//! square matrices with an exact Bareiss determinant, and square-root
//! comparisons that never leave exact arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("invalid rational literal {0:?}")]
    Parse(String),
    #[error("matrix of order {order} needs {expected} entries, got {got}")]
    Shape {
        order: usize,
        expected: usize,
        got: usize,
    },
    #[error("square root of negative value {0}")]
    NegativeRadicand(String),
}

/// Shorthand for a small rational `num/den`. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Canonical string form: `"p/q"` in lowest terms, or `"p"` when `q = 1`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"p"`, `"p/q"`, plain decimals (`"-1.25"`) and scientific
/// notation (`"1e-3"`, `"2.5E+4"`). The result is exact.
pub fn parse_rational(s: &str) -> Result<Rational, RationalError> {
    let err = || RationalError::Parse(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }

    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = t[pos + 1..].parse().map_err(|_| err())?;
            (&t[..pos], exp)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    if exponent.unsigned_abs() > 10_000 {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Exact conversion of a finite `f64` (every finite double is a dyadic rational).
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn to_f64(q: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

/// Orders `a x` against `b y` by cross-multiplication, skipping the gcd
/// work a rational product would do.
pub fn cmp_scaled(a: i64, x: &Rational, b: i64, y: &Rational) -> Ordering {
    let lhs = BigInt::from(a) * x.numer() * y.denom();
    let rhs = BigInt::from(b) * y.numer() * x.denom();
    lhs.cmp(&rhs)
}

/// Orders `sqrt(a2)` against `sqrt(b2)` for nonnegative rationals. The square
/// root is monotone on `[0, inf)`, so this is the ordering of the squares.
pub fn rat_cmp_sqrt(a2: &Rational, b2: &Rational) -> Result<Ordering, RationalError> {
    for v in [a2, b2] {
        if v.is_negative() {
            return Err(RationalError::NegativeRadicand(format_rational(v)));
        }
    }
    Ok(a2.cmp(b2))
}

/// Compares `|sqrt(a2) - sqrt(s2)|` with `|sqrt(b2) - sqrt(s2)|` exactly.
///
/// With `u, v, s` the three roots, `(u-s)^2 - (v-s)^2 = (u-v)(u+v-2s)`; the
/// sign of each factor is decided by squaring once more.
pub fn cmp_sqrt_distance(a2: &Rational, b2: &Rational, s2: &Rational) -> Ordering {
    let first = a2.cmp(b2);
    if first == Ordering::Equal {
        return Ordering::Equal;
    }
    // sign of sqrt(a2) + sqrt(b2) - 2 sqrt(s2)
    let four_s = s2 * int(4);
    let rhs = &four_s - a2 - b2;
    let second = if rhs.is_negative() {
        Ordering::Greater
    } else {
        // 2 sqrt(a2 b2) vs rhs >= 0
        (a2 * b2 * int(4)).cmp(&(&rhs * &rhs))
    };
    match (first, second) {
        (_, Ordering::Equal) => Ordering::Equal,
        (Ordering::Greater, s) => s,
        (_, s) => s.reverse(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    order: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(order: usize, entries: Vec<Rational>) -> Result<Self, RationalError> {
        if entries.len() != order * order {
            return Err(RationalError::Shape {
                order,
                expected: order * order,
                got: entries.len(),
            });
        }
        Ok(Self { order, entries })
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let entries = (0..order * order)
            .map(|k| f(k / order, k % order))
            .collect();
        Self { order, entries }
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self, RationalError> {
        let order = rows.len();
        let entries: Vec<Rational> = rows.iter().flatten().cloned().collect();
        if rows.iter().any(|r| r.len() != order) {
            return Err(RationalError::Shape {
                order,
                expected: order * order,
                got: entries.len(),
            });
        }
        Self::new(order, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.order {
            self.entries.swap(a * self.order + c, b * self.order + c);
        }
    }

    pub fn det(&self) -> Rational {
        rat_det(self)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.order {
            let row: Vec<String> = self.row(r).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Exact determinant.
///
/// Each row is scaled by the lcm of its denominators so the elimination runs
/// over integers; Bareiss' update keeps every intermediate an exact minor.
pub fn rat_det(m: &RationalMatrix) -> Rational {
    let n = m.order;
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for r in 0..n {
        let row = m.row(r);
        let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        a.push(row.iter().map(|q| q.numer() * (&l / q.denom())).collect());
        scale *= l;
    }
    Rational::new(bareiss(a), scale)
}

fn bareiss(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (head, tail) = a.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Serde adapter carrying a [`Rational`] as its canonical string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalStr(pub Rational);

impl Serialize for RationalStr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalStr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(RationalStr)
            .map_err(serde::de::Error::custom)
    }
}

impl From<Rational> for RationalStr {
    fn from(q: Rational) -> Self {
        RationalStr(q)
    }
}

/// `#[serde(with = "rational_string")]` for a bare [`Rational`] field.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        RationalStr::deserialize(d).map(|r| r.0)
    }
}
