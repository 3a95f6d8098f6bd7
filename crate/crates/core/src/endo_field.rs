//! Real quadratic fields `Q(sqrt p)` and the conjugation map on their points.
//!
//! Applied coordinatewise, conjugation sends unit distances to unit distances
//! (indeed every rational squared distance to itself) while moving any
//! squared distance with a nonzero `sqrt p` part.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::rational::{format_rational, int, Rational, RationalStr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndoError {
    #[error("p = {0} must be a squarefree integer >= 2")]
    NotSquarefree(i64),
    #[error("elements of Q(sqrt {0}) and Q(sqrt {1}) cannot be combined")]
    FieldMismatch(i64, i64),
    #[error("points have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("division by zero")]
    DivisionByZero,
    #[error("isometry is not exactly orthogonal: {0}")]
    NotOrthogonal(String),
}

pub fn is_squarefree(p: i64) -> bool {
    if p < 2 {
        return false;
    }
    let mut v = p;
    let mut f = 2i64;
    while f * f <= v {
        if v % f == 0 {
            v /= f;
            if v % f == 0 {
                return false;
            }
        }
        f += 1;
    }
    true
}

/// `a + b sqrt(p)` with `p` squarefree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadExtNumber {
    a: Rational,
    b: Rational,
    p: i64,
}

impl QuadExtNumber {
    pub fn new(a: Rational, b: Rational, p: i64) -> Result<Self, EndoError> {
        if !is_squarefree(p) {
            return Err(EndoError::NotSquarefree(p));
        }
        Ok(Self { a, b, p })
    }

    pub fn rational(a: Rational, p: i64) -> Result<Self, EndoError> {
        Self::new(a, Rational::zero(), p)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn same_field(&self, o: &Self) -> Result<(), EndoError> {
        if self.p == o.p {
            Ok(())
        } else {
            Err(EndoError::FieldMismatch(self.p, o.p))
        }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, EndoError> {
        self.same_field(o)?;
        Ok(Self {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            p: self.p,
        })
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, EndoError> {
        self.same_field(o)?;
        Ok(Self {
            a: &self.a - &o.a,
            b: &self.b - &o.b,
            p: self.p,
        })
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, EndoError> {
        self.same_field(o)?;
        let p = int(self.p);
        Ok(Self {
            a: &self.a * &o.a + &p * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
            p: self.p,
        })
    }

    /// Field norm `a^2 - p b^2`; nonzero unless the element is zero since
    /// `sqrt p` is irrational.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - int(self.p) * &self.b * &self.b
    }

    pub fn inverse(&self) -> Result<Self, EndoError> {
        if self.is_zero() {
            return Err(EndoError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self {
            a: &self.a / &n,
            b: -&self.b / &n,
            p: self.p,
        })
    }

    pub fn checked_div(&self, o: &Self) -> Result<Self, EndoError> {
        self.checked_mul(&o.inverse()?)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self {
            a: &self.a * q,
            b: &self.b * q,
            p: self.p,
        }
    }

    pub fn to_f64(&self) -> f64 {
        crate::rational::to_f64(&self.a) + crate::rational::to_f64(&self.b) * (self.p as f64).sqrt()
    }
}

macro_rules! field_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr for &QuadExtNumber {
            type Output = QuadExtNumber;
            /// Panics when the operands live in different fields.
            fn $m(self, o: &QuadExtNumber) -> QuadExtNumber {
                self.$checked(o).expect("operands in the same field")
            }
        }
    };
}

field_op!(Add, add, checked_add);
field_op!(Sub, sub, checked_sub);
field_op!(Mul, mul, checked_mul);

impl Neg for &QuadExtNumber {
    type Output = QuadExtNumber;
    fn neg(self) -> QuadExtNumber {
        QuadExtNumber {
            a: -&self.a,
            b: -&self.b,
            p: self.p,
        }
    }
}

impl fmt::Display for QuadExtNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        let root = format!("sqrt({})", self.p);
        let bpart = if self.b.is_one() {
            root
        } else if (-&self.b).is_one() {
            format!("-{root}")
        } else {
            format!("{}*{root}", format_rational(&self.b))
        };
        if self.a.is_zero() {
            f.write_str(&bpart)
        } else if let Some(rest) = bpart.strip_prefix('-') {
            write!(f, "{} - {rest}", format_rational(&self.a))
        } else {
            write!(f, "{} + {bpart}", format_rational(&self.a))
        }
    }
}

/// The nontrivial automorphism `a + b sqrt p -> a - b sqrt p`.
pub fn conj(q: &QuadExtNumber) -> QuadExtNumber {
    QuadExtNumber {
        a: q.a.clone(),
        b: -&q.b,
        p: q.p,
    }
}

/// Wire form of a coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadJson {
    pub a: RationalStr,
    pub b: RationalStr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadPoint {
    p: i64,
    coords: Vec<QuadExtNumber>,
}

impl QuadPoint {
    pub fn new(p: i64, coords: Vec<QuadExtNumber>) -> Result<Self, EndoError> {
        if !is_squarefree(p) {
            return Err(EndoError::NotSquarefree(p));
        }
        if let Some(c) = coords.iter().find(|c| c.p != p) {
            return Err(EndoError::FieldMismatch(p, c.p));
        }
        Ok(Self { p, coords })
    }

    /// `(a_i + b_i sqrt p)_i` from pairs of rationals.
    pub fn from_parts(p: i64, parts: &[(Rational, Rational)]) -> Result<Self, EndoError> {
        let coords = parts
            .iter()
            .map(|(a, b)| QuadExtNumber::new(a.clone(), b.clone(), p))
            .collect::<Result<_, _>>()?;
        Self::new(p, coords)
    }

    pub fn from_json(p: i64, coords: &[QuadJson]) -> Result<Self, EndoError> {
        let parts: Vec<(Rational, Rational)> = coords
            .iter()
            .map(|c| (c.a.0.clone(), c.b.0.clone()))
            .collect();
        Self::from_parts(p, &parts)
    }

    pub fn to_json(&self) -> Vec<QuadJson> {
        self.coords
            .iter()
            .map(|c| QuadJson {
                a: RationalStr(c.a.clone()),
                b: RationalStr(c.b.clone()),
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn coords(&self) -> &[QuadExtNumber] {
        &self.coords
    }

    fn compatible(&self, o: &Self) -> Result<(), EndoError> {
        if self.p != o.p {
            return Err(EndoError::FieldMismatch(self.p, o.p));
        }
        if self.dim() != o.dim() {
            return Err(EndoError::DimensionMismatch(self.dim(), o.dim()));
        }
        Ok(())
    }
}

impl fmt::Display for QuadPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `sum (x_i - y_i)^2`, exactly.
pub fn phi_quad(x: &QuadPoint, y: &QuadPoint) -> Result<QuadExtNumber, EndoError> {
    x.compatible(y)?;
    let mut acc = QuadExtNumber::rational(Rational::zero(), x.p)?;
    for (u, v) in x.coords.iter().zip(&y.coords) {
        let d = u - v;
        acc = &acc + &(&d * &d);
    }
    Ok(acc)
}

pub fn endo_map(x: &QuadPoint) -> QuadPoint {
    QuadPoint {
        p: x.p,
        coords: x.coords.iter().map(conj).collect(),
    }
}

/// `v -> R v + t` with `R` exactly orthogonal over the rationals. Such maps
/// keep coordinates inside the field and commute with conjugation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalIsometry {
    rotation: Vec<Vec<Rational>>,
    translation: Vec<Rational>,
}

impl RationalIsometry {
    pub fn new(
        rotation: Vec<Vec<Rational>>,
        translation: Vec<Rational>,
    ) -> Result<Self, EndoError> {
        let n = translation.len();
        if rotation.len() != n || rotation.iter().any(|r| r.len() != n) {
            return Err(EndoError::NotOrthogonal(format!(
                "rotation must be {n}x{n}"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let dot: Rational = (0..n).map(|k| &rotation[k][i] * &rotation[k][j]).sum();
                let want = if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                if dot != want {
                    return Err(EndoError::NotOrthogonal(format!(
                        "column {i} . column {j} = {}",
                        format_rational(&dot)
                    )));
                }
            }
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn apply(&self, x: &QuadPoint) -> Result<QuadPoint, EndoError> {
        let n = self.translation.len();
        if x.dim() != n {
            return Err(EndoError::DimensionMismatch(n, x.dim()));
        }
        let coords = (0..n)
            .map(|i| {
                let mut acc = QuadExtNumber::rational(self.translation[i].clone(), x.p)?;
                for (j, c) in x.coords.iter().enumerate() {
                    acc = &acc + &c.scale(&self.rotation[i][j]);
                }
                Ok(acc)
            })
            .collect::<Result<_, EndoError>>()?;
        QuadPoint::new(x.p, coords)
    }
}

/// Conjugation after an optional change of frame.
pub fn endo_map_with(
    iso: Option<&RationalIsometry>,
    x: &QuadPoint,
) -> Result<QuadPoint, EndoError> {
    match iso {
        Some(i) => Ok(endo_map(&i.apply(x)?)),
        None => Ok(endo_map(x)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub phi_before: String,
    pub phi_after: String,
    pub is_rational: bool,
    pub preserved: bool,
}

impl CounterexampleReport {
    /// Preserved exactly when the squared distance is rational.
    pub fn dichotomy_holds(&self) -> bool {
        self.preserved == self.is_rational
    }
}

pub fn counterexample_report(
    x: &QuadPoint,
    y: &QuadPoint,
) -> Result<CounterexampleReport, EndoError> {
    let before = phi_quad(x, y)?;
    let after = phi_quad(&endo_map(x), &endo_map(y))?;
    Ok(CounterexampleReport {
        preserved: before == after,
        is_rational: before.is_rational(),
        phi_before: before.to_string(),
        phi_after: after.to_string(),
    })
}

/// Outcome of checking every pair of a point set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub pairs: usize,
    pub rational_pairs: usize,
    pub rational_preserved: usize,
    pub irrational_moved: usize,
}

impl SweepSummary {
    pub fn all_rational_preserved(&self) -> bool {
        self.rational_pairs == self.rational_preserved
    }
}

pub fn sweep_pairs(points: &[QuadPoint]) -> Result<SweepSummary, EndoError> {
    if let Some(first) = points.first() {
        for q in points {
            first.compatible(q)?;
        }
    }
    let m = points.len();
    let images: Vec<QuadPoint> = par::map(points, endo_map);
    let rows: Vec<(usize, usize, usize, usize)> = par::map_range(0..m, |i| {
        let mut row = (0, 0, 0, 0);
        for j in i + 1..m {
            let before = phi_quad(&points[i], &points[j]).expect("checked compatible");
            let after = phi_quad(&images[i], &images[j]).expect("checked compatible");
            row.0 += 1;
            if before.is_rational() {
                row.1 += 1;
                row.2 += usize::from(before == after);
            } else {
                row.3 += usize::from(before != after);
            }
        }
        row
    });
    Ok(rows.into_iter().fold(
        SweepSummary {
            pairs: 0,
            rational_pairs: 0,
            rational_preserved: 0,
            irrational_moved: 0,
        },
        |s, r| SweepSummary {
            pairs: s.pairs + r.0,
            rational_pairs: s.rational_pairs + r.1,
            rational_preserved: s.rational_preserved + r.2,
            irrational_moved: s.irrational_moved + r.3,
        },
    ))
}

/// True iff every pair with rational squared distance keeps it under
/// [`endo_map`]. Pairs with irrational squared distance are skipped.
pub fn rational_distance_sweep(points: &[QuadPoint]) -> Result<bool, EndoError> {
    Ok(sweep_pairs(points)?.all_rational_preserved())
}

/// 20 planar points of `Q(sqrt p)^2`: first coordinate from
/// `{0, 1, s, 1+s, 2s}`, second from `{0, 1, s, 1-s}` with `s = sqrt p`.
pub fn grid20(p: i64) -> Result<Vec<QuadPoint>, EndoError> {
    let q = |a: i64, b: i64| (int(a), int(b));
    let xs = [q(0, 0), q(1, 0), q(0, 1), q(1, 1), q(0, 2)];
    let ys = [q(0, 0), q(1, 0), q(0, 1), q(1, -1)];
    let mut out = Vec::with_capacity(20);
    for x in &xs {
        for y in &ys {
            out.push(QuadPoint::from_parts(p, &[x.clone(), y.clone()])?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn q(a: i64, b: i64) -> QuadExtNumber {
        QuadExtNumber::new(int(a), int(b), 2).unwrap()
    }

    fn pt(parts: &[(i64, i64)]) -> QuadPoint {
        QuadPoint::new(2, parts.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(2) && is_squarefree(3) && is_squarefree(30));
        assert!(!is_squarefree(4) && !is_squarefree(18) && !is_squarefree(1) && !is_squarefree(-3));
        assert_eq!(
            QuadExtNumber::new(int(1), int(1), 8),
            Err(EndoError::NotSquarefree(8))
        );
    }

    #[test]
    fn conj_examples() {
        assert_eq!(conj(&q(3, 0)), q(3, 0));
        assert_eq!(conj(&q(1, 1)), q(1, -1));
        let sq = &q(1, 1) * &q(1, 1);
        assert_eq!(sq, q(3, 2));
        assert_eq!(conj(&sq), q(3, -2));
    }

    #[test]
    fn field_ops() {
        let u = QuadExtNumber::new(rat(1, 2), rat(-3, 7), 5).unwrap();
        let inv = u.inverse().unwrap();
        assert_eq!(&u * &inv, QuadExtNumber::rational(int(1), 5).unwrap());
        assert_eq!(q(0, 0).inverse(), Err(EndoError::DivisionByZero));
        let v = QuadExtNumber::new(int(1), int(1), 3).unwrap();
        assert_eq!(q(1, 1).checked_add(&v), Err(EndoError::FieldMismatch(2, 3)));
        assert_eq!(q(3, 2).to_string(), "3 + 2*sqrt(2)");
        assert_eq!(q(3, -1).to_string(), "3 - sqrt(2)");
    }

    #[test]
    fn phi_and_endo_examples() {
        let o = pt(&[(0, 0), (0, 0)]);
        assert!(phi_quad(&o, &o).unwrap().is_zero());
        let y = pt(&[(1, 1), (0, 0)]);
        assert_eq!(phi_quad(&o, &y).unwrap(), q(3, 2));
        let z = pt(&[(0, 1), (1, 0)]);
        assert_eq!(phi_quad(&o, &z).unwrap(), q(3, 0));
        assert_eq!(endo_map(&o), o);
        assert_eq!(endo_map(&y), pt(&[(1, -1), (0, 0)]));
        assert_eq!(endo_map(&z), pt(&[(0, -1), (1, 0)]));
    }

    #[test]
    fn reports() {
        let o = pt(&[(0, 0), (0, 0)]);
        let r = counterexample_report(&o, &pt(&[(0, 1), (1, 0)])).unwrap();
        assert!(r.preserved && r.is_rational && r.dichotomy_holds());
        let r = counterexample_report(&o, &pt(&[(1, 1), (0, 0)])).unwrap();
        assert_eq!(
            (r.phi_before.as_str(), r.phi_after.as_str()),
            ("3 + 2*sqrt(2)", "3 - 2*sqrt(2)")
        );
        assert!(!r.preserved && r.dichotomy_holds());
        let r = counterexample_report(&o, &o).unwrap();
        assert!(r.preserved && r.phi_before == "0");
        let other = QuadPoint::from_parts(3, &[(int(0), int(0)), (int(0), int(0))]).unwrap();
        assert!(counterexample_report(&o, &other).is_err());
    }

    #[test]
    fn grid_sweep() {
        let g = grid20(2).unwrap();
        assert_eq!(g.len(), 20);
        let s = sweep_pairs(&g).unwrap();
        assert_eq!(s.pairs, 190);
        assert!(s.rational_pairs > 0 && s.rational_pairs < 190);
        assert!(s.all_rational_preserved());
        assert_eq!(s.irrational_moved, s.pairs - s.rational_pairs);
    }

    #[test]
    fn isometry_frames() {
        // rotation by the 3-4-5 angle
        let r = vec![vec![rat(3, 5), rat(-4, 5)], vec![rat(4, 5), rat(3, 5)]];
        let iso = RationalIsometry::new(r, vec![int(1), rat(1, 2)]).unwrap();
        let (a, b) = (pt(&[(1, 1), (0, 0)]), pt(&[(0, 1), (2, -1)]));
        let fa = endo_map_with(Some(&iso), &a).unwrap();
        let fb = endo_map_with(Some(&iso), &b).unwrap();
        assert_eq!(
            phi_quad(&fa, &fb).unwrap(),
            conj(&phi_quad(&a, &b).unwrap())
        );
        let bad = vec![vec![int(1), int(1)], vec![int(0), int(1)]];
        assert!(RationalIsometry::new(bad, vec![int(0), int(0)]).is_err());
    }
}
