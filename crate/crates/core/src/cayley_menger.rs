//! Cayley-Menger determinants over exact rational squared distances.
//!
//! The bordered matrix is always materialised in full: a zero in the top-left
//! corner, ones along the rest of the first row and column, and the pairwise
//! squared distances elsewhere. The same builder serves the affine
//! (in)dependence predicates and the two closed-form identities that force a
//! unit-distance preserving map to keep the apex distance of a bipyramid and
//! of the planar seven-point configuration.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::rational::{format_rational, int, rat_det, Rational, RationalMatrix, RationalStr};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CmError {
    #[error("phi must be a square array: row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("declared point count m={declared} but phi has {actual} rows")]
    CountMismatch { declared: usize, actual: usize },
    #[error("phi[{0}][{0}] must be 0")]
    NonzeroDiagonal(usize),
    #[error("phi[{i}][{j}] = {a} differs from phi[{j}][{i}] = {b}")]
    Asymmetric {
        i: usize,
        j: usize,
        a: String,
        b: String,
    },
    #[error("dimension {dim} needs {expected} points, got {got}")]
    WrongPointCount {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: String },
    #[error("need at least one point")]
    Empty,
    #[error("determinant cross-check disagrees with the closed-form condition: {0}")]
    CrossCheck(String),
}

/// Symmetric array of exact squared distances with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecWire", into = "SpecWire")]
pub struct SquaredDistanceSpec {
    phi: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct SpecWire {
    m: usize,
    phi: Vec<Vec<RationalStr>>,
}

impl TryFrom<SpecWire> for SquaredDistanceSpec {
    type Error = CmError;

    fn try_from(w: SpecWire) -> Result<Self, CmError> {
        if w.m != w.phi.len() {
            return Err(CmError::CountMismatch {
                declared: w.m,
                actual: w.phi.len(),
            });
        }
        let phi = w
            .phi
            .into_iter()
            .map(|row| row.into_iter().map(|q| q.0).collect())
            .collect();
        SquaredDistanceSpec::new(phi)
    }
}

impl From<SquaredDistanceSpec> for SpecWire {
    fn from(s: SquaredDistanceSpec) -> Self {
        SpecWire {
            m: s.point_count(),
            phi: s
                .phi
                .into_iter()
                .map(|row| row.into_iter().map(RationalStr).collect())
                .collect(),
        }
    }
}

impl SquaredDistanceSpec {
    #[allow(clippy::needless_range_loop)]
    pub fn new(phi: Vec<Vec<Rational>>) -> Result<Self, CmError> {
        let m = phi.len();
        if m == 0 {
            return Err(CmError::Empty);
        }
        for (row, r) in phi.iter().enumerate() {
            if r.len() != m {
                return Err(CmError::Ragged {
                    row,
                    len: r.len(),
                    expected: m,
                });
            }
        }
        for i in 0..m {
            if !phi[i][i].is_zero() {
                return Err(CmError::NonzeroDiagonal(i));
            }
            for j in i + 1..m {
                if phi[i][j] != phi[j][i] {
                    return Err(CmError::Asymmetric {
                        i,
                        j,
                        a: format_rational(&phi[i][j]),
                        b: format_rational(&phi[j][i]),
                    });
                }
            }
        }
        Ok(Self { phi })
    }

    /// Builds the table from the upper triangle; `f(i, j)` is called for `i < j`.
    #[allow(clippy::needless_range_loop)]
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut phi = vec![vec![Rational::zero(); m]; m];
        for i in 0..m {
            for j in i + 1..m {
                let v = f(i, j);
                phi[j][i] = v.clone();
                phi[i][j] = v;
            }
        }
        Self { phi }
    }

    pub fn point_count(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, i: usize, j: usize) -> &Rational {
        &self.phi[i][j]
    }

    /// Restriction to a subset of the points, in the given order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.phi[idx[a]][idx[b]].clone())
    }

    /// The bordered `(m+1) x (m+1)` Cayley-Menger matrix.
    pub fn cm_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.point_count() + 1, |r, c| match (r, c) {
            (0, 0) => Rational::zero(),
            (0, _) | (_, 0) => Rational::one(),
            _ => self.phi[r - 1][c - 1].clone(),
        })
    }
}

pub fn cm_determinant(spec: &SquaredDistanceSpec) -> Rational {
    rat_det(&spec.cm_matrix())
}

/// `n + 1` points of `C^n` are affinely dependent iff their determinant vanishes.
pub fn affinely_dependent(spec: &SquaredDistanceSpec, dim: usize) -> Result<bool, CmError> {
    if spec.point_count() != dim + 1 {
        return Err(CmError::WrongPointCount {
            dim,
            expected: dim + 1,
            got: spec.point_count(),
        });
    }
    Ok(cm_determinant(spec).is_zero())
}

/// Both sides of a determinant identity, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub determinant: Rational,
    pub closed_form: Rational,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.determinant == self.closed_form
    }
}

/// Points `x, p_1..p_n, y`: `x` and `y` at `e2` from every `p_i`, the `p_i`
/// mutually at `d2`, and `phi(x, y) = t`.
pub fn lemma1_spec(n: usize, d2: &Rational, e2: &Rational, t: &Rational) -> SquaredDistanceSpec {
    let last = n + 1;
    SquaredDistanceSpec::from_fn(n + 2, |i, j| match (i, j) {
        (0, j) if j == last => t.clone(),
        (0, _) => e2.clone(),
        (_, j) if j == last => e2.clone(),
        _ => d2.clone(),
    })
}

/// `(-1)^(n-1) d^(2n-2) t (n t + (2n-2) d^2 - 4 n e^2)`
pub fn lemma1_closed_form(n: usize, d2: &Rational, e2: &Rational, t: &Rational) -> Rational {
    let nn = int(n as i64);
    let factor = &nn * t + int(2 * n as i64 - 2) * d2 - int(4) * &nn * e2;
    let mut v = num_traits::pow(d2.clone(), n - 1) * t * factor;
    if (n - 1) % 2 == 1 {
        v = -v;
    }
    v
}

/// Nonzero root of the closed form in `t`: `4 e^2 - 2 (n-1)/n d^2`.
pub fn lemma1_root(n: usize, d2: &Rational, e2: &Rational) -> Rational {
    // (4n e^2 - 2(n-1) d^2) / n over a common denominator, normalised once
    let n_i = n as i64;
    let num = BigInt::from(4 * n_i) * e2.numer() * d2.denom()
        - BigInt::from(2 * (n_i - 1)) * d2.numer() * e2.denom();
    Rational::new(num, BigInt::from(n_i) * e2.denom() * d2.denom())
}

pub fn lemma1_identity(n: usize, d2: &Rational, e2: &Rational, t: &Rational) -> IdentityCheck {
    IdentityCheck {
        determinant: cm_determinant(&lemma1_spec(n, d2, e2, t)),
        closed_form: lemma1_closed_form(n, d2, e2, t),
    }
}

pub fn lemma1_closed_form_check(n: usize, d2: &Rational, e2: &Rational, t: &Rational) -> bool {
    lemma1_identity(n, d2, e2, t).holds()
}

/// Points `x, p_1, p_2, y` of the planar seven-point configuration with
/// `phi(x, y) = t`.
pub fn lemma5_spec(d2: &Rational, t: &Rational) -> SquaredDistanceSpec {
    let (s3, s11, s25) = (int(3) * d2, int(11) * d2, int(25) * d2);
    SquaredDistanceSpec::from_fn(4, |i, j| match (i, j) {
        (0, 1) | (1, 3) => s11.clone(),
        (0, 2) | (2, 3) => s3.clone(),
        (0, 3) => t.clone(),
        _ => s25.clone(),
    })
}

/// `2 d^2 t (11 d^2 - 25 t)`
pub fn lemma5_closed_form(d2: &Rational, t: &Rational) -> Rational {
    int(2) * d2 * t * (int(11) * d2 - int(25) * t)
}

pub fn lemma5_identity(d2: &Rational, t: &Rational) -> IdentityCheck {
    IdentityCheck {
        determinant: cm_determinant(&lemma5_spec(d2, t)),
        closed_form: lemma5_closed_form(d2, t),
    }
}

pub fn lemma5_closed_form_check(d2: &Rational, t: &Rational) -> bool {
    lemma5_identity(d2, t).holds()
}

/// `c_0` at `e2` from each of `c_1..c_n`, which are mutually at `d2`.
pub fn apex_simplex_spec(n: usize, d2: &Rational, e2: &Rational) -> SquaredDistanceSpec {
    SquaredDistanceSpec::from_fn(n + 1, |i, _| if i == 0 { e2.clone() } else { d2.clone() })
}

/// Affine independence of the apex-plus-regular-simplex configuration:
/// `2 n e^2 != (n-1) d^2`, confirmed against its exact determinant.
pub fn apex_simplex_independent(n: usize, d2: &Rational, e2: &Rational) -> Result<bool, CmError> {
    let condition = int(2 * n as i64) * e2 != int(n as i64 - 1) * d2;
    let det = cm_determinant(&apex_simplex_spec(n, d2, e2));
    if condition == det.is_zero() {
        return Err(CmError::CrossCheck(format!(
            "n={n} d2={} e2={} det={}",
            format_rational(d2),
            format_rational(e2),
            format_rational(&det)
        )));
    }
    Ok(condition)
}

/// Triangle with squared sides `3 d^2`, `11 d^2`, `25 d^2`.
pub fn triangle_4b_spec(d2: &Rational) -> SquaredDistanceSpec {
    let (a, b, c) = (int(3) * d2, int(11) * d2, int(25) * d2);
    SquaredDistanceSpec::from_fn(3, |i, j| match (i, j) {
        (0, 1) => a.clone(),
        (0, 2) => b.clone(),
        _ => c.clone(),
    })
}

pub fn triangle_4b_independent(d2: &Rational) -> Result<bool, CmError> {
    if !d2.is_positive() {
        return Err(CmError::NonPositive {
            name: "d2",
            value: format_rational(d2),
        });
    }
    let independent = !cm_determinant(&triangle_4b_spec(d2)).is_zero();
    if !independent {
        return Err(CmError::CrossCheck(format!(
            "triangle determinant vanished at d2={}",
            format_rational(d2)
        )));
    }
    Ok(independent)
}

/// One seeded sample of an identity check.
#[derive(Debug, Clone, Serialize)]
pub struct SampleOutcome {
    pub index: usize,
    pub params: Vec<(String, RationalStr)>,
    pub determinant: RationalStr,
    pub closed_form: RationalStr,
    pub pass: bool,
}

/// Seeded random `(d2, e2, t)` checks of the bipyramid identity in dimension `n`.
pub fn verify_lemma1_samples(n: usize, samples: usize, seed: u64) -> Vec<SampleOutcome> {
    let mut rng = sampling::rng(sampling::derive_seed(seed, &format!("lemma1/n={n}")));
    let params: Vec<[Rational; 3]> = (0..samples)
        .map(|_| {
            [
                sampling::positive_rational(&mut rng),
                sampling::positive_rational(&mut rng),
                sampling::signed_rational(&mut rng),
            ]
        })
        .collect();
    let checks = par::map(&params, |[d2, e2, t]| lemma1_identity(n, d2, e2, t));
    params
        .into_iter()
        .zip(checks)
        .enumerate()
        .map(|(index, ([d2, e2, t], c))| SampleOutcome {
            index,
            pass: c.holds(),
            params: vec![
                ("d2".into(), RationalStr(d2)),
                ("e2".into(), RationalStr(e2)),
                ("t".into(), RationalStr(t)),
            ],
            determinant: RationalStr(c.determinant),
            closed_form: RationalStr(c.closed_form),
        })
        .collect()
}

/// Seeded random `(d2, t)` checks of the planar seven-point identity.
pub fn verify_lemma5_samples(samples: usize, seed: u64) -> Vec<SampleOutcome> {
    let mut rng = sampling::rng(sampling::derive_seed(seed, "lemma5"));
    let params: Vec<[Rational; 2]> = (0..samples)
        .map(|_| {
            [
                sampling::positive_rational(&mut rng),
                sampling::signed_rational(&mut rng),
            ]
        })
        .collect();
    let checks = par::map(&params, |[d2, t]| lemma5_identity(d2, t));
    params
        .into_iter()
        .zip(checks)
        .enumerate()
        .map(|(index, ([d2, t], c))| SampleOutcome {
            index,
            pass: c.holds(),
            params: vec![("d2".into(), RationalStr(d2)), ("t".into(), RationalStr(t))],
            determinant: RationalStr(c.determinant),
            closed_form: RationalStr(c.closed_form),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn cm_examples() {
        let two = SquaredDistanceSpec::from_fn(2, |_, _| int(5));
        assert_eq!(cm_determinant(&two), int(10));
        let tri = SquaredDistanceSpec::from_fn(3, |_, _| int(1));
        assert_eq!(cm_determinant(&tri), int(-3));
        let same = SquaredDistanceSpec::from_fn(2, |_, _| int(0));
        assert_eq!(cm_determinant(&same), int(0));
    }

    #[test]
    fn dependence_examples() {
        let tri = SquaredDistanceSpec::from_fn(3, |_, _| int(1));
        assert!(!affinely_dependent(&tri, 2).unwrap());
        let collinear = SquaredDistanceSpec::from_fn(3, |i, j| match (i, j) {
            (0, 1) => int(1),
            (0, 2) => int(4),
            _ => int(9),
        });
        assert!(affinely_dependent(&collinear, 2).unwrap());
        let same = SquaredDistanceSpec::from_fn(2, |_, _| int(0));
        assert!(affinely_dependent(&same, 1).unwrap());
        assert!(matches!(
            affinely_dependent(&tri, 3),
            Err(CmError::WrongPointCount {
                expected: 4,
                got: 3,
                ..
            })
        ));
    }

    #[test]
    fn lemma1_examples() {
        let c = lemma1_identity(2, &int(1), &int(1), &int(3));
        assert!(c.holds());
        assert!(c.determinant.is_zero());
        let c = lemma1_identity(2, &int(1), &int(1), &int(0));
        assert!(c.holds() && c.determinant.is_zero());
        let c = lemma1_identity(5, &int(2), &int(3), &int(7));
        assert!(c.holds());
        // (-1)^4 * 2^4 * 7 * (35 + 16 - 60)
        assert_eq!(c.closed_form, int(16 * 7 * -9));
        assert_eq!(lemma1_root(2, &int(1), &int(1)), int(3));
        assert_eq!(lemma1_root(3, &int(1), &int(1)), rat(8, 3));
    }

    #[test]
    fn lemma5_examples() {
        let c = lemma5_identity(&int(1), &rat(11, 25));
        assert!(c.holds() && c.determinant.is_zero());
        assert!(lemma5_identity(&int(1), &int(0)).determinant.is_zero());
        let c = lemma5_identity(&int(3), &int(1));
        assert!(c.holds());
        assert_eq!(c.determinant, int(48));
        assert_eq!(lemma5_spec(&int(1), &int(0)).phi(2, 1), &int(25));
    }

    #[test]
    fn apex_examples() {
        assert!(apex_simplex_independent(2, &int(1), &int(1)).unwrap());
        assert!(!apex_simplex_independent(2, &int(4), &int(1)).unwrap());
        assert!(!apex_simplex_independent(3, &int(3), &int(1)).unwrap());
    }

    #[test]
    fn triangle_examples() {
        for d2 in [int(1), rat(7, 3), int(25)] {
            assert!(triangle_4b_independent(&d2).unwrap());
        }
        assert!(triangle_4b_independent(&int(0)).is_err());
        assert!(triangle_4b_independent(&int(-2)).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            SquaredDistanceSpec::new(vec![vec![int(1)]]),
            Err(CmError::NonzeroDiagonal(0))
        ));
        assert!(matches!(
            SquaredDistanceSpec::new(vec![vec![int(0), int(1)], vec![int(2), int(0)]]),
            Err(CmError::Asymmetric { .. })
        ));
        assert!(matches!(
            SquaredDistanceSpec::new(vec![vec![int(0), int(1)], vec![int(1)]]),
            Err(CmError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn json_form() {
        let spec: SquaredDistanceSpec =
            serde_json::from_str(r#"{"m": 2, "phi": [["0", "5/2"], ["10/4", "0"]]}"#).unwrap();
        assert_eq!(cm_determinant(&spec), int(5));
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"m":2,"phi":[["0","5/2"],["5/2","0"]]}"#);
        assert!(
            serde_json::from_str::<SquaredDistanceSpec>(r#"{"m": 3, "phi": [["0"]]}"#).is_err()
        );
    }

    #[test]
    fn sampled_identities_pass() {
        assert!(verify_lemma1_samples(4, 10, 1).iter().all(|s| s.pass));
        assert!(verify_lemma5_samples(10, 1).iter().all(|s| s.pass));
    }
}
