use nalgebra::{DMatrix, DVector};

use crate::cayley_menger::{affinely_dependent, SquaredDistanceSpec};
use crate::rational::{from_f64, to_f64, Rational};

use super::local::{dist_sq, Point};
use super::EmbedError;

/// The unique point of `R^n` at the given squared distances from `n + 1`
/// affinely independent anchors.
///
/// Independence is decided exactly, on the anchors' coordinates read as
/// rationals. Subtracting the first sphere equation from the others leaves a
/// linear system; its solution is then checked against the first sphere.
pub fn trilaterate(anchors: &[Point], sq_dists: &[Rational]) -> Result<Point, EmbedError> {
    let m = anchors.len();
    if m < 2 {
        return Err(EmbedError::Shape {
            what: "anchors",
            expected: 2,
            got: m,
        });
    }
    let n = m - 1;
    if sq_dists.len() != m {
        return Err(EmbedError::Shape {
            what: "squared distances",
            expected: m,
            got: sq_dists.len(),
        });
    }
    if let Some(a) = anchors.iter().find(|a| a.len() != n) {
        return Err(EmbedError::Shape {
            what: "coordinates per anchor",
            expected: n,
            got: a.len(),
        });
    }
    let exact: Vec<Vec<Rational>> = anchors
        .iter()
        .map(|a| {
            a.iter()
                .map(|&v| {
                    from_f64(v)
                        .ok_or_else(|| EmbedError::Infeasible(format!("non-finite coordinate {v}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let spec = SquaredDistanceSpec::from_fn(m, |i, j| {
        exact[i]
            .iter()
            .zip(&exact[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    });
    if affinely_dependent(&spec, n).map_err(|e| EmbedError::Infeasible(e.to_string()))? {
        return Err(EmbedError::DependentAnchors);
    }
    let s: Vec<f64> = sq_dists.iter().map(to_f64).collect();
    let a0 = &anchors[0];
    let norm0: f64 = a0.iter().map(|v| v * v).sum();
    let lhs = DMatrix::from_fn(n, n, |i, j| 2.0 * (anchors[i + 1][j] - a0[j]));
    let rhs = DVector::from_fn(n, |i, _| {
        let ni: f64 = anchors[i + 1].iter().map(|v| v * v).sum();
        ni - norm0 - (s[i + 1] - s[0])
    });
    let x = lhs.lu().solve(&rhs).ok_or(EmbedError::DependentAnchors)?;
    let x: Point = x.iter().copied().collect();
    let residual = (dist_sq(&x, a0) - s[0]).abs();
    let scale = s.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if residual > 1e-9 * scale {
        return Err(EmbedError::NoSolution { residual });
    }
    Ok(x)
}
