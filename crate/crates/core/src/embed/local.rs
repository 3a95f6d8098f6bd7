//! Canonical coordinates of a single local configuration: `x` at the origin,
//! `y` on the positive first axis.

use num_traits::Signed;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::rational::{format_rational, int, to_f64, Rational};
use crate::witness::derivation::{Derivation, NodeId};
use crate::witness::expand::{shape, Shape};

use super::EmbedError;

pub type Point = Vec<f64>;

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axis(n: usize, i: usize, len: f64) -> Point {
    let mut v = vec![0.0; n];
    v[i] = len;
    v
}

/// Regular simplex of `n` vertices and side `d`, centred at the origin of the
/// coordinates `1..n` (coordinate 0 stays zero). Built from the Helmert basis
/// of the sum-zero hyperplane, in which the scaled standard basis vectors
/// `(d / sqrt 2) e_i` have the required pairwise distance.
#[allow(clippy::needless_range_loop)]
pub fn regular_simplex(n: usize, d: f64) -> Vec<Point> {
    let s = d / std::f64::consts::SQRT_2;
    (0..n)
        .map(|i| {
            let mut p = vec![0.0; n];
            for j in 1..n {
                let jf = j as f64;
                let norm = (jf * (jf + 1.0)).sqrt();
                let h = match i.cmp(&j) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -jf / norm,
                    std::cmp::Ordering::Greater => 0.0,
                };
                p[j] = s * h;
            }
            p
        })
        .collect()
}

/// Rotation in the plane of the first two axes, taking `e_1` to the unit
/// vector at angle `theta`.
fn rotate(p: &[f64], cos: f64, sin: f64) -> Point {
    let mut q = p.to_vec();
    q[0] = p[0] * cos - p[1] * sin;
    q[1] = p[0] * sin + p[1] * cos;
    q
}

/// `cos` and `sin` of the angle at `x` between `y` and `y~` when
/// `|x-y| = |x-y~| = r` and `|y-y~| = eps`.
fn apex_turn(r2: f64, eps2: f64) -> (f64, f64) {
    let cos = (1.0 - eps2 / (2.0 * r2)).clamp(-1.0, 1.0);
    (cos, (1.0 - cos * cos).max(0.0).sqrt())
}

/// Points of a bipyramid in local order `x, y, y~, p_1..p_n, p~_1..p~_n`.
fn bipyramid(n: usize, d2: f64, e2: f64, r2: f64, eps2: f64) -> Vec<Point> {
    let r = r2.sqrt();
    let mut p = regular_simplex(n, d2.sqrt());
    for q in &mut p {
        q[0] = r / 2.0;
    }
    let x = vec![0.0; n];
    let y = axis(n, 0, r);
    let (c, s) = apex_turn(r2, eps2);
    let yt = rotate(&y, c, s);
    let pt: Vec<Point> = p.iter().map(|q| rotate(q, c, s)).collect();
    debug_assert!((dist_sq(&x, &p[0]) - e2).abs() < 1e-9 * e2.max(1.0));
    let mut out = vec![x, y, yt];
    out.extend(p);
    out.extend(pt);
    out
}

/// Seven points of the planar kite in local order `x, y, y~, p1, p2, p~1, p~2`:
/// `p1` at `sqrt(11) d` and `p2` at `sqrt(3) d` from both `x` and `y`, on
/// opposite sides of the line `xy`, so that `|p1 - p2| = 5 d`.
pub fn kite(d2: f64) -> Vec<Point> {
    let r2 = 11.0 / 25.0 * d2;
    let r = r2.sqrt();
    let h1 = (11.0 * d2 - r2 / 4.0).sqrt();
    let h2 = (3.0 * d2 - r2 / 4.0).sqrt();
    let (x, y) = (vec![0.0, 0.0], vec![r, 0.0]);
    let (p1, p2) = (vec![r / 2.0, h1], vec![r / 2.0, -h2]);
    let (c, s) = apex_turn(r2, d2);
    let yt = rotate(&y, c, s);
    let (pt1, pt2) = (rotate(&p1, c, s), rotate(&p2, c, s));
    vec![x, y, yt, p1, p2, pt1, pt2]
}

/// Local coordinates of a node, matching [`crate::witness::expand::local_config`].
pub fn local_coords(der: &Derivation, id: NodeId) -> Vec<Point> {
    let n = der.dim();
    let sq = |nid: NodeId| to_f64(&der.node(nid).target_sq);
    let r2 = sq(id);
    match shape(der, id) {
        Shape::Unit => vec![vec![0.0; n], axis(n, 0, r2.sqrt())],
        Shape::Bipyramid { n, d, e, eps } => bipyramid(n, sq(d), sq(e), r2, sq(eps)),
        Shape::Kite { d, .. } => kite(sq(d)),
    }
}

/// Coordinates of the bipyramid for unit-free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ApexCoords {
    pub p: Vec<Point>,
    pub x: Point,
    pub y: Point,
    pub y_tilde: Point,
}

/// Regular simplex of side `sqrt(d2)` with two apexes at `sqrt(e2)` from
/// every vertex. `y~` is the mirror image of `y` through `x`, which keeps
/// `|x - y~| = |x - y|` and is the widest admissible choice (`eps = 2r`).
pub fn simplex_apex_coords(
    n: usize,
    d2: &Rational,
    e2: &Rational,
) -> Result<ApexCoords, EmbedError> {
    if n < 2 {
        return Err(EmbedError::Infeasible(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    if !d2.is_positive() || !e2.is_positive() {
        return Err(EmbedError::Infeasible("d2 and e2 must be positive".into()));
    }
    let lhs = int(2 * n as i64) * e2;
    let rhs = int(n as i64 - 1) * d2;
    if lhs <= rhs {
        return Err(EmbedError::Infeasible(format!(
            "apex height is not positive: 2ne^2 = {} <= (n-1)d^2 = {}",
            format_rational(&lhs),
            format_rational(&rhs)
        )));
    }
    let r2 = crate::cayley_menger::lemma1_root(n, d2, e2);
    let (d2f, e2f, r2f) = (to_f64(d2), to_f64(e2), to_f64(&r2));
    let pts = bipyramid(n, d2f, e2f, r2f, 4.0 * r2f);
    let x = pts[0].clone();
    let y = pts[1].clone();
    let y_tilde = y.iter().map(|v| -v).collect();
    Ok(ApexCoords {
        p: pts[3..3 + n].to_vec(),
        x,
        y,
        y_tilde,
    })
}

/// Orthonormal frame (columns) whose first column is `u / |u|`; the rest is
/// drawn at random.
pub fn random_frame<R: Rng>(u: &[f64], rng: &mut R) -> Vec<Point> {
    let n = u.len();
    let len = norm(u);
    let mut cols: Vec<Point> = vec![u.iter().map(|v| v / len).collect()];
    while cols.len() < n {
        let mut v: Point = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // two passes of Gram-Schmidt keep the frame orthogonal to round-off
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let l = norm(&v);
        if l > 1e-6 {
            cols.push(v.into_iter().map(|x| x / l).collect());
        }
    }
    cols
}

/// `origin + sum_j p[j] * frame[j]`.
pub fn place(origin: &[f64], frame: &[Point], p: &[f64]) -> Point {
    let mut out = origin.to_vec();
    for (coef, col) in p.iter().zip(frame) {
        for (o, c) in out.iter_mut().zip(col) {
            *o += coef * c;
        }
    }
    out
}

pub(crate) fn direction(from: &[f64], to: &[f64]) -> Point {
    sub(to, from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::sampling;

    #[test]
    fn simplex_is_regular() {
        for n in 2..8 {
            let p = regular_simplex(n, 2.0);
            for i in 0..n {
                assert_eq!(p[i][0], 0.0);
                for j in i + 1..n {
                    assert!((dist_sq(&p[i], &p[j]) - 4.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn apex_examples() {
        let c = simplex_apex_coords(2, &int(1), &int(1)).unwrap();
        assert!((dist_sq(&c.x, &c.y) - 3.0).abs() < 1e-12);
        let c = simplex_apex_coords(3, &int(1), &int(1)).unwrap();
        assert!((dist_sq(&c.x, &c.y) - 8.0 / 3.0).abs() < 1e-12);
        for p in &c.p {
            assert!((dist_sq(&c.x, p) - 1.0).abs() < 1e-12);
            assert!((dist_sq(&c.y, p) - 1.0).abs() < 1e-12);
        }
        assert!((dist_sq(&c.x, &c.y_tilde) - 8.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            simplex_apex_coords(2, &int(4), &int(1)),
            Err(EmbedError::Infeasible(_))
        ));
        assert!(simplex_apex_coords(2, &rat(1, 2), &int(0)).is_err());
    }

    #[test]
    fn kite_distances() {
        let k = kite(1.0);
        let want = [
            (0, 1, 11.0 / 25.0),
            (0, 2, 11.0 / 25.0),
            (1, 2, 1.0),
            (0, 3, 11.0),
            (1, 3, 11.0),
            (0, 4, 3.0),
            (1, 4, 3.0),
            (3, 4, 25.0),
            (0, 5, 11.0),
            (2, 5, 11.0),
            (0, 6, 3.0),
            (2, 6, 3.0),
            (5, 6, 25.0),
        ];
        for (a, b, sq) in want {
            assert!((dist_sq(&k[a], &k[b]) - sq).abs() < 1e-12, "{a}-{b}");
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = sampling::rng(5);
        for n in 2..7 {
            let u: Point = (0..n).map(|i| i as f64 + 0.5).collect();
            let f = random_frame(&u, &mut rng);
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = f[i].iter().zip(&f[j]).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
        }
    }
}
