//! Floating-point realisations of witness graphs.
//!
//! Exactness lives in the derivation; coordinates only show that the
//! configuration is real. Each sub-witness is glued onto its host segment by
//! an isometry whose remaining freedom is drawn from a seed derived from the
//! sub-witness's vertex-id prefix, so parallel and sequential runs agree bit
//! for bit.

mod local;
mod svg;
mod trilaterate;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cayley_menger::{cm_determinant, SquaredDistanceSpec};
use crate::par;
use crate::rational::{to_f64, Rational};
use crate::sampling::{derive_seed, rng};
use crate::witness::derivation::{Derivation, NodeId};
use crate::witness::expand::{certified_bars, local_config, Role};
use crate::witness::graph::WitnessGraph;

pub use local::{
    kite, local_coords, random_frame, regular_simplex, simplex_apex_coords, ApexCoords, Point,
};
pub use svg::render_svg;
pub use trilaterate::trilaterate;

use local::{direction, dist_sq, place};

/// Points closer than this are reported as coincident.
pub const COINCIDENCE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("geometrically infeasible: {0}")]
    Infeasible(String),
    #[error("anchors are affinely dependent")]
    DependentAnchors,
    #[error("no point has the prescribed distances (residual {residual:e})")]
    NoSolution { residual: f64 },
    #[error("expected {expected} {what}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("only planar embeddings can be drawn, this one has n={0}")]
    NotPlanar(usize),
    #[error("graph does not match its derivation: {0}")]
    GraphMismatch(String),
}

/// A segment whose squared length the construction prescribes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub u: usize,
    pub v: usize,
    pub sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceWarning {
    pub a: String,
    pub b: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub dim: usize,
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub coords: Vec<Point>,
    pub segments: Vec<Segment>,
    pub distinguished: (usize, usize),
    pub target_sq: f64,
    pub max_residual: f64,
    pub target_residual: f64,
    pub coincidence_warnings: Vec<CoincidenceWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedReport {
    pub max_residual: f64,
    pub target_residual: f64,
    pub coincidence_warnings: Vec<CoincidenceWarning>,
}

impl Embedding {
    /// Builds an embedding and computes its residuals and warnings from the
    /// coordinates alone.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        ids: Vec<String>,
        labels: Vec<String>,
        coords: Vec<Point>,
        segments: Vec<Segment>,
        distinguished: (usize, usize),
        target_sq: f64,
    ) -> Self {
        let mut e = Embedding {
            dim,
            ids,
            labels,
            coords,
            segments,
            distinguished,
            target_sq,
            max_residual: 0.0,
            target_residual: 0.0,
            coincidence_warnings: vec![],
        };
        e.recompute();
        e
    }

    pub fn recompute(&mut self) {
        let c = &self.coords;
        self.max_residual = self
            .segments
            .iter()
            .map(|s| (dist_sq(&c[s.u], &c[s.v]) - s.sq).abs())
            .fold(0.0, f64::max);
        let (x, y) = self.distinguished;
        self.target_residual = (dist_sq(&c[x], &c[y]) - self.target_sq).abs();
        self.coincidence_warnings = coincidences(c)
            .into_iter()
            .map(|(a, b, distance)| CoincidenceWarning {
                a: self.ids[a].clone(),
                b: self.ids[b].clone(),
                distance,
            })
            .collect();
    }

    pub fn coordinates(&self, id: &str) -> Option<&Point> {
        self.ids
            .iter()
            .position(|v| v == id)
            .map(|i| &self.coords[i])
    }

    pub fn report(&self) -> EmbedReport {
        EmbedReport {
            max_residual: self.max_residual,
            target_residual: self.target_residual,
            coincidence_warnings: self.coincidence_warnings.clone(),
        }
    }
}

/// Pairs of points closer than [`COINCIDENCE_DISTANCE`], found by a sweep
/// along the first coordinate.
fn coincidences(coords: &[Point]) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| coords[a][0].total_cmp(&coords[b][0]).then(a.cmp(&b)));
    let mut out = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if coords[b][0] - coords[a][0] >= COINCIDENCE_DISTANCE {
                break;
            }
            let d = dist_sq(&coords[a], &coords[b]).sqrt();
            if d < COINCIDENCE_DISTANCE {
                out.push((a.min(b), a.max(b), d));
            }
        }
    }
    out.sort_by_key(|&(a, b, _)| (a, b));
    out
}

struct Placed {
    ids: Vec<String>,
    coords: Vec<Point>,
}

fn embed_node(
    der: &Derivation,
    id: NodeId,
    px: &[f64],
    py: &[f64],
    prefix: &str,
    seed: u64,
) -> Placed {
    let Some(cfg) = local_config(der, id) else {
        return Placed {
            ids: vec![],
            coords: vec![],
        };
    };
    let local = local_coords(der, id);
    let label = if prefix.is_empty() { "/" } else { prefix };
    let mut r = rng(derive_seed(seed, label));
    let frame = random_frame(&direction(px, py), &mut r);
    let mut world: Vec<Point> = vec![px.to_vec(), py.to_vec()];
    world.extend(local[2..].iter().map(|p| place(px, &frame, p)));
    let labels = cfg.labels();
    let pieces = par::map(&cfg.pairs, |p| {
        let child_prefix = format!("{prefix}{}-{}/", labels[p.u], labels[p.v]);
        let placed = embed_node(der, p.via, &world[p.u], &world[p.v], &child_prefix, seed);
        (child_prefix, placed)
    });
    let mut ids: Vec<String> = labels[2..].iter().map(|l| format!("{prefix}{l}")).collect();
    let mut coords: Vec<Point> = world.split_off(2);
    for (_, piece) in pieces {
        ids.extend(piece.ids);
        coords.extend(piece.coords);
    }
    Placed { ids, coords }
}

/// Realises every vertex of `g` in `R^n` and measures the unit edges.
pub fn embed(g: &WitnessGraph, seed: u64) -> Result<Embedding, EmbedError> {
    let der = &g.derivation;
    let n = der.dim();
    let x = vec![0.0; n];
    let mut y = vec![0.0; n];
    y[0] = to_f64(&g.target_sq).sqrt();
    let placed = embed_node(der, der.root(), &x, &y, "", seed);
    let mut ids = vec!["x".to_string(), "y".to_string()];
    ids.extend(placed.ids);
    let mut coords = vec![x, y];
    coords.extend(placed.coords);
    if ids.len() != g.vertices.len() {
        return Err(EmbedError::GraphMismatch(format!(
            "derivation places {} vertices, graph has {}",
            ids.len(),
            g.vertices.len()
        )));
    }
    // the graph may list vertices in any order; match by id
    let mut by_id: std::collections::HashMap<&str, usize> =
        std::collections::HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        by_id.insert(id.as_str(), i);
    }
    let mut ordered = Vec::with_capacity(ids.len());
    for v in &g.vertices {
        match by_id.get(v.id.as_str()) {
            Some(&i) => ordered.push(std::mem::take(&mut coords[i])),
            None => {
                return Err(EmbedError::GraphMismatch(format!(
                    "vertex {:?} is not produced by the derivation",
                    v.id
                )))
            }
        }
    }
    let segments = g
        .unit_edges
        .iter()
        .map(|&(u, v)| Segment { u, v, sq: 1.0 })
        .collect();
    Ok(Embedding::new(
        n,
        g.vertices.iter().map(|v| v.id.clone()).collect(),
        g.vertices.iter().map(|v| v.role.display_label()).collect(),
        ordered,
        segments,
        g.distinguished,
        to_f64(&g.target_sq),
    ))
}

/// The seven labelled points of the planar contraction with sub-witnesses
/// elided: eleven segments at their prescribed lengths and the pair `x, y`.
pub fn kite_skeleton(d2: &Rational) -> Embedding {
    let d2f = to_f64(d2);
    let coords = kite(d2f);
    let roles = [
        Role::X,
        Role::Y,
        Role::YTilde,
        Role::P(1),
        Role::P(2),
        Role::PTilde(1),
        Role::PTilde(2),
    ];
    let (x, y, yt, p1, p2, pt1, pt2) = (0, 1, 2, 3, 4, 5, 6);
    let seg = |u, v, f: f64| Segment { u, v, sq: f * d2f };
    let segments = vec![
        seg(y, yt, 1.0),
        seg(x, p1, 11.0),
        seg(x, p2, 3.0),
        seg(y, p1, 11.0),
        seg(y, p2, 3.0),
        seg(p1, p2, 25.0),
        seg(x, pt1, 11.0),
        seg(x, pt2, 3.0),
        seg(yt, pt1, 11.0),
        seg(yt, pt2, 3.0),
        seg(pt1, pt2, 25.0),
    ];
    Embedding::new(
        2,
        roles.iter().map(|r| r.label()).collect(),
        roles.iter().map(|r| r.display_label()).collect(),
        coords,
        segments,
        (x, y),
        11.0 / 25.0 * d2f,
    )
}

/// Determinants on `n + 2` points, which must vanish in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetEcho {
    /// Local point sets whose pairwise squared distances are all certified.
    pub exact_subsets: usize,
    pub exact_nonzero: usize,
    /// Random vertex subsets, measured on the embedded coordinates.
    pub float_subsets: usize,
    pub max_float_abs_det: f64,
}

impl SubsetEcho {
    pub fn holds(&self, float_tol: f64) -> bool {
        self.exact_nonzero == 0 && self.max_float_abs_det <= float_tol
    }
}

fn combinations(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every `(n+2)`-subset of a node's local points whose pairs all carry a
/// certified squared distance, with its exact determinant.
pub fn certified_subset_determinants(der: &Derivation, id: NodeId) -> Vec<(Vec<usize>, Rational)> {
    let Some(cfg) = local_config(der, id) else {
        return vec![];
    };
    let m = cfg.roles.len();
    let mut bar: Vec<Vec<Option<Rational>>> = vec![vec![None; m]; m];
    for (u, v, sq) in certified_bars(der, id) {
        bar[u][v] = Some(sq.clone());
        bar[v][u] = Some(sq);
    }
    let mut out = Vec::new();
    combinations(m, der.dim() + 2, |idx| {
        let complete = idx
            .iter()
            .enumerate()
            .all(|(a, &i)| idx[a + 1..].iter().all(|&j| bar[i][j].is_some()));
        if complete {
            let spec = SquaredDistanceSpec::from_fn(idx.len(), |a, b| {
                bar[idx[a]][idx[b]].clone().expect("complete")
            });
            out.push((idx.to_vec(), cm_determinant(&spec)));
        }
    });
    out
}

fn float_cm_det(points: &[&Point]) -> f64 {
    let m = points.len() + 1;
    let mat = nalgebra::DMatrix::from_fn(m, m, |r, c| match (r, c) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => dist_sq(points[r - 1], points[c - 1]),
    });
    mat.determinant()
}

/// Exact determinants of every certified `(n+2)`-point local set, plus the
/// floating determinant of `float_samples` random `(n+2)`-subsets of the
/// embedded vertices.
pub fn subset_echo(g: &WitnessGraph, e: &Embedding, float_samples: usize, seed: u64) -> SubsetEcho {
    let der = &g.derivation;
    let nodes = der.reachable();
    let dets: Vec<Vec<(Vec<usize>, Rational)>> =
        par::map(&nodes, |&id| certified_subset_determinants(der, id));
    let exact_subsets = dets.iter().map(Vec::len).sum();
    let exact_nonzero = dets.iter().flatten().filter(|(_, d)| !d.is_zero()).count();
    let k = g.dim() + 2;
    let v = e.coords.len();
    let mut max_float_abs_det = 0.0f64;
    let mut float_subsets = 0;
    if v >= k {
        let mut r = rng(derive_seed(seed, "subset-echo"));
        for _ in 0..float_samples {
            let pick = rand::seq::index::sample(&mut r, v, k);
            let pts: Vec<&Point> = pick.iter().map(|i| &e.coords[i]).collect();
            max_float_abs_det = max_float_abs_det.max(float_cm_det(&pts).abs());
            float_subsets += 1;
        }
    }
    SubsetEcho {
        exact_subsets,
        exact_nonzero,
        float_subsets,
        max_float_abs_det,
    }
}
