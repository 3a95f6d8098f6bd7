//! Materialised witness graphs.
//!
//! Every pair in a local configuration gets a fresh copy of its sub-witness,
//! glued only along the copy's distinguished pair. Vertex ids are built from
//! the path of pair names leading to the copy (`"p1-p2/x-yt/p3"`), so the same
//! derivation always yields byte-identical graphs.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;
use crate::rational::{format_rational, Rational, RationalStr};

use super::derivation::{Derivation, DerivationError, NodeId};
use super::expand::{local_config, Role};
use super::wire::DerivationWire;

/// Graphs above this many vertices are refused rather than materialised.
pub const MAX_WITNESS_VERTICES: u64 = 4_000_000;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("witness would have {vertices} vertices, above the limit of {limit}")]
    TooLarge { vertices: String, limit: u64 },
    #[error(transparent)]
    Derivation(#[from] DerivationError),
    #[error("invalid witness graph: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub role: Role,
}

/// A finite unit-distance graph with a distinguished pair whose distance is
/// forced by the graph's unit edges.
#[derive(Debug, Clone)]
pub struct WitnessGraph {
    pub vertices: Vec<Vertex>,
    pub unit_edges: Vec<(usize, usize)>,
    pub distinguished: (usize, usize),
    pub target_sq: Rational,
    pub derivation: Derivation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WitnessStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub derivation_depth: usize,
}

/// Exact vertex and edge counts of the witness a derivation would produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessCounts {
    pub vertices: BigUint,
    pub edges: BigUint,
}

/// Counts without building: `V = |local| + sum (V_child - 2)`, `E = sum E_child`.
pub fn witness_counts(der: &Derivation) -> WitnessCounts {
    let mut memo: HashMap<NodeId, WitnessCounts> = HashMap::new();
    for id in der.reachable() {
        let counts = match local_config(der, id) {
            None => WitnessCounts {
                vertices: BigUint::from(2u8),
                edges: BigUint::one(),
            },
            Some(cfg) => {
                let mut v = BigUint::from(cfg.roles.len());
                let mut e = BigUint::zero();
                for p in &cfg.pairs {
                    let c = &memo[&p.via];
                    v += &c.vertices - 2u8;
                    e += &c.edges;
                }
                WitnessCounts {
                    vertices: v,
                    edges: e,
                }
            }
        };
        memo.insert(id, counts);
    }
    memo.remove(&der.root()).expect("root is reachable")
}

/// Internal part of a witness: everything except its distinguished pair,
/// which occupies local indices 0 and 1.
#[derive(Debug, Default)]
struct Fragment {
    ids: Vec<String>,
    edges: Vec<(u32, u32)>,
}

fn fragments(der: &Derivation) -> HashMap<NodeId, Arc<Fragment>> {
    let mut memo: HashMap<NodeId, Arc<Fragment>> = HashMap::new();
    for id in der.reachable() {
        let frag = match local_config(der, id) {
            None => Fragment {
                ids: vec![],
                edges: vec![(0, 1)],
            },
            Some(cfg) => {
                let labels = cfg.labels();
                let mut ids: Vec<String> = labels[2..].to_vec();
                let mut base = cfg.roles.len();
                let mut offsets = Vec::with_capacity(cfg.pairs.len());
                for p in &cfg.pairs {
                    offsets.push(base);
                    base += memo[&p.via].ids.len();
                }
                let pieces = par::map(
                    &cfg.pairs.iter().zip(offsets).collect::<Vec<_>>(),
                    |(p, off)| {
                        let child = &memo[&p.via];
                        let prefix = format!("{}-{}/", labels[p.u], labels[p.v]);
                        let map = |i: u32| -> u32 {
                            match i {
                                0 => p.u as u32,
                                1 => p.v as u32,
                                _ => (*off + i as usize - 2) as u32,
                            }
                        };
                        let ids: Vec<String> =
                            child.ids.iter().map(|s| format!("{prefix}{s}")).collect();
                        let edges: Vec<(u32, u32)> =
                            child.edges.iter().map(|&(a, b)| (map(a), map(b))).collect();
                        (ids, edges)
                    },
                );
                let mut edges = Vec::new();
                for (pi, pe) in pieces {
                    ids.extend(pi);
                    edges.extend(pe);
                }
                Fragment { ids, edges }
            }
        };
        memo.insert(id, Arc::new(frag));
    }
    memo
}

/// Materialises the witness graph of a derivation.
pub fn build_witness(der: &Derivation) -> Result<WitnessGraph, WitnessError> {
    let counts = witness_counts(der);
    if counts.vertices > BigUint::from(MAX_WITNESS_VERTICES) {
        return Err(WitnessError::TooLarge {
            vertices: counts.vertices.to_string(),
            limit: MAX_WITNESS_VERTICES,
        });
    }
    let root = der.root();
    let memo = fragments(der);
    let frag = &memo[&root];
    let roles = match local_config(der, root) {
        Some(cfg) => cfg.roles,
        None => vec![Role::X, Role::Y],
    };
    let mut vertices = vec![
        Vertex {
            id: "x".into(),
            role: Role::X,
        },
        Vertex {
            id: "y".into(),
            role: Role::Y,
        },
    ];
    vertices.extend(frag.ids.iter().enumerate().map(|(i, id)| Vertex {
        id: id.clone(),
        role: roles.get(i + 2).copied().unwrap_or(Role::Internal),
    }));
    let unit_edges = frag
        .edges
        .iter()
        .map(|&(a, b)| (a as usize, b as usize))
        .collect();
    let g = WitnessGraph {
        vertices,
        unit_edges,
        distinguished: (0, 1),
        target_sq: der.target_sq().clone(),
        derivation: der.clone(),
    };
    debug_assert_eq!(counts.vertices.to_usize(), Some(g.vertices.len()));
    Ok(g)
}

pub fn witness_stats(g: &WitnessGraph) -> WitnessStats {
    WitnessStats {
        vertex_count: g.vertices.len(),
        edge_count: g.unit_edges.len(),
        derivation_depth: g.derivation.depth(),
    }
}

impl WitnessGraph {
    pub fn dim(&self) -> usize {
        self.derivation.dim()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Structural invariants: pair present, no loops, no duplicate edges,
    /// unique ids, and the unit case is exactly one edge.
    pub fn check_structure(&self) -> Result<(), WitnessError> {
        let bad = |s: String| Err(WitnessError::Invalid(s));
        let n = self.vertices.len();
        let (x, y) = self.distinguished;
        if x >= n || y >= n || x == y {
            return bad(format!(
                "distinguished pair ({x}, {y}) is not a pair of vertices"
            ));
        }
        let mut ids = HashSet::new();
        for v in &self.vertices {
            if !ids.insert(v.id.as_str()) {
                return bad(format!("duplicate vertex id {:?}", v.id));
            }
        }
        let mut seen = HashSet::new();
        for &(a, b) in &self.unit_edges {
            if a >= n || b >= n {
                return bad(format!("edge ({a}, {b}) out of range"));
            }
            if a == b {
                return bad(format!("self-loop at {:?}", self.vertices[a].id));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return bad(format!(
                    "duplicate edge {:?}-{:?}",
                    self.vertices[a].id, self.vertices[b].id
                ));
            }
        }
        if self.target_sq.is_one() && (n != 2 || self.unit_edges.len() != 1) {
            return bad("unit target must be a single edge".into());
        }
        if &self.target_sq != self.derivation.target_sq() {
            return bad(format!(
                "target_sq {} disagrees with derivation {}",
                format_rational(&self.target_sq),
                format_rational(self.derivation.target_sq())
            ));
        }
        Ok(())
    }

    /// Checks that the identity map on vertex ids is an isomorphism onto
    /// `other` that also fixes roles and the distinguished pair.
    pub fn isomorphic_by_id(&self, other: &WitnessGraph) -> bool {
        if self.vertices.len() != other.vertices.len()
            || self.unit_edges.len() != other.unit_edges.len()
        {
            return false;
        }
        let index: HashMap<&str, (usize, Role)> = other
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), (i, v.role)))
            .collect();
        let mut map = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            match index.get(v.id.as_str()) {
                Some(&(i, role)) if role == v.role => map.push(i),
                _ => return false,
            }
        }
        let norm = |a: usize, b: usize| (a.min(b), a.max(b));
        let theirs: HashSet<(usize, usize)> =
            other.unit_edges.iter().map(|&(a, b)| norm(a, b)).collect();
        let (x, y) = self.distinguished;
        self.unit_edges
            .iter()
            .all(|&(a, b)| theirs.contains(&norm(map[a], map[b])))
            && (map[x], map[y]) == other.distinguished
    }

    /// Graphviz rendering: unit edges solid, the distinguished pair dashed.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph witness {\n  node [shape=point];\n");
        for v in &self.vertices {
            if v.role == Role::Internal {
                let _ = writeln!(s, "  \"{}\";", v.id);
            } else {
                let _ = writeln!(
                    s,
                    "  \"{}\" [shape=circle, label=\"{}\"];",
                    v.id,
                    v.role.display_label()
                );
            }
        }
        for &(a, b) in &self.unit_edges {
            let _ = writeln!(
                s,
                "  \"{}\" -- \"{}\";",
                self.vertices[a].id, self.vertices[b].id
            );
        }
        let (x, y) = self.distinguished;
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [style=dashed, color=red, label=\"sq={}\"];",
            self.vertices[x].id,
            self.vertices[y].id,
            format_rational(&self.target_sq)
        );
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            dim: self.dim(),
            target_sq: RationalStr(self.target_sq.clone()),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexJson {
                    id: v.id.clone(),
                    role: v.role.to_string(),
                })
                .collect(),
            unit_edges: self
                .unit_edges
                .iter()
                .map(|&(a, b)| [self.vertices[a].id.clone(), self.vertices[b].id.clone()])
                .collect(),
            distinguished: [
                self.vertices[self.distinguished.0].id.clone(),
                self.vertices[self.distinguished.1].id.clone(),
            ],
            derivation: DerivationWire::from_derivation(&self.derivation),
        }
    }

    pub fn from_json(w: WitnessJson) -> Result<Self, WitnessError> {
        let derivation = w.derivation.to_derivation(w.dim)?;
        let mut index = HashMap::new();
        let mut vertices = Vec::with_capacity(w.vertices.len());
        for (i, v) in w.vertices.into_iter().enumerate() {
            let role = v
                .role
                .parse::<Role>()
                .map_err(|e| WitnessError::Invalid(format!("vertices[{i}].role: {e}")))?;
            if index.insert(v.id.clone(), i).is_some() {
                return Err(WitnessError::Invalid(format!(
                    "vertices[{i}].id: duplicate {:?}",
                    v.id
                )));
            }
            vertices.push(Vertex { id: v.id, role });
        }
        let lookup = |field: String, id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| WitnessError::Invalid(format!("{field}: unknown vertex {id:?}")))
        };
        let unit_edges = w
            .unit_edges
            .iter()
            .enumerate()
            .map(|(i, [a, b])| {
                Ok((
                    lookup(format!("unit_edges[{i}][0]"), a)?,
                    lookup(format!("unit_edges[{i}][1]"), b)?,
                ))
            })
            .collect::<Result<Vec<_>, WitnessError>>()?;
        let distinguished = (
            lookup("distinguished[0]".into(), &w.distinguished[0])?,
            lookup("distinguished[1]".into(), &w.distinguished[1])?,
        );
        let g = WitnessGraph {
            vertices,
            unit_edges,
            distinguished,
            target_sq: w.target_sq.0,
            derivation,
        };
        g.check_structure()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: String,
    pub role: String,
}

/// Serialised witness: ids and roles, unit edges by id, the distinguished
/// pair, and the derivation that certifies it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub dim: usize,
    pub target_sq: RationalStr,
    pub vertices: Vec<VertexJson>,
    pub unit_edges: Vec<[String; 2]>,
    pub distinguished: [String; 2],
    pub derivation: DerivationWire,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::derivation::DerivationBuilder;
    use crate::witness::membership::derive_membership;

    fn stats(n: usize, k: usize, l: usize) -> WitnessStats {
        witness_stats(&build_witness(&derive_membership(n, k, l).unwrap()).unwrap())
    }

    #[test]
    fn size_examples() {
        let s = stats(2, 0, 0);
        assert_eq!(
            (s.vertex_count, s.edge_count, s.derivation_depth),
            (2, 1, 1)
        );
        let s = stats(2, 0, 1);
        assert_eq!(
            (s.vertex_count, s.edge_count, s.derivation_depth),
            (7, 11, 2)
        );
        let s = stats(3, 1, 0);
        assert_eq!(
            (s.vertex_count, s.edge_count, s.derivation_depth),
            (9, 19, 2)
        );
    }

    #[test]
    fn counts_match_materialised_graph() {
        for (n, k, l) in [(2, 0, 2), (2, 1, 0), (3, 0, 1), (4, 2, 0), (5, 1, 0)] {
            let der = derive_membership(n, k, l).unwrap();
            let c = witness_counts(&der);
            let g = build_witness(&der).unwrap();
            assert_eq!(c.vertices.to_usize(), Some(g.vertices.len()));
            assert_eq!(c.edges.to_usize(), Some(g.unit_edges.len()));
            g.check_structure().unwrap();
        }
    }

    #[test]
    fn lemma5_over_base_size() {
        // 7 + 4*45 + 4*5 + 2*620 vertices, 1 + 4*91 + 4*11 + 2*1241 edges
        let s = stats(2, 1, 0);
        assert_eq!((s.vertex_count, s.edge_count), (1447, 2891));
    }

    #[test]
    fn roles_and_ids() {
        let g = build_witness(&derive_membership(2, 0, 1).unwrap()).unwrap();
        let ids: Vec<&str> = g.vertices.iter().map(|v| v.id.as_str()).collect();
        assert_eq!(ids, ["x", "y", "yt", "p1", "p2", "pt1", "pt2"]);
        assert_eq!(g.vertices[5].role, Role::PTilde(1));
        let g = build_witness(&derive_membership(2, 0, 2).unwrap()).unwrap();
        assert!(g
            .vertices
            .iter()
            .any(|v| v.id == "p1-p2/yt" && v.role == Role::Internal));
    }

    #[test]
    fn oversize_is_refused() {
        let der = derive_membership(2, 3, 0).unwrap();
        assert!(matches!(
            build_witness(&der),
            Err(WitnessError::TooLarge { .. })
        ));
        assert!(witness_counts(&der).vertices > BigUint::from(MAX_WITNESS_VERTICES));
    }

    #[test]
    fn json_roundtrip_and_dot() {
        let g = build_witness(&derive_membership(2, 0, 1).unwrap()).unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back = WitnessGraph::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert!(g.isomorphic_by_id(&back));
        assert_eq!(back.target_sq, g.target_sq);
        let dot = g.to_dot();
        assert_eq!(dot.matches(" -- ").count(), 12);
        assert!(dot.contains("style=dashed"));
    }

    #[test]
    fn structure_violations() {
        let mut g = build_witness(&derive_membership(2, 0, 1).unwrap()).unwrap();
        g.unit_edges.push(g.unit_edges[0]);
        assert!(g.check_structure().is_err());
        g.unit_edges.pop();
        g.unit_edges.push((3, 3));
        assert!(g.check_structure().is_err());
    }

    #[test]
    fn lemma3_builds_like_its_lemma1_instance() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let s3 = b.lemma2(2, 1, one).unwrap();
        let via3 = b.lemma3(one, s3).unwrap();
        let via1 = b.lemma1(2, one, s3, one).unwrap();
        let arena = b.finish(via3, 2).unwrap();
        let g3 = build_witness(&arena).unwrap();
        let g1 = build_witness(&arena.rerooted(via1)).unwrap();
        assert!(g3.isomorphic_by_id(&g1));
        assert_eq!(g3.vertices.len(), 47);
    }
}
