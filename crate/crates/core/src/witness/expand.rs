//! Local point configurations behind each derivation rule.
//!
//! Every non-base rule expands to one of two shapes: the bipyramid (which
//! every rule but the kite reduces to) or the planar seven-point kite. A shape lists its labelled points, with `x` and `y` always first,
//! and the pairs that must be joined by a sub-witness.

use std::fmt;
use std::str::FromStr;

use crate::cayley_menger::{lemma1_spec, lemma5_spec, SquaredDistanceSpec};
use crate::rational::Rational;

use super::derivation::{Derivation, NodeId, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    X,
    Y,
    YTilde,
    P(usize),
    PTilde(usize),
    Internal,
}

impl Role {
    /// Short label used inside vertex ids.
    pub fn label(self) -> String {
        match self {
            Role::X => "x".into(),
            Role::Y => "y".into(),
            Role::YTilde => "yt".into(),
            Role::P(i) => format!("p{i}"),
            Role::PTilde(i) => format!("pt{i}"),
            Role::Internal => "internal".into(),
        }
    }

    /// Human-facing label for drawings.
    pub fn display_label(self) -> String {
        match self {
            Role::X => "x".into(),
            Role::Y => "y".into(),
            Role::YTilde => "y~".into(),
            Role::P(i) => format!("p{i}"),
            Role::PTilde(i) => format!("p~{i}"),
            Role::Internal => String::new(),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::X => f.write_str("x"),
            Role::Y => f.write_str("y"),
            Role::YTilde => f.write_str("y_tilde"),
            Role::P(i) => write!(f, "p_{i}"),
            Role::PTilde(i) => write!(f, "p_tilde_{i}"),
            Role::Internal => f.write_str("internal"),
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let index = |rest: &str| rest.parse::<usize>().map_err(|_| format!("bad role {s:?}"));
        match s {
            "x" => Ok(Role::X),
            "y" => Ok(Role::Y),
            "y_tilde" => Ok(Role::YTilde),
            "internal" => Ok(Role::Internal),
            _ => {
                if let Some(rest) = s.strip_prefix("p_tilde_") {
                    Ok(Role::PTilde(index(rest)?))
                } else if let Some(rest) = s.strip_prefix("p_") {
                    Ok(Role::P(index(rest)?))
                } else {
                    Err(format!("bad role {s:?}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Unit,
    Bipyramid {
        n: usize,
        d: NodeId,
        e: NodeId,
        eps: NodeId,
    },
    Kite {
        d: NodeId,
        sqrt3: NodeId,
        sqrt11: NodeId,
        five: NodeId,
    },
}

pub fn shape(der: &Derivation, id: NodeId) -> Shape {
    match der.node(id).step {
        Step::Base => Shape::Unit,
        Step::Lemma1 { n, d, e, eps, .. } => Shape::Bipyramid { n, d, e, eps },
        Step::Lemma2 { n, prev, .. } => Shape::Bipyramid {
            n,
            d: prev,
            e: prev,
            eps: prev,
        },
        // eps := a
        Step::Lemma3 { a, b, .. } => Shape::Bipyramid {
            n: 2,
            d: a,
            e: b,
            eps: a,
        },
        Step::Star { n, d, e, eps, .. } => Shape::Bipyramid { n, d, e, eps },
        Step::Lemma5 {
            d,
            sqrt3,
            sqrt11,
            five,
            ..
        } => Shape::Kite {
            d,
            sqrt3,
            sqrt11,
            five,
        },
    }
}

/// A pair of local points joined by a copy of the witness for `via`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pair {
    pub u: usize,
    pub v: usize,
    pub via: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalConfig {
    pub roles: Vec<Role>,
    pub pairs: Vec<Pair>,
}

pub const X: usize = 0;
pub const Y: usize = 1;
pub const YT: usize = 2;

impl LocalConfig {
    pub fn labels(&self) -> Vec<String> {
        self.roles.iter().map(|r| r.label()).collect()
    }
}

/// Local configuration of a node, or `None` for the unit base case.
pub fn local_config(der: &Derivation, id: NodeId) -> Option<LocalConfig> {
    match shape(der, id) {
        Shape::Unit => None,
        Shape::Bipyramid { n, d, e, eps } => {
            let p = |i: usize| 3 + i;
            let pt = |i: usize| 3 + n + i;
            let mut roles = vec![Role::X, Role::Y, Role::YTilde];
            roles.extend((1..=n).map(Role::P));
            roles.extend((1..=n).map(Role::PTilde));
            let mut pairs = vec![Pair {
                u: Y,
                v: YT,
                via: eps,
            }];
            pairs.extend((0..n).map(|i| Pair {
                u: X,
                v: p(i),
                via: e,
            }));
            pairs.extend((0..n).map(|i| Pair {
                u: Y,
                v: p(i),
                via: e,
            }));
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push(Pair {
                        u: p(i),
                        v: p(j),
                        via: d,
                    });
                }
            }
            pairs.extend((0..n).map(|i| Pair {
                u: X,
                v: pt(i),
                via: e,
            }));
            pairs.extend((0..n).map(|i| Pair {
                u: YT,
                v: pt(i),
                via: e,
            }));
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push(Pair {
                        u: pt(i),
                        v: pt(j),
                        via: d,
                    });
                }
            }
            Some(LocalConfig { roles, pairs })
        }
        Shape::Kite {
            d,
            sqrt3,
            sqrt11,
            five,
        } => {
            let (p1, p2, pt1, pt2) = (3, 4, 5, 6);
            let roles = vec![
                Role::X,
                Role::Y,
                Role::YTilde,
                Role::P(1),
                Role::P(2),
                Role::PTilde(1),
                Role::PTilde(2),
            ];
            let pair = |u, v, via| Pair { u, v, via };
            let pairs = vec![
                pair(Y, YT, d),
                pair(X, p1, sqrt11),
                pair(X, p2, sqrt3),
                pair(Y, p1, sqrt11),
                pair(Y, p2, sqrt3),
                pair(p1, p2, five),
                pair(X, pt1, sqrt11),
                pair(X, pt2, sqrt3),
                pair(YT, pt1, sqrt11),
                pair(YT, pt2, sqrt3),
                pair(pt1, pt2, five),
            ];
            Some(LocalConfig { roles, pairs })
        }
    }
}

/// Point sets of a local configuration whose pairwise squared distances are
/// all certified: `{x, p_1.., y}` and `{x, p~_1.., y~}`. Each has exactly
/// `n + 2` points, so its determinant must vanish.
pub fn certified_cliques(der: &Derivation, id: NodeId) -> Vec<(Vec<usize>, SquaredDistanceSpec)> {
    let target = &der.node(id).target_sq;
    let sq = |nid: NodeId| -> &Rational { &der.node(nid).target_sq };
    match shape(der, id) {
        Shape::Unit => vec![],
        Shape::Bipyramid { n, d, e, .. } => {
            let spec = lemma1_spec(n, sq(d), sq(e), target);
            let first: Vec<usize> = std::iter::once(X).chain(3..3 + n).chain([Y]).collect();
            let second: Vec<usize> = std::iter::once(X)
                .chain(3 + n..3 + 2 * n)
                .chain([YT])
                .collect();
            vec![(first, spec.clone()), (second, spec)]
        }
        Shape::Kite { d, .. } => {
            let spec = lemma5_spec(sq(d), target);
            vec![(vec![X, 3, 4, Y], spec.clone()), (vec![X, 5, 6, YT], spec)]
        }
    }
}

/// Every squared distance between local points that the construction fixes:
/// the sub-witness pairs plus `x-y` and `x-y~`.
pub fn certified_bars(der: &Derivation, id: NodeId) -> Vec<(usize, usize, Rational)> {
    let Some(cfg) = local_config(der, id) else {
        return vec![(X, Y, der.node(id).target_sq.clone())];
    };
    let target = der.node(id).target_sq.clone();
    let mut bars: Vec<(usize, usize, Rational)> = cfg
        .pairs
        .iter()
        .map(|p| (p.u, p.v, der.node(p.via).target_sq.clone()))
        .collect();
    bars.push((X, Y, target.clone()));
    bars.push((X, YT, target));
    bars
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::derivation::DerivationBuilder;

    #[test]
    fn role_strings_roundtrip() {
        for r in [
            Role::X,
            Role::Y,
            Role::YTilde,
            Role::P(3),
            Role::PTilde(12),
            Role::Internal,
        ] {
            assert_eq!(r.to_string().parse::<Role>().unwrap(), r);
        }
        assert!("q_1".parse::<Role>().is_err());
    }

    #[test]
    fn bipyramid_pair_count() {
        for n in 2..7 {
            let mut b = DerivationBuilder::new();
            let one = b.base();
            let r = b.lemma2(n, 1, one).unwrap();
            let der = b.finish(r, n).unwrap();
            let cfg = local_config(&der, r).unwrap();
            assert_eq!(cfg.roles.len(), 2 * n + 3);
            assert_eq!(cfg.pairs.len(), 4 * n + n * (n - 1) + 1);
        }
    }

    #[test]
    fn kite_has_eleven_pairs() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let r = b.lemma5(one).unwrap();
        let der = b.finish(r, 2).unwrap();
        let cfg = local_config(&der, r).unwrap();
        assert_eq!(cfg.roles.len(), 7);
        assert_eq!(cfg.pairs.len(), 11);
        for (_, spec) in certified_cliques(&der, r) {
            assert_eq!(
                crate::cayley_menger::cm_determinant(&spec),
                Rational::from_integer(0.into())
            );
        }
    }
}
