//! JSON form of a derivation.
//!
//! The tree is written recursively, but only the inputs a rule consumes are
//! spelled out: a kite node carries its `d`, a scaling node its `base`, a
//! star node its `e`. Their other ingredients are rebuilt on import by the same
//! builder that produced them, which keeps the document linear in the number
//! of rule applications.

use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, Rational, RationalStr};

use super::derivation::{Derivation, DerivationBuilder, DerivationError, NodeId, Step};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum DerivationWire {
    Base {
        target_sq: RationalStr,
    },
    Lemma1 {
        n: usize,
        d2: RationalStr,
        e2: RationalStr,
        eps2: RationalStr,
        target_sq: RationalStr,
        d: Box<DerivationWire>,
        e: Box<DerivationWire>,
        eps: Box<DerivationWire>,
    },
    Lemma2 {
        n: usize,
        m: usize,
        target_sq: RationalStr,
        base: Box<DerivationWire>,
    },
    Lemma3 {
        a2: RationalStr,
        b2: RationalStr,
        target_sq: RationalStr,
        a: Box<DerivationWire>,
        b: Box<DerivationWire>,
    },
    Lemma5 {
        d2: RationalStr,
        target_sq: RationalStr,
        d: Box<DerivationWire>,
    },
    Star {
        n: usize,
        m: usize,
        e2: RationalStr,
        target_sq: RationalStr,
        e: Box<DerivationWire>,
    },
}

fn q(r: &Rational) -> RationalStr {
    RationalStr(r.clone())
}

impl DerivationWire {
    pub fn from_derivation(der: &Derivation) -> Self {
        Self::from_node(der, der.root())
    }

    fn from_node(der: &Derivation, id: NodeId) -> Self {
        let node = der.node(id);
        let target_sq = q(&node.target_sq);
        let sub = |c: NodeId| Box::new(Self::from_node(der, c));
        match &node.step {
            Step::Base => DerivationWire::Base { target_sq },
            Step::Lemma1 {
                n,
                d2,
                e2,
                eps2,
                d,
                e,
                eps,
            } => DerivationWire::Lemma1 {
                n: *n,
                d2: q(d2),
                e2: q(e2),
                eps2: q(eps2),
                target_sq,
                d: sub(*d),
                e: sub(*e),
                eps: sub(*eps),
            },
            Step::Lemma2 { n, m, base, .. } => DerivationWire::Lemma2 {
                n: *n,
                m: *m,
                target_sq,
                base: sub(*base),
            },
            Step::Lemma3 { a2, b2, a, b } => DerivationWire::Lemma3 {
                a2: q(a2),
                b2: q(b2),
                target_sq,
                a: sub(*a),
                b: sub(*b),
            },
            Step::Lemma5 { d2, d, .. } => DerivationWire::Lemma5 {
                d2: q(d2),
                target_sq,
                d: sub(*d),
            },
            Step::Star { n, m, e2, e, .. } => DerivationWire::Star {
                n: *n,
                m: *m,
                e2: q(e2),
                target_sq,
                e: sub(*e),
            },
        }
    }

    /// Rebuilds the derivation through the checked builder and confirms that
    /// every claimed value matches what the builder recomputes.
    pub fn to_derivation(&self, dim: usize) -> Result<Derivation, DerivationError> {
        let mut b = DerivationBuilder::new();
        let root = self.build(&mut b)?;
        b.finish(root, dim)
    }

    fn build(&self, b: &mut DerivationBuilder) -> Result<NodeId, DerivationError> {
        let (rule, id) = match self {
            DerivationWire::Base { .. } => ("base", b.base()),
            DerivationWire::Lemma1 {
                n,
                d2,
                e2,
                eps2,
                d,
                e,
                eps,
                ..
            } => {
                let (d, e, eps) = (d.build(b)?, e.build(b)?, eps.build(b)?);
                claim("lemma1", "d2", d2, b.target_sq(d))?;
                claim("lemma1", "e2", e2, b.target_sq(e))?;
                claim("lemma1", "eps2", eps2, b.target_sq(eps))?;
                ("lemma1", b.lemma1(*n, d, e, eps)?)
            }
            DerivationWire::Lemma2 { n, m, base, .. } => {
                let base = base.build(b)?;
                if *m == 0 {
                    return Err(DerivationError::Precondition {
                        rule: "lemma2",
                        detail: "m must be at least 1".into(),
                    });
                }
                ("lemma2", b.lemma2(*n, *m, base)?)
            }
            DerivationWire::Lemma3 {
                a2, b2, a, b: bw, ..
            } => {
                let (a, bn) = (a.build(b)?, bw.build(b)?);
                claim("lemma3", "a2", a2, b.target_sq(a))?;
                claim("lemma3", "b2", b2, b.target_sq(bn))?;
                ("lemma3", b.lemma3(a, bn)?)
            }
            DerivationWire::Lemma5 { d2, d, .. } => {
                let d = d.build(b)?;
                claim("lemma5", "d2", d2, b.target_sq(d))?;
                ("lemma5", b.lemma5(d)?)
            }
            DerivationWire::Star { n, m, e2, e, .. } => {
                let e = e.build(b)?;
                claim("star", "e2", e2, b.target_sq(e))?;
                let id = b.star(*n, e)?;
                if let Step::Star { m: actual, .. } = b.node(id).step {
                    if actual != *m {
                        return Err(DerivationError::ClaimMismatch {
                            rule: "star",
                            field: "m",
                            claimed: m.to_string(),
                            actual: actual.to_string(),
                        });
                    }
                }
                ("star", id)
            }
        };
        claim(rule, "target_sq", self.target_sq(), b.target_sq(id))?;
        Ok(id)
    }

    pub fn target_sq(&self) -> &RationalStr {
        match self {
            DerivationWire::Base { target_sq }
            | DerivationWire::Lemma1 { target_sq, .. }
            | DerivationWire::Lemma2 { target_sq, .. }
            | DerivationWire::Lemma3 { target_sq, .. }
            | DerivationWire::Lemma5 { target_sq, .. }
            | DerivationWire::Star { target_sq, .. } => target_sq,
        }
    }
}

fn claim(
    rule: &'static str,
    field: &'static str,
    claimed: &RationalStr,
    actual: &Rational,
) -> Result<(), DerivationError> {
    if &claimed.0 == actual {
        Ok(())
    } else {
        Err(DerivationError::ClaimMismatch {
            rule,
            field,
            claimed: format_rational(&claimed.0),
            actual: format_rational(actual),
        })
    }
}
