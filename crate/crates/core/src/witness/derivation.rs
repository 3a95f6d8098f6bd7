//! Derivation trees certifying that a squared distance has a finite
//! unit-distance witness.
//!
//! Nodes live in an arena and are hash-consed by the builder, so the shared
//! sub-derivations that the recursive constructions keep reusing (the current
//! `d` inside every kite step, the powers of `rho(n)` inside every star step)
//! are stored once. Children always have smaller ids than their parents.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::rational::{cmp_scaled, format_rational, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationError {
    #[error("{rule}: precondition violated: {detail}")]
    Precondition { rule: &'static str, detail: String },
    #[error("dimension mismatch: node built for n={node} used in n={host}")]
    Dimension { node: usize, host: usize },
    #[error("dimension must be at least {min}, got {got}")]
    DimensionTooSmall { min: usize, got: usize },
    #[error("imported {rule} node claims {field}={claimed}, recomputed {actual}")]
    ClaimMismatch {
        rule: &'static str,
        field: &'static str,
        claimed: String,
        actual: String,
    },
}

/// One rule application. Claimed parameters are stored alongside the child
/// ids so that validation can compare them with what the children certify.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Unit distance; the witness is the pair itself.
    Base,
    /// Bipyramid over a regular simplex of side `d` with apex distance `e`,
    /// closed off by a second apex at `eps` from `y`.
    Lemma1 {
        n: usize,
        d2: Rational,
        e2: Rational,
        eps2: Rational,
        d: NodeId,
        e: NodeId,
        eps: NodeId,
    },
    /// `m`-fold scaling by `sqrt(2 + 2/n)`. `prev` is the `(m-1)`-fold node
    /// (or `base` when `m = 1`).
    Lemma2 {
        n: usize,
        m: usize,
        base: NodeId,
        prev: NodeId,
    },
    /// Planar `sqrt(4 b^2 - a^2)` from `a` and `b`.
    Lemma3 {
        a2: Rational,
        b2: Rational,
        a: NodeId,
        b: NodeId,
    },
    /// Planar contraction by `sqrt(11)/5`, with its three derived ingredients.
    Lemma5 {
        d2: Rational,
        d: NodeId,
        sqrt3: NodeId,
        sqrt11: NodeId,
        five: NodeId,
    },
    /// Contraction by `2/n` for `n >= 3`, using `eps = rho(n)^m`.
    Star {
        n: usize,
        m: usize,
        e2: Rational,
        e: NodeId,
        d: NodeId,
        eps: NodeId,
    },
}

impl Step {
    pub fn rule(&self) -> &'static str {
        match self {
            Step::Base => "base",
            Step::Lemma1 { .. } => "lemma1",
            Step::Lemma2 { .. } => "lemma2",
            Step::Lemma3 { .. } => "lemma3",
            Step::Lemma5 { .. } => "lemma5",
            Step::Star { .. } => "star",
        }
    }

    pub fn children(&self) -> Vec<NodeId> {
        match *self {
            Step::Base => vec![],
            Step::Lemma1 { d, e, eps, .. } => vec![d, e, eps],
            Step::Lemma2 { base, prev, .. } => vec![base, prev],
            Step::Lemma3 { a, b, .. } => vec![a, b],
            Step::Lemma5 {
                d,
                sqrt3,
                sqrt11,
                five,
                ..
            } => vec![d, sqrt3, sqrt11, five],
            Step::Star { e, d, eps, .. } => vec![e, d, eps],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub step: Step,
    pub target_sq: Rational,
    pub depth: usize,
    /// Dimension the node was built for; `None` only for `Base`.
    pub dim: Option<usize>,
}

/// A rooted derivation DAG for ambient dimension `dim`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: NodeId,
    pub(crate) dim: usize,
}

impl Derivation {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn target_sq(&self) -> &Rational {
        &self.node(self.root).target_sq
    }

    pub fn depth(&self) -> usize {
        self.node(self.root).depth
    }

    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Ids reachable from the root, children before parents.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.0], true) {
                continue;
            }
            stack.extend(self.node(id).step.children());
        }
        (0..self.nodes.len())
            .filter(|&i| seen[i])
            .map(NodeId)
            .collect()
    }

    /// The same arena viewed from another root.
    pub fn rerooted(&self, root: NodeId) -> Derivation {
        Derivation {
            nodes: self.nodes.clone(),
            root,
            dim: self.dim,
        }
    }
}

/// `q^m` for reduced `q`; the powers of coprime parts stay coprime.
pub(crate) fn rational_pow(q: &Rational, m: usize) -> Rational {
    let m = u32::try_from(m).expect("exponent fits in u32");
    Rational::new_raw(q.numer().pow(m), q.denom().pow(m))
}

/// `2 + 2/n`, the square of the scaling factor.
pub fn lemma2_factor(n: usize) -> Rational {
    int(2) + Rational::new(BigInt::from(2), BigInt::from(n))
}

/// `rho(n)^2 = (4/n^2) (2 + 2/n)^k(n)`.
pub fn rho_sq(n: usize) -> Rational {
    Rational::new(BigInt::from(4), BigInt::from(n * n))
        * num_traits::pow(lemma2_factor(n), k_of_n(n))
}

/// Least `m` with `(2/n) sqrt(2 + 2/n)^m >= 1/2`, compared on squares.
/// Panics for `n < 3`, where the scaled value already starts at or above 1.
pub fn k_of_n(n: usize) -> usize {
    assert!(n >= 3, "k(n) is defined for n >= 3");
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    let mut v = Rational::new(BigInt::from(4), BigInt::from(n * n));
    let factor = lemma2_factor(n);
    let mut m = 0;
    while v < quarter {
        v *= &factor;
        m += 1;
    }
    assert!(v < Rational::one(), "k({n}) overshoots 1");
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Base,
    Lemma1(usize, NodeId, NodeId, NodeId),
    Lemma2(usize, usize, NodeId),
    Lemma3(NodeId, NodeId),
    Lemma5(NodeId),
    Star(usize, NodeId),
    RhoPower(usize, usize),
}

/// Builds derivations node by node, checking every precondition exactly.
#[derive(Debug, Default, Clone)]
pub struct DerivationBuilder {
    nodes: Vec<Node>,
    cache: HashMap<Key, NodeId>,
}

fn precondition(rule: &'static str, detail: String) -> DerivationError {
    DerivationError::Precondition { rule, detail }
}

impl DerivationBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn target_sq(&self, id: NodeId) -> &Rational {
        &self.nodes[id.0].target_sq
    }

    pub fn finish(self, root: NodeId, dim: usize) -> Result<Derivation, DerivationError> {
        if let Some(n) = self.nodes[root.0].dim {
            if n != dim {
                return Err(DerivationError::Dimension { node: n, host: dim });
            }
        }
        Ok(Derivation {
            nodes: self.nodes,
            root,
            dim,
        })
    }

    fn push(
        &mut self,
        key: Option<Key>,
        step: Step,
        target_sq: Rational,
        dim: Option<usize>,
    ) -> NodeId {
        let depth = match &step {
            Step::Base => 1,
            // m stacked bipyramids over `base`
            Step::Lemma2 { prev, .. } => 1 + self.nodes[prev.0].depth,
            s => {
                1 + s
                    .children()
                    .iter()
                    .map(|c| self.nodes[c.0].depth)
                    .max()
                    .unwrap_or(0)
            }
        };
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            step,
            target_sq,
            depth,
            dim,
        });
        if let Some(k) = key {
            self.cache.insert(k, id);
        }
        id
    }

    fn dim_of(&self, host: usize, children: &[NodeId]) -> Result<(), DerivationError> {
        for c in children {
            if let Some(n) = self.nodes[c.0].dim {
                if n != host {
                    return Err(DerivationError::Dimension { node: n, host });
                }
            }
        }
        Ok(())
    }

    pub fn base(&mut self) -> NodeId {
        if let Some(&id) = self.cache.get(&Key::Base) {
            return id;
        }
        self.push(Some(Key::Base), Step::Base, Rational::one(), None)
    }

    /// Bipyramid rule. Requires `2 n e^2 > (n-1) d^2` and `eps <= 2 r`.
    pub fn lemma1(
        &mut self,
        n: usize,
        d: NodeId,
        e: NodeId,
        eps: NodeId,
    ) -> Result<NodeId, DerivationError> {
        if n < 2 {
            return Err(DerivationError::DimensionTooSmall { min: 2, got: n });
        }
        self.dim_of(n, &[d, e, eps])?;
        let key = Key::Lemma1(n, d, e, eps);
        if let Some(&id) = self.cache.get(&key) {
            return Ok(id);
        }
        let (d2, e2, eps2) = (
            self.target_sq(d).clone(),
            self.target_sq(e).clone(),
            self.target_sq(eps).clone(),
        );
        let r2 =
            bipyramid_preconditions(n, &d2, &e2, &eps2).map_err(|s| precondition("lemma1", s))?;
        Ok(self.push(
            Some(key),
            Step::Lemma1 {
                n,
                d2,
                e2,
                eps2,
                d,
                e,
                eps,
            },
            r2,
            Some(n),
        ))
    }

    /// A bipyramid node whose claimed parameters are taken as given. Only for
    /// exercising the validator on broken input.
    #[allow(clippy::too_many_arguments)]
    pub fn lemma1_unchecked(
        &mut self,
        n: usize,
        d2: Rational,
        e2: Rational,
        eps2: Rational,
        target_sq: Rational,
        d: NodeId,
        e: NodeId,
        eps: NodeId,
    ) -> NodeId {
        self.push(
            None,
            Step::Lemma1 {
                n,
                d2,
                e2,
                eps2,
                d,
                e,
                eps,
            },
            target_sq,
            Some(n),
        )
    }

    /// Scales `base` by `sqrt(2 + 2/n)^m`; `m = 0` returns `base` itself.
    pub fn lemma2(&mut self, n: usize, m: usize, base: NodeId) -> Result<NodeId, DerivationError> {
        if n < 2 {
            return Err(DerivationError::DimensionTooSmall { min: 2, got: n });
        }
        self.dim_of(n, &[base])?;
        let mut prev = base;
        for j in 1..=m {
            let key = Key::Lemma2(n, j, base);
            if let Some(&id) = self.cache.get(&key) {
                prev = id;
                continue;
            }
            let p2 = self.target_sq(prev).clone();
            // e = eps = d: the bipyramid preconditions always hold
            let r2 =
                bipyramid_preconditions(n, &p2, &p2, &p2).map_err(|s| precondition("lemma2", s))?;
            prev = self.push(
                Some(key),
                Step::Lemma2 {
                    n,
                    m: j,
                    base,
                    prev,
                },
                r2,
                Some(n),
            );
        }
        Ok(prev)
    }

    /// Planar rule: `sqrt(4 b^2 - a^2)` given `a <= 4 b / sqrt(5)`.
    pub fn lemma3(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, DerivationError> {
        self.dim_of(2, &[a, b])?;
        let key = Key::Lemma3(a, b);
        if let Some(&id) = self.cache.get(&key) {
            return Ok(id);
        }
        let (a2, b2) = (self.target_sq(a).clone(), self.target_sq(b).clone());
        if cmp_scaled(5, &a2, 16, &b2) == Ordering::Greater {
            return Err(precondition(
                "lemma3",
                format!(
                    "a^2={} exceeds (16/5) b^2 with b^2={}",
                    format_rational(&a2),
                    format_rational(&b2)
                ),
            ));
        }
        let r2 =
            bipyramid_preconditions(2, &a2, &b2, &a2).map_err(|s| precondition("lemma3", s))?;
        Ok(self.push(Some(key), Step::Lemma3 { a2, b2, a, b }, r2, Some(2)))
    }

    pub fn lemma3_unchecked(
        &mut self,
        a2: Rational,
        b2: Rational,
        target_sq: Rational,
        a: NodeId,
        b: NodeId,
    ) -> NodeId {
        self.push(None, Step::Lemma3 { a2, b2, a, b }, target_sq, Some(2))
    }

    /// Planar contraction of `d` by `sqrt(11)/5`. The ingredients follow the
    /// recipe `sqrt(3) d` by one scaling step, `sqrt(11) d` from
    /// `(a, b) = (d, sqrt(3) d)` and `5 d` from `(a, b) = (sqrt(11) d, 3 d)`.
    pub fn lemma5(&mut self, d: NodeId) -> Result<NodeId, DerivationError> {
        self.dim_of(2, &[d])?;
        let key = Key::Lemma5(d);
        if let Some(&id) = self.cache.get(&key) {
            return Ok(id);
        }
        let sqrt3 = self.lemma2(2, 1, d)?;
        let three = self.lemma2(2, 2, d)?;
        let sqrt11 = self.lemma3(d, sqrt3)?;
        let five = self.lemma3(sqrt11, three)?;
        let d2 = self.target_sq(d).clone();
        let target = Rational::new(BigInt::from(11), BigInt::from(25)) * &d2;
        Ok(self.push(
            Some(key),
            Step::Lemma5 {
                d2,
                d,
                sqrt3,
                sqrt11,
                five,
            },
            target,
            Some(2),
        ))
    }

    /// `rho(n)^m` as a chain of bipyramids, each with
    /// `e = sqrt(2+2/n)^k(n) eps` and `d = sqrt(2+2/n) e`.
    pub fn rho_power(&mut self, n: usize, m: usize) -> Result<NodeId, DerivationError> {
        if n < 3 {
            return Err(DerivationError::DimensionTooSmall { min: 3, got: n });
        }
        let k = k_of_n(n);
        let mut cur = self.base();
        for j in 1..=m {
            if let Some(&id) = self.cache.get(&Key::RhoPower(n, j)) {
                cur = id;
                continue;
            }
            let e = self.lemma2(n, k, cur)?;
            let d = self.lemma2(n, k + 1, cur)?;
            let next = self.lemma1(n, d, e, cur)?;
            self.cache.insert(Key::RhoPower(n, j), next);
            cur = next;
        }
        Ok(cur)
    }

    /// Least `m` with `rho(n)^(2m) <= (16/n^2) e^2`. A log estimate is
    /// corrected by exact comparisons on either side.
    pub fn star_exponent(n: usize, e2: &Rational) -> usize {
        let bound = Rational::new(BigInt::from(16), BigInt::from(n * n)) * e2;
        if bound >= Rational::one() {
            return 0;
        }
        let rho2 = rho_sq(n);
        let fits = |m: usize| rational_pow(&rho2, m) <= bound;
        let est = (crate::density::ln_rational(&bound) / crate::density::ln_rational(&rho2)).ceil();
        let mut m = if est.is_finite() && est > 0.0 {
            est as usize
        } else {
            1
        };
        while !fits(m) {
            m += 1;
        }
        while m > 0 && fits(m - 1) {
            m -= 1;
        }
        m
    }

    /// Contraction of `e` by `2/n` for `n >= 3`.
    pub fn star(&mut self, n: usize, e: NodeId) -> Result<NodeId, DerivationError> {
        if n < 3 {
            return Err(DerivationError::DimensionTooSmall { min: 3, got: n });
        }
        self.dim_of(n, &[e])?;
        let key = Key::Star(n, e);
        if let Some(&id) = self.cache.get(&key) {
            return Ok(id);
        }
        let e2 = self.target_sq(e).clone();
        let m = Self::star_exponent(n, &e2);
        let eps = self.rho_power(n, m)?;
        let d = self.lemma2(n, 1, e)?;
        let (d2, eps2) = (self.target_sq(d).clone(), self.target_sq(eps).clone());
        let r2 =
            bipyramid_preconditions(n, &d2, &e2, &eps2).map_err(|s| precondition("star", s))?;
        Ok(self.push(
            Some(key),
            Step::Star {
                n,
                m,
                e2,
                e,
                d,
                eps,
            },
            r2,
            Some(n),
        ))
    }
}

/// Checks `2 n e^2 > (n-1) d^2`, `eps > 0` and `eps^2 <= 4 r^2`; returns `r^2`.
pub(crate) fn bipyramid_preconditions(
    n: usize,
    d2: &Rational,
    e2: &Rational,
    eps2: &Rational,
) -> Result<Rational, String> {
    if cmp_scaled(2 * n as i64, e2, n as i64 - 1, d2) != Ordering::Greater {
        return Err(format!(
            "2ne^2 > (n-1)d^2 fails for n={n} d^2={} e^2={}",
            format_rational(d2),
            format_rational(e2)
        ));
    }
    if !eps2.is_positive() {
        return Err(format!("eps^2={} must be positive", format_rational(eps2)));
    }
    let r2 = crate::cayley_menger::lemma1_root(n, d2, e2);
    if cmp_scaled(1, eps2, 4, &r2) == Ordering::Greater {
        return Err(format!(
            "eps <= 2r fails: eps^2={} > 4 r^2={}",
            format_rational(eps2),
            format_rational(&(int(4) * &r2))
        ));
    }
    Ok(r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn k_and_rho() {
        assert_eq!(k_of_n(3), 0);
        assert_eq!(k_of_n(4), 0);
        assert_eq!(k_of_n(5), 1);
        assert_eq!(k_of_n(100), 10);
        assert_eq!(rho_sq(3), rat(4, 9));
        assert_eq!(rho_sq(4), rat(1, 4));
        assert_eq!(rho_sq(5), rat(48, 125));
    }

    #[test]
    fn lemma2_chain_is_shared() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let three = b.lemma2(2, 2, one).unwrap();
        let sqrt3 = b.lemma2(2, 1, one).unwrap();
        assert_eq!(b.target_sq(three), &int(9));
        assert_eq!(b.target_sq(sqrt3), &int(3));
        match &b.node(three).step {
            Step::Lemma2 { prev, m: 2, .. } => assert_eq!(*prev, sqrt3),
            s => panic!("unexpected {s:?}"),
        }
        assert_eq!(b.node(three).depth, 3);
        assert_eq!(b.lemma2(2, 0, one).unwrap(), one);
    }

    #[test]
    fn lemma3_precondition() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let sqrt3 = b.lemma2(2, 1, one).unwrap();
        let r = b.lemma3(one, sqrt3).unwrap();
        assert_eq!(b.target_sq(r), &int(11));
        // a = 3, b = 1: 5*9 > 16
        let three = b.lemma2(2, 2, one).unwrap();
        assert!(b.lemma3(sqrt3, one).is_ok());
        assert!(matches!(
            b.lemma3(three, one),
            Err(DerivationError::Precondition { rule: "lemma3", .. })
        ));
    }

    #[test]
    fn lemma5_contracts() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let l5 = b.lemma5(one).unwrap();
        assert_eq!(b.target_sq(l5), &rat(11, 25));
        if let Step::Lemma5 {
            sqrt3,
            sqrt11,
            five,
            ..
        } = b.node(l5).step
        {
            assert_eq!(b.target_sq(sqrt3), &int(3));
            assert_eq!(b.target_sq(sqrt11), &int(11));
            assert_eq!(b.target_sq(five), &int(25));
        } else {
            unreachable!()
        }
        // d(base)=1, sqrt3=2, three=3, sqrt11=3, five=4
        assert_eq!(b.node(l5).depth, 5);
    }

    #[test]
    fn star_over_base() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let s = b.star(3, one).unwrap();
        assert_eq!(b.target_sq(s), &rat(4, 9));
        assert!(matches!(b.node(s).step, Step::Star { m: 0, .. }));
        assert_eq!(DerivationBuilder::star_exponent(3, &rat(1, 100)), 5);
    }

    #[test]
    fn rho_power_targets() {
        for n in [3, 5, 7] {
            let mut b = DerivationBuilder::new();
            let r3 = b.rho_power(n, 3).unwrap();
            assert_eq!(b.target_sq(r3), &num_traits::pow(rho_sq(n), 3));
        }
    }

    #[test]
    fn dimension_mixing_rejected() {
        let mut b = DerivationBuilder::new();
        let one = b.base();
        let s3 = b.lemma2(3, 1, one).unwrap();
        assert!(matches!(
            b.lemma2(2, 1, s3),
            Err(DerivationError::Dimension { .. })
        ));
        assert!(b.lemma5(s3).is_err());
        assert!(matches!(
            b.lemma1(1, one, one, one),
            Err(DerivationError::DimensionTooSmall { .. })
        ));
    }
}
