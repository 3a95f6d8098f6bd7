use num_bigint::BigInt;

use crate::rational::Rational;

use super::derivation::{lemma2_factor, Derivation, DerivationBuilder, DerivationError};

/// Certifies that `(11/25)^k 3^l` (for `n = 2`) or `(2+2/n)^k (4/n^2)^l`
/// (for `n >= 3`) is the square of a distance with a finite witness.
///
/// In the plane all `l` scaling steps come first, then `k` contractions by
/// `sqrt(11)/5`. In higher dimensions the `l` contractions by `2/n` come
/// first, followed by one `k`-fold scaling.
pub fn derive_membership(n: usize, k: usize, l: usize) -> Result<Derivation, DerivationError> {
    if n < 2 {
        return Err(DerivationError::DimensionTooSmall { min: 2, got: n });
    }
    let mut b = DerivationBuilder::new();
    let mut cur = b.base();
    if n == 2 {
        cur = b.lemma2(2, l, cur)?;
        for _ in 0..k {
            cur = b.lemma5(cur)?;
        }
    } else {
        for _ in 0..l {
            cur = b.star(n, cur)?;
        }
        cur = b.lemma2(n, k, cur)?;
    }
    b.finish(cur, n)
}

/// The squared distance `derive_membership(n, k, l)` certifies, computed directly.
pub fn family_target_sq(n: usize, k: usize, l: usize) -> Rational {
    if n == 2 {
        num_traits::pow(Rational::new(BigInt::from(11), BigInt::from(25)), k)
            * num_traits::pow(Rational::from_integer(BigInt::from(3)), l)
    } else {
        num_traits::pow(lemma2_factor(n), k)
            * num_traits::pow(Rational::new(BigInt::from(4), BigInt::from(n * n)), l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::witness::derivation::Step;
    use crate::witness::validate::{all_pass, validate_derivation};

    #[test]
    fn examples() {
        let d = derive_membership(2, 0, 0).unwrap();
        assert!(matches!(d.node(d.root()).step, Step::Base));
        assert_eq!(d.target_sq(), &int(1));

        let d = derive_membership(2, 0, 1).unwrap();
        assert!(matches!(d.node(d.root()).step, Step::Lemma2 { m: 1, .. }));
        assert_eq!(d.target_sq(), &int(3));

        let d = derive_membership(3, 0, 1).unwrap();
        assert!(matches!(d.node(d.root()).step, Step::Star { .. }));
        assert_eq!(d.target_sq(), &rat(4, 9));
    }

    #[test]
    fn targets_follow_the_families() {
        for n in 2..7 {
            for k in 0..4 {
                for l in 0..4 {
                    let d = derive_membership(n, k, l).unwrap();
                    assert_eq!(
                        d.target_sq(),
                        &family_target_sq(n, k, l),
                        "n={n} k={k} l={l}"
                    );
                    assert!(all_pass(&validate_derivation(&d)), "n={n} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(derive_membership(1, 0, 0).is_err());
    }

    #[test]
    fn long_chains_stay_linear() {
        let d = derive_membership(2, 300, 5).unwrap();
        assert!(d.arena_len() < 300 * 8);
        let d = derive_membership(7, 5, 40).unwrap();
        assert_eq!(d.target_sq(), &family_target_sq(7, 5, 40));
    }
}
