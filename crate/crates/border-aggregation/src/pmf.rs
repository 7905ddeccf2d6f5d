//! Exact probability mass functions over the integers, with
//! arbitrary-precision rational masses. Used by the tree recursion and the
//! small-case star oracle, where floating point would silently lose the
//! golden values.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Finite pmf: ascending integer support, positive rational masses summing
/// exactly to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pmf {
    mass: BTreeMap<i64, BigRational>,
}

impl Pmf {
    /// Point mass at `k`.
    pub fn delta(k: i64) -> Self {
        let mut mass = BTreeMap::new();
        mass.insert(k, BigRational::one());
        Pmf { mass }
    }

    /// Builds from `(value, mass)` pairs; masses for repeated values are
    /// summed, zero masses dropped. Fails unless the total is exactly one.
    pub fn from_parts<I: IntoIterator<Item = (i64, BigRational)>>(parts: I) -> Result<Self> {
        let mut mass: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (k, m) in parts {
            if m < BigRational::zero() {
                return Err(Error::config(format!("negative mass at {k}")));
            }
            if !m.is_zero() {
                *mass.entry(k).or_insert_with(BigRational::zero) += m;
            }
        }
        let total: BigRational = mass.values().cloned().sum();
        if !total.is_one() {
            return Err(Error::config(format!("masses sum to {total}, not 1")));
        }
        Ok(Pmf { mass })
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.mass.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigRational)> + '_ {
        self.mass.iter().map(|(&k, m)| (k, m))
    }

    pub fn prob(&self, k: i64) -> BigRational {
        self.mass.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn min(&self) -> i64 {
        *self.mass.keys().next().expect("pmf is never empty")
    }

    pub fn max(&self) -> i64 {
        *self.mass.keys().next_back().expect("pmf is never empty")
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Exact mean as a rational.
    pub fn mean_exact(&self) -> BigRational {
        self.mass
            .iter()
            .map(|(&k, m)| m * BigRational::from(BigInt::from(k)))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.mean_exact().to_f64().expect("mean fits in f64")
    }

    /// Tail P(X > k), exact.
    pub fn tail_gt(&self, k: i64) -> BigRational {
        self.mass
            .range(k + 1..)
            .map(|(_, m)| m.clone())
            .sum()
    }

    /// Masses as f64 keyed by support, for distances against empirical data.
    pub fn to_f64_map(&self) -> BTreeMap<i64, f64> {
        self.mass
            .iter()
            .map(|(&k, m)| (k, m.to_f64().expect("mass fits in f64")))
            .collect()
    }

    /// Shifts the support by `offset` (used for xi = N*K - S + 1 style
    /// reindexing together with `negate`).
    pub fn shift(&self, offset: i64) -> Pmf {
        Pmf {
            mass: self.mass.iter().map(|(&k, m)| (k + offset, m.clone())).collect(),
        }
    }

    /// Reflects the support: X -> -X.
    pub fn negate(&self) -> Pmf {
        Pmf {
            mass: self.mass.iter().map(|(&k, m)| (-k, m.clone())).collect(),
        }
    }
}

/// Exact binomial coefficient C(n, k), zero for k < 0 or k > n.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n || n < 0 {
        return BigInt::zero();
    }
    let k = k.min(n - k) as u64;
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - i as i64;
        den *= i as i64 + 1;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn from_parts_checks_total() {
        assert!(Pmf::from_parts([(1, ratio(1, 2)), (2, ratio(1, 2))]).is_ok());
        assert!(Pmf::from_parts([(1, ratio(1, 2))]).is_err());
        assert!(Pmf::from_parts([(1, ratio(3, 2)), (2, ratio(-1, 2))]).is_err());
    }

    #[test]
    fn moments_and_tails() {
        let p = Pmf::from_parts([(3, ratio(1, 2)), (4, ratio(1, 2))]).unwrap();
        assert_eq!(p.mean_exact(), ratio(7, 2));
        assert_eq!(p.tail_gt(3), ratio(1, 2));
        assert_eq!(p.tail_gt(2), ratio(1, 1));
        assert_eq!(p.tail_gt(4), ratio(0, 1));
        assert_eq!(p.min(), 3);
        assert_eq!(p.max(), 4);
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(0, 0), BigInt::one());
        assert_eq!(binomial(4, -1), BigInt::zero());
        assert_eq!(binomial(4, 5), BigInt::zero());
    }

    proptest! {
        #[test]
        fn binomial_matches_pascal(n in 0i64..40, k in 0i64..40) {
            let direct = binomial(n, k);
            let pascal = binomial(n - 1, k - 1) + binomial(n - 1, k);
            if n >= 1 {
                prop_assert_eq!(direct, pascal);
            }
        }

        #[test]
        fn shift_and_negate_preserve_mass(off in -20i64..20) {
            let p = Pmf::from_parts([
                (1, ratio(1, 4)), (2, ratio(1, 4)), (5, ratio(1, 2)),
            ]).unwrap();
            let q = p.shift(off).negate();
            let total: BigRational = q.iter().map(|(_, m)| m.clone()).sum();
            prop_assert!(total.is_one());
            prop_assert_eq!(q.prob(-(1 + off)), ratio(1, 4));
        }
    }
}
