use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use super::{Field, QAlgebra, Ring};

/// Exponent-like key of a sparse polynomial: keys form a commutative monoid.
pub trait Key: Ord + Clone + fmt::Debug + Send + Sync {
    fn identity() -> Self;
    fn combine(&self, other: &Self) -> Self;
}

/// Finite sum `Σ c_k · k` with no stored zero coefficients.
///
/// One representation serves polynomials over parameters, Laurent
/// polynomials in shifts, operator polynomials and differential operators.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sparse<K: Ord, C> {
    terms: BTreeMap<K, C>,
}

impl<K: Key, C: Ring> Sparse<K, C> {
    pub fn term(key: K, coeff: C) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(key, coeff);
        }
        Sparse { terms }
    }

    pub fn constant(c: C) -> Self {
        Self::term(K::identity(), c)
    }

    pub fn monomial(key: K) -> Self {
        Self::term(key, C::one())
    }

    pub fn from_terms(items: impl IntoIterator<Item = (K, C)>) -> Self {
        let mut s = Sparse { terms: BTreeMap::new() };
        for (k, c) in items {
            s.add_term(k, &c);
        }
        s
    }

    pub fn add_term(&mut self, key: K, coeff: &C) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(existing) => {
                let sum = existing.add(coeff);
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(key, coeff.clone());
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&K, &C)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (K, C)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, key: &K) -> C {
        self.terms.get(key).cloned().unwrap_or_else(C::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest key and its coefficient.
    pub fn leading(&self) -> Option<(&K, &C)> {
        self.terms.iter().next_back()
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&K::identity())
    }

    /// True when the only key present is the identity.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| *k == K::identity())
    }

    pub fn mul_coeff(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (k.clone(), v.mul(c))))
    }

    pub fn mul_key(&self, key: &K) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (k.combine(key), v.clone())))
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> Sparse<K, D> {
        Sparse::from_terms(self.terms.iter().map(|(k, v)| (k.clone(), f(v))))
    }

    pub fn try_map_coeffs<D: Ring, E>(
        &self,
        f: impl Fn(&C) -> Result<D, E>,
    ) -> Result<Sparse<K, D>, E> {
        let mut out = Sparse::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), &f(v)?);
        }
        Ok(out)
    }

    pub fn map_keys<L: Key>(&self, f: impl Fn(&K) -> L) -> Sparse<L, C> {
        Sparse::from_terms(self.terms.iter().map(|(k, v)| (f(k), v.clone())))
    }

    /// Keeps the terms whose key satisfies `pred`.
    pub fn filter(&self, pred: impl Fn(&K) -> bool) -> Self {
        Sparse {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| pred(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl<K: Key, C: Ring> Ring for Sparse<K, C> {
    fn zero() -> Self {
        Sparse { terms: BTreeMap::new() }
    }
    fn one() -> Self {
        Self::constant(C::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v);
        }
        out
    }
    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), &v.neg());
        }
        out
    }
    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                out.add_term(ka.combine(kb), &va.mul(vb));
            }
        }
        out
    }
    fn neg(&self) -> Self {
        Sparse {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.neg())).collect(),
        }
    }
    fn from_int(n: i64) -> Self {
        Self::constant(C::from_int(n))
    }
}

impl<K: Key, C: QAlgebra> QAlgebra for Sparse<K, C> {
    fn scale(&self, factor: &BigRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, v)| (k.clone(), v.scale(factor))))
    }
}

impl<K: Key, C: Field> Sparse<K, C> {
    /// Inverse when the value is a nonzero constant.
    pub fn constant_inverse(&self) -> Option<Self> {
        if self.is_constant() && !self.is_zero() {
            self.constant_term().inv().map(Self::constant)
        } else {
            None
        }
    }
}

impl<K: Ord + fmt::Debug, C: fmt::Debug> fmt::Debug for Sparse<K, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
    struct Deg(u32);
    impl Key for Deg {
        fn identity() -> Self {
            Deg(0)
        }
        fn combine(&self, o: &Self) -> Self {
            Deg(self.0 + o.0)
        }
    }

    #[test]
    fn cancellation_drops_terms() {
        let x: Sparse<Deg, BigRational> = Sparse::monomial(Deg(1));
        let one = Sparse::one();
        let p = x.add(&one).mul(&x.sub(&one));
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff(&Deg(1)), rat(0, 1));
        assert!(p.sub(&p).is_zero());
    }
}
