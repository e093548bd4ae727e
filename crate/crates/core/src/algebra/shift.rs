use std::fmt;

use super::{Coeff, Key, Ring, Sparse};

/// Exponent vector of a space shift `x1^a1 ... xd^ad`.
///
/// Trailing zeros are trimmed so that the identity is the empty vector in
/// every dimension.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SpaceShift(Vec<i32>);

impl SpaceShift {
    pub fn new(mut v: Vec<i32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        SpaceShift(v)
    }

    pub fn zero() -> Self {
        SpaceShift(Vec::new())
    }

    /// Component `k`, zero beyond the stored length.
    pub fn get(&self, k: usize) -> i32 {
        self.0.get(k).copied().unwrap_or(0)
    }

    /// Components padded to dimension `d`.
    pub fn padded(&self, d: usize) -> Vec<i32> {
        (0..d.max(self.0.len())).map(|k| self.get(k)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        SpaceShift(self.0.iter().map(|e| -e).collect())
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    /// Human-readable form in dimension `d`: `x` in 1D, `x1`, `x2`, ... otherwise.
    pub fn render(&self, d: usize) -> String {
        let mut parts = Vec::new();
        for (k, e) in self.0.iter().enumerate() {
            if *e == 0 {
                continue;
            }
            let name = if d <= 1 && self.0.len() <= 1 { "x".to_string() } else { format!("x{}", k + 1) };
            if *e == 1 {
                parts.push(name);
            } else {
                parts.push(format!("{name}^{e}"));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl Key for SpaceShift {
    fn identity() -> Self {
        Self::zero()
    }
    fn combine(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        SpaceShift::new((0..n).map(|k| self.get(k) + other.get(k)).collect())
    }
}

impl fmt::Debug for SpaceShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Key of an operator polynomial: power of the time shift `z` and a space shift.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct OpKey {
    pub time: u32,
    pub space: SpaceShift,
}

impl Key for OpKey {
    fn identity() -> Self {
        OpKey::default()
    }
    fn combine(&self, other: &Self) -> Self {
        OpKey { time: self.time + other.time, space: self.space.combine(&other.space) }
    }
}

/// Laurent polynomial in the space shifts with rational-function coefficients.
pub type LaurentPoly = Sparse<SpaceShift, Coeff>;

/// Polynomial in the time shift `z` with Laurent-polynomial space part.
pub type OperatorPoly = Sparse<OpKey, Coeff>;

impl LaurentPoly {
    /// The shift `x^v`.
    pub fn shift(v: Vec<i32>) -> Self {
        Self::monomial(SpaceShift::new(v))
    }

    /// Substitutes every shift by its inverse.
    pub fn reflect(&self) -> Self {
        self.map_keys(|k| k.negated())
    }

    pub fn render(&self, d: usize) -> String {
        render_terms(self.terms().map(|(k, c)| (k.render(d), c)))
    }
}

impl OperatorPoly {
    /// The time shift `z`.
    pub fn z() -> Self {
        Self::monomial(OpKey { time: 1, space: SpaceShift::zero() })
    }

    pub fn from_laurent(p: &LaurentPoly) -> Self {
        p.map_keys(|s| OpKey { time: 0, space: s.clone() })
    }

    pub fn time_degree(&self) -> u32 {
        self.terms().map(|(k, _)| k.time).max().unwrap_or(0)
    }

    /// Space part of the coefficient of `z^k`.
    pub fn z_coeff(&self, k: u32) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.terms().filter(|(key, _)| key.time == k).map(|(key, c)| (key.space.clone(), c.clone())),
        )
    }

    pub fn from_z_coeffs(coeffs: &[LaurentPoly]) -> Self {
        let mut out = Self::zero();
        for (k, c) in coeffs.iter().enumerate() {
            for (s, v) in c.terms() {
                out.add_term(OpKey { time: k as u32, space: s.clone() }, v);
            }
        }
        out
    }

    /// Largest power of `z` dividing every term.
    pub fn z_valuation(&self) -> u32 {
        self.terms().map(|(k, _)| k.time).min().unwrap_or(0)
    }

    /// Divides by `z^k`; terms of lower degree must be absent.
    pub fn div_z(&self, k: u32) -> Self {
        self.map_keys(|key| OpKey { time: key.time - k, space: key.space.clone() })
    }

    pub fn render(&self, d: usize) -> String {
        render_terms(self.terms().map(|(k, c)| {
            let s = k.space.render(d);
            let label = match (k.time, s.as_str()) {
                (0, _) => s,
                (1, "1") => "z".to_string(),
                (t, "1") => format!("z^{t}"),
                (1, _) => format!("z*{s}"),
                (t, _) => format!("z^{t}*{s}"),
            };
            (label, c)
        }))
    }
}

/// Renders `Σ c * label`, with `label = "1"` meaning a bare coefficient.
pub(crate) fn render_terms<'a>(terms: impl Iterator<Item = (String, &'a Coeff)>) -> String {
    let mut out = String::new();
    for (label, c) in terms {
        let (neg, abs) = c.split_sign();
        let cs = abs.to_string();
        let body = match (label.as_str(), cs.as_str()) {
            ("1", _) => cs.clone(),
            (_, "1") => label.clone(),
            _ if abs.is_compound() => format!("({cs})*{label}"),
            _ => format!("{cs}*{label}"),
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Coeff;
    use proptest::prelude::*;

    fn x(e: i32) -> LaurentPoly {
        LaurentPoly::shift(vec![e])
    }

    #[test]
    fn ring_examples() {
        assert_eq!(x(1).mul(&x(-1)), LaurentPoly::one());
        let one = LaurentPoly::one();
        let lhs = one.sub(&x(1)).mul(&one.add(&x(1)).add(&x(2)));
        assert_eq!(lhs, one.sub(&x(3)));
        let zx = OperatorPoly::z().mul(&OperatorPoly::from_laurent(&x(1)));
        let zxi = OperatorPoly::z().mul(&OperatorPoly::from_laurent(&x(-1)));
        assert_eq!(zx.mul(&zxi), OperatorPoly::z().mul(&OperatorPoly::z()));
    }

    #[test]
    fn rendering() {
        let p = x(1).add(&x(-1)).mul_coeff(&Coeff::frac(1, 2));
        assert_eq!(p.render(1), "1/2*x^-1 + 1/2*x");
        let q = OperatorPoly::z().sub(&OperatorPoly::from_laurent(&x(1)).mul_coeff(&Coeff::param("s")));
        assert_eq!(q.render(1), "-s*x + z");
    }

    fn laurent(d: usize) -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((prop::collection::vec(-2i32..=2, d), -3i64..=3, 0usize..2), 0..6).prop_map(
            |ts| {
                LaurentPoly::from_terms(ts.into_iter().map(|(v, c, p)| {
                    let coeff = if p == 0 { Coeff::int(c) } else { Coeff::param("a").mul(&Coeff::int(c)) };
                    (SpaceShift::new(v), coeff)
                }))
            },
        )
    }

    fn operator(d: usize) -> impl Strategy<Value = OperatorPoly> {
        prop::collection::vec(laurent(d), 1..3).prop_map(|cs| OperatorPoly::from_z_coeffs(&cs))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn laurent_ring_axioms(
            (a, b, c) in (1usize..=2).prop_flat_map(|d| (laurent(d), laurent(d), laurent(d)))
        ) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
            prop_assert_eq!(a.mul(&LaurentPoly::one()), a.clone());
        }

        #[test]
        fn operator_ring_axioms(a in operator(2), b in operator(2), c in operator(1)) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
            prop_assert_eq!(a.mul(&OperatorPoly::one()), a.clone());
            prop_assert_eq!(a.sub(&a), OperatorPoly::zero());
        }
    }
}
