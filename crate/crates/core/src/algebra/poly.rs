use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;

use super::{Monomial, Param, Ring, Sparse};

/// Multivariate polynomial with exact rational coefficients.
pub type Poly = Sparse<Monomial<Param>, BigRational>;

impl Poly {
    pub fn param(p: Param) -> Poly {
        Poly::monomial(Monomial::var(p))
    }

    pub fn rational(r: BigRational) -> Poly {
        Poly::constant(r)
    }

    pub fn vars(&self) -> BTreeSet<Param> {
        self.terms().flat_map(|(m, _)| m.vars().copied()).collect()
    }

    pub fn degree_in(&self, v: &Param) -> u32 {
        self.terms().map(|(m, _)| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    /// Smallest exponent of `v` over all terms.
    pub fn valuation(&self, v: &Param) -> u32 {
        self.terms().map(|(m, _)| m.degree_in(v)).min().unwrap_or(0)
    }

    /// Leading rational coefficient in the monomial order.
    pub fn leading_coeff(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    /// Coefficients as a polynomial in `v` over the remaining variables.
    pub fn to_univariate(&self, v: &Param) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in self.terms() {
            let (e, rest) = m.split_off(v);
            out[e as usize].add_term(rest, c);
        }
        out
    }

    pub fn from_univariate(v: Param, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            out = out.add(&c.mul_key(&Monomial::power(v, e as u32)));
        }
        out
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial<Param> {
        let mut it = self.terms().map(|(m, _)| m);
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    pub fn div_monomial(&self, m: &Monomial<Param>) -> Option<Poly> {
        let mut out = Poly::zero();
        for (k, c) in self.terms() {
            out.add_term(k.div(m)?, c);
        }
        Some(out)
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if divisor.len() == 1 {
            let (m, c) = divisor.leading().unwrap();
            return self
                .div_monomial(m)
                .map(|q| q.mul_coeff(&c.recip()));
        }
        let (lm, lc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&lm)?;
            let qc = rc / &lc;
            let t = Poly::term(qm, qc);
            rem = rem.sub(&divisor.mul(&t));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Scales so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading_coeff();
        self.mul_coeff(&lc.recip())
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        let ma = self.monomial_content();
        let mb = other.monomial_content();
        let gm = ma.gcd(&mb);
        if self.len() == 1 || other.len() == 1 {
            let rest = if self.len() == 1 { other } else { self };
            return Poly::monomial(gm.gcd(&rest.monomial_content()));
        }
        let a = self.div_monomial(&ma).unwrap();
        let b = other.div_monomial(&mb).unwrap();
        let shared: Vec<Param> = a.vars().intersection(&b.vars()).copied().collect();
        if shared.is_empty() || coprime_by_evaluation(&a, &b, &shared) {
            return Poly::monomial(gm);
        }
        // Recurse on the variable of lowest degree to keep remainders small.
        let v = *shared
            .iter()
            .min_by_key(|v| (a.degree_in(v).max(b.degree_in(v)), **v))
            .unwrap();
        let g = gcd_in(&a, &b, v);
        g.mul_key(&gm).monic()
    }

    /// Drops the terms containing `v`, i.e. substitutes `v = 0`.
    pub fn at_zero(&self, v: &Param) -> Poly {
        self.filter(|m| m.degree_in(v) == 0)
    }

    /// Evaluates with every parameter bound; `None` if a parameter is missing.
    pub fn eval(&self, bindings: &BTreeMap<Param, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in self.terms() {
            let mut t = c.clone();
            for (v, e) in m.exps() {
                let x = bindings.get(v)?;
                t *= Ring::pow(x, *e);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Integer multiple with coprime integer coefficients and positive leading
    /// coefficient, plus the rational factor `f` with `self = f * primitive`.
    pub fn primitive_integer(&self) -> (BigRational, Poly) {
        if self.is_zero() {
            return (BigRational::one(), Poly::zero());
        }
        let mut den_lcm = num_bigint::BigInt::from(1);
        let mut num_gcd = num_bigint::BigInt::from(0);
        for (_, c) in self.terms() {
            den_lcm = den_lcm.lcm(c.denom());
            num_gcd = num_gcd.gcd(c.numer());
        }
        let mut f = BigRational::new(num_gcd, den_lcm);
        if self.leading_coeff().is_negative() {
            f = -f;
        }
        let p = self.mul_coeff(&f.recip());
        (f, p)
    }
}

/// Sufficient test for `gcd(a, b) = 1`: for each shared variable, the
/// images under a specialization of the other variables that keeps both
/// leading coefficients nonzero have a constant gcd.
fn coprime_by_evaluation(a: &Poly, b: &Poly, shared: &[Param]) -> bool {
    let mut all: Vec<Param> = a.vars().union(&b.vars()).copied().collect();
    all.sort();
    'vars: for v in shared {
        for attempt in 0..3i64 {
            let point: BTreeMap<Param, BigRational> = all
                .iter()
                .enumerate()
                .filter(|(_, w)| *w != v)
                .map(|(k, w)| (*w, BigRational::from_integer((3 + 7 * k as i64 + 13 * attempt).into())))
                .collect();
            let ua = univariate_image(a, v, &point);
            let ub = univariate_image(b, v, &point);
            if ua.len() != a.degree_in(v) as usize + 1 || ub.len() != b.degree_in(v) as usize + 1 {
                continue;
            }
            if univariate_gcd_degree(ua, ub) == 0 {
                continue 'vars;
            }
            return false;
        }
        return false;
    }
    true
}

/// Coefficients in `v` after substituting `point` for the other variables, trailing zeros removed.
fn univariate_image(p: &Poly, v: &Param, point: &BTreeMap<Param, BigRational>) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = p
        .to_univariate(v)
        .iter()
        .map(|c| c.eval(point).expect("all variables bound"))
        .collect();
    while out.last().map(|c| c.is_zero()).unwrap_or(false) {
        out.pop();
    }
    out
}

fn univariate_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a mod b
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() {
            let f = a.last().unwrap() / &lb;
            let off = a.len() - b.len();
            for (k, c) in b.iter().enumerate() {
                a[off + k] -= &f * c;
            }
            a.pop();
            while a.last().map(|c| c.is_zero()).unwrap_or(false) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// gcd of two polynomials sharing the variable `v`, with trivial monomial content.
fn gcd_in(a: &Poly, b: &Poly, v: Param) -> Poly {
    let ca = content_in(a, &v);
    let cb = content_in(b, &v);
    let c = ca.gcd(&cb);
    let mut p = a.div_exact(&ca).expect("content divides").primitive_integer().1;
    let mut q = b.div_exact(&cb).expect("content divides").primitive_integer().1;
    if p.degree_in(&v) < q.degree_in(&v) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        if q.degree_in(&v) == 0 {
            // q is free of v; since it is primitive in v it is a unit here.
            return c;
        }
        let r = pseudo_rem(&p, &q, &v);
        if r.is_zero() {
            let pp = q.div_exact(&content_in(&q, &v)).expect("content divides");
            return pp.mul(&c);
        }
        p = q;
        q = r.div_exact(&content_in(&r, &v)).expect("content divides").primitive_integer().1;
    }
}

/// gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: &Param) -> Poly {
    let mut g = Poly::zero();
    for c in p.to_univariate(v) {
        if c.is_zero() {
            continue;
        }
        g = g.gcd(&c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

/// Remainder of `a` by `b` in `v`, up to a factor free of `v`.
fn pseudo_rem(a: &Poly, b: &Poly, v: &Param) -> Poly {
    let db = b.degree_in(v);
    let lb = b.to_univariate(v).pop().unwrap();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = r.to_univariate(v).pop().unwrap();
        let shift = Monomial::power(*v, dr - db);
        r = lb.mul(&r).sub(&lr.mul(b).mul_key(&shift));
    }
    r
}

pub(crate) fn fmt_rational_abs(c: &BigRational) -> String {
    let a = c.abs();
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            if m.is_one() {
                f.write_str(&fmt_rational_abs(c))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational_abs(c))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    fn p(name: &str) -> Poly {
        Poly::param(Param::new(name))
    }
    fn k(n: i64) -> Poly {
        Poly::from_int(n)
    }

    #[test]
    fn gcd_of_products() {
        let x = p("x");
        let y = p("y");
        let f = x.add(&y).mul(&x.sub(&k(2)));
        let g = x.add(&y).mul(&y.add(&k(3)));
        assert_eq!(f.gcd(&g), x.add(&y));
        let h = x.mul(&y).add(&k(1));
        assert_eq!(h.mul(&h).gcd(&h.mul(&x)), h);
        assert_eq!(x.gcd(&y), k(1));
    }

    #[test]
    fn exact_division() {
        let x = p("x");
        let y = p("y");
        let f = x.add(&y).mul(&x.sub(&y));
        assert_eq!(f.div_exact(&x.add(&y)), Some(x.sub(&y)));
        assert_eq!(f.div_exact(&x.add(&k(1))), None);
    }

    #[test]
    fn display_ascending() {
        let s2 = p("s2");
        assert_eq!(k(2).sub(&s2).to_string(), "2 - s2");
        assert_eq!(s2.mul_coeff(&rat(-1, 2)).to_string(), "-1/2*s2");
        let (f, q) = s2.mul_coeff(&rat(-2, 3)).add(&Poly::rational(rat(4, 3))).primitive_integer();
        assert_eq!(q.to_string(), "-2 + s2");
        assert_eq!(f, rat(-2, 3));
    }
}
