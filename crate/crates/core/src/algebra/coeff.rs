use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use super::poly::fmt_rational_abs;
use super::{Field, Monomial, Param, Poly, QAlgebra, Ring};
use crate::error::{Error, Result};

/// Rational function in the named parameters, kept in lowest terms with a
/// monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coeff {
    num: Poly,
    den: Poly,
}

impl Coeff {
    /// Builds `num / den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<Coeff> {
        if den.is_zero() {
            return Err(Error::MalformedCoefficient(format!("({num})/0")));
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Coeff {
        if num.is_zero() {
            return Coeff::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_one() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
            }
        };
        Self::monic_den(num, den)
    }

    fn monic_den(num: Poly, den: Poly) -> Coeff {
        let lc = den.leading_coeff();
        if lc.is_one() {
            Coeff { num, den }
        } else {
            let inv = lc.recip();
            Coeff { num: num.mul_coeff(&inv), den: den.mul_coeff(&inv) }
        }
    }

    pub fn from_poly(p: Poly) -> Coeff {
        Coeff { num: p, den: Poly::one() }
    }

    pub fn rational(r: BigRational) -> Coeff {
        Coeff::from_poly(Poly::rational(r))
    }

    pub fn int(n: i64) -> Coeff {
        Coeff::rational(BigRational::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> Coeff {
        Coeff::rational(BigRational::new(n.into(), d.into()))
    }

    pub fn param(name: &str) -> Coeff {
        Coeff::from_poly(Poly::param(Param::new(name)))
    }

    pub fn of(p: Param) -> Coeff {
        Coeff::from_poly(Poly::param(p))
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    /// The exact rational value when no parameter occurs.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.constant_term() / self.den.constant_term())
        } else {
            None
        }
    }

    pub fn params(&self) -> Vec<Param> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v.into_iter().collect()
    }

    pub fn div(&self, other: &Coeff) -> Result<Coeff> {
        let inv = other
            .inv()
            .ok_or_else(|| Error::MalformedCoefficient(format!("division of {self} by zero")))?;
        Ok(self.mul(&inv))
    }

    /// Limit as `p → 0`; fails when the limit is a pole.
    pub fn limit_at_zero(&self, p: Param) -> Result<Coeff> {
        if self.num.is_zero() {
            return Ok(Coeff::zero());
        }
        let a = self.num.valuation(&p);
        let b = self.den.valuation(&p);
        if b > a {
            return Err(Error::Pole { param: p.to_string(), expr: self.to_string() });
        }
        if a > b {
            return Ok(Coeff::zero());
        }
        let strip = Monomial::power(p, a);
        let n = self.num.div_monomial(&strip).unwrap().at_zero(&p);
        let d = self.den.div_monomial(&Monomial::power(p, b)).unwrap().at_zero(&p);
        Coeff::new(n, d)
    }

    /// Substitutes `value` for the parameter `p`.
    pub fn substitute(&self, p: Param, value: &Coeff) -> Result<Coeff> {
        let n = eval_poly_at(&self.num, p, value);
        let d = eval_poly_at(&self.den, p, value);
        if d.is_zero() {
            return Err(Error::MalformedCoefficient(format!(
                "substituting {p} = {value} into {self} makes the denominator vanish"
            )));
        }
        n.div(&d)
    }

    /// Substitutes several parameters at once.
    pub fn substitute_all(&self, values: &BTreeMap<Param, Coeff>) -> Result<Coeff> {
        let mut out = self.clone();
        for (p, v) in values {
            out = out.substitute(*p, v)?;
        }
        Ok(out)
    }

    /// Evaluates with all parameters bound to rationals.
    pub fn eval(&self, bindings: &BTreeMap<Param, BigRational>) -> Result<BigRational> {
        let unbound = || {
            let missing = self
                .params()
                .into_iter()
                .find(|p| !bindings.contains_key(p))
                .map(|p| p.to_string())
                .unwrap_or_default();
            Error::Unbound(missing)
        };
        let n = self.num.eval(bindings).ok_or_else(unbound)?;
        let d = self.den.eval(bindings).ok_or_else(unbound)?;
        if d.is_zero() {
            return Err(Error::MalformedCoefficient(format!(
                "denominator of {self} vanishes at the given bindings"
            )));
        }
        Ok(n / d)
    }

    /// Integer numerator and denominator polynomials with coprime contents
    /// and a positive denominator, as used for display.
    fn integer_parts(&self) -> (Poly, Poly) {
        let (fnum, pn) = self.num.primitive_integer();
        let (fden, pd) = self.den.primitive_integer();
        let f = fnum / fden;
        let n = pn.mul_coeff(&BigRational::from_integer(f.numer().clone()));
        let d = pd.mul_coeff(&BigRational::from_integer(f.denom().clone()));
        (n, d)
    }

    pub fn to_latex(&self) -> String {
        if let Some(r) = self.as_rational() {
            return latex_rational(&r);
        }
        let (n, d) = self.integer_parts();
        if d.is_one() {
            latex_poly(&n)
        } else if n.len() == 1 && n.leading_coeff().is_negative() {
            format!("-\\frac{{{}}}{{{}}}", latex_poly(&n.neg()), latex_poly(&d))
        } else {
            format!("\\frac{{{}}}{{{}}}", latex_poly(&n), latex_poly(&d))
        }
    }

    /// Splits off a leading minus sign when the numerator is a single
    /// negative term, returning `(negative, |self|)`.
    pub fn split_sign(&self) -> (bool, Coeff) {
        let (n, _) = self.integer_parts();
        if n.len() == 1 && n.leading_coeff().is_negative() {
            (true, self.neg())
        } else {
            (false, self.clone())
        }
    }

    /// True when the value needs parentheses as a factor in a product.
    pub fn is_compound(&self) -> bool {
        if self.as_rational().is_some() {
            return false;
        }
        let (n, d) = self.integer_parts();
        n.len() > 1 || !d.is_one()
    }
}

fn eval_poly_at(p: &Poly, v: Param, value: &Coeff) -> Coeff {
    let coeffs = p.to_univariate(&v);
    let mut acc = Coeff::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(value).add(&Coeff::from_poly(c.clone()));
    }
    acc
}

fn latex_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -r.numer(), r.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

pub(crate) fn latex_param(p: &Param) -> String {
    let name = p.name();
    let greek = [
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa", "lambda",
        "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega", "Pi",
        "Gamma", "Delta", "Theta", "Lambda", "Sigma", "Phi", "Psi", "Omega",
    ];
    let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (head, tail) = name.split_at(split);
    let head = if greek.contains(&head) { format!("\\{head}") } else { head.to_string() };
    if tail.is_empty() {
        head
    } else if tail.chars().all(|c| c.is_ascii_digit()) {
        format!("{head}_{{{tail}}}")
    } else {
        format!("\\mathrm{{{name}}}")
    }
}

fn latex_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        s.push_str(match (k, neg) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        });
        let abs = c.abs();
        let mono: Vec<String> = m
            .exps()
            .iter()
            .map(|(v, e)| if *e == 1 { latex_param(v) } else { format!("{}^{{{e}}}", latex_param(v)) })
            .collect();
        if m.is_one() {
            s.push_str(&latex_rational(&abs));
        } else if abs.is_one() {
            s.push_str(&mono.join(" "));
        } else {
            s.push_str(&latex_rational(&abs));
            s.push(' ');
            s.push_str(&mono.join(" "));
        }
    }
    s
}

impl Ring for Coeff {
    fn zero() -> Self {
        Coeff { num: Poly::zero(), den: Poly::one() }
    }
    fn one() -> Self {
        Coeff { num: Poly::one(), den: Poly::one() }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let n = self.num.add(&other.num);
            if self.den.is_one() {
                return Coeff { num: n, den: Poly::one() };
            }
            return Self::reduce(n, self.den.clone());
        }
        let g = self.den.gcd(&other.den);
        let bd = self.den.div_exact(&g).expect("gcd divides");
        let dd = other.den.div_exact(&g).expect("gcd divides");
        let n = self.num.mul(&dd).add(&other.num.mul(&bd));
        if n.is_zero() {
            return Coeff::zero();
        }
        if g.is_one() {
            // Both inputs are reduced and their denominators coprime.
            return Self::monic_den(n, self.den.mul(&dd));
        }
        // Any common factor of n and b*d/g divides g.
        let g2 = n.gcd(&g);
        let n = n.div_exact(&g2).expect("gcd divides");
        let den = bd.mul(&other.den.div_exact(&g2).expect("gcd divides"));
        Self::monic_den(n, den)
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Coeff::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Coeff { num: self.num.mul(&other.num), den: Poly::one() };
        }
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let a = self.num.div_exact(&g1).expect("gcd divides");
        let d = other.den.div_exact(&g1).expect("gcd divides");
        let c = other.num.div_exact(&g2).expect("gcd divides");
        let b = self.den.div_exact(&g2).expect("gcd divides");
        Self::monic_den(a.mul(&c), b.mul(&d))
    }
    fn neg(&self) -> Self {
        Coeff { num: self.num.neg(), den: self.den.clone() }
    }
    fn from_int(n: i64) -> Self {
        Coeff::int(n)
    }
}

impl QAlgebra for Coeff {
    fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Coeff::zero();
        }
        Coeff { num: self.num.mul_coeff(factor), den: self.den.clone() }
    }
}

impl Field for Coeff {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::monic_den(self.den.clone(), self.num.clone()))
        }
    }
}

impl From<BigRational> for Coeff {
    fn from(r: BigRational) -> Self {
        Coeff::rational(r)
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::int(n)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            if r.is_negative() {
                f.write_str("-")?;
            }
            return f.write_str(&fmt_rational_abs(&r));
        }
        let (n, d) = self.integer_parts();
        if d.is_one() {
            return write!(f, "{n}");
        }
        if n.len() > 1 {
            write!(f, "({n})")?;
        } else {
            write!(f, "{n}")?;
        }
        // A lone integer or a lone power of one parameter needs no parentheses.
        let atom = d.len() == 1
            && d.leading().map(|(m, c)| m.is_one() || (c.is_one() && m.exps().len() == 1)).unwrap();
        if atom {
            write!(f, "/{d}")
        } else {
            write!(f, "/({d})")
        }
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coeff({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(name: &str) -> Coeff {
        Coeff::param(name)
    }

    #[test]
    fn normalization_examples() {
        let s2 = c("s2");
        let lam = c("lambda");
        assert_eq!(s2.mul(&lam).div(&lam).unwrap(), s2);
        let h = s2.inv().unwrap().sub(&Coeff::frac(1, 2));
        assert_eq!(h.to_string(), "(2 - s2)/(2*s2)");
        let s1 = c("s1");
        let pi = c("Pi");
        assert_eq!(s1.mul(&pi).mul(&s1.inv().unwrap()), pi);
    }

    #[test]
    fn zero_denominator_is_malformed() {
        assert!(matches!(
            Coeff::new(Poly::one(), Poly::zero()),
            Err(Error::MalformedCoefficient(_))
        ));
    }

    #[test]
    fn limits() {
        let s1p = Param::new("s1");
        let s1 = c("s1");
        let s2 = c("s2");
        let pi = c("Pi");
        let lam = c("lambda");
        let a = s1.div(&s1.mul(&s2)).unwrap();
        assert_eq!(a.limit_at_zero(s1p).unwrap(), s2.inv().unwrap());
        let b = pi.add(&s1.mul(&lam));
        assert_eq!(b.limit_at_zero(s1p).unwrap(), pi);
        assert!(matches!(s1.inv().unwrap().limit_at_zero(s1p), Err(Error::Pole { .. })));
        let d = s1.add(&s2).div(&s1.add(&Coeff::int(2))).unwrap();
        assert_eq!(d.limit_at_zero(s1p).unwrap(), s2.div(&Coeff::int(2)).unwrap());
    }

    #[test]
    fn substitution_and_eval() {
        let s = c("s");
        let h = s.inv().unwrap().sub(&Coeff::frac(1, 2));
        let at = h.substitute(Param::new("s"), &Coeff::frac(3, 2)).unwrap();
        assert_eq!(at, Coeff::frac(1, 6));
        let mut b = BTreeMap::new();
        assert!(matches!(h.eval(&b), Err(Error::Unbound(_))));
        b.insert(Param::new("s"), BigRational::from_integer(2.into()));
        assert_eq!(h.eval(&b).unwrap(), BigRational::zero());
        assert!(h.substitute(Param::new("s"), &Coeff::zero()).is_err());
    }

    #[test]
    fn latex_rendering() {
        let h = c("s2").inv().unwrap().sub(&Coeff::frac(1, 2));
        assert_eq!(h.to_latex(), "\\frac{2 - s_{2}}{2 s_{2}}");
        assert_eq!(c("lambda").to_latex(), "\\lambda");
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        let names = ["a", "b", "c"];
        prop::collection::vec((-3i64..=3, 0u32..3, 0u32..3, 0usize..3), 1..4).prop_map(move |ts| {
            let mut p = Poly::zero();
            for (k, e1, e2, v) in ts {
                let m = Monomial::from_pairs([(Param::new(names[v]), e1), (Param::new("a"), e2)]);
                p.add_term(m, &BigRational::from_integer(k.into()));
            }
            p
        })
    }

    fn small_coeff() -> impl Strategy<Value = Coeff> {
        (small_poly(), small_poly())
            .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
            .prop_map(|(n, d)| Coeff::new(n, d).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn normalize_idempotent_and_matches_cross_multiplication(
            a in small_coeff(), b in small_coeff()
        ) {
            let again = Coeff::new(a.numer().clone(), a.denom().clone()).unwrap();
            prop_assert_eq!(&again, &a);
            let cross = a.numer().mul(b.denom()) == b.numer().mul(a.denom());
            prop_assert_eq!(cross, a == b);
        }

        #[test]
        fn field_axioms(a in small_coeff(), b in small_coeff(), c in small_coeff()) {
            prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.sub(&b).add(&b), a.clone());
            if !a.is_zero() {
                prop_assert_eq!(a.mul(&a.inv().unwrap()), Coeff::one());
            }
        }
    }
}
