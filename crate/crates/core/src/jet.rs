//! Jet polynomials: polynomials in the derivatives `∂t^a ∂^ν m_i` of the
//! conserved moments, used to represent nonlinear differential expressions.

use std::cmp::Ordering;
use std::fmt;

use crate::algebra::{Coeff, Monomial, Ring, Sparse};

/// The derivative `∂t^time ∂^space m_moment`; moments are indexed from 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Jet {
    pub moment: usize,
    pub time: u32,
    space: Vec<u32>,
}

impl Jet {
    pub fn new(moment: usize, time: u32, mut space: Vec<u32>) -> Jet {
        while space.last() == Some(&0) {
            space.pop();
        }
        Jet { moment, time, space }
    }

    pub fn field(moment: usize) -> Jet {
        Jet::new(moment, 0, Vec::new())
    }

    pub fn space(&self) -> &[u32] {
        &self.space
    }

    pub fn space_order(&self) -> u32 {
        self.space.iter().sum()
    }

    pub fn space_component(&self, k: usize) -> u32 {
        self.space.get(k).copied().unwrap_or(0)
    }

    /// The jet differentiated further by `∂t^t ∂^nu`.
    pub fn promoted(&self, t: u32, nu: &[u32]) -> Jet {
        let n = self.space.len().max(nu.len());
        let space = (0..n)
            .map(|k| self.space_component(k) + nu.get(k).copied().unwrap_or(0))
            .collect();
        Jet::new(self.moment, self.time + t, space)
    }

    fn derivative_label(&self) -> String {
        let axes = ['x', 'y', 'z'];
        let mut s = "t".repeat(self.time as usize);
        for (k, e) in self.space.iter().enumerate() {
            let c = axes.get(k).copied().unwrap_or('w');
            s.extend(std::iter::repeat_n(c, *e as usize));
        }
        s
    }

    pub fn to_latex(&self) -> String {
        let label = self.derivative_label();
        let field = format!("m_{{{}}}", self.moment + 1);
        if label.is_empty() {
            field
        } else {
            format!("\\partial_{{{label}}} {field}")
        }
    }
}

impl PartialOrd for Jet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Jet {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.moment, self.time, &self.space).cmp(&(other.moment, other.time, &other.space))
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = self.derivative_label();
        if label.is_empty() {
            write!(f, "m{}", self.moment + 1)
        } else {
            write!(f, "d{label}(m{})", self.moment + 1)
        }
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Polynomial in jet variables with rational-function coefficients.
pub type JetPoly = Sparse<Monomial<Jet>, Coeff>;

impl JetPoly {
    pub fn jet(j: Jet) -> JetPoly {
        JetPoly::monomial(Monomial::var(j))
    }

    pub fn moment(i: usize) -> JetPoly {
        JetPoly::jet(Jet::field(i))
    }

    pub fn scalar(c: Coeff) -> JetPoly {
        JetPoly::constant(c)
    }

    pub fn jets(&self) -> Vec<Jet> {
        let mut v: Vec<Jet> = self.terms().flat_map(|(m, _)| m.vars().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn max_time_order(&self) -> u32 {
        self.jets().iter().map(|j| j.time).max().unwrap_or(0)
    }

    pub fn has_time_jets(&self) -> bool {
        self.max_time_order() > 0
    }

    /// True when every jet is an undifferentiated field.
    pub fn is_pointwise(&self) -> bool {
        self.jets().iter().all(|j| j.time == 0 && j.space.is_empty())
    }

    /// Total derivative `∂t^t ∂^nu` (Leibniz rule with jet promotion).
    pub fn derive(&self, t: u32, nu: &[u32]) -> JetPoly {
        let mut out = self.clone();
        for _ in 0..t {
            out = out.derive_once(|j| j.promoted(1, &[]));
        }
        for (k, e) in nu.iter().enumerate() {
            let mut unit = vec![0; k + 1];
            unit[k] = 1;
            for _ in 0..*e {
                out = out.derive_once(|j| j.promoted(0, &unit));
            }
        }
        out
    }

    fn derive_once(&self, promote: impl Fn(&Jet) -> Jet) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, c) in self.terms() {
            for (j, e) in m.exps() {
                let rest = m.div(&Monomial::var(j.clone())).unwrap();
                let term = rest.mul(&Monomial::var(promote(j)));
                out.add_term(term, &c.mul(&Coeff::int(*e as i64)));
            }
        }
        out
    }

    /// Partial derivative with respect to the jet variable `j`.
    pub fn partial(&self, j: &Jet) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, c) in self.terms() {
            let e = m.degree_in(j);
            if e == 0 {
                continue;
            }
            let rest = m.div(&Monomial::var(j.clone())).unwrap();
            out.add_term(rest, &c.mul(&Coeff::int(e as i64)));
        }
        out
    }

    /// Substitutes `value` for every occurrence of the jet `j`.
    pub fn substitute(&self, j: &Jet, value: &JetPoly) -> JetPoly {
        let mut out = JetPoly::zero();
        let mut powers: Vec<JetPoly> = vec![JetPoly::one()];
        for (m, c) in self.terms() {
            let (e, rest) = m.split_off(j);
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(value);
                powers.push(next);
            }
            let t = powers[e as usize].mul_key(&rest).mul_coeff(c);
            out = out.add(&t);
        }
        out
    }

    /// Substitutes every order-0 field `m_i` by `values[i]` simultaneously
    /// (fields beyond the list are kept).
    pub fn substitute_fields(&self, values: &[JetPoly]) -> JetPoly {
        let mut out = JetPoly::zero();
        for (m, c) in self.terms() {
            let mut t = JetPoly::constant(c.clone());
            for (j, e) in m.exps() {
                let f = if j.time == 0 && j.space.is_empty() && j.moment < values.len() {
                    values[j.moment].pow(*e)
                } else {
                    JetPoly::monomial(Monomial::power(j.clone(), *e))
                };
                t = t.mul(&f);
            }
            out = out.add(&t);
        }
        out
    }

    /// Sum of the terms of total jet degree exactly one in `j`, i.e. the
    /// coefficient of the linear monomial `j`.
    pub fn linear_coeff(&self, j: &Jet) -> Coeff {
        self.coeff(&Monomial::var(j.clone()))
    }

    /// Maps every coefficient through a fallible function.
    pub fn try_map(&self, f: impl Fn(&Coeff) -> crate::Result<Coeff>) -> crate::Result<JetPoly> {
        self.try_map_coeffs(f)
    }

    pub fn render(&self) -> String {
        let terms = self.terms().rev().map(|(m, c)| {
            let label = if m.is_one() {
                "1".to_string()
            } else {
                m.exps()
                    .iter()
                    .map(|(j, e)| if *e == 1 { j.to_string() } else { format!("{j}^{e}") })
                    .collect::<Vec<_>>()
                    .join("*")
            };
            (label, c)
        });
        crate::algebra::render_terms(terms)
    }

    pub fn to_latex(&self) -> String {
        let mut out = String::new();
        for (m, c) in self.terms().rev() {
            let mono: Vec<String> = m
                .exps()
                .iter()
                .map(|(j, e)| {
                    let base = j.to_latex();
                    if *e == 1 {
                        base
                    } else if j.time == 0 && j.space.is_empty() {
                        format!("{base}^{{{e}}}")
                    } else {
                        format!("({base})^{{{e}}}")
                    }
                })
                .collect();
            let mono = mono.join(" ");
            let (neg, abs) = c.split_sign();
            let cs = abs.to_latex();
            let body = if mono.is_empty() {
                cs
            } else if cs == "1" {
                mono
            } else if abs.numer().len() > 1 && abs.denom().is_one() {
                format!("\\left({cs}\\right) {mono}")
            } else {
                format!("{cs} {mono}")
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
}
