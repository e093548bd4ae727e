//! Multiple-relaxation-times lattice Boltzmann schemes and their matrices of
//! shift operators.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::algebra::{Coeff, LaurentPoly, OperatorPoly, Param, Ring};
use crate::error::{Error, Result};
use crate::jet::JetPoly;
use crate::matrix::Matrix;

/// Kinetic scheme: velocities, moment basis, relaxation rates and equilibria.
///
/// Moments are indexed from 0 internally; the first `conserved` moments are
/// conserved. Equilibria are polynomials in the conserved fields `m_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct LbmScheme {
    pub dimension: usize,
    pub velocities: Vec<Vec<i32>>,
    pub lambda: Coeff,
    pub moments: Matrix<Coeff>,
    pub conserved: usize,
    pub rates: Vec<Coeff>,
    pub equilibria: Vec<JetPoly>,
    /// Declared parameters and their optional numeric bindings.
    pub parameters: BTreeMap<Param, Option<BigRational>>,
}

/// Outcome of [`LbmScheme::validate`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationIssue {
    pub component: String,
    pub message: String,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    /// The first error as an [`Error`].
    pub fn into_result(self) -> Result<Vec<ValidationIssue>> {
        match self.errors.into_iter().next() {
            Some(e) => Err(Error::Validation { component: e.component, message: e.message }),
            None => Ok(self.warnings),
        }
    }

    fn error(&mut self, component: impl Into<String>, message: impl Into<String>) {
        self.errors.push(ValidationIssue { component: component.into(), message: message.into() });
    }

    fn warning(&mut self, component: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(ValidationIssue { component: component.into(), message: message.into() });
    }
}

impl LbmScheme {
    pub fn q(&self) -> usize {
        self.velocities.len()
    }

    /// Number of conserved moments.
    pub fn n(&self) -> usize {
        self.conserved
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let q = self.q();
        if !(1..=3).contains(&self.dimension) {
            rep.error("dimension", format!("dimension must be 1, 2 or 3, got {}", self.dimension));
        }
        for (j, c) in self.velocities.iter().enumerate() {
            if c.len() != self.dimension {
                rep.error(
                    format!("velocities[{}]", j + 1),
                    format!("expected {} components, got {}", self.dimension, c.len()),
                );
            }
        }
        if q < 2 {
            rep.error("velocities", "at least two velocities are required");
        }
        if self.conserved == 0 || self.conserved >= q.max(1) {
            rep.error("conserved", format!("conserved count must lie in [1, {}], got {}", q.saturating_sub(1), self.conserved));
        }
        if self.moments.rows() != q || self.moments.cols() != q {
            rep.error(
                "moments",
                format!("expected a {q}x{q} matrix, got {}x{}", self.moments.rows(), self.moments.cols()),
            );
        } else if self.moments.det().is_zero() {
            rep.error("moments", "moment matrix is singular");
        }
        if self.lambda.is_zero() {
            rep.error("lattice_speed", "lattice speed must be nonzero");
        }
        if self.rates.len() != q {
            rep.error("relaxation", format!("expected {q} rates, got {}", self.rates.len()));
        }
        if self.equilibria.len() != q {
            rep.error("equilibria", format!("expected {q} equilibria, got {}", self.equilibria.len()));
        }
        if !rep.is_valid() {
            return rep;
        }
        let n = self.conserved;
        for (i, eq) in self.equilibria.iter().enumerate() {
            let comp = format!("equilibria[{}]", i + 1);
            for j in eq.jets() {
                if j.time != 0 || !j.space().is_empty() {
                    rep.error(&comp, format!("equilibrium contains the derivative {j}"));
                } else if j.moment >= n {
                    rep.error(&comp, format!("equilibrium depends on the non-conserved moment m{}", j.moment + 1));
                }
            }
            if i < n && *eq != JetPoly::moment(i) {
                rep.error(
                    &comp,
                    format!("conserved moment m{0} must have equilibrium m{0}, got {1}", i + 1, eq.render()),
                );
            }
        }
        for (j, s) in self.rates.iter().enumerate().skip(n) {
            let comp = format!("relaxation[{}]", j + 1);
            if s.is_zero() {
                rep.error(&comp, "non-conserved relaxation rate is zero");
            } else if let Some(r) = s.as_rational() {
                let two = BigRational::from_integer(2.into());
                if r <= BigRational::from_integer(0.into()) || r > two {
                    rep.warning(&comp, format!("rate {r} lies outside (0, 2]; the scheme may be unstable"));
                }
            }
        }
        if self.pi().is_zero() {
            rep.error("relaxation", "product of the non-conserved rates vanishes");
        }
        rep
    }

    /// Validates and returns the warnings, or the first error.
    pub fn check(&self) -> Result<Vec<ValidationIssue>> {
        self.validate().into_result()
    }

    /// Product of the non-conserved relaxation rates.
    pub fn pi(&self) -> Coeff {
        self.rates.iter().skip(self.conserved).fold(Coeff::one(), |a, s| a.mul(s))
    }

    pub fn moments_inverse(&self) -> Result<Matrix<Coeff>> {
        self.moments.inverse()
    }

    pub fn relaxation_matrix(&self) -> Matrix<Coeff> {
        Matrix::diag(&self.rates)
    }

    /// Moments-stream matrix `M diag(x^{c_j}) M⁻¹`.
    pub fn stream_matrix(&self) -> Result<Matrix<LaurentPoly>> {
        let minv = self.moments_inverse()?;
        Ok(conjugate_diagonal(&self.moments, &minv, |j| LaurentPoly::shift(self.velocities[j].clone())))
    }

    /// The matrices `A = T (I - S)` and `B = T S`.
    pub fn scheme_matrices(&self) -> Result<(Matrix<LaurentPoly>, Matrix<LaurentPoly>)> {
        let t = self.stream_matrix()?;
        let q = self.q();
        let a = Matrix::from_fn(q, q, |i, j| t.get(i, j).mul_coeff(&Coeff::one().sub(&self.rates[j])));
        let b = Matrix::from_fn(q, q, |i, j| t.get(i, j).mul_coeff(&self.rates[j]));
        Ok((a, b))
    }

    /// `zI - A` over the operator ring.
    pub fn resolvent_operator(&self) -> Result<Matrix<OperatorPoly>> {
        let (a, _) = self.scheme_matrices()?;
        let q = self.q();
        Ok(Matrix::from_fn(q, q, |i, j| {
            let base = OperatorPoly::from_laurent(a.get(i, j)).neg();
            if i == j {
                base.add(&OperatorPoly::z())
            } else {
                base
            }
        }))
    }

    /// Copy with the conserved rates replaced.
    pub fn with_conserved_rates(&self, rates: &[Coeff]) -> LbmScheme {
        let mut s = self.clone();
        for (k, r) in rates.iter().enumerate().take(self.conserved) {
            s.rates[k] = r.clone();
        }
        s
    }

    /// Copy with all conserved rates set to zero.
    pub fn canonical(&self) -> LbmScheme {
        self.with_conserved_rates(&vec![Coeff::zero(); self.conserved])
    }

    /// True when every equilibrium is linear in the conserved moments.
    pub fn has_linear_equilibria(&self) -> bool {
        self.equilibria.iter().all(|e| e.terms().all(|(m, _)| m.degree() <= 1))
    }

    /// Numeric bindings of the declared parameters, if all are bound.
    pub fn bindings(&self) -> Result<BTreeMap<Param, BigRational>> {
        let mut out = BTreeMap::new();
        for (p, v) in &self.parameters {
            match v {
                Some(r) => {
                    out.insert(*p, r.clone());
                }
                None => return Err(Error::Unbound(p.to_string())),
            }
        }
        Ok(out)
    }

    /// Substitutes the given values for parameters everywhere.
    pub fn substitute(&self, values: &BTreeMap<Param, Coeff>) -> Result<LbmScheme> {
        let sub = |c: &Coeff| c.substitute_all(values);
        let mut s = self.clone();
        s.lambda = sub(&self.lambda)?;
        s.moments = self.moments.try_map(sub)?;
        s.rates = self.rates.iter().map(sub).collect::<Result<_>>()?;
        s.equilibria = self.equilibria.iter().map(|e| e.try_map(sub)).collect::<Result<_>>()?;
        for p in values.keys() {
            s.parameters.remove(p);
        }
        Ok(s)
    }

    /// Specializes every bound parameter to its numeric value.
    pub fn specialize(&self, bindings: &BTreeMap<Param, BigRational>) -> Result<LbmScheme> {
        let values = bindings.iter().map(|(p, v)| (*p, Coeff::rational(v.clone()))).collect();
        self.substitute(&values)
    }

    /// All parameters occurring anywhere in the scheme.
    pub fn free_parameters(&self) -> Vec<Param> {
        let mut out: Vec<Param> = Vec::new();
        let mut push = |c: &Coeff| out.extend(c.params());
        push(&self.lambda);
        self.moments.entries().for_each(&mut push);
        self.rates.iter().for_each(&mut push);
        for e in &self.equilibria {
            e.terms().for_each(|(_, c)| push(c));
        }
        out.sort();
        out.dedup();
        out
    }
}

/// `M diag(f(j)) M⁻¹` for a diagonal with entries in a ring over the coefficients.
pub(crate) fn conjugate_diagonal<R: Ring>(
    m: &Matrix<Coeff>,
    minv: &Matrix<Coeff>,
    f: impl Fn(usize) -> R,
) -> Matrix<R>
where
    R: ScaleBy,
{
    let q = m.rows();
    let diag: Vec<R> = (0..q).map(&f).collect();
    Matrix::from_fn(q, q, |i, k| {
        let mut acc = R::zero();
        for (j, dj) in diag.iter().enumerate() {
            let w = m.get(i, j).mul(minv.get(j, k));
            if !w.is_zero() {
                acc = acc.add(&dj.scale_by(&w));
            }
        }
        acc
    })
}

/// Multiplication by a scalar coefficient.
pub trait ScaleBy {
    fn scale_by(&self, c: &Coeff) -> Self;
}

impl ScaleBy for LaurentPoly {
    fn scale_by(&self, c: &Coeff) -> Self {
        self.mul_coeff(c)
    }
}

impl ScaleBy for Coeff {
    fn scale_by(&self, c: &Coeff) -> Self {
        self.mul(c)
    }
}

/// Ready-made schemes used in examples and tests.
pub mod library {
    use super::*;

    fn p(name: &str) -> Coeff {
        Coeff::param(name)
    }

    fn declare(names: &[&str]) -> BTreeMap<Param, Option<BigRational>> {
        names.iter().map(|n| (Param::new(n), None)).collect()
    }

    /// D1Q2 with `M = [[1, 1], [λ, -λ]]` and `m2eq = C m1`.
    pub fn d1q2() -> LbmScheme {
        let lam = p("lambda");
        LbmScheme {
            dimension: 1,
            velocities: vec![vec![1], vec![-1]],
            lambda: lam.clone(),
            moments: Matrix::from_rows(vec![vec![Coeff::one(), Coeff::one()], vec![lam.clone(), lam.neg()]]),
            conserved: 1,
            rates: vec![Coeff::zero(), p("s2")],
            equilibria: vec![JetPoly::moment(0), JetPoly::moment(0).mul_coeff(&p("C"))],
            parameters: declare(&["lambda", "s2", "C"]),
        }
    }

    /// D1Q3 with velocities `0, 1, -1`, moments `1, λc, λ²c²`, and the
    /// conserved moments `m1`, `m2`.
    pub fn d1q3_two_conserved() -> LbmScheme {
        let lam = p("lambda");
        let one = Coeff::one();
        let zero = Coeff::zero();
        let l2 = lam.mul(&lam);
        LbmScheme {
            dimension: 1,
            velocities: vec![vec![0], vec![1], vec![-1]],
            lambda: lam.clone(),
            moments: Matrix::from_rows(vec![
                vec![one.clone(), one.clone(), one.clone()],
                vec![zero, lam.clone(), lam.neg()],
                vec![Coeff::zero(), l2.clone(), l2],
            ]),
            conserved: 2,
            rates: vec![Coeff::zero(), Coeff::zero(), p("s3")],
            equilibria: vec![
                JetPoly::moment(0),
                JetPoly::moment(1),
                JetPoly::moment(0).mul_coeff(&p("a")).add(&JetPoly::moment(1).mul_coeff(&p("b"))),
            ],
            parameters: declare(&["lambda", "s3", "a", "b"]),
        }
    }
}
