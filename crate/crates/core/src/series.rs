//! Truncated power series in `Δx` whose coefficients are constant-coefficient
//! differential operators, and the asymptotic expansions of the shift
//! operators, the stream matrix and the resolvent.

use std::fmt;

use num_rational::BigRational;

use crate::algebra::{Coeff, Field, Key, LaurentPoly, OperatorPoly, Param, QAlgebra, Ring, Sparse};
use crate::error::Result;
use crate::jet::JetPoly;
use crate::matrix::Matrix;
use crate::scheme::{conjugate_diagonal, LbmScheme, ScaleBy};

/// Exponents of `∂t^t ∂x1^x[0] ∂x2^x[1] ...`; trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DiffKey {
    pub t: u32,
    x: Vec<u32>,
}

impl DiffKey {
    pub fn new(t: u32, mut x: Vec<u32>) -> DiffKey {
        while x.last() == Some(&0) {
            x.pop();
        }
        DiffKey { t, x }
    }

    pub fn space(&self) -> &[u32] {
        &self.x
    }

    pub fn order(&self) -> u32 {
        self.t + self.x.iter().sum::<u32>()
    }

    fn label(&self) -> String {
        let axes = ['x', 'y', 'z'];
        let mut s = "t".repeat(self.t as usize);
        for (k, e) in self.x.iter().enumerate() {
            s.extend(std::iter::repeat_n(axes.get(k).copied().unwrap_or('w'), *e as usize));
        }
        s
    }
}

impl Key for DiffKey {
    fn identity() -> Self {
        DiffKey::default()
    }
    fn combine(&self, other: &Self) -> Self {
        let n = self.x.len().max(other.x.len());
        let x = (0..n).map(|k| self.x.get(k).unwrap_or(&0) + other.x.get(k).unwrap_or(&0)).collect();
        DiffKey::new(self.t + other.t, x)
    }
}

impl fmt::Debug for DiffKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.label())
    }
}

/// Polynomial in `∂t, ∂x1, ..., ∂xd` with rational-function coefficients.
pub type DiffOp = Sparse<DiffKey, Coeff>;

impl DiffOp {
    pub fn dt() -> DiffOp {
        DiffOp::monomial(DiffKey::new(1, vec![]))
    }

    /// `∂` along axis `k` (0-based).
    pub fn dx(k: usize) -> DiffOp {
        let mut x = vec![0; k + 1];
        x[k] = 1;
        DiffOp::monomial(DiffKey::new(0, x))
    }

    pub fn scalar(c: Coeff) -> DiffOp {
        DiffOp::constant(c)
    }

    /// Applies the operator to a jet polynomial by total differentiation.
    pub fn apply(&self, p: &JetPoly) -> JetPoly {
        let mut out = JetPoly::zero();
        for (k, c) in self.terms() {
            out = out.add(&p.derive(k.t, &k.x).mul_coeff(c));
        }
        out
    }

    pub fn render(&self) -> String {
        crate::algebra::render_terms(
            self.terms().rev().map(|(k, c)| (if k.order() == 0 { "1".to_string() } else { format!("d{}", k.label()) }, c)),
        )
    }

    pub fn to_latex(&self) -> String {
        let mut out = String::new();
        for (k, c) in self.terms().rev() {
            let (neg, abs) = c.split_sign();
            let cs = abs.to_latex();
            let op = if k.order() == 0 { String::new() } else { format!("\\partial_{{{}}}", k.label()) };
            let body = match (op.is_empty(), cs.as_str()) {
                (true, _) => cs,
                (false, "1") => op,
                _ if abs.numer().len() > 1 && abs.denom().is_one() => format!("\\left({cs}\\right) {op}"),
                _ => format!("{cs} {op}"),
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

impl ScaleBy for DiffOp {
    fn scale_by(&self, c: &Coeff) -> Self {
        self.mul_coeff(c)
    }
}

/// Precision of a series known exactly.
pub const EXACT: u32 = u32::MAX;

/// Power series `Σ_k coeffs[k] Δx^k`, known up to and including order `prec`.
#[derive(Clone, PartialEq)]
pub struct Series<R> {
    coeffs: Vec<R>,
    prec: u32,
}

impl<R: Ring> Series<R> {
    pub fn new(mut coeffs: Vec<R>, prec: u32) -> Self {
        if prec != EXACT {
            coeffs.truncate(prec as usize + 1);
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Series { coeffs, prec }
    }

    pub fn exact(coeffs: Vec<R>) -> Self {
        Self::new(coeffs, EXACT)
    }

    pub fn constant(c: R) -> Self {
        Self::exact(vec![c])
    }

    /// Coefficient of `Δx^k`, zero beyond the stored terms.
    pub fn coeff(&self, k: usize) -> R {
        self.coeffs.get(k).cloned().unwrap_or_else(R::zero)
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn truncate(&self, prec: u32) -> Self {
        Self::new(self.coeffs.clone(), prec.min(self.prec))
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Series<S> {
        Series::new(self.coeffs.iter().map(f).collect(), self.prec)
    }

    pub fn try_map<S: Ring>(&self, f: impl Fn(&R) -> Result<S>) -> Result<Series<S>> {
        Ok(Series::new(self.coeffs.iter().map(f).collect::<Result<_>>()?, self.prec))
    }

    /// Multiplication by `Δx^k`.
    pub fn shift_order(&self, k: u32) -> Self {
        let mut coeffs = vec![R::zero(); k as usize];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::new(coeffs, self.prec.saturating_add(k))
    }
}

impl<R: Ring> Ring for Series<R> {
    fn zero() -> Self {
        Series { coeffs: Vec::new(), prec: EXACT }
    }
    fn one() -> Self {
        Self::constant(R::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k).add(&other.coeff(k))).collect(), self.prec.min(other.prec))
    }
    fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k).sub(&other.coeff(k))).collect(), self.prec.min(other.prec))
    }
    fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Series { coeffs: Vec::new(), prec };
        }
        let mut len = self.coeffs.len() + other.coeffs.len() - 1;
        if prec != EXACT {
            len = len.min(prec as usize + 1);
        }
        let mut out = vec![R::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out, prec)
    }
    fn neg(&self) -> Self {
        Series { coeffs: self.coeffs.iter().map(|c| c.neg()).collect(), prec: self.prec }
    }
    fn from_int(n: i64) -> Self {
        Self::constant(R::from_int(n))
    }
}

impl<R: QAlgebra> QAlgebra for Series<R> {
    fn scale(&self, factor: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.scale(factor)).collect(), self.prec)
    }
}

impl<R: Ring> ScaleBy for Series<R>
where
    R: ScaleBy,
{
    fn scale_by(&self, c: &Coeff) -> Self {
        Self::new(self.coeffs.iter().map(|x| x.scale_by(c)).collect(), self.prec)
    }
}

impl<R: fmt::Debug> fmt::Debug for Series<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            write!(f, "[dx^{k}] {c:?}; ")?;
        }
        if self.prec == EXACT {
            write!(f, "exact")
        } else {
            write!(f, "O(dx^{})", self.prec + 1)
        }
    }
}

impl Series<DiffOp> {
    /// Limit of every coefficient as `p → 0`.
    pub fn limit_at_zero(&self, p: Param) -> Result<Self> {
        self.try_map(|d| d.try_map_coeffs(|c| c.limit_at_zero(p)))
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let body = c.render();
            parts.push(match k {
                0 => body,
                1 => format!("Δx*[{body}]"),
                _ => format!("Δx^{k}*[{body}]"),
            });
        }
        let mut s = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
        if self.prec != EXACT {
            s.push_str(&format!(" + O(Δx^{})", self.prec + 1));
        }
        s
    }
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// All multi-indices of dimension `d` and total order `r`.
fn multi_indices(d: usize, r: u32) -> Vec<Vec<u32>> {
    if d == 0 {
        return if r == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=r {
        for mut rest in multi_indices(d - 1, r - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Expansion of the space shift `x^z` up to order `r`:
/// `Σ_ν (-Δx)^|ν| z^ν / ν! ∂^ν`.
pub fn expand_shift(z: &[i32], r: u32) -> Series<DiffOp> {
    let mut coeffs = Vec::new();
    for k in 0..=r {
        let mut op = DiffOp::zero();
        for nu in multi_indices(z.len(), k) {
            let mut num: i64 = if k % 2 == 0 { 1 } else { -1 };
            let mut den: i64 = 1;
            for (zi, ni) in z.iter().zip(&nu) {
                num *= (*zi as i64).pow(*ni);
                den *= factorial(*ni);
            }
            if num != 0 {
                op.add_term(DiffKey::new(0, nu), &Coeff::frac(num, den));
            }
        }
        coeffs.push(op);
    }
    Series::new(coeffs, r)
}

/// Expansion of the time shift `z^p` under acoustic scaling:
/// `Σ_k p^k Δx^k / (λ^k k!) ∂t^k`.
pub fn expand_time_shift(lambda: &Coeff, p: i32, r: u32) -> Result<Series<DiffOp>> {
    let mut coeffs = Vec::new();
    let inv = Coeff::one().div(lambda)?;
    for k in 0..=r {
        let c = Coeff::rational(BigRational::new((p as i64).pow(k).into(), factorial(k).into())).mul(&inv.pow(k));
        coeffs.push(DiffOp::term(DiffKey::new(k, vec![]), c));
    }
    Ok(Series::new(coeffs, r))
}

/// The asymptotic equivalent of a finite difference operator.
pub fn expand_laurent(p: &LaurentPoly, r: u32) -> Series<DiffOp> {
    let mut out = Series::new(vec![], r);
    for (shift, c) in p.terms() {
        let e = expand_shift(&shift.padded(shift.dims()), r);
        out = out.add(&e.map(|d| d.mul_coeff(c)));
    }
    out
}

/// The asymptotic equivalent of an operator polynomial in `z` and the space shifts.
pub fn expand_operator(p: &OperatorPoly, lambda: &Coeff, r: u32) -> Result<Series<DiffOp>> {
    let zeta = expand_time_shift(lambda, 1, r)?;
    let mut out = Series::new(vec![], r);
    for k in 0..=p.time_degree() {
        let space = p.z_coeff(k);
        if space.is_zero() {
            continue;
        }
        out = out.add(&zeta.pow(k).mul(&expand_laurent(&space, r)));
    }
    Ok(out)
}

/// Momentum-velocity operator matrix `M diag(λ c_j · ∇) M⁻¹`.
pub fn build_g(s: &LbmScheme) -> Result<Matrix<DiffOp>> {
    let minv = s.moments_inverse()?;
    Ok(conjugate_diagonal(&s.moments, &minv, |j| {
        let mut op = DiffOp::zero();
        for (k, c) in s.velocities[j].iter().enumerate() {
            if *c != 0 {
                op = op.add(&DiffOp::dx(k).mul_coeff(&s.lambda.mul(&Coeff::int(*c as i64))));
            }
        }
        op
    }))
}

/// Lifts a matrix of operators to exact constant series, truncated at `r`.
pub fn lift_matrix(m: &Matrix<DiffOp>, r: u32) -> Matrix<Series<DiffOp>> {
    m.map(|d| Series::new(vec![d.clone()], r))
}

fn coeff_matrix(m: &Matrix<Coeff>) -> Matrix<DiffOp> {
    m.map(|c| DiffOp::scalar(c.clone()))
}

/// Expansion of the moments-stream matrix (or of its conjugate with reversed
/// velocities), entry by entry from the shift operators.
pub fn expand_stream(s: &LbmScheme, r: u32, conjugate: bool) -> Result<Matrix<Series<DiffOp>>> {
    let minv = s.moments_inverse()?;
    Ok(conjugate_diagonal(&s.moments, &minv, |j| {
        let c: Vec<i32> = s.velocities[j].iter().map(|v| if conjugate { -v } else { *v }).collect();
        expand_shift(&c, r)
    }))
}

/// `exp(-(Δx/λ) G)` truncated at `r`, the closed form of the stream expansion.
pub fn stream_from_g(g: &Matrix<DiffOp>, lambda: &Coeff, r: u32) -> Result<Matrix<Series<DiffOp>>> {
    let q = g.rows();
    let inv = Coeff::one().div(lambda)?;
    let mut orders = Vec::new();
    let mut power: Matrix<DiffOp> = Matrix::identity(q);
    for k in 0..=r {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let c = Coeff::frac(sign, factorial(k)).mul(&inv.pow(k));
        orders.push(power.map(|d| d.mul_coeff(&c)));
        power = power.mul(g);
    }
    Ok(Matrix::from_fn(q, q, |i, j| Series::new(orders.iter().map(|m| m.get(i, j).clone()).collect(), r)))
}

/// `ζI - 𝒜` from the expansions of the entries of `zI - A`.
pub fn expand_resolvent(s: &LbmScheme, r: u32) -> Result<Matrix<Series<DiffOp>>> {
    let res = s.resolvent_operator()?;
    res.try_map(|p| expand_operator(p, &s.lambda, r))
}

/// `ζI - 𝒜 = Σ_k Δx^k/(λ^k k!) (∂t^k I - (-1)^k G^k (I - S))` for a given `G`.
pub fn resolvent_from_g(g: &Matrix<DiffOp>, rates: &[Coeff], lambda: &Coeff, r: u32) -> Result<Matrix<Series<DiffOp>>> {
    let q = g.rows();
    let inv = Coeff::one().div(lambda)?;
    let one_minus_s = coeff_matrix(&Matrix::diag(&rates.iter().map(|s| Coeff::one().sub(s)).collect::<Vec<_>>()));
    let mut orders = Vec::new();
    let mut power: Matrix<DiffOp> = Matrix::identity(q);
    for k in 0..=r {
        let scale = inv.pow(k).mul(&Coeff::frac(1, factorial(k)));
        let dt = DiffOp::term(DiffKey::new(k, vec![]), Coeff::one());
        let sign = if k % 2 == 0 { Coeff::one() } else { Coeff::int(-1) };
        let m = Matrix::identity(q).scale(&dt).sub(&power.mul(&one_minus_s).scale(&DiffOp::scalar(sign)));
        orders.push(m.map(|d| d.mul_coeff(&scale)));
        power = power.mul(g);
    }
    Ok(Matrix::from_fn(q, q, |i, j| Series::new(orders.iter().map(|m| m.get(i, j).clone()).collect(), r)))
}

/// Entrywise truncation to order `r`, which also aligns the precision tags.
pub fn truncate_matrix<R: Ring>(m: &Matrix<Series<R>>, r: u32) -> Matrix<Series<R>> {
    m.map(|s| Series::new(s.coeffs.clone(), r.min(s.prec)))
}

/// Coefficient matrix of order `k` of a matrix of series.
pub fn order_matrix(m: &Matrix<Series<DiffOp>>, k: usize) -> Matrix<DiffOp> {
    m.map(|s| s.coeff(k))
}

/// Determinant and adjugate computed directly in the truncated series ring.
pub fn series_det_adj<R: Ring>(m: &Matrix<Series<R>>) -> (Series<R>, Matrix<Series<R>>) {
    (m.det(), m.adjugate())
}

/// Entrywise limit `p → 0` of a matrix of series.
pub fn limit_matrix(m: &Matrix<Series<DiffOp>>, p: Param) -> Result<Matrix<Series<DiffOp>>> {
    m.try_map(|s| s.limit_at_zero(p))
}

/// First and second directional derivatives of `det` and `adj` at `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivatives<R> {
    pub det1: R,
    pub det2: R,
    pub adj1: Matrix<R>,
    pub adj2: Matrix<R>,
}

/// Closed-form derivatives `D det[D]`, `D² det[D, E]`, `D adj[D]`,
/// `D² adj[D, E]` at `C`, given `det C` and `C⁻¹`.
pub fn derivatives_with_inverse<R: Ring>(
    det_c: &R,
    c_inv: &Matrix<R>,
    d: &Matrix<R>,
    e: &Matrix<R>,
) -> Derivatives<R> {
    let q = c_inv.rows();
    let cd = c_inv.mul(d);
    let ce = c_inv.mul(e);
    let tr_d = cd.trace();
    let tr_e = ce.trace();
    let tr_ed = ce.mul(&cd).trace();
    let det1 = det_c.mul(&tr_d);
    let mixed = tr_e.mul(&tr_d).sub(&tr_ed);
    let det2 = det_c.mul(&mixed);
    let id = Matrix::identity(q);
    let adj1 = id.scale(&tr_d).sub(&cd).mul(c_inv).scale(det_c);
    let inner = e.mul(&cd).add(&d.mul(&ce)).sub(&d.scale(&tr_e)).sub(&e.scale(&tr_d));
    let adj2 = c_inv.scale(&mixed).add(&c_inv.mul(&inner).mul(c_inv)).scale(det_c);
    Derivatives { det1, det2, adj1, adj2 }
}

/// Closed-form derivatives at an invertible `C` over a field.
pub fn det_adj_derivatives<R: Field>(c: &Matrix<R>, d: &Matrix<R>, e: &Matrix<R>) -> Result<Derivatives<R>> {
    let inv = c.inverse()?;
    Ok(derivatives_with_inverse(&c.det(), &inv, d, e))
}

/// Second-order Taylor expansion of `det` and `adj` of `C + Δx D1 + Δx² D2`
/// at an invertible scalar matrix `C`, using the closed-form derivatives.
pub fn taylor_det_adj(
    c: &Matrix<Coeff>,
    d1: &Matrix<DiffOp>,
    d2: &Matrix<DiffOp>,
) -> Result<(Series<DiffOp>, Matrix<Series<DiffOp>>)> {
    let inv = coeff_matrix(&c.inverse()?);
    let det_c = DiffOp::scalar(c.det());
    let adj_c = coeff_matrix(&c.adjugate());
    let first = derivatives_with_inverse(&det_c, &inv, d1, d1);
    let second = derivatives_with_inverse(&det_c, &inv, d2, d2);
    let half = Coeff::frac(1, 2);
    let det = Series::new(vec![det_c.clone(), first.det1.clone(), second.det1.add(&first.det2.mul_coeff(&half))], 2);
    let adj2 = second.adj1.add(&first.adj2.map(|x| x.mul_coeff(&half)));
    let q = c.rows();
    let adj = Matrix::from_fn(q, q, |i, j| {
        Series::new(vec![adj_c.get(i, j).clone(), first.adj1.get(i, j).clone(), adj2.get(i, j).clone()], 2)
    });
    Ok((det, adj))
}
