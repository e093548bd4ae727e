//! Reduction of a lattice Boltzmann scheme to multi-step finite difference
//! schemes acting on the conserved moments only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use serde::Serialize;

use crate::algebra::{Coeff, LaurentPoly, OpKey, OperatorPoly, Param, Ring};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scheme::LbmScheme;

/// Multi-step scheme for one conserved moment:
/// `lhs m_i = Σ_j rhs_conserved[j] m_j + Σ_j rhs_equilibrium[j] m_j^eq`,
/// with `lhs` monic in `z`. Indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct FdScheme {
    pub moment: usize,
    pub dimension: usize,
    pub lhs: OperatorPoly,
    pub rhs_conserved: Vec<(usize, OperatorPoly)>,
    pub rhs_equilibrium: Vec<(usize, OperatorPoly)>,
}

/// One `(time level, space offset, coefficient)` entry of a serialized scheme.
///
/// `time` is relative to the newest known level `t`, so the unknown level is
/// `+1` and older levels are negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StencilTriple {
    pub side: &'static str,
    pub field: String,
    pub time: i32,
    pub shift: Vec<i32>,
    pub coeff: String,
}

/// Where a stencil term reads its values from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    /// A conserved moment, including the updated one.
    Conserved(usize),
    /// An equilibrium `m_j^eq` evaluated pointwise on the conserved moments.
    Equilibrium(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilTerm {
    pub source: Source,
    /// Level relative to the newest known one: 0 is `t`, -1 is `t - Δt`.
    pub time: i32,
    pub shift: Vec<i32>,
    pub weight: BigRational,
}

/// Fully numeric update rule `m_i(t + Δt) = Σ weight * source(t + time, x - shift)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub moment: usize,
    pub dimension: usize,
    pub levels: u32,
    pub terms: Vec<StencilTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub identical: bool,
    pub diffs: Vec<String>,
}

impl FdScheme {
    /// Number of time levels the update reads.
    pub fn steps(&self) -> u32 {
        self.lhs.time_degree()
    }

    fn polys(&self) -> impl Iterator<Item = &OperatorPoly> {
        std::iter::once(&self.lhs)
            .chain(self.rhs_conserved.iter().map(|(_, p)| p))
            .chain(self.rhs_equilibrium.iter().map(|(_, p)| p))
    }

    fn map_polys(&self, f: impl Fn(&OperatorPoly) -> Result<OperatorPoly>) -> Result<FdScheme> {
        Ok(FdScheme {
            moment: self.moment,
            dimension: self.dimension,
            lhs: f(&self.lhs)?,
            rhs_conserved: self.rhs_conserved.iter().map(|(j, p)| Ok((*j, f(p)?))).collect::<Result<_>>()?,
            rhs_equilibrium: self.rhs_equilibrium.iter().map(|(j, p)| Ok((*j, f(p)?))).collect::<Result<_>>()?,
        })
    }

    /// Drops zero terms, removes the common power of `z` and makes the lhs monic.
    fn normalized(mut self) -> Result<FdScheme> {
        self.rhs_conserved.retain(|(_, p)| !p.is_zero());
        self.rhs_equilibrium.retain(|(_, p)| !p.is_zero());
        if self.lhs.is_zero() {
            return Err(Error::Consistency("left-hand side vanishes".into()));
        }
        let k = self.polys().map(|p| p.z_valuation()).min().unwrap_or(0);
        let mut out = if k > 0 { self.map_polys(|p| Ok(p.div_z(k)))? } else { self };
        let lead = out.lhs.z_coeff(out.lhs.time_degree());
        if !lead.is_one() {
            if lead.len() != 1 {
                return Err(Error::Consistency(format!("leading coefficient {} is not a monomial", lead.render(out.dimension))));
            }
            let (shift, c) = lead.terms().next().unwrap();
            let inv = OperatorPoly::term(OpKey { time: 0, space: shift.negated() }, Coeff::one().div(c)?);
            out = out.map_polys(|p| Ok(p.mul(&inv)))?;
        }
        Ok(out)
    }

    /// Substitutes parameter values and re-normalizes, which drops time
    /// levels that became degenerate.
    pub fn substitute(&self, values: &BTreeMap<Param, Coeff>) -> Result<FdScheme> {
        self.map_polys(|p| p.try_map_coeffs(|c| c.substitute_all(values)))?.normalized()
    }

    /// The executable stencil after binding every parameter.
    pub fn specialize_stencil(&self, bindings: &BTreeMap<Param, BigRational>) -> Result<Stencil> {
        let values = bindings.iter().map(|(p, v)| (*p, Coeff::rational(v.clone()))).collect();
        let f = self.substitute(&values)?;
        let d = f.steps();
        let top = d as i32 - 1;
        let mut terms = Vec::new();
        let mut push = |source: Source, p: &OperatorPoly, sign: bool| -> Result<()> {
            for (key, c) in p.terms() {
                if sign && key.time == d {
                    continue;
                }
                let w = c.as_rational().ok_or_else(|| {
                    Error::Unbound(c.params().first().map(|p| p.to_string()).unwrap_or_default())
                })?;
                terms.push(StencilTerm {
                    source,
                    time: key.time as i32 - top,
                    shift: key.space.padded(f.dimension),
                    weight: if sign { -w } else { w },
                });
            }
            Ok(())
        };
        push(Source::Conserved(f.moment), &f.lhs, true)?;
        for (j, p) in &f.rhs_conserved {
            push(Source::Conserved(*j), p, false)?;
        }
        for (j, p) in &f.rhs_equilibrium {
            push(Source::Equilibrium(*j), p, false)?;
        }
        Ok(Stencil { moment: f.moment, dimension: f.dimension, levels: d, terms })
    }

    /// Serialized `(time, offset, coefficient)` triples of both sides.
    pub fn triples(&self) -> Vec<StencilTriple> {
        let top = self.steps() as i32 - 1;
        let mut out = Vec::new();
        let mut push = |side: &'static str, field: String, p: &OperatorPoly| {
            for (key, c) in p.terms() {
                out.push(StencilTriple {
                    side,
                    field: field.clone(),
                    time: key.time as i32 - top,
                    shift: key.space.padded(self.dimension),
                    coeff: c.to_string(),
                });
            }
        };
        push("lhs", format!("m{}", self.moment + 1), &self.lhs);
        for (j, p) in &self.rhs_conserved {
            push("rhs", format!("m{}", j + 1), p);
        }
        for (j, p) in &self.rhs_equilibrium {
            push("rhs", format!("m{}eq", j + 1), p);
        }
        out
    }

    /// Explicit update `m_i(t+dt) = ...`, grouped by source field and time level.
    pub fn render(&self) -> String {
        let top = self.steps() as i32 - 1;
        let mut parts: Vec<(String, LaurentPoly)> = Vec::new();
        let level = |k: u32| match k as i32 - top {
            0 => "t".to_string(),
            o => format!("t{o}*dt").replace("t-1*dt", "t-dt"),
        };
        let mut collect = |name: String, p: &OperatorPoly, negate: bool| {
            for k in (0..=p.time_degree()).rev() {
                if negate && k == self.steps() {
                    continue;
                }
                let c = p.z_coeff(k);
                if c.is_zero() {
                    continue;
                }
                parts.push((format!("{name}({})", level(k)), if negate { c.neg() } else { c }));
            }
        };
        collect(format!("m{}", self.moment + 1), &self.lhs, true);
        for (j, p) in &self.rhs_conserved {
            collect(format!("m{}", j + 1), p, false);
        }
        for (j, p) in &self.rhs_equilibrium {
            collect(format!("m{}eq", j + 1), p, false);
        }
        let mut out = format!("m{}(t+dt) =", self.moment + 1);
        if parts.is_empty() {
            out.push_str(" 0");
        }
        for (k, (label, c)) in parts.iter().enumerate() {
            let body = c.render(self.dimension);
            let sep = if k == 0 { " " } else { " + " };
            if c.len() == 1 && !body.contains(' ') {
                let _ = write!(out, "{sep}{body}*{label}");
            } else {
                let _ = write!(out, "{sep}[{body}]*{label}");
            }
        }
        out
    }
}

impl Stencil {
    /// Largest `|shift|` along any axis, i.e. the stencil half-width.
    pub fn radius(&self) -> i32 {
        self.terms.iter().flat_map(|t| t.shift.iter().map(|s| s.abs())).max().unwrap_or(0)
    }

    /// Sum of the weights of the terms reading `source`.
    pub fn weight_sum(&self, source: Source) -> BigRational {
        self.terms.iter().filter(|t| t.source == source).fold(BigRational::from_integer(0.into()), |a, t| a + &t.weight)
    }
}

/// `(A_i, A⋄_i)`: `A` cut to `{i} ∪ {N..q}` and the remainder.
pub fn cut_decomposition<R: Ring>(a: &Matrix<R>, i: usize, n: usize) -> (Matrix<R>, Matrix<R>) {
    let keep: Vec<usize> = std::iter::once(i).chain(n..a.rows()).collect();
    let ai = a.cut(&keep);
    let rest = a.sub(&ai);
    (ai, rest)
}

fn lift(m: &Matrix<LaurentPoly>) -> Matrix<OperatorPoly> {
    m.map(OperatorPoly::from_laurent)
}

/// Reduction using the relaxation rates exactly as given, conserved ones included.
pub fn reduce_with_rates(s: &LbmScheme) -> Result<Vec<FdScheme>> {
    s.check()?;
    let (a, b) = s.scheme_matrices()?;
    let (a, b) = (lift(&a), lift(&b));
    let q = s.q();
    let n = s.n();
    let z = OperatorPoly::z();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (ai, diamond) = cut_decomposition(&a, i, n);
        let resolvent = Matrix::identity(q).scale(&z).sub(&ai);
        let det = resolvent.det();
        let adj = resolvent.adjugate();
        let row = adj.row(i);
        let dot = |col: &dyn Fn(usize) -> OperatorPoly| {
            row.iter().enumerate().fold(OperatorPoly::zero(), |acc, (k, r)| acc.add(&r.mul(&col(k))))
        };
        // Equilibria of conserved moments are the moments themselves.
        let lhs = det.sub(&dot(&|k| b.get(k, i).clone()));
        let rhs_conserved = (0..n)
            .filter(|&j| j != i)
            .map(|j| (j, dot(&|k| diamond.get(k, j).add(b.get(k, j)))))
            .collect();
        let rhs_equilibrium = (n..q).map(|j| (j, dot(&|k| b.get(k, j).clone()))).collect();
        let raw = FdScheme { moment: i, dimension: s.dimension, lhs, rhs_conserved, rhs_equilibrium };
        let factor = n as u32 - 1;
        if raw.polys().any(|p| !p.is_zero() && p.z_valuation() < factor) {
            return Err(Error::Consistency(format!("missing factor z^{factor} in the scheme for m{}", i + 1)));
        }
        out.push(raw.map_polys(|p| Ok(p.div_z(factor)))?.normalized()?);
    }
    Ok(out)
}

/// The family of schemes, one per conserved moment, with conserved rates set to zero.
pub fn reduce_multi(s: &LbmScheme) -> Result<Vec<FdScheme>> {
    reduce_with_rates(&s.canonical())
}

/// The scheme for a single conserved moment.
pub fn reduce_single(s: &LbmScheme) -> Result<FdScheme> {
    if s.n() != 1 {
        return Err(Error::Precondition(format!("expected one conserved moment, found {}", s.n())));
    }
    Ok(reduce_multi(s)?.remove(0))
}

/// Same family built from the characteristic polynomials of the cut matrices
/// and powers of `A_i` instead of adjugates.
pub fn reduce_via_charpoly(s: &LbmScheme) -> Result<Vec<FdScheme>> {
    let s = s.canonical();
    s.check()?;
    let (a, b) = s.scheme_matrices()?;
    let q = s.q();
    let n = s.n();
    let d = q + 1 - n;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (ai, diamond) = cut_decomposition(&a, i, n);
        let full = ai.charpoly();
        // det(X - A_i) = X^{N-1} Σ c_k X^k
        let c: Vec<LaurentPoly> = full[n - 1..].to_vec();
        let mut powers = vec![Matrix::identity(q)];
        for _ in 1..d {
            let next = powers.last().unwrap().mul(&ai);
            powers.push(next);
        }
        let lhs = OperatorPoly::from_z_coeffs(&c);
        let mut rhs_c = vec![vec![LaurentPoly::zero(); d]; n];
        let mut rhs_e = vec![vec![LaurentPoly::zero(); d]; q];
        for k in 0..d {
            // Coefficient of z^{d-1-k}.
            let mut poly = Matrix::zeros(q, q);
            for (l, p) in powers.iter().enumerate().take(k + 1) {
                poly = poly.add(&p.scale(&c[d + l - k]));
            }
            let pd = poly.mul(&diamond);
            let pb = poly.mul(&b);
            for j in 0..q {
                if j < n {
                    rhs_c[j][d - 1 - k] = pd.get(i, j).add(pb.get(i, j));
                } else {
                    rhs_e[j][d - 1 - k] = pb.get(i, j).clone();
                }
            }
        }
        let own = OperatorPoly::from_z_coeffs(&rhs_c[i]);
        let raw = FdScheme {
            moment: i,
            dimension: s.dimension,
            lhs: lhs.sub(&own),
            rhs_conserved: (0..n).filter(|&j| j != i).map(|j| (j, OperatorPoly::from_z_coeffs(&rhs_c[j]))).collect(),
            rhs_equilibrium: (n..q).map(|j| (j, OperatorPoly::from_z_coeffs(&rhs_e[j]))).collect(),
        };
        out.push(raw.normalized()?);
    }
    Ok(out)
}

/// Compares the canonical family with the one built from `trial` conserved rates.
pub fn invariance_check(s: &LbmScheme, trial: &[Coeff]) -> Result<InvarianceReport> {
    let base = reduce_multi(s)?;
    let other = reduce_with_rates(&s.with_conserved_rates(trial))?;
    let mut diffs = Vec::new();
    for (a, b) in base.iter().zip(&other) {
        let label = format!("m{}", a.moment + 1);
        if a.lhs != b.lhs {
            diffs.push(format!("{label} lhs: {}", a.lhs.sub(&b.lhs).render(s.dimension)));
        }
        let pairs = [("conserved", &a.rhs_conserved, &b.rhs_conserved), ("equilibrium", &a.rhs_equilibrium, &b.rhs_equilibrium)];
        for (kind, x, y) in pairs {
            let xs: BTreeMap<_, _> = x.iter().cloned().collect();
            let ys: BTreeMap<_, _> = y.iter().cloned().collect();
            let keys: std::collections::BTreeSet<_> = xs.keys().chain(ys.keys()).copied().collect();
            for j in keys {
                let zero = OperatorPoly::zero();
                let (p, r) = (xs.get(&j).unwrap_or(&zero), ys.get(&j).unwrap_or(&zero));
                if p != r {
                    diffs.push(format!("{label} {kind} term m{}: {}", j + 1, p.sub(r).render(s.dimension)));
                }
            }
        }
    }
    Ok(InvarianceReport { identical: diffs.is_empty(), diffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::library;

    fn x(e: i32) -> LaurentPoly {
        LaurentPoly::shift(vec![e])
    }

    fn op(time: u32, p: &LaurentPoly) -> OperatorPoly {
        OperatorPoly::from_laurent(p).mul(&OperatorPoly::z().pow(time))
    }

    fn bind(pairs: &[(&str, BigRational)]) -> BTreeMap<Param, Coeff> {
        pairs.iter().map(|(n, v)| (Param::new(n), Coeff::rational(v.clone()))).collect()
    }

    #[test]
    fn d1q2_matches_hand_cofactors() {
        let f = reduce_single(&library::d1q2()).unwrap();
        let s = Coeff::param("s2");
        let (lam, c) = (Coeff::param("lambda"), Coeff::param("C"));
        let avg = x(1).add(&x(-1));
        let diff = x(1).sub(&x(-1));
        // z^2 - (2 - s)/2 (x + 1/x) z + (1 - s)
        let lhs = op(2, &LaurentPoly::one())
            .sub(&op(1, &avg.mul_coeff(&Coeff::int(2).sub(&s).div(&Coeff::int(2)).unwrap())))
            .add(&op(0, &LaurentPoly::constant(Coeff::one().sub(&s))));
        assert_eq!(f.lhs, lhs);
        let eq = op(1, &diff.mul_coeff(&s.div(&lam.mul(&Coeff::int(2))).unwrap()));
        let _ = c;
        assert_eq!(f.rhs_equilibrium, vec![(1, eq)]);
        assert!(f.rhs_conserved.is_empty());
        assert_eq!(f.steps(), 2);
    }

    #[test]
    fn lax_friedrichs_and_upwind_limits() {
        let f = reduce_single(&library::d1q2()).unwrap();
        let lf = f.substitute(&bind(&[("s2", BigRational::from_integer(1.into()))])).unwrap();
        assert_eq!(lf.steps(), 1);
        assert_eq!(lf.lhs.z_coeff(0), x(1).add(&x(-1)).mul_coeff(&Coeff::frac(-1, 2)));
        let up = f.substitute(&bind(&[("s2", BigRational::from_integer(1.into()))])).unwrap();
        let up = up.substitute(&[(Param::new("C"), Coeff::param("lambda"))].into_iter().collect()).unwrap();
        // m1 + m2eq terms combine to a pure shift once C = λ and m2eq = λ m1.
        let st = up.rhs_equilibrium[0].1.z_coeff(0).mul_coeff(&Coeff::param("lambda"));
        assert_eq!(up.lhs.z_coeff(0).neg().add(&st), x(1));
    }

    #[test]
    fn specialized_stencil_weights() {
        let f = reduce_single(&library::d1q2()).unwrap();
        let b: BTreeMap<Param, BigRational> = [("lambda", BigRational::from_integer(1.into())), ("C", BigRational::new(1.into(), 2.into())), ("s2", BigRational::new(3.into(), 2.into()))]
            .into_iter()
            .map(|(n, v)| (Param::new(n), v))
            .collect();
        let st = f.specialize_stencil(&b).unwrap();
        assert_eq!(st.levels, 2);
        assert_eq!(st.radius(), 1);
        let own_now: Vec<_> = st.terms.iter().filter(|t| t.source == Source::Conserved(0) && t.time == 0).collect();
        assert_eq!(own_now.len(), 2);
        assert!(own_now.iter().all(|t| t.weight == BigRational::new(1.into(), 4.into())));
        let old = st.terms.iter().find(|t| t.time == -1).unwrap();
        assert_eq!(old.weight, BigRational::new(1.into(), 2.into()));
        let mut one = b.clone();
        one.insert(Param::new("s2"), BigRational::from_integer(1.into()));
        assert_eq!(f.specialize_stencil(&one).unwrap().levels, 1);
        let mut missing = b;
        missing.remove(&Param::new("lambda"));
        assert!(matches!(f.specialize_stencil(&missing), Err(Error::Unbound(_))));
    }

    #[test]
    fn d1q3_two_conserved_family() {
        let fam = reduce_multi(&library::d1q3_two_conserved()).unwrap();
        assert_eq!(fam.len(), 2);
        for f in &fam {
            assert_eq!(f.steps(), 2);
            assert!(f.lhs.z_coeff(2).is_one());
        }
        // The density update reads the momentum; the momentum update only reads m3eq.
        assert_eq!(fam[0].rhs_conserved.len(), 1);
        assert!(fam[1].rhs_conserved.is_empty());
    }

    #[test]
    fn charpoly_form_agrees() {
        for s in [library::d1q2(), library::d1q3_two_conserved()] {
            assert_eq!(reduce_via_charpoly(&s).unwrap(), reduce_multi(&s).unwrap());
        }
    }

    #[test]
    fn invariance_examples() {
        let s = library::d1q2();
        for r in [Coeff::zero(), Coeff::one(), Coeff::frac(17, 10), Coeff::param("s1")] {
            let rep = invariance_check(&s, &[r]).unwrap();
            assert!(rep.identical, "{:?}", rep.diffs);
        }
        let mut perturbed = s.clone();
        perturbed.rates[1] = Coeff::frac(3, 2);
        let a = reduce_single(&s).unwrap();
        let b = reduce_single(&perturbed).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn triples_cover_both_sides() {
        let f = reduce_single(&library::d1q2()).unwrap();
        let t = f.triples();
        assert!(t.iter().any(|t| t.side == "lhs" && t.time == 1 && t.shift == vec![0] && t.coeff == "1"));
        assert!(t.iter().any(|t| t.field == "m2eq" && t.time == 0));
        assert!(f.render().starts_with("m1(t+dt) ="));
    }
}
