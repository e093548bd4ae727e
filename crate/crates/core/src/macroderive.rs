//! Macroscopic equations at first and second order, from the closed formulas
//! and from the expansion of the corresponding finite difference schemes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::algebra::{Coeff, Param, Ring};
use crate::error::{Error, Result};
use crate::fdreduce::cut_decomposition;
use crate::jet::{Jet, JetPoly};
use crate::matrix::Matrix;
use crate::scheme::LbmScheme;
use crate::series::{build_g, expand_laurent, expand_time_shift, series_det_adj, DiffOp, Series};

/// `∂t m_i + Σ_k Δx^k orders[k] = O(Δx^{orders.len()})`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeEquation {
    pub moment: usize,
    pub orders: Vec<JetPoly>,
    /// Second-order terms before time derivatives were eliminated.
    pub unreduced: Option<JetPoly>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeSystem {
    pub order: u32,
    pub dimension: usize,
    pub equations: Vec<PdeEquation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdeComparison {
    pub equal: bool,
    pub diffs: Vec<String>,
}

impl PdeEquation {
    /// Total flux term with `Δx` kept as the symbol `dx_param`.
    pub fn flux_with(&self, dx: &Coeff) -> JetPoly {
        let mut out = JetPoly::zero();
        let mut w = Coeff::one();
        for o in &self.orders {
            out = out.add(&o.mul_coeff(&w));
            w = w.mul(dx);
        }
        out
    }

    pub fn render(&self, order: u32) -> String {
        let mut s = format!("dt(m{})", self.moment + 1);
        for (k, o) in self.orders.iter().enumerate() {
            if o.is_zero() {
                continue;
            }
            let body = o.render();
            match k {
                0 => {
                    if let Some(rest) = body.strip_prefix('-') {
                        let _ = write!(s, " - {rest}");
                    } else {
                        let _ = write!(s, " + {body}");
                    }
                }
                1 => {
                    let _ = write!(s, " + Δx*[{body}]");
                }
                _ => {
                    let _ = write!(s, " + Δx^{k}*[{body}]");
                }
            }
        }
        let _ = write!(s, " = O(Δx{})", if order == 1 { String::new() } else { format!("^{order}") });
        s
    }

    pub fn to_latex(&self, order: u32) -> String {
        let mut s = format!("\\partial_{{t}} m_{{{}}}", self.moment + 1);
        for (k, o) in self.orders.iter().enumerate() {
            if o.is_zero() {
                continue;
            }
            let body = o.to_latex();
            match k {
                0 => {
                    if let Some(rest) = body.strip_prefix('-') {
                        let _ = write!(s, " - {rest}");
                    } else {
                        let _ = write!(s, " + {body}");
                    }
                }
                1 => {
                    let _ = write!(s, " + \\Delta x \\left( {body} \\right)");
                }
                _ => {
                    let _ = write!(s, " + \\Delta x^{{{k}}} \\left( {body} \\right)");
                }
            }
        }
        let _ = write!(s, " = O(\\Delta x^{{{order}}})");
        s
    }
}

impl PdeSystem {
    pub fn render(&self) -> String {
        self.equations.iter().map(|e| e.render(self.order)).collect::<Vec<_>>().join("\n")
    }

    pub fn to_latex(&self) -> Vec<String> {
        self.equations.iter().map(|e| e.to_latex(self.order)).collect()
    }

    /// Substitutes parameter values in every coefficient.
    pub fn substitute(&self, values: &BTreeMap<Param, Coeff>) -> Result<PdeSystem> {
        let mut out = self.clone();
        for e in &mut out.equations {
            e.orders = e.orders.iter().map(|o| o.try_map(|c| c.substitute_all(values))).collect::<Result<_>>()?;
            e.unreduced = e.unreduced.as_ref().map(|u| u.try_map(|c| c.substitute_all(values))).transpose()?;
        }
        Ok(out)
    }
}

/// Term-by-term comparison of two systems of the same order.
pub fn pde_equal(a: &PdeSystem, b: &PdeSystem) -> PdeComparison {
    let mut diffs = Vec::new();
    if a.order != b.order {
        diffs.push(format!("orders differ: {} vs {}", a.order, b.order));
    }
    if a.equations.len() != b.equations.len() {
        diffs.push(format!("equation counts differ: {} vs {}", a.equations.len(), b.equations.len()));
    }
    for (x, y) in a.equations.iter().zip(&b.equations) {
        let n = x.orders.len().max(y.orders.len());
        for k in 0..n {
            let zero = JetPoly::zero();
            let p = x.orders.get(k).unwrap_or(&zero);
            let q = y.orders.get(k).unwrap_or(&zero);
            let d = p.sub(q);
            if !d.is_zero() {
                diffs.push(format!("m{} at Δx^{k}: {}", x.moment + 1, d.render()));
            }
        }
    }
    PdeComparison { equal: diffs.is_empty(), diffs }
}

/// The field `m_j^eq` (conserved equilibria are the moments themselves).
pub(crate) fn equilibrium(s: &LbmScheme, j: usize) -> JetPoly {
    if j < s.n() {
        JetPoly::moment(j)
    } else {
        s.equilibria[j].clone()
    }
}

/// `Γ1_i = Σ_{j<N} G_ij m_j + Σ_{j≥N} G_ij m_j^eq`.
pub fn gamma1(s: &LbmScheme, g: &Matrix<DiffOp>, i: usize) -> JetPoly {
    (0..s.q()).fold(JetPoly::zero(), |acc, j| acc.add(&g.get(i, j).apply(&equilibrium(s, j))))
}

pub fn derive_order1(s: &LbmScheme) -> Result<PdeSystem> {
    s.check()?;
    let g = build_g(s)?;
    let equations = (0..s.n())
        .map(|i| PdeEquation { moment: i, orders: vec![gamma1(s, &g, i)], unreduced: None })
        .collect();
    Ok(PdeSystem { order: 1, dimension: s.dimension, equations })
}

/// Second-order system from the closed formula with the factors `1/s_j - 1/2`.
pub fn derive_order2_closed(s: &LbmScheme) -> Result<PdeSystem> {
    s.check()?;
    let g = build_g(s)?;
    let n = s.n();
    let q = s.q();
    let gammas: Vec<JetPoly> = (0..n).map(|i| gamma1(s, &g, i)).collect();
    let inv_lambda = Coeff::one().div(&s.lambda)?;
    let half = Coeff::frac(1, 2);
    let mut equations = Vec::new();
    for (i, gamma) in gammas.iter().enumerate() {
        let mut second = JetPoly::zero();
        for j in n..q {
            let henon = Coeff::one().div(&s.rates[j])?.sub(&half);
            let mut bracket = JetPoly::zero();
            for (l, gl) in gammas.iter().enumerate() {
                bracket = bracket.add(&s.equilibria[j].partial(&Jet::field(l)).mul(gl));
            }
            for l in 0..q {
                bracket = bracket.sub(&g.get(j, l).apply(&equilibrium(s, l)));
            }
            second = second.add(&g.get(i, j).apply(&bracket).mul_coeff(&henon));
        }
        equations.push(PdeEquation {
            moment: i,
            orders: vec![gamma.clone(), second.mul_coeff(&inv_lambda)],
            unreduced: None,
        });
    }
    Ok(PdeSystem { order: 2, dimension: s.dimension, equations })
}

/// Replaces every time derivative using `∂t m_j = rules[j]`, differentiating
/// the rules as needed, until only space derivatives remain.
pub fn eliminate_time_derivatives(p: &JetPoly, rules: &[JetPoly]) -> Result<JetPoly> {
    if let Some(r) = rules.iter().find(|r| r.has_time_jets()) {
        return Err(Error::Elimination(format!("rule {} contains time derivatives", r.render())));
    }
    let mut out = p.clone();
    // Each pass lowers the highest time order by one.
    let limit = 4 * (p.max_time_order() as usize + 1) * (1 + out.jets().len());
    for _ in 0..=limit {
        let Some(jet) = out.jets().into_iter().find(|j| j.time > 0) else {
            return Ok(out);
        };
        let rule = rules
            .get(jet.moment)
            .ok_or_else(|| Error::Elimination(format!("no rule for the time derivative of m{}", jet.moment + 1)))?;
        let value = rule.derive(jet.time - 1, jet.space());
        out = out.substitute(&jet, &value);
    }
    Err(Error::Elimination("time derivative elimination did not terminate".into()))
}

/// Turns developed equations `Σ_k Δx^k E_k = 0`, one per conserved moment,
/// into a PDE system: `E_0` must vanish, `E_1` fixes the normalization and
/// the first-order flux, higher terms are reduced to space derivatives.
pub fn pde_from_developed(developed: &[Vec<JetPoly>], order: u32, dimension: usize) -> Result<PdeSystem> {
    let mut firsts = Vec::new();
    let mut scales = Vec::new();
    for (i, e) in developed.iter().enumerate() {
        let zero = JetPoly::zero();
        let e0 = e.first().unwrap_or(&zero);
        if !e0.is_zero() {
            return Err(Error::Consistency(format!("nonzero Δx^0 term for m{}: {}", i + 1, e0.render())));
        }
        let e1 = e.get(1).unwrap_or(&zero);
        let dt = Jet::new(i, 1, vec![]);
        let kappa = e1.linear_coeff(&dt);
        if kappa.is_zero() {
            return Err(Error::Consistency(format!("no time derivative of m{} at first order", i + 1)));
        }
        let inv = Coeff::one().div(&kappa)?;
        let flux = e1.mul_coeff(&inv).sub(&JetPoly::jet(dt));
        if flux.has_time_jets() {
            return Err(Error::Elimination(format!("first-order terms of m{} contain time derivatives: {}", i + 1, flux.render())));
        }
        firsts.push(flux);
        scales.push(inv);
    }
    let rules: Vec<JetPoly> = firsts.iter().map(|f| f.neg()).collect();
    let mut equations = Vec::new();
    for (i, e) in developed.iter().enumerate() {
        let mut orders = vec![firsts[i].clone()];
        let mut unreduced = None;
        for k in 2..=order as usize {
            let raw = e.get(k).cloned().unwrap_or_else(JetPoly::zero).mul_coeff(&scales[i]);
            if k == 2 {
                unreduced = Some(raw.clone());
            }
            orders.push(eliminate_time_derivatives(&raw, &rules)?);
        }
        equations.push(PdeEquation { moment: i, orders, unreduced });
    }
    Ok(PdeSystem { order, dimension, equations })
}

/// Applies a row of operator series to fields and collects the orders.
pub(crate) fn apply_row(row: &[(Series<DiffOp>, JetPoly)], r: u32) -> Vec<JetPoly> {
    (0..=r as usize)
        .map(|k| row.iter().fold(JetPoly::zero(), |acc, (s, f)| acc.add(&s.coeff(k).apply(f))))
        .collect()
}

/// Developed equation of the corresponding finite difference scheme for
/// each conserved moment, computed in the truncated series ring with the
/// scheme's own relaxation rates.
pub fn developed_equations(s: &LbmScheme, r: u32) -> Result<Vec<Vec<Series<DiffOp>>>> {
    let (a, b) = s.scheme_matrices()?;
    let q = s.q();
    let n = s.n();
    let aa = a.map(|p| expand_laurent(p, r));
    let bb = b.map(|p| expand_laurent(p, r));
    let zeta = expand_time_shift(&s.lambda, 1, r)?;
    let unshift = expand_time_shift(&s.lambda, -(n as i32 - 1), r)?;
    let mut out = Vec::new();
    for i in 0..n {
        let (ai, diamond) = cut_decomposition(&aa, i, n);
        let resolvent = Matrix::identity(q).scale(&zeta).sub(&ai);
        let (det, adj) = series_det_adj(&resolvent);
        let row = adj.row(i);
        let dot = |col: &dyn Fn(usize) -> Series<DiffOp>| {
            row.iter().enumerate().fold(Series::zero(), |acc: Series<DiffOp>, (k, x)| acc.add(&x.mul(&col(k))))
        };
        // Coefficient series in front of each m_j (j < N) and each m_j^eq (j ≥ N),
        // all moved to the left-hand side.
        let mut coeffs = Vec::with_capacity(q);
        for j in 0..q {
            let c = if j == i {
                det.sub(&dot(&|k| bb.get(k, i).clone()))
            } else if j < n {
                dot(&|k| diamond.get(k, j).add(bb.get(k, j))).neg()
            } else {
                dot(&|k| bb.get(k, j).clone()).neg()
            };
            coeffs.push(c.mul(&unshift));
        }
        out.push(coeffs);
    }
    Ok(out)
}

/// The developed equations applied to the fields.
fn developed_fields(s: &LbmScheme, coeffs: &[Vec<Series<DiffOp>>], r: u32) -> Vec<Vec<JetPoly>> {
    coeffs
        .iter()
        .map(|row| {
            let pairs: Vec<_> = row.iter().enumerate().map(|(j, c)| (c.clone(), equilibrium(s, j))).collect();
            apply_row(&pairs, r)
        })
        .collect()
}

/// Macroscopic equations obtained by expanding the corresponding finite
/// difference scheme, with the conserved rates set to zero.
pub fn derive_via_series(s: &LbmScheme, order: u32) -> Result<PdeSystem> {
    s.check()?;
    let s = s.canonical();
    let coeffs = developed_equations(&s, order)?;
    pde_from_developed(&developed_fields(&s, &coeffs, order), order, s.dimension)
}

/// Same route with symbolic nonzero conserved rates, removed by a limit
/// after the series computation.
pub fn derive_via_series_regularized(s: &LbmScheme, order: u32) -> Result<PdeSystem> {
    s.check()?;
    let params: Vec<Param> = (0..s.n()).map(|i| Param::new(&format!("sigma{}", i + 1))).collect();
    let reg = s.with_conserved_rates(&params.iter().map(|p| Coeff::of(*p)).collect::<Vec<_>>());
    let mut coeffs = developed_equations(&reg, order)?;
    for row in &mut coeffs {
        for c in row.iter_mut() {
            for p in &params {
                *c = c.limit_at_zero(*p)?;
            }
        }
    }
    pde_from_developed(&developed_fields(s, &coeffs, order), order, s.dimension)
}

/// Checks that, at second order, every non-conserved rate enters only
/// through `h_j = 1/s_j - 1/2`: the correction is affine-free and linear in
/// each `h_j` and vanishes when all `h_j` do.
pub fn henon_pattern_holds(system: &PdeSystem, s: &LbmScheme) -> Result<bool> {
    let mut values = BTreeMap::new();
    let mut hs = Vec::new();
    for j in s.n()..s.q() {
        let Some(p) = s.rates[j].params().first().copied().filter(|_| s.rates[j].params().len() == 1) else {
            continue;
        };
        if s.rates[j] != Coeff::of(p) {
            continue;
        }
        let h = Param::new(&format!("h{}", j + 1));
        // s = 1/(h + 1/2)
        values.insert(p, Coeff::one().div(&Coeff::of(h).add(&Coeff::frac(1, 2)))?);
        hs.push(h);
    }
    let zeros: BTreeMap<Param, Coeff> = hs.iter().map(|h| (*h, Coeff::zero())).collect();
    for e in &system.equations {
        let Some(second) = e.orders.get(1) else { continue };
        for (_, c) in second.terms() {
            let c = c.substitute_all(&values)?;
            if !c.substitute_all(&zeros)?.is_zero() {
                return Ok(false);
            }
            if hs.iter().any(|h| c.denom().degree_in(h) > 0 || c.numer().degree_in(h) > 1) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::library;

    fn dxj(k: u32) -> JetPoly {
        JetPoly::jet(Jet::new(0, 0, vec![k]))
    }

    fn d1q2_expected() -> PdeSystem {
        let lam = Coeff::param("lambda");
        let c = Coeff::param("C");
        let s2 = Coeff::param("s2");
        let henon = Coeff::one().div(&s2).unwrap().sub(&Coeff::frac(1, 2));
        let factor = Coeff::one().sub(&c.mul(&c).div(&lam.mul(&lam)).unwrap());
        let diffusion = lam.mul(&henon).mul(&factor).neg();
        PdeSystem {
            order: 2,
            dimension: 1,
            equations: vec![PdeEquation {
                moment: 0,
                orders: vec![dxj(1).mul_coeff(&c), dxj(2).mul_coeff(&diffusion)],
                unreduced: None,
            }],
        }
    }

    #[test]
    fn d1q2_three_routes() {
        let s = library::d1q2();
        let expected = d1q2_expected();
        let closed = derive_order2_closed(&s).unwrap();
        assert!(pde_equal(&closed, &expected).equal, "{:?}", pde_equal(&closed, &expected).diffs);
        let series = derive_via_series(&s, 2).unwrap();
        assert!(pde_equal(&series, &expected).equal, "{:?}", pde_equal(&series, &expected).diffs);
        let reg = derive_via_series_regularized(&s, 2).unwrap();
        assert!(pde_equal(&reg, &expected).equal);
        let o1 = derive_order1(&s).unwrap();
        assert_eq!(o1.equations[0].orders, vec![dxj(1).mul_coeff(&Coeff::param("C"))]);
        assert!(pde_equal(&derive_via_series(&s, 1).unwrap(), &o1).equal);
        assert!(henon_pattern_holds(&closed, &s).unwrap());
    }

    #[test]
    fn d1q2_special_values() {
        let s = library::d1q2();
        let closed = derive_order2_closed(&s).unwrap();
        let two: BTreeMap<Param, Coeff> = [(Param::new("s2"), Coeff::int(2))].into_iter().collect();
        assert!(closed.substitute(&two).unwrap().equations[0].orders[1].is_zero());
        let exact: BTreeMap<Param, Coeff> = [(Param::new("C"), Coeff::param("lambda"))].into_iter().collect();
        assert!(closed.substitute(&exact).unwrap().equations[0].orders[1].is_zero());
    }

    #[test]
    fn elimination_examples() {
        let c = Coeff::param("C");
        let rule = dxj(1).mul_coeff(&c).neg();
        let tt = JetPoly::jet(Jet::new(0, 2, vec![]));
        assert_eq!(eliminate_time_derivatives(&tt, &[rule]).unwrap(), dxj(2).mul_coeff(&c.mul(&c)));
        let m = JetPoly::moment(0);
        let burgers = m.mul(&dxj(1)).neg();
        let p = m.mul(&m).derive(1, &[]);
        let out = eliminate_time_derivatives(&p, &[burgers]).unwrap();
        assert_eq!(out, m.mul(&m).mul(&dxj(1)).mul_coeff(&Coeff::int(-2)));
        let bad = JetPoly::jet(Jet::new(0, 1, vec![]));
        assert!(eliminate_time_derivatives(&m, &[bad]).is_err());
    }

    #[test]
    fn burgers_flux() {
        let mut s = library::d1q2();
        s.equilibria[1] = JetPoly::moment(0).mul(&JetPoly::moment(0)).mul_coeff(&Coeff::frac(1, 2));
        let g = build_g(&s).unwrap();
        assert_eq!(gamma1(&s, &g, 0), JetPoly::moment(0).mul(&dxj(1)));
        let closed = derive_order2_closed(&s).unwrap();
        let series = derive_via_series(&s, 2).unwrap();
        assert!(pde_equal(&closed, &series).equal, "{:?}", pde_equal(&closed, &series).diffs);
    }

    #[test]
    fn d1q3_two_conserved_routes() {
        let s = library::d1q3_two_conserved();
        for order in [1, 2] {
            let series = derive_via_series(&s, order).unwrap();
            let closed = if order == 1 { derive_order1(&s).unwrap() } else { derive_order2_closed(&s).unwrap() };
            let cmp = pde_equal(&series, &closed);
            assert!(cmp.equal, "order {order}: {:?}", cmp.diffs);
        }
    }

    #[test]
    fn comparison_reports_differences() {
        let a = d1q2_expected();
        let mut b = a.clone();
        b.equations[0].orders[1] = dxj(2).mul_coeff(&Coeff::param("lambda").neg().mul(&Coeff::one().div(&Coeff::param("s2")).unwrap()));
        let cmp = pde_equal(&a, &b);
        assert!(!cmp.equal);
        assert_eq!(cmp.diffs.len(), 1);
        assert!(pde_equal(&a, &a).equal);
    }

    #[test]
    fn rendering() {
        let text = d1q2_expected().render();
        assert!(text.starts_with("dt(m1) + C*dx(m1) + Δx*["), "{text}");
        assert!(text.ends_with("= O(Δx^2)"));
        let tex = d1q2_expected().to_latex();
        assert!(tex[0].starts_with("\\partial_{t} m_{1} + C \\partial_{x} m_{1}"), "{}", tex[0]);
    }
}
