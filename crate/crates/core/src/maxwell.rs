//! Maxwell iteration on the lattice Boltzmann scheme, an independent route to
//! the macroscopic equations, and the quasi-equilibrium check.

use crate::algebra::{Coeff, Ring};
use crate::error::{Error, Result};
use crate::jet::JetPoly;
use crate::macroderive::{apply_row, equilibrium, pde_from_developed, PdeSystem};
use crate::matrix::Matrix;
use crate::scheme::LbmScheme;
use crate::series::{expand_laurent, expand_stream, expand_time_shift, series_det_adj, DiffOp, Series};

/// `m^(k)`: for each moment, its terms by power of `Δx` up to `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellState {
    pub k: u32,
    pub moments: Vec<Vec<JetPoly>>,
    pub order: u32,
}

/// `ζ T̄ - I`, with `T̄` the moments-stream matrix with reversed velocities.
pub fn expand_conj_stream(s: &LbmScheme, r: u32) -> Result<Matrix<Series<DiffOp>>> {
    let zeta = expand_time_shift(&s.lambda, 1, r)?;
    let tbar = expand_stream(s, r, true)?;
    Ok(tbar.scale(&zeta).sub(&Matrix::identity(s.q())))
}

/// Conserved rates left at zero are set to one: the iteration needs `S` invertible.
pub fn with_invertible_relaxation(s: &LbmScheme) -> LbmScheme {
    let rates: Vec<Coeff> = s.rates[..s.n()]
        .iter()
        .map(|r| if r.is_zero() { Coeff::one() } else { r.clone() })
        .collect();
    s.with_conserved_rates(&rates)
}

/// `Σ_{r≤k} (-S⁻¹ (ζT̄ - I))^r` truncated at order `r_max`.
fn iteration_operator(s: &LbmScheme, k: u32, r_max: u32) -> Result<Matrix<Series<DiffOp>>> {
    let q = s.q();
    let mut inv = Vec::with_capacity(q);
    for (j, rate) in s.rates.iter().enumerate() {
        if rate.is_zero() {
            return Err(Error::SingularRelaxation(j + 1));
        }
        inv.push(Series::constant(DiffOp::scalar(Coeff::one().div(rate)?)));
    }
    let step = Matrix::diag(&inv).mul(&expand_conj_stream(s, r_max)?).neg();
    let mut power = Matrix::identity(q);
    let mut sum = Matrix::identity(q);
    for _ in 0..k {
        power = power.mul(&step);
        sum = sum.add(&power);
    }
    Ok(sum)
}

/// Runs `k ≤ 2` steps of the iteration from `m^(0) = m^eq`. All rates,
/// conserved ones included, must be nonzero.
pub fn maxwell_iterate(s: &LbmScheme, k: u32) -> Result<MaxwellState> {
    if k > 2 {
        return Err(Error::Precondition(format!("Maxwell iteration is limited to k ≤ 2, got {k}")));
    }
    s.check()?;
    let op = iteration_operator(s, k, k)?;
    let q = s.q();
    let moments = (0..q)
        .map(|i| {
            let row: Vec<_> = (0..q).map(|j| (op.get(i, j).clone(), equilibrium(s, j))).collect();
            apply_row(&row, k)
        })
        .collect();
    Ok(MaxwellState { k, moments, order: k })
}

/// Macroscopic equations from `m_i - m_i^(order) = O(Δx^{order+1})` on the
/// conserved rows. Conserved rates equal to zero are replaced by one.
pub fn maxwell_pde(s: &LbmScheme, order: u32) -> Result<PdeSystem> {
    if !(1..=2).contains(&order) {
        return Err(Error::Precondition(format!("order must be 1 or 2, got {order}")));
    }
    let s = with_invertible_relaxation(s);
    let state = maxwell_iterate(&s, order)?;
    let developed: Vec<Vec<JetPoly>> = (0..s.n())
        .map(|i| {
            let mut e: Vec<JetPoly> = state.moments[i].iter().map(|t| t.neg()).collect();
            e[0] = e[0].add(&JetPoly::moment(i));
            e
        })
        .collect();
    pde_from_developed(&developed, order, s.dimension)
}

/// With one conserved moment and `s_1 ≠ 0`, the finite difference relation
/// on a non-conserved row reads `s_1 Π m_i = s_1 Π m_i^eq` at leading order.
pub fn quasi_equilibrium_check(s: &LbmScheme) -> Result<bool> {
    s.check()?;
    if s.n() != 1 {
        return Err(Error::Precondition("quasi-equilibrium check needs exactly one conserved moment".into()));
    }
    if s.rates[0].is_zero() {
        return Err(Error::Precondition("quasi-equilibrium check needs s1 ≠ 0".into()));
    }
    let q = s.q();
    let (a, b) = s.scheme_matrices()?;
    let aa = a.map(|p| expand_laurent(p, 0));
    let bb = b.map(|p| expand_laurent(p, 0));
    let zeta = expand_time_shift(&s.lambda, 1, 0)?;
    let (det, adj) = series_det_adj(&Matrix::identity(q).scale(&zeta).sub(&aa));
    let adj_b = adj.mul(&bb);
    let lead = det.coeff(0);
    if lead.is_zero() {
        return Ok(false);
    }
    Ok((1..q).all(|i| (0..q).all(|j| {
        let expected = if i == j { lead.clone() } else { DiffOp::zero() };
        adj_b.get(i, j).coeff(0) == expected
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Param;
    use crate::jet::Jet;
    use crate::macroderive::{derive_order1, derive_order2_closed, derive_via_series, pde_equal};
    use crate::scheme::library;
    use crate::scheme::ScaleBy;
    use crate::series::{build_g, lift_matrix, truncate_matrix};
    use std::collections::BTreeMap;

    #[test]
    fn conj_stream_first_order() {
        let s = library::d1q2();
        let x = expand_conj_stream(&s, 2).unwrap();
        let g = build_g(&s).unwrap();
        let inv = Coeff::one().div(&s.lambda).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut expected = g.get(i, j).clone();
                if i == j {
                    expected = expected.add(&DiffOp::dt());
                }
                assert_eq!(x.get(i, j).coeff(0), DiffOp::zero());
                assert_eq!(x.get(i, j).coeff(1), expected.scale_by(&inv));
            }
        }
        let t = expand_stream(&s, 3, false).unwrap();
        let tbar = expand_stream(&s, 3, true).unwrap();
        assert_eq!(truncate_matrix(&t.mul(&tbar), 3), truncate_matrix(&lift_matrix(&Matrix::identity(2), 3), 3));
    }

    #[test]
    fn conj_stream_without_velocities() {
        let mut s = library::d1q2();
        s.velocities = vec![vec![0], vec![0]];
        let x = expand_conj_stream(&s, 2).unwrap();
        let zeta = expand_time_shift(&s.lambda, 1, 2).unwrap();
        let expected = zeta.sub(&Series::constant(DiffOp::one()));
        assert_eq!(x.get(0, 0), &expected);
        assert_eq!(x.get(0, 1), &Series::zero().truncate(2));
    }

    #[test]
    fn iterate_examples() {
        let s = with_invertible_relaxation(&library::d1q2());
        let m0 = maxwell_iterate(&s, 0).unwrap();
        assert_eq!(m0.moments[0], vec![JetPoly::moment(0)]);
        assert_eq!(m0.moments[1], vec![s.equilibria[1].clone()]);
        let m1 = maxwell_iterate(&s, 1).unwrap();
        let c = Coeff::param("C");
        let lam = Coeff::param("lambda");
        // m1 - (1/λ)(∂t m1 + C ∂x m1), with s1 = 1
        let expected = JetPoly::jet(Jet::new(0, 1, vec![]))
            .add(&JetPoly::jet(Jet::new(0, 0, vec![1])).mul_coeff(&c))
            .mul_coeff(&Coeff::one().div(&lam).unwrap())
            .neg();
        assert_eq!(m1.moments[0], vec![JetPoly::moment(0), expected]);
        assert!(matches!(maxwell_iterate(&library::d1q2(), 1), Err(Error::SingularRelaxation(1))));
        assert!(maxwell_iterate(&s, 3).is_err());
    }

    #[test]
    fn d1q2_routes_agree() {
        let s = library::d1q2();
        assert!(pde_equal(&maxwell_pde(&s, 1).unwrap(), &derive_order1(&s).unwrap()).equal);
        let m2 = maxwell_pde(&s, 2).unwrap();
        let cmp = pde_equal(&m2, &derive_order2_closed(&s).unwrap());
        assert!(cmp.equal, "{:?}", cmp.diffs);
        let two: BTreeMap<Param, Coeff> = [(Param::new("s2"), Coeff::int(2))].into_iter().collect();
        assert!(m2.substitute(&two).unwrap().equations[0].orders[1].is_zero());
    }

    #[test]
    fn conserved_rate_does_not_matter() {
        let s = library::d1q2().with_conserved_rates(&[Coeff::param("s1")]);
        let cmp = pde_equal(&maxwell_pde(&s, 2).unwrap(), &derive_via_series(&s, 2).unwrap());
        assert!(cmp.equal, "{:?}", cmp.diffs);
    }

    #[test]
    fn d1q3_routes_agree() {
        let s = library::d1q3_two_conserved();
        for order in [1, 2] {
            let cmp = pde_equal(&maxwell_pde(&s, order).unwrap(), &derive_via_series(&s, order).unwrap());
            assert!(cmp.equal, "order {order}: {:?}", cmp.diffs);
        }
    }

    #[test]
    fn quasi_equilibrium() {
        let s = library::d1q2();
        assert!(quasi_equilibrium_check(&s.with_conserved_rates(&[Coeff::one()])).unwrap());
        assert!(quasi_equilibrium_check(&s.with_conserved_rates(&[Coeff::param("s1")])).unwrap());
        assert!(matches!(quasi_equilibrium_check(&s), Err(Error::Precondition(_))));
    }

    /// `adj(ζI - 𝒜) ℬ = det(ζI - 𝒜) Σ_{r≤R} (-S⁻¹(ζT̄ - I))^r + O(Δx^{R+1})`.
    #[test]
    fn geometric_series_identity() {
        let s = library::d1q2().with_conserved_rates(&[Coeff::param("s1")]);
        let r = 3;
        let (a, b) = s.scheme_matrices().unwrap();
        let aa = a.map(|p| expand_laurent(p, r));
        let bb = b.map(|p| expand_laurent(p, r));
        let zeta = expand_time_shift(&s.lambda, 1, r).unwrap();
        let (det, adj) = series_det_adj(&Matrix::identity(2).scale(&zeta).sub(&aa));
        let lhs = adj.mul(&bb);
        let rhs = iteration_operator(&s, r, r).unwrap().scale(&det);
        assert_eq!(truncate_matrix(&lhs, r), truncate_matrix(&rhs, r));
    }
}
