#![allow(dead_code)]

use lbmfd::algebra::{rational_to_f64, Coeff, Ring};
use lbmfd::matrix::Matrix;
use lbmfd::scheme::LbmScheme;
use lbmfd::series::{det_adj_derivatives, expand_resolvent, order_matrix, series_det_adj, taylor_det_adj, truncate_matrix, DiffKey, DiffOp};
use rand::Rng;

pub const STEP: f64 = 1e-4;
pub const TOL: f64 = 1e-6;

pub fn random_ints(rng: &mut impl Rng, shift: i64) -> Vec<Vec<i64>> {
    (0..4).map(|i| (0..4).map(|j| rng.gen_range(-3..=3) + if i == j { shift } else { 0 }).collect()).collect()
}

pub fn exact(m: &[Vec<i64>]) -> Matrix<Coeff> {
    Matrix::from_fn(4, 4, |i, j| Coeff::frac(m[i][j], 2))
}

pub fn to_f64(c: &Coeff) -> f64 {
    rational_to_f64(&c.as_rational().unwrap())
}

/// `|x - y| ≤ TOL · max(1, max |y|)` entrywise.
pub fn close(x: &Matrix<f64>, y: &Matrix<Coeff>) -> bool {
    let scale = y.entries().map(|v| to_f64(v).abs()).fold(1.0, f64::max);
    (0..x.rows()).all(|i| (0..x.cols()).all(|j| (x.get(i, j) - to_f64(y.get(i, j))).abs() <= TOL * scale))
}

pub fn scalar(x: f64) -> Matrix<f64> {
    Matrix::from_fn(1, 1, |_, _| x)
}

pub fn scalar_exact(x: &Coeff) -> Matrix<Coeff> {
    Matrix::from_fn(1, 1, |_, _| x.clone())
}


/// Central differences with step `STEP` on a random well-conditioned 4×4
/// sample against the closed forms. The difference quotients are evaluated
/// in exact arithmetic so that only the truncation error of the stencil
/// remains; with floats the mixed quotient loses about `eps/STEP²` to
/// cancellation.
pub fn finite_difference_sample(rng: &mut impl Rng) -> bool {
    let h = Coeff::frac(1, (1.0 / STEP).round() as i64);
    let (c, d, e) = (exact(&random_ints(rng, 6)), exact(&random_ints(rng, 0)), exact(&random_ints(rng, 0)));
    let der = det_adj_derivatives(&c, &d, &e).unwrap();
    let at = |a: i64, b: i64| c.add(&d.scale(&h.mul(&Coeff::int(a)))).add(&e.scale(&h.mul(&Coeff::int(b))));
    let first = Coeff::one().div(&h.mul(&Coeff::int(2))).unwrap();
    let second = Coeff::one().div(&h.mul(&h).mul(&Coeff::int(4))).unwrap();
    let det1 = at(1, 0).det().sub(&at(-1, 0).det()).mul(&first);
    let det2 = at(1, 1).det().sub(&at(1, -1).det()).sub(&at(-1, 1).det()).add(&at(-1, -1).det()).mul(&second);
    let adj1 = at(1, 0).adjugate().sub(&at(-1, 0).adjugate()).scale(&first);
    let adj2 = at(1, 1)
        .adjugate()
        .sub(&at(1, -1).adjugate())
        .sub(&at(-1, 1).adjugate())
        .add(&at(-1, -1).adjugate())
        .scale(&second);
    let f = |m: &Matrix<Coeff>| m.map(to_f64);
    close(&scalar(to_f64(&det1)), &scalar_exact(&der.det1))
        && close(&scalar(to_f64(&det2)), &scalar_exact(&der.det2))
        && close(&f(&adj1), &der.adj1)
        && close(&f(&adj2), &der.adj2)
}

/// Closed-form Taylor expansion of det and adj of the resolvent of `s`, all
/// rates made nonzero, against the product computed in the series ring.
pub fn resolvent_taylor_matches(s: &LbmScheme) -> bool {
    let s = lbmfd::maxwell::with_invertible_relaxation(s);
    let res = truncate_matrix(&expand_resolvent(&s, 2).unwrap(), 2);
    let zero = order_matrix(&res, 0);
    let c = zero.map(|d| d.coeff(&DiffKey::default()));
    if zero != c.map(|x| DiffOp::scalar(x.clone())) {
        return false;
    }
    let (det, adj) = series_det_adj(&res);
    let (tdet, tadj) = taylor_det_adj(&c, &order_matrix(&res, 1), &order_matrix(&res, 2)).unwrap();
    det.truncate(2) == tdet.truncate(2) && truncate_matrix(&adj, 2) == truncate_matrix(&tadj, 2)
}
