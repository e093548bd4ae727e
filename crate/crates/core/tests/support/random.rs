#![allow(dead_code)]

use std::collections::BTreeMap;

use lbmfd::algebra::{Coeff, Param, Ring};
use lbmfd::jet::JetPoly;
use lbmfd::matrix::Matrix;
use lbmfd::scheme::LbmScheme;
use rand::seq::SliceRandom;
use rand::Rng;

fn pick_rational(rng: &mut impl Rng, choices: &[(i64, i64)]) -> Coeff {
    let (n, d) = *choices.choose(rng).unwrap();
    Coeff::frac(n, d)
}

/// A random one-dimensional scheme with `q ≤ max_q`, one or two conserved
/// moments, symbolic `λ`, some symbolic rates and optionally a quadratic
/// equilibrium term.
pub fn random_scheme(rng: &mut impl Rng, max_q: usize, nonlinear: bool) -> LbmScheme {
    let q = rng.gen_range(2..=max_q);
    let conserved = if q > 2 && rng.gen_bool(0.4) { 2 } else { 1 };
    let mut pool: Vec<i32> = (-2..=2).collect();
    pool.shuffle(rng);
    let velocities: Vec<Vec<i32>> = pool[..q].iter().map(|c| vec![*c]).collect();
    let moments = loop {
        let m = Matrix::from_fn(q, q, |i, _| if i == 0 { Coeff::one() } else { Coeff::int(rng.gen_range(-2..=2)) });
        if !m.det().is_zero() {
            break m;
        }
    };
    let mut parameters: BTreeMap<Param, Option<num_rational::BigRational>> = BTreeMap::new();
    parameters.insert(Param::new("lambda"), None);
    let rates = (0..q)
        .map(|k| {
            if k < conserved {
                Coeff::zero()
            } else if rng.gen_bool(0.3) {
                let name = format!("s{}", k + 1);
                parameters.insert(Param::new(&name), None);
                Coeff::param(&name)
            } else {
                pick_rational(rng, &[(1, 2), (2, 3), (1, 1), (4, 3), (3, 2), (7, 4)])
            }
        })
        .collect();
    let weights = [(-1, 1), (-1, 2), (0, 1), (1, 3), (1, 2), (1, 1)];
    let mut equilibria: Vec<JetPoly> = (0..conserved).map(JetPoly::moment).collect();
    for _ in conserved..q {
        let mut e = JetPoly::zero();
        for j in 0..conserved {
            e = e.add(&JetPoly::moment(j).mul_coeff(&pick_rational(rng, &weights)));
        }
        if nonlinear && rng.gen_bool(0.5) {
            e = e.add(&JetPoly::moment(0).mul(&JetPoly::moment(0)).mul_coeff(&pick_rational(rng, &weights)));
        }
        equilibria.push(e);
    }
    LbmScheme {
        dimension: 1,
        velocities,
        lambda: Coeff::param("lambda"),
        moments,
        conserved,
        rates,
        equilibria,
        parameters,
    }
}
