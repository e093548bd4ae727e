#![allow(dead_code)]

//! Leading terms of det(ζI - 𝒜) and of the first row of its adjugate as the
//! first relaxation rate tends to zero, for a generic three-velocity scheme
//! with one conserved moment. The expected expressions are written out by
//! hand from the expansion of the resolvent.

use lbmfd::algebra::{Coeff, Param, Ring};
use lbmfd::matrix::Matrix;
use lbmfd::scheme::ScaleBy;
use lbmfd::series::{limit_matrix, resolvent_from_g, series_det_adj, DiffOp, Series};

pub const Q: usize = 3;

pub struct Generic {
    pub g: Matrix<DiffOp>,
    pub s: Vec<Coeff>,
    pub lambda: Coeff,
}

pub fn generic() -> Generic {
    let g = Matrix::from_fn(Q, Q, |i, j| DiffOp::dx(0).scale_by(&Coeff::param(&format!("g{}{}", i + 1, j + 1))));
    let s = (0..Q).map(|i| Coeff::param(&format!("s{}", i + 1))).collect();
    Generic { g, s, lambda: Coeff::param("lambda") }
}

fn c(x: &Coeff) -> DiffOp {
    DiffOp::scalar(x.clone())
}

fn inv(x: &Coeff) -> Coeff {
    Coeff::one().div(x).unwrap()
}

impl Generic {
    fn g(&self, i: usize, j: usize) -> DiffOp {
        self.g.get(i - 1, j - 1).clone()
    }
    fn s(&self, i: usize) -> Coeff {
        self.s[i - 1].clone()
    }
    /// `1/s_i - 1`
    fn h(&self, i: usize) -> Coeff {
        inv(&self.s(i)).sub(&Coeff::one())
    }
    /// `(1/s_i)(∂t + (1 - s_i) G_ii)`
    fn t(&self, i: usize) -> DiffOp {
        DiffOp::dt().add(&self.g(i, i).mul(&c(&Coeff::one().sub(&self.s(i))))).mul(&c(&inv(&self.s(i))))
    }
    fn pi(&self) -> Coeff {
        (2..=Q).fold(Coeff::one(), |acc, l| acc.mul(&self.s(l)))
    }
    fn sum_inv(&self) -> Coeff {
        (2..=Q).fold(Coeff::zero(), |acc, l| acc.add(&inv(&self.s(l))))
    }
    fn series(&self, orders: [DiffOp; 3]) -> Series<DiffOp> {
        let l = inv(&self.lambda);
        let [a, b, d] = orders;
        let pi = c(&self.pi());
        Series::new(vec![a.mul(&pi), b.mul(&pi).mul(&c(&l)), d.mul(&pi).mul(&c(&l.mul(&l)))], 2)
    }
}

pub fn computed(gen: &Generic) -> (Series<DiffOp>, Matrix<Series<DiffOp>>) {
    let res = resolvent_from_g(&gen.g, &gen.s, &gen.lambda, 2).unwrap();
    let (det, adj) = series_det_adj(&res);
    let s1 = Param::new("s1");
    (det.limit_at_zero(s1).unwrap(), limit_matrix(&adj, s1).unwrap())
}

fn dtt() -> DiffOp {
    DiffOp::dt().mul(&DiffOp::dt())
}

pub fn det_display(x: &Generic) -> Series<DiffOp> {
    let half = Coeff::frac(1, 2);
    let mut second = dtt().mul(&c(&half.add(&x.sum_inv())));
    second = second.add(&x.g(1, 1).mul(&DiffOp::dt()).mul(&c(&x.sum_inv())));
    let hg: DiffOp = (2..=Q).fold(DiffOp::zero(), |acc, i| acc.add(&x.g(i, i).mul(&c(&x.h(i)))));
    second = second.add(&hg.mul(&DiffOp::dt()));
    second = second.sub(&x.g(1, 1).mul(&x.g(1, 1)).mul(&c(&half)));
    for l in 2..=Q {
        second = second.sub(&x.g(1, l).mul(&x.g(l, 1)).mul(&c(&inv(&x.s(l)).sub(&half))));
    }
    second = second.add(&x.g(1, 1).mul(&hg));
    x.series([DiffOp::zero(), DiffOp::dt().add(&x.g(1, 1)), second])
}

pub fn adj11_display(x: &Generic, factor: i64) -> Series<DiffOp> {
    let first = (2..=Q).fold(DiffOp::dt().mul(&c(&x.sum_inv())), |acc, i| acc.add(&x.g(i, i).mul(&c(&x.h(i)))));
    let mut second = dtt().mul(&c(&x.sum_inv()));
    for i in 2..=Q {
        for l in 1..=Q {
            second = second.sub(&x.g(i, l).mul(&x.g(l, i)).mul(&c(&x.h(i))));
        }
    }
    let sum_t = (2..=Q).fold(DiffOp::zero(), |acc, i| acc.add(&x.t(i)));
    let f = c(&Coeff::int(factor));
    second = second.add(&sum_t.mul(&sum_t).mul(&f));
    for i in 2..=Q {
        second = second.sub(&x.t(i).mul(&x.t(i)).mul(&f));
        for l in 2..=Q {
            if l != i {
                second = second.sub(&x.g(i, l).mul(&x.g(l, i)).mul(&c(&x.h(i).mul(&x.h(l)))).mul(&f));
            }
        }
    }
    let half = c(&Coeff::frac(1, 2));
    x.series([DiffOp::one(), first, second.mul(&half)])
}

pub fn adj1j_display(x: &Generic, j: usize) -> Series<DiffOp> {
    let first = x.g(1, j).mul(&c(&x.h(j))).neg();
    let mut inner = x.g(1, 1).mul(&x.g(1, j));
    for l in 2..=Q {
        inner = inner.add(&x.g(1, l).mul(&x.g(l, j)));
    }
    inner = inner.add(&x.g(1, j).mul(&x.t(j)).mul(&c(&Coeff::int(2))));
    for l in 2..=Q {
        if l != j {
            inner = inner.add(&x.g(1, l).mul(&x.g(l, j)).mul(&c(&x.h(l).mul(&Coeff::int(2)))));
        }
    }
    let sum_t = (2..=Q).fold(DiffOp::zero(), |acc, i| acc.add(&x.t(i)));
    inner = inner.sub(&x.g(1, j).mul(&sum_t).mul(&c(&Coeff::int(2))));
    let second = inner.mul(&c(&x.h(j).mul(&Coeff::frac(1, 2))));
    x.series([DiffOp::zero(), first, second])
}

pub fn diff(a: &Series<DiffOp>, b: &Series<DiffOp>) -> Vec<String> {
    (0..=2)
        .filter_map(|k| {
            let d = a.coeff(k).sub(&b.coeff(k));
            (!d.is_zero()).then(|| format!("Δx^{k}: {}", d.render()))
        })
        .collect()
}

