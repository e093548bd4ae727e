use super::{LaurentPoly, OperatorPoly, QAlgebra, Ring};
use crate::error::{Error, Result};

/// Periodic grid function on a `d`-dimensional box, axis 0 varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<S> {
    sizes: Vec<usize>,
    data: Vec<S>,
}

impl<S: Ring> Grid<S> {
    pub fn zeros(sizes: &[usize]) -> Self {
        let n = sizes.iter().product();
        Grid { sizes: sizes.to_vec(), data: vec![S::zero(); n] }
    }

    pub fn from_vec(sizes: &[usize], data: Vec<S>) -> Self {
        assert_eq!(sizes.iter().product::<usize>(), data.len(), "grid size mismatch");
        Grid { sizes: sizes.to_vec(), data }
    }

    pub fn from_fn(sizes: &[usize], f: impl Fn(&[usize]) -> S) -> Self {
        let mut g = Self::zeros(sizes);
        let mut idx = vec![0; sizes.len()];
        for flat in 0..g.data.len() {
            let mut r = flat;
            for (k, n) in sizes.iter().enumerate() {
                idx[k] = r % n;
                r /= n;
            }
            g.data[flat] = f(&idx);
        }
        g
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// `(x^v f)(x) = f(x - v)` with periodic wrap; `v` may be shorter than `d`.
    pub fn shifted(&self, v: &[i32]) -> Self {
        if v.iter().all(|e| *e == 0) {
            return self.clone();
        }
        let sizes = self.sizes.clone();
        Self::from_fn(&sizes, |idx| {
            let mut flat = 0;
            let mut stride = 1;
            for (k, n) in sizes.iter().enumerate() {
                let shift = v.get(k).copied().unwrap_or(0) as i64;
                let src = (idx[k] as i64 - shift).rem_euclid(*n as i64) as usize;
                flat += src * stride;
                stride *= n;
            }
            self.data[flat].clone()
        })
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        assert_eq!(self.sizes, other.sizes, "grid shape mismatch");
        Grid {
            sizes: self.sizes.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Grid { sizes: self.sizes.clone(), data: self.data.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn mul_scalar(&self, c: &S) -> Self {
        self.map(|a| a.mul(c))
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: &S, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = a.add(&c.mul(b));
        }
    }

    pub fn sum(&self) -> S {
        self.data.iter().fold(S::zero(), |acc, v| acc.add(v))
    }
}

/// Time levels `u(t), u(t + Δt), ...` of a grid function; `z^k` reads level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridHistory<S> {
    pub levels: Vec<Grid<S>>,
}

impl<S: Ring> GridHistory<S> {
    pub fn new(levels: Vec<Grid<S>>) -> Self {
        GridHistory { levels }
    }
}

fn scalar_of<S: QAlgebra>(c: &crate::algebra::Coeff) -> Result<S> {
    let r = c.as_rational().ok_or_else(|| {
        Error::Unbound(c.params().first().map(|p| p.to_string()).unwrap_or_default())
    })?;
    Ok(S::one().scale(&r))
}

/// Applies a parameter-free space operator to a grid function.
pub fn apply_space_operator<S: QAlgebra>(op: &LaurentPoly, u: &Grid<S>) -> Result<Grid<S>> {
    let mut out = Grid::zeros(u.sizes());
    for (shift, c) in op.terms() {
        let w: S = scalar_of(c)?;
        out.axpy(&w, &u.shifted(&shift.padded(u.dim())));
    }
    Ok(out)
}

/// Applies a parameter-free operator polynomial to a history; the result is
/// the grid function at the base time of the history.
pub fn apply_operator<S: QAlgebra>(op: &OperatorPoly, u: &GridHistory<S>) -> Result<Grid<S>> {
    let needed = op.time_degree() as usize + 1;
    if u.levels.len() < needed {
        return Err(Error::History { needed, available: u.levels.len() });
    }
    let mut out = Grid::zeros(u.levels[0].sizes());
    for (key, c) in op.terms() {
        let w: S = scalar_of(c)?;
        let level = &u.levels[key.time as usize];
        out.axpy(&w, &level.shifted(&key.space.padded(level.dim())));
    }
    Ok(out)
}
