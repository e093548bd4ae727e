//! Dense matrices over a commutative ring: determinant, adjugate,
//! characteristic polynomial and the related identities.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{Field, QAlgebra, Ring};
use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Ring> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![R::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![R::one(); n])
    }

    pub fn diag(entries: &[R]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Column vector.
    pub fn column(v: Vec<R>) -> Self {
        let n = v.len();
        Matrix { rows: n, cols: 1, data: v }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<R> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<R> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<S: Ring, E>(&self, f: impl Fn(&R) -> std::result::Result<S, E>) -> std::result::Result<Matrix<S>, E> {
        let data = self.data.iter().map(f).collect::<std::result::Result<Vec<S>, E>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &R) -> Self {
        self.map(|a| a.mul(c))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> R {
        (0..self.rows.min(self.cols)).fold(R::zero(), |acc, i| acc.add(self.get(i, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Keeps only the entries with row and column in `keep`.
    pub fn cut(&self, keep: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            if keep.contains(&i) && keep.contains(&j) {
                self.get(i, j).clone()
            } else {
                R::zero()
            }
        })
    }

    /// Determinant by cofactor expansion with memoized minors.
    pub fn det(&self) -> R {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return R::one();
        }
        let rows: Vec<usize> = (0..n).collect();
        let mut memo = HashMap::new();
        self.minor_det(&rows, 0, full_mask(n), &mut memo)
    }

    /// Determinant of the submatrix on `rows[depth..]` and the columns in `mask`,
    /// expanding along the row `rows[depth]`.
    fn minor_det(&self, rows: &[usize], depth: usize, mask: u64, memo: &mut HashMap<u64, R>) -> R {
        if depth == rows.len() {
            return R::one();
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let r = rows[depth];
        let mut acc = R::zero();
        let mut pos = 0;
        for j in 0..self.cols {
            if mask & (1 << j) == 0 {
                continue;
            }
            let a = self.get(r, j);
            if !a.is_zero() {
                let sub = self.minor_det(rows, depth + 1, mask & !(1 << j), memo);
                if !sub.is_zero() {
                    let t = a.mul(&sub);
                    acc = if pos % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
                }
            }
            pos += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }

    /// Adjugate (transposed cofactor matrix).
    pub fn adjugate(&self) -> Self {
        assert!(self.is_square(), "adjugate of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return self.clone();
        }
        if n == 1 {
            return Self::identity(1);
        }
        let mut adj = Self::zeros(n, n);
        for i in 0..n {
            let rows: Vec<usize> = (0..n).filter(|r| *r != i).collect();
            let mut memo = HashMap::new();
            for j in 0..n {
                let minor = self.minor_det(&rows, 0, full_mask(n) & !(1 << j), &mut memo);
                let c = if (i + j) % 2 == 0 { minor } else { minor.neg() };
                adj.set(j, i, c);
            }
        }
        adj
    }

    /// `det(C + u vᵀ)` through `det(C) + vᵀ adj(C) u`.
    pub fn det_rank_one_update(&self, u: &[R], v: &[R]) -> R {
        assert_eq!(u.len(), self.rows);
        assert_eq!(v.len(), self.cols);
        let adj = self.adjugate();
        let mut acc = self.det();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc = acc.add(&v[i].mul(adj.get(i, j)).mul(&u[j]));
            }
        }
        acc
    }

    /// Rank-one matrix `u vᵀ`.
    pub fn outer(u: &[R], v: &[R]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i].mul(&v[j]))
    }
}

impl<R: QAlgebra> Matrix<R> {
    /// Coefficients `c_0..c_n` of `det(X I - C)` together with the adjugate
    /// obtained as a byproduct of the Faddeev–LeVerrier recursion.
    pub fn charpoly_with_adjugate(&self) -> (Vec<R>, Self) {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        let mut c = vec![R::zero(); n + 1];
        c[n] = R::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&Self::identity(n).scale(&c[n + 1 - k]));
            c[n - k] = self.mul(&m).trace().div_int(k as i64).neg();
        }
        let adj = if (n + 1).is_multiple_of(2) { m } else { m.neg() };
        (c, adj)
    }

    pub fn charpoly(&self) -> Vec<R> {
        self.charpoly_with_adjugate().0
    }

    /// `Σ c_k C^k`, the zero matrix by Cayley–Hamilton.
    pub fn cayley_hamilton_residual(&self) -> Self {
        let c = self.charpoly();
        let mut acc = Self::zeros(self.rows, self.cols);
        let mut power = Self::identity(self.rows);
        for ck in &c {
            acc = acc.add(&power.scale(ck));
            power = power.mul(self);
        }
        acc
    }
}

impl<R: Field> Matrix<R> {
    /// Inverse through `adj(C) / det(C)`.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.det().inv().ok_or(Error::NotInvertible)?;
        Ok(self.adjugate().scale(&d))
    }
}

fn full_mask(n: usize) -> u64 {
    assert!(n < 64, "matrix too large for cofactor expansion");
    (1u64 << n) - 1
}

impl<R: fmt::Debug> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[R]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}
