//! Reference lattice Boltzmann solver, execution of the reduced finite
//! difference schemes, exact equivalence checks and convergence rates.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::algebra::{rational_to_f64, Grid, QAlgebra};
use crate::error::{Error, Result};
use crate::fdreduce::{reduce_multi, Source, Stencil};
use crate::matrix::Matrix;
use crate::scheme::LbmScheme;

/// Number type the solvers run on.
pub trait Scalar: QAlgebra + PartialOrd + std::fmt::Debug {
    fn from_rational(r: &BigRational) -> Self {
        Self::one().scale(r)
    }
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for BigRational {
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
}

impl Scalar for f64 {
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Equilibrium as `Σ c Π m_k^e` over the conserved moments.
#[derive(Clone, Debug)]
struct PointwisePoly<S> {
    terms: Vec<(S, Vec<(usize, u32)>)>,
}

impl<S: Scalar> PointwisePoly<S> {
    fn eval(&self, m: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |acc, (c, exps)| {
            let mut t = c.clone();
            for (k, e) in exps {
                for _ in 0..*e {
                    t = t.mul(&m[*k]);
                }
            }
            acc.add(&t)
        })
    }
}

/// A scheme with every parameter replaced by a number.
#[derive(Clone, Debug)]
pub struct NumericScheme<S> {
    pub dimension: usize,
    pub conserved: usize,
    velocities: Vec<Vec<i32>>,
    moments: Matrix<S>,
    moments_inv: Matrix<S>,
    rates: Vec<S>,
    equilibria: Vec<PointwisePoly<S>>,
}

fn rational(c: &crate::algebra::Coeff, what: &str) -> Result<BigRational> {
    c.as_rational().ok_or_else(|| {
        Error::Unbound(c.params().first().map(|p| p.to_string()).unwrap_or_else(|| what.to_string()))
    })
}

impl<S: Scalar> NumericScheme<S> {
    /// Uses the bindings declared in the scheme.
    pub fn new(s: &LbmScheme) -> Result<Self> {
        Self::with_bindings(s, &s.bindings()?)
    }

    pub fn with_bindings(s: &LbmScheme, bindings: &BTreeMap<crate::algebra::Param, BigRational>) -> Result<Self> {
        s.check()?;
        let s = s.specialize(bindings)?;
        let conv = |c: &crate::algebra::Coeff| rational(c, "coefficient").map(|r| S::from_rational(&r));
        let moments = s.moments.try_map(conv)?;
        let moments_inv = s.moments_inverse()?.try_map(conv)?;
        let rates = s.rates.iter().map(conv).collect::<Result<_>>()?;
        let mut equilibria = Vec::new();
        for e in &s.equilibria {
            if !e.is_pointwise() {
                return Err(Error::Precondition("equilibria must not contain derivatives".into()));
            }
            let terms = e
                .terms()
                .map(|(m, c)| Ok((conv(c)?, m.exps().iter().map(|(j, k)| (j.moment, *k)).collect())))
                .collect::<Result<_>>()?;
            equilibria.push(PointwisePoly { terms });
        }
        Ok(NumericScheme {
            dimension: s.dimension,
            conserved: s.n(),
            velocities: s.velocities.clone(),
            moments,
            moments_inv,
            rates,
            equilibria,
        })
    }

    pub fn q(&self) -> usize {
        self.velocities.len()
    }

    /// `m_j^eq` on every cell from the conserved moments.
    fn equilibrium_grid(&self, j: usize, conserved: &[Grid<S>]) -> Grid<S> {
        if j < self.conserved {
            return conserved[j].clone();
        }
        let sizes = conserved[0].sizes().to_vec();
        let data = (0..conserved[0].len())
            .map(|x| {
                let m: Vec<S> = conserved.iter().map(|g| g.values()[x].clone()).collect();
                self.equilibria[j].eval(&m)
            })
            .collect();
        Grid::from_vec(&sizes, data)
    }

    /// Moments with the non-conserved ones at equilibrium.
    pub fn equilibrium_state(&self, conserved: &[Grid<S>]) -> Vec<Grid<S>> {
        (0..self.q()).map(|j| self.equilibrium_grid(j, conserved)).collect()
    }

    /// One collide-and-stream step on the moments.
    pub fn step(&self, m: &[Grid<S>]) -> Vec<Grid<S>> {
        let q = self.q();
        let n = self.conserved;
        let post: Vec<Grid<S>> = (0..q)
            .map(|j| {
                if j < n && self.rates[j].is_zero() {
                    return m[j].clone();
                }
                let eq = self.equilibrium_grid(j, &m[..n]);
                let mut out = m[j].clone();
                out.axpy(&self.rates[j], &eq.sub(&m[j]));
                out
            })
            .collect();
        let f: Vec<Grid<S>> = (0..q)
            .map(|k| {
                let mut fk = Grid::zeros(m[0].sizes());
                for (j, pj) in post.iter().enumerate() {
                    fk.axpy(self.moments_inv.get(k, j), pj);
                }
                fk.shifted(&self.velocities[k])
            })
            .collect();
        (0..q)
            .map(|i| {
                let mut mi = Grid::zeros(m[0].sizes());
                for (k, fk) in f.iter().enumerate() {
                    mi.axpy(self.moments.get(i, k), fk);
                }
                mi
            })
            .collect()
    }
}

/// All moments at times `0..=steps`, starting from equilibrium.
pub fn lbm_run<S: Scalar>(s: &NumericScheme<S>, initial: &[Grid<S>], steps: usize) -> Vec<Vec<Grid<S>>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s.equilibrium_state(initial));
    for _ in 0..steps {
        let next = s.step(out.last().unwrap());
        out.push(next);
    }
    out
}

/// Executable finite difference schemes for all conserved moments.
#[derive(Clone, Debug)]
pub struct FdRunner<S> {
    pub stencils: Vec<Stencil>,
    weights: Vec<Vec<S>>,
    scheme: NumericScheme<S>,
}

impl<S: Scalar> FdRunner<S> {
    pub fn new(s: &LbmScheme, bindings: &BTreeMap<crate::algebra::Param, BigRational>) -> Result<Self> {
        let stencils = reduce_multi(s)?
            .iter()
            .map(|f| f.specialize_stencil(bindings))
            .collect::<Result<Vec<_>>>()?;
        let weights = stencils.iter().map(|st| st.terms.iter().map(|t| S::from_rational(&t.weight)).collect()).collect();
        Ok(FdRunner { stencils, weights, scheme: NumericScheme::with_bindings(s, bindings)? })
    }

    /// Number of known time levels an update reads.
    pub fn levels(&self) -> usize {
        self.stencils.iter().map(|s| s.levels as usize).max().unwrap_or(1).max(1)
    }

    /// One update from the history of conserved moments, oldest level first.
    pub fn step(&self, history: &[Vec<Grid<S>>]) -> Result<Vec<Grid<S>>> {
        let needed = self.levels();
        if history.len() < needed {
            return Err(Error::History { needed, available: history.len() });
        }
        let newest = history.len() - 1;
        let mut eq_cache: BTreeMap<(usize, usize), Grid<S>> = BTreeMap::new();
        let mut out = Vec::with_capacity(self.stencils.len());
        for (st, ws) in self.stencils.iter().zip(&self.weights) {
            let mut next = Grid::zeros(history[newest][0].sizes());
            for (term, w) in st.terms.iter().zip(ws) {
                let level = newest as i64 + term.time as i64;
                if level < 0 {
                    return Err(Error::History { needed: (1 - term.time) as usize, available: history.len() });
                }
                let level = level as usize;
                let src = match term.source {
                    Source::Conserved(j) => history[level][j].clone(),
                    Source::Equilibrium(j) => eq_cache
                        .entry((level, j))
                        .or_insert_with(|| self.scheme.equilibrium_grid(j, &history[level]))
                        .clone(),
                };
                next.axpy(w, &src.shifted(&term.shift));
            }
            out.push(next);
        }
        Ok(out)
    }

    /// Continues a seed history of conserved moments for `steps` updates.
    pub fn run(&self, seed: Vec<Vec<Grid<S>>>, steps: usize) -> Result<Vec<Vec<Grid<S>>>> {
        let mut history = seed;
        for _ in 0..steps {
            let next = self.step(&history)?;
            history.push(next);
        }
        Ok(history)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub cells: Vec<usize>,
    pub steps: usize,
    pub warmup: usize,
    pub max_deviation: f64,
    /// True when the deviation is exactly zero (rational mode only).
    pub exact: bool,
}

/// Runs the kinetic scheme and its finite difference reduction from the same
/// data and returns the largest difference on the conserved moments. The
/// reduction is seeded with the first levels of the kinetic run.
pub fn equivalence_compare<S: Scalar>(
    s: &LbmScheme,
    bindings: &BTreeMap<crate::algebra::Param, BigRational>,
    initial: &[Grid<S>],
    steps: usize,
) -> Result<(S, EquivalenceReport)> {
    let runner = FdRunner::<S>::new(s, bindings)?;
    let n = s.n();
    let warmup = runner.levels();
    let lbm = lbm_run(&runner.scheme, initial, steps.max(warmup));
    let conserved: Vec<Vec<Grid<S>>> = lbm.iter().map(|m| m[..n].to_vec()).collect();
    let fd = runner.run(conserved[..warmup].to_vec(), steps.max(warmup) + 1 - warmup)?;
    let mut dev = S::zero();
    for (a, b) in conserved.iter().zip(&fd) {
        for (x, y) in a.iter().zip(b) {
            for (u, v) in x.values().iter().zip(y.values()) {
                let d = u.sub(v).abs();
                if d > dev {
                    dev = d;
                }
            }
        }
    }
    let report = EquivalenceReport {
        cells: initial[0].sizes().to_vec(),
        steps,
        warmup,
        max_deviation: dev.to_f64(),
        exact: dev.is_zero(),
    };
    Ok((dev, report))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dx: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub order: f64,
    pub warnings: Vec<String>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Observed order of the first conserved moment on `[0, 1)` against a
/// reference solution `exact(Δx, t, x)`, in the discrete max norm, for one-dimensional
/// schemes with `λ` bound. The other conserved moments start at zero.
pub fn convergence_order(
    s: &LbmScheme,
    exact: &dyn Fn(f64, f64, f64) -> f64,
    grids: &[usize],
    final_time: f64,
) -> Result<ConvergenceReport> {
    if s.dimension != 1 {
        return Err(Error::Precondition("convergence runs are one-dimensional".into()));
    }
    if grids.len() < 2 {
        return Err(Error::Precondition("at least two grids are needed".into()));
    }
    let bindings = s.bindings()?;
    let lambda = rational_to_f64(&s.lambda.eval(&bindings)?);
    let scheme = NumericScheme::<f64>::with_bindings(s, &bindings)?;
    let mut rows = Vec::new();
    for &cells in grids {
        let dx = 1.0 / cells as f64;
        let dt = dx / lambda;
        let steps = (final_time / dt).round() as usize;
        let t = steps as f64 * dt;
        let mut initial = vec![Grid::<f64>::zeros(&[cells]); s.n()];
        initial[0] = Grid::from_fn(&[cells], |i| exact(dx, 0.0, i[0] as f64 * dx));
        let mut m = scheme.equilibrium_state(&initial);
        for _ in 0..steps {
            m = scheme.step(&m);
        }
        let error = m[0]
            .values()
            .iter()
            .enumerate()
            .map(|(i, u)| (u - exact(dx, t, i as f64 * dx)).abs())
            .fold(0.0, f64::max);
        rows.push(ConvergenceRow { cells, dx, error });
    }
    let mut warnings = Vec::new();
    if rows.windows(2).any(|w| w[1].error >= w[0].error) {
        warnings.push("error does not decrease monotonically under refinement".into());
    }
    let order = log_log_slope(&rows.iter().map(|r| (r.dx, r.error)).collect::<Vec<_>>());
    Ok(ConvergenceReport { rows, order, warnings })
}
