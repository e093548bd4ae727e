//! Command implementations and report rendering behind the `lbmfd` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use lbmfd::algebra::{Coeff, Grid, OperatorPoly, Param, Ring};
use lbmfd::fdreduce::{invariance_check, reduce_multi, reduce_via_charpoly, StencilTriple};
use lbmfd::macroderive::{derive_order1, derive_order2_closed, derive_via_series, pde_equal, PdeSystem};
use lbmfd::matrix::Matrix;
use lbmfd::maxwell::{maxwell_pde, quasi_equilibrium_check};
use lbmfd::numeric::{convergence_order, equivalence_compare, ConvergenceReport, EquivalenceReport};
use lbmfd::scheme::{LbmScheme, ValidationReport};
use lbmfd::schemefile::parse_scheme;
use lbmfd::jet::Jet;
use num_rational::BigRational;
use serde::Serialize;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub passed: bool,
    pub scheme: Option<SchemeSummary>,
    pub validation: Option<ValidationReport>,
    pub fd_schemes: Vec<FdSection>,
    pub pdes: Vec<PdeSection>,
    pub checks: Vec<Verdict>,
    pub equivalence: Option<EquivalenceReport>,
    pub convergence: Option<ConvergenceReport>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemeSummary {
    pub path: String,
    pub dimension: usize,
    pub velocities: usize,
    pub conserved: usize,
    pub free_parameters: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FdSection {
    pub moment: usize,
    pub steps: u32,
    pub text: String,
    pub triples: Vec<StencilTriple>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeSection {
    pub route: String,
    pub order: u32,
    pub equations: Vec<String>,
    pub latex: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// Single Fourier mode of the second-order equation.
    SecondOrder,
    /// Pure transport at the first-order speed.
    Advection,
}

#[derive(Clone, Debug)]
pub enum Command {
    Validate,
    DeriveFd,
    EquivalentEqs { order: u32 },
    Maxwell { order: u32 },
    Check,
    Simulate { cells: usize, steps: usize, exact: bool },
    Convergence { grids: Vec<usize>, reference: Reference, final_time: f64 },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::DeriveFd => "derive-fd",
            Command::EquivalentEqs { .. } => "equivalent-eqs",
            Command::Maxwell { .. } => "maxwell",
            Command::Check => "check",
            Command::Simulate { .. } => "simulate",
            Command::Convergence { .. } => "convergence",
        }
    }
}

impl Report {
    /// True when the scheme is valid and every verdict passed.
    pub fn all_passed(&self) -> bool {
        self.validation.as_ref().is_none_or(|v| v.is_valid()) && self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: Vec<String>) {
        self.checks.push(Verdict { name: name.into(), passed, detail });
    }

    fn pde(&mut self, route: &str, p: &PdeSystem) {
        self.pdes.push(PdeSection {
            route: route.into(),
            order: p.order,
            equations: p.render().lines().map(String::from).collect(),
            latex: p.to_latex(),
        });
    }

    fn fail(&mut self, component: &str, message: String) {
        let v = self.validation.get_or_insert_with(ValidationReport::default);
        v.errors.push(lbmfd::scheme::ValidationIssue { component: component.into(), message });
    }
}

/// Runs a command on a scheme document; returns the report and the exit status.
pub fn run(cmd: &Command, text: &str, path: &str) -> (Report, i32) {
    let mut report = Report { command: cmd.name().into(), ..Report::default() };
    let scheme = match parse_scheme(text) {
        Ok(s) => s,
        Err(e) => {
            report.fail("scheme file", e.to_string());
            report.passed = false;
            return (report, 1);
        }
    };
    report.scheme = Some(SchemeSummary {
        path: path.into(),
        dimension: scheme.dimension,
        velocities: scheme.q(),
        conserved: scheme.n(),
        free_parameters: scheme
            .parameters
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(p, _)| p.to_string())
            .collect(),
    });
    report.validation = Some(scheme.validate());
    if let Err(e) = execute(cmd, &scheme, &mut report) {
        report.fail(cmd.name(), e.to_string());
    }
    report.passed = report.all_passed();
    let code = if report.passed { 0 } else { 1 };
    (report, code)
}

fn execute(cmd: &Command, s: &LbmScheme, report: &mut Report) -> lbmfd::Result<()> {
    match cmd {
        Command::Validate => {}
        Command::DeriveFd => fd_sections(s, report)?,
        Command::EquivalentEqs { order } => {
            let series = derive_via_series(s, *order)?;
            report.pde("finite difference expansion", &series);
            let closed = if *order == 1 { derive_order1(s)? } else { derive_order2_closed(s)? };
            let cmp = pde_equal(&series, &closed);
            report.check("expansion matches closed form", cmp.equal, cmp.diffs);
        }
        Command::Maxwell { order } => {
            if s.rates[..s.n()].iter().any(|r| r.is_zero()) {
                report.notes.push("conserved rates equal to 0 were set to 1 for the Maxwell iteration".into());
            }
            let m = maxwell_pde(s, *order)?;
            report.pde("Maxwell iteration", &m);
            let cmp = pde_equal(&m, &derive_via_series(s, *order)?);
            report.check("Maxwell iteration matches expansion", cmp.equal, cmp.diffs);
        }
        Command::Check => battery(s, report)?,
        Command::Simulate { cells, steps, exact } => {
            let bindings = s.bindings()?;
            let eq = if *exact {
                equivalence_compare::<BigRational>(s, &bindings, &sample_data(s, *cells), *steps)?.1
            } else {
                let init: Vec<Grid<f64>> =
                    sample_data(s, *cells).iter().map(|g| Grid::from_vec(g.sizes(), g.values().iter().map(to_f64).collect())).collect();
                equivalence_compare::<f64>(s, &bindings, &init, *steps)?.1
            };
            let ok = if *exact { eq.exact } else { eq.max_deviation <= 1e-10 };
            report.check(if *exact { "exact equivalence" } else { "equivalence within 1e-10" }, ok, vec![]);
            report.equivalence = Some(eq);
        }
        Command::Convergence { grids, reference, final_time } => {
            let rep = convergence(s, grids, *reference, *final_time)?;
            if !rep.warnings.is_empty() {
                report.notes.extend(rep.warnings.iter().cloned());
            }
            report.convergence = Some(rep);
        }
    }
    Ok(())
}

fn to_f64(r: &BigRational) -> f64 {
    lbmfd::algebra::rational_to_f64(r)
}

/// Deterministic rational data, distinct per conserved moment.
pub fn sample_data(s: &LbmScheme, cells: usize) -> Vec<Grid<BigRational>> {
    let sizes = vec![cells; s.dimension];
    (0..s.n())
        .map(|i| {
            Grid::from_fn(&sizes, |idx| {
                let k = idx.iter().fold(i as i64 * 5 + 1, |a, x| a * 31 + *x as i64);
                BigRational::new((k.rem_euclid(13) - 6).into(), ((k.rem_euclid(5)) + 1).into())
            })
        })
        .collect()
}

fn fd_sections(s: &LbmScheme, report: &mut Report) -> lbmfd::Result<()> {
    for f in reduce_multi(s)? {
        report.fd_schemes.push(FdSection { moment: f.moment + 1, steps: f.steps(), text: f.render(), triples: f.triples() });
    }
    Ok(())
}

fn battery(s: &LbmScheme, report: &mut Report) -> lbmfd::Result<()> {
    s.check()?;
    fd_sections(s, report)?;
    let multi = reduce_multi(s)?;
    let charpoly = reduce_via_charpoly(s)?;
    report.check("characteristic polynomial form agrees", multi == charpoly, vec![]);

    let trials: Vec<Coeff> = vec![Coeff::one(), Coeff::frac(1, 2), Coeff::frac(3, 2), Coeff::int(2), Coeff::param("sigma")];
    let mut detail = Vec::new();
    for t in &trials {
        let rates = vec![t.clone(); s.n()];
        let inv = invariance_check(s, &rates)?;
        detail.extend(inv.diffs.iter().map(|d| format!("s = {t}: {d}")));
    }
    report.check("invariant under conserved rates", detail.is_empty(), detail);

    let (a, _) = s.scheme_matrices()?;
    report.check("Cayley-Hamilton on A", a.cayley_hamilton_residual().is_zero(), vec![]);
    let res = s.resolvent_operator()?;
    let lhs = res.mul(&res.adjugate());
    let rhs: Matrix<OperatorPoly> = Matrix::identity(s.q()).scale(&res.det());
    report.check("resolvent times adjugate is det I", lhs == rhs, vec![]);

    for order in [1, 2] {
        let series = derive_via_series(s, order)?;
        let closed = if order == 1 { derive_order1(s)? } else { derive_order2_closed(s)? };
        let maxwell = maxwell_pde(s, order)?;
        let a = pde_equal(&series, &closed);
        let b = pde_equal(&series, &maxwell);
        let mut d = a.diffs.clone();
        d.extend(b.diffs.iter().map(|x| format!("Maxwell: {x}")));
        report.check(&format!("three routes agree at order {order}"), a.equal && b.equal, d);
        if order == 2 {
            report.pde("finite difference expansion", &series);
        }
    }
    if s.n() == 1 {
        let ok = quasi_equilibrium_check(&s.with_conserved_rates(&[Coeff::one()]))?;
        report.check("quasi-equilibrium at leading order", ok, vec![]);
    }
    match s.bindings() {
        Ok(b) => {
            // Exact rationals grow geometrically under nonlinear equilibria.
            let (cells, steps) = if s.has_linear_equilibria() { (16, 20) } else { (8, 6) };
            if !s.has_linear_equilibria() {
                report.notes.push(format!("nonlinear equilibria: exact equivalence run on {cells} cells for {steps} steps"));
            }
            let (_, eq) = equivalence_compare::<BigRational>(s, &b, &sample_data(s, cells), steps)?;
            report.check("exact equivalence", eq.exact, vec![]);
            report.equivalence = Some(eq);
        }
        Err(e) => report.notes.push(format!("exact equivalence skipped: {e}")),
    }
    Ok(())
}

/// Speed `a` and coefficient `b` of `∂t u + a ∂x u + Δx b ∂xx u` for one
/// conserved moment in one dimension.
pub fn linear_coefficients(s: &LbmScheme) -> lbmfd::Result<(f64, f64)> {
    if s.dimension != 1 || s.n() != 1 || !s.has_linear_equilibria() {
        return Err(lbmfd::Error::Precondition(
            "convergence needs one dimension, one conserved moment and linear equilibria".into(),
        ));
    }
    let bindings = s.bindings()?;
    let values: BTreeMap<Param, Coeff> = bindings.iter().map(|(p, v)| (*p, Coeff::rational(v.clone()))).collect();
    let pde = derive_order2_closed(s)?.substitute(&values)?;
    let e = &pde.equations[0];
    let dx = Jet::new(0, 0, vec![1]);
    let dxx = Jet::new(0, 0, vec![2]);
    let number = |c: Coeff| c.as_rational().map(|r| to_f64(&r)).ok_or_else(|| lbmfd::Error::Unbound("coefficient".into()));
    let a = number(e.orders[0].linear_coeff(&dx))?;
    let b = number(e.orders[1].linear_coeff(&dxx))?;
    Ok((a, b))
}

pub fn convergence(s: &LbmScheme, grids: &[usize], reference: Reference, final_time: f64) -> lbmfd::Result<ConvergenceReport> {
    let (a, b) = linear_coefficients(s)?;
    let k = 2.0 * std::f64::consts::PI;
    let exact = move |dx: f64, t: f64, x: f64| {
        let damping = match reference {
            Reference::SecondOrder => (b * dx * k * k * t).exp(),
            Reference::Advection => 1.0,
        };
        damping * (k * (x - a * t)).sin()
    };
    convergence_order(s, &exact, grids, final_time)
}

pub fn render_json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", r.command);
    if let Some(s) = &r.scheme {
        let _ = writeln!(
            out,
            "scheme: {} (d = {}, q = {}, N = {})",
            s.path, s.dimension, s.velocities, s.conserved
        );
        if !s.free_parameters.is_empty() {
            let _ = writeln!(out, "free parameters: {}", s.free_parameters.join(", "));
        }
    }
    if let Some(v) = &r.validation {
        let _ = writeln!(out, "validation: {}", if v.is_valid() { "ok" } else { "failed" });
        for e in &v.errors {
            let _ = writeln!(out, "  error: {}: {}", e.component, e.message);
        }
        for w in &v.warnings {
            let _ = writeln!(out, "  warning: {}: {}", w.component, w.message);
        }
    }
    for f in &r.fd_schemes {
        let _ = writeln!(out, "\nfinite difference scheme for m{} ({} steps):", f.moment, f.steps);
        let _ = writeln!(out, "  {}", f.text);
        for t in &f.triples {
            let shift: Vec<String> = t.shift.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "  {} {}(t{:+}) shift ({}) : {}", t.side, t.field, t.time, shift.join(","), t.coeff);
        }
    }
    for p in &r.pdes {
        let _ = writeln!(out, "\nmacroscopic equations, order {} ({}):", p.order, p.route);
        for e in &p.equations {
            let _ = writeln!(out, "  {e}");
        }
    }
    if let Some(e) = &r.equivalence {
        let _ = writeln!(
            out,
            "\nequivalence: cells {:?}, steps {}, warm-up {}, max deviation {:e}{}",
            e.cells,
            e.steps,
            e.warmup,
            e.max_deviation,
            if e.exact { " (exactly zero)" } else { "" }
        );
    }
    if let Some(c) = &r.convergence {
        let _ = writeln!(out, "\nconvergence:");
        let _ = writeln!(out, "  {:>6}  {:>12}  {:>12}", "cells", "dx", "error");
        for row in &c.rows {
            let _ = writeln!(out, "  {:>6}  {:>12.6e}  {:>12.6e}", row.cells, row.dx, row.error);
        }
        let _ = writeln!(out, "  observed order: {:.4}", c.order);
    }
    if !r.checks.is_empty() {
        let _ = writeln!(out, "\nchecks:");
        for c in &r.checks {
            let _ = writeln!(out, "  [{}] {}", if c.passed { "pass" } else { "FAIL" }, c.name);
            for d in &c.detail {
                let _ = writeln!(out, "      {d}");
            }
        }
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub fn render_latex(r: &Report) -> String {
    let mut out = String::new();
    for p in &r.pdes {
        let _ = writeln!(out, "% order {} ({})", p.order, p.route);
        let _ = writeln!(out, "\\begin{{align*}}");
        let _ = writeln!(out, "{}", p.latex.join(" \\\\\n"));
        let _ = writeln!(out, "\\end{{align*}}");
    }
    if r.pdes.is_empty() {
        out.push_str("% no equations in this report\n");
    }
    out
}
