//! Acceptance suite: every criterion runs at its stated tolerance and time
//! budget and prints one PASS/FAIL line.
//!
//! Run with `cargo test -p lbmfd-cli --test acceptance`.

#[path = "../../core/tests/support/displays.rs"]
mod displays;
#[path = "../../core/tests/support/perturbation.rs"]
mod perturbation;
#[path = "../../core/tests/support/random.rs"]
mod random;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use lbmfd::algebra::{Coeff, Grid, OperatorPoly, Param, Ring};
use lbmfd::fdreduce::invariance_check;
use lbmfd::macroderive::{derive_order1, derive_order2_closed, derive_via_series, pde_equal};
use lbmfd::matrix::Matrix;
use lbmfd::maxwell::maxwell_pde;
use lbmfd::numeric::equivalence_compare;
use lbmfd::scheme::{library, LbmScheme};
use lbmfd_cli::{convergence, Reference};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, check and time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn p(name: &str) -> Coeff {
    Coeff::param(name)
}

fn d1q2_equation() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let out = Command::new(env!("CARGO_BIN_EXE_lbmfd"))
        .args(["equivalent-eqs", "--order", "2", "schemes/d1q2.toml"])
        .current_dir(root)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("exit status {:?}", out.status.code()))?;
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    // -λ (1/s2 - 1/2)(1 - C²/λ²) computed here, independent of any derivation
    let (lam, c) = (p("lambda"), p("C"));
    let rate = Coeff::one().div(&p("s2")).unwrap().sub(&Coeff::frac(1, 2));
    let speed = Coeff::one().sub(&c.mul(&c).div(&lam.mul(&lam)).unwrap());
    let coeff = lam.mul(&rate).mul(&speed).neg();
    let expected = format!("dt(m1) + C*dx(m1) + Δx*[({coeff})*dxx(m1)] = O(Δx^2)");
    let line = text.lines().map(str::trim).find(|l| l.starts_with("dt(m1)")).ok_or("no equation in output")?;
    ensure(line == expected, format!("got `{line}`, expected `{expected}`"))?;
    Ok(line.to_string())
}

fn three_routes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut linear, mut quadratic, mut two) = (0, 0, 0);
    let count = 24;
    for k in 0..count {
        let s = random::random_scheme(&mut rng, 3, k % 2 == 1);
        if s.has_linear_equilibria() {
            linear += 1;
        } else {
            quadratic += 1;
        }
        if s.conserved == 2 {
            two += 1;
        }
        for order in [1, 2] {
            let series = derive_via_series(&s, order).map_err(|e| e.to_string())?;
            let closed = if order == 1 { derive_order1(&s) } else { derive_order2_closed(&s) }.map_err(|e| e.to_string())?;
            let maxwell = maxwell_pde(&s, order).map_err(|e| e.to_string())?;
            for (name, other) in [("closed form", &closed), ("Maxwell", &maxwell)] {
                let cmp = pde_equal(&series, other);
                ensure(cmp.equal, format!("scheme {k}, order {order}, {name}: {:?}", cmp.diffs))?;
            }
            ensure(pde_equal(&closed, &maxwell).equal, format!("scheme {k}, order {order}: closed form vs Maxwell"))?;
        }
    }
    ensure(linear > 0 && quadratic > 0 && two > 0, "sample does not cover every family")?;
    Ok(format!("{count} schemes ({linear} linear, {quadratic} quadratic, {two} with N = 2)"))
}

fn bind(mut s: LbmScheme, values: &[(&str, BigRational)]) -> LbmScheme {
    for (name, v) in values {
        s.parameters.insert(Param::new(name), Some(v.clone()));
    }
    s
}

fn exact_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let schemes = [
        ("D1Q2", bind(library::d1q2(), &[("lambda", r(1, 1)), ("s2", r(3, 2)), ("C", r(1, 2))])),
        ("D1Q3", bind(library::d1q3_two_conserved(), &[("lambda", r(1, 1)), ("s3", r(5, 3)), ("a", r(1, 4)), ("b", r(-1, 3))])),
    ];
    let mut parts = Vec::new();
    for (name, s) in &schemes {
        let init: Vec<Grid<BigRational>> = (0..s.conserved)
            .map(|_| Grid::from_vec(&[16], (0..16).map(|_| r(rng.gen_range(-9..=9), rng.gen_range(1..=7))).collect()))
            .collect();
        let bindings = s.bindings().map_err(|e| e.to_string())?;
        let (dev, report) = equivalence_compare(s, &bindings, &init, 20).map_err(|e| e.to_string())?;
        ensure(report.exact, format!("{name}: deviation {dev}"))?;
        parts.push(format!("{name} deviation 0"));
    }
    Ok(format!("{} on 16 cells x 20 steps", parts.join(", ")))
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = [Coeff::one(), Coeff::frac(1, 2), Coeff::frac(3, 2), Coeff::int(2), Coeff::frac(1, 3), p("sigma")];
    let schemes = 12;
    for k in 0..schemes {
        let s = random::random_scheme(&mut rng, 4, k % 2 == 0);
        for t in &trials {
            let mut rates = vec![t.clone(); s.conserved];
            if s.conserved == 2 {
                rates[1] = t.add(&Coeff::frac(1, 4));
            }
            let rep = invariance_check(&s, &rates).map_err(|e| e.to_string())?;
            ensure(rep.identical, format!("scheme {k}, rate {t}: {:?}", rep.diffs))?;
        }
    }
    Ok(format!("{} rates x {schemes} schemes", trials.len()))
}

fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = 60;
    for k in 0..samples {
        let s = random::random_scheme(&mut rng, 4, false);
        let (a, _) = s.scheme_matrices().map_err(|e| e.to_string())?;
        ensure(a.cayley_hamilton_residual().is_zero(), format!("sample {k}: Cayley-Hamilton on A"))?;
        let c = s.resolvent_operator().map_err(|e| e.to_string())?;
        ensure(c.cayley_hamilton_residual().is_zero(), format!("sample {k}: Cayley-Hamilton on zI - A"))?;
        let rhs: Matrix<OperatorPoly> = Matrix::identity(c.rows()).scale(&c.det());
        ensure(c.mul(&c.adjugate()) == rhs, format!("sample {k}: C adj C"))?;
        ensure(c.adjugate().mul(&c) == rhs, format!("sample {k}: adj C C"))?;
    }
    Ok(format!("{samples} samples, q <= 4"))
}

fn perturbation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let schemes = 12;
    for k in 0..schemes {
        let s = random::random_scheme(&mut rng, 4, k % 3 == 0);
        ensure(perturbation::resolvent_taylor_matches(&s), format!("scheme {k}: series"))?;
    }
    let samples = 30;
    for k in 0..samples {
        ensure(perturbation::finite_difference_sample(&mut rng), format!("4x4 sample {k}: finite differences"))?;
    }
    Ok(format!("{schemes} schemes to O(dx^3), {samples} 4x4 samples at step {} within {}", perturbation::STEP, perturbation::TOL))
}

fn limit_displays() -> Outcome {
    let x = displays::generic();
    let (det, adj) = displays::computed(&x);
    let d = displays::diff(&det, &displays::det_display(&x));
    ensure(d.is_empty(), format!("det: {d:?}"))?;
    let d = displays::diff(adj.get(0, 0), &displays::adj11_display(&x, 1));
    ensure(d.is_empty(), format!("adj11: {d:?}"))?;
    for j in 2..=displays::Q {
        let d = displays::diff(adj.get(0, j - 1), &displays::adj1j_display(&x, j));
        ensure(d.is_empty(), format!("adj1{j}: {d:?}"))?;
    }
    Ok("det, adj11, adj12, adj13".into())
}

fn convergence_orders() -> Outcome {
    let grids = [64, 128, 256, 512];
    let scheme = |s2: BigRational| bind(library::d1q2(), &[("lambda", r(1, 1)), ("C", r(1, 2)), ("s2", s2)]);
    let cases = [
        ("second-order equation, s2 = 3/2", scheme(r(3, 2)), Reference::SecondOrder, 2.0),
        ("advection, s2 = 2", scheme(r(2, 1)), Reference::Advection, 2.0),
        ("advection, s2 = 3/2", scheme(r(3, 2)), Reference::Advection, 1.0),
    ];
    let mut parts = Vec::new();
    for (name, s, reference, expected) in cases {
        let rep = convergence(&s, &grids, reference, 1.0).map_err(|e| e.to_string())?;
        ensure((rep.order - expected).abs() <= 0.3, format!("{name}: order {:.3}", rep.order))?;
        parts.push(format!("{name}: {:.3}", rep.order));
    }
    Ok(parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 D1Q2 equivalent equation", d1q2_equation, 1),
        ("2 three-route agreement", three_routes, 60),
        ("3 exact discrete equivalence", exact_equivalence, 10),
        ("4 invariance under conserved rates", invariance, 30),
        ("5 Cayley-Hamilton and adjugate identities", identities, 30),
        ("6 perturbation formulas", perturbation, 30),
        ("7 limit displays", limit_displays, 30),
        ("8 convergence orders", convergence_orders, 60),
    ];
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|m| m.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget} s budget"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({:.2} s): {detail}", elapsed.as_secs_f64()),
            Err(e) => {
                println!("FAIL criterion {name} ({:.2} s): {e}", elapsed.as_secs_f64());
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
