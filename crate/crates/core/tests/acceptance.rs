//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use pcvi::collocation::Collocation;
use pcvi::discrete_lagrangian::{euler_maclaurin, eval_ld, grad_ld};
use pcvi::harness::oracle::{exact_flow, sho_flow};
use pcvi::harness::studies::{convergence, energy_study, fit_slope, ld_order, Component};
use pcvi::hermite::HermiteData;
use pcvi::integrator::{legendre_minus, legendre_plus, run, step, Method, MethodConfig, PhasePoint, SolveMode};
use pcvi::jets::Jet;
use pcvi::prolongation::solution_jet;
use pcvi::systems::{Builtin, MechanicalSystem};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail, notes: Vec::new() }
    }
}

fn pt(q: f64, p: f64) -> PhasePoint {
    PhasePoint::new(vec![q], vec![p], 0.0)
}

fn slope(h: &[f64], e: &[f64]) -> f64 {
    fit_slope(h, e).expect("positive errors").slope
}

fn hermite_rate() -> Outcome {
    let hs = [0.4, 0.2, 0.1, 0.05];
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2usize, 3] {
        let errs: Vec<f64> = hs
            .iter()
            .map(|&h| {
                // derivatives of cos at 0 and h
                let d = |t: f64, j: usize| (t + j as f64 * std::f64::consts::FRAC_PI_2).cos();
                let a0 = (0..n).map(|j| vec![d(0.0, j)]).collect();
                let a1 = (0..n).map(|j| vec![d(h, j)]).collect();
                let curve = HermiteData::new(h, a0, a1).unwrap().assemble().unwrap();
                (0..=400)
                    .map(|i| {
                        let t = h * i as f64 / 400.0;
                        (curve.eval_deriv(t, 0).values[0] - t.cos()).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        let s = slope(&hs, &errs);
        pass &= (s - 2.0 * n as f64).abs() <= 0.3;
        detail.push(format!("n={n} slope {s:.3} (target {})", 2 * n));
    }
    Outcome::new(pass, detail.join(", "))
}

fn exp_jet(x: f64, order: usize) -> Jet {
    let mut c = vec![x.exp(); order + 1];
    let mut fact = 1.0;
    for (k, v) in c.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *v /= fact;
    }
    Jet::new(c)
}

fn euler_maclaurin_rate() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for m in [1usize, 2] {
        // exactness on every monomial up to degree 2m + 1
        let h = 0.9;
        let mut worst = 0.0f64;
        for deg in 0..=2 * m + 1 {
            let jet_at = |x: f64| {
                let c: Vec<f64> = (0..=2 * m)
                    .map(|k| {
                        if k > deg {
                            0.0
                        } else {
                            let b: f64 = (0..k).map(|i| (deg - i) as f64 / (i + 1) as f64).product();
                            b * x.powi((deg - k) as i32)
                        }
                    })
                    .collect();
                Jet::new(c)
            };
            let got = euler_maclaurin(&jet_at(0.0), &jet_at(h), h, m).unwrap();
            let exact = h.powi(deg as i32 + 1) / (deg + 1) as f64;
            worst = worst.max(((got - exact) / exact).abs());
        }
        let thetas = [0.8, 0.4, 0.2, 0.1];
        let errs: Vec<f64> = thetas
            .iter()
            .map(|&t| {
                let got = euler_maclaurin(&exp_jet(0.0, 2 * m), &exp_jet(t, 2 * m), t, m).unwrap();
                (got - t.exp_m1()).abs()
            })
            .collect();
        let s = slope(&thetas, &errs);
        let target = (2 * m + 3) as f64;
        pass &= worst <= 1e-13 && (s - target).abs() <= 0.3;
        detail.push(format!("m={m} poly rel err {worst:.1e}, exp slope {s:.3} (target {target})"));
    }
    Outcome::new(pass, detail.join("; "))
}

/// Exact boundary data `(q(0), q(h))` and the exact initial velocity.
fn boundary<P: pcvi::systems::Potential>(sys: &MechanicalSystem<P>, start: &PhasePoint, h: f64) -> (f64, f64, f64) {
    let end = exact_flow(sys, start, h, h / 2000.0).unwrap();
    (start.q[0], end.q[0], sys.velocity(&start.p)[0])
}

fn collocation_rates(third_derivative: bool) -> Outcome {
    let hs = [0.2, 0.1, 0.05, 0.025];
    let start = pt(0.8, 0.3);
    let mut pass = true;
    let mut detail = Vec::new();
    let ns: &[usize] = if third_derivative { &[3] } else { &[2, 3] };
    for b in [Builtin::Sho, Builtin::Pendulum] {
        let sys = b.system();
        for &n in ns {
            let errs: Vec<f64> = hs
                .iter()
                .map(|&h| {
                    let (q0, q1, v_exact) = boundary(&sys, &start, h);
                    let c = Collocation::new(&sys, n, h).unwrap();
                    let sol = c.solve(&[q0], &[q1], None, Default::default()).unwrap();
                    if third_derivative {
                        let curve = sol.data.assemble().unwrap();
                        let exact = solution_jet(&sys, &[q0], &[v_exact], 3).unwrap().derivative(3).unwrap()[0];
                        (curve.eval_deriv(0.0, 3).values[0] - exact).abs()
                    } else {
                        (sol.v0[0] - v_exact).abs()
                    }
                })
                .collect();
            let s = slope(&hs, &errs);
            let target = (2 * n - 1) as f64 - 0.3;
            pass &= s >= target;
            detail.push(format!("{b} n={n} slope {s:.3} (>= {target:.1})"));
        }
    }
    Outcome::new(pass, detail.join(", "))
}

fn variational_order() -> Outcome {
    let sys = Builtin::Sho.system();
    let hs = [0.2, 0.1, 0.05, 0.025];
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, m) in [(2usize, 1usize), (3, 1), (4, 2), (3, 0)] {
        let r = ld_order(&sys, n, m, &pt(1.0, 0.0), &hs).unwrap();
        let s = r.fit.slope;
        let ok = if m == 0 {
            (s - 3.0).abs() <= 0.3
        } else {
            s >= (2 * m + 3).min(2 * n) as f64 - 0.3
        };
        pass &= ok;
        let target = if m == 0 { "3 +/- 0.3".to_string() } else { format!(">= {:.1}", (2 * m + 3).min(2 * n) as f64 - 0.3) };
        detail.push(format!("({n},{m}) slope {s:.3} ({target})"));
    }
    Outcome::new(pass, detail.join(", "))
}

const H_LIST: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn global_convergence() -> Outcome {
    let sys = Builtin::Sho.system();
    let x0 = pt(1.0, 0.0);
    let slope_of = |method: Method| {
        convergence(&sys, &MethodConfig::new(method), &x0, &H_LIST, 10.0, Component::Phase)
            .unwrap()
            .fit
            .slope
    };
    let (a, b, g) = (slope_of(Method::hem(2, 1)), slope_of(Method::hem(3, 1)), slope_of(Method::Gauss2));
    let pass = a >= 2.7 && b >= 3.7 && (g - 4.0).abs() <= 0.3;
    Outcome::new(
        pass,
        format!("hem(2,1) {a:.3} (>= 2.7), hem(3,1) {b:.3} (>= 3.7), gauss2 {g:.3} (4 +/- 0.3)"),
    )
}

fn position_order() -> Outcome {
    let sys = Builtin::Sho.system();
    let cfg = MethodConfig::hem(3, 1);
    let x0 = pt(1.0, 0.0);
    let q = convergence(&sys, &cfg, &x0, &H_LIST, 10.0, Component::Position).unwrap();
    let qp = convergence(&sys, &cfg, &x0, &H_LIST, 10.0, Component::Phase).unwrap();
    let mut out = Outcome::new(
        q.fit.slope >= qp.fit.slope,
        format!("hem(3,1) position slope {:.3} >= phase slope {:.3}", q.fit.slope, qp.fit.slope),
    );
    if q.fit.slope < 5.5 {
        out.notes.push(format!("flag: position slope {:.3} < 5.5 for (n,m)=(3,1)", q.fit.slope));
    }
    if q.fit.non_asymptotic {
        let errs: Vec<String> = q.rows.iter().map(|r| format!("{:.2e}", r.error)).collect();
        out.notes.push(format!(
            "note: log-log residual {:.2} exceeds 0.1, position errors [{}] reach round-off",
            q.fit.max_residual,
            errs.join(", ")
        ));
    }
    out
}

fn energy_behaviour() -> Outcome {
    let sho = Builtin::Sho.system();
    let r = energy_study(&sho, &MethodConfig::hem(3, 1), &pt(1.0, 0.0), 0.2, 5000).unwrap();
    let mut pass = r.max_abs_error < 1e-3 && r.drift_slope.abs() < 1e-8;
    let mut detail = vec![format!(
        "sho hem(3,1) max|dH| {:.2e}, drift {:.1e}",
        r.max_abs_error, r.drift_slope
    )];
    let duffing = Builtin::Duffing.system();
    for method in [Method::Midpoint, Method::hem(2, 1)] {
        let r = energy_study(&duffing, &MethodConfig::new(method), &pt(0.5, 0.0), 0.2, 5000).unwrap();
        let half = r.energy_error.len() / 2;
        let peak = |s: &[f64]| s.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let (first, second) = (peak(&r.energy_error[..half]), peak(&r.energy_error[half..]));
        pass &= r.drift_slope.abs() < 1e-8 && second <= 1.1 * first;
        detail.push(format!(
            "duffing {method} max|dH| {:.2e} (halves {first:.2e}/{second:.2e}), drift {:.1e}",
            r.max_abs_error, r.drift_slope
        ));
    }
    Outcome::new(pass, detail.join("; "))
}

fn symplecticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 0.1;
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for b in Builtin::ALL {
        let sys = b.system();
        let states: Vec<(f64, f64)> = (0..5).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-0.6..0.6))).collect();
        for method in [Method::hem(2, 1), Method::hem(3, 1), Method::Gauss2, Method::Midpoint] {
            let cfg = MethodConfig::new(method);
            for &(q, p) in &states {
                let phi = |q: f64, p: f64| {
                    let x = step(&sys, &cfg, &pt(q, p), h).unwrap();
                    [x.q[0], x.p[0]]
                };
                let col = |dq: f64, dp: f64| {
                    let (a, b) = (phi(q + dq, p + dp), phi(q - dq, p - dp));
                    [(a[0] - b[0]) / (2.0 * eps), (a[1] - b[1]) / (2.0 * eps)]
                };
                let (c1, c2) = (col(eps, 0.0), col(0.0, eps));
                // for 2x2 maps D^T J D - J has the single entry det(D) - 1
                let det = c1[0] * c2[1] - c2[0] * c1[1];
                worst = worst.max((det - 1.0).abs());
            }
        }
    }
    Outcome::new(worst < 1e-6, format!("max |D^T J D - J| = {worst:.2e} (< 1e-6) over 60 cases"))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for b in Builtin::ALL {
        let sys = b.system();
        for _ in 0..10 {
            let h: f64 = rng.random_range(0.05..0.25);
            let q0: f64 = rng.random_range(-1.0..1.0);
            let q1 = q0 + h * rng.random_range(-1.0..1.0);
            for n in [2usize, 3] {
                let m = 1;
                let (d1, d2) = grad_ld(&sys, n, m, h, &[q0], &[q1]).unwrap();
                let f = |a: f64, c: f64| eval_ld(&sys, n, m, h, &[a], &[c]).unwrap().value;
                let e = 1e-6;
                let fd1 = (f(q0 + e, q1) - f(q0 - e, q1)) / (2.0 * e);
                let fd2 = (f(q0, q1 + e) - f(q0, q1 - e)) / (2.0 * e);
                for (g, fd) in [(d1[0], fd1), (d2[0], fd2)] {
                    worst = worst.max((g - fd).abs() / g.abs().max(1.0));
                }
            }
        }
    }
    Outcome::new(worst < 1e-6, format!("max relative error {worst:.2e} (< 1e-6) over 120 gradient pairs"))
}

fn consistency() -> Outcome {
    let sho = Builtin::Sho.system();
    // closed form for n = 2, m = 1 on the oscillator
    let closed = |h: f64, q0: f64, q1: f64| {
        let d = 6.0 * (q1 - q0) / (h * h);
        let (b0, b1) = (h * (d + q0), h * (d - q1));
        let v0 = (4.0 * b0 - 2.0 * b1) / 12.0;
        let v1 = (4.0 * b1 - 2.0 * b0) / 12.0;
        let l = |q: f64, v: f64| 0.5 * v * v - 0.5 * q * q;
        let dl = |q: f64, v: f64| -2.0 * q * v;
        0.5 * h * (l(q0, v0) + l(q1, v1)) - h * h / 12.0 * (dl(q1, v1) - dl(q0, v0))
    };
    let mut closed_err = 0.0f64;
    for &(h, q0, q1) in &[(0.2, 1.0, 0.98), (0.1, -0.3, 0.1), (0.05, 0.6, 0.62), (0.3, 0.0, 0.4)] {
        let v = eval_ld(&sho, 2, 1, h, &[q0], &[q1]).unwrap().value;
        closed_err = closed_err.max((v - closed(h, q0, q1)).abs());
    }

    let (mut mode_err, mut match_err, mut rev_err) = (0.0f64, 0.0f64, 0.0f64);
    for b in Builtin::ALL {
        let sys = b.system();
        let x0 = pt(0.7, 0.2);
        for (n, m) in [(2, 1), (3, 1)] {
            let cfg = MethodConfig::hem(n, m);
            let h = 0.2;
            let nested = run(&sys, &cfg, &x0, h, 40).unwrap();
            let combined = run(&sys, &cfg.with_mode(SolveMode::Combined), &x0, h, 40).unwrap();
            for (a, c) in nested.points.iter().zip(&combined.points) {
                mode_err = mode_err.max((a.q[0] - c.q[0]).abs()).max((a.p[0] - c.p[0]).abs());
            }
            for w in nested.points.windows(3) {
                let plus = legendre_plus(&sys, &cfg, &w[0].q, &w[1].q, h).unwrap();
                let minus = legendre_minus(&sys, &cfg, &w[1].q, &w[2].q, h).unwrap();
                match_err = match_err.max((plus.p[0] - minus.p[0]).abs());
            }
        }
        for method in [Method::hem(2, 1), Method::hem(3, 1), Method::Gauss2, Method::Midpoint] {
            let cfg = MethodConfig::new(method);
            let fwd = run(&sys, &cfg, &x0, 0.1, 100).unwrap();
            let back = run(&sys, &cfg, fwd.last(), -0.1, 100).unwrap();
            let end = back.last();
            rev_err = rev_err.max((end.q[0] - x0.q[0]).abs()).max((end.p[0] - x0.p[0]).abs());
        }
    }
    let pass = closed_err <= 1e-12 && mode_err <= 1e-10 && match_err <= 1e-10 && rev_err <= 1e-8;
    Outcome::new(
        pass,
        format!(
            "closed form {closed_err:.1e} (<= 1e-12), nested/combined {mode_err:.1e} (<= 1e-10), \
             momentum matching {match_err:.1e} (<= 1e-10), reversibility {rev_err:.1e} (<= 1e-8)"
        ),
    )
}

type Criterion = fn() -> Outcome;

fn main() {
    // sanity check of the flow oracle used throughout
    let x = sho_flow(&pt(1.0, 0.0), 0.1);
    assert!((x.q[0] - 0.1f64.cos()).abs() < 1e-16);

    let criteria: [(&str, Criterion); 11] = [
        ("hermite approximation rate", hermite_rate),
        ("euler-maclaurin exactness and rate", euler_maclaurin_rate),
        ("endpoint velocity rate", || collocation_rates(false)),
        ("third derivative rate", || collocation_rates(true)),
        ("variational order", variational_order),
        ("global convergence on sho", global_convergence),
        ("position-only order", position_order),
        ("energy behaviour", energy_behaviour),
        ("symplecticity", symplecticity),
        ("gradient correctness", gradient_check),
        ("consistency checks", consistency),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let out = f();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {:>2} {name}: {} ({:.1}s)",
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
        for note in &out.notes {
            println!("       {note}");
        }
        if !out.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
