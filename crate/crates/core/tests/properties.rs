use pcvi::discrete_lagrangian::{eval_ld, grad_ld};
use pcvi::harness::oracle::sho_flow;
use pcvi::hermite::HermiteData;
use pcvi::integrator::{run, step, Method, MethodConfig, PhasePoint, SolveMode};
use pcvi::jets::{Dual, Jet, Scalar};
use pcvi::prolongation::solution_jet;
use pcvi::systems::Builtin;
use proptest::prelude::*;

fn builtin() -> impl Strategy<Value = Builtin> {
    prop_oneof![Just(Builtin::Sho), Just(Builtin::Pendulum), Just(Builtin::Duffing)]
}

fn method() -> impl Strategy<Value = Method> {
    prop_oneof![
        Just(Method::hem(2, 1)),
        Just(Method::hem(3, 1)),
        Just(Method::Gauss2),
        Just(Method::Midpoint)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jet_product_matches_pointwise_derivatives(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        // (sin x * exp x)' at x = a via jets versus the closed form
        let x = Jet::variable(a, 3);
        let f = x.sin() * x.exp();
        let exact = (a.sin() + a.cos()) * a.exp();
        prop_assert!((f.derivative(1).unwrap() - exact).abs() < 1e-12 * exact.abs().max(1.0));
        let y = Jet::variable(b, 2);
        let g = (y.clone() * y.clone()).powi(2);
        prop_assert!((g.derivative(2).unwrap() - 12.0 * b * b).abs() < 1e-11 * (b * b).max(1.0));
    }

    #[test]
    fn duals_and_jets_agree_on_first_derivative(a in -1.5..1.5f64) {
        let d = Dual::variable(a, 0, 1);
        let j = Jet::variable(a, 1);
        let fd = (d.sin() * d.cos() + d.powi(3)).partial(0);
        let fj = (j.sin() * j.cos() + j.powi(3)).derivative(1).unwrap();
        prop_assert!((fd - fj).abs() < 1e-13);
    }

    #[test]
    fn hermite_interpolant_matches_its_data(h in 0.05..1.0f64, seed in proptest::collection::vec(-1.0..1.0f64, 6)) {
        let a0 = seed[..3].iter().map(|v| vec![*v]).collect();
        let a1 = seed[3..].iter().map(|v| vec![*v]).collect();
        let curve = HermiteData::new(h, a0, a1).unwrap().assemble().unwrap();
        for j in 0..3 {
            let l = curve.eval_deriv(0.0, j).values[0];
            let r = curve.eval_deriv(h, j).values[0];
            prop_assert!((l - seed[j]).abs() < 1e-9 * h.powi(-(j as i32)));
            prop_assert!((r - seed[3 + j]).abs() < 1e-9 * h.powi(-(j as i32)));
        }
    }

    #[test]
    fn solution_jet_satisfies_equation(b in builtin(), q in -1.5..1.5f64, v in -1.0..1.0f64) {
        let sys = b.system();
        let jet = solution_jet(&sys, &[q], &[v], 6).unwrap();
        let comp = &jet.components()[0];
        // q'' = f(q) as series up to order 4
        let f = sys.force(&[comp.truncate(4)]);
        let acc = comp.differentiate().differentiate();
        for k in 0..=4 {
            prop_assert!((acc.coeff(k) - f[0].coeff(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_lagrangian_is_time_symmetric(b in builtin(), q0 in -1.0..1.0f64, u in -1.0..1.0f64, h in 0.05..0.2f64) {
        let sys = b.system();
        let q1 = q0 + h * u;
        let fwd = eval_ld(&sys, 3, 1, h, &[q0], &[q1]).unwrap().value;
        let bwd = eval_ld(&sys, 3, 1, -h, &[q1], &[q0]).unwrap().value;
        prop_assert!((fwd + bwd).abs() < 1e-13);
        let (d1, d2) = grad_ld(&sys, 3, 1, h, &[q0], &[q1]).unwrap();
        let (e1, e2) = grad_ld(&sys, 3, 1, h, &[q1], &[q0]).unwrap();
        // swapping endpoints of a symmetric L_d swaps the partials
        prop_assert!((d1[0] - e2[0]).abs() < 1e-10 && (d2[0] - e1[0]).abs() < 1e-10);
    }

    #[test]
    fn one_step_is_symplectic(b in builtin(), m in method(), q in -1.0..1.0f64, p in -0.6..0.6f64) {
        let sys = b.system();
        let cfg = MethodConfig::new(m);
        let eps = 1e-6;
        let phi = |q: f64, p: f64| {
            let x = step(&sys, &cfg, &PhasePoint::new(vec![q], vec![p], 0.0), 0.1).unwrap();
            (x.q[0], x.p[0])
        };
        let (a, c) = (phi(q + eps, p), phi(q - eps, p));
        let (e, g) = (phi(q, p + eps), phi(q, p - eps));
        let det = (a.0 - c.0) * (e.1 - g.1) / (4.0 * eps * eps) - (e.0 - g.0) * (a.1 - c.1) / (4.0 * eps * eps);
        prop_assert!((det - 1.0).abs() < 1e-6, "{det}");
    }

    #[test]
    fn steps_are_reversible(b in builtin(), m in method(), q in -1.0..1.0f64, p in -0.6..0.6f64) {
        let sys = b.system();
        let cfg = MethodConfig::new(m);
        let x = PhasePoint::new(vec![q], vec![p], 0.0);
        let y = step(&sys, &cfg, &x, 0.1).unwrap();
        let z = step(&sys, &cfg, &y, -0.1).unwrap();
        prop_assert!((z.q[0] - q).abs() < 1e-8 && (z.p[0] - p).abs() < 1e-8);
    }

    #[test]
    fn solve_modes_agree(b in builtin(), q in -1.0..1.0f64, p in -0.6..0.6f64) {
        let sys = b.system();
        let cfg = MethodConfig::hem(3, 1);
        let x = PhasePoint::new(vec![q], vec![p], 0.0);
        let a = step(&sys, &cfg, &x, 0.1).unwrap();
        let c = step(&sys, &cfg.with_mode(SolveMode::Combined), &x, 0.1).unwrap();
        prop_assert!((a.q[0] - c.q[0]).abs() < 1e-10 && (a.p[0] - c.p[0]).abs() < 1e-10);
    }

    #[test]
    fn sho_trajectory_stays_close_to_exact(q in -1.0..1.0f64, p in -1.0..1.0f64) {
        let sys = Builtin::Sho.system();
        let x = PhasePoint::new(vec![q], vec![p], 0.0);
        let traj = run(&sys, &MethodConfig::hem(3, 1), &x, 0.1, 20).unwrap();
        let exact = sho_flow(&x, 2.0);
        prop_assert!((traj.last().q[0] - exact.q[0]).abs() < 1e-5);
    }
}
