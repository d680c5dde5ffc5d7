use nalgebra::DMatrix;
use pliag::aggregation::{DelaySchedule, SelectionPolicy};
use pliag::config::{parse_csv_matrix, parse_inline_matrix};
use pliag::diagnostics::{certify_sublinear, lyapunov_t, CERTIFICATE_TOL};
use pliag::kernels::LegendreKernel;
use pliag::problems::{self, ComponentKind, ComponentOracle, Regularizer};
use pliag::solver::{named_method, run, MethodTag, SolverConfig};
use pliag::stepsizes::{linear_step, rate_linear, recursion_condition_value, sublinear_step};
use pliag::subproblems::{solve, SubproblemInstance};
use pliag::Point;
use proptest::prelude::*;

fn point(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(lo..hi, dim).prop_map(Point::from_vec)
}

fn kernels() -> impl Strategy<Value = (LegendreKernel, f64, f64)> {
    prop_oneof![
        Just((LegendreKernel::euclidean(3), -5.0, 5.0)),
        Just((LegendreKernel::burg(3), 0.05, 20.0)),
        (0.0..2.0f64).prop_map(|g| (LegendreKernel::burg_with_quadratic(3, g).unwrap(), 0.05, 20.0)),
        (0.1..3.0f64, 0.1..3.0f64)
            .prop_map(|(b, g)| (LegendreKernel::quartic(3, b, g).unwrap(), -5.0, 5.0)),
    ]
}

fn kernel_with_points() -> impl Strategy<Value = (LegendreKernel, Point, Point, Point)> {
    kernels().prop_flat_map(|(k, lo, hi)| {
        (Just(k), point(3, lo, hi), point(3, lo, hi), point(3, lo, hi))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bregman_nonnegative_and_zero_on_diagonal((k, x, y, _z) in kernel_with_points()) {
        prop_assert!(k.bregman(&x, &y).unwrap() >= 0.0);
        prop_assert_eq!(k.bregman(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn three_point_identity((k, x, y, z) in kernel_with_points()) {
        let scale = 1.0 + k.bregman(&x, &z).unwrap() + k.bregman(&x, &y).unwrap() + k.bregman(&y, &z).unwrap();
        prop_assert!(k.three_point_residual(&x, &y, &z).unwrap() <= 1e-11 * scale);
    }

    #[test]
    fn ell_is_monotone_with_unit_start(lo in 0.1..1.0f64, width in 0.0..5.0f64) {
        for k in [LegendreKernel::euclidean(2), LegendreKernel::burg(2).with_box(lo, lo + width).unwrap()] {
            prop_assert_eq!(k.ell(1).unwrap(), 1.0);
            for j in 1..8 {
                prop_assert!(k.ell(j).unwrap() <= k.ell(j + 1).unwrap());
            }
        }
    }

    #[test]
    fn partitions_cover_components(n in 1usize..7, k in 0usize..50, pick in 0usize..7) {
        let mut policies = vec![SelectionPolicy::FullAggregate];
        if n >= 2 {
            policies.push(SelectionPolicy::IapFixed { index: pick % n });
            policies.push(SelectionPolicy::IapCyclic);
        } else {
            let single = SelectionPolicy::IapFixed { index: 0 };
            prop_assert!(single.validate(1).is_err());
        }
        for policy in policies {
            policy.validate(n).unwrap();
            let part = policy.partition(k, n);
            prop_assert!(!part.linearized.is_empty() || n == 1 && policy == SelectionPolicy::FullAggregate);
            let mut all: Vec<usize> = part.kept.iter().chain(&part.linearized).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            if policy == SelectionPolicy::IapCyclic {
                prop_assert_eq!(part.kept.clone(), vec![k % n]);
            }
        }
    }

    #[test]
    fn delays_are_bounded_and_clipped(tau in 0usize..6, k in 0usize..40, n in 1usize..5, seed in any::<u64>()) {
        for sched in [
            DelaySchedule::constant(tau),
            DelaySchedule::cyclic(tau),
            DelaySchedule::uniform_random(tau, seed),
        ] {
            let d = sched.delays_at(k, n);
            prop_assert_eq!(d.len(), n);
            prop_assert!(d.iter().all(|&v| v <= tau.min(k)));
            prop_assert_eq!(d.clone(), sched.delays_at(k, n));
        }
    }

    #[test]
    fn euclidean_prox_step_is_optimal(
        s in point(3, -3.0, 3.0),
        x in point(3, -3.0, 3.0),
        step in 0.01..5.0f64,
        weight in 0.0..2.0f64,
    ) {
        let k = LegendreKernel::euclidean(3);
        for h in [Regularizer::Zero, Regularizer::L1 { weight, radius: None }, Regularizer::IndicatorBox { lower: -1.0, upper: 2.0 }] {
            let inst = SubproblemInstance { kernel: &k, regularizer: h, kept: vec![], aggregated: s.clone(), anchor: x.clone(), step };
            let u = solve(&inst).unwrap();
            prop_assert!(inst.optimality_residual(&u).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn burg_step_is_interior_and_optimal(
        s in point(3, -3.0, 3.0),
        x in point(3, 0.05, 10.0),
        step in 0.01..2.0f64,
        weight in 0.0..1.0f64,
    ) {
        // Without a quadratic part the Burg subproblem is bounded below only
        // when every coordinate's linear coefficient stays positive.
        prop_assume!(s.iter().zip(x.iter()).all(|(sj, xj)| sj + weight + 1.0 / (step * xj) > 1e-6));
        let k = LegendreKernel::burg(3);
        let inst = SubproblemInstance {
            kernel: &k,
            regularizer: Regularizer::L1Positive { weight },
            kept: vec![],
            aggregated: s,
            anchor: x,
            step,
        };
        let u = solve(&inst).unwrap();
        prop_assert!(u.iter().all(|&v| v > 0.0));
        let scale = 1.0 + inst.aggregated.amax() + inst.anchor.map(|v| 1.0 / v).amax() / step;
        prop_assert!(inst.optimality_residual(&u).unwrap() <= 1e-9 * scale);
    }

    #[test]
    fn kept_quadratic_matches_linear_solve(
        x in point(2, -3.0, 3.0),
        s in point(2, -3.0, 3.0),
        step in 0.01..2.0f64,
        c in 0.1..3.0f64,
    ) {
        let k = LegendreKernel::euclidean(2);
        let comp = ComponentOracle::new(ComponentKind::SquaredNorm { weight: c }, 2.0 * c);
        let inst = SubproblemInstance { kernel: &k, regularizer: Regularizer::Zero, kept: vec![&comp], aggregated: s.clone(), anchor: x.clone(), step };
        let u = solve(&inst).unwrap();
        // (2c + 1/α)u = x/α − s.
        let expected = (&x / step - &s) / (2.0 * c + 1.0 / step);
        prop_assert!((&u - expected).amax() <= 1e-12 * (1.0 + x.amax() / step + s.amax()));
    }

    #[test]
    fn step_and_rate_formulas(l in 0.1..100.0f64, mu_frac in 0.001..1.0f64, tau in 0usize..20) {
        let mu = mu_frac * l;
        let ell = tau as f64 + 1.0;
        let a = linear_step(l, mu, tau, ell);
        prop_assert!(a > 0.0 && a <= 1.0 / l * (1.0 + 1e-12));
        prop_assert!(linear_step(l, mu, tau + 1, ell + 1.0) < a);
        prop_assert!(sublinear_step(l, tau + 1, ell + 1.0) < sublinear_step(l, tau, ell));
        let r = rate_linear(a, mu);
        prop_assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn recursion_condition_matches_closed_form(a in 0.05..0.99f64, c in 0.0..2.0f64, k0 in 0usize..8) {
        let closed = c / (1.0 - a) * (1.0 - a.powi(k0 as i32 + 1)) / a.powi(k0 as i32);
        let value = recursion_condition_value(a, c, k0);
        prop_assert!((value - closed).abs() <= 1e-10 * (1.0 + closed));
    }

    #[test]
    fn inline_matrices_round_trip(rows in 1usize..5, cols in 1usize..5, seed in prop::collection::vec(-1e6..1e6f64, 25)) {
        let m = DMatrix::from_fn(rows, cols, |i, j| seed[i * 5 + j]);
        let inline: Vec<String> = m
            .row_iter()
            .map(|r| r.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(","))
            .collect();
        prop_assert_eq!(parse_inline_matrix(&inline.join(";")).unwrap(), m.clone());
        prop_assert_eq!(parse_csv_matrix(&inline.join("\n")).unwrap(), m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sublinear_certificate_on_delayed_lasso(tau in 0usize..6, seed in any::<u64>(), random in any::<bool>()) {
        let lasso = problems::desk_lasso().unwrap();
        let mut cfg = SolverConfig::new(lasso.clone(), 400);
        cfg.delays = if random { DelaySchedule::uniform_random(tau, seed) } else { DelaySchedule::constant(tau) };
        let trace = run(&cfg).unwrap();
        let x_star = lasso.known_solutions().unwrap()[0].clone();
        let cert = certify_sublinear(&trace, &lasso, &x_star).unwrap();
        prop_assert!(cert.pass, "{:?}", cert.checks);
        prop_assert_eq!(cert.pass, cert.max_violation <= CERTIFICATE_TOL);
        if tau == 0 {
            let phi_star = lasso.objective(&x_star).unwrap();
            prop_assert_eq!(lyapunov_t(&trace, &lasso, 7, &x_star).unwrap(), trace.objective[7] - phi_star);
        }
    }

    #[test]
    fn pg_equals_plain_full_aggregation(k in 1usize..60) {
        let lasso = problems::desk_lasso().unwrap();
        let pg = run(&named_method(MethodTag::Pg, lasso.clone(), 0, k).unwrap()).unwrap();
        let plain = run(&SolverConfig::new(lasso, k)).unwrap();
        for (a, b) in pg.iterates.iter().zip(&plain.iterates) {
            prop_assert!((a - b).amax() <= 1e-12);
        }
    }

    #[test]
    fn burg_iterates_stay_interior(mu_l1 in 0.0..0.5f64, k in 1usize..200) {
        let poisson = problems::desk_poisson(0.0, mu_l1).unwrap();
        let trace = run(&named_method(MethodTag::Nolips, poisson, 0, k).unwrap()).unwrap();
        prop_assert!(trace.iterates.iter().all(|x| x.iter().all(|&v| v > 0.0)));
    }
}
