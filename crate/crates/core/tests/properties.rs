//! Randomized invariants. Every strategy is driven by proptest's seeded runner.

use proptest::prelude::*;

use poincare::chebyshev::ChebyshevGrid;
use poincare::green::build_kernel;
use poincare::oracle::{integrate_original, OracleOptions};
use poincare::problem::{root_systems, Problem};
use poincare::quadrature::{integrate, integrate_to_infinity, Tolerance};
use poincare::solver::{solve_root, SolverOptions};
use poincare::spectral::{
    find_roots, poly_from_roots, reduced_linear_coefficients, root_gap_product, shift_spectrum,
    vandermonde_product,
};

/// Distinct roots in decreasing order, gaps at least 0.25.
fn spectrum(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_n)
        .prop_flat_map(|n| prop::collection::vec(0.25f64..1.5, n))
        .prop_flat_map(|gaps| (Just(gaps), -3.0f64..3.0))
        .prop_map(|(gaps, top)| {
            let mut roots = vec![top];
            for g in &gaps[1..] {
                let next = roots.last().unwrap() - g;
                roots.push(next);
            }
            roots
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn roots_are_recovered(roots in spectrum(6)) {
        let a = poly_from_roots(&roots);
        let s = find_roots(&a).unwrap();
        for (x, y) in s.lambda.iter().zip(&roots) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn shifted_roots_are_differences(roots in spectrum(6)) {
        let a = poly_from_roots(&roots);
        let s = find_roots(&a).unwrap();
        let n = roots.len();
        for i in 1..=n {
            let shifted = shift_spectrum(&s, i);
            let b = reduced_linear_coefficients(&a, s.lambda[i - 1]);
            // the shifted set is exactly the root set of the reduced linear part
            let from_b = poly_from_roots(&shifted.gamma);
            for (x, y) in from_b.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()), "{x} vs {y}");
            }
            prop_assert_eq!(shifted.case_index, 1 + (i - 1));
        }
    }

    #[test]
    fn vandermonde_is_product_of_gap_products(roots in spectrum(5)) {
        // prod_i pi_i = (-1)^{n(n-1)/2} V^2
        let a = poly_from_roots(&roots);
        let s = find_roots(&a).unwrap();
        let n = roots.len();
        let v = vandermonde_product(&s.lambda);
        let prod: f64 = (1..=n).map(|i| root_gap_product(&s, i)).product();
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((prod - sign * v * v).abs() < 1e-9 * (1.0 + v * v));
    }

    #[test]
    fn kernel_has_unit_jump_and_solves_the_operator(roots in spectrum(6), pick in 0usize..6, u in 0.05f64..3.0, left in any::<bool>()) {
        let a = poly_from_roots(&roots);
        let s = find_roots(&a).unwrap();
        let i = 1 + pick % roots.len();
        let k = build_kernel(&shift_spectrum(&s, i)).unwrap();
        let d = roots.len() - 1;
        prop_assert!((k.jump(d - 1) - 1.0).abs() < 1e-10);
        for j in 0..d - 1 {
            prop_assert!(k.jump(j).abs() < 1e-10);
        }
        let b = k.operator();
        let t = if left { 1.0 - u } else { 1.0 + u };
        let terms: Vec<f64> = (0..=d).map(|j| if j == d { 1.0 } else { b[j] } * k.derivative(t, 1.0, j)).collect();
        let scale = terms.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert!(terms.iter().sum::<f64>().abs() < 1e-10 * scale);
    }

    #[test]
    fn chebyshev_interpolates_exponentials(rate in -2.0f64..2.0, t in 0.0f64..4.0) {
        let g = ChebyshevGrid::new(0.0, 4.0, 40);
        let vals: Vec<f64> = g.nodes.iter().map(|x| (rate * x).exp()).collect();
        let exact = (rate * t).exp();
        prop_assert!((g.interpolate(&vals, t) - exact).abs() < 1e-11 * exact.max(1.0));
    }

    #[test]
    fn tail_quadrature_matches_closed_form(rate in 0.2f64..4.0, start in 0.0f64..5.0, shift in 0.0f64..3.0) {
        let tol = Tolerance::new(1e-13, 1e-12);
        let r = integrate_to_infinity(|s| (-rate * (s - shift)).exp(), start, rate, tol);
        let exact = (-rate * (start - shift)).exp() / rate;
        prop_assert!((r.value - exact).abs() < 1e-10 * exact.max(1.0));
        let f = integrate(|s| s.cos(), 0.0, start, tol);
        prop_assert!((f.value - start.sin()).abs() < 1e-12);
    }

    #[test]
    fn oracle_follows_pure_exponentials(roots in spectrum(4), pick in 0usize..4) {
        let a = poly_from_roots(&roots);
        let p = Problem::unperturbed(&a, 0.0);
        let lambda = roots[pick % roots.len()];
        let y0: Vec<f64> = (0..roots.len()).map(|j| lambda.powi(j as i32)).collect();
        let traj = integrate_original(&p, &y0, &[0.5, 1.0], OracleOptions::default()).unwrap();
        let exact = lambda.exp();
        let rel = (traj.states[1][0] - exact).abs() / exact;
        // error amplification by the fastest mode over [0, 1]
        let spread = (roots[0] - roots[roots.len() - 1]).exp();
        prop_assert!(rel < 1e-8 * spread, "{rel}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    /// Second order, both roots: z' + 2z = -r0 - z^2 with r0 = c e^{-k t};
    /// the fixed point must satisfy the reduced ODE and stay of size |c|.
    #[test]
    fn small_perturbations_give_small_fixed_points(c in -0.05f64..0.05, k in 0.5f64..3.0) {
        let src = format!("{c}*exp(-{k}*t)");
        let p = Problem::from_sources(&[-1.0, 0.0], &[src.as_str(), "0"], 0.0).unwrap();
        let (_, _, systems) = root_systems(&p).unwrap();
        for sys in systems {
            let (disc, z, cert) = solve_root(&p, sys, SolverOptions { grid_points: 96, ..SolverOptions::new(30.0) }).unwrap();
            prop_assert!(cert.converged);
            prop_assert!(cert.max_ratio() < 1.0);
            let ode = disc.ode_residual(&z).iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
            prop_assert!(ode < 1e-8, "{ode}");
            // both kernels have mass at most 1/2, so |z| <= |c|/2 up to the z^2 term
            prop_assert!(z.norm0 <= 1.1 * 0.5 * c.abs() + 1e-12);
        }
    }
}
