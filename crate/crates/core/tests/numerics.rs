//! Solver-level behaviour on the reference problem: grid refinement,
//! sampled Lipschitz constants, and tolerance-stable hypothesis verdicts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poincare::hypotheses::{evaluate_hypotheses, HypothesisOptions};
use poincare::problem::{root_systems, Problem};
use poincare::quadrature::Tolerance;
use poincare::solver::{solve_root, Discretization, IterateGrid, SolverOptions};

fn e1() -> Problem {
    Problem::from_sources(&[-6.0, 11.0, -6.0], &["(1+t)^(-3)", "0", "0"], 0.0).unwrap()
}

fn options(points: usize) -> SolverOptions {
    SolverOptions {
        grid_points: points,
        tol: 1e-12,
        ..SolverOptions::new(120.0)
    }
}

#[test]
fn refining_the_grid_changes_the_solution_less_each_time() {
    let p = e1();
    let (_, _, systems) = root_systems(&p).unwrap();
    for sys in systems {
        let sols: Vec<IterateGrid> = [65, 129, 257]
            .iter()
            .map(|&m| solve_root(&p, sys.clone(), options(m)).unwrap().1)
            .collect();
        let fine = &sols[2];
        let gap = |coarse: &IterateGrid| {
            coarse
                .nodes()
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    (0..coarse.jet_len())
                        .map(|j| {
                            (coarse.values[j][k] - fine.grid.interpolate(&fine.values[j], t)).abs()
                        })
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        };
        let (g65, g129) = (gap(&sols[0]), gap(&sols[1]));
        assert!(
            g129 <= g65 || g129 < 1e-11,
            "root {}: {g65:e} -> {g129:e}",
            sys.index
        );
        assert!(g129 < 1e-8, "root {}: {g129:e}", sys.index);
    }
}

/// Random iterates in the ball of radius `eta`, smooth so interpolation is exact enough.
fn random_iterate(disc: &Discretization, rng: &mut ChaCha8Rng, eta: f64) -> IterateGrid {
    let base = disc.zero();
    let jet = base.jet_len();
    let nodes = base.nodes().to_vec();
    let t0 = nodes[0];
    let mut values = vec![vec![0.0; nodes.len()]; jet];
    let amp: f64 = rng.gen_range(0.1..1.0) * eta / jet as f64 / 2.0;
    let rate: f64 = rng.gen_range(0.2..1.0);
    let phase: f64 = rng.gen_range(0.0..6.0);
    // z = amp e^{-rate t} cos(t + phase); d^j/dt^j multiplies by (-rate + i)^j
    let (modulus, angle) = ((rate * rate + 1.0).sqrt(), (1.0f64).atan2(-rate));
    for (k, &t) in nodes.iter().enumerate() {
        let e = amp * (-rate * (t - t0)).exp();
        for (j, vals) in values.iter_mut().enumerate() {
            vals[k] = e * modulus.powi(j as i32) * (t + phase + j as f64 * angle).cos();
        }
    }
    IterateGrid::from_values(base.grid.clone(), values, base.tail_rate)
}

#[test]
fn sampled_lipschitz_constant_stays_below_one() {
    let p = e1();
    let (_, _, systems) = root_systems(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for sys in systems {
        let disc = Discretization::new(&p, sys.clone(), options(96)).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..6 {
            let z = random_iterate(&disc, &mut rng, 0.5);
            let w = random_iterate(&disc, &mut rng, 0.5);
            let num = disc.apply_t(&z).distance(&disc.apply_t(&w));
            let den = z.distance(&w);
            if den > 0.0 {
                worst = worst.max(num / den);
            }
        }
        assert!(
            worst < 1.0,
            "root {}: sampled Lipschitz constant {worst}",
            sys.index
        );
    }
}

#[test]
fn verdicts_do_not_depend_on_quadrature_tolerance() {
    let p = e1();
    let (_, _, systems) = root_systems(&p).unwrap();
    for sys in systems.iter().take(2) {
        let loose = evaluate_hypotheses(
            &p,
            sys,
            HypothesisOptions {
                t_max: 64.0,
                tol: Tolerance::new(1e-9, 1e-8),
            },
        );
        let tight = evaluate_hypotheses(
            &p,
            sys,
            HypothesisOptions {
                t_max: 64.0,
                tol: Tolerance::new(1e-12, 1e-10),
            },
        );
        assert_eq!(loose.verdicts.len(), tight.verdicts.len());
        for (a, b) in loose.verdicts.iter().zip(&tight.verdicts) {
            assert_eq!(a.hypothesis, b.hypothesis);
            assert_eq!(a.verdict, b.verdict, "{} {}", a.hypothesis, a.quantity);
            assert!(
                (a.value - b.value).abs() <= 1e-6 * (1.0 + b.value.abs()),
                "{} {}: {} vs {}",
                a.hypothesis,
                a.quantity,
                a.value,
                b.value
            );
        }
    }
}
