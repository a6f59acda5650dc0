//! Trajectory-level invariants of the implicit stepper.

use std::f64::consts::PI;

use penrose_fife::grid::{DiscreteLaplacian, Field, Grid, Lp};
use penrose_fife::stepper::{run, run_observed, step_theta_frozen};
use penrose_fife::{ModelConfig, PotentialSpec, StepperParams, Variant};
use proptest::prelude::*;

fn model(variant: Variant, n: usize, eps: f64) -> ModelConfig {
    let g = Grid::unit(n).unwrap();
    // √2 cos 2πx has unit L² norm on [0, 1]
    let theta0 = Field::from_fn(&g, |x| 1.0 + 0.4 * (PI * x).cos());
    let chi0 = Field::from_fn(&g, |x| 0.6 * (PI * x).cos() + eps * 2f64.sqrt() * (2.0 * PI * x).cos());
    ModelConfig::new(variant, PotentialSpec::LOGARITHMIC, &g, theta0, chi0).unwrap()
}

#[test]
fn identification_holds_after_every_step() {
    for variant in [Variant::NonConserved, Variant::Conserved] {
        let mut worst = 0.0f64;
        run_observed(&model(variant, 64, 0.0), &StepperParams::with_dt(1e-2), 0.5, |s, _| {
            worst = worst.max(s.identification_defect());
        })
        .unwrap();
        assert!(worst <= 1e-12, "{variant}: {worst:e}");
    }
}

#[test]
fn continuous_dependence_is_linear_in_the_perturbation() {
    for variant in [Variant::NonConserved, Variant::Conserved] {
        let params = StepperParams {
            dt: 1e-2,
            ..Default::default()
        };
        let base = run(&model(variant, 64, 0.0), &params, 1.0).unwrap();
        let a = DiscreteLaplacian::neumann(base.first().state.chi.grid());
        let mut ratios = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let pert = run(&model(variant, 64, eps), &params, 1.0).unwrap();
            assert_eq!(pert.samples.len(), base.samples.len());
            let sup = base
                .samples
                .iter()
                .zip(&pert.samples)
                .map(|(s1, s2)| {
                    assert!((s1.state.t - s2.state.t).abs() < 1e-12);
                    let d = s1.state.chi.zip_map(&s2.state.chi, |a, b| a - b).unwrap();
                    a.norm_dual(&d).unwrap()
                })
                .fold(0.0, f64::max);
            ratios.push(sup / eps);
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi / lo < 1.5, "{variant}: ratios {ratios:?}");
    }
}

/// Cell averages of a field on the grid with half as many cells.
fn coarsen(f: &Field, coarse: &std::sync::Arc<Grid>) -> Field {
    let v = f.values();
    Field::from_values(coarse, v.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()).unwrap()
}

#[test]
fn self_convergence_first_order_in_time() {
    for variant in [Variant::NonConserved, Variant::Conserved] {
        let finals: Vec<Field> = [(32usize, 4e-2), (64, 2e-2), (128, 1e-2)]
            .iter()
            .map(|&(n, dt)| {
                let traj = run(&model(variant, n, 0.0), &StepperParams::with_dt(dt), 1.0).unwrap();
                traj.last().state.chi.clone()
            })
            .collect();
        let diff = |k: usize| {
            let c = coarsen(&finals[k + 1], finals[k].grid());
            finals[k].zip_map(&c, |a, b| a - b).unwrap().norm(Lp::L2)
        };
        let (e1, e2) = (diff(0), diff(1));
        let order = (e1 / e2).log2();
        assert!(order >= 0.9, "{variant}: e = {e1:e}, {e2:e}, order {order}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frozen_phase_l1_contraction(
        bumps in proptest::collection::vec(-0.5f64..0.5, 32),
        amp in 0.0f64..0.8,
        dt in 1e-3f64..5e-2,
    ) {
        let g = Grid::unit(32).unwrap();
        let a = DiscreteLaplacian::neumann(&g);
        let params = StepperParams::with_dt(dt);
        let mut th1 = Field::from_fn(&g, |x| 1.0 + 0.5 * (PI * x).cos());
        let mut th2 = Field::from_values(&g, th1.values().iter().zip(&bumps).map(|(t, b)| t + b).collect()).unwrap();
        let chi = |t: f64| Field::from_fn(&g, move |x| amp * (5.0 * t).sin() * (PI * x).cos());
        let l1 = |a: &Field, b: &Field| a.zip_map(b, |x, y| x - y).unwrap().norm(Lp::L1);
        let mut prev = l1(&th1, &th2);
        for k in 1..=40 {
            let (c0, c1) = (chi((k - 1) as f64 * dt), chi(k as f64 * dt));
            th1 = step_theta_frozen(&a, &th1, &c0, &c1, dt, &params).unwrap().0;
            th2 = step_theta_frozen(&a, &th2, &c0, &c1, dt, &params).unwrap().0;
            let d = l1(&th1, &th2);
            prop_assert!(d <= prev + 1e-10, "step {k}: {d} > {prev}");
            prev = d;
        }
    }
}
