//! Named property suites behind `pfsim verify`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{regularization_experiment, resolvent_smooth, ExperimentFamily, Quantity};
use crate::error::Result;
use crate::grid::{DiscreteLaplacian, Field, Grid, Lp};
use crate::initial::Profile;
use crate::potentials::PotentialSpec;
use crate::stepper::{run_observed, step_theta_frozen, ModelConfig, StepperParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Conservation,
    Dissipation,
    Contraction,
    Smoothing,
    Separation,
    All,
}

impl Suite {
    const EACH: [Suite; 5] = [
        Suite::Conservation,
        Suite::Dissipation,
        Suite::Contraction,
        Suite::Smoothing,
        Suite::Separation,
    ];
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "conservation" => Ok(Suite::Conservation),
            "dissipation" => Ok(Suite::Dissipation),
            "contraction" => Ok(Suite::Contraction),
            "smoothing" => Ok(Suite::Smoothing),
            "separation" => Ok(Suite::Separation),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite '{other}' (conservation|dissipation|contraction|smoothing|separation|all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} {}", self.name, self.detail)
    }
}

fn check(name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Conservation => conservation(),
        Suite::Dissipation => dissipation(),
        Suite::Contraction => contraction(),
        Suite::Smoothing => smoothing(),
        Suite::Separation => separation(),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::EACH {
                out.extend(run_suite(s)?);
            }
            Ok(out)
        }
    }
}

/// `θ₀ = 1 + ½cos πx`, `χ₀ = 0.9 cos πx` on the unit interval.
pub fn cosine_config(variant: Variant, n_cells: usize) -> Result<ModelConfig> {
    let g = Grid::unit(n_cells)?;
    let theta0 = Profile::Cosine { a: 1.0, b: 0.5 }.evaluate(&g)?;
    let chi0 = Profile::Cosine { a: 0.0, b: 0.9 }.evaluate(&g)?;
    ModelConfig::new(variant, PotentialSpec::LOGARITHMIC, &g, theta0, chi0)
}

const CONSERVATION_TOL: f64 = 1e-11;
const ENERGY_TOL: f64 = 1e-10;

fn conservation() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for variant in [Variant::NonConserved, Variant::Conserved] {
        let config = cosine_config(variant, 128)?;
        let s0 = config.initial_state()?;
        let total0 = s0.theta.integral() + s0.chi.integral();
        let chi0 = s0.chi.integral();
        let theta0 = s0.theta.integral();
        let (mut drift, mut chi_drift, mut theta_drift) = (0.0f64, 0.0f64, 0.0f64);
        run_observed(&config, &StepperParams::with_dt(1e-3), 0.5, |s, _| {
            drift = drift.max((s.theta.integral() + s.chi.integral() - total0).abs());
            chi_drift = chi_drift.max((s.chi.integral() - chi0).abs());
            theta_drift = theta_drift.max((s.theta.integral() - theta0).abs());
        })?;
        out.push(check(
            format!("conservation.{variant}.theta_plus_chi"),
            drift <= CONSERVATION_TOL,
            format!("drift={drift:e} tol={CONSERVATION_TOL:e}"),
        ));
        if variant == Variant::Conserved {
            out.push(check(
                "conservation.conserved.theta",
                theta_drift <= CONSERVATION_TOL,
                format!("drift={theta_drift:e} tol={CONSERVATION_TOL:e}"),
            ));
            out.push(check(
                "conservation.conserved.chi",
                chi_drift <= CONSERVATION_TOL,
                format!("drift={chi_drift:e} tol={CONSERVATION_TOL:e}"),
            ));
        }
    }
    Ok(out)
}

fn dissipation() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for variant in [Variant::NonConserved, Variant::Conserved] {
        let config = cosine_config(variant, 128)?;
        let mut prev = config.initial_state().and_then(|s| {
            crate::energy::energy_total(&s.theta, &s.chi, &config.potential, config.laplacian())
        })?;
        let mut worst = f64::NEG_INFINITY;
        run_observed(&config, &StepperParams::with_dt(1e-3), 0.5, |_, r| {
            worst = worst.max(r.energy.total - prev.total);
            prev = r.energy;
        })?;
        out.push(check(
            format!("dissipation.{variant}.energy_monotone"),
            worst <= ENERGY_TOL,
            format!("max_increase={worst:e} tol={ENERGY_TOL:e}"),
        ));
    }
    Ok(out)
}

/// Signed random field with `‖p‖₁ = size`.
pub fn random_perturbation(grid: &Arc<Grid>, size: f64, rng: &mut impl Rng) -> Result<Field> {
    let raw: Vec<f64> = (0..grid.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = Field::from_values(grid, raw)?;
    let scale = size / f.norm(Lp::L1);
    Ok(f.map(|v| v * scale))
}

/// Positive field with log-uniform nodal values in `[e⁻³, e³]`.
pub fn random_positive_field(grid: &Arc<Grid>, rng: &mut impl Rng) -> Result<Field> {
    let raw: Vec<f64> = (0..grid.n_cells()).map(|_| rng.gen_range(-3.0f64..3.0).exp()).collect();
    Field::from_values(grid, raw)
}

/// Phase profile prescribed in the contraction runs.
pub fn prescribed_chi(grid: &Arc<Grid>, t: f64) -> Field {
    let amp = 0.6 * (3.0 * t).sin();
    Field::from_fn(grid, |x| amp * (std::f64::consts::PI * x).cos())
}

/// `‖θ₁ - θ₂‖₁` after each of `steps` frozen-phase steps, starting with the
/// initial distance.
pub fn contraction_distances(n_cells: usize, steps: usize, dt: f64, seed: u64) -> Result<Vec<f64>> {
    let g = Grid::unit(n_cells)?;
    let a = DiscreteLaplacian::neumann(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut th1 = Profile::Cosine { a: 1.0, b: 0.5 }.evaluate(&g)?;
    let mut th2 = th1.zip_map(&random_perturbation(&g, 0.1, &mut rng)?, |a, b| a + b)?;
    let params = StepperParams::with_dt(dt);
    let dist = |a: &Field, b: &Field| a.zip_map(b, |x, y| x - y).map(|d| d.norm(Lp::L1));
    let mut out = vec![dist(&th1, &th2)?];
    let mut chi_old = prescribed_chi(&g, 0.0);
    for k in 1..=steps {
        let chi_new = prescribed_chi(&g, k as f64 * dt);
        th1 = step_theta_frozen(&a, &th1, &chi_old, &chi_new, dt, &params)?.0;
        th2 = step_theta_frozen(&a, &th2, &chi_old, &chi_new, dt, &params)?.0;
        out.push(dist(&th1, &th2)?);
        chi_old = chi_new;
    }
    Ok(out)
}

fn contraction() -> Result<Vec<Check>> {
    const TOL: f64 = 1e-10;
    let d = contraction_distances(128, 1000, 1e-3, 7)?;
    let worst = d.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![check(
        "contraction.l1_nonincreasing",
        worst <= TOL,
        format!(
            "steps={} initial={:e} final={:e} max_increase={worst:e} tol={TOL:e}",
            d.len() - 1,
            d[0],
            d[d.len() - 1]
        ),
    )])
}

fn smoothing() -> Result<Vec<Check>> {
    const TOL: f64 = 1e-12;
    let g = Grid::unit(128)?;
    let a = DiscreteLaplacian::neumann(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut jstar_worst, mut monotone_failures) = (f64::NEG_INFINITY, 0usize);
    for _ in 0..100 {
        let theta0 = random_positive_field(&g, &mut rng)?;
        let mut prev = f64::INFINITY;
        for n in [1, 10, 100, 1000] {
            let rep = resolvent_smooth(&theta0, n, &a)?;
            jstar_worst = jstar_worst.max(rep.jstar_after - rep.jstar_before);
            if rep.dual_distance >= prev {
                monotone_failures += 1;
            }
            prev = rep.dual_distance;
        }
    }
    Ok(vec![
        check(
            "smoothing.jstar_decreases",
            jstar_worst <= TOL,
            format!("fields=100 max_increase={jstar_worst:e} tol={TOL:e}"),
        ),
        check(
            "smoothing.dual_distance_monotone",
            monotone_failures == 0,
            format!("fields=100 violations={monotone_failures}"),
        ),
    ])
}

/// Asymmetric phase spike starting close to the pure phase `-1`.
pub fn separation_family() -> ExperimentFamily {
    ExperimentFamily::unit(
        Variant::NonConserved,
        Profile::Constant(1.0),
        Profile::Spike {
            base: -0.999,
            height: 1.998,
            lo: 0.0,
            hi: 0.5,
        },
        vec![128, 256, 512],
        1e-3,
    )
}

fn separation() -> Result<Vec<Check>> {
    let report = regularization_experiment(&separation_family())?;
    let mut out = Vec::new();
    for level in &report.levels {
        let chi = report.row(level.n_cells, 3.0).map_or(f64::NAN, |r| r.chi_max_abs);
        let bound = level.chi_bound.unwrap_or(f64::NAN);
        out.push(check(
            format!("separation.bound.n{}", level.n_cells),
            chi <= bound + 1e-3,
            format!("chi_max_abs={chi} bound={bound} u_max={}", level.u_window_max.unwrap_or(f64::NAN)),
        ));
    }
    if let Some(flag) = report.flag(Quantity::Separation, 3.0) {
        out.push(check(
            "separation.delta_refinement",
            flag.stable,
            format!(
                "delta={:?} spread={:e}",
                report.series(Quantity::Separation, 3.0),
                flag.spread
            ),
        ));
    }
    Ok(out)
}
