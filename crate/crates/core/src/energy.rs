//! Total energy
//!
//! ```text
//! E(θ, χ) = ∫ θ + (-1 - log θ) + χ + ½|∇χ|² + b̂(χ) - ½χ²
//! ```
//!
//! and the dissipation rate that balances it along solutions.

use crate::error::{Error, Result};
use crate::grid::{DiscreteLaplacian, Field};
use crate::potentials::{big_jstar, PotentialSpec};
use crate::stepper::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    /// `∫ θ`
    pub theta_part: f64,
    /// `∫ (-1 - log θ)`
    pub jstar_part: f64,
    /// `∫ χ`
    pub chi_linear: f64,
    /// `½ ⟨Aχ, χ⟩`
    pub grad_part: f64,
    /// `∫ b̂(χ)`
    pub bhat_part: f64,
    /// `-½ ∫ χ²`
    pub quad_part: f64,
    pub total: f64,
}

pub fn energy_total(
    theta: &Field,
    chi: &Field,
    spec: &PotentialSpec,
    a: &DiscreteLaplacian,
) -> Result<EnergyBreakdown> {
    theta.check_same_grid(chi)?;
    let jstar_part = big_jstar(theta)?;
    spec.check_field(chi)?;
    let vol = chi.grid().volumes();
    let mut bhat_part = 0.0;
    let mut quad_part = 0.0;
    for (&c, &w) in chi.values().iter().zip(vol) {
        bhat_part += w * spec.bhat(c)?;
        quad_part -= 0.5 * w * c * c;
    }
    let theta_part = theta.integral();
    let chi_linear = chi.integral();
    let grad_part = 0.5 * a.quadratic_form(chi)?;
    let total = theta_part + jstar_part + chi_linear + grad_part + bhat_part + quad_part;
    Ok(EnergyBreakdown {
        theta_part,
        jstar_part,
        chi_linear,
        grad_part,
        bhat_part,
        quad_part,
        total,
    })
}

/// Conserved: `⟨Au, u⟩ + ⟨Aw, w⟩`. Non-conserved: `⟨Au, u⟩ + ‖χ_t‖²`,
/// with `w_or_chit` holding `χ_t`.
pub fn dissipation_rate(
    variant: Variant,
    u: &Field,
    w_or_chit: &Field,
    a: &DiscreteLaplacian,
) -> Result<f64> {
    u.check_same_grid(w_or_chit)?;
    let heat = a.quadratic_form(u)?;
    let phase = match variant {
        Variant::Conserved => a.quadratic_form(w_or_chit)?,
        Variant::NonConserved => w_or_chit.inner(w_or_chit)?,
    };
    Ok(heat + phase)
}

/// One saved point of a trajectory: energy and the dissipation integral
/// accumulated since `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipated: f64,
}

/// Defect of the discrete energy balance,
/// `|Σ dt·D_k - (E(0) - E(t_end))|`.
pub fn energy_equality_residual(records: &[EnergyRecord]) -> Result<f64> {
    if records.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let first = records[0];
    let last = records[records.len() - 1];
    let drop = first.energy - last.energy;
    Ok(((last.dissipated - first.dissipated) - drop).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::{E, PI};

    #[test]
    fn energy_examples() {
        let g = Grid::unit(20).unwrap();
        let a = DiscreteLaplacian::neumann(&g);
        let log = PotentialSpec::LOGARITHMIC;

        let e = energy_total(&Field::constant(&g, 1.0), &Field::zeros(&g), &log, &a).unwrap();
        assert!(e.total.abs() < 1e-14);

        let e = energy_total(&Field::constant(&g, E), &Field::zeros(&g), &log, &a).unwrap();
        assert!((e.total - (E - 2.0)).abs() < 1e-13);
        assert!((e.total - 0.718282).abs() < 1e-6);

        let e = energy_total(&Field::constant(&g, 1.0), &Field::constant(&g, 0.5), &log, &a).unwrap();
        let bhat = 1.5 * 1.5f64.ln() + 0.5 * 0.5f64.ln();
        assert!((e.total - (0.5 + bhat - 0.125)).abs() < 1e-13);
        assert!((e.total - 0.636624).abs() < 1e-6);
    }

    #[test]
    fn breakdown_sums_and_signs() {
        let g = Grid::unit(50).unwrap();
        let a = DiscreteLaplacian::neumann(&g);
        let theta = Field::from_fn(&g, |x| 1.0 + 0.5 * (3.0 * x).sin());
        let chi = Field::from_fn(&g, |x| 0.8 * (PI * x).cos());
        for spec in [PotentialSpec::LOGARITHMIC, PotentialSpec::POLYNOMIAL] {
            let e = energy_total(&theta, &chi, &spec, &a).unwrap();
            let sum = e.theta_part + e.jstar_part + e.chi_linear + e.grad_part + e.bhat_part + e.quad_part;
            assert!((sum - e.total).abs() <= 1e-12 * e.total.abs().max(1.0));
            assert!(e.grad_part >= 0.0 && e.bhat_part >= 0.0);
        }
    }

    #[test]
    fn energy_domain_errors() {
        let g = Grid::unit(8).unwrap();
        let a = DiscreteLaplacian::neumann(&g);
        let log = PotentialSpec::LOGARITHMIC;
        assert!(energy_total(&Field::constant(&g, 0.0), &Field::zeros(&g), &log, &a).is_err());
        assert!(energy_total(&Field::constant(&g, 1.0), &Field::constant(&g, 1.0), &log, &a).is_err());
    }

    #[test]
    fn dissipation_examples() {
        let g = Grid::unit(200).unwrap();
        let a = DiscreteLaplacian::neumann(&g);
        let c = Field::constant(&g, -2.0);
        assert_eq!(dissipation_rate(Variant::Conserved, &c, &Field::constant(&g, 4.0), &a).unwrap(), 0.0);

        let u = Field::from_fn(&g, |x| (PI * x).cos());
        let d = dissipation_rate(Variant::Conserved, &u, &Field::zeros(&g), &a).unwrap();
        assert!((d - PI * PI / 2.0).abs() < 1e-3);

        let chit = Field::constant(&g, 0.5);
        let d = dissipation_rate(Variant::NonConserved, &Field::constant(&g, -1.0), &chit, &a).unwrap();
        assert!((d - 0.25).abs() < 1e-14);
    }

    #[test]
    fn energy_residual_examples() {
        let rec = |t, e, d| EnergyRecord { t, energy: e, dissipated: d };
        let flat = [rec(0.0, 1.5, 0.0), rec(1.0, 1.5, 0.0), rec(2.0, 1.5, 0.0)];
        assert!(energy_equality_residual(&flat).unwrap() < 1e-10);
        assert_eq!(energy_equality_residual(&flat[..1]).unwrap_err(), Error::EmptyTrajectory);
        let r = energy_equality_residual(&[rec(0.0, 2.0, 0.0), rec(1.0, 1.0, 0.9)]).unwrap();
        assert!((r - 0.1).abs() < 1e-14);
    }

    #[test]
    fn coercive_lower_bound() {
        // pointwise minimum of χ + b̂(χ) - χ²/2 by dense scalar search; θ-part ≥ 0
        let log = PotentialSpec::LOGARITHMIC;
        let m = (1..200_000)
            .map(|k| -1.0 + 2.0 * k as f64 / 200_000.0)
            .map(|r| r + log.bhat(r).unwrap() - 0.5 * r * r)
            .fold(f64::INFINITY, f64::min);

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = Grid::unit(40).unwrap();
        let a = DiscreteLaplacian::neumann(&g);
        for _ in 0..200 {
            let th: Vec<f64> = (0..40).map(|_| rng.gen_range(1e-3..50.0)).collect();
            let ch: Vec<f64> = (0..40).map(|_| rng.gen_range(-0.999..0.999)).collect();
            let e = energy_total(
                &Field::from_values(&g, th).unwrap(),
                &Field::from_values(&g, ch).unwrap(),
                &log,
                &a,
            )
            .unwrap();
            assert!(e.total >= m - 1e-9);
        }
    }
}
