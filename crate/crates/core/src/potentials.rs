//! Configuration nonlinearity `b = b̂'` and the conjugate pair
//! `j(v) = -log(-v)`, `j*(z) = -1 - log z` used for the temperature terms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::Field;

/// Logarithmic values closer than this to ±1 are rejected.
pub const LOG_DOMAIN_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `b̂(r) = (1+r)log(1+r) + (1-r)log(1-r)` on `(-1, 1)`.
    Logarithmic,
    /// `b̂(r) = r⁴/4` on the whole line.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
}

impl PotentialSpec {
    pub const LOGARITHMIC: PotentialSpec = PotentialSpec {
        kind: PotentialKind::Logarithmic,
    };
    pub const POLYNOMIAL: PotentialSpec = PotentialSpec {
        kind: PotentialKind::Polynomial,
    };

    /// Open domain `I = (lo, hi)`.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            PotentialKind::Logarithmic => (-1.0, 1.0),
            PotentialKind::Polynomial => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.kind == PotentialKind::Logarithmic
    }

    pub fn in_domain(&self, r: f64) -> bool {
        match self.kind {
            PotentialKind::Logarithmic => r.abs() < 1.0 - LOG_DOMAIN_GUARD,
            PotentialKind::Polynomial => r.is_finite(),
        }
    }

    fn check(&self, r: f64) -> Result<()> {
        if self.in_domain(r) {
            Ok(())
        } else {
            Err(Error::domain("potential", None, r))
        }
    }

    pub fn b(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.b_unchecked(r))
    }

    pub fn bhat(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(match self.kind {
            PotentialKind::Logarithmic => {
                (1.0 + r) * (1.0 + r).ln() + (1.0 - r) * (1.0 - r).ln()
            }
            PotentialKind::Polynomial => 0.25 * r.powi(4),
        })
    }

    pub fn bprime(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.bprime_unchecked(r))
    }

    /// Caller guarantees `in_domain(r)`.
    #[inline]
    pub(crate) fn b_unchecked(&self, r: f64) -> f64 {
        match self.kind {
            PotentialKind::Logarithmic => (1.0 + r).ln() - (1.0 - r).ln(),
            PotentialKind::Polynomial => r * r * r,
        }
    }

    #[inline]
    pub(crate) fn bprime_unchecked(&self, r: f64) -> f64 {
        match self.kind {
            PotentialKind::Logarithmic => 2.0 / ((1.0 - r) * (1.0 + r)),
            PotentialKind::Polynomial => 3.0 * r * r,
        }
    }

    /// First node outside the domain, if any.
    pub fn check_field(&self, chi: &Field) -> Result<()> {
        match chi.values().iter().position(|&r| !self.in_domain(r)) {
            Some(i) => Err(Error::domain("phase field", Some(i), chi.values()[i])),
            None => Ok(()),
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialKind::Logarithmic => "logarithmic",
            PotentialKind::Polynomial => "polynomial",
        })
    }
}

impl FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "logarithmic" => Ok(PotentialKind::Logarithmic),
            "polynomial" => Ok(PotentialKind::Polynomial),
            other => Err(format!("unknown potential '{other}'")),
        }
    }
}

pub fn b_eval(spec: &PotentialSpec, r: f64) -> Result<f64> {
    spec.b(r)
}

pub fn bhat_eval(spec: &PotentialSpec, r: f64) -> Result<f64> {
    spec.bhat(r)
}

pub fn bprime_eval(spec: &PotentialSpec, r: f64) -> Result<f64> {
    spec.bprime(r)
}

/// `j(v) = -log(-v)` for `v < 0`.
pub fn j_eval(v: f64) -> Result<f64> {
    if v < 0.0 && v.is_finite() {
        Ok(-(-v).ln())
    } else {
        Err(Error::domain("j", None, v))
    }
}

/// `j*(z) = -1 - log z` for `z > 0`.
pub fn jstar_eval(z: f64) -> Result<f64> {
    if z > 0.0 && z.is_finite() {
        Ok(-1.0 - z.ln())
    } else {
        Err(Error::domain("j*", None, z))
    }
}

fn integrate(f: &Field, what: &'static str, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut s = 0.0;
    for (i, (&v, &w)) in f.values().iter().zip(f.grid().volumes()).enumerate() {
        let val = g(v).map_err(|_| Error::domain(what, Some(i), v))?;
        s += w * val;
    }
    Ok(s)
}

/// `J(v) = ∫ j(v)`; every node must be negative.
pub fn big_j(v: &Field) -> Result<f64> {
    integrate(v, "J", j_eval)
}

/// `J*(θ) = ∫ (-1 - log θ)` for pointwise positive θ.
pub fn big_jstar(theta: &Field) -> Result<f64> {
    integrate(theta, "J*", jstar_eval)
}

/// Fenchel-Young gap `J(v) + J*(θ) - ⟨θ, v⟩ ≥ 0`, zero iff `θ = -1/v`.
pub fn fenchel_gap(v: &Field, theta: &Field) -> Result<f64> {
    let pairing = theta.inner(v)?;
    Ok(big_j(v)? + big_jstar(theta)? - pairing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    const LOG: PotentialSpec = PotentialSpec::LOGARITHMIC;
    const POLY: PotentialSpec = PotentialSpec::POLYNOMIAL;

    #[test]
    fn logarithmic_values() {
        assert_eq!(LOG.b(0.0).unwrap(), 0.0);
        assert_eq!(LOG.bhat(0.0).unwrap(), 0.0);
        assert!((LOG.b(0.5).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((LOG.b(0.5).unwrap() - 1.098612).abs() < 1e-6);
        let expect = 1.5 * 1.5f64.ln() + 0.5 * 0.5f64.ln();
        assert!((LOG.bhat(0.5).unwrap() - expect).abs() < 1e-15);
        assert!((LOG.bhat(0.5).unwrap() - 0.261624).abs() < 1e-6);
        assert!((LOG.bprime(0.5).unwrap() - 2.0 / 0.75).abs() < 1e-14);
    }

    #[test]
    fn logarithmic_domain() {
        assert!(matches!(LOG.b(1.0), Err(Error::DomainViolation { .. })));
        assert!(matches!(LOG.bhat(-1.0), Err(Error::DomainViolation { .. })));
        assert!(matches!(LOG.bprime(1.0 - 1e-15), Err(Error::DomainViolation { .. })));
        let r = 1.0 - 1e-8;
        assert!(LOG.b(r).unwrap() > 10.0);
        assert!(-LOG.b(-r).unwrap() > 10.0);
        assert!(LOG.bprime(r).unwrap() > 1e7);
    }

    #[test]
    fn polynomial_values() {
        assert_eq!(POLY.b(2.0).unwrap(), 8.0);
        assert_eq!(POLY.bhat(2.0).unwrap(), 4.0);
        assert_eq!(POLY.bprime(2.0).unwrap(), 12.0);
        assert!(POLY.b(1e3).is_ok());
    }

    #[test]
    fn conjugate_pair() {
        assert_eq!(j_eval(-1.0).unwrap(), 0.0);
        assert_eq!(jstar_eval(1.0).unwrap(), -1.0);
        let (v, z) = (-2.0, 0.5);
        assert!((v * z - (j_eval(v).unwrap() + jstar_eval(z).unwrap())).abs() < 1e-15);
        assert!(j_eval(0.0).is_err());
        assert!(jstar_eval(0.0).is_err());
    }

    #[test]
    fn integral_functionals() {
        let g = Grid::unit(10).unwrap();
        assert!((big_jstar(&Field::constant(&g, 1.0)).unwrap() + 1.0).abs() < 1e-14);
        assert!((big_jstar(&Field::constant(&g, std::f64::consts::E)).unwrap() + 2.0).abs() < 1e-14);
        assert!(big_j(&Field::constant(&g, -1.0)).unwrap().abs() < 1e-15);

        let mut bad = Field::constant(&g, 1.0);
        bad.values_mut()[3] = -0.1;
        assert_eq!(
            big_jstar(&bad).unwrap_err(),
            Error::DomainViolation {
                what: "J*",
                index: Some(3),
                value: -0.1
            }
        );
    }

    #[test]
    fn fenchel_gap_examples() {
        let g = Grid::unit(16).unwrap();
        let v = Field::from_fn(&g, |x| -0.5 - x);
        let theta = v.map(|u| -1.0 / u);
        assert!(fenchel_gap(&v, &theta).unwrap().abs() < 1e-12);

        let gap = fenchel_gap(&Field::constant(&g, -1.0), &Field::constant(&g, 2.0)).unwrap();
        assert!((gap - (1.0 - 2f64.ln())).abs() < 1e-14);
        assert!((gap - 0.306853).abs() < 1e-6);
    }

    #[test]
    fn jstar_is_sup_over_log_grid() {
        // j*(z) = sup_{v<0} (z v - j(v)); sample v on a fine log-spaced grid
        for &z in &[0.01, 0.3, 1.0, 4.0, 250.0] {
            let (best_val, best_v) = (0..=20_000)
                .map(|k| -(10f64).powf(-6.0 + 12.0 * k as f64 / 20_000.0))
                .map(|v| (z * v - j_eval(v).unwrap(), v))
                .fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a });
            let exact = jstar_eval(z).unwrap();
            assert!(best_val <= exact + 1e-12);
            assert!(exact - best_val < 1e-5, "z={z}");
            assert!((best_v * z + 1.0).abs() < 2e-3, "argmax {best_v} vs {}", -1.0 / z);
        }
    }

    proptest! {
        #[test]
        fn derivatives_consistent(r in -0.95f64..0.95, poly in any::<bool>()) {
            let spec = if poly { POLY } else { LOG };
            let d = 1e-5;
            let fd_b = (spec.bhat(r + d).unwrap() - spec.bhat(r - d).unwrap()) / (2.0 * d);
            let fd_bp = (spec.b(r + d).unwrap() - spec.b(r - d).unwrap()) / (2.0 * d);
            let b = spec.b(r).unwrap();
            let bp = spec.bprime(r).unwrap();
            prop_assert!((fd_b - b).abs() < 1e-6 * (1.0 + b.abs()));
            prop_assert!((fd_bp - bp).abs() < 1e-5 * (1.0 + bp.abs()));
        }

        #[test]
        fn monotone_and_convex(r in -0.99f64..0.99, s in -0.99f64..0.99, poly in any::<bool>()) {
            let spec = if poly { POLY } else { LOG };
            prop_assume!((r - s).abs() > 1e-6);
            let (lo, hi) = if r < s { (r, s) } else { (s, r) };
            prop_assert!(spec.b(lo).unwrap() < spec.b(hi).unwrap());
            prop_assert!(spec.bprime(r).unwrap() >= 0.0);
            let mid = spec.bhat(0.5 * (r + s)).unwrap();
            prop_assert!(mid <= 0.5 * (spec.bhat(r).unwrap() + spec.bhat(s).unwrap()) + 1e-15);
        }

        #[test]
        fn fenchel_gap_nonnegative(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = Grid::unit(32).unwrap();
            let v: Vec<f64> = (0..32).map(|_| -rng.gen_range(1e-3..1e3)).collect();
            let theta: Vec<f64> = (0..32).map(|_| rng.gen_range(1e-3..1e3)).collect();
            let v = Field::from_values(&g, v).unwrap();
            let theta = Field::from_values(&g, theta).unwrap();
            prop_assert!(fenchel_gap(&v, &theta).unwrap() >= -1e-12);
        }
    }
}
