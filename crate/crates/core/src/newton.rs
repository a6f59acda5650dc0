//! Damped Newton iteration for banded nonlinear systems whose unknowns must
//! stay inside an open admissible set.

use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;

pub trait ImplicitSystem {
    fn len(&self) -> usize;

    /// `(kl, ku)` of the Jacobian.
    fn bandwidths(&self) -> (usize, usize);

    fn admissible(&self, x: &[f64]) -> bool;

    /// Only called on admissible `x`.
    fn residual(&self, x: &[f64], out: &mut [f64]);

    /// Writes the Jacobian into a zeroed matrix.
    fn jacobian(&self, x: &[f64], jac: &mut BandedMatrix);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iters: 50,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NewtonStats {
    pub iters: usize,
    pub residual: f64,
    /// Damping halvings summed over all iterations.
    pub halvings: usize,
}

/// Relative size of a full Newton update below which the iterate is taken
/// as converged even if the absolute residual test is not met (the residual
/// has reached its rounding floor).
const STAGNATION: f64 = 1e-13;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

/// Solves `R(x) = 0` starting from the admissible `x`, overwriting it.
///
/// Each update is halved until the trial point is admissible and its
/// residual has grown by at most a factor of 2.
pub fn solve<S: ImplicitSystem>(sys: &S, x: &mut [f64], opts: &NewtonOptions) -> Result<NewtonStats> {
    let n = sys.len();
    if x.len() != n {
        return Err(Error::InvalidParameter("newton: state length mismatch".into()));
    }
    if !sys.admissible(x) {
        return Err(Error::domain("newton initial iterate", None, f64::NAN));
    }
    let (kl, ku) = sys.bandwidths();
    let mut jac = BandedMatrix::zeros(n, kl, ku);
    let mut r = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; n];
    sys.residual(x, &mut r);
    let mut norm = inf_norm(&r);
    let mut stats = NewtonStats {
        iters: 0,
        residual: norm,
        halvings: 0,
    };
    if !norm.is_finite() {
        return Err(Error::NewtonDivergence { iters: 0, residual: norm });
    }

    loop {
        if norm <= opts.tol {
            return Ok(stats);
        }
        if stats.iters >= opts.max_iters {
            return Err(Error::NewtonDivergence {
                iters: stats.iters,
                residual: norm,
            });
        }

        jac.clear();
        sys.jacobian(x, &mut jac);
        let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
        jac.solve_in_place(&mut delta)?;

        let mut lambda = 1.0;
        let mut halvings = 0;
        let trial_norm = loop {
            for i in 0..n {
                trial[i] = x[i] + lambda * delta[i];
            }
            if sys.admissible(&trial) {
                sys.residual(&trial, &mut r_trial);
                let tn = inf_norm(&r_trial);
                if tn.is_finite() && tn <= 2.0 * norm {
                    break tn;
                }
            }
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(Error::DampingFailure { halvings: halvings - 1 });
            }
            lambda *= 0.5;
        };

        let stagnated = halvings == 0 && inf_norm(&delta) <= STAGNATION * inf_norm(x).max(1.0);
        x.copy_from_slice(&trial);
        std::mem::swap(&mut r, &mut r_trial);
        norm = trial_norm;
        stats.iters += 1;
        stats.halvings += halvings;
        stats.residual = norm;
        if stagnated {
            return Ok(stats);
        }
    }
}
