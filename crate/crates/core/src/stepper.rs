//! Fully implicit Euler stepping of the Penrose-Fife system
//!
//! ```text
//! θ_t + A u = -χ_t,      u = -1/θ
//! χ_t + Aχ + b(χ) - χ = u                  (non-conserved)
//! χ_t + A w = 0,  w = Aχ + b(χ) - χ - u    (conserved)
//! ```
//!
//! Each step solves the coupled nonlinear system with damped Newton on the
//! interleaved unknowns `(θ_i, χ_i[, w_i])`, so the Jacobian is banded.
//! The temperature-only stepper (frozen phase, or the pure very-fast
//! diffusion equation on a radial annulus) shares the same machinery.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::energy::{dissipation_rate, energy_total, EnergyBreakdown, EnergyRecord};
use crate::error::{Error, Result};
use crate::grid::{Boundary, DiscreteLaplacian, Field, Grid, GridKind};
use crate::linalg::BandedMatrix;
use crate::newton::{self, ImplicitSystem, NewtonOptions, NewtonStats};
use crate::potentials::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    NonConserved,
    Conserved,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::NonConserved => "nonconserved",
            Variant::Conserved => "conserved",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nonconserved" | "non-conserved" => Ok(Variant::NonConserved),
            "conserved" => Ok(Variant::Conserved),
            other => Err(format!("unknown variant '{other}'")),
        }
    }
}

/// Treatment of the concave `-χ` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Everything implicit.
    #[default]
    Full,
    /// `-χ` taken at the old time level.
    Convex,
}

impl FromStr for Splitting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "full" => Ok(Splitting::Full),
            "convex" => Ok(Splitting::Convex),
            other => Err(format!("unknown splitting '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub variant: Variant,
    pub potential: PotentialSpec,
    pub splitting: Splitting,
    laplacian: DiscreteLaplacian,
    theta0: Field,
    chi0: Field,
}

impl ModelConfig {
    pub fn new(
        variant: Variant,
        potential: PotentialSpec,
        grid: &Arc<Grid>,
        theta0: Field,
        chi0: Field,
    ) -> Result<Self> {
        theta0.check_same_grid(&chi0)?;
        if !Arc::ptr_eq(theta0.grid(), grid) && **theta0.grid() != **grid {
            return Err(Error::GridMismatch);
        }
        check_positive("initial temperature", &theta0)?;
        potential.check_field(&chi0)?;
        for (i, &c) in chi0.values().iter().enumerate() {
            let bh = potential.bhat(c)?;
            if !bh.is_finite() {
                return Err(Error::domain("initial phase", Some(i), c));
            }
        }
        Ok(ModelConfig {
            variant,
            potential,
            splitting: Splitting::Full,
            laplacian: DiscreteLaplacian::neumann(grid),
            theta0,
            chi0,
        })
    }

    pub fn with_splitting(mut self, splitting: Splitting) -> Self {
        self.splitting = splitting;
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.laplacian.grid()
    }

    pub fn laplacian(&self) -> &DiscreteLaplacian {
        &self.laplacian
    }

    pub fn theta0(&self) -> &Field {
        &self.theta0
    }

    pub fn chi0(&self) -> &Field {
        &self.chi0
    }

    /// State at `t = 0` with derived `u₀ = -1/θ₀` and
    /// `w₀ = Aχ₀ + b(χ₀) - χ₀ - u₀`.
    pub fn initial_state(&self) -> Result<SimState> {
        let w = match self.variant {
            Variant::Conserved => Some(self.chemical_potential(&self.theta0, &self.chi0)?),
            Variant::NonConserved => None,
        };
        SimState::new(0.0, self.theta0.clone(), self.chi0.clone(), w)
    }

    /// `Aχ + b(χ) - χ - u`.
    pub fn chemical_potential(&self, theta: &Field, chi: &Field) -> Result<Field> {
        check_positive("temperature", theta)?;
        self.potential.check_field(chi)?;
        let achi = self.laplacian.apply(chi)?;
        let vals = achi
            .values()
            .iter()
            .zip(chi.values())
            .zip(theta.values())
            .map(|((&ac, &c), &th)| ac + self.potential.b_unchecked(c) - c + 1.0 / th)
            .collect();
        Field::from_values(self.grid(), vals)
    }
}

fn check_positive(what: &'static str, f: &Field) -> Result<()> {
    match f.values().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(i) => Err(Error::domain(what, Some(i), f.values()[i])),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperParams {
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub max_halvings: usize,
    pub save_every: usize,
}

impl Default for StepperParams {
    fn default() -> Self {
        StepperParams {
            dt: 1e-3,
            newton_tol: 1e-10,
            newton_max_iters: 50,
            max_halvings: 40,
            save_every: 1,
        }
    }
}

impl StepperParams {
    pub fn with_dt(dt: f64) -> Self {
        StepperParams { dt, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.newton_tol > 0.0
            && self.newton_max_iters > 0
            && self.max_halvings > 0
            && self.save_every > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("stepper parameters {self:?}")))
        }
    }

    fn newton(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.newton_tol,
            max_iters: self.newton_max_iters,
            max_halvings: self.max_halvings,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub theta: Field,
    pub chi: Field,
    /// Always `-1/θ`.
    pub u: Field,
    /// Chemical potential, conserved variant only.
    pub w: Option<Field>,
}

impl SimState {
    pub fn new(t: f64, theta: Field, chi: Field, w: Option<Field>) -> Result<Self> {
        check_positive("temperature", &theta)?;
        theta.check_same_grid(&chi)?;
        if let Some(w) = &w {
            theta.check_same_grid(w)?;
        }
        let u = theta.map(|th| -1.0 / th);
        Ok(SimState { t, theta, chi, u, w })
    }

    /// `max |u θ + 1|`.
    pub fn identification_defect(&self) -> f64 {
        self.u
            .values()
            .iter()
            .zip(self.theta.values())
            .map(|(u, th)| (u * th + 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub halvings: usize,
    pub energy: EnergyBreakdown,
    pub theta_min: f64,
    pub theta_max: f64,
    pub chi_min: f64,
    pub chi_max: f64,
    pub dissipation: f64,
}

impl StepReport {
    fn for_state(
        config: &ModelConfig,
        state: &SimState,
        dt: f64,
        stats: NewtonStats,
        dissipation: f64,
    ) -> Result<Self> {
        Ok(StepReport {
            dt,
            newton_iters: stats.iters,
            final_residual: stats.residual,
            halvings: stats.halvings,
            energy: energy_total(&state.theta, &state.chi, &config.potential, &config.laplacian)?,
            theta_min: state.theta.min(),
            theta_max: state.theta.max(),
            chi_min: state.chi.min(),
            chi_max: state.chi.max(),
            dissipation,
        })
    }
}

// ---------------------------------------------------------------------------
// Coupled systems

struct PhaseSystem<'a> {
    config: &'a ModelConfig,
    theta_old: &'a [f64],
    chi_old: &'a [f64],
    dt: f64,
}

impl PhaseSystem<'_> {
    fn fields(&self) -> usize {
        match self.config.variant {
            Variant::NonConserved => 2,
            Variant::Conserved => 3,
        }
    }

    fn implicit_linear(&self) -> bool {
        self.config.splitting == Splitting::Full
    }
}

impl ImplicitSystem for PhaseSystem<'_> {
    fn len(&self) -> usize {
        self.fields() * self.theta_old.len()
    }

    fn bandwidths(&self) -> (usize, usize) {
        // neighbours of the same field sit `fields()` entries away; the
        // conserved cross terms χ_i ↔ w_{i±1} add one more
        match self.config.variant {
            Variant::NonConserved => (2, 2),
            Variant::Conserved => (4, 4),
        }
    }

    fn admissible(&self, x: &[f64]) -> bool {
        let m = self.fields();
        x.chunks_exact(m)
            .all(|c| c[0] > 0.0 && c[0].is_finite() && self.config.potential.in_domain(c[1]))
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let m = self.fields();
        let a = &self.config.laplacian;
        let spec = &self.config.potential;
        let n = self.theta_old.len();
        let dt = self.dt;
        let at = |k: usize, i: usize| x[m * i + k];
        let lap = |k: usize, i: usize, f: &dyn Fn(f64) -> f64| {
            let (l, d, r) = a.row(i);
            let mut s = d * f(at(k, i));
            if i > 0 {
                s += l * f(at(k, i - 1));
            }
            if i + 1 < n {
                s += r * f(at(k, i + 1));
            }
            s
        };
        let inv = |th: f64| -1.0 / th;
        let id = |v: f64| v;
        for i in 0..n {
            let th = at(0, i);
            let ch = at(1, i);
            let chi_t = (ch - self.chi_old[i]) / dt;
            let lin = if self.implicit_linear() { ch } else { self.chi_old[i] };
            out[m * i] = (th - self.theta_old[i]) / dt + lap(0, i, &inv) + chi_t;
            match self.config.variant {
                Variant::NonConserved => {
                    out[m * i + 1] = chi_t + lap(1, i, &id) + spec.b_unchecked(ch) - lin + 1.0 / th;
                }
                Variant::Conserved => {
                    let w = at(2, i);
                    out[m * i + 1] = chi_t + lap(2, i, &id);
                    out[m * i + 2] = w - lap(1, i, &id) - spec.b_unchecked(ch) + lin - 1.0 / th;
                }
            }
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut BandedMatrix) {
        let m = self.fields();
        let a = &self.config.laplacian;
        let spec = &self.config.potential;
        let n = self.theta_old.len();
        let dt = self.dt;
        let lin = if self.implicit_linear() { 1.0 } else { 0.0 };
        for i in 0..n {
            let (l, d, r) = a.row(i);
            let th = x[m * i];
            let ch = x[m * i + 1];
            let du = |j: usize| 1.0 / (x[m * j] * x[m * j]);
            let row_t = m * i;
            let row_c = m * i + 1;

            jac.add(row_t, m * i, 1.0 / dt + d * du(i));
            if i > 0 {
                jac.add(row_t, m * (i - 1), l * du(i - 1));
            }
            if i + 1 < n {
                jac.add(row_t, m * (i + 1), r * du(i + 1));
            }
            jac.add(row_t, m * i + 1, 1.0 / dt);

            match self.config.variant {
                Variant::NonConserved => {
                    jac.add(row_c, m * i + 1, 1.0 / dt + d + spec.bprime_unchecked(ch) - lin);
                    if i > 0 {
                        jac.add(row_c, m * (i - 1) + 1, l);
                    }
                    if i + 1 < n {
                        jac.add(row_c, m * (i + 1) + 1, r);
                    }
                    jac.add(row_c, m * i, -1.0 / (th * th));
                }
                Variant::Conserved => {
                    let row_w = m * i + 2;
                    jac.add(row_c, m * i + 1, 1.0 / dt);
                    jac.add(row_c, m * i + 2, d);
                    if i > 0 {
                        jac.add(row_c, m * (i - 1) + 2, l);
                    }
                    if i + 1 < n {
                        jac.add(row_c, m * (i + 1) + 2, r);
                    }

                    jac.add(row_w, m * i + 2, 1.0);
                    jac.add(row_w, m * i + 1, -d - spec.bprime_unchecked(ch) + lin);
                    if i > 0 {
                        jac.add(row_w, m * (i - 1) + 1, -l);
                    }
                    if i + 1 < n {
                        jac.add(row_w, m * (i + 1) + 1, -r);
                    }
                    jac.add(row_w, m * i, 1.0 / (th * th));
                }
            }
        }
    }
}

fn pack(state: &SimState, variant: Variant) -> Vec<f64> {
    let n = state.theta.len();
    let m = match variant {
        Variant::NonConserved => 2,
        Variant::Conserved => 3,
    };
    let mut x = vec![0.0; m * n];
    for i in 0..n {
        x[m * i] = state.theta.values()[i];
        x[m * i + 1] = state.chi.values()[i];
        if m == 3 {
            x[m * i + 2] = state.w.as_ref().map_or(0.0, |w| w.values()[i]);
        }
    }
    x
}

fn unpack(x: &[f64], m: usize, grid: &Arc<Grid>) -> Result<(Field, Field, Option<Field>)> {
    let field = |k: usize| Field::from_values(grid, x.iter().skip(k).step_by(m).copied().collect());
    let w = if m == 3 { Some(field(2)?) } else { None };
    Ok((field(0)?, field(1)?, w))
}

fn check_state(config: &ModelConfig, s: &SimState) -> Result<()> {
    if **s.theta.grid() != **config.grid() {
        return Err(Error::GridMismatch);
    }
    check_positive("temperature", &s.theta)?;
    config.potential.check_field(&s.chi)
}

fn residual_fields(config: &ModelConfig, new: &SimState, old: &SimState, dt: f64) -> Result<Vec<Field>> {
    check_state(config, new)?;
    check_state(config, old)?;
    new.theta.check_same_grid(&old.theta)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt}")));
    }
    let sys = PhaseSystem {
        config,
        theta_old: old.theta.values(),
        chi_old: old.chi.values(),
        dt,
    };
    let x = pack(new, config.variant);
    let mut r = vec![0.0; x.len()];
    sys.residual(&x, &mut r);
    let m = sys.fields();
    (0..m)
        .map(|k| Field::from_values(config.grid(), r.iter().skip(k).step_by(m).copied().collect()))
        .collect()
}

/// `(R_θ, R_χ)` of the non-conserved implicit Euler step from `old` to `new`.
pub fn residual_nonconserved(
    config: &ModelConfig,
    new: &SimState,
    old: &SimState,
    dt: f64,
) -> Result<(Field, Field)> {
    if config.variant != Variant::NonConserved {
        return Err(Error::InvalidParameter("config is not the non-conserved variant".into()));
    }
    let mut r = residual_fields(config, new, old, dt)?;
    let rc = r.pop().unwrap();
    let rt = r.pop().unwrap();
    Ok((rt, rc))
}

/// `(R_θ, R_χ, R_w)` of the conserved implicit Euler step; `new.w` is used
/// as the chemical potential unknown.
pub fn residual_conserved(
    config: &ModelConfig,
    new: &SimState,
    old: &SimState,
    dt: f64,
) -> Result<(Field, Field, Field)> {
    if config.variant != Variant::Conserved {
        return Err(Error::InvalidParameter("config is not the conserved variant".into()));
    }
    if new.w.is_none() {
        return Err(Error::InvalidParameter("conserved state without chemical potential".into()));
    }
    let mut r = residual_fields(config, new, old, dt)?;
    let rw = r.pop().unwrap();
    let rc = r.pop().unwrap();
    let rt = r.pop().unwrap();
    Ok((rt, rc, rw))
}

/// One implicit Euler step of length `params.dt`.
pub fn newton_step(
    config: &ModelConfig,
    params: &StepperParams,
    old: &SimState,
) -> Result<(SimState, StepReport)> {
    step_with_dt(config, params, old, params.dt)
}

fn step_with_dt(
    config: &ModelConfig,
    params: &StepperParams,
    old: &SimState,
    dt: f64,
) -> Result<(SimState, StepReport)> {
    params.validate()?;
    check_state(config, old)?;
    let sys = PhaseSystem {
        config,
        theta_old: old.theta.values(),
        chi_old: old.chi.values(),
        dt,
    };
    let mut x = pack(old, config.variant);
    if config.variant == Variant::Conserved && old.w.is_none() {
        let w = config.chemical_potential(&old.theta, &old.chi)?;
        for (i, v) in w.values().iter().enumerate() {
            x[3 * i + 2] = *v;
        }
    }
    let stats = newton::solve(&sys, &mut x, &params.newton())?;
    let (theta, chi, w) = unpack(&x, sys.fields(), config.grid())?;
    let new = SimState::new(old.t + dt, theta, chi, w)?;

    let dissipation = match config.variant {
        Variant::NonConserved => {
            let chi_t = new.chi.zip_map(&old.chi, |a, b| (a - b) / dt)?;
            dissipation_rate(Variant::NonConserved, &new.u, &chi_t, &config.laplacian)?
        }
        Variant::Conserved => {
            dissipation_rate(Variant::Conserved, &new.u, new.w.as_ref().unwrap(), &config.laplacian)?
        }
    };
    let report = StepReport::for_state(config, &new, dt, stats, dissipation)?;
    Ok((new, report))
}

// ---------------------------------------------------------------------------
// Trajectories

#[derive(Debug, Clone)]
pub struct Sample {
    pub step: usize,
    pub state: SimState,
    pub report: StepReport,
    /// `Σ dt·D` accumulated up to this state.
    pub dissipated: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub steps: usize,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial state")
    }

    pub fn energy_records(&self) -> Vec<EnergyRecord> {
        self.samples
            .iter()
            .map(|s| EnergyRecord {
                t: s.state.t,
                energy: s.report.energy.total,
                dissipated: s.dissipated,
            })
            .collect()
    }
}

/// Consecutive rejected steps before a run is aborted.
pub const MAX_CONSECUTIVE_FAILURES: usize = 10;
/// Accepted steps before a reduced `dt` is doubled again.
pub const RECOVERY_STREAK: usize = 5;

pub fn run(config: &ModelConfig, params: &StepperParams, t_end: f64) -> Result<Trajectory> {
    run_observed(config, params, t_end, |_, _| {})
}

/// Like [`run`], calling `observer` after every accepted step (saved or not).
pub fn run_observed(
    config: &ModelConfig,
    params: &StepperParams,
    t_end: f64,
    mut observer: impl FnMut(&SimState, &StepReport),
) -> Result<Trajectory> {
    params.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end}")));
    }
    let mut state = config.initial_state()?;
    let init_report = StepReport::for_state(config, &state, 0.0, NewtonStats::default(), 0.0)?;
    let mut samples = vec![Sample {
        step: 0,
        state: state.clone(),
        report: init_report,
        dissipated: 0.0,
    }];

    let t_eps = 1e-12 * t_end.max(1.0);
    let mut dt_try = params.dt;
    let mut failures = 0usize;
    let mut streak = 0usize;
    let mut steps = 0usize;
    let mut dissipated = 0.0;
    let mut last_saved = 0usize;

    while t_end - state.t > t_eps {
        let dt = dt_try.min(t_end - state.t);
        match step_with_dt(config, params, &state, dt) {
            Ok((mut new, report)) => {
                if t_end - new.t <= t_eps {
                    new.t = t_end;
                }
                failures = 0;
                streak += 1;
                if streak >= RECOVERY_STREAK && dt_try < params.dt {
                    dt_try = (2.0 * dt_try).min(params.dt);
                    streak = 0;
                }
                steps += 1;
                dissipated += dt * report.dissipation;
                observer(&new, &report);
                state = new;
                let done = t_end - state.t <= t_eps;
                if steps.is_multiple_of(params.save_every) || done {
                    samples.push(Sample {
                        step: steps,
                        state: state.clone(),
                        report,
                        dissipated,
                    });
                    last_saved = steps;
                }
            }
            Err(e) if e.is_step_failure() => {
                failures += 1;
                streak = 0;
                if failures >= MAX_CONSECUTIVE_FAILURES {
                    return Err(Error::StepAbort {
                        failures,
                        t: state.t,
                        last: Box::new(e),
                    });
                }
                dt_try *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    debug_assert!(steps == 0 || last_saved == steps);
    Ok(Trajectory { samples, steps })
}

// ---------------------------------------------------------------------------
// Temperature-only stepping

struct ThetaSystem<'a> {
    laplacian: &'a DiscreteLaplacian,
    theta_old: &'a [f64],
    /// Prescribed `χ_t` (zero for pure very-fast diffusion).
    source: &'a [f64],
    dt: f64,
}

impl ImplicitSystem for ThetaSystem<'_> {
    fn len(&self) -> usize {
        self.theta_old.len()
    }

    fn bandwidths(&self) -> (usize, usize) {
        (1, 1)
    }

    fn admissible(&self, x: &[f64]) -> bool {
        x.iter().all(|&t| t > 0.0 && t.is_finite())
    }

    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let u: Vec<f64> = x.iter().map(|t| -1.0 / t).collect();
        self.laplacian.apply_slice(&u, out);
        for i in 0..x.len() {
            out[i] += (x[i] - self.theta_old[i]) / self.dt + self.source[i];
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut BandedMatrix) {
        let n = x.len();
        for i in 0..n {
            let (l, d, r) = self.laplacian.row(i);
            jac.add(i, i, 1.0 / self.dt + d / (x[i] * x[i]));
            if i > 0 {
                jac.add(i, i - 1, l / (x[i - 1] * x[i - 1]));
            }
            if i + 1 < n {
                jac.add(i, i + 1, r / (x[i + 1] * x[i + 1]));
            }
        }
    }
}

fn solve_theta(
    laplacian: &DiscreteLaplacian,
    theta_old: &Field,
    source: &[f64],
    dt: f64,
    params: &StepperParams,
) -> Result<(Field, NewtonStats)> {
    check_positive("temperature", theta_old)?;
    let sys = ThetaSystem {
        laplacian,
        theta_old: theta_old.values(),
        source,
        dt,
    };
    let mut x = theta_old.values().to_vec();
    let stats = newton::solve(&sys, &mut x, &params.newton())?;
    Ok((Field::from_values(theta_old.grid(), x)?, stats))
}

/// Implicit step of `θ_t + A(-1/θ) = -χ_t` with `χ` prescribed at both time
/// levels (homogeneous Neumann).
pub fn step_theta_frozen(
    laplacian: &DiscreteLaplacian,
    theta_old: &Field,
    chi_old: &Field,
    chi_new: &Field,
    dt: f64,
    params: &StepperParams,
) -> Result<(Field, NewtonStats)> {
    theta_old.check_same_grid(chi_old)?;
    chi_old.check_same_grid(chi_new)?;
    let source: Vec<f64> = chi_new
        .values()
        .iter()
        .zip(chi_old.values())
        .map(|(a, b)| (a - b) / dt)
        .collect();
    solve_theta(laplacian, theta_old, &source, dt, params)
}

/// Time-dependent temperature values at the inner and outer boundary.
pub struct DirichletData {
    left: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    right: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl DirichletData {
    pub fn new(
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DirichletData {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_| value, move |_| value)
    }

    /// Boundary traces of `2 (T - t)₊^{1/2} / r` on the grid's end faces.
    pub fn similarity(extinction: f64, grid: &Grid) -> Self {
        let (lo, hi) = (grid.x_lo(), grid.x_hi());
        Self::new(
            move |t| crate::initial::similarity_solution(extinction, t, lo),
            move |t| crate::initial::similarity_solution(extinction, t, hi),
        )
    }

    /// Boundary values of `u = -1/θ` at time `t`.
    pub fn u_values(&self, t: f64) -> Result<(f64, f64)> {
        let (l, r) = ((self.left)(t), (self.right)(t));
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::domain("dirichlet temperature (inner)", None, l));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain("dirichlet temperature (outer)", None, r));
        }
        Ok((-1.0 / l, -1.0 / r))
    }
}

#[derive(Debug, Clone)]
pub struct ThetaState {
    pub t: f64,
    pub theta: Field,
}

/// Implicit Euler step of `θ_t + Δθ⁻¹ = 0` on a radial annulus with
/// Dirichlet data evaluated at the new time level.
pub fn step_vfd_radial(
    state: &ThetaState,
    dt: f64,
    data: &DirichletData,
    params: &StepperParams,
) -> Result<(ThetaState, NewtonStats)> {
    let grid = state.theta.grid();
    if grid.kind() != GridKind::Radial3d {
        return Err(Error::InvalidParameter("very-fast diffusion benchmark needs a radial grid".into()));
    }
    let t_new = state.t + dt;
    let (ul, ur) = data.u_values(t_new)?;
    let lap = DiscreteLaplacian::new(grid, Boundary::Dirichlet { left: ul, right: ur });
    let zero = vec![0.0; state.theta.len()];
    let (theta, stats) = solve_theta(&lap, &state.theta, &zero, dt, params)?;
    Ok((ThetaState { t: t_new, theta }, stats))
}

/// Fixed-step integration of [`step_vfd_radial`] up to `t_end` (the last
/// step is shortened to land on it).
pub fn run_vfd_radial(
    theta0: Field,
    data: &DirichletData,
    dt: f64,
    t_end: f64,
    params: &StepperParams,
) -> Result<ThetaState> {
    let mut state = ThetaState { t: 0.0, theta: theta0 };
    let eps = 1e-12 * t_end.max(1.0);
    while t_end - state.t > eps {
        let h = dt.min(t_end - state.t);
        state = step_vfd_radial(&state, h, data, params)?.0;
    }
    state.t = t_end;
    Ok(state)
}
