//! Numerical counterparts of the estimates behind the model's regularity
//! theory: resolvent smoothing of the initial temperature, the logarithmic
//! Poincaré inequality, the Moser exponent ladder, the separation bound for
//! the phase variable and refinement experiments on the uniform bounds.

use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::grid::{build_grid, DiscreteLaplacian, Field, Grid, GridKind};
use crate::initial::Profile;
use crate::potentials::{big_jstar, PotentialSpec};
use crate::stepper::{run_observed, ModelConfig, SimState, StepperParams, Variant};

// ---------------------------------------------------------------------------
// Resolvent smoothing

#[derive(Debug, Clone)]
pub struct SmoothingReport {
    pub n: u32,
    pub theta0n: Field,
    pub jstar_before: f64,
    pub jstar_after: f64,
    /// `‖θ_{0,n} - θ₀‖` in the discrete dual norm.
    pub dual_distance: f64,
}

/// Solves `(I + n⁻¹A) θ_{0,n} = θ₀`.
pub fn resolvent_smooth(theta0: &Field, n: u32, a: &DiscreteLaplacian) -> Result<SmoothingReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("resolvent index n must be positive".into()));
    }
    let jstar_before = big_jstar(theta0)?;
    let theta0n = a.resolvent(theta0, 1.0 / n as f64)?;
    if let Some(i) = theta0n.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::NonPositiveResult {
            index: i,
            value: theta0n.values()[i],
        });
    }
    let jstar_after = big_jstar(&theta0n)?;
    let diff = theta0n.zip_map(theta0, |a, b| a - b)?;
    let dual_distance = a.norm_dual(&diff)?;
    Ok(SmoothingReport {
        n,
        theta0n,
        jstar_before,
        jstar_after,
        dual_distance,
    })
}

// ---------------------------------------------------------------------------
// Logarithmic Poincaré inequality

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareQuantities {
    pub l1_norm: f64,
    /// `K = ∫ (log v)⁺`
    pub k: f64,
    pub grad_l1: f64,
    /// `|Ω| e^{C₁K} + (C₂/|Ω|) ‖∇v‖₁`
    pub bound: f64,
}

/// `c1 = None` selects the default `C₁ = 2/|Ω|`.
pub fn log_poincare_quantities(v: &Field, c1: Option<f64>, c2: f64) -> Result<PoincareQuantities> {
    if let Some(i) = v.values().iter().position(|&x| x < 0.0 || x.is_nan()) {
        return Err(Error::NegativeInput {
            index: i,
            value: v.values()[i],
        });
    }
    let omega = v.grid().total_volume();
    let c1 = c1.unwrap_or(2.0 / omega);
    let l1_norm = v.integral();
    let k = v
        .values()
        .iter()
        .zip(v.grid().volumes())
        .map(|(&x, &w)| if x > 1.0 { w * x.ln() } else { 0.0 })
        .sum::<f64>();
    let grad_l1 = v.grad_l1();
    let bound = omega * (c1 * k).exp() + c2 / omega * grad_l1;
    Ok(PoincareQuantities {
        l1_norm,
        k,
        grad_l1,
        bound,
    })
}

/// Smallest `C₂ ≥ 0` for which the inequality holds on every member of
/// `family`.
pub fn fit_poincare_c2(family: &[Field], c1: Option<f64>) -> Result<f64> {
    let mut c2 = 0.0f64;
    for v in family {
        let q = log_poincare_quantities(v, c1, 0.0)?;
        let excess = q.l1_norm - q.bound;
        if excess > 0.0 {
            if q.grad_l1 <= 0.0 {
                return Err(Error::InvalidParameter(
                    "constant member violates the inequality for every C₂".into(),
                ));
            }
            let omega = v.grid().total_volume();
            c2 = c2.max(excess * omega / q.grad_l1);
        }
    }
    Ok(c2)
}

/// Two fitted constants agree within a factor of 2.
pub fn constants_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 0.5 * a.max(b)
}

// ---------------------------------------------------------------------------
// Moser exponent ladder

#[derive(Debug, Clone, PartialEq)]
pub struct MoserLadder {
    pub epsilon: f64,
    /// `(9 + 7ε) / (9 + 3ε)`
    pub k_eps: f64,
    /// `(K_ε + 1) / 2 = (9 + 5ε) / (9 + 3ε)`
    pub h: f64,
    pub p0: f64,
    /// `(i, p₀ Hⁱ)` for `i = 0..levels`
    pub levels: Vec<(usize, f64)>,
}

pub fn moser_ladder(epsilon: f64, p0: f64, levels: usize) -> Result<MoserLadder> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) || !(p0 >= 1.0 && p0.is_finite()) || levels == 0 {
        return Err(Error::InvalidParameter(format!(
            "moser ladder needs ε ≥ 0, p0 ≥ 1, levels ≥ 1 (got {epsilon}, {p0}, {levels})"
        )));
    }
    let k_eps = (9.0 + 7.0 * epsilon) / (9.0 + 3.0 * epsilon);
    let h = (k_eps + 1.0) / 2.0;
    let levels = (0..levels).map(|i| (i, p0 * h.powi(i as i32))).collect();
    Ok(MoserLadder {
        epsilon,
        k_eps,
        h,
        p0,
        levels,
    })
}

pub type Rational = Ratio<i128>;

/// The same ladder in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoserLadder {
    pub epsilon: Rational,
    pub k_eps: Rational,
    pub h: Rational,
    pub levels: Vec<Rational>,
}

pub fn moser_ladder_exact(epsilon: Rational, p0: Rational, levels: usize) -> Result<ExactMoserLadder> {
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    if epsilon < zero || p0 < one || levels == 0 {
        return Err(Error::InvalidParameter("moser ladder needs ε ≥ 0, p0 ≥ 1, levels ≥ 1".into()));
    }
    let int = Rational::from_integer;
    let k_eps = (int(9) + int(7) * epsilon) / (int(9) + int(3) * epsilon);
    let h = (k_eps + one) / int(2);
    let mut p = p0;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        out.push(p);
        p *= h;
    }
    Ok(ExactMoserLadder {
        epsilon,
        k_eps,
        h,
        levels: out,
    })
}

// ---------------------------------------------------------------------------
// Separation of the phase variable

/// Solves `b(r) - r = U` for `r ∈ [0, 1)` and returns `1 - r`, computed
/// directly so that it keeps full relative precision for large `U`.
pub fn separation_delta(spec: &PotentialSpec, u_bound: f64) -> Result<f64> {
    if !spec.is_bounded() {
        return Err(Error::KindMismatch);
    }
    if !(u_bound >= 0.0 && u_bound.is_finite()) {
        return Err(Error::InvalidParameter(format!("U = {u_bound}")));
    }
    // with s = 1 - r: g(s) = ln(2 - s) - ln s - (1 - s) - U, decreasing in s
    let g = |s: f64| (2.0 - s).ln() - s.ln() - (1.0 - s) - u_bound;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    if g(hi) >= 0.0 {
        return Ok(1.0);
    }
    for _ in 0..2000 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The limit `r*` of the comparison problem `χ⁺_t + b(χ⁺) - χ⁺ = U`, i.e. the
/// root of `b(r) - r - U` in `I`.
pub fn separation_bound(spec: &PotentialSpec, u_bound: f64) -> Result<f64> {
    Ok(1.0 - separation_delta(spec, u_bound)?)
}

/// Implicit Euler path of `χ_t + b(χ) - χ = U` from `chi0` (strictly inside
/// `I`). Each step solves a strictly increasing scalar equation by bisection
/// on `(-1, 1)`, so the path cannot leave the domain.
pub fn comparison_ode_solve(
    spec: &PotentialSpec,
    u_bound: f64,
    chi0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if !spec.is_bounded() {
        return Err(Error::KindMismatch);
    }
    if !spec.in_domain(chi0) {
        return Err(Error::domain("comparison initial value", None, chi0));
    }
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt}, t_end = {t_end}")));
    }
    let b = |r: f64| (1.0 + r).ln() - (1.0 - r).ln();
    let mut path = vec![(0.0, chi0)];
    let (mut t, mut chi) = (0.0, chi0);
    while t_end - t > 1e-12 * t_end.max(1.0) {
        let h = dt.min(t_end - t);
        let f = |r: f64| r + h * (b(r) - r - u_bound) - chi;
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        chi = 0.5 * (lo + hi);
        if !(chi > -1.0 && chi < 1.0) {
            return Err(Error::domain("comparison path", None, chi));
        }
        t += h;
        path.push((t, chi));
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// Refinement experiments

#[derive(Debug, Clone)]
pub struct ExperimentFamily {
    pub variant: Variant,
    pub potential: PotentialSpec,
    pub kind: GridKind,
    pub x_lo: f64,
    pub x_hi: f64,
    pub theta0: Profile,
    pub chi0: Profile,
    /// Cell counts, coarse to fine.
    pub levels: Vec<usize>,
    /// Time step on the coarsest level.
    pub dt: f64,
    /// Halve `dt` together with `h`.
    pub refine_dt: bool,
    /// Sampling times, increasing.
    pub times: Vec<f64>,
    /// Window `[a, b]` over which `max |u|` is recorded.
    pub u_window: Option<(f64, f64)>,
}

impl ExperimentFamily {
    /// Unit-interval family with times `{1, 2, 3}` and `u` window `[2, 3]`.
    pub fn unit(variant: Variant, theta0: Profile, chi0: Profile, levels: Vec<usize>, dt: f64) -> Self {
        ExperimentFamily {
            variant,
            potential: PotentialSpec::LOGARITHMIC,
            kind: GridKind::Cartesian1d,
            x_lo: 0.0,
            x_hi: 1.0,
            theta0,
            chi0,
            levels,
            dt,
            refine_dt: true,
            times: vec![1.0, 2.0, 3.0],
            u_window: Some((2.0, 3.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaRow {
    pub n_cells: usize,
    pub t: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub u_max_abs: f64,
    pub chi_max_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    ThetaMin,
    ThetaMax,
    UMaxAbs,
    ChiMaxAbs,
    /// `1 - max |χ|`
    Separation,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::ThetaMin,
        Quantity::ThetaMax,
        Quantity::UMaxAbs,
        Quantity::ChiMaxAbs,
        Quantity::Separation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::ThetaMin => "theta_min",
            Quantity::ThetaMax => "theta_max",
            Quantity::UMaxAbs => "u_max_abs",
            Quantity::ChiMaxAbs => "chi_max_abs",
            Quantity::Separation => "delta",
        }
    }

    pub fn of(&self, row: &ExtremaRow) -> f64 {
        match self {
            Quantity::ThetaMin => row.theta_min,
            Quantity::ThetaMax => row.theta_max,
            Quantity::UMaxAbs => row.u_max_abs,
            Quantity::ChiMaxAbs => row.chi_max_abs,
            Quantity::Separation => 1.0 - row.chi_max_abs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityFlag {
    pub quantity: Quantity,
    pub t: f64,
    /// Largest relative change between consecutive refinement levels.
    pub spread: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub n_cells: usize,
    /// `max |u|` over the `u_window`.
    pub u_window_max: Option<f64>,
    /// `separation_bound(u_window_max)` for bounded potentials.
    pub chi_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RegularizationReport {
    pub rows: Vec<ExtremaRow>,
    pub levels: Vec<LevelSummary>,
    pub stability: Vec<StabilityFlag>,
}

/// Relative tolerance for refinement stability.
pub const REFINEMENT_TOLERANCE: f64 = 0.2;

impl RegularizationReport {
    pub fn row(&self, n_cells: usize, t: f64) -> Option<&ExtremaRow> {
        self.rows
            .iter()
            .find(|r| r.n_cells == n_cells && (r.t - t).abs() < 1e-9)
    }

    pub fn series(&self, q: Quantity, t: f64) -> Vec<f64> {
        self.levels
            .iter()
            .filter_map(|l| self.row(l.n_cells, t).map(|r| q.of(r)))
            .collect()
    }

    pub fn flag(&self, q: Quantity, t: f64) -> Option<&StabilityFlag> {
        self.stability
            .iter()
            .find(|f| f.quantity == q && (f.t - t).abs() < 1e-9)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n_cells,t,theta_min,theta_max,u_max_abs,chi_max_abs\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n_cells, r.t, r.theta_min, r.theta_max, r.u_max_abs, r.chi_max_abs
            ));
        }
        s
    }
}

/// Largest relative change between consecutive entries, relative to the finer.
pub fn refinement_spread(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| {
            let scale = w[1].abs().max(f64::MIN_POSITIVE);
            (w[1] - w[0]).abs() / scale
        })
        .fold(0.0, f64::max)
}

struct LevelResult {
    rows: Vec<ExtremaRow>,
    summary: LevelSummary,
}

fn extrema(n_cells: usize, s: &SimState) -> ExtremaRow {
    ExtremaRow {
        n_cells,
        t: s.t,
        theta_min: s.theta.min(),
        theta_max: s.theta.max(),
        u_max_abs: s.u.max_abs(),
        chi_max_abs: s.chi.max_abs(),
    }
}

fn run_level(family: &ExperimentFamily, level: usize) -> Result<LevelResult> {
    let n_cells = family.levels[level];
    let grid: Arc<Grid> = build_grid(family.kind, n_cells, family.x_lo, family.x_hi)?;
    let mut theta = family.theta0.evaluate(&grid)?;
    let mut chi = family.chi0.evaluate(&grid)?;
    let dt = if family.refine_dt {
        family.dt * family.levels[0] as f64 / n_cells as f64
    } else {
        family.dt
    };
    let params = StepperParams::with_dt(dt);

    let mut rows = Vec::new();
    let mut u_window_max: Option<f64> = None;
    let mut t0 = 0.0;
    // segment boundaries: sampling times plus the u-window edges
    let mut marks: Vec<f64> = family.times.clone();
    if let Some((a, b)) = family.u_window {
        marks.push(a);
        marks.push(b);
    }
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    marks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    for &mark in &marks {
        if mark <= t0 {
            continue;
        }
        let config = ModelConfig::new(family.variant, family.potential, &grid, theta, chi)?;
        let in_window = |t: f64| family.u_window.is_some_and(|(a, b)| t > a - 1e-12 && t <= b + 1e-12);
        if in_window(t0) {
            let start = config.initial_state()?.u.max_abs();
            u_window_max = Some(u_window_max.map_or(start, |m| m.max(start)));
        }
        let traj = run_observed(&config, &params, mark - t0, |s, _| {
            if in_window(t0 + s.t) {
                let m = s.u.max_abs();
                u_window_max = Some(u_window_max.map_or(m, |v| v.max(m)));
            }
        })?;
        let mut last = traj.last().state.clone();
        last.t = mark;
        if family.times.iter().any(|&t| (t - mark).abs() < 1e-12) {
            rows.push(extrema(n_cells, &last));
        }
        theta = last.theta;
        chi = last.chi;
        t0 = mark;
    }
    let chi_bound = match (u_window_max, family.potential.is_bounded()) {
        (Some(u), true) => Some(separation_bound(&family.potential, u)?),
        _ => None,
    };
    Ok(LevelResult {
        rows,
        summary: LevelSummary {
            n_cells,
            u_window_max,
            chi_bound,
        },
    })
}

/// Runs every refinement level (in parallel) and tabulates the extrema of
/// `θ`, `|u|` and `|χ|` at the sampling times.
pub fn regularization_experiment(family: &ExperimentFamily) -> Result<RegularizationReport> {
    if family.levels.is_empty() || family.times.is_empty() {
        return Err(Error::InvalidParameter("experiment needs levels and times".into()));
    }
    let results: Vec<Result<LevelResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..family.levels.len())
            .map(|k| scope.spawn(move || run_level(family, k)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for r in results {
        let r = r?;
        rows.extend(r.rows);
        levels.push(r.summary);
    }
    let mut report = RegularizationReport {
        rows,
        levels,
        stability: Vec::new(),
    };
    for &t in &family.times {
        for q in Quantity::ALL {
            let series = report.series(q, t);
            let spread = refinement_spread(&series);
            report.stability.push(StabilityFlag {
                quantity: q,
                t,
                spread,
                stable: spread <= REFINEMENT_TOLERANCE,
            });
        }
    }
    Ok(report)
}
