//! The `pfsim` commands. Each returns `Ok(())` on success or a [`CliError`]
//! whose [`CliError::exit_code`] the binary hands to the shell.

pub mod config;
pub mod output;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{moser_ladder_exact, Rational};
use crate::grid::{build_grid, Field, GridKind, Lp};
use crate::initial::similarity_solution;
use crate::stepper::{run, run_vfd_radial, DirichletData, StepperParams};

pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
pub use verify::{run_suite, Check, Suite};

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// Bad command-line argument.
    Usage(String),
    Io { path: PathBuf, message: String },
    Solver(crate::Error),
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Property(_) => 4,
        }
    }
}

/// Single line, `key=value` fields.
impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let code = self.exit_code();
        match self {
            CliError::Config(e) => write!(f, "exit={code} {e}"),
            CliError::Usage(m) => write!(f, "exit={code} kind=usage reason={m}"),
            CliError::Io { path, message } => {
                write!(f, "exit={code} kind=io path={} reason={message}", path.display())
            }
            CliError::Solver(e) => write!(f, "exit={code} kind=solver-failure reason={e}"),
            CliError::Property(m) => write!(f, "exit={code} kind=property-failure reason={m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Solver(e)
    }
}

pub type CliResult = std::result::Result<(), CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> std::result::Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(path)
}

fn say(out: &mut impl Write, line: impl std::fmt::Display) -> CliResult {
    writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")))
}

/// Directory for optional report files of `verify` and `bench-similarity`.
fn report_dir() -> Option<PathBuf> {
    std::env::var_os("PF_OUTPUT_DIR").map(PathBuf::from)
}

/// Runs the simulation described by `config` and writes `diagnostics.csv`
/// and `final_state.csv` to its output directory.
pub fn cmd_run(config: &RunConfig, out: &mut impl Write) -> CliResult {
    let model = config.model()?;
    let traj = run(&model, &config.params(), config.t_end)?;
    let dir = config.resolved_output_dir();
    let diag = write_file(&dir, "diagnostics.csv", &output::diagnostics_csv(&traj))?;
    write_file(&dir, "final_state.csv", &output::final_state_csv(&traj.last().state))?;
    say(
        out,
        format_args!(
            "run variant={} potential={} n_cells={} steps={} saved={} t={} output={}",
            config.variant,
            config.potential,
            config.n_cells,
            traj.steps,
            traj.samples.len(),
            traj.last().state.t,
            diag.parent().unwrap_or(&dir).display()
        ),
    )
}

pub fn cmd_verify(suite: Suite, out: &mut impl Write) -> CliResult {
    let checks = run_suite(suite)?;
    let mut summary = String::new();
    for c in &checks {
        say(out, c)?;
        summary.push_str(&c.to_string());
        summary.push('\n');
    }
    if let Some(dir) = report_dir() {
        write_file(&dir, "verify_summary.txt", &summary)?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(format!("failed={}", failed.join(","))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub h: f64,
    pub dt: f64,
    pub linf_error: f64,
    /// `log₂` of the error ratio to the previous (coarser) level.
    pub observed_order: Option<f64>,
}

pub const SIMILARITY_COARSE_CELLS: usize = 16;
pub const SIMILARITY_EXTINCTION: f64 = 1.0;
pub const SIMILARITY_T_END: f64 = 0.75;
pub const SIMILARITY_DOMAIN: (f64, f64) = (0.5, 2.0);

/// Very-fast diffusion on the annulus `[0.5, 2]` with exact boundary data,
/// `h` halved and `dt = h²/2` on each level.
pub fn similarity_convergence(levels: usize) -> crate::Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for k in 0..levels {
        let n = SIMILARITY_COARSE_CELLS << k;
        let g = build_grid(GridKind::Radial3d, n, SIMILARITY_DOMAIN.0, SIMILARITY_DOMAIN.1)?;
        let theta0 = Field::from_fn(&g, |r| similarity_solution(SIMILARITY_EXTINCTION, 0.0, r));
        let data = DirichletData::similarity(SIMILARITY_EXTINCTION, &g);
        let dt = 0.5 * g.h() * g.h();
        let end = run_vfd_radial(theta0, &data, dt, SIMILARITY_T_END, &StepperParams::default())?;
        let exact = Field::from_fn(&g, |r| similarity_solution(SIMILARITY_EXTINCTION, SIMILARITY_T_END, r));
        let err = end.theta.zip_map(&exact, |a, b| a - b)?.norm(Lp::Inf);
        let order = rows.last().map(|p| (p.linf_error / err).log2());
        rows.push(ConvergenceRow {
            n_cells: n,
            h: g.h(),
            dt,
            linf_error: err,
            observed_order: order,
        });
    }
    Ok(rows)
}

pub const ORDER_RANGE: (f64, f64) = (1.8, 2.2);
pub const COARSE_ERROR_TOL: f64 = 5e-2;

pub fn cmd_bench_similarity(levels: usize, out: &mut impl Write) -> CliResult {
    if levels == 0 {
        return Err(CliError::Usage("levels must be at least 1".into()));
    }
    let rows = similarity_convergence(levels)?;
    let mut csv = String::from("n_cells,h,dt,linf_error,observed_order\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n_cells,
            output::num(r.h),
            output::num(r.dt),
            output::num(r.linf_error),
            r.observed_order.map(output::num).unwrap_or_default()
        ));
    }
    out.write_all(csv.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
    if let Some(dir) = report_dir() {
        write_file(&dir, "similarity_convergence.csv", &csv)?;
    }
    let mut failures = Vec::new();
    let coarse = rows[0].linf_error;
    if coarse > COARSE_ERROR_TOL {
        failures.push(format!("coarse_error={coarse:e}"));
    }
    for r in &rows {
        if let Some(p) = r.observed_order {
            if !(ORDER_RANGE.0..=ORDER_RANGE.1).contains(&p) {
                failures.push(format!("order_n{}={p}", r.n_cells));
            }
        }
    }
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    say(
        out,
        format_args!(
            "{status} similarity.order range=[{},{}] coarse_error={coarse:e} tol={COARSE_ERROR_TOL:e}",
            ORDER_RANGE.0, ORDER_RANGE.1
        ),
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(failures.join(",")))
    }
}

/// Exact rational from `"7"`, `"-1.25"`, `"3e-2"` or `"14/3"`.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    let bad = || format!("'{s}' is not an exact decimal or fraction");
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 30 {
        return Err(bad());
    }
    let mut n: i128 = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i32;
    if scale.unsigned_abs() > 30 {
        return Err(bad());
    }
    let pow = 10i128.pow(scale.unsigned_abs());
    Ok(if scale >= 0 {
        Rational::from_integer(n.checked_mul(pow).ok_or_else(bad)?)
    } else {
        Rational::new(n, pow)
    })
}

fn show(r: &Rational) -> String {
    let v = *r.numer() as f64 / *r.denom() as f64;
    format!("{r} ({})", output::num(v))
}

pub fn cmd_moser(epsilon: &str, p0: &str, levels: usize, out: &mut impl Write) -> CliResult {
    let eps = parse_rational(epsilon).map_err(|m| CliError::Usage(format!("eps: {m}")))?;
    let p0 = parse_rational(p0).map_err(|m| CliError::Usage(format!("p0: {m}")))?;
    let ladder = moser_ladder_exact(eps, p0, levels).map_err(|e| CliError::Usage(e.to_string()))?;
    say(out, format_args!("epsilon = {}", show(&ladder.epsilon)))?;
    say(out, format_args!("K = {}", show(&ladder.k_eps)))?;
    say(out, format_args!("H = {}", show(&ladder.h)))?;
    for (i, p) in ladder.levels.iter().enumerate() {
        say(out, format_args!("p_{i} = {}", show(p)))?;
    }
    let joined: Vec<String> = ladder.levels.iter().map(|p| p.to_string()).collect();
    say(out, format_args!("ladder = {}", joined.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("1.0").unwrap(), Rational::from_integer(1));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("-3e-1").unwrap(), Rational::new(-3, 10));
        assert_eq!(parse_rational("14/3").unwrap(), Rational::new(14, 3));
        assert_eq!(parse_rational("2E2").unwrap(), Rational::from_integer(200));
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "1e99"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn moser_output() {
        let mut buf = Vec::new();
        cmd_moser("1.0", "4", 3, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("H = 7/6 "), "{text}");
        assert!(text.contains("ladder = 4, 14/3, 49/9"), "{text}");
    }

    #[test]
    fn moser_rejects_bad_arguments() {
        let mut buf = Vec::new();
        let err = cmd_moser("x", "4", 3, &mut buf).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(cmd_moser("1", "4", 0, &mut buf).is_err());
    }

    #[test]
    fn error_lines_are_single_line() {
        let e = CliError::Config(ConfigError::Validation {
            key: "potential".into(),
            message: "unknown potential 'quintic'".into(),
        });
        let s = e.to_string();
        assert!(!s.contains('\n'));
        assert!(s.starts_with("exit=2 kind=validation-error key=potential"));
        assert_eq!(CliError::Property("x".into()).exit_code(), 4);
        assert_eq!(CliError::Solver(crate::Error::EmptyTrajectory).exit_code(), 3);
    }

    #[test]
    fn run_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = parse_config_str("n_cells = 16\nt_end = 0.05\ndt = 0.01\nsave_every = 2\nchi0 = cosine:0,0.5\n")
            .unwrap();
        cfg.output_dir = dir.path().to_path_buf();
        let mut buf = Vec::new();
        cmd_run(&cfg, &mut buf).unwrap();
        let diag = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        let mut lines = diag.lines();
        assert_eq!(lines.next().unwrap(), output::DIAGNOSTICS_HEADER);
        // initial state, steps 2 and 4, final step 5
        assert_eq!(lines.count(), 4);
        let fin = std::fs::read_to_string(dir.path().join("final_state.csv")).unwrap();
        assert_eq!(fin.lines().count(), 17);
    }

    #[test]
    fn similarity_two_levels() {
        let rows = similarity_convergence(2).unwrap();
        assert_eq!(rows[0].n_cells, 16);
        assert!(rows[0].observed_order.is_none());
        let p = rows[1].observed_order.unwrap();
        assert!((1.8..=2.2).contains(&p), "{p}");
    }
}
