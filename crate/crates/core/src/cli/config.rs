//! `key = value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::grid::{build_grid, GridKind};
use crate::initial::Profile;
use crate::potentials::{PotentialKind, PotentialSpec};
use crate::stepper::{ModelConfig, Splitting, StepperParams, Variant};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: PathBuf, message: String },
    Parse { line: usize, message: String },
    Validation { key: String, message: String },
    Domain { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "kind=io path={} reason={message}", path.display()),
            ConfigError::Parse { line, message } => write!(f, "kind=parse-error line={line} reason={message}"),
            ConfigError::Validation { key, message } => {
                write!(f, "kind=validation-error key={key} reason={message}")
            }
            ConfigError::Domain { key, message } => write!(f, "kind=domain-violation key={key} reason={message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub potential: PotentialKind,
    pub splitting: Splitting,
    pub grid: GridKind,
    pub n_cells: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub theta0: Profile,
    pub chi0: Profile,
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    pub max_halvings: usize,
    pub output_dir: PathBuf,
    pub experiment: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = StepperParams::default();
        RunConfig {
            variant: Variant::NonConserved,
            potential: PotentialKind::Logarithmic,
            splitting: Splitting::Full,
            grid: GridKind::Cartesian1d,
            n_cells: 256,
            x_lo: 0.0,
            x_hi: 1.0,
            theta0: Profile::Constant(1.0),
            chi0: Profile::Constant(0.0),
            dt: p.dt,
            t_end: 1.0,
            save_every: 10,
            newton_tol: p.newton_tol,
            newton_max_iters: p.newton_max_iters,
            max_halvings: p.max_halvings,
            output_dir: PathBuf::from("output"),
            experiment: None,
        }
    }
}

pub const KEYS: [&str; 17] = [
    "variant",
    "potential",
    "splitting",
    "grid",
    "n_cells",
    "x_lo",
    "x_hi",
    "theta0",
    "chi0",
    "dt",
    "t_end",
    "save_every",
    "newton_tol",
    "newton_max_iters",
    "max_halvings",
    "output_dir",
    "experiment",
];

fn parse_grid_kind(s: &str) -> Result<GridKind, String> {
    match s {
        "cartesian1d" => Ok(GridKind::Cartesian1d),
        "radial3d" => Ok(GridKind::Radial3d),
        other => Err(format!("unknown grid kind '{other}'")),
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| ConfigError::Validation {
        key: key.to_string(),
        message: format!("'{raw}': {e}"),
    })
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}

/// Parses and fully validates a configuration; nothing is simulated yet,
/// but the grid and initial fields are built once to check admissibility.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (k, raw_line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        let raw = raw.trim();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(invalid(key, "unknown key"));
        }
        if seen.iter().any(|s| s == key) {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
        seen.push(key.to_string());
        match key {
            "variant" => cfg.variant = value(key, raw)?,
            "potential" => cfg.potential = value(key, raw)?,
            "splitting" => cfg.splitting = value(key, raw)?,
            "grid" => cfg.grid = parse_grid_kind(raw).map_err(|e| invalid(key, e))?,
            "n_cells" => cfg.n_cells = value(key, raw)?,
            "x_lo" => cfg.x_lo = value(key, raw)?,
            "x_hi" => cfg.x_hi = value(key, raw)?,
            "theta0" => cfg.theta0 = value(key, raw)?,
            "chi0" => cfg.chi0 = value(key, raw)?,
            "dt" => cfg.dt = value(key, raw)?,
            "t_end" => cfg.t_end = value(key, raw)?,
            "save_every" => cfg.save_every = value(key, raw)?,
            "newton_tol" => cfg.newton_tol = value(key, raw)?,
            "newton_max_iters" => cfg.newton_max_iters = value(key, raw)?,
            "max_halvings" => cfg.max_halvings = value(key, raw)?,
            "output_dir" => {
                if raw.is_empty() {
                    return Err(invalid(key, "empty path"));
                }
                cfg.output_dir = PathBuf::from(raw)
            }
            "experiment" => {
                if raw.is_empty() || raw.contains(['/', '\\']) {
                    return Err(invalid(key, "experiment name must be a plain, non-empty name"));
                }
                cfg.experiment = Some(raw.to_string())
            }
            _ => unreachable!(),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn params(&self) -> StepperParams {
        StepperParams {
            dt: self.dt,
            newton_tol: self.newton_tol,
            newton_max_iters: self.newton_max_iters,
            max_halvings: self.max_halvings,
            save_every: self.save_every,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("newton_tol", self.newton_tol)?;
        for (key, v) in [
            ("save_every", self.save_every),
            ("newton_max_iters", self.newton_max_iters),
            ("max_halvings", self.max_halvings),
        ] {
            if v == 0 {
                return Err(invalid(key, "must be at least 1"));
            }
        }
        self.model().map(|_| ())
    }

    /// Builds grid, initial data and model; errors name the offending key.
    pub fn model(&self) -> Result<ModelConfig, ConfigError> {
        let grid = build_grid(self.grid, self.n_cells, self.x_lo, self.x_hi).map_err(|e| {
            let key = match e {
                crate::Error::InvalidGrid(ref m) if m.contains("n_cells") => "n_cells",
                crate::Error::RadialOrigin { .. } => "x_lo",
                _ => "x_hi",
            };
            invalid(key, e.to_string())
        })?;
        let theta0 = self.theta0.evaluate(&grid).map_err(|e| invalid("theta0", e.to_string()))?;
        let chi0 = self.chi0.evaluate(&grid).map_err(|e| invalid("chi0", e.to_string()))?;
        if let Some(i) = theta0.values().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(ConfigError::Domain {
                key: "theta0".into(),
                message: format!("initial temperature must be positive (node {i}: {})", theta0.values()[i]),
            });
        }
        let potential = PotentialSpec { kind: self.potential };
        if let Some(i) = chi0.values().iter().position(|&v| !potential.in_domain(v)) {
            return Err(ConfigError::Domain {
                key: "chi0".into(),
                message: format!(
                    "initial phase outside the {} domain (node {i}: {})",
                    self.potential,
                    chi0.values()[i]
                ),
            });
        }
        ModelConfig::new(self.variant, potential, &grid, theta0, chi0)
            .map(|m| m.with_splitting(self.splitting))
            .map_err(|e| ConfigError::Domain {
                key: "chi0".into(),
                message: e.to_string(),
            })
    }

    /// `output_dir`, overridden by `PF_OUTPUT_DIR`, plus the experiment name.
    pub fn resolved_output_dir(&self) -> PathBuf {
        let base = std::env::var_os("PF_OUTPUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output_dir.clone());
        match &self.experiment {
            Some(name) => base.join(name),
            None => base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_conserved_config() {
        let cfg = parse_config_str(
            "variant = conserved\npotential = logarithmic\ntheta0 = constant:1.0\nchi0 = cosine:0.0,0.9\n",
        )
        .unwrap();
        assert_eq!(cfg.variant, Variant::Conserved);
        assert_eq!(cfg.chi0, Profile::Cosine { a: 0.0, b: 0.9 });
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config_str("# header\n\n dt = 0.01   # step\nn_cells=64\n").unwrap();
        assert_eq!(cfg.dt, 0.01);
        assert_eq!(cfg.n_cells, 64);
    }

    #[test]
    fn negative_temperature_is_domain_violation() {
        let err = parse_config_str("theta0 = constant:-1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Domain { ref key, .. } if key == "theta0"), "{err}");
    }

    #[test]
    fn phase_outside_domain_is_domain_violation() {
        let err = parse_config_str("chi0 = constant:1.5\n").unwrap_err();
        assert!(matches!(err, ConfigError::Domain { ref key, .. } if key == "chi0"));
        assert!(parse_config_str("potential = polynomial\nchi0 = constant:1.5\n").is_ok());
    }

    #[test]
    fn unknown_values_and_keys() {
        let err = parse_config_str("potential = quintic\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "potential"));
        assert!(err.to_string().contains("key=potential"));
        let err = parse_config_str("colour = blue\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "colour"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config_str("dt = 0.1\n\nthis line is wrong\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Parse {
                line: 3,
                message: "expected 'key = value', got 'this line is wrong'".into()
            }
        );
        let err = parse_config_str("dt = 0.1\ndt = 0.2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
    }

    #[test]
    fn grid_errors_name_keys() {
        let err = parse_config_str("n_cells = 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "n_cells"));
        let err = parse_config_str("grid = radial3d\nx_lo = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "x_lo"));
        let err = parse_config_str("dt = 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "dt"));
    }

    #[test]
    fn similarity_preset_requires_radial_grid() {
        assert!(parse_config_str("theta0 = similarity:1\n").is_err());
        assert!(parse_config_str("grid = radial3d\nx_lo = 0.5\nx_hi = 2\ntheta0 = similarity:1\n").is_ok());
    }
}
