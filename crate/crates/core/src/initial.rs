//! Initial-data presets (`constant:c`, `cosine:a,b`, `spike:base,height,lo,hi`,
//! `similarity:T`, `file:path`).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `a + b cos(π (x - x_lo) / (x_hi - x_lo))`
    Cosine { a: f64, b: f64 },
    /// `base + height` on `[lo, hi]`, `base` elsewhere; cell averages.
    Spike { base: f64, height: f64, lo: f64, hi: f64 },
    /// `2 √T / r`, the extinction profile of `θ_t + Δθ⁻¹ = 0` at `t = 0`.
    Similarity { extinction: f64 },
    /// One value per cell, read from a CSV file.
    File(PathBuf),
}

impl Profile {
    pub fn evaluate(&self, grid: &Arc<Grid>) -> Result<Field> {
        match self {
            Profile::Constant(c) => Ok(Field::constant(grid, *c)),
            Profile::Cosine { a, b } => {
                let (lo, len) = (grid.x_lo(), grid.x_hi() - grid.x_lo());
                Ok(Field::from_fn(grid, |x| {
                    a + b * (std::f64::consts::PI * (x - lo) / len).cos()
                }))
            }
            Profile::Spike { base, height, lo, hi } => {
                let values = (0..grid.n_cells())
                    .map(|i| {
                        let (a, b) = grid.cell_bounds(i);
                        let overlap = (b.min(*hi) - a.max(*lo)).max(0.0);
                        base + height * overlap / (b - a)
                    })
                    .collect();
                Field::from_values(grid, values)
            }
            Profile::Similarity { extinction } => {
                if grid.kind() != GridKind::Radial3d {
                    return Err(Error::InvalidParameter(
                        "similarity profile needs a radial grid".into(),
                    ));
                }
                Ok(Field::from_fn(grid, |r| similarity_solution(*extinction, 0.0, r)))
            }
            Profile::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
                })?;
                let values = parse_value_list(&text)?;
                if values.len() != grid.n_cells() {
                    return Err(Error::InvalidParameter(format!(
                        "{} holds {} values, grid has {} cells",
                        path.display(),
                        values.len(),
                        grid.n_cells()
                    )));
                }
                Field::from_values(grid, values)
            }
        }
    }
}

/// Accepts one value per line, or `x,value` pairs; a non-numeric first
/// line is treated as a header.
fn parse_value_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("").trim();
        match last.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && lineno == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidParameter(format!(
                    "line {}: cannot parse '{last}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

/// `θ(t, r) = 2 (T - t)₊^{1/2} / r`.
pub fn similarity_solution(extinction: f64, t: f64, r: f64) -> f64 {
    2.0 * (extinction - t).max(0.0).sqrt() / r
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| format!("expected <preset>:<args>, got '{s}'"))?;
        let nums = || -> std::result::Result<Vec<f64>, String> {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| format!("bad number '{a}' in '{s}'")))
                .collect()
        };
        let want = |v: Vec<f64>, n: usize| {
            if v.len() == n {
                Ok(v)
            } else {
                Err(format!("preset '{name}' takes {n} argument(s), got {}", v.len()))
            }
        };
        match name.trim() {
            "constant" => Ok(Profile::Constant(want(nums()?, 1)?[0])),
            "cosine" => {
                let v = want(nums()?, 2)?;
                Ok(Profile::Cosine { a: v[0], b: v[1] })
            }
            "spike" => {
                let v = want(nums()?, 4)?;
                if v[3] < v[2] {
                    return Err(format!("spike interval [{}, {}] is empty", v[2], v[3]));
                }
                Ok(Profile::Spike {
                    base: v[0],
                    height: v[1],
                    lo: v[2],
                    hi: v[3],
                })
            }
            "similarity" => {
                let t = want(nums()?, 1)?[0];
                if t <= 0.0 {
                    return Err(format!("similarity extinction time must be positive, got {t}"));
                }
                Ok(Profile::Similarity { extinction: t })
            }
            "file" => Ok(Profile::File(PathBuf::from(args.trim()))),
            other => Err(format!("unknown preset '{other}'")),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "constant:{c}"),
            Profile::Cosine { a, b } => write!(f, "cosine:{a},{b}"),
            Profile::Spike { base, height, lo, hi } => write!(f, "spike:{base},{height},{lo},{hi}"),
            Profile::Similarity { extinction } => write!(f, "similarity:{extinction}"),
            Profile::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_presets() {
        assert_eq!("constant:1.0".parse::<Profile>().unwrap(), Profile::Constant(1.0));
        assert_eq!(
            "cosine:0.0,0.9".parse::<Profile>().unwrap(),
            Profile::Cosine { a: 0.0, b: 0.9 }
        );
        assert!("cosine:1".parse::<Profile>().is_err());
        assert!("wave:1".parse::<Profile>().is_err());
        assert!("constant".parse::<Profile>().is_err());
        let p: Profile = "spike:0.001,10,0.4,0.6".parse().unwrap();
        assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
    }

    #[test]
    fn spike_mass_is_grid_independent() {
        let p = Profile::Spike { base: 1e-3, height: 10.0, lo: 0.4, hi: 0.6 };
        for n in [10, 33, 128] {
            let f = p.evaluate(&Grid::unit(n).unwrap()).unwrap();
            assert!((f.integral() - (1e-3 + 2.0)).abs() < 1e-12, "n = {n}");
            assert!((f.min() - 1e-3).abs() < 1e-15);
        }
    }

    #[test]
    fn similarity_needs_radial() {
        let p = Profile::Similarity { extinction: 1.0 };
        assert!(p.evaluate(&Grid::unit(8).unwrap()).is_err());
        let g = crate::grid::build_grid(GridKind::Radial3d, 8, 0.5, 2.0).unwrap();
        let f = p.evaluate(&g).unwrap();
        assert!((f.values()[0] - 2.0 / g.centers()[0]).abs() < 1e-14);
        assert_eq!(similarity_solution(1.0, 0.75, 1.0), 1.0);
        assert_eq!(similarity_solution(1.0, 1.5, 1.0), 0.0);
    }

    #[test]
    fn file_profile() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("theta.csv");
        std::fs::write(&path, "x,theta\n0.125,1\n0.375,2\n0.625,3\n0.875,4\n").unwrap();
        let f = Profile::File(path.clone()).evaluate(&Grid::unit(4).unwrap()).unwrap();
        assert_eq!(f.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(Profile::File(path).evaluate(&Grid::unit(5).unwrap()).is_err());
    }
}
