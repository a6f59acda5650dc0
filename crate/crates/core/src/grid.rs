//! Cell-centred finite-volume geometry, nodal fields and the discrete
//! operator `A ≈ -Δ`.
//!
//! `A` is written in flux form: for cell `i`
//!
//! ```text
//! (A v)_i = (1 / vol_i) * Σ_faces T_f (v_i - v_neighbour)
//! ```
//!
//! with face transmissibility `T_f = area_f / h`. Homogeneous Neumann
//! boundaries simply drop the boundary faces (mirror ghost cells), which makes
//! `Σ_i vol_i (A v)_i = 0` hold by telescoping.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::thomas_solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Uniform cells on an interval.
    Cartesian1d,
    /// Spherical shells `x_lo < r < x_hi` (radially symmetric 3D).
    Radial3d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    kind: GridKind,
    n_cells: usize,
    x_lo: f64,
    x_hi: f64,
    h: f64,
    centers: Vec<f64>,
    volumes: Vec<f64>,
    /// `n_cells + 1` face areas, boundary faces included.
    face_areas: Vec<f64>,
}

pub const MIN_CELLS: usize = 4;

impl Grid {
    pub fn new(kind: GridKind, n_cells: usize, x_lo: f64, x_hi: f64) -> Result<Grid> {
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "n_cells = {n_cells}, need at least {MIN_CELLS}"
            )));
        }
        if !(x_lo.is_finite() && x_hi.is_finite()) || x_hi <= x_lo {
            return Err(Error::InvalidGrid(format!("invalid extent [{x_lo}, {x_hi}]")));
        }
        if kind == GridKind::Radial3d && x_lo <= 0.0 {
            return Err(Error::RadialOrigin { x_lo });
        }
        let h = (x_hi - x_lo) / n_cells as f64;
        let face = |i: usize| x_lo + i as f64 * h;
        let centers = (0..n_cells).map(|i| x_lo + (i as f64 + 0.5) * h).collect();
        let (volumes, face_areas) = match kind {
            GridKind::Cartesian1d => (vec![h; n_cells], vec![1.0; n_cells + 1]),
            GridKind::Radial3d => {
                let shell = |a: f64, b: f64| 4.0 / 3.0 * std::f64::consts::PI * (b.powi(3) - a.powi(3));
                let vols = (0..n_cells).map(|i| shell(face(i), face(i + 1))).collect();
                let areas = (0..=n_cells)
                    .map(|i| 4.0 * std::f64::consts::PI * face(i).powi(2))
                    .collect();
                (vols, areas)
            }
        };
        Ok(Grid {
            kind,
            n_cells,
            x_lo,
            x_hi,
            h,
            centers,
            volumes,
            face_areas,
        })
    }

    pub fn unit(n_cells: usize) -> Result<Arc<Grid>> {
        build_grid(GridKind::Cartesian1d, n_cells, 0.0, 1.0)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Left and right face coordinates of cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.x_lo + i as f64 * self.h, self.x_lo + (i + 1) as f64 * self.h)
    }
}

/// Builds a shareable grid; fields hold an `Arc` to the grid they live on.
pub fn build_grid(kind: GridKind, n_cells: usize, x_lo: f64, x_hi: f64) -> Result<Arc<Grid>> {
    Grid::new(kind, n_cells, x_lo, x_hi).map(Arc::new)
}

/// Nodal (cell-centred) values on a grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lp {
    L1,
    L2,
    Inf,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Field {
        Field {
            grid: grid.clone(),
            values: vec![c; grid.n_cells()],
        }
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: grid.clone(),
            values: grid.centers().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Volume-weighted integral `∫ v`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.volumes()).map(|(v, w)| v * w).sum()
    }

    /// `(1/|Ω|) ∫ v`.
    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.total_volume()
    }

    pub fn inner(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.volumes())
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    pub fn norm(&self, p: Lp) -> f64 {
        let w = self.grid.volumes();
        match p {
            Lp::L1 => self.values.iter().zip(w).map(|(v, w)| v.abs() * w).sum(),
            Lp::L2 => self.values.iter().zip(w).map(|(v, w)| v * v * w).sum::<f64>().sqrt(),
            Lp::Inf => self.max_abs(),
        }
    }

    /// Discrete `‖∇v‖_{L¹}` from face differences.
    pub fn grad_l1(&self) -> f64 {
        let g = &self.grid;
        let areas = g.face_areas();
        self.values
            .windows(2)
            .enumerate()
            .map(|(i, pair)| areas[i + 1] * (pair[1] - pair[0]).abs())
            .sum()
    }
}

pub fn inner(v: &Field, z: &Field) -> Result<f64> {
    v.inner(z)
}

pub fn norm_lp(v: &Field, p: Lp) -> f64 {
    v.norm(p)
}

pub fn mean(v: &Field) -> f64 {
    v.mean()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Neumann,
    /// Boundary values imposed at the two boundary faces.
    Dirichlet { left: f64, right: f64 },
}

/// `A ≈ -Δ` on a grid with the given boundary treatment.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    grid: Arc<Grid>,
    bc: Boundary,
    /// Face transmissibilities, `n_cells + 1` entries; boundary faces are 0
    /// for Neumann.
    trans: Vec<f64>,
}

impl DiscreteLaplacian {
    pub fn neumann(grid: &Arc<Grid>) -> Self {
        Self::new(grid, Boundary::Neumann)
    }

    pub fn new(grid: &Arc<Grid>, bc: Boundary) -> Self {
        let n = grid.n_cells();
        let h = grid.h();
        let areas = grid.face_areas();
        let mut trans: Vec<f64> = areas.iter().map(|a| a / h).collect();
        match bc {
            Boundary::Neumann => {
                trans[0] = 0.0;
                trans[n] = 0.0;
            }
            Boundary::Dirichlet { .. } => {
                trans[0] = areas[0] / (0.5 * h);
                trans[n] = areas[n] / (0.5 * h);
            }
        }
        DiscreteLaplacian {
            grid: grid.clone(),
            bc,
            trans,
        }
    }

    /// Same operator with new Dirichlet values (no-op for Neumann).
    pub fn with_boundary_values(&self, left: f64, right: f64) -> Self {
        let mut out = self.clone();
        if let Boundary::Dirichlet { .. } = self.bc {
            out.bc = Boundary::Dirichlet { left, right };
        }
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.bc
    }

    pub fn n(&self) -> usize {
        self.grid.n_cells()
    }

    /// Row `i` of the linear part: `(sub, diag, super)` coefficients.
    #[inline]
    pub fn row(&self, i: usize) -> (f64, f64, f64) {
        let vol = self.grid.volumes()[i];
        let tl = self.trans[i];
        let tr = self.trans[i + 1];
        (-tl / vol, (tl + tr) / vol, -tr / vol)
    }

    /// Inhomogeneous part of row `i` (non-zero only for Dirichlet end cells).
    #[inline]
    pub fn boundary_source(&self, i: usize) -> f64 {
        match self.bc {
            Boundary::Neumann => 0.0,
            Boundary::Dirichlet { left, right } => {
                let n = self.n();
                let vol = self.grid.volumes()[i];
                let mut s = 0.0;
                if i == 0 {
                    s += self.trans[0] * left / vol;
                }
                if i + 1 == n {
                    s += self.trans[n] * right / vol;
                }
                s
            }
        }
    }

    /// `out = A v` on raw slices.
    pub fn apply_slice(&self, v: &[f64], out: &mut [f64]) {
        let n = self.n();
        for i in 0..n {
            let (l, d, u) = self.row(i);
            let mut s = d * v[i];
            if i > 0 {
                s += l * v[i - 1];
            }
            if i + 1 < n {
                s += u * v[i + 1];
            }
            out[i] = s - self.boundary_source(i);
        }
    }

    pub fn apply(&self, v: &Field) -> Result<Field> {
        self.check(v)?;
        let mut out = vec![0.0; self.n()];
        self.apply_slice(v.values(), &mut out);
        Field::from_values(&self.grid, out)
    }

    fn check(&self, v: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, v.grid()) || *self.grid == **v.grid() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `⟨A v, v⟩`, evaluated as a sum of squared face differences for the
    /// homogeneous operator so the result is non-negative by construction.
    pub fn quadratic_form(&self, v: &Field) -> Result<f64> {
        self.check(v)?;
        let x = v.values();
        let n = self.n();
        let mut s: f64 = (1..n).map(|i| self.trans[i] * (x[i] - x[i - 1]).powi(2)).sum();
        if let Boundary::Dirichlet { left, right } = self.bc {
            s += self.trans[0] * (x[0] - left) * x[0];
            s += self.trans[n] * (x[n - 1] - right) * x[n - 1];
        }
        Ok(s)
    }

    /// Discrete `‖∇v‖ = ⟨A v, v⟩^{1/2}` (homogeneous Neumann form).
    pub fn seminorm_h1(&self, v: &Field) -> Result<f64> {
        self.check(v)?;
        let x = v.values();
        let s: f64 = (1..self.n()).map(|i| self.trans[i] * (x[i] - x[i - 1]).powi(2)).sum();
        Ok(s.sqrt())
    }

    /// Solves `(I + s A₀) y = v`, where `A₀` is the homogeneous part.
    ///
    /// The system is symmetrised by the cell volumes and solved directly.
    pub fn resolvent(&self, v: &Field, s: f64) -> Result<Field> {
        self.check(v)?;
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("resolvent scale {s}")));
        }
        let n = self.n();
        let vol = self.grid.volumes();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            diag[i] = vol[i] + s * (self.trans[i] + self.trans[i + 1]);
            lower[i] = -s * self.trans[i];
            upper[i] = -s * self.trans[i + 1];
            rhs[i] = vol[i] * v.values()[i];
        }
        let y = thomas_solve(&lower, &diag, &upper, &rhs)?;

        let mut res = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            let mut ay = diag[i] * y[i];
            if i > 0 {
                ay += lower[i] * y[i - 1];
            }
            if i + 1 < n {
                ay += upper[i] * y[i + 1];
            }
            res = res.max((ay - rhs[i]).abs());
            scale = scale.max(rhs[i].abs()).max(diag[i] * y[i].abs());
        }
        if res > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SolverFailure(format!("resolvent residual {res:e}")));
        }
        Field::from_values(&self.grid, y)
    }

    /// Discrete dual norm `⟨(I + A)⁻¹ v, v⟩^{1/2}`.
    pub fn norm_dual(&self, v: &Field) -> Result<f64> {
        let y = self.resolvent(v, 1.0)?;
        Ok(y.inner(v)?.max(0.0).sqrt())
    }
}

pub fn apply_laplacian(a: &DiscreteLaplacian, v: &Field) -> Result<Field> {
    a.apply(v)
}

pub fn seminorm_h1(a: &DiscreteLaplacian, v: &Field) -> Result<f64> {
    a.seminorm_h1(v)
}

pub fn norm_dual(a: &DiscreteLaplacian, v: &Field) -> Result<f64> {
    a.norm_dual(v)
}
