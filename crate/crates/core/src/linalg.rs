//! Direct solvers for the banded systems produced by 1D stencils.
//!
//! * [`thomas_solve`]: tridiagonal, no pivoting. Used for the symmetric
//!   positive definite resolvent systems `(M + sK) y = M v`.
//! * [`BandedMatrix`]: general banded matrix with an LU factorisation using
//!   partial (row) pivoting, used for Newton Jacobians.

use crate::error::{Error, Result};

/// Solves the tridiagonal system
///
/// ```text
/// lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]
/// ```
///
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::SolverFailure("tridiagonal: length mismatch".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::SolverFailure("tridiagonal: zero pivot at row 0".into()));
    }
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SolverFailure(format!("tridiagonal: zero pivot at row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` columns
/// hold the fill-in produced by row interchanges during factorisation.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|a| *a = 0.0);
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl >= i && j <= i + self.ku + self.kl && i < self.n && j < self.n {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`. Panics if the entry is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// `y = A x` using the unfactored matrix.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting, applied to `rhs` in place.
    /// Consumes the matrix entries (the factors are not kept).
    pub fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::SolverFailure("banded: rhs length mismatch".into()));
        }
        let (kl, ku) = (self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);

            let mut piv = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let a = self.data[self.idx(i, k)].abs();
                if a > best {
                    best = a;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SolverFailure(format!("banded: singular pivot in column {k}")));
            }
            if piv != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(piv, j);
                    self.data.swap(a, b);
                }
                rhs.swap(k, piv);
            }

            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let factor = self.data[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[ik] = 0.0;
                for j in k + 1..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= factor * kj;
                }
                rhs[i] -= factor * rhs[k];
            }
        }

        for k in (0..n).rev() {
            let last_col = (k + ku + kl).min(n - 1);
            let mut s = rhs[k];
            for j in k + 1..=last_col {
                s -= self.data[self.idx(k, j)] * rhs[j];
            }
            rhs[k] = s / self.data[self.idx(k, k)];
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure("banded: non-finite solution".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thomas_matches_known_solution() {
        // -x'' stencil with Dirichlet ends, x = [1, 2, 3, 4]
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [2.0, 2.0, 2.0, 2.0];
        let upper = [-1.0, -1.0, -1.0, 0.0];
        let x = [1.0, 2.0, 3.0, 4.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        let sol = thomas_solve(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in sol.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn banded_lu_solves_random_systems_needing_pivots() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(12, 2, 2), (30, 4, 4), (9, 1, 3), (5, 0, 0)] {
            let mut a = BandedMatrix::zeros(n, kl, ku);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // weak diagonal so that row interchanges actually happen
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    a.set(i, j, if i == j { 0.1 * v } else { v });
                }
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut rhs = a.matvec(&x);
            let mut lu = a.clone();
            lu.solve_in_place(&mut rhs).unwrap();
            let err = rhs.iter().zip(&x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "n={n} kl={kl} ku={ku} err={err}");
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 0, 1.0);
        let mut rhs = vec![1.0, 1.0, 1.0];
        assert!(matches!(a.solve_in_place(&mut rhs), Err(Error::SolverFailure(_))));
    }
}
