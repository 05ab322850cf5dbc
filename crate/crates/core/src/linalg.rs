//! Cyclic tridiagonal systems from periodic one-dimensional stencils.

use crate::error::{Error, Result};

/// `A` with `A[i][i-1] = lower[i]`, `A[i][i] = diag[i]`, `A[i][i+1] = upper[i]`,
/// indices taken modulo `n`. `lower[0]` and `upper[n-1]` are the corner entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicTridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        for v in [&lower, &upper] {
            if v.len() != n {
                return Err(Error::InconsistentLengths {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(CyclicTridiagonal { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        CyclicTridiagonal {
            lower: vec![0.0; n],
            diag: vec![1.0; n],
            upper: vec![0.0; n],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.lower[i] * x[(i + n - 1) % n] + self.diag[i] * x[i] + self.upper[i] * x[(i + 1) % n]
            })
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| self.lower[i].abs() + self.diag[i].abs() + self.upper[i].abs())
            .fold(0.0, f64::max)
    }

    /// Whether `|a_ii| >= sum_{j != i} |a_ij|` on every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.len()).all(|i| self.diag[i].abs() >= self.lower[i].abs() + self.upper[i].abs())
    }

    /// Solves `A x = rhs` by a Sherman-Morrison rank-one correction of a plain
    /// tridiagonal (Thomas) solve.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::InconsistentLengths {
                expected: n,
                got: rhs.len(),
            });
        }
        if n < 3 {
            return Err(Error::TooFewNodes { got: n, min: 3 });
        }
        if !self.is_diagonally_dominant() {
            log::debug!("cyclic tridiagonal system of size {n} is not diagonally dominant");
        }

        let corner_top = self.lower[0];
        let corner_bottom = self.upper[n - 1];
        let gamma = if self.diag[0] != 0.0 { -self.diag[0] } else { -1.0 };

        let mut diag = self.diag.clone();
        diag[0] -= gamma;
        diag[n - 1] -= corner_top * corner_bottom / gamma;

        let factor = ThomasFactor::new(&self.lower, &diag, &self.upper)?;
        let mut x = factor.solve(rhs);

        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = corner_bottom;
        let z = factor.solve(&u);

        // v = (1, 0, ..., 0, corner_top / gamma)
        let ratio = corner_top / gamma;
        let denom = 1.0 + z[0] + ratio * z[n - 1];
        let scale = 1.0 + z[0].abs() + (ratio * z[n - 1]).abs();
        if !(denom.abs() > 64.0 * f64::EPSILON * scale) {
            return Err(Error::SingularMatrix { row: n - 1 });
        }
        let coef = (x[0] + ratio * x[n - 1]) / denom;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi -= coef * zi;
        }
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { row });
        }
        Ok(x)
    }
}

/// LU factors of a non-cyclic tridiagonal matrix; `lower[0]` and
/// `upper[n-1]` are ignored.
struct ThomasFactor<'a> {
    lower: &'a [f64],
    pivots: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl<'a> ThomasFactor<'a> {
    fn new(lower: &'a [f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut upper_scaled = Vec::with_capacity(n);
        let mut piv = diag[0];
        for i in 0..n {
            if i > 0 {
                piv = diag[i] - lower[i] * upper_scaled[i - 1];
            }
            if piv == 0.0 || !piv.is_finite() {
                return Err(Error::SingularMatrix { row: i });
            }
            pivots.push(piv);
            upper_scaled.push(if i + 1 < n { upper[i] / piv } else { 0.0 });
        }
        Ok(ThomasFactor {
            lower,
            pivots,
            upper_scaled,
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut y = vec![0.0; n];
        y[0] = rhs[0] / self.pivots[0];
        for i in 1..n {
            y[i] = (rhs[i] - self.lower[i] * y[i - 1]) / self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            y[i] -= self.upper_scaled[i] * y[i + 1];
        }
        y
    }
}

pub fn cyclic_tridiagonal_solve(system: &CyclicTridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    system.solve(rhs)
}
