//! Radial discretization of R^3 for radial functions.
//!
//! A radial function `u(r)` on the truncated domain `[0, r_max]` is stored at
//! the interior nodes `r_j = j h`, `h = r_max/(n+1)`, with a Dirichlet
//! condition at `r_max`. The auxiliary variable `w = r u` turns the radial
//! Laplacian `u'' + (2/r) u'` into the 1D Dirichlet Laplacian `w''`, which is
//! diagonalized exactly by the sine modes `sin(k_m r)`, `k_m = m pi / r_max`.
//! All spectral operators in this crate act on the `w` sine coefficients.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Interior-node radial grid with its sine-transform plan.
pub struct RadialGrid {
    n: usize,
    r_max: f64,
    h: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    /// Quadrature weights `4 pi r_j^2 h` for the radial measure.
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ortho_scale: f64,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("n", &self.n)
            .field("r_max", &self.r_max)
            .field("h", &self.h)
            .finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.r_max == other.r_max
    }
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::GridTooSmall(n));
        }
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::BadRadius(r_max));
        }
        let h = r_max / (n + 1) as f64;
        let nodes: Vec<f64> = (1..=n).map(|j| j as f64 * h).collect();
        let wavenumbers: Vec<f64> = (1..=n)
            .map(|m| m as f64 * std::f64::consts::PI / r_max)
            .collect();
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&r| 4.0 * std::f64::consts::PI * r * r * h)
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let ortho_scale = (2.0 / (n + 1) as f64).sqrt();
        Ok(RadialGrid {
            n,
            r_max,
            h,
            nodes,
            wavenumbers,
            weights,
            fft,
            ortho_scale,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Interior nodes `r_j = j h`, `j = 1..=n`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers `k_m = m pi / r_max`, `m = 1..=n`, strictly increasing.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Quadrature weights `4 pi r_j^2 h`.
    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest resolved wavenumber `k_n`.
    pub fn k_max(&self) -> f64 {
        self.wavenumbers[self.n - 1]
    }

    /// Orthonormal type-I sine transform, its own inverse.
    ///
    /// Maps node samples of `w` to coefficients in the basis
    /// `sqrt(2/(n+1)) sin(pi j m / (n+1))`. Implemented through a length
    /// `2(n+1)` FFT of the odd extension.
    pub fn dst(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for j in 1..=n {
            buf[j] = x[j - 1];
            buf[m - j] = -x[j - 1];
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        let half_i = Complex64::new(0.0, 0.5) * self.ortho_scale;
        (1..=n).map(|k| half_i * buf[k]).collect()
    }

    /// Evaluate `sum_m c_m cos(pi j m/(n+1))` at the interior nodes.
    ///
    /// Used for the spectral derivative of `w`: a sine series differentiates
    /// into this cosine series.
    pub fn cosine_series_at_nodes(&self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert_eq!(c.len(), n);
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for j in 1..=n {
            buf[j] = c[j - 1];
            buf[m - j] = c[j - 1];
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        (1..=n).map(|k| 0.5 * buf[k]).collect()
    }

    /// `sum_m c_m` — the cosine series at `r = 0`.
    pub fn cosine_series_at_origin(&self, c: &[Complex64]) -> Complex64 {
        c.iter().sum()
    }

    pub(crate) fn ortho_scale(&self) -> f64 {
        self.ortho_scale
    }
}

/// Build a shared grid handle.
pub fn make_grid(n: usize, r_max: f64) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::new(n, r_max)?))
}
