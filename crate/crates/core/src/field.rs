//! Radial complex fields and the spectral operators acting on them.

use num_complex::Complex64;
use std::sync::Arc;

use crate::grid::RadialGrid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Node samples `u(r_j)`.
    Physical,
    /// Orthonormal sine coefficients of `w = r u`.
    Spectral,
}

/// A radial function on `[0, r_max]`, physical or spectral.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
    repr: Representation,
}

impl RadialField {
    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        RadialField {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
            repr: Representation::Physical,
        }
    }

    /// Physical field from node values.
    pub fn from_values(grid: &Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.n(), "value count must match grid");
        RadialField {
            grid: grid.clone(),
            values,
            repr: Representation::Physical,
        }
    }

    /// Physical field sampled from a complex-valued radial profile.
    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::from_values(grid, values)
    }

    /// Physical field sampled from a real radial profile.
    pub fn from_real_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    /// Spectral field from sine coefficients of `w = r u`.
    pub fn from_spectrum(grid: &Arc<RadialGrid>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.n(), "coefficient count must match grid");
        RadialField {
            grid: grid.clone(),
            values: coeffs,
            repr: Representation::Spectral,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn expect(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(Error::Representation {
                expected: repr,
                got: self.repr,
            });
        }
        Ok(())
    }

    fn same_grid(&self, other: &RadialField) -> Result<()> {
        if self.grid.as_ref() != other.grid.as_ref() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Sine coefficients of `w = r u`.
    pub fn to_spectral(&self) -> Result<RadialField> {
        self.expect(Representation::Physical)?;
        let w: Vec<Complex64> = self
            .values
            .iter()
            .zip(self.grid.nodes())
            .map(|(v, &r)| v * r)
            .collect();
        Ok(RadialField {
            grid: self.grid.clone(),
            values: self.grid.dst(&w),
            repr: Representation::Spectral,
        })
    }

    /// Node samples `u(r_j) = w(r_j)/r_j`.
    pub fn to_physical(&self) -> Result<RadialField> {
        self.expect(Representation::Spectral)?;
        let w = self.grid.dst(&self.values);
        let values = w
            .iter()
            .zip(self.grid.nodes())
            .map(|(v, &r)| v / r)
            .collect();
        Ok(RadialField {
            grid: self.grid.clone(),
            values,
            repr: Representation::Physical,
        })
    }

    /// Apply a spectral multiplier `m(k_m)` to a physical field.
    pub fn spectral_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Result<RadialField> {
        let mut hat = self.to_spectral()?;
        for (c, &k) in hat.values.iter_mut().zip(self.grid.wavenumbers()) {
            *c *= m(k);
        }
        hat.to_physical()
    }

    /// Radial Laplacian `u'' + (2/r) u'`.
    pub fn laplacian(&self) -> Result<RadialField> {
        self.spectral_multiplier(|k| Complex64::new(-k * k, 0.0))
    }

    /// Homogeneous power `D^s` of `D = sqrt(-laplacian)`.
    pub fn d_power(&self, s: f64) -> Result<RadialField> {
        self.spectral_multiplier(|k| Complex64::new(k.powf(s), 0.0))
    }

    /// Inhomogeneous power `<D>^s = (1 + k^2)^{s/2}`.
    pub fn d_power_inhomogeneous(&self, s: f64) -> Result<RadialField> {
        self.spectral_multiplier(|k| Complex64::new((1.0 + k * k).powf(s / 2.0), 0.0))
    }

    /// Node samples of `w' = (r u)'`, evaluated through the cosine series.
    pub fn w_derivative_at_nodes(&self) -> Result<Vec<Complex64>> {
        let hat = self.to_spectral()?;
        let scale = self.grid.ortho_scale();
        let c: Vec<Complex64> = hat
            .values
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(a, &k)| a * scale * k)
            .collect();
        Ok(self.grid.cosine_series_at_nodes(&c))
    }

    /// Scaling derivative `r d/dr u = w' - u`.
    pub fn radial_scaling_derivative(&self) -> Result<RadialField> {
        let wp = self.w_derivative_at_nodes()?;
        let values = wp
            .iter()
            .zip(&self.values)
            .map(|(d, v)| d - v)
            .collect();
        Ok(RadialField {
            grid: self.grid.clone(),
            values,
            repr: Representation::Physical,
        })
    }

    /// Radial derivative `u' = (w' - u)/r`.
    pub fn d_dr(&self) -> Result<RadialField> {
        let wp = self.w_derivative_at_nodes()?;
        let values = wp
            .iter()
            .zip(&self.values)
            .zip(self.grid.nodes())
            .map(|((d, v), &r)| (d - v) / r)
            .collect();
        Ok(RadialField {
            grid: self.grid.clone(),
            values,
            repr: Representation::Physical,
        })
    }

    /// Value at the origin by even extension: `u(0) = w'(0)`.
    pub fn value_at_origin(&self) -> Result<Complex64> {
        let hat = self.to_spectral()?;
        let scale = self.grid.ortho_scale();
        let c: Vec<Complex64> = hat
            .values
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(a, &k)| a * scale * k)
            .collect();
        Ok(self.grid.cosine_series_at_origin(&c))
    }

    pub fn conj(&self) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
            repr: self.repr,
        }
    }

    pub fn real_part(&self) -> RadialField {
        assert_eq!(self.repr, Representation::Physical);
        RadialField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.re, 0.0))
                .collect(),
            repr: Representation::Physical,
        }
    }

    pub fn imag_part(&self) -> RadialField {
        assert_eq!(self.repr, Representation::Physical);
        RadialField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.im, 0.0))
                .collect(),
            repr: Representation::Physical,
        }
    }

    /// Pointwise `|u|^2` as a physical field.
    pub fn modulus_squared(&self) -> RadialField {
        assert_eq!(self.repr, Representation::Physical);
        RadialField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0))
                .collect(),
            repr: Representation::Physical,
        }
    }

    pub fn scale(&self, c: Complex64) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            repr: self.repr,
        }
    }

    pub fn add(&self, other: &RadialField) -> RadialField {
        assert_eq!(self.repr, other.repr);
        assert!(self.grid.as_ref() == other.grid.as_ref());
        RadialField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            repr: self.repr,
        }
    }

    pub fn sub(&self, other: &RadialField) -> RadialField {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul_pointwise(&self, other: &RadialField) -> RadialField {
        assert_eq!(self.repr, Representation::Physical);
        assert_eq!(other.repr, Representation::Physical);
        assert!(self.grid.as_ref() == other.grid.as_ref());
        RadialField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
            repr: Representation::Physical,
        }
    }
}

/// Real-part L^2 pairing `Re \int conj(f) g dx` with the radial measure.
pub fn inner(f: &RadialField, g: &RadialField) -> Result<f64> {
    f.expect(Representation::Physical)?;
    g.expect(Representation::Physical)?;
    f.same_grid(g)?;
    let mut acc = 0.0;
    for ((a, b), &w) in f.values.iter().zip(&g.values).zip(f.grid.quad_weights()) {
        acc += (a.conj() * b).re * w;
    }
    Ok(acc)
}

/// `L^p` norm with the radial measure; `p = inf` gives the node maximum.
pub fn lp_norm(f: &RadialField, p: f64) -> Result<f64> {
    f.expect(Representation::Physical)?;
    if p.is_infinite() {
        return Ok(f.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    if !(p >= 1.0) {
        return Err(crate::invalid("p", format!("need p >= 1, got {p}")));
    }
    let mut acc = 0.0;
    for (v, &w) in f.values.iter().zip(f.grid.quad_weights()) {
        acc += v.norm().powf(p) * w;
    }
    Ok(acc.powf(1.0 / p))
}

/// `L^2` norm.
pub fn l2_norm(f: &RadialField) -> f64 {
    lp_norm(f, 2.0).expect("physical field")
}

/// Squared `L^2` norm straight from the quadrature.
pub fn l2_norm_sq(f: &RadialField) -> f64 {
    let mut acc = 0.0;
    for (v, &w) in f.values.iter().zip(f.grid().quad_weights()) {
        acc += v.norm_sqr() * w;
    }
    acc
}

/// Squared gradient norm, evaluated spectrally: `sum 4 pi h k^2 |w_hat|^2`.
pub fn grad_l2_norm_sq(f: &RadialField) -> Result<f64> {
    let hat = f.to_spectral()?;
    let c = 4.0 * std::f64::consts::PI * f.grid().h();
    Ok(hat
        .values()
        .iter()
        .zip(f.grid().wavenumbers())
        .map(|(a, &k)| c * k * k * a.norm_sqr())
        .sum())
}

/// Gradient norm variant of [`lp_norm`].
pub fn grad_l2_norm(f: &RadialField) -> Result<f64> {
    Ok(grad_l2_norm_sq(f)?.sqrt())
}

/// `H^1` norm `(||u||_2^2 + ||grad u||_2^2)^(1/2)`.
pub fn h1_norm(f: &RadialField) -> Result<f64> {
    Ok((l2_norm_sq(f) + grad_l2_norm_sq(f)?).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_grid;
    use approx::assert_relative_eq;

    fn eigenmode(grid: &Arc<RadialGrid>, m: usize) -> RadialField {
        let k = grid.wavenumbers()[m];
        RadialField::from_fn(grid, |r| Complex64::new((k * r).sin() / r, 0.0))
    }

    #[test]
    fn eigenmode_has_single_coefficient() {
        let g = make_grid(64, 9.0).unwrap();
        let f = eigenmode(&g, 2);
        let hat = f.to_spectral().unwrap();
        for (m, c) in hat.values().iter().enumerate() {
            if m == 2 {
                assert!(c.norm() > 1.0);
            } else {
                assert!(c.norm() < 1e-12, "mode {m} leaked {}", c.norm());
            }
        }
    }

    #[test]
    fn transform_round_trip_and_plancherel() {
        let g = make_grid(100, 17.0).unwrap();
        let f = RadialField::from_fn(&g, |r| {
            Complex64::new((-0.3 * r * r).exp() * (1.3 * r).cos(), (0.7 * r).sin() * (-0.2 * r).exp())
        });
        let hat = f.to_spectral().unwrap();
        let back = hat.to_physical().unwrap();
        let num = l2_norm(&back.sub(&f));
        let den = l2_norm(&f);
        assert!(num <= 1e-12 * den, "round trip rel err {}", num / den);

        // Plancherel in the w variable
        let w_sq: f64 = f
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, &r)| (v * r).norm_sqr())
            .sum();
        let hat_sq: f64 = hat.values().iter().map(|c| c.norm_sqr()).sum();
        assert_relative_eq!(w_sq, hat_sq, max_relative = 1e-12);
    }

    #[test]
    fn representation_mismatch_is_an_error() {
        let g = make_grid(16, 2.0).unwrap();
        let f = RadialField::zeros(&g);
        let hat = f.to_spectral().unwrap();
        assert!(matches!(hat.to_spectral(), Err(Error::Representation { .. })));
        assert!(matches!(f.to_physical(), Err(Error::Representation { .. })));
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = make_grid(128, 11.0).unwrap();
        let k = g.wavenumbers()[4];
        let f = eigenmode(&g, 4);
        let lap = f.laplacian().unwrap();
        let expect = f.scale(Complex64::new(-k * k, 0.0));
        let err = l2_norm(&lap.sub(&expect)) / l2_norm(&expect);
        assert!(err < 1e-12, "rel err {err}");
    }

    #[test]
    fn laplacian_of_zero() {
        let g = make_grid(32, 5.0).unwrap();
        let z = RadialField::zeros(&g);
        assert_eq!(l2_norm(&z.laplacian().unwrap()), 0.0);
    }

    #[test]
    fn laplacian_matches_finite_differences_on_gaussian() {
        let g = make_grid(255, 16.0).unwrap();
        let f = RadialField::from_real_fn(&g, |r| (-r * r / 2.0).exp());
        let lap = f.laplacian().unwrap();
        let h = g.h();
        let v = f.values();
        // interior nodes away from both ends
        let mut worst = 0.0f64;
        for j in 1..g.n() - 1 {
            let r = g.nodes()[j];
            if !(1.0..=8.0).contains(&r) {
                continue;
            }
            let fd = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h)
                + (v[j + 1] - v[j - 1]) / (2.0 * h) * (2.0 / r);
            worst = worst.max((lap.values()[j] - fd).norm());
        }
        // second-order stencil truncation dominates the gap
        assert!(worst < 2.0 * h * h, "worst {worst} vs h^2 {}", h * h);
        assert!(worst > 0.0);
    }

    #[test]
    fn d_power_eigenfunction_and_inverse() {
        let g = make_grid(96, 13.0).unwrap();
        let k = g.wavenumbers()[7];
        let f = eigenmode(&g, 7);
        let df = f.d_power(1.0).unwrap();
        let err = l2_norm(&df.sub(&f.scale(Complex64::new(k, 0.0)))) / (k * l2_norm(&f));
        assert!(err < 1e-12);

        let rnd = RadialField::from_fn(&g, |r| {
            Complex64::new((0.9 * r).sin() * (-r * r / 6.0).exp(), (-r * r / 5.0).exp())
        });
        let id = rnd.d_power(1.0).unwrap().d_power(-1.0).unwrap();
        assert!(l2_norm(&id.sub(&rnd)) <= 1e-10 * l2_norm(&rnd));

        let d2 = rnd.d_power(1.0).unwrap().d_power(1.0).unwrap();
        let neg_lap = rnd.laplacian().unwrap().scale(Complex64::new(-1.0, 0.0));
        assert!(l2_norm(&d2.sub(&neg_lap)) <= 1e-10 * l2_norm(&neg_lap));
    }

    #[test]
    fn scaling_derivative_on_flat_bump_and_mode() {
        let g = make_grid(512, 24.0).unwrap();
        // flat near the origin: r d/dr should vanish there
        let c = 0.7;
        let f = RadialField::from_real_fn(&g, |r| {
            c * crate::cutoff::smooth_step((6.0 - r) / 2.0)
        });
        let rdr = f.radial_scaling_derivative().unwrap();
        for (j, &r) in g.nodes().iter().enumerate() {
            if r < 3.0 {
                assert!(
                    rdr.values()[j].norm() < 1e-10,
                    "r={r} value {}",
                    rdr.values()[j].norm()
                );
            }
        }

        // analytic oracle on an exact mode: r d/dr (sin(kr)/r) = k cos(kr) - sin(kr)/r
        let k = g.wavenumbers()[11];
        let mode = RadialField::from_fn(&g, |r| Complex64::new((k * r).sin() / r, 0.0));
        let rdr = mode.radial_scaling_derivative().unwrap();
        let oracle = RadialField::from_fn(&g, |r| {
            Complex64::new(k * (k * r).cos() - (k * r).sin() / r, 0.0)
        });
        let err = l2_norm(&rdr.sub(&oracle)) / l2_norm(&oracle);
        assert!(err < 1e-11, "rel err {err}");
    }

    #[test]
    fn scaling_derivative_commutes_with_dilation() {
        // g(r) = f(lambda r) on the grid with r_max/lambda has the same nodes
        let lambda = 2.0;
        let g1 = make_grid(128, 20.0).unwrap();
        let g2 = make_grid(128, 20.0 / lambda).unwrap();
        let prof = |r: f64| Complex64::new((-r * r / 7.0).exp() * (0.8 * r).cos(), 0.0);
        let f1 = RadialField::from_fn(&g1, prof);
        let f2 = RadialField::from_fn(&g2, |r| prof(lambda * r));
        let a = f1.radial_scaling_derivative().unwrap();
        let b = f2.radial_scaling_derivative().unwrap();
        for j in 0..128 {
            assert!((a.values()[j] - b.values()[j]).norm() < 1e-11);
        }
    }

    #[test]
    fn inner_product_basics() {
        let g = make_grid(64, 8.0).unwrap();
        let f = RadialField::from_fn(&g, |r| Complex64::new((-r).exp(), 0.3 * (-r / 2.0).exp()));
        let ff = inner(&f, &f).unwrap();
        assert!(ff >= 0.0);
        assert_relative_eq!(ff, lp_norm(&f, 2.0).unwrap().powi(2), max_relative = 1e-12);

        // orthogonality of distinct modes
        let a = eigenmode(&g, 3);
        let b = eigenmode(&g, 9);
        assert!(inner(&a, &b).unwrap().abs() < 1e-10);

        // <f | i f> = 0
        let rot = f.scale(Complex64::new(0.0, 1.0));
        assert!(inner(&f, &rot).unwrap().abs() < 1e-12 * ff);

        let other = RadialField::zeros(&make_grid(64, 9.0).unwrap());
        assert!(matches!(inner(&f, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn lp_norm_cases() {
        let g = make_grid(2048, 24.0).unwrap();
        let z = RadialField::zeros(&g);
        assert_eq!(lp_norm(&z, 3.0).unwrap(), 0.0);
        assert!(lp_norm(&z, 0.5).is_err());

        // smooth plateau of height 1 on [1, 2], transitions centered at the edges
        let w = 0.05;
        let bump = RadialField::from_real_fn(&g, |r| {
            crate::cutoff::smooth_step((r - 1.0 + w / 2.0) / w)
                * crate::cutoff::smooth_step((2.0 - r + w / 2.0) / w)
        });
        let shell = 4.0 * std::f64::consts::PI / 3.0 * (8.0 - 1.0);
        for p in [1.0, 2.0, 4.0] {
            let v = lp_norm(&bump, p).unwrap().powf(p);
            assert!(
                (v - shell).abs() < 0.02 * shell,
                "p={p}: {v} vs shell {shell}"
            );
        }
        assert_relative_eq!(lp_norm(&bump, f64::INFINITY).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn laplacian_self_adjoint_on_decaying_fields() {
        let g = make_grid(256, 20.0).unwrap();
        let f = RadialField::from_fn(&g, |r| Complex64::new((-r * r / 3.0).exp(), 0.2 * (-r * r / 4.0).exp()));
        let h = RadialField::from_fn(&g, |r| Complex64::new((-r * r / 5.0).exp() * (0.9 * r).sin(), 0.0));
        let a = inner(&f.laplacian().unwrap(), &h).unwrap();
        let b = inner(&f, &h.laplacian().unwrap()).unwrap();
        assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "a={a} b={b}");
    }

    #[test]
    fn value_at_origin_of_gaussian() {
        let g = make_grid(512, 20.0).unwrap();
        let f = RadialField::from_real_fn(&g, |r| 2.5 * (-r * r / 2.0).exp());
        let v = f.value_at_origin().unwrap();
        assert_relative_eq!(v.re, 2.5, max_relative = 1e-9);
        assert!(v.im.abs() < 1e-12);
    }
}
