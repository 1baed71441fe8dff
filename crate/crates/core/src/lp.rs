//! Littlewood-Paley projections on the radial spectral grid.
//!
//! Bands are indexed by the integer `j` with nominal cell
//! `2^{j-1/2} <= k < 2^{j+1/2}`. The sharp partition is exactly that cell
//! indicator (so the band of a wavenumber is `round(log2 k)`); the smooth
//! partition replaces the cell edges by C-infinity transitions narrow enough
//! to keep every band supported inside the dyadic annulus
//! `(2^{j-1}, 2^{j+1})`. Both sum to one exactly.

use num_complex::Complex64;
use std::sync::Arc;

use crate::cutoff::smooth_step;
use crate::field::{RadialField, Representation};
use crate::grid::RadialGrid;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionKind {
    /// Indicator cells; the pair masks of the bilinear calculus use this.
    Sharp,
    /// Smooth edges over `width` octaves, `0 < width < 1`.
    Smooth { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    kind: PartitionKind,
}

impl Default for DyadicPartition {
    fn default() -> Self {
        DyadicPartition::smooth(0.5)
    }
}

impl DyadicPartition {
    pub fn sharp() -> DyadicPartition {
        DyadicPartition {
            kind: PartitionKind::Sharp,
        }
    }

    pub fn smooth(width: f64) -> DyadicPartition {
        assert!(width > 0.0 && width < 1.0, "width must sit in (0, 1)");
        DyadicPartition {
            kind: PartitionKind::Smooth { width },
        }
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    /// Weight of band `j` at wavenumber `k > 0`.
    pub fn weight(&self, j: i32, k: f64) -> f64 {
        debug_assert!(k > 0.0);
        let t = k.log2();
        match self.kind {
            PartitionKind::Sharp => {
                let lo = j as f64 - 0.5;
                let hi = j as f64 + 0.5;
                if t >= lo && t < hi {
                    1.0
                } else {
                    0.0
                }
            }
            PartitionKind::Smooth { width } => {
                let rise = smooth_step((t - (j as f64 - 0.5)) / width + 0.5);
                let fall = smooth_step((t - (j as f64 + 0.5)) / width + 0.5);
                rise - fall
            }
        }
    }

    /// Bands whose weight is nonzero at `k`, with the weights.
    pub fn bands_at(&self, k: f64) -> Vec<(i32, f64)> {
        let center = k.log2().round() as i32;
        let mut out = Vec::with_capacity(2);
        for j in center - 1..=center + 1 {
            let w = self.weight(j, k);
            if w > 0.0 {
                out.push((j, w));
            }
        }
        out
    }

    /// Nominal band index of a wavenumber, `round(log2 k)`.
    pub fn band_of(&self, k: f64) -> i32 {
        k.log2().round() as i32
    }

    /// All bands with nonzero weight somewhere on the grid, ascending.
    pub fn grid_bands(&self, grid: &RadialGrid) -> Vec<i32> {
        let lo = self.band_of(grid.wavenumbers()[0]) - 1;
        let hi = self.band_of(grid.k_max()) + 1;
        (lo..=hi)
            .filter(|&j| {
                grid.wavenumbers()
                    .iter()
                    .any(|&k| self.weight(j, k) > 0.0)
            })
            .collect()
    }
}

/// Projection onto band `j`.
pub fn lp_project(f: &RadialField, j: i32, partition: &DyadicPartition) -> Result<RadialField> {
    f_to_band(f, j, partition)?.to_physical()
}

fn f_to_band(f: &RadialField, j: i32, partition: &DyadicPartition) -> Result<RadialField> {
    let hat = if f.representation() == Representation::Spectral {
        f.clone()
    } else {
        f.to_spectral()?
    };
    let grid = f.grid().clone();
    let coeffs = hat
        .values()
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, &k)| c * partition.weight(j, k))
        .collect();
    Ok(RadialField::from_spectrum(&grid, coeffs))
}

/// All grid-visible band pieces of `f` in physical representation.
pub fn lp_pieces(
    f: &RadialField,
    partition: &DyadicPartition,
) -> Result<Vec<(i32, RadialField)>> {
    let hat = f.to_spectral()?;
    let grid = f.grid();
    let mut out = Vec::new();
    for j in partition.grid_bands(grid) {
        let coeffs: Vec<Complex64> = hat
            .values()
            .iter()
            .zip(grid.wavenumbers())
            .map(|(c, &k)| c * partition.weight(j, k))
            .collect();
        let any = coeffs.iter().any(|c| c.norm_sqr() > 0.0);
        if any {
            out.push((
                j,
                RadialField::from_spectrum(grid, coeffs).to_physical()?,
            ));
        }
    }
    Ok(out)
}

/// Spectral `L^2` norms of the band pieces, `(j, ||P_j f||_2)`, computed
/// without leaving the coefficient space.
pub fn band_l2_norms(
    f: &RadialField,
    partition: &DyadicPartition,
) -> Result<Vec<(i32, f64)>> {
    let hat = f.to_spectral()?;
    let grid = f.grid();
    let c = 4.0 * std::f64::consts::PI * grid.h();
    let mut out = Vec::new();
    for j in partition.grid_bands(grid) {
        let mut acc = 0.0;
        for (v, &k) in hat.values().iter().zip(grid.wavenumbers()) {
            let w = partition.weight(j, k);
            acc += (v * w).norm_sqr();
        }
        if acc > 0.0 {
            out.push((j, (c * acc).sqrt()));
        }
    }
    Ok(out)
}

pub fn make_single_band_field(
    grid: &Arc<RadialGrid>,
    j: i32,
    partition: &DyadicPartition,
    amplitude: Complex64,
) -> RadialField {
    let coeffs = grid
        .wavenumbers()
        .iter()
        .map(|&k| {
            let w = partition.weight(j, k);
            if w > 0.0 {
                amplitude * w * (-((k.log2() - j as f64) * 3.0).powi(2)).exp()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    RadialField::from_spectrum(grid, coeffs)
        .to_physical()
        .expect("spectral construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{l2_norm, l2_norm_sq};
    use crate::make_grid;

    #[test]
    fn eigenmode_lands_in_one_sharp_band() {
        let g = make_grid(128, 16.0).unwrap();
        let part = DyadicPartition::sharp();
        let m = 40;
        let k = g.wavenumbers()[m];
        let f = RadialField::from_fn(&g, |r| Complex64::new((k * r).sin() / r, 0.0));
        let j = part.band_of(k);
        let pj = lp_project(&f, j, &part).unwrap();
        assert!(l2_norm(&pj.sub(&f)) < 1e-12 * l2_norm(&f));
        for dj in [-2i32, 2, 3] {
            let other = lp_project(&f, j + dj, &part).unwrap();
            assert!(l2_norm(&other) < 1e-13);
        }
    }

    #[test]
    fn partition_of_unity_both_kinds() {
        let g = make_grid(200, 21.0).unwrap();
        let f = RadialField::from_fn(&g, |r| {
            Complex64::new((-r * r / 7.0).exp() * (2.3 * r).cos(), (1.1 * r).sin() * (-r / 2.0).exp())
        });
        for part in [DyadicPartition::sharp(), DyadicPartition::smooth(0.5)] {
            let pieces = lp_pieces(&f, &part).unwrap();
            let mut sum = RadialField::zeros(&g);
            for (_, p) in &pieces {
                sum = sum.add(p);
            }
            let err = l2_norm(&sum.sub(&f)) / l2_norm(&f);
            assert!(err < 1e-10, "partition defect {err}");
        }
    }

    #[test]
    fn smooth_bands_stay_inside_their_annulus() {
        let part = DyadicPartition::smooth(0.5);
        for j in [-3i32, 0, 4] {
            let lo = 2f64.powi(j - 1);
            let hi = 2f64.powi(j + 1);
            for i in 0..200 {
                let k = lo * 0.5 + (hi * 1.5 - lo * 0.5) * i as f64 / 199.0;
                let w = part.weight(j, k);
                if w > 0.0 {
                    assert!(k > lo && k < hi, "band {j} leaks to k = {k}");
                }
            }
        }
    }

    #[test]
    fn square_sum_norm_equivalence() {
        // 1/2 ||f||^2 <= sum_j ||P_j f||^2 <= ||f||^2
        let g = make_grid(256, 18.0).unwrap();
        let f = RadialField::from_fn(&g, |r| {
            Complex64::new((-r * r / 5.0).exp(), (0.8 * r).sin() * (-r / 3.0).exp())
        });
        for part in [DyadicPartition::sharp(), DyadicPartition::smooth(0.5)] {
            let total = l2_norm_sq(&f);
            let sq_sum: f64 = band_l2_norms(&f, &part)
                .unwrap()
                .iter()
                .map(|(_, n)| n * n)
                .sum();
            assert!(
                sq_sum <= total * (1.0 + 1e-10) && sq_sum >= 0.5 * total * (1.0 - 1e-10),
                "sum {sq_sum} vs total {total}"
            );
        }
    }
}
