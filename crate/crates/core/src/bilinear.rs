//! Masked bilinear products and the nonresonant bilinear multipliers.
//!
//! For radial fields the product of two sine modes `sin(br)/r` and
//! `sin(ar)/r` carries a flat spectral density on the wavenumber interval
//! `[|b-a|, b+a]`. A masked bilinear operator with a phase denominator is
//! therefore a sum over mode pairs `(b, a)` of one-dimensional integrals
//! `int_(|b-a|)^(b+a) sin(s r) / phase(s, b, a) ds`, which we evaluate with
//! the reciprocal phase interpolated linearly between the output grid nodes
//! and the remaining trigonometric integrals done in closed form. Cell
//! boundaries land exactly on grid nodes, so a constant multiplier
//! reproduces the pointwise masked product to roundoff; a curved multiplier
//! is approximated to second order in the grid spacing.

use num_complex::Complex64;
use serde::Serialize;

use crate::field::RadialField;
use crate::lp::{lp_pieces, DyadicPartition, PartitionKind};
use crate::regions::{region_contains, RegionKind};
use crate::{invalid, Error, Result};

/// Union of regions sharing one threshold.
#[derive(Debug, Clone)]
pub struct RegionMask {
    pub kinds: Vec<RegionKind>,
    pub beta: f64,
}

impl RegionMask {
    pub fn new(kinds: &[RegionKind], beta: f64) -> Result<RegionMask> {
        if !(beta > 0.0) {
            return Err(invalid("beta", format!("need beta > 0, got {beta}")));
        }
        Ok(RegionMask {
            kinds: kinds.to_vec(),
            beta,
        })
    }

    pub fn contains(&self, j: i32, k: i32) -> bool {
        self.kinds
            .iter()
            .any(|&kind| region_contains(kind, self.beta, j, k))
    }
}

/// `sum_((j,k) in mask) (P_j f)(P_k g)` in physical space.
pub fn masked_product(
    f: &RadialField,
    g: &RadialField,
    mask: &RegionMask,
    partition: &DyadicPartition,
) -> Result<RadialField> {
    if f.grid().as_ref() != g.grid().as_ref() {
        return Err(Error::GridMismatch);
    }
    let fp = lp_pieces(f, partition)?;
    let gp = lp_pieces(g, partition)?;
    let mut out = RadialField::zeros(f.grid());
    for (j, pf) in &fp {
        for (k, pg) in &gp {
            if mask.contains(*j, *k) {
                out = out.add(&pf.mul_pointwise(pg));
            }
        }
    }
    Ok(out)
}

/// Phase denominators of the nonresonant calculus, as functions of the
/// output wavenumber `s`, the first-slot wavenumber `b` and the second-slot
/// wavenumber `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseKind {
    /// `-s^2 + alpha b + a^2`
    SchrodingerPlus,
    /// `-s^2 - alpha b + a^2`
    SchrodingerMinus,
    /// `b^2 - a^2 - alpha s`
    Wave,
}

impl PhaseKind {
    pub fn eval(&self, s: f64, b: f64, a: f64, alpha: f64) -> f64 {
        match self {
            PhaseKind::SchrodingerPlus => -s * s + alpha * b + a * a,
            PhaseKind::SchrodingerMinus => -s * s - alpha * b + a * a,
            PhaseKind::Wave => b * b - a * a - alpha * s,
        }
    }
}

// per-mode sparsity cutoff relative to the largest coefficient
const SPARSE_REL: f64 = 1e-16;

fn w_series_coefficients(f: &RadialField) -> Result<Vec<Complex64>> {
    let hat = f.to_spectral()?;
    let scale = f.grid().ortho_scale();
    Ok(hat.values().iter().map(|c| c * scale).collect())
}

fn active_modes(coeffs: &[Complex64]) -> Vec<usize> {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return Vec::new();
    }
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > SPARSE_REL * max)
        .map(|(i, _)| i)
        .collect()
}

/// Per-mode band membership with weights; sharp partitions collapse to one
/// entry of weight one.
fn mode_bands(partition: &DyadicPartition, wavenumbers: &[f64]) -> Vec<Vec<(i32, f64)>> {
    wavenumbers
        .iter()
        .map(|&k| partition.bands_at(k))
        .collect()
}

/// Core quadrature: `h(x) = sum_(p,q) W(p,q) m(s, k_p, k_q)`-weighted
/// bilinear density, reconstructed on the grid.
///
/// `multiplier` returns the scalar factor at each `(s, b, a)` evaluation
/// node and may fail (resonance guards).
pub fn bilinear_multiplier_apply(
    f: &RadialField,
    g: &RadialField,
    mask: &RegionMask,
    partition: &DyadicPartition,
    multiplier: &dyn Fn(f64, f64, f64) -> Result<f64>,
) -> Result<RadialField> {
    if f.grid().as_ref() != g.grid().as_ref() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid().clone();
    let n = grid.n();
    let dk = grid.wavenumbers()[0];
    let a_coeffs = w_series_coefficients(f)?;
    let b_coeffs = w_series_coefficients(g)?;
    let f_active = active_modes(&a_coeffs);
    let g_active = active_modes(&b_coeffs);
    let bands = mode_bands(partition, grid.wavenumbers());
    let sharp = matches!(partition.kind(), PartitionKind::Sharp);

    // nodal accumulators per cell [k_c, k_(c+1)], c = 0..n-1
    let mut g_lo = vec![Complex64::new(0.0, 0.0); n];
    let mut g_hi = vec![Complex64::new(0.0, 0.0); n];

    for &p in &f_active {
        let kb = grid.wavenumbers()[p];
        let m1 = p + 1;
        for &q in &g_active {
            let ka = grid.wavenumbers()[q];
            let m2 = q + 1;
            let weight = if sharp {
                let jb = bands[p][0].0;
                let ja = bands[q][0].0;
                if mask.contains(jb, ja) {
                    1.0
                } else {
                    0.0
                }
            } else {
                let mut w = 0.0;
                for &(jb, wb) in &bands[p] {
                    for &(ja, wa) in &bands[q] {
                        if mask.contains(jb, ja) {
                            w += wb * wa;
                        }
                    }
                }
                w
            };
            if weight == 0.0 {
                continue;
            }
            let coef = 0.5 * weight * a_coeffs[p] * b_coeffs[q];
            let lo = m1.abs_diff(m2);
            let hi = (m1 + m2).min(n);
            if lo >= hi {
                continue;
            }
            for c in lo..hi {
                let s0 = c as f64 * dk;
                let s1 = (c + 1) as f64 * dk;
                g_lo[c] += coef * multiplier(s0, kb, ka)?;
                g_hi[c] += coef * multiplier(s1, kb, ka)?;
            }
        }
    }

    // reconstruct h(r) r = (1/r) sum_m cosC[m] cos(k_m r) + cosC[0]/r
    //                    + (1/(dk r^2)) sum_m sinC[m] sin(k_m r)
    let mut cos_c = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut sin_c = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        cos_c[c] += g_lo[c];
        cos_c[c + 1] -= g_hi[c];
    }
    let diff = |c: usize| -> Complex64 {
        if c < n {
            g_hi[c] - g_lo[c]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    for m in 1..=n {
        sin_c[m - 1] = diff(m - 1) - diff(m);
    }

    let cos_sum = grid.cosine_series_at_nodes(&cos_c[1..=n].to_vec());
    let sin_sum_scaled = grid.dst(&sin_c); // ortho_scale * desired sum
    let ortho = grid.ortho_scale();
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let w_val = (cos_c[0] + cos_sum[j]) / r + sin_sum_scaled[j] / (ortho * dk * r * r);
            w_val / r
        })
        .collect();
    Ok(RadialField::from_values(&grid, values))
}

fn schrodinger_guard(alpha: f64) -> impl Fn(f64, f64, f64, f64) -> Result<f64> {
    move |omega: f64, s: f64, b: f64, _a: f64| {
        if omega.abs() < 1e-12 * alpha * b * (1.0 + s) {
            return Err(Error::SolveFailure(format!(
                "resonant phase at s={s}, b={b}: omega={omega}"
            )));
        }
        Ok(1.0 / omega)
    }
}

/// One masked branch with a reciprocal phase multiplier.
pub fn bilinear_phase_branch(
    f: &RadialField,
    g: &RadialField,
    mask: &RegionMask,
    partition: &DyadicPartition,
    phase: PhaseKind,
    alpha: f64,
) -> Result<RadialField> {
    let guard = schrodinger_guard(alpha);
    bilinear_multiplier_apply(f, g, mask, partition, &|s, b, a| {
        guard(phase.eval(s, b, a, alpha), s, b.max(a), a)
    })
}

fn wave_schroedinger_mask(beta: f64) -> Result<RegionMask> {
    RegionMask::new(&[RegionKind::XL, RegionKind::LL], beta)
}

fn schroedinger_pair_mask(beta: f64) -> Result<RegionMask> {
    RegionMask::new(&[RegionKind::XL, RegionKind::LX], beta)
}

fn check_beta(beta: f64, alpha: f64) -> Result<()> {
    if beta < crate::regions::beta_lower_bound(alpha) {
        return Err(invalid(
            "beta",
            format!(
                "need beta >= 5 + |log2 alpha| = {}, got {beta}",
                crate::regions::beta_lower_bound(alpha)
            ),
        ));
    }
    Ok(())
}

/// Nonresonant average of the two half-wave branches:
/// `(1/2)(Omega_+(f, g) + Omega_-(conj f, g))` on `XL | LL`.
pub fn omega(
    f: &RadialField,
    g: &RadialField,
    beta: f64,
    alpha: f64,
    partition: &DyadicPartition,
) -> Result<RadialField> {
    check_beta(beta, alpha)?;
    let mask = wave_schroedinger_mask(beta)?;
    let plus = bilinear_phase_branch(f, g, &mask, partition, PhaseKind::SchrodingerPlus, alpha)?;
    let minus = bilinear_phase_branch(
        &f.conj(),
        g,
        &mask,
        partition,
        PhaseKind::SchrodingerMinus,
        alpha,
    )?;
    Ok(plus.add(&minus).scale(Complex64::new(0.5, 0.0)))
}

/// Half-wave difference combination
/// `(1/2)(Omega_+(f, g) - Omega_-(conj f, g))`; this is the branch pattern
/// generated when the wave component of a product is differentiated in time.
pub fn omega_half_difference(
    f: &RadialField,
    g: &RadialField,
    beta: f64,
    alpha: f64,
    partition: &DyadicPartition,
) -> Result<RadialField> {
    check_beta(beta, alpha)?;
    let mask = wave_schroedinger_mask(beta)?;
    let plus = bilinear_phase_branch(f, g, &mask, partition, PhaseKind::SchrodingerPlus, alpha)?;
    let minus = bilinear_phase_branch(
        &f.conj(),
        g,
        &mask,
        partition,
        PhaseKind::SchrodingerMinus,
        alpha,
    )?;
    Ok(plus.sub(&minus).scale(Complex64::new(0.5, 0.0)))
}

/// Wave-denominator multiplier on `XL | LX` with the conjugate spectrum in
/// the second slot.
pub fn omega_tilde(
    f: &RadialField,
    g: &RadialField,
    beta: f64,
    alpha: f64,
    partition: &DyadicPartition,
) -> Result<RadialField> {
    check_beta(beta, alpha)?;
    let mask = schroedinger_pair_mask(beta)?;
    bilinear_phase_branch(f, &g.conj(), &mask, partition, PhaseKind::Wave, alpha)
}

// ---------------------------------------------------------------------------
// resonance scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResonanceScanReport {
    /// min over LL of `|omega| / (alpha b)`, both branches
    pub ll_min_ratio: f64,
    /// max over LL of the same ratio
    pub ll_max_ratio: f64,
    /// min over XL of `|omega| / (b (1 + s))`, both branches
    pub xl_min_ratio: f64,
    /// min over XL | LX of `|wave phase| / (s (1 + s))`
    pub wave_min_ratio: f64,
    pub min_ratio_schrodinger: f64,
    pub min_ratio_wave: f64,
}

/// Exact minimum of `|-s^2 + c|` over `s` in `[lo, hi]`.
fn quad_min_abs(c: f64, lo: f64, hi: f64) -> f64 {
    if c >= lo * lo && c <= hi * hi {
        0.0
    } else {
        (c - lo * lo).abs().min((c - hi * hi).abs())
    }
}

fn quad_max_abs(c: f64, lo: f64, hi: f64) -> f64 {
    (c - lo * lo).abs().max((c - hi * hi).abs())
}

/// Exact minimum of `|l - alpha s|` over `s` in `[lo, hi]`.
fn lin_min_abs(l: f64, alpha: f64, lo: f64, hi: f64) -> f64 {
    let root = l / alpha;
    if root >= lo && root <= hi {
        0.0
    } else {
        (l - alpha * lo).abs().min((l - alpha * hi).abs())
    }
}

/// Scan the masked interaction triangles for near-resonances.
///
/// Wavenumber pairs are sampled log-uniformly inside the dyadic supports of
/// each region pair; the extremum over the output wavenumber is computed in
/// closed form, so a vanishing denominator inside a triangle cannot be
/// missed. A near-zero minimum with `beta` above its lower bound indicates
/// a mask bug; below the bound it exhibits the expected failure.
pub fn resonance_scan(beta: f64, alpha: f64, samples: usize) -> Result<ResonanceScanReport> {
    if !(beta > 0.0 && alpha > 0.0) {
        return Err(invalid("beta", "need positive beta and alpha".into()));
    }
    let beta_i = beta.ceil() as i32;
    let per_dim = ((samples as f64).sqrt() as usize).clamp(4, 64);
    let band_points = |j: i32| -> Vec<f64> {
        // log-spaced points through the sharp band [j - 1/2, j + 1/2]
        (0..per_dim)
            .map(|i| {
                let t = j as f64 - 0.5 + (i as f64 + 0.5) / per_dim as f64;
                2f64.powf(t)
            })
            .collect()
    };

    let mut ll_min: f64 = f64::INFINITY;
    let mut ll_max: f64 = 0.0;
    let mut xl_min: f64 = f64::INFINITY;
    let mut wave_min: f64 = f64::INFINITY;

    // XL window: j >= max(k + 5, beta); a band span past beta covers the
    // self-similar regime
    for j in beta_i..=beta_i + 8 {
        for k in (j - 20)..=(j - 5) {
            for &b in &band_points(j) {
                for &a in &band_points(k) {
                    let lo = (b - a).abs();
                    let hi = b + a;
                    for c in [alpha * b + a * a, -alpha * b + a * a] {
                        let m = quad_min_abs(c, lo, hi);
                        xl_min = xl_min.min(m / (b * (1.0 + lo)));
                    }
                    let wave = lin_min_abs(b * b - a * a, alpha, lo, hi);
                    wave_min = wave_min.min(wave / (hi * (1.0 + hi)));
                }
            }
        }
    }
    // LL window: max(j, k) <= -beta
    for j in (-beta_i - 8)..=(-beta_i) {
        for k in (-beta_i - 8)..=(-beta_i) {
            if region_contains(RegionKind::LL, beta, j, k) {
                for &b in &band_points(j) {
                    for &a in &band_points(k) {
                        let lo = (b - a).abs();
                        let hi = b + a;
                        for c in [alpha * b + a * a, -alpha * b + a * a] {
                            ll_min = ll_min.min(quad_min_abs(c, lo, hi) / (alpha * b));
                            ll_max = ll_max.max(quad_max_abs(c, lo, hi) / (alpha * b));
                        }
                    }
                }
            }
        }
    }
    let report = ResonanceScanReport {
        ll_min_ratio: ll_min,
        ll_max_ratio: ll_max,
        xl_min_ratio: xl_min,
        wave_min_ratio: wave_min,
        min_ratio_schrodinger: ll_min.min(xl_min),
        min_ratio_wave: wave_min,
    };
    Ok(report)
}
