//! Global and localized virial quantities and their exact right-hand sides.
//!
//! The monitored quantity is
//! `V = <u | i r d_r u> + (1/2 alpha) <N | i r d_r D^{-1} N>`
//! whose time derivative along the flow is
//! `2 K(u) + ||nu||_2^2 / 2 - <nu | |u|^2>` with `nu = N - |u|^2` (d = 3).
//! A second variant pairs `Re N` against `Im N` and has the derivative
//! `6 E_Z - ||grad u||_2^2 - 2 ||Im N||_2^2`. The two values differ by
//! `(1/alpha) <Re N | D^{-1} Im N>` (checked numerically; the orientation of
//! the monitored quantity is fixed by requiring the first identity to hold
//! along trajectories).

use num_complex::Complex64;
use serde::Serialize;

use crate::cutoff::CutoffProfile;
use crate::evolution::{State, Trajectory};
use crate::field::{grad_l2_norm_sq, inner, l2_norm_sq, lp_norm, RadialField};
use crate::functionals::{deviation, k_functional, zakharov_energy};
use crate::ground_state::GroundState;
use crate::variational::Verdict;
use crate::{invalid, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `<u | i r d_r u> + (1/2 alpha) <N | i r d_r D^{-1} N>`.
pub fn virial_value(state: &State) -> Result<f64> {
    let u_part = inner(&state.u, &state.u.radial_scaling_derivative()?.scale(I))?;
    let pn = state.n_field.d_power(-1.0)?;
    let n_part = inner(&state.n_field, &pn.radial_scaling_derivative()?.scale(I))?;
    Ok(u_part + n_part / (2.0 * state.alpha))
}

/// Exact derivative of [`virial_value`] along the flow:
/// `2K + ||nu||^2/2 - <nu | |u|^2>`.
pub fn virial_rhs(state: &State) -> Result<f64> {
    let (nu_c, _) = deviation(state);
    let k = k_functional(&state.u)?;
    let nu2 = l2_norm_sq(&nu_c);
    let cross = inner(&nu_c, &state.u.modulus_squared())?;
    Ok(2.0 * k + 0.5 * nu2 - cross)
}

/// `<u | i r d_r u> - (1/alpha) <Re N | r d_r D^{-1} Im N>`.
pub fn merle_virial_value(state: &State) -> Result<f64> {
    let u_part = inner(&state.u, &state.u.radial_scaling_derivative()?.scale(I))?;
    let re_n = state.n_field.real_part();
    let im_n = state.n_field.imag_part();
    let arg = im_n.d_power(-1.0)?.radial_scaling_derivative()?;
    Ok(u_part - inner(&re_n, &arg)? / state.alpha)
}

/// Exact derivative of [`merle_virial_value`]:
/// `6 E_Z - ||grad u||^2 - 2 ||Im N||^2`.
///
/// The equivalent middle form `2K + (3/2)||nu||^2 - 2||Im N||^2` is evaluated
/// as a cross-check; disagreement reports an error.
pub fn merle_virial_rhs(state: &State) -> Result<f64> {
    let e_z = zakharov_energy(state)?;
    let g2 = grad_l2_norm_sq(&state.u)?;
    let imn2 = l2_norm_sq(&state.n_field.imag_part());
    let direct = 6.0 * e_z - g2 - 2.0 * imn2;

    let (nu_c, _) = deviation(state);
    let middle = 2.0 * k_functional(&state.u)? + 1.5 * l2_norm_sq(&nu_c) - 2.0 * imn2;
    if (direct - middle).abs() > 1e-8 * (1.0 + direct.abs()) {
        return Err(crate::Error::SolveFailure(format!(
            "virial variant forms disagree: {direct} vs {middle}"
        )));
    }
    Ok(direct)
}

/// Both sides of the static identity relating the two virial quantities:
/// `merle - ours = (1/alpha) <Re N | D^{-1} Im N>` in d = 3.
pub fn virial_difference_identity(state: &State) -> Result<(f64, f64)> {
    let lhs = merle_virial_value(state)? - virial_value(state)?;
    let re_n = state.n_field.real_part();
    let p_im = state.n_field.imag_part().d_power(-1.0)?;
    let rhs = inner(&re_n, &p_im)? / state.alpha;
    Ok((lhs, rhs))
}

fn apply_scaling_op(f: &RadialField, weight: f64) -> Result<RadialField> {
    // A_j f = r d_r f + (3 + j)/2 f, with weight = (3 + j)/2
    Ok(f.radial_scaling_derivative()?
        .add(&f.scale(Complex64::new(weight, 0.0))))
}

fn multiply_cutoff(f: &RadialField, cutoff: &CutoffProfile) -> RadialField {
    let vals = f
        .values()
        .iter()
        .zip(f.grid().nodes())
        .map(|(v, &r)| v * cutoff.eval(r))
        .collect();
    RadialField::from_values(f.grid(), vals)
}

/// Localized virial `V_R`, normalized so that it coincides with
/// [`virial_value`] when the cutoff acts as the identity on the state.
pub fn localized_virial(state: &State, cutoff: &CutoffProfile) -> Result<f64> {
    if cutoff.outer_radius() >= state.grid().r_max() {
        return Err(invalid(
            "R",
            format!(
                "cutoff support [R, 2R] = [{}, {}] must fit inside r_max = {}",
                cutoff.radius(),
                cutoff.outer_radius(),
                state.grid().r_max()
            ),
        ));
    }
    let u = &state.u;
    // u part: <u | i (A0 psi + psi A0) u> / 2 with A0 = r d_r + 3/2
    let a0_psi_u = apply_scaling_op(&multiply_cutoff(u, cutoff), 1.5)?;
    let psi_a0_u = multiply_cutoff(&apply_scaling_op(u, 1.5)?, cutoff);
    let u_part = inner(u, &a0_psi_u.add(&psi_a0_u).scale(I))?;

    // N part: (1/2 alpha) <D^{-1} N | i (A1 psi + psi A1) N> / 2, A1 = r d_r + 2
    let n = &state.n_field;
    let pn = n.d_power(-1.0)?;
    let a1_psi_n = apply_scaling_op(&multiply_cutoff(n, cutoff), 2.0)?;
    let psi_a1_n = multiply_cutoff(&apply_scaling_op(n, 2.0)?, cutoff);
    let n_part = inner(&pn, &a1_psi_n.add(&psi_a1_n).scale(I))? / (2.0 * state.alpha);

    Ok(0.5 * (u_part + n_part))
}

/// Cutoff-slope error functional
/// `rho_R = int_{R <= r <= 2R} |D^{-1} nu|^2 / R^2 dx` with real `nu`.
pub fn rho_r(state: &State, cutoff: &CutoffProfile) -> Result<f64> {
    let (_, nu_r) = deviation(state);
    let y = nu_r.d_power(-1.0)?;
    let grid = state.grid();
    let lo = cutoff.radius();
    let hi = cutoff.outer_radius();
    let mut acc = 0.0;
    for ((v, &r), &w) in y.values().iter().zip(grid.nodes()).zip(grid.quad_weights()) {
        if r >= lo && r <= hi {
            acc += v.norm_sqr() * w;
        }
    }
    Ok(acc / (lo * lo))
}

/// Per-sample virial record.
#[derive(Debug, Clone, Serialize)]
pub struct VirialSample {
    pub t: f64,
    pub v: f64,
    pub rhs: f64,
    pub merle_v: f64,
    pub merle_rhs: f64,
    /// `(R, V_R)` pairs for the monitored radii.
    pub v_r: Vec<(f64, f64)>,
    /// `(R, rho_R)` pairs.
    pub rho: Vec<(f64, f64)>,
}

pub fn virial_sample(state: &State, radii: &[f64]) -> Result<VirialSample> {
    let mut v_r = Vec::with_capacity(radii.len());
    let mut rho = Vec::with_capacity(radii.len());
    for &radius in radii {
        let cutoff = CutoffProfile::new(radius)?;
        v_r.push((radius, localized_virial(state, &cutoff)?));
        rho.push((radius, rho_r(state, &cutoff)?));
    }
    Ok(VirialSample {
        t: state.time,
        v: virial_value(state)?,
        rhs: virial_rhs(state)?,
        merle_v: merle_virial_value(state)?,
        merle_rhs: merle_virial_rhs(state)?,
        v_r,
        rho,
    })
}

/// `||r u||_inf / (||u||_2^{1/2} ||grad u||_2^{1/2})`.
pub fn radial_sobolev_ratio(u: &RadialField) -> Result<f64> {
    let l2 = l2_norm_sq(u).sqrt();
    if l2 == 0.0 {
        return Err(invalid("u", "ratio undefined for the zero field"));
    }
    let sup_ru = u
        .values()
        .iter()
        .zip(u.grid().nodes())
        .map(|(v, &r)| v.norm() * r)
        .fold(0.0, f64::max);
    let g = grad_l2_norm_sq(u)?.sqrt();
    Ok(sup_ru / (l2.sqrt() * g.sqrt()))
}

/// Seven tail integrals over `r >= R`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailMassRecord {
    pub radius: f64,
    pub grad_u: f64,
    pub u_l2: f64,
    pub u_l4: f64,
    pub u_l6: f64,
    pub nu_l2: f64,
    pub d_inv_grad_nu: f64,
    pub d_inv_nu_weighted: f64,
    pub total: f64,
}

pub fn tail_mass(state: &State, radius: f64) -> Result<TailMassRecord> {
    let grid = state.grid();
    if !(radius > 0.0 && radius < grid.r_max()) {
        return Err(invalid(
            "R",
            format!("need 0 < R < r_max, got {radius} vs {}", grid.r_max()),
        ));
    }
    let du = state.u.d_dr()?;
    let (_, nu_r) = deviation(state);
    let y = nu_r.d_power(-1.0)?;
    let dy = y.d_dr()?;

    let mut rec = TailMassRecord {
        radius,
        grad_u: 0.0,
        u_l2: 0.0,
        u_l4: 0.0,
        u_l6: 0.0,
        nu_l2: 0.0,
        d_inv_grad_nu: 0.0,
        d_inv_nu_weighted: 0.0,
        total: 0.0,
    };
    for (j, (&r, &w)) in grid.nodes().iter().zip(grid.quad_weights()).enumerate() {
        if r < radius {
            continue;
        }
        let au = state.u.values()[j].norm();
        rec.grad_u += du.values()[j].norm_sqr() * w;
        rec.u_l2 += au * au * w;
        rec.u_l4 += au.powi(4) * w;
        rec.u_l6 += au.powi(6) * w;
        rec.nu_l2 += nu_r.values()[j].norm_sqr() * w;
        rec.d_inv_grad_nu += dy.values()[j].norm_sqr() * w;
        rec.d_inv_nu_weighted += y.values()[j].norm_sqr() / (r * r) * w;
    }
    rec.total = rec.grad_u
        + rec.u_l2
        + rec.u_l4
        + rec.u_l6
        + rec.nu_l2
        + rec.d_inv_grad_nu
        + rec.d_inv_nu_weighted;
    Ok(rec)
}

/// Per-radius slope audit of the localized virial along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusSlopeReport {
    pub radius: f64,
    /// Centered-difference slopes on the trailing half, as `(t, slope)`.
    pub trailing_slopes: Vec<(f64, f64)>,
    pub min_slope: f64,
    pub max_slope: f64,
    /// Times at which the verdict-specific bound failed.
    pub violations: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub verdict: Verdict,
    /// `2 (lambda J(Q) - (E_Z + lambda^2 M))`, the grow-up decay rate scale.
    pub kappa_gap: f64,
    /// `(1 - 2/sqrt(6)) min_t K(u(t))`, the scattering slope scale.
    pub c_scatter: f64,
    pub per_radius: Vec<RadiusSlopeReport>,
    pub pass: bool,
}

/// Compare trailing-window `V_R` slopes against the verdict-specific bound:
/// grow-up demands slopes `<= -kappa_gap/2`, scattering demands
/// slopes `>= c_scatter/2`. Other verdicts are reported without assertions.
pub fn monotonicity_audit(
    traj: &Trajectory,
    gs: &GroundState,
    lambda: f64,
    verdict: Verdict,
) -> Result<MonotonicityReport> {
    if traj.samples.len() < 5 {
        return Err(crate::Error::TooFewSamples);
    }
    let virials: Vec<&VirialSample> = traj
        .samples
        .iter()
        .map(|s| {
            s.monitor
                .virial
                .as_ref()
                .ok_or(crate::Error::TooFewSamples)
        })
        .collect::<Result<_>>()?;
    let first = &traj.samples[0];
    let e_z = first.record.e_z;
    let m = first.record.mass;
    let kappa_gap = 2.0 * (lambda * gs.j - (e_z + lambda * lambda * m));
    let min_k = traj
        .samples
        .iter()
        .map(|s| s.record.k)
        .fold(f64::INFINITY, f64::min);
    let c_scatter = (1.0 - 2.0 / 6.0f64.sqrt()) * min_k;

    let radii: Vec<f64> = virials[0].v_r.iter().map(|&(r, _)| r).collect();
    let times = traj.times();
    let half = traj.samples.len() / 2;
    let mut per_radius = Vec::new();
    let mut pass = true;
    for (ri, &radius) in radii.iter().enumerate() {
        let series: Vec<f64> = virials.iter().map(|v| v.v_r[ri].1).collect();
        let mut trailing = Vec::new();
        let mut min_slope = f64::INFINITY;
        let mut max_slope = f64::NEG_INFINITY;
        let mut violations = Vec::new();
        for i in 1..series.len() - 1 {
            let slope = (series[i + 1] - series[i - 1]) / (times[i + 1] - times[i - 1]);
            min_slope = min_slope.min(slope);
            max_slope = max_slope.max(slope);
            if i < half {
                continue;
            }
            trailing.push((times[i], slope));
            let bad = match verdict {
                Verdict::GrowUp => slope > -kappa_gap / 2.0,
                Verdict::Scattering => slope < c_scatter / 2.0,
                _ => false,
            };
            if bad {
                violations.push(times[i]);
                pass = false;
            }
        }
        per_radius.push(RadiusSlopeReport {
            radius,
            trailing_slopes: trailing,
            min_slope,
            max_slope,
            violations,
        });
    }
    Ok(MonotonicityReport {
        verdict,
        kappa_gap,
        c_scatter,
        per_radius,
        pass,
    })
}
