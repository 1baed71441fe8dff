//! Threshold classification and the variational inequalities backing the
//! virial sign analysis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

use crate::evolution::{State, Trajectory};
use crate::field::{grad_l2_norm_sq, l2_norm_sq, lp_norm, RadialField};
use crate::functionals::{k_functional, mass, nls_energy, zakharov_energy};
use crate::grid::RadialGrid;
use crate::ground_state::GroundState;
use crate::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Scattering,
    GrowUp,
    ZeroSolution,
    NotBelowThreshold,
}

/// Outcome of the threshold test on initial data.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Classification {
    /// `E_Z(u0, N0) M(u0)`.
    pub product: f64,
    /// `E_S(Q) M(Q)`.
    pub threshold: f64,
    pub k0: f64,
    pub tol_k: f64,
    /// A scale at which the action gap opens, when one exists.
    pub lambda_star: Option<f64>,
    pub verdict: Verdict,
}

/// Classify initial data against the sharp threshold.
///
/// Below the threshold the sign of `K(u0)` separates scattering from
/// grow-up; `|K| <= tol_k` is read as the forced-zero case. `tol_k <= 0`
/// selects the default `1e-8 (1 + ||grad u0||^2)`.
pub fn classify(state: &State, gs: &GroundState, tol_k: f64) -> Result<Classification> {
    let e_z = zakharov_energy(state)?;
    let m = mass(&state.u);
    let product = e_z * m;
    let g2 = grad_l2_norm_sq(&state.u)?;
    let k0 = g2 - 0.75 * lp_norm(&state.u, 4.0)?.powi(4);
    let tol_k = if tol_k > 0.0 {
        tol_k
    } else {
        1e-8 * (1.0 + g2)
    };
    let lambda_star = if m > 0.0 {
        admissible_lambda(e_z, m, gs.j)?
    } else {
        None
    };
    let verdict = if product >= gs.threshold {
        Verdict::NotBelowThreshold
    } else if k0 > tol_k {
        Verdict::Scattering
    } else if k0 < -tol_k {
        Verdict::GrowUp
    } else {
        Verdict::ZeroSolution
    };
    Ok(Classification {
        product,
        threshold: gs.threshold,
        k0,
        tol_k,
        lambda_star,
        verdict,
    })
}

/// A scale `lambda` with `E_Z + lambda^2 M < lambda J(Q)`, when the
/// quadratic admits one; the vertex `j_q / 2m` maximizes the gap.
pub fn admissible_lambda(e_z: f64, m: f64, j_q: f64) -> Result<Option<f64>> {
    if !(m > 0.0) {
        return Err(invalid("m", format!("need positive mass, got {m}")));
    }
    if j_q * j_q > 4.0 * m * e_z {
        Ok(Some(j_q / (2.0 * m)))
    } else {
        Ok(None)
    }
}

/// The unique `mu` with `||grad u||^2 = (3 mu / 4) ||u||_4^4`; the L^2
/// scaling `S_mu u = mu^{3/2} u(mu x)` then has `K(S_mu u) = 0`.
pub fn mu_root(u: &RadialField) -> Result<f64> {
    let g2 = grad_l2_norm_sq(u)?;
    let u4 = lp_norm(u, 4.0)?.powi(4);
    if u4 == 0.0 {
        return Err(invalid("u", "mu undefined for the zero field"));
    }
    Ok(4.0 * g2 / (3.0 * u4))
}

/// Boundary value `b(mu) = 3 sqrt(2/(mu+2)) + (mu-1) sqrt((mu+2)/2)`,
/// increasing, with `b(0) = 2` and `b(1) = sqrt(6)`.
pub fn b_function(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(invalid("mu", format!("need mu >= 0, got {mu}")));
    }
    Ok(3.0 * (2.0 / (mu + 2.0)).sqrt() + (mu - 1.0) * ((mu + 2.0) / 2.0).sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarginRecord {
    pub hypothesis_ok: bool,
    pub k: f64,
    pub margin: f64,
}

/// Margin of the two-sided inequality under the action constraint
/// `E_S + lambda^2 M + nu^2/4 <= lambda J(Q)`:
/// `K >= 0` implies `4K + nu^2 >= sqrt(6) nu ||u||_4^2` and
/// `K <= 0` implies `4K + nu^2 <= -2 nu ||u||_4^2`.
pub fn lemma_margin(u: &RadialField, lambda: f64, nu: f64, gs: &GroundState) -> Result<MarginRecord> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    if !(nu >= 0.0) {
        return Err(invalid("nu", format!("need nu >= 0, got {nu}")));
    }
    let e_s = nls_energy(u)?;
    let m = mass(u);
    let hypothesis_ok = e_s + lambda * lambda * m + 0.25 * nu * nu <= lambda * gs.j + 1e-12;
    let k = k_functional(u)?;
    let u4sq = lp_norm(u, 4.0)?.powi(2);
    let lhs = 4.0 * k + nu * nu;
    let margin = if k >= 0.0 {
        lhs - 6.0f64.sqrt() * nu * u4sq
    } else {
        -2.0 * nu * u4sq - lhs
    };
    Ok(MarginRecord {
        hypothesis_ok,
        k,
        margin,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginAuditReport {
    pub samples: usize,
    pub admissible: usize,
    pub positive_k: usize,
    pub negative_k: usize,
    pub min_margin: f64,
    pub violations: usize,
    /// Margins at the threshold state itself should vanish.
    pub boundary_margin: f64,
}

/// Randomized falsification attempt on the two-sided inequality.
///
/// Draws Gaussian-type radial profiles, rescales their amplitude to sit
/// inside the action constraint at a random depth, draws `nu` up to the
/// allowed bound, and records the minimal margin. `slack` is the tolerance
/// below zero counted as a violation.
pub fn margin_audit(
    gs: &GroundState,
    grid: &Arc<RadialGrid>,
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<MarginAuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MarginAuditReport {
        samples,
        admissible: 0,
        positive_k: 0,
        negative_k: 0,
        min_margin: f64::INFINITY,
        violations: 0,
        boundary_margin: lemma_margin(&gs.profile, 1.0, 0.0, gs)?.margin,
    };
    for _ in 0..samples {
        let sigma = 0.5 + 2.5 * rng.gen::<f64>();
        let poly = rng.gen_range(0u32..3);
        let base = RadialField::from_real_fn(grid, move |r| {
            r.powi(poly as i32) * (-r * r / (2.0 * sigma * sigma)).exp()
        });
        let lambda = (0.3f64.ln() + rng.gen::<f64>() * (3.0f64.ln() - 0.3f64.ln())).exp();
        // place E_S + lambda^2 M at a random fraction of the peak of the
        // amplitude quartic, capped by the action bound
        let g2 = grad_l2_norm_sq(&base)?;
        let m2 = l2_norm_sq(&base);
        let p4 = lp_norm(&base, 4.0)?.powi(4);
        let a = 0.5 * (g2 + lambda * lambda * m2);
        let peak = a * a / p4;
        let bound = lambda * gs.j;
        let target = rng.gen::<f64>() * 0.999 * peak.min(bound);
        // first branch of c^2 a - c^4 p4 / 4 = target
        let disc = (a * a - p4 * target).max(0.0).sqrt();
        let c_sq = (a - disc) * 2.0 / p4;
        let c = c_sq.max(0.0).sqrt();
        // occasionally jump to the far branch to reach K < 0 data
        let c = if rng.gen::<f64>() < 0.35 {
            let far = ((a + disc) * 2.0 / p4).sqrt();
            far
        } else {
            c
        };
        let u = base.scale(num_complex::Complex64::new(c, 0.0));
        let e_s = nls_energy(&u)?;
        let mu = mass(&u);
        let room = lambda * gs.j - (e_s + lambda * lambda * mu);
        if room < 0.0 {
            continue;
        }
        let nu = (4.0 * room).sqrt() * rng.gen::<f64>();
        let rec = lemma_margin(&u, lambda, nu, gs)?;
        if !rec.hypothesis_ok {
            continue;
        }
        report.admissible += 1;
        if rec.k >= 0.0 {
            report.positive_k += 1;
        } else {
            report.negative_k += 1;
        }
        report.min_margin = report.min_margin.min(rec.margin);
        if rec.margin < -slack {
            report.violations += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SignPersistenceReport {
    pub min_k: f64,
    pub max_k: f64,
    pub tol: f64,
    pub sign_flip: bool,
    pub first_flip_time: Option<f64>,
}

/// Check that `K(u(t))` keeps its initial sign along a below-threshold run.
pub fn sign_persistence_audit(traj: &Trajectory) -> Result<SignPersistenceReport> {
    if traj.samples.is_empty() {
        return Err(crate::Error::TooFewSamples);
    }
    let ks: Vec<f64> = traj.samples.iter().map(|s| s.record.k).collect();
    let grad0 = traj.samples[0].record.grad_u_l2.powi(2);
    let tol = 1e-8 * (1.0 + grad0);
    let min_k = ks.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_k = ks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sign_flip = min_k < -tol && max_k > tol;
    let first_flip_time = if sign_flip {
        let initial_positive = ks[0] >= 0.0;
        traj.samples
            .iter()
            .find(|s| {
                if initial_positive {
                    s.record.k < -tol
                } else {
                    s.record.k > tol
                }
            })
            .map(|s| s.state.time)
    } else {
        None
    };
    Ok(SignPersistenceReport {
        min_k,
        max_k,
        tol,
        sign_flip,
        first_flip_time,
    })
}
