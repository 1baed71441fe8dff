//! Besov norms, space-time norms and trajectory-level indicators.

use num_complex::Complex64;
use serde::Serialize;

use crate::evolution::{State, Trajectory};
use crate::field::{h1_norm, l2_norm_sq, lp_norm, RadialField};
use crate::lp::{lp_pieces, DyadicPartition};
use crate::{invalid, Error, Result};

/// Space-time norm parameters: time exponent `1/b`, space exponent `1/d`,
/// regularity `s`. `b = 0` reads as sup-in-time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormSpec {
    pub b: f64,
    pub d: f64,
    pub s: f64,
    pub homogeneous: bool,
}

/// Besov norm `( sum_j 2^(2 s j) ||P_j f||_p^2 )^(1/2)`.
///
/// The inhomogeneous variant collects every band at or below unit frequency
/// into a single block of weight one.
pub fn besov_norm(
    f: &RadialField,
    s: f64,
    p: f64,
    homogeneous: bool,
    partition: &DyadicPartition,
) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("need p >= 1, got {p}")));
    }
    let pieces = lp_pieces(f, partition)?;
    let mut sq = 0.0;
    let mut low_block: Option<RadialField> = None;
    for (j, piece) in pieces {
        if !homogeneous && j <= 0 {
            low_block = Some(match low_block {
                None => piece,
                Some(acc) => acc.add(&piece),
            });
            continue;
        }
        let np = lp_norm(&piece, p)?;
        sq += 4f64.powf(s * j as f64) * np * np;
    }
    if let Some(block) = low_block {
        let np = lp_norm(&block, p)?;
        sq += np * np;
    }
    Ok(sq.sqrt())
}

/// Weak interaction norms over a trajectory: `x` is the sup-in-time
/// inhomogeneous `B^(-1/2 - delta)_inf` norm of `u`; `y` bounds the
/// sum-space norm of `N` by measuring bands at or below unit frequency in
/// `B^(-3/2 + delta)_inf` and the rest in `B^(-3/2 - delta)_inf`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZNormRecord {
    pub x: f64,
    pub y: f64,
}

pub fn z_norm(traj: &Trajectory, delta: f64, partition: &DyadicPartition) -> Result<ZNormRecord> {
    if traj.samples.is_empty() {
        return Err(Error::TooFewSamples);
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid("delta", format!("need delta in (0, 1/2), got {delta}")));
    }
    let mut x: f64 = 0.0;
    let mut y: f64 = 0.0;
    for sample in &traj.samples {
        x = x.max(besov_norm(
            &sample.state.u,
            -0.5 - delta,
            f64::INFINITY,
            false,
            partition,
        )?);
        let mut low_sq = 0.0;
        let mut high_sq = 0.0;
        for (j, piece) in lp_pieces(&sample.state.n_field, partition)? {
            let np = lp_norm(&piece, f64::INFINITY)?;
            if j <= 0 {
                low_sq += 4f64.powf((-1.5 + delta) * j as f64) * np * np;
            } else {
                high_sq += 4f64.powf((-1.5 - delta) * j as f64) * np * np;
            }
        }
        y = y.max(low_sq.sqrt() + high_sq.sqrt());
    }
    Ok(ZNormRecord { x, y })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U,
    N,
}

/// Time-quadrature of a spatial Besov norm: `L^(1/b)_t B^s_(1/d, 2)`.
pub fn spacetime_norm(
    traj: &Trajectory,
    spec: &NormSpec,
    component: Component,
    partition: &DyadicPartition,
) -> Result<f64> {
    if traj.samples.is_empty() {
        return Err(Error::TooFewSamples);
    }
    if !(spec.b >= 0.0 && spec.b <= 1.0) {
        return Err(invalid("b", format!("need b in [0, 1], got {}", spec.b)));
    }
    if !(spec.d > 0.0 && spec.d <= 1.0) {
        return Err(invalid("d", format!("need d in (0, 1], got {}", spec.d)));
    }
    let p = 1.0 / spec.d;
    let spatial = |state: &State| -> Result<f64> {
        let f = match component {
            Component::U => &state.u,
            Component::N => &state.n_field,
        };
        besov_norm(f, spec.s, p, spec.homogeneous, partition)
    };
    if spec.b == 0.0 {
        let mut sup: f64 = 0.0;
        for s in &traj.samples {
            sup = sup.max(spatial(&s.state)?);
        }
        return Ok(sup);
    }
    let power = 1.0 / spec.b;
    let times = traj.times();
    let mut acc = 0.0;
    for i in 0..traj.samples.len() {
        let v = spatial(&traj.samples[i].state)?.powf(power);
        let w = if i == 0 {
            (times[1] - times[0]) / 2.0
        } else if i == traj.samples.len() - 1 {
            (times[i] - times[i - 1]) / 2.0
        } else {
            (times[i + 1] - times[i - 1]) / 2.0
        };
        acc += v * w;
    }
    Ok(acc.powf(spec.b))
}

/// `H^1 x L^2` norm of a state pair.
pub fn state_norm(state: &State) -> Result<f64> {
    let h1 = h1_norm(&state.u)?;
    Ok((h1 * h1 + l2_norm_sq(&state.n_field)).sqrt())
}

/// Free-propagator pullback `U(-t)(u, N)(t)`.
pub fn pullback(state: &State) -> Result<State> {
    let t = state.time;
    let u = state
        .u
        .spectral_multiplier(|k| Complex64::new(0.0, -k * k * t).exp())?;
    let n = state
        .n_field
        .spectral_multiplier(|k| Complex64::new(0.0, -state.alpha * k * t).exp())?;
    Ok(State::new(u, n, state.alpha, t))
}

fn regression_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in points {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Finite-horizon scattering probe: decaying potential norm, Cauchy
/// pullbacks, small trailing interaction norm.
#[derive(Debug, Clone, Serialize)]
pub struct ScatteringIndicator {
    /// Regression slope of `||u(t)||_4` over the trailing half.
    pub u_l4_trailing_slope: f64,
    /// `||U(-t_(i+1)) v(t_(i+1)) - U(-t_i) v(t_i)||` over the last samples.
    pub cauchy_increments: Vec<f64>,
    /// Trailing-window interaction norm of `u`.
    pub trailing_x_norm: f64,
    pub scattering_consistent: bool,
}

pub fn scattering_indicator(traj: &Trajectory) -> Result<ScatteringIndicator> {
    let m = traj.samples.len();
    if m < 8 {
        return Err(Error::TooFewSamples);
    }
    let half = m / 2;
    let trail: Vec<(f64, f64)> = traj.samples[half..]
        .iter()
        .map(|s| (s.state.time, s.record.u_l4))
        .collect();
    let slope = regression_slope(&trail);

    let k = 6.min(m - 1);
    let mut pullbacks = Vec::with_capacity(k);
    for s in &traj.samples[m - k..] {
        pullbacks.push(pullback(&s.state)?);
    }
    let mut increments = Vec::new();
    for w in pullbacks.windows(2) {
        let du = w[1].u.sub(&w[0].u);
        let dn = w[1].n_field.sub(&w[0].n_field);
        let h1 = h1_norm(&du)?;
        increments.push((h1 * h1 + l2_norm_sq(&dn)).sqrt());
    }
    let decreasing_cauchy = increments
        .last()
        .zip(increments.first())
        .map(|(l, f)| l <= f * (1.0 + 1e-9))
        .unwrap_or(false);

    // trailing-window x norm over the last half
    let part = DyadicPartition::default();
    let mut x: f64 = 0.0;
    for s in &traj.samples[half..] {
        x = x.max(besov_norm(&s.state.u, -0.6, f64::INFINITY, false, &part)?);
    }

    let consistent = slope < 0.0 && decreasing_cauchy;
    Ok(ScatteringIndicator {
        u_l4_trailing_slope: slope,
        cauchy_increments: increments,
        trailing_x_norm: x,
        scattering_consistent: consistent,
    })
}

/// Norm-growth probe for the grow-up regime.
#[derive(Debug, Clone, Serialize)]
pub struct GrowupIndicator {
    pub max_state_norm: f64,
    /// Regression slope of the `H^1 x L^2` norm over the trailing half.
    pub trailing_slope: f64,
    pub blowup_suspected: bool,
    pub growup_consistent: bool,
}

pub fn growup_indicator(traj: &Trajectory) -> Result<GrowupIndicator> {
    let m = traj.samples.len();
    if m < 8 {
        return Err(Error::TooFewSamples);
    }
    let mut norms = Vec::with_capacity(m);
    for s in &traj.samples {
        norms.push((s.state.time, state_norm(&s.state)?));
    }
    let max_norm = norms.iter().map(|p| p.1).fold(0.0, f64::max);
    let slope = regression_slope(&norms[m / 2..]);
    let blowup = traj.blowup_suspected_at.is_some();
    Ok(GrowupIndicator {
        max_state_norm: max_norm,
        trailing_slope: slope,
        blowup_suspected: blowup,
        growup_consistent: slope > 0.0 || blowup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{evolve, MonitorSet, State};
    use crate::lp::make_single_band_field;
    use crate::make_grid;
    use approx::assert_relative_eq;

    fn gaussian(grid: &std::sync::Arc<crate::RadialGrid>, a: f64, s: f64) -> RadialField {
        RadialField::from_real_fn(grid, move |r| a * (-r * r / (2.0 * s * s)).exp())
    }

    #[test]
    fn besov_single_band_and_l2_consistency() {
        let g = make_grid(256, 16.0).unwrap();
        let part = DyadicPartition::sharp();
        let atom = make_single_band_field(&g, 2, &part, Complex64::new(0.8, 0.1));
        for s in [-0.5, 0.0, 1.0] {
            let bn = besov_norm(&atom, s, 2.0, true, &part).unwrap();
            let expect = 4f64.powf(s * 2.0).sqrt() * lp_norm(&atom, 2.0).unwrap();
            assert_relative_eq!(bn, expect, max_relative = 1e-10);
        }
        // s = 0, p = 2 sits between the square-function constants
        let f = RadialField::from_fn(&g, |r| {
            Complex64::new((-r * r / 5.0).exp(), (0.4 * r).sin() * (-r / 2.0).exp())
        });
        let bn = besov_norm(&f, 0.0, 2.0, true, &part).unwrap();
        let l2 = l2_norm_sq(&f).sqrt();
        assert!(bn <= l2 * (1.0 + 1e-10) && bn >= l2 / 2f64.sqrt() * (1.0 - 1e-10));
    }

    #[test]
    fn norms_are_absolutely_homogeneous() {
        let g = make_grid(128, 12.0).unwrap();
        let part = DyadicPartition::default();
        let f = RadialField::from_fn(&g, |r| {
            Complex64::new((-r * r / 3.0).exp(), 0.2 * (-r).exp())
        });
        for c in [
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ] {
            let a = besov_norm(&f.scale(c), -0.5, f64::INFINITY, false, &part).unwrap();
            let b = besov_norm(&f, -0.5, f64::INFINITY, false, &part).unwrap() * c.norm();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn z_and_spacetime_norm_basics() {
        let g = make_grid(128, 16.0).unwrap();
        let part = DyadicPartition::default();
        let zero = State::new(RadialField::zeros(&g), RadialField::zeros(&g), 1.0, 0.0);
        let traj = evolve(&zero, 0.2, 1e-2, 5, &MonitorSet::none()).unwrap();
        let z = z_norm(&traj, 0.1, &part).unwrap();
        assert_eq!(z.x, 0.0);
        assert_eq!(z.y, 0.0);
        let spec = NormSpec {
            b: 0.5,
            d: 0.5,
            s: 0.0,
            homogeneous: true,
        };
        assert_eq!(
            spacetime_norm(&traj, &spec, Component::U, &part).unwrap(),
            0.0
        );

        // standing-modulus data: x constant in t; sup-norm spec matches L2
        let st = State::new(gaussian(&g, 0.7, 1.4), gaussian(&g, 0.5, 1.4), 1.0, 0.0);
        let traj = evolve(&st, 0.05, 1e-3, 10, &MonitorSet::none()).unwrap();
        let sup_spec = NormSpec {
            b: 0.0,
            d: 0.5,
            s: 0.0,
            homogeneous: true,
        };
        let v = spacetime_norm(&traj, &sup_spec, Component::U, &part).unwrap();
        let l2 = l2_norm_sq(&traj.samples[0].state.u).sqrt();
        assert!(v <= l2 * (1.0 + 1e-9) && v >= l2 / 2f64.sqrt());

        // time-restriction monotonicity for b > 0
        let spec = NormSpec {
            b: 0.5,
            d: 0.5,
            s: 0.0,
            homogeneous: true,
        };
        let long = evolve(&st, 0.1, 1e-3, 10, &MonitorSet::none()).unwrap();
        let v_short = spacetime_norm(&traj, &spec, Component::U, &part).unwrap();
        let v_long = spacetime_norm(&long, &spec, Component::U, &part).unwrap();
        assert!(v_long >= v_short * (1.0 - 1e-12));
    }

    #[test]
    fn free_solution_has_exact_cauchy_zero() {
        let g = make_grid(256, 24.0).unwrap();
        let free = State::new(RadialField::zeros(&g), gaussian(&g, 0.8, 1.5), 1.0, 0.0);
        let traj = evolve(&free, 1.0, 1e-2, 10, &MonitorSet::none()).unwrap();
        let ind = scattering_indicator(&traj).unwrap();
        for inc in &ind.cauchy_increments {
            assert!(*inc < 1e-11, "increment {inc}");
        }
        let g_ind = growup_indicator(&traj).unwrap();
        assert!(!g_ind.growup_consistent);
        assert!(g_ind.trailing_slope.abs() < 1e-9);
    }

    #[test]
    fn indicators_are_deterministic() {
        let g = make_grid(128, 16.0).unwrap();
        let st = State::new(gaussian(&g, 0.6, 1.2), gaussian(&g, 0.3, 1.7), 1.0, 0.0);
        let traj = evolve(&st, 0.3, 1e-3, 20, &MonitorSet::none()).unwrap();
        let a = scattering_indicator(&traj).unwrap();
        let b = scattering_indicator(&traj).unwrap();
        assert_eq!(a.u_l4_trailing_slope.to_bits(), b.u_l4_trailing_slope.to_bits());
        for (x, y) in a.cauchy_increments.iter().zip(&b.cauchy_increments) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
