//! The positive radial ground state of `-lap Q + Q = Q^3` and its scaling
//! family, solved two independent ways.
//!
//! The primary solver shoots the radial ODE `Q'' + (2/r) Q' - Q + Q^3 = 0`
//! from a series start at the origin and bisects the central value between
//! shots that cross zero and shots that turn back up toward the `Q = 1`
//! equilibrium. A spectral renormalization fixed point on the sine grid
//! serves as the independent cross-check.

use num_complex::Complex64;
use serde::Serialize;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::evolution::State;
use crate::field::{l2_norm_sq, lp_norm, RadialField};
use crate::functionals::{k_functional, mass, nls_energy};
use crate::grid::RadialGrid;
use crate::{invalid, Error, Result};

// ---------------------------------------------------------------------------
// adaptive Dormand-Prince 5(4) for the shooting ODE
// ---------------------------------------------------------------------------

/// State vector: (Q, Q', int Q^2 r^2, int Q'^2 r^2, int Q^4 r^2).
type Y = [f64; 5];

fn ode_rhs(r: f64, y: &Y) -> Y {
    let (q, p) = (y[0], y[1]);
    let qpp = if r < 1e-10 {
        (q - q * q * q) / 3.0
    } else {
        q - q * q * q - 2.0 * p / r
    };
    [p, qpp, q * q * r * r, p * p * r * r, q.powi(4) * r * r]
}

struct DpResult {
    points: Vec<(f64, f64, f64)>, // (r, Q, Q')
    integrals: [f64; 3],          // accumulated quadrature components
    outcome: ShotOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ShotOutcome {
    CrossedZero,
    TurnedBack,
    ReachedEnd,
}

fn dp45_shoot(a: f64, r_end: f64, store: bool) -> DpResult {
    // Dormand-Prince coefficients
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let rtol = 1e-13;
    let atol = 1e-15;
    let max_step = 0.02;

    let r0 = 1e-8;
    let c2 = (a - a * a * a) / 6.0;
    let mut r = r0;
    let mut y: Y = [a + c2 * r0 * r0, 2.0 * c2 * r0, 0.0, 0.0, 0.0];
    let mut h = 1e-6;
    let mut points = Vec::new();
    if store {
        points.push((0.0, a, 0.0));
        points.push((r, y[0], y[1]));
    }
    let mut outcome = ShotOutcome::ReachedEnd;
    let mut k1 = ode_rhs(r, &y);
    'outer: while r < r_end {
        h = h.min(max_step).min(r_end - r);
        // stages
        let mut k = [[0.0; 5]; 7];
        k[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for (j, yj) in ys.iter_mut().enumerate() {
                for (si, ksi) in k.iter().enumerate().take(s + 1) {
                    *yj += h * A[s][si] * ksi[j];
                }
            }
            k[s + 1] = ode_rhs(r + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for j in 0..5 {
            for (si, ksi) in k.iter().enumerate() {
                y5[j] += h * B5[si] * ksi[j];
                y4[j] += h * B4[si] * ksi[j];
            }
        }
        // error control on (Q, Q') only
        let mut err: f64 = 0.0;
        for j in 0..2 {
            let sc = atol + rtol * y[j].abs().max(y5[j].abs());
            err = err.max(((y5[j] - y4[j]) / sc).abs());
        }
        if err <= 1.0 {
            r += h;
            y = y5;
            k1 = k[6]; // FSAL
            if store {
                points.push((r, y[0], y[1]));
            }
            if y[0] <= 0.0 {
                outcome = ShotOutcome::CrossedZero;
                break 'outer;
            }
            if y[1] >= 0.0 && y[0] < 1.05 {
                outcome = ShotOutcome::TurnedBack;
                break 'outer;
            }
        }
        let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        h *= fac;
        if h < 1e-14 {
            break;
        }
    }
    DpResult {
        points,
        integrals: [y[2], y[3], y[4]],
        outcome,
    }
}

// ---------------------------------------------------------------------------
// monotone cubic profile interpolation
// ---------------------------------------------------------------------------

/// Piecewise cubic Hermite interpolant of the decreasing profile, with
/// Fritsch-Carlson slope limiting and an `exp(-r)/r` continuation past the
/// last stored point.
#[derive(Debug, Clone)]
pub struct ProfileInterpolant {
    rs: Vec<f64>,
    qs: Vec<f64>,
    ds: Vec<f64>,
    tail_coeff: f64,
    tail_start: f64,
}

impl ProfileInterpolant {
    fn from_points(points: &[(f64, f64, f64)]) -> ProfileInterpolant {
        let rs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let qs: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut ds: Vec<f64> = points.iter().map(|p| p.2).collect();
        // Fritsch-Carlson limiter on monotone data
        for i in 0..rs.len() - 1 {
            let h = rs[i + 1] - rs[i];
            if h <= 0.0 {
                continue;
            }
            let delta = (qs[i + 1] - qs[i]) / h;
            if delta == 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
                continue;
            }
            let a = ds[i] / delta;
            let b = ds[i + 1] / delta;
            let bound = 9.0;
            if a * a + b * b > bound {
                let t = (bound / (a * a + b * b)).sqrt();
                ds[i] = t * a * delta;
                ds[i + 1] = t * b * delta;
            }
        }
        let last = points.len() - 1;
        let (rl, ql) = (rs[last], qs[last].max(1e-300));
        ProfileInterpolant {
            rs,
            qs,
            ds,
            tail_coeff: ql * rl * rl.exp(),
            tail_start: rl,
        }
    }

    /// Interpolant straight through grid samples, slopes from differences.
    fn from_samples(q0: f64, nodes: &[f64], values: &[f64]) -> ProfileInterpolant {
        let mut pts = Vec::with_capacity(values.len() + 1);
        pts.push((0.0, q0, 0.0));
        for (&r, &q) in nodes.iter().zip(values) {
            pts.push((r, q, 0.0));
        }
        // three-point slope estimates
        let m = pts.len();
        let mut with_slopes = Vec::with_capacity(m);
        for i in 0..m {
            let d = if i == 0 {
                0.0
            } else if i == m - 1 {
                (pts[i].1 - pts[i - 1].1) / (pts[i].0 - pts[i - 1].0)
            } else {
                let h0 = pts[i].0 - pts[i - 1].0;
                let h1 = pts[i + 1].0 - pts[i].0;
                let d0 = (pts[i].1 - pts[i - 1].1) / h0;
                let d1 = (pts[i + 1].1 - pts[i].1) / h1;
                (h1 * d0 + h0 * d1) / (h0 + h1)
            };
            with_slopes.push((pts[i].0, pts[i].1, d));
        }
        ProfileInterpolant::from_points(&with_slopes)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.tail_start {
            return self.tail_coeff * (-r).exp() / r;
        }
        let i = match self
            .rs
            .binary_search_by(|x| x.partial_cmp(&r).expect("finite radius"))
        {
            Ok(i) => return self.qs[i],
            Err(i) => i.saturating_sub(1),
        };
        let i = i.min(self.rs.len() - 2);
        let h = self.rs[i + 1] - self.rs[i];
        let t = (r - self.rs[i]) / h;
        let (q0, q1, d0, d1) = (self.qs[i], self.qs[i + 1], self.ds[i], self.ds[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        q0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + q1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2)
    }
}

// ---------------------------------------------------------------------------
// the solved ground state
// ---------------------------------------------------------------------------

/// Solved profile with its derived constants.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub profile: RadialField,
    pub q0: f64,
    pub mass: f64,
    pub e_s: f64,
    /// `J(Q) = E_S(Q) + M(Q)`.
    pub j: f64,
    /// Sharp constant `E_S(Q) M(Q)`.
    pub threshold: f64,
    interpolant: ProfileInterpolant,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdConstants {
    pub e_s_q: f64,
    pub m_q: f64,
    pub j_q: f64,
    pub product: f64,
}

/// Shooting solver on the given grid.
///
/// `tol` bounds the bisection width on the central value; the derived
/// constants are then limited by quadrature, not by `tol`.
pub fn solve_ground_state(grid: &Arc<RadialGrid>, tol: f64) -> Result<GroundState> {
    if grid.r_max() < 15.0 {
        return Err(invalid(
            "r_max",
            format!("profile tail needs r_max >= 15, got {}", grid.r_max()),
        ));
    }
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(invalid("tol", format!("need tol in (0, 1e-4], got {tol}")));
    }
    let r_end = grid.r_max().max(25.0);
    let mut lo = 3.0;
    let mut hi = 5.0;
    match dp45_shoot(lo, r_end, false).outcome {
        ShotOutcome::CrossedZero => {
            return Err(Error::SolveFailure(
                "lower bracket already crosses zero".into(),
            ))
        }
        _ => {}
    }
    if dp45_shoot(hi, r_end, false).outcome != ShotOutcome::CrossedZero {
        return Err(Error::SolveFailure("upper bracket does not cross".into()));
    }
    let mut iterations = 0;
    while hi - lo > tol.min(1e-13) * lo {
        let mid = 0.5 * (lo + hi);
        match dp45_shoot(mid, r_end, false).outcome {
            ShotOutcome::CrossedZero => hi = mid,
            _ => lo = mid,
        }
        iterations += 1;
        if iterations > 200 {
            return Err(Error::SolveFailure("bisection failed to converge".into()));
        }
    }
    let q0 = 0.5 * (lo + hi);

    // final pass along the converged shot; stop where the profile drops to
    // the tail-matching level and use the analytic decay beyond
    let shot = dp45_shoot(q0, r_end, true);
    let mut pts = Vec::with_capacity(shot.points.len());
    for &(r, q, d) in &shot.points {
        if q < 1e-9 && r > 5.0 {
            break;
        }
        if d > 0.0 && r > 1.0 {
            break;
        }
        pts.push((r, q, d));
    }
    if pts.len() < 50 {
        return Err(Error::SolveFailure("profile integration too short".into()));
    }
    let interp = ProfileInterpolant::from_points(&pts);

    let values: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&r| Complex64::new(interp.eval(r), 0.0))
        .collect();
    let profile = RadialField::from_values(grid, values);

    let gs = finish_ground_state(profile, q0, interp)?;
    Ok(gs)
}

fn finish_ground_state(
    profile: RadialField,
    q0: f64,
    interpolant: ProfileInterpolant,
) -> Result<GroundState> {
    let mass_q = mass(&profile);
    let e_s = nls_energy(&profile)?;
    let j = e_s + mass_q;
    let threshold = e_s * mass_q;
    let gs = GroundState {
        profile,
        q0,
        mass: mass_q,
        e_s,
        j,
        threshold,
        interpolant,
    };
    gs.check_invariants()?;
    Ok(gs)
}

impl GroundState {
    fn check_invariants(&self) -> Result<()> {
        let vals = self.profile.values();
        let mut prev = f64::INFINITY;
        for v in vals {
            if !(v.re > 0.0) || v.im != 0.0 {
                return Err(Error::SolveFailure("profile not positive".into()));
            }
            if v.re >= prev {
                return Err(Error::SolveFailure("profile not decreasing".into()));
            }
            prev = v.re;
        }
        let k = k_functional(&self.profile)?;
        let g2 = crate::field::grad_l2_norm_sq(&self.profile)?;
        if k.abs() > 1e-6 * g2 {
            return Err(Error::SolveFailure(format!("K(Q) = {k} too large vs {g2}")));
        }
        if (self.e_s - self.mass).abs() > 1e-6 * self.mass {
            return Err(Error::SolveFailure(format!(
                "E_S(Q) = {} vs M(Q) = {}",
                self.e_s, self.mass
            )));
        }
        let j_check = self.j * self.j / 4.0;
        if (j_check - self.threshold).abs() > 1e-8 * self.threshold {
            return Err(Error::SolveFailure("action identity violated".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.profile.grid()
    }

    /// Profile value at arbitrary radius (interpolated, tail-continued).
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            self.q0
        } else {
            self.interpolant.eval(r)
        }
    }

    pub fn constants(&self) -> ThresholdConstants {
        ThresholdConstants {
            e_s_q: self.e_s,
            m_q: self.mass,
            j_q: self.j,
            product: self.threshold,
        }
    }

    /// Plain-text cache with a versioned header.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = BufWriter::new(f);
        writeln!(w, "{} v1", CACHE_MAGIC)?;
        writeln!(w, "n {}", self.grid().n())?;
        writeln!(w, "r_max {}", self.grid().r_max())?;
        writeln!(w, "q0 {:.17e}", self.q0)?;
        writeln!(w, "values")?;
        for v in self.profile.values() {
            writeln!(w, "{:.17e}", v.re)?;
        }
        Ok(())
    }

    /// Load a cached solve for this exact grid.
    pub fn load_cache(grid: &Arc<RadialGrid>, path: &Path) -> Result<GroundState> {
        let f = std::fs::File::open(path)?;
        let mut lines = std::io::BufReader::new(f).lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::BadCache("truncated".into()))?
                .map_err(Error::Io)
        };
        let header = next()?;
        if header != format!("{} v1", CACHE_MAGIC) {
            return Err(Error::BadCache(format!("unknown header `{header}`")));
        }
        let parse = |line: String, key: &str| -> Result<f64> {
            let rest = line
                .strip_prefix(key)
                .ok_or_else(|| Error::BadCache(format!("expected `{key}`")))?;
            rest.trim()
                .parse()
                .map_err(|e| Error::BadCache(format!("bad `{key}`: {e}")))
        };
        let n = parse(next()?, "n")? as usize;
        let r_max = parse(next()?, "r_max")?;
        if n != grid.n() || (r_max - grid.r_max()).abs() > 1e-12 {
            return Err(Error::BadCache(format!(
                "cache is for n={n}, r_max={r_max}, not this grid"
            )));
        }
        let q0 = parse(next()?, "q0")?;
        if next()? != "values" {
            return Err(Error::BadCache("missing values block".into()));
        }
        let mut vals = Vec::with_capacity(n);
        for _ in 0..n {
            let v: f64 = next()?
                .trim()
                .parse()
                .map_err(|e| Error::BadCache(format!("bad value: {e}")))?;
            vals.push(v);
        }
        let interp = ProfileInterpolant::from_samples(q0, grid.nodes(), &vals);
        let profile = RadialField::from_values(
            grid,
            vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        );
        finish_ground_state(profile, q0, interp)
    }
}

const CACHE_MAGIC: &str = "zakharov-ground-state";

/// Scaled profile `Q_lambda(r) = lambda Q(lambda r)` on the ground state's
/// own grid.
pub fn scale_ground_state(gs: &GroundState, lambda: f64) -> Result<RadialField> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    let grid = gs.grid();
    let values = grid
        .nodes()
        .iter()
        .map(|&r| Complex64::new(lambda * gs.eval(lambda * r), 0.0))
        .collect();
    Ok(RadialField::from_values(grid, values))
}

/// Standing wave `(e^{i theta} Q_lambda, Q_lambda^2)` at `t = 0`.
pub fn standing_wave_state(
    gs: &GroundState,
    lambda: f64,
    theta: f64,
    alpha: f64,
) -> Result<State> {
    let q_lambda = scale_ground_state(gs, lambda)?;
    let u = q_lambda.scale(Complex64::new(0.0, theta).exp());
    let n = q_lambda.modulus_squared();
    Ok(State::new(u, n, alpha, 0.0))
}

/// Export the threshold constants.
pub fn threshold_constants(gs: &GroundState) -> ThresholdConstants {
    gs.constants()
}

// ---------------------------------------------------------------------------
// spectral renormalization (fixed-point) oracle
// ---------------------------------------------------------------------------

/// Fixed-point solve of `Q = (1 - lap)^{-1} Q^3` with power renormalization,
/// independent of the shooting path.
pub fn petviashvili(grid: &Arc<RadialGrid>, tol: f64, max_iter: usize) -> Result<RadialField> {
    let mut q = RadialField::from_real_fn(grid, |r| 4.0 * (-r * r / 2.0).exp());
    for _ in 0..max_iter {
        let cubed = RadialField::from_values(
            grid,
            q.values().iter().map(|v| v * v * v).collect(),
        );
        let lq = q.spectral_multiplier(|k| Complex64::new(1.0 + k * k, 0.0))?;
        let num = crate::field::inner(&q, &lq)?;
        let den = crate::field::inner(&q, &cubed)?;
        if den <= 0.0 {
            return Err(Error::SolveFailure("renormalization collapsed".into()));
        }
        let gamma = (num / den).powf(1.5);
        let next = cubed
            .scale(Complex64::new(gamma, 0.0))
            .spectral_multiplier(|k| Complex64::new(1.0 / (1.0 + k * k), 0.0))?;
        let diff = l2_norm_sq(&next.sub(&q)).sqrt() / l2_norm_sq(&q).sqrt();
        q = next;
        if diff < tol {
            return Ok(q);
        }
    }
    Err(Error::SolveFailure(
        "fixed-point iteration did not converge".into(),
    ))
}

/// Central value and mass of a fixed-point profile, for cross-checks.
pub fn profile_summary(q: &RadialField) -> Result<(f64, f64)> {
    let q0 = q.value_at_origin()?.re;
    Ok((q0, mass(q)))
}
