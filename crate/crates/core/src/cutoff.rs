//! Smooth radial cutoffs built from the standard C-infinity partition bump.

/// `exp(-1/x)` continued by zero through the origin.
fn decay(x: f64) -> f64 {
    if x <= 1e-12 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, strictly increasing between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = decay(x);
    let b = decay(1.0 - x);
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 1e-9 || x >= 1.0 - 1e-9 {
        return 0.0;
    }
    let f = decay(x);
    let g = decay(1.0 - x);
    let fp = f / (x * x);
    let gp = g / ((1.0 - x) * (1.0 - x));
    // d/dx f/(f+g); note d/dx g(1-x) = -gp
    (fp * g + f * gp) / ((f + g) * (f + g))
}

/// Radial cutoff `psi_R(r) = psi(r/R)` with `psi = 1` on `r <= 1`, `0` on
/// `r >= 2`, nonincreasing in between.
#[derive(Debug, Clone, Copy)]
pub struct CutoffProfile {
    radius: f64,
}

impl CutoffProfile {
    pub fn new(radius: f64) -> crate::Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(crate::invalid("R", format!("need R > 0, got {radius}")));
        }
        Ok(CutoffProfile { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Outer edge of the transition region, `2R`.
    pub fn outer_radius(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn eval(&self, r: f64) -> f64 {
        smooth_step(2.0 - r / self.radius)
    }

    /// `d/dr psi_R`, nonpositive everywhere.
    pub fn eval_derivative(&self, r: f64) -> f64 {
        -smooth_step_derivative(2.0 - r / self.radius) / self.radius
    }
}
