//! Conserved and variational functionals of the flow.

use serde::Serialize;

use crate::evolution::State;
use crate::field::{grad_l2_norm_sq, inner, l2_norm_sq, lp_norm, RadialField};
use crate::{invalid, Result};

/// Conserved mass `M(u) = ||u||_2^2 / 2`.
pub fn mass(u: &RadialField) -> f64 {
    0.5 * l2_norm_sq(u)
}

/// Cubic NLS Hamiltonian `E_S(u) = ||grad u||_2^2/2 - ||u||_4^4/4`.
pub fn nls_energy(u: &RadialField) -> Result<f64> {
    let g2 = grad_l2_norm_sq(u)?;
    let u4 = lp_norm(u, 4.0)?.powi(4);
    Ok(0.5 * g2 - 0.25 * u4)
}

/// Scaling derivative of the action: `K(u) = ||grad u||_2^2 - (3/4)||u||_4^4`.
pub fn k_functional(u: &RadialField) -> Result<f64> {
    let g2 = grad_l2_norm_sq(u)?;
    let u4 = lp_norm(u, 4.0)?.powi(4);
    Ok(g2 - 0.75 * u4)
}

/// Action `J_lambda(u) = E_S(u) + lambda^2 M(u)`.
pub fn action(u: &RadialField, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    Ok(nls_energy(u)? + lambda * lambda * mass(u))
}

/// `G_lambda(u) = J_lambda(u) - K(u)/3 = ||grad u||_2^2/6 + (lambda^2/2)||u||_2^2`.
pub fn g_functional(u: &RadialField, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("need lambda > 0, got {lambda}")));
    }
    let g2 = grad_l2_norm_sq(u)?;
    Ok(g2 / 6.0 + 0.5 * lambda * lambda * l2_norm_sq(u))
}

/// Complex and real deviations of the wave component from the slaving
/// manifold: `nu_c = N - |u|^2` and `nu_r = Re N - |u|^2`.
pub fn deviation(state: &State) -> (RadialField, RadialField) {
    let u2 = state.u.modulus_squared();
    let nu_c = state.n_field.sub(&u2);
    let nu_r = state.n_field.real_part().sub(&u2);
    (nu_c, nu_r)
}

/// Hamiltonian of the first-order flow, by the direct formula
/// `||grad u||^2/2 + ||N||^2/4 - <Re N, |u|^2>/2`.
///
/// The decomposition `E_S(u) + ||N - |u|^2||^2/4` is evaluated as well and
/// the two must agree; a disagreement indicates a quadrature bug and is
/// reported as an error.
pub fn zakharov_energy(state: &State) -> Result<f64> {
    let direct = zakharov_energy_direct(state)?;
    let (nu_c, _) = deviation(state);
    let split = nls_energy(&state.u)? + 0.25 * l2_norm_sq(&nu_c);
    if (direct - split).abs() > 1e-10 * (1.0 + direct.abs()) {
        return Err(crate::Error::SolveFailure(format!(
            "energy forms disagree: direct {direct} vs split {split}"
        )));
    }
    Ok(direct)
}

/// The direct form alone, without the consistency assertion.
pub fn zakharov_energy_direct(state: &State) -> Result<f64> {
    let g2 = grad_l2_norm_sq(&state.u)?;
    let n2 = l2_norm_sq(&state.n_field);
    let coupling = inner(&state.n_field.real_part(), &state.u.modulus_squared())?;
    Ok(0.5 * g2 + 0.25 * n2 - 0.5 * coupling)
}

/// Per-sample functional record attached to trajectories.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalRecord {
    pub mass: f64,
    pub e_s: f64,
    pub e_z: f64,
    pub k: f64,
    /// `||N - |u|^2||_2` with complex `N`.
    pub nu_l2: f64,
    pub grad_u_l2: f64,
    pub u_l4: f64,
    pub im_n_l2: f64,
}

impl FunctionalRecord {
    pub fn compute(state: &State) -> Result<FunctionalRecord> {
        let g2 = grad_l2_norm_sq(&state.u)?;
        let u4 = lp_norm(&state.u, 4.0)?;
        let (nu_c, _) = deviation(state);
        let nu_l2 = l2_norm_sq(&nu_c).sqrt();
        let e_s = 0.5 * g2 - 0.25 * u4.powi(4);
        Ok(FunctionalRecord {
            mass: mass(&state.u),
            e_s,
            e_z: zakharov_energy(state)?,
            k: g2 - 0.75 * u4.powi(4),
            nu_l2,
            grad_u_l2: g2.sqrt(),
            u_l4: u4,
            im_n_l2: l2_norm_sq(&state.n_field.imag_part()).sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::State;
    use crate::field::l2_norm;
    use crate::make_grid;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn gaussian(grid: &Arc<crate::RadialGrid>, a: f64, s: f64) -> RadialField {
        RadialField::from_real_fn(grid, move |r| a * (-r * r / (2.0 * s * s)).exp())
    }

    #[test]
    fn mass_of_zero_and_positivity() {
        let g = make_grid(64, 10.0).unwrap();
        assert_eq!(mass(&RadialField::zeros(&g)), 0.0);
        assert!(mass(&gaussian(&g, 1.0, 1.0)) > 0.0);
    }

    #[test]
    fn mass_scaling_law() {
        // u_lambda(r) = lambda u(lambda r) on the grid scaled by 1/lambda
        let lambda = 2.0;
        let g1 = make_grid(256, 24.0).unwrap();
        let g2 = make_grid(256, 24.0 / lambda).unwrap();
        let u1 = gaussian(&g1, 1.3, 2.0);
        let u2 = RadialField::from_real_fn(&g2, |r| {
            lambda * 1.3 * (-(lambda * r).powi(2) / 8.0).exp()
        });
        assert_relative_eq!(mass(&u2), mass(&u1) / lambda, max_relative = 1e-12);
        // E_S and K scale by lambda
        assert_relative_eq!(
            nls_energy(&u2).unwrap(),
            lambda * nls_energy(&u1).unwrap(),
            max_relative = 1e-11
        );
        assert_relative_eq!(
            k_functional(&u2).unwrap(),
            lambda * k_functional(&u1).unwrap(),
            max_relative = 1e-11
        );
    }

    #[test]
    fn energy_special_cases() {
        let g = make_grid(128, 16.0).unwrap();
        let z = RadialField::zeros(&g);
        assert_eq!(nls_energy(&z).unwrap(), 0.0);

        // E_Z(0, N) = ||N||^2/4
        let n = gaussian(&g, 0.8, 1.5);
        let st = State::new(z.clone(), n.clone(), 1.0, 0.0);
        assert_relative_eq!(
            zakharov_energy(&st).unwrap(),
            0.25 * l2_norm_sq(&n),
            max_relative = 1e-12
        );

        // E_Z(u, 0) = ||grad u||^2/2
        let u = gaussian(&g, 1.1, 1.2);
        let st = State::new(u.clone(), RadialField::zeros(&g), 1.0, 0.0);
        assert_relative_eq!(
            zakharov_energy(&st).unwrap(),
            0.5 * grad_l2_norm_sq(&u).unwrap(),
            max_relative = 1e-11
        );

        // matched N = |u|^2 collapses E_Z to E_S
        let st = State::new(u.clone(), u.modulus_squared(), 1.0, 0.0);
        assert_relative_eq!(
            zakharov_energy(&st).unwrap(),
            nls_energy(&u).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn action_and_g_functional() {
        let g = make_grid(128, 16.0).unwrap();
        let z = RadialField::zeros(&g);
        assert_eq!(action(&z, 0.7).unwrap(), 0.0);
        assert!(action(&z, 0.0).is_err());
        assert!(g_functional(&z, -1.0).is_err());
        assert_eq!(g_functional(&z, 1.0).unwrap(), 0.0);
        let u = gaussian(&g, 0.9, 1.7);
        assert!(g_functional(&u, 1.0).unwrap() > 0.0);
        // G = J - K/3
        let j = action(&u, 1.3).unwrap();
        let k = k_functional(&u).unwrap();
        assert_relative_eq!(
            g_functional(&u, 1.3).unwrap(),
            j - k / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn deviation_cases() {
        let g = make_grid(96, 12.0).unwrap();
        let u = gaussian(&g, 1.0, 1.0);
        // matched: both deviations vanish
        let st = State::new(u.clone(), u.modulus_squared(), 1.0, 0.0);
        let (c, r) = deviation(&st);
        assert!(l2_norm(&c) < 1e-14);
        assert!(l2_norm(&r) < 1e-14);

        // u = 0: complex deviation is N itself
        let n = RadialField::from_fn(&g, |x| Complex64::new((-x).exp(), 0.4 * (-x / 2.0).exp()));
        let st = State::new(RadialField::zeros(&g), n.clone(), 1.0, 0.0);
        let (c, _) = deviation(&st);
        assert!(l2_norm(&c.sub(&n)) < 1e-14);

        // Pythagoras: ||nu_c||^2 = ||nu_r||^2 + ||Im N||^2
        let st = State::new(u, n.clone(), 1.0, 0.0);
        let (c, r) = deviation(&st);
        assert_relative_eq!(
            l2_norm_sq(&c),
            l2_norm_sq(&r) + l2_norm_sq(&n.imag_part()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn record_is_consistent() {
        let g = make_grid(128, 14.0).unwrap();
        let u = gaussian(&g, 0.8, 1.4);
        let n = gaussian(&g, 0.5, 2.2);
        let st = State::new(u, n, 1.0, 0.0);
        let rec = FunctionalRecord::compute(&st).unwrap();
        assert!(rec.mass >= 0.0 && rec.nu_l2 >= 0.0);
        assert_relative_eq!(
            rec.e_z,
            rec.e_s + rec.nu_l2 * rec.nu_l2 / 4.0,
            max_relative = 1e-10
        );
    }
}
