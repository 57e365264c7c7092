//! Quadrature-backed functionals on profile/frequency pairs.
//!
//! Energy E(u, omega) = int( |grad u|^2/2 + omega^2 u^2/2 + W(u) ) dx and
//! charge C(u, omega) = -omega int u^2 dx, together with the derived
//! quantities alpha(u), the energy/charge ratio, and the reduced functional
//! J(u) = int( |grad u|^2/2 + R(u) ) dx. Gradients use central differences
//! with the even-symmetry condition u'(0) = 0 at the origin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Profile, RadialGrid};
use crate::potential::ScalarPotential;

/// A candidate standing wave: nonnegative profile plus frequency omega > 0
/// (the negative-charge convention fixes the sign of omega).
#[derive(Debug, Clone)]
pub struct StandingWave {
    pub profile: Profile,
    pub omega: f64,
}

impl StandingWave {
    pub fn new(profile: Profile, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Argument(format!(
                "standing wave frequency must be positive, got {omega}"
            )));
        }
        Ok(StandingWave { profile, omega })
    }
}

/// Scalar summary of a standing wave used by reports.
#[derive(Debug, Clone, Serialize)]
pub struct WaveDiagnostics {
    pub omega: f64,
    pub energy: f64,
    pub charge: f64,
    pub lambda: f64,
}

fn potential_integral(profile: &Profile, pot: &ScalarPotential) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (&u, &w)) in profile
        .values()
        .iter()
        .zip(profile.grid.weights())
        .enumerate()
    {
        let v = pot.eval(u)?.w;
        if !v.is_finite() {
            return Err(Error::Numeric {
                what: format!("W(u) not finite for u = {u}"),
                node: i,
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

fn remainder_integral(profile: &Profile, pot: &ScalarPotential) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (&u, &w)) in profile
        .values()
        .iter()
        .zip(profile.grid.weights())
        .enumerate()
    {
        let v = pot.remainder(u)?.w;
        if !v.is_finite() {
            return Err(Error::Numeric {
                what: format!("R(u) not finite for u = {u}"),
                node: i,
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// int |grad u|^2 dx by central differences and radial quadrature.
pub fn gradient_square_integral(profile: &Profile) -> f64 {
    let g = profile.grid.gradient(profile.values());
    let sq: Vec<f64> = g.iter().map(|x| x * x).collect();
    profile.grid.integrate(&sq)
}

/// E(u, omega) = int( |grad u|^2/2 + omega^2 u^2/2 + W(u) ) dx.
pub fn energy(sw: &StandingWave, pot: &ScalarPotential) -> Result<f64> {
    let kinetic = 0.5 * gradient_square_integral(&sw.profile);
    let mass = sw.profile.mass();
    Ok(kinetic + 0.5 * sw.omega * sw.omega * mass + potential_integral(&sw.profile, pot)?)
}

/// C(u, omega) = -omega int u^2 dx; strictly negative for nonzero profiles.
pub fn charge(sw: &StandingWave) -> f64 {
    -sw.omega * sw.profile.mass()
}

/// alpha(u) = int( |grad u|^2/2 + W(u) ) dx / ( int u^2/2 dx ).
pub fn alpha(profile: &Profile, pot: &ScalarPotential) -> Result<f64> {
    let mass = profile.mass();
    if mass <= 0.0 {
        return Err(Error::Domain("alpha is undefined for the zero profile".into()));
    }
    let num = 0.5 * gradient_square_integral(profile) + potential_integral(profile, pot)?;
    Ok(num / (0.5 * mass))
}

/// Energy per unit |charge|: omega/2 + alpha(u) / (2 omega). Below 1 it
/// certifies the existence of minimizing standing waves.
pub fn lambda_ratio(sw: &StandingWave, pot: &ScalarPotential) -> Result<f64> {
    if !(sw.omega > 0.0) {
        return Err(Error::Argument("lambda ratio needs omega > 0".into()));
    }
    Ok(0.5 * sw.omega + alpha(&sw.profile, pot)? / (2.0 * sw.omega))
}

/// J(u) = int( |grad u|^2/2 + R(u) ) dx, the sphere-reduced functional.
pub fn functional_j(profile: &Profile, pot: &ScalarPotential) -> Result<f64> {
    Ok(0.5 * gradient_square_integral(profile) + remainder_integral(profile, pot)?)
}

/// Flat-top family: u = r0 on [0, R], linear ramp to 0 on [R, R+1].
pub fn plateau_profile(r0: f64, plateau_radius: f64, grid: &RadialGrid) -> Result<Profile> {
    if !(r0 > 0.0) || !(plateau_radius >= 0.0) {
        return Err(Error::Argument(format!(
            "plateau needs r0 > 0 and R >= 0 (got r0 = {r0}, R = {plateau_radius})"
        )));
    }
    if grid.r_max() < plateau_radius + 1.0 {
        return Err(Error::Argument(format!(
            "grid r_max = {} too small for plateau radius {} + ramp 1",
            grid.r_max(),
            plateau_radius
        )));
    }
    let u = grid
        .nodes()
        .iter()
        .map(|&r| {
            if r <= plateau_radius {
                r0
            } else if r <= plateau_radius + 1.0 {
                r0 * (1.0 + plateau_radius - r)
            } else {
                0.0
            }
        })
        .collect();
    Profile::new(grid.clone(), u)
}

/// Mass-invariant family: u = gamma R^{-N/2} on [0, R], ramp to 0 over
/// [R, 2R]; int u^2 is independent of R up to a fixed constant factor.
pub fn scaled_plateau(gamma: f64, radius: f64, grid: &RadialGrid) -> Result<Profile> {
    if !(gamma > 0.0) || !(radius > 0.0) {
        return Err(Error::Argument(format!(
            "scaled plateau needs gamma > 0 and R > 0 (got gamma = {gamma}, R = {radius})"
        )));
    }
    if grid.r_max() < 2.0 * radius {
        return Err(Error::Argument(format!(
            "grid r_max = {} too small for scaled plateau of radius {radius}",
            grid.r_max()
        )));
    }
    let height = gamma * radius.powf(-(grid.dim() as f64) / 2.0);
    let u = grid
        .nodes()
        .iter()
        .map(|&r| {
            if r <= radius {
                height
            } else if r <= 2.0 * radius {
                height * (2.0 - r / radius)
            } else {
                0.0
            }
        })
        .collect();
    Profile::new(grid.clone(), u)
}
