//! Constrained ground-state solvers.
//!
//! Two independent routes to the same object, used to cross-validate each
//! other: a projected gradient flow for the reduced functional J on the
//! mass sphere { int u^2 = rho }, and a radial shooting method for the
//! static equation -lap u + W'(u) = omega^2 u. The outer solve matches a
//! prescribed charge by adjusting rho.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{self, StandingWave};
use crate::grid::{Profile, RadialGrid};
use crate::potential::ScalarPotential;

/// Options for the sphere flow.
#[derive(Debug, Clone)]
pub struct FlowOptions {
    /// Euler-Lagrange residual tolerance in the weighted L2 norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial gradient step; later steps use Barzilai-Borwein with backtracking.
    pub tau_init: f64,
    /// Warm start; any nonnegative nodal vector, rescaled onto the sphere.
    pub initial: Option<Vec<f64>>,
    /// J above -this at convergence raises the dispersive-collapse warning.
    pub j_warn_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-9,
            max_iter: 60_000,
            tau_init: 1e-2,
            initial: None,
            j_warn_tol: 1e-9,
        }
    }
}

/// Outcome of minimizing J on the mass sphere.
#[derive(Debug, Clone)]
pub struct SphereSolveResult {
    pub profile: Profile,
    /// Lagrange multiplier of the sphere constraint: -lap u + R'(u) = mu u.
    pub mu: f64,
    pub j_value: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Set when the infimum came out nonnegative (flow spread out instead of
    /// concentrating; the vacuum is the minimizer).
    pub collapse_warning: bool,
}

fn remainder_slope(pot: &ScalarPotential, u: &[f64]) -> Result<Vec<f64>> {
    u.iter().map(|&s| Ok(pot.remainder(s)?.dw)).collect()
}

fn j_discrete(grid: &RadialGrid, pot: &ScalarPotential, u: &[f64]) -> Result<f64> {
    let mut nl = 0.0;
    for (i, (&s, &w)) in u.iter().zip(grid.weights()).enumerate() {
        let r = pot.remainder(s)?.w;
        if !r.is_finite() {
            return Err(Error::Numeric {
                what: format!("R(u) not finite for u = {s}"),
                node: i,
            });
        }
        nl += w * r;
    }
    Ok(grid.dirichlet_energy(u) + nl)
}

fn project_onto_sphere(grid: &RadialGrid, u: &mut [f64], rho: f64) -> bool {
    for v in u.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mass = grid.inner(u, u);
    if mass <= 0.0 || !mass.is_finite() {
        return false;
    }
    let scale = (rho / mass).sqrt();
    for v in u.iter_mut() {
        *v *= scale;
    }
    true
}

/// Projected gradient descent for J on the sphere int u^2 = rho, with
/// positivity clipping, Barzilai-Borwein steps and a backtracking line
/// search keeping J nonincreasing.
pub fn minimize_j_on_sphere(
    pot: &ScalarPotential,
    rho: f64,
    grid: &RadialGrid,
    opts: &FlowOptions,
) -> Result<SphereSolveResult> {
    if !(rho > 0.0) {
        return Err(Error::Argument(format!("sphere mass must be positive, got {rho}")));
    }
    let n = grid.len();
    let mut u: Vec<f64> = match &opts.initial {
        Some(v) if v.len() == n => v.clone(),
        Some(_) => return Err(Error::Argument("warm start has the wrong grid size".into())),
        None => grid.nodes().iter().map(|&r| (-r * r / 8.0).exp()).collect(),
    };
    if !project_onto_sphere(grid, &mut u, rho) {
        return Err(Error::Argument("initial profile has zero mass".into()));
    }

    let gradient = |u: &[f64]| -> Result<Vec<f64>> {
        let mut g = grid.neg_laplacian(u);
        let rp = remainder_slope(pot, u)?;
        for (gi, ri) in g.iter_mut().zip(rp) {
            *gi += ri;
        }
        Ok(g)
    };

    let mut j = j_discrete(grid, pot, &u)?;
    let mut g = gradient(&u)?;
    let mut tau = opts.tau_init;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for iter in 0..opts.max_iter {
        let mu = grid.inner(&g, &u) / rho;
        let tangential: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi - mu * ui).collect();
        let residual = grid.norm(&tangential);
        if !residual.is_finite() {
            return Err(Error::Numeric {
                what: "flow residual is not finite".into(),
                node: 0,
            });
        }
        if residual <= opts.tol {
            let profile = Profile::new(grid.clone(), u)?;
            return Ok(SphereSolveResult {
                collapse_warning: j >= -opts.j_warn_tol,
                profile,
                mu,
                j_value: j,
                iterations: iter,
                residual,
            });
        }

        // Barzilai-Borwein step from the previous displacement pair.
        if let Some((du, dg)) = &prev {
            let num = grid.inner(du, du);
            let den = grid.inner(du, dg);
            if den > 0.0 && num > 0.0 {
                tau = (num / den).clamp(1e-10, 1e3);
            }
        }

        let mut accepted = false;
        for _ in 0..60 {
            let mut cand: Vec<f64> = u.iter().zip(&g).map(|(ui, gi)| ui - tau * gi).collect();
            if !project_onto_sphere(grid, &mut cand, rho) {
                tau *= 0.5;
                continue;
            }
            let j_new = j_discrete(grid, pot, &cand)?;
            if j_new <= j + 1e-14 * (1.0 + j.abs()) {
                // descent accepted; the sphere constraint holds to rounding
                debug_assert!((grid.inner(&cand, &cand) - rho).abs() <= 1e-12 * rho);
                let g_new = gradient(&cand)?;
                let du: Vec<f64> = cand.iter().zip(&u).map(|(a, b)| a - b).collect();
                let dg: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                prev = Some((du, dg));
                u = cand;
                debug_assert!(j_new <= j + 1e-12 * (1.0 + j.abs()), "descent violated");
                j = j_new;
                g = g_new;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            // roundoff plateau: accept convergence only if the residual is close
            if residual <= 10.0 * opts.tol {
                let profile = Profile::new(grid.clone(), u)?;
                return Ok(SphereSolveResult {
                    collapse_warning: j >= -opts.j_warn_tol,
                    profile,
                    mu,
                    j_value: j,
                    iterations: iter,
                    residual,
                });
            }
            return Err(Error::Solver {
                what: "sphere flow line search stalled".into(),
                residual,
                iterations: iter,
            });
        }
    }

    let mu = grid.inner(&g, &u) / rho;
    let tangential: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi - mu * ui).collect();
    Err(Error::Solver {
        what: "sphere flow did not converge".into(),
        residual: grid.norm(&tangential),
        iterations: opts.max_iter,
    })
}

/// Options for the radial shooting solver.
#[derive(Debug, Clone)]
pub struct ShootOptions {
    /// Scan interval for the central value u(0).
    pub bracket: (f64, f64),
    pub scan_points: usize,
    /// Relative bisection tolerance on u(0).
    pub bisect_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Below this fraction of u(0) the analytic decay tail takes over.
    pub tail_floor: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            bracket: (1e-4, 10.0),
            scan_points: 256,
            bisect_tol: 1e-12,
            rtol: 1e-10,
            atol: 1e-12,
            tail_floor: 3e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    /// u' turned positive before decaying: central value too small.
    Under,
    /// u crossed zero while still steep: central value too large.
    Over,
    /// Reached r_max still positive and falling.
    Decayed,
}

/// Dormand-Prince 5(4) step for the 2-vector (u, v). Returns (y5, error estimate).
fn dopri_step<F>(f: &F, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], f64)
where
    F: Fn(f64, [f64; 2]) -> [f64; 2],
{
    let k1 = f(r, y);
    let add = |y: [f64; 2], terms: &[(f64, [f64; 2])]| {
        let mut out = y;
        for &(c, k) in terms {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
        out
    };
    let k2 = f(r + h / 5.0, add(y, &[(1.0 / 5.0, k1)]));
    let k3 = f(r + 3.0 * h / 10.0, add(y, &[(3.0 / 40.0, k1), (9.0 / 40.0, k2)]));
    let k4 = f(
        r + 4.0 * h / 5.0,
        add(y, &[(44.0 / 45.0, k1), (-56.0 / 15.0, k2), (32.0 / 9.0, k3)]),
    );
    let k5 = f(
        r + 8.0 * h / 9.0,
        add(
            y,
            &[
                (19372.0 / 6561.0, k1),
                (-25360.0 / 2187.0, k2),
                (64448.0 / 6561.0, k3),
                (-212.0 / 729.0, k4),
            ],
        ),
    );
    let k6 = f(
        r + h,
        add(
            y,
            &[
                (9017.0 / 3168.0, k1),
                (-355.0 / 33.0, k2),
                (46732.0 / 5247.0, k3),
                (49.0 / 176.0, k4),
                (-5103.0 / 18656.0, k5),
            ],
        ),
    );
    let y5 = add(
        y,
        &[
            (35.0 / 384.0, k1),
            (500.0 / 1113.0, k3),
            (125.0 / 192.0, k4),
            (-2187.0 / 6784.0, k5),
            (11.0 / 84.0, k6),
        ],
    );
    let k7 = f(r + h, y5);
    // difference of the 5th- and 4th-order weights
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [k1, k2, k3, k4, k5, k6, k7];
    let mut err: f64 = 0.0;
    for c in 0..2 {
        let mut de = 0.0;
        for (w, k) in e.iter().zip(ks.iter()) {
            de += w * k[c];
        }
        err = err.max((h * de).abs());
    }
    (y5, err)
}

struct Integrator<'a> {
    pot: &'a ScalarPotential,
    omega2: f64,
    dim: f64,
    rtol: f64,
    atol: f64,
}

impl Integrator<'_> {
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        let (u, v) = (y[0], y[1]);
        // odd extension of W' for transient negative values during overshoot
        let dw = match self.pot.eval(u.abs()) {
            Ok(e) => e.dw * u.signum(),
            Err(_) => f64::NAN,
        };
        let force = dw - self.omega2 * u;
        if r < 1e-12 {
            // lap u -> N u''(0) at the origin
            [v, force / self.dim]
        } else {
            [v, force - (self.dim - 1.0) / r * v]
        }
    }

    /// Integrate from (r, y) to r_target with adaptive sub-steps; checks the
    /// under/over events after every accepted step.
    fn advance(
        &self,
        mut r: f64,
        mut y: [f64; 2],
        r_target: f64,
        u0: f64,
    ) -> (f64, [f64; 2], Option<Shot>) {
        let mut h = ((r_target - r) / 4.0).clamp(1e-9, 0.05);
        while r < r_target {
            h = h.min(r_target - r);
            let (y_new, err) = dopri_step(&|rr, yy| self.rhs(rr, yy), r, y, h);
            let scale = self.atol + self.rtol * y[0].abs().max(y[1].abs()).max(u0);
            if !y_new[0].is_finite() || !y_new[1].is_finite() {
                return (r, y, Some(Shot::Over));
            }
            if err <= scale {
                r += h;
                y = y_new;
                if y[0] <= 0.0 {
                    return (r, y, Some(Shot::Over));
                }
                if y[1] > 0.0 && r > 1e-8 {
                    return (r, y, Some(Shot::Under));
                }
                let grow = 0.9 * (scale / err.max(1e-300)).powf(0.2);
                h = (h * grow.clamp(0.2, 5.0)).min(0.1);
            } else {
                h *= 0.9 * (scale / err).powf(0.2).clamp(0.1, 1.0);
            }
            if h < 1e-13 {
                return (r, y, Some(Shot::Over));
            }
        }
        (r, y, None)
    }

    fn classify(&self, u0: f64, r_max: f64) -> Shot {
        let (_, _, event) = self.advance(0.0, [u0, 0.0], r_max, u0);
        event.unwrap_or(Shot::Decayed)
    }
}

/// Radial shooting for -u'' - (N-1)/r u' + W'(u) = omega^2 u with u'(0) = 0,
/// decaying at infinity: bisection on u(0) between undershoot (u' turns
/// positive) and overshoot (u crosses zero) outcomes.
pub fn shoot_radial(
    pot: &ScalarPotential,
    omega: f64,
    grid: &RadialGrid,
    opts: &ShootOptions,
) -> Result<Profile> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Argument(format!(
            "shooting requires 0 < omega < 1 (got {omega}); frequencies at or above the mass threshold admit no decaying profile"
        )));
    }
    let integ = Integrator {
        pot,
        omega2: omega * omega,
        dim: grid.dim() as f64,
        rtol: opts.rtol,
        atol: opts.atol,
    };
    let r_max = grid.r_max();

    // Scan the bracket for adjacent outcomes of different type.
    let (lo, hi) = opts.bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Argument("bad shooting bracket".into()));
    }
    let m = opts.scan_points.max(8);
    let mut prev_a = lo;
    let mut prev_s = integ.classify(lo, r_max);
    let mut bracket = None;
    for i in 1..=m {
        let a = lo + (hi - lo) * i as f64 / m as f64;
        let s = integ.classify(a, r_max);
        let prev_under = matches!(prev_s, Shot::Under | Shot::Decayed);
        let under = matches!(s, Shot::Under | Shot::Decayed);
        if prev_under != under {
            bracket = Some((prev_a, a));
            break;
        }
        prev_a = a;
        prev_s = s;
    }
    let (mut a_lo, mut a_hi) = bracket.ok_or_else(|| {
        Error::NoSolution(format!(
            "shooting map has no sign change for {} at omega = {omega}: no ground state detected in u(0) bracket ({lo}, {hi})",
            pot.name()
        ))
    })?;

    // Bisection; keep a_lo on the undershoot side.
    if !matches!(integ.classify(a_lo, r_max), Shot::Under | Shot::Decayed) {
        std::mem::swap(&mut a_lo, &mut a_hi);
    }
    for _ in 0..200 {
        if (a_hi - a_lo).abs() <= opts.bisect_tol * a_lo.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (a_lo + a_hi);
        if matches!(integ.classify(mid, r_max), Shot::Under | Shot::Decayed) {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    let a_star = 0.5 * (a_lo + a_hi);

    // Final pass: sample on the grid, grafting the linearized decay tail
    // once the solution drops below the floor (the bisected trajectory is
    // contaminated by e^{kr} error growth beyond that point anyway).
    let nodes = grid.nodes();
    let mut u = vec![0.0; nodes.len()];
    u[0] = a_star;
    let mut y = [a_star, 0.0];
    let mut r = 0.0;
    let floor = opts.tail_floor * a_star;
    let k = (1.0 - omega * omega).sqrt();
    let half_dim = (grid.dim() as f64 - 1.0) / 2.0;
    let mut graft: Option<(f64, f64)> = None; // (r*, u(r*))
    for i in 1..nodes.len() {
        if let Some((r_star, u_star)) = graft {
            let decay = if half_dim > 0.0 {
                (r_star / nodes[i]).powf(half_dim)
            } else {
                1.0
            };
            u[i] = u_star * decay * (-k * (nodes[i] - r_star)).exp();
            continue;
        }
        let (r_new, y_new, event) = integ.advance(r, y, nodes[i], a_star);
        r = r_new;
        y = y_new;
        if event.is_some() || (y[0] <= floor && y[1] < 0.0) {
            let u_star = y[0].max(floor.min(a_star));
            graft = Some((r.max(nodes[i - 1]), u_star));
            let decay = if half_dim > 0.0 {
                (graft.unwrap().0 / nodes[i]).powf(half_dim)
            } else {
                1.0
            };
            u[i] = u_star * decay * (-k * (nodes[i] - graft.unwrap().0)).exp();
        } else {
            u[i] = y[0];
        }
    }
    Profile::new(grid.clone(), u)
}

/// Static-equation residual and multiplier estimate for a candidate pair.
#[derive(Debug, Clone, Serialize)]
pub struct StaticResidual {
    /// || -lap u + W'(u) - omega^2 u || in the weighted L2 norm.
    pub norm: f64,
    /// Least-squares Lagrange multiplier; -omega for a true constrained
    /// critical point. None for the zero profile.
    pub multiplier: Option<f64>,
}

pub fn residual_static(sw: &StandingWave, pot: &ScalarPotential) -> Result<StaticResidual> {
    let grid = &sw.profile.grid;
    let u = sw.profile.values();
    let lap = grid.neg_laplacian(u);
    let omega2 = sw.omega * sw.omega;
    let mut resid = vec![0.0; u.len()];
    let mut de = vec![0.0; u.len()];
    for i in 0..u.len() {
        let dw = pot.eval(u[i])?.dw;
        resid[i] = lap[i] + dw - omega2 * u[i];
        de[i] = lap[i] + dw + omega2 * u[i];
    }
    let rho = sw.profile.mass();
    let multiplier = if rho > 0.0 {
        Some(-grid.inner(&de, u) / (2.0 * sw.omega * rho))
    } else {
        None
    };
    Ok(StaticResidual {
        norm: grid.norm(&resid),
        multiplier,
    })
}

/// Lemma-style bound check for saturated potentials: a certified ground
/// state must stay below the saturation level (tolerance 1e-6).
pub fn maximum_principle_check(sw: &StandingWave, sbar: f64) -> bool {
    sw.profile.max() <= sbar + 1e-6
}

/// A certified constrained minimizer with its diagnostics.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub sw: StandingWave,
    pub charge: f64,
    pub energy: f64,
    /// Least-squares multiplier estimate; should match -omega.
    pub lambda_multiplier: f64,
    /// Energy per unit |charge|.
    pub lambda: f64,
    pub residual: f64,
    pub certified: bool,
    pub warning: Option<String>,
}

/// Options for the outer charge-matching solve.
#[derive(Debug, Clone)]
pub struct ChargeSolveOptions {
    pub flow: FlowOptions,
    /// Relative tolerance on the matched charge.
    pub ctol: f64,
    /// Residual level below which the result is certified.
    pub certify_tol: f64,
    pub max_outer_iter: usize,
}

impl Default for ChargeSolveOptions {
    fn default() -> Self {
        ChargeSolveOptions {
            flow: FlowOptions::default(),
            ctol: 1e-6,
            certify_tol: 1e-4,
            max_outer_iter: 40,
        }
    }
}

fn certify(
    sw: StandingWave,
    pot: &ScalarPotential,
    certify_tol: f64,
    mut warning: Option<String>,
) -> Result<GroundState> {
    let stat = residual_static(&sw, pot)?;
    let energy = functionals::energy(&sw, pot)?;
    let charge = functionals::charge(&sw);
    let lambda = functionals::lambda_ratio(&sw, pot)?;
    let decays = sw.profile.decays();
    let mut certified = stat.norm <= certify_tol && decays && sw.omega < 1.0;
    if lambda >= 1.0 {
        certified = false;
        let note = format!(
            "energy/charge ratio {lambda:.6} is not below 1; the variational sufficient condition is unmet"
        );
        warning = Some(match warning {
            Some(w) => format!("{w}; {note}"),
            None => note,
        });
    }
    Ok(GroundState {
        charge,
        energy,
        lambda_multiplier: stat.multiplier.unwrap_or(f64::NAN),
        lambda,
        residual: stat.norm,
        certified,
        warning,
        sw,
    })
}

/// Ground state at fixed frequency via shooting, with certification.
pub fn ground_state_for_omega(
    pot: &ScalarPotential,
    omega: f64,
    grid: &RadialGrid,
    shoot: &ShootOptions,
    certify_tol: f64,
) -> Result<GroundState> {
    let profile = shoot_radial(pot, omega, grid, shoot)?;
    certify(StandingWave::new(profile, omega)?, pot, certify_tol, None)
}

/// Ground state at fixed charge C < 0: sweep the sphere mass rho, pick the
/// basin minimizing J + rho/2 + C^2/(2 rho), then polish the stationarity
/// condition omega(rho) rho = |C| by secant steps. omega comes out of the
/// sphere multiplier through omega^2 = 1 + mu.
pub fn ground_state_for_charge(
    pot: &ScalarPotential,
    c: f64,
    grid: &RadialGrid,
    opts: &ChargeSolveOptions,
) -> Result<GroundState> {
    if !(c < 0.0) || !c.is_finite() {
        return Err(Error::Argument(format!(
            "charge-constrained solve needs C < 0 (got {c}); positive charges are the omega < 0 mirror"
        )));
    }
    let c_abs = -c;

    let mut warm: Option<Vec<f64>> = None;
    let solve = |rho: f64, warm: &mut Option<Vec<f64>>| -> Result<(SphereSolveResult, Option<f64>)> {
        let mut flow = opts.flow.clone();
        flow.initial = warm.clone();
        let res = minimize_j_on_sphere(pot, rho, grid, &flow)?;
        *warm = Some(res.profile.values().to_vec());
        // admissible only if mu in (-1, 0): omega = sqrt(1 + mu) in (0, 1)
        let omega = (res.mu > -1.0 + 1e-12 && res.mu < -1e-12).then(|| (1.0 + res.mu).sqrt());
        Ok((res, omega))
    };

    // Coarse sweep: |C| = omega rho with omega < 1 forces rho > |C|.
    let factors = [1.02, 1.08, 1.16, 1.3, 1.5, 1.8, 2.2, 2.8, 3.5];
    let mut best: Option<(f64, f64, f64)> = None; // (h, rho, omega)
    for &f in &factors {
        let rho = c_abs * f;
        let Ok((res, Some(omega))) = solve(rho, &mut warm) else {
            continue;
        };
        let h = res.j_value + 0.5 * rho + c_abs * c_abs / (2.0 * rho);
        if best.map_or(true, |(bh, _, _)| h < bh) {
            best = Some((h, rho, omega));
        }
    }
    let Some((_, rho0, omega0)) = best else {
        return Err(Error::NoSolution(format!(
            "no admissible frequency found for charge {c} with {}: the sphere multiplier never lies in (-1, 0)",
            pot.name()
        )));
    };

    // Secant on g(rho) = omega(rho) rho - |C| inside the selected basin.
    let mut rho_a = rho0;
    let mut g_a = omega0 * rho0 - c_abs;
    let mut rho_b = rho0 * if g_a > 0.0 { 0.97 } else { 1.03 };
    let mut result = None;
    for _ in 0..opts.max_outer_iter {
        let (res, omega) = solve(rho_b, &mut warm)?;
        let Some(omega) = omega else {
            return Err(Error::NoSolution(format!(
                "sphere multiplier {:.3e} leaves no admissible frequency at rho = {rho_b:.6}",
                res.mu
            )));
        };
        let g_b = omega * rho_b - c_abs;
        if g_b.abs() <= opts.ctol * c_abs.max(1.0) {
            result = Some((res, omega, rho_b));
            break;
        }
        let denom = g_b - g_a;
        let mut rho_next = if denom.abs() > 1e-300 {
            rho_b - g_b * (rho_b - rho_a) / denom
        } else {
            0.5 * (rho_a + rho_b)
        };
        if !(rho_next > c_abs) || !rho_next.is_finite() || rho_next > 10.0 * rho0 {
            rho_next = 0.5 * (rho_b + rho_a.max(c_abs * 1.001));
        }
        rho_a = rho_b;
        g_a = g_b;
        rho_b = rho_next;
    }
    let Some((res, omega, _rho)) = result else {
        return Err(Error::Solver {
            what: format!("charge matching did not converge for C = {c}"),
            residual: g_a.abs(),
            iterations: opts.max_outer_iter,
        });
    };

    let warning = res
        .collapse_warning
        .then(|| "reduced functional nonnegative at convergence (dispersive collapse)".to_string());
    certify(
        StandingWave::new(res.profile, omega)?,
        pot,
        opts.certify_tol,
        warning,
    )
}
