//! Field states and the first-order dynamics of psi_tt = lap psi - W'(psi).
//!
//! The primary geometry is a uniform 1d line (periodic or absorbing ends),
//! where closed-form oracles exist; radially symmetric evolution in higher
//! dimension uses the radial Laplacian with a Neumann origin. Time stepping
//! is the kick-drift-kick leapfrog: second order, time reversible, with the
//! usual excellent long-time behaviour of conserved quantities.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::StandingWave;
use crate::grid::RadialGrid;
use crate::potential::ScalarPotential;
use crate::report::{TrajectoryPoint, TrajectorySeries};

/// End handling for line geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Periodic,
    /// Ghost zeros plus a damping sponge over the outer 10% of the box.
    Absorbing,
}

/// Uniform 1d grid x_j = x0 + j h, j = 0..n-1.
#[derive(Debug, Clone)]
pub struct LineGeometry {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
    pub boundary: Boundary,
}

impl LineGeometry {
    /// Box [-half_width, half_width) for periodic ends (the right endpoint
    /// wraps onto the left), or [-half_width, half_width] for absorbing ones.
    pub fn symmetric_box(half_width: f64, h: f64, boundary: Boundary) -> Result<Self> {
        if !(half_width > 0.0 && h > 0.0) {
            return Err(Error::Argument("box needs positive half width and spacing".into()));
        }
        let cells = (2.0 * half_width / h).round() as usize;
        if cells < 8 {
            return Err(Error::Argument("box too small for the requested spacing".into()));
        }
        let n = match boundary {
            Boundary::Periodic => cells,
            Boundary::Absorbing => cells + 1,
        };
        Ok(LineGeometry {
            x0: -half_width,
            h,
            n,
            boundary,
        })
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.h
    }
}

/// Spatial domain of a field state.
#[derive(Debug, Clone)]
pub enum Geometry {
    Line(LineGeometry),
    Radial(RadialGrid),
}

impl Geometry {
    pub fn len(&self) -> usize {
        match self {
            Geometry::Line(l) => l.n,
            Geometry::Radial(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> Result<f64> {
        match self {
            Geometry::Line(l) => Ok(l.h),
            Geometry::Radial(g) => g
                .uniform_spacing()
                .ok_or_else(|| Error::Argument("radial evolution needs a uniform grid".into())),
        }
    }

    /// Quadrature weights of the geometry.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Geometry::Line(l) => match l.boundary {
                Boundary::Periodic => vec![l.h; l.n],
                Boundary::Absorbing => {
                    let mut w = vec![l.h; l.n];
                    w[0] = 0.5 * l.h;
                    w[l.n - 1] = 0.5 * l.h;
                    w
                }
            },
            Geometry::Radial(g) => g.weights().to_vec(),
        }
    }
}

/// Complex field and velocity sampled at one instant.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub geometry: Geometry,
    pub psi: Vec<Complex64>,
    pub psit: Vec<Complex64>,
    pub time: f64,
}

/// The integrals of motion tracked along trajectories. Angular momentum is
/// identically zero for the supported 1d/radial geometries and is reported
/// as such rather than computed.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConservedSet {
    pub energy: f64,
    pub charge: f64,
    /// Field momentum; zero by symmetry on radial geometries.
    pub momentum: f64,
    /// Ergocenter velocity P / E (zero for the zero state).
    pub ergocenter_velocity: f64,
}

/// Polar form psi = u e^{iS} plus the charge-weighted mean phase velocity.
#[derive(Debug, Clone)]
pub struct PolarDecomp {
    pub modulus: Vec<f64>,
    /// Unwrapped phase; extended constantly across near-zeros of u.
    pub phase: Vec<f64>,
    /// omega_tilde = -charge / int u^2.
    pub omega_tilde: f64,
}

fn complex_gradient(geom: &Geometry, f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    match geom {
        Geometry::Line(l) => {
            let two_h = 2.0 * l.h;
            match l.boundary {
                Boundary::Periodic => {
                    for j in 0..n {
                        let jp = (j + 1) % n;
                        let jm = (j + n - 1) % n;
                        g[j] = (f[jp] - f[jm]) / two_h;
                    }
                }
                Boundary::Absorbing => {
                    g[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / two_h;
                    for j in 1..n - 1 {
                        g[j] = (f[j + 1] - f[j - 1]) / two_h;
                    }
                    g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / two_h;
                }
            }
        }
        Geometry::Radial(grid) => {
            let r = grid.nodes();
            g[0] = Complex64::new(0.0, 0.0); // even symmetry at the origin
            for j in 1..n - 1 {
                g[j] = (f[j + 1] - f[j - 1]) / (r[j + 1] - r[j - 1]);
            }
            g[n - 1] = (f[n - 1] - f[n - 2]) / (r[n - 1] - r[n - 2]);
        }
    }
    g
}

/// Central-difference gradient of a real nodal vector on a geometry.
pub fn real_gradient(geom: &Geometry, f: &[f64]) -> Vec<f64> {
    let as_complex: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    complex_gradient(geom, &as_complex).iter().map(|c| c.re).collect()
}

fn laplacian(geom: &Geometry, f: &[Complex64], out: &mut [Complex64]) {
    let n = f.len();
    match geom {
        Geometry::Line(l) => {
            let h2 = l.h * l.h;
            match l.boundary {
                Boundary::Periodic => {
                    for j in 0..n {
                        let jp = (j + 1) % n;
                        let jm = (j + n - 1) % n;
                        out[j] = (f[jp] - 2.0 * f[j] + f[jm]) / h2;
                    }
                }
                Boundary::Absorbing => {
                    // ghost zeros outside the box
                    out[0] = (f[1] - 2.0 * f[0]) / h2;
                    for j in 1..n - 1 {
                        out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2;
                    }
                    out[n - 1] = (f[n - 2] - 2.0 * f[n - 1]) / h2;
                }
            }
        }
        Geometry::Radial(grid) => {
            let h = grid.uniform_spacing().expect("radial evolution needs a uniform grid");
            let h2 = h * h;
            let dim = grid.dim() as f64;
            let r = grid.nodes();
            // lap f(0) = N f''(0) by symmetry
            out[0] = 2.0 * dim * (f[1] - f[0]) / h2;
            for j in 1..n - 1 {
                out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / h2
                    + (dim - 1.0) / r[j] * (f[j + 1] - f[j - 1]) / (2.0 * h);
            }
            out[n - 1] = (f[n - 2] - 2.0 * f[n - 1]) / h2
                + (dim - 1.0) / r[n - 1] * (-f[n - 2]) / (2.0 * h);
        }
    }
}

fn interp_even(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let r = x.abs();
    if r >= nodes[nodes.len() - 1] {
        return 0.0;
    }
    let h = nodes[1] - nodes[0];
    let i = ((r / h) as usize).min(nodes.len() - 2);
    let t = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] * (1.0 - t) + values[i + 1] * t
}

/// Place a standing wave into a field state at time t:
/// psi = u e^{-i omega t}, psi_t = -i omega u e^{-i omega t}.
pub fn embed_standing_wave(sw: &StandingWave, t: f64, geom: &Geometry) -> Result<FieldState> {
    let omega = sw.omega;
    let phase = Complex64::from_polar(1.0, -omega * t);
    let dphase = Complex64::new(0.0, -omega) * phase;
    let (psi, psit): (Vec<Complex64>, Vec<Complex64>) = match geom {
        Geometry::Line(l) => {
            if sw.profile.grid.dim() != 1 {
                return Err(Error::Argument(format!(
                    "cannot embed a {}-dimensional radial profile onto a line",
                    sw.profile.grid.dim()
                )));
            }
            (0..l.n)
                .map(|j| {
                    let u = sw.profile.interp(l.x(j));
                    (phase * u, dphase * u)
                })
                .unzip()
        }
        Geometry::Radial(g) => {
            if g.dim() != sw.profile.grid.dim() {
                return Err(Error::Argument(
                    "radial geometry dimension does not match the profile".into(),
                ));
            }
            if g.same_as(&sw.profile.grid) {
                sw.profile
                    .values()
                    .iter()
                    .map(|&u| (phase * u, dphase * u))
                    .unzip()
            } else {
                g.nodes()
                    .iter()
                    .map(|&r| {
                        let u = sw.profile.interp(r);
                        (phase * u, dphase * u)
                    })
                    .unzip()
            }
        }
    };
    Ok(FieldState {
        geometry: geom.clone(),
        psi,
        psit,
        time: t,
    })
}

/// Traveling-wave state from a standing wave: with gamma = 1/sqrt(1 - v^2),
/// frequency gamma*omega and wavenumber gamma*omega*v,
/// psi(t, x) = u(gamma (x - v t)) e^{i (k x - gamma omega t)}.
pub fn boost(sw: &StandingWave, v: f64, geom: &Geometry, t: f64) -> Result<FieldState> {
    if !(v.abs() < 1.0) {
        return Err(Error::Argument(format!("boost speed |v| must be below 1, got {v}")));
    }
    let Geometry::Line(l) = geom else {
        return Err(Error::Argument("boost is only defined on 1d line geometry".into()));
    };
    if sw.profile.grid.dim() != 1 {
        return Err(Error::Argument("boost needs a 1d profile".into()));
    }
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let omega_bar = gamma * sw.omega;
    let k = gamma * sw.omega * v;
    let nodes = sw.profile.grid.nodes();
    let du = sw.profile.grid.gradient(sw.profile.values());
    let mut psi = Vec::with_capacity(l.n);
    let mut psit = Vec::with_capacity(l.n);
    for j in 0..l.n {
        let x = l.x(j);
        let xi = gamma * (x - v * t);
        let u = interp_even(nodes, sw.profile.values(), xi);
        let uprime = xi.signum() * interp_even(nodes, &du, xi);
        let carrier = Complex64::from_polar(1.0, k * x - omega_bar * t);
        psi.push(carrier * u);
        // exact t-derivative of the construction
        psit.push(carrier * Complex64::new(-gamma * v * uprime, -omega_bar * u));
    }
    Ok(FieldState {
        geometry: geom.clone(),
        psi,
        psit,
        time: t,
    })
}

fn kick(state: &mut FieldState, pot: &ScalarPotential, lap: &[Complex64], half_dt: f64) -> Result<()> {
    for j in 0..state.psi.len() {
        let force = lap[j] - pot.grad_complex(state.psi[j])?;
        state.psit[j] += half_dt * force;
    }
    Ok(())
}

fn apply_sponge(state: &mut FieldState) -> bool {
    // damping factor cached per call; only absorbing line geometries damp
    let Geometry::Line(l) = &state.geometry else {
        return false;
    };
    if l.boundary != Boundary::Absorbing {
        return false;
    }
    true
}

/// One leapfrog step (kick-drift-kick) of size dt. The CFL precondition
/// dt <= 0.5 h is enforced; non-finite values abort with the blow-up time.
pub fn step(state: &mut FieldState, dt: f64, pot: &ScalarPotential) -> Result<()> {
    let h = state.geometry.spacing()?;
    if !(dt.abs() <= 0.5 * h * (1.0 + 1e-12)) || dt == 0.0 {
        return Err(Error::Cfl {
            dt: dt.abs(),
            limit: 0.5 * h,
        });
    }
    let n = state.psi.len();
    let mut lap = vec![Complex64::new(0.0, 0.0); n];

    laplacian(&state.geometry, &state.psi, &mut lap);
    kick(state, pot, &lap, 0.5 * dt)?;
    for j in 0..n {
        let v = state.psit[j];
        state.psi[j] += dt * v;
    }
    laplacian(&state.geometry, &state.psi, &mut lap);
    kick(state, pot, &lap, 0.5 * dt)?;
    state.time += dt;

    if apply_sponge(state) {
        let Geometry::Line(l) = &state.geometry else { unreachable!() };
        let half = 0.5 * (l.n - 1) as f64 * l.h;
        let width = 0.1 * 2.0 * half;
        let start = half - width;
        let sigma0 = 5.0;
        for j in 0..n {
            let x = (l.x(j) - (l.x0 + half)).abs();
            if x > start {
                let s = sigma0 * ((x - start) / width).powi(2);
                let damp = (-s * dt.abs()).exp();
                state.psi[j] *= damp;
                state.psit[j] *= damp;
            }
        }
    }

    for j in 0..n {
        if !state.psi[j].is_finite() || !state.psit[j].is_finite() {
            return Err(Error::BlowUp { time: state.time });
        }
    }
    Ok(())
}

/// Energy, charge, momentum and ergocenter velocity of a state.
pub fn conserved(state: &FieldState, pot: &ScalarPotential) -> Result<ConservedSet> {
    let w = state.geometry.weights();
    let grad = complex_gradient(&state.geometry, &state.psi);
    let mut energy = 0.0;
    let mut charge = 0.0;
    let mut momentum = 0.0;
    let line = matches!(state.geometry, Geometry::Line(_));
    for j in 0..state.psi.len() {
        let wp = pot.eval(state.psi[j].norm())?.w;
        if !wp.is_finite() {
            return Err(Error::Numeric {
                what: "potential energy density not finite".into(),
                node: j,
            });
        }
        energy += w[j] * (0.5 * state.psit[j].norm_sqr() + 0.5 * grad[j].norm_sqr() + wp);
        charge += w[j] * (state.psit[j] * state.psi[j].conj()).im;
        if line {
            momentum -= w[j] * (state.psit[j] * grad[j].conj()).re;
        }
    }
    let ergocenter_velocity = if energy.abs() > 0.0 {
        momentum / energy
    } else if momentum.abs() > 0.0 {
        return Err(Error::Domain("nonzero momentum with zero energy".into()));
    } else {
        0.0
    };
    Ok(ConservedSet {
        energy,
        charge,
        momentum,
        ergocenter_velocity,
    })
}

/// Polar decomposition with grid phase unwrapping; the phase is extended
/// constantly wherever the modulus falls below 1e-8 of its maximum.
pub fn polar_decompose(state: &FieldState) -> Result<PolarDecomp> {
    let modulus: Vec<f64> = state.psi.iter().map(|z| z.norm()).collect();
    let max_u = modulus.iter().cloned().fold(0.0, f64::max);
    let w = state.geometry.weights();
    let mass: f64 = modulus.iter().zip(&w).map(|(u, w)| w * u * u).sum();
    if mass <= 0.0 {
        return Err(Error::Domain("polar decomposition of the zero state".into()));
    }
    let thr = 1e-8 * max_u;
    let mut phase = vec![0.0; modulus.len()];
    let mut prev: Option<f64> = None;
    for j in 0..modulus.len() {
        if modulus[j] > thr {
            let raw = state.psi[j].arg();
            let th = match prev {
                None => raw,
                Some(p) => {
                    let mut d = raw - p;
                    while d > std::f64::consts::PI {
                        d -= 2.0 * std::f64::consts::PI;
                    }
                    while d <= -std::f64::consts::PI {
                        d += 2.0 * std::f64::consts::PI;
                    }
                    p + d
                }
            };
            phase[j] = th;
            prev = Some(th);
        } else {
            phase[j] = prev.unwrap_or(0.0);
        }
    }
    // backfill leading below-threshold nodes with the first defined phase
    if let Some(first) = modulus.iter().position(|&u| u > thr) {
        for j in 0..first {
            phase[j] = phase[first];
        }
    }
    let charge: f64 = state
        .psit
        .iter()
        .zip(&state.psi)
        .zip(&w)
        .map(|((pt, p), w)| w * (pt * p.conj()).im)
        .sum();
    Ok(PolarDecomp {
        modulus,
        phase,
        omega_tilde: -charge / mass,
    })
}

/// Frequency that projects the state's polar pair onto the charge-C level
/// set: omega_tilde * C / charge(state).
pub fn project_omega(state: &FieldState, c: f64) -> Result<f64> {
    let polar = polar_decompose(state)?;
    let w = state.geometry.weights();
    let charge: f64 = state
        .psit
        .iter()
        .zip(&state.psi)
        .zip(&w)
        .map(|((pt, p), w)| w * (pt * p.conj()).im)
        .sum();
    if charge == 0.0 {
        return Err(Error::Domain("cannot project a state with zero charge".into()));
    }
    Ok(polar.omega_tilde * c / charge)
}

/// Energy of the pair (u, omega) evaluated with the geometry's quadrature;
/// the line-side counterpart of the radial energy functional.
pub fn pair_energy_on_geometry(
    u: &[f64],
    omega: f64,
    geom: &Geometry,
    pot: &ScalarPotential,
) -> Result<f64> {
    let w = geom.weights();
    let grad = real_gradient(geom, u);
    let mut e = 0.0;
    for j in 0..u.len() {
        e += w[j] * (0.5 * grad[j] * grad[j] + 0.5 * omega * omega * u[j] * u[j] + pot.eval(u[j].abs())?.w);
    }
    Ok(e)
}

struct ShiftView<'a> {
    data: &'a [Complex64],
    periodic: bool,
}

impl ShiftView<'_> {
    #[inline]
    fn get(&self, j: isize, n: isize) -> Complex64 {
        if self.periodic {
            let idx = j.rem_euclid(n);
            self.data[idx as usize]
        } else if (0..n).contains(&j) {
            self.data[j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// Distance from a state to the orbit of a standing wave: minimum over grid
/// translations and a global phase of
/// || psi(.+y) e^{-i theta} - u ||_{H1} + || psi_t(.+y) e^{-i theta} + i omega u ||_{L2}.
/// The translation scan is over integer shifts with one parabolic sub-grid
/// refinement; the optimal phase per shift is closed form.
pub fn orbital_distance(state: &FieldState, sw: &StandingWave) -> Result<f64> {
    match &state.geometry {
        Geometry::Line(l) => {
            if sw.profile.grid.dim() != 1 {
                return Err(Error::Argument("orbital distance needs a 1d profile on a line".into()));
            }
            orbital_distance_line(state, sw, l)
        }
        Geometry::Radial(g) => {
            if !g.same_as(&sw.profile.grid) {
                return Err(Error::Argument(
                    "orbital distance on radial geometry needs matching grids".into(),
                ));
            }
            // no translations in the radial reduction: phase only
            let n = state.psi.len();
            let u = sw.profile.values();
            let w = state.geometry.weights();
            let gpsi = complex_gradient(&state.geometry, &state.psi);
            let gu = real_gradient(&state.geometry, u);
            let mut z = Complex64::new(0.0, 0.0);
            for j in 0..n {
                z += w[j] * (state.psi[j] * u[j] + gpsi[j] * gu[j]);
                z += w[j] * state.psit[j] * Complex64::new(0.0, sw.omega * u[j]).conj();
            }
            let theta = z.arg();
            Ok(direct_distance(state, sw, &gpsi, &gu, 0, theta))
        }
    }
}

fn direct_distance(
    state: &FieldState,
    sw: &StandingWave,
    gpsi: &[Complex64],
    gu: &[f64],
    shift: isize,
    theta: f64,
) -> f64 {
    let n = state.psi.len() as isize;
    let w = state.geometry.weights();
    let periodic = matches!(
        &state.geometry,
        Geometry::Line(LineGeometry { boundary: Boundary::Periodic, .. })
    );
    let psi = ShiftView { data: &state.psi, periodic };
    let psit = ShiftView { data: &state.psit, periodic };
    let gpsi = ShiftView { data: gpsi, periodic };
    let rot = Complex64::from_polar(1.0, -theta);
    let u: Vec<f64> = match &state.geometry {
        Geometry::Line(l) => (0..l.n).map(|j| sw.profile.interp(l.x(j))).collect(),
        Geometry::Radial(_) => sw.profile.values().to_vec(),
    };
    let mut h1 = 0.0;
    let mut l2 = 0.0;
    for j in 0..n {
        let ju = j as usize;
        let dv = psi.get(j + shift, n) * rot - u[ju];
        let dg = gpsi.get(j + shift, n) * rot - gu[ju];
        let dt = psit.get(j + shift, n) * rot + Complex64::new(0.0, sw.omega * u[ju]);
        h1 += w[ju] * (dv.norm_sqr() + dg.norm_sqr());
        l2 += w[ju] * dt.norm_sqr();
    }
    h1.max(0.0).sqrt() + l2.max(0.0).sqrt()
}

fn orbital_distance_line(state: &FieldState, sw: &StandingWave, l: &LineGeometry) -> Result<f64> {
    let n = l.n as isize;
    let w = state.geometry.weights();
    let u: Vec<f64> = (0..l.n).map(|j| sw.profile.interp(l.x(j))).collect();
    let geometry = &state.geometry;
    let gpsi = complex_gradient(geometry, &state.psi);
    let gu = real_gradient(geometry, &u);
    let periodic = l.boundary == Boundary::Periodic;
    let psi = ShiftView { data: &state.psi, periodic };
    let psit = ShiftView { data: &state.psit, periodic };
    let gpsi_v = ShiftView { data: &gpsi, periodic };

    // squared norms entering every shift
    let mut npsi = 0.0;
    let mut nu = 0.0;
    let mut npsit = 0.0;
    let mut nou = 0.0;
    for j in 0..l.n {
        npsi += w[j] * (state.psi[j].norm_sqr() + gpsi[j].norm_sqr());
        nu += w[j] * (u[j] * u[j] + gu[j] * gu[j]);
        npsit += w[j] * state.psit[j].norm_sqr();
        nou += w[j] * sw.omega * sw.omega * u[j] * u[j];
    }

    // correlation scan: optimal phase is the argument of Z(s)
    let mut best_s = 0isize;
    let mut best_val = f64::INFINITY;
    for s in 0..n {
        let mut z1 = Complex64::new(0.0, 0.0);
        let mut z2 = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let ju = j as usize;
            if u[ju] == 0.0 && gu[ju] == 0.0 {
                continue;
            }
            z1 += w[ju] * (psi.get(j + s, n) * u[ju] + gpsi_v.get(j + s, n) * gu[ju]);
            // conj(-i omega u) = i omega u
            z2 += w[ju] * psit.get(j + s, n) * Complex64::new(0.0, sw.omega * u[ju]);
        }
        let z = z1 + z2;
        let theta = z.arg();
        let rot = Complex64::from_polar(1.0, -theta);
        let p1 = (npsi + nu - 2.0 * (rot * z1).re).max(0.0).sqrt();
        let p2 = (npsit + nou - 2.0 * (rot * z2).re).max(0.0).sqrt();
        let val = p1 + p2;
        if val < best_val {
            best_val = val;
            best_s = s;
        }
    }

    // direct evaluation around the best shift kills the cancellation error
    // of the correlation form, then one parabolic refinement
    let eval_at = |s: isize| -> f64 {
        let mut z = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let ju = j as usize;
            z += w[ju] * (psi.get(j + s, n) * u[ju] + gpsi_v.get(j + s, n) * gu[ju]);
            z += w[ju] * psit.get(j + s, n) * Complex64::new(0.0, sw.omega * u[ju]);
        }
        direct_distance(state, sw, &gpsi, &gu, s, z.arg())
    };
    let d0 = eval_at(best_s);
    let dm = eval_at(best_s - 1);
    let dp = eval_at(best_s + 1);
    let denom = dp - 2.0 * d0 + dm;
    let refined = if denom > 1e-30 {
        let delta = dp - dm;
        (d0 - delta * delta / (8.0 * denom)).max(0.0)
    } else {
        d0
    };
    Ok(refined.min(d0).min(dm).min(dp))
}

/// Lyapunov function of the ground-state set:
/// (E(state) - m_c)^2 + (C(state) - C)^2.
pub fn lyapunov_v(state: &FieldState, m_c: f64, c: f64, pot: &ScalarPotential) -> Result<f64> {
    let cons = conserved(state, pot)?;
    Ok((cons.energy - m_c).powi(2) + (cons.charge - c).powi(2))
}

/// References recorded along a trajectory.
#[derive(Debug, Clone)]
pub struct RecordRefs<'a> {
    /// Standing wave whose orbit distances are recorded.
    pub orbit: Option<&'a StandingWave>,
    /// (m_c, C) pair for the Lyapunov function.
    pub lyapunov: Option<(f64, f64)>,
}

impl Default for RecordRefs<'_> {
    fn default() -> Self {
        RecordRefs {
            orbit: None,
            lyapunov: None,
        }
    }
}

/// Evolve `steps` leapfrog steps, recording every `stride` steps (plus the
/// initial and final instants). On blow-up the partial series is returned
/// with the failure time set.
pub fn evolve_recorded(
    state: &mut FieldState,
    pot: &ScalarPotential,
    dt: f64,
    steps: usize,
    stride: usize,
    refs: &RecordRefs<'_>,
) -> Result<TrajectorySeries> {
    let stride = stride.max(1);
    let mut series = TrajectorySeries::default();
    let record = |state: &FieldState, series: &mut TrajectorySeries| -> Result<()> {
        let cons = conserved(state, pot)?;
        let orbital = match refs.orbit {
            Some(sw) => Some(orbital_distance(state, sw)?),
            None => None,
        };
        let lyap = match refs.lyapunov {
            Some((m_c, c)) => Some((cons.energy - m_c).powi(2) + (cons.charge - c).powi(2)),
            None => None,
        };
        let max_abs = state.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        series.points.push(TrajectoryPoint {
            t: state.time,
            energy: cons.energy,
            charge: cons.charge,
            momentum: cons.momentum,
            ergocenter_velocity: cons.ergocenter_velocity,
            orbital_distance: orbital,
            lyapunov: lyap,
            max_abs_psi: max_abs,
        });
        Ok(())
    };
    record(state, &mut series)?;
    for i in 1..=steps {
        match step(state, dt, pot) {
            Ok(()) => {}
            Err(Error::BlowUp { time }) => {
                series.blow_up_time = Some(time);
                return Ok(series);
            }
            Err(e) => return Err(e),
        }
        if i % stride == 0 || i == steps {
            record(state, &mut series)?;
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals;
    use crate::grid::Profile;
    use crate::potential::{saturate, ScalarPotential};
    use approx::assert_relative_eq;

    fn sat4() -> ScalarPotential {
        saturate(&ScalarPotential::power(4.0).unwrap(), 1.2).unwrap()
    }

    fn sech_wave(omega: f64, r_max: f64, nodes: usize) -> StandingWave {
        let grid = RadialGrid::uniform(1, r_max, nodes).unwrap();
        let k = (1.0 - omega * omega).sqrt();
        let amp = (2.0 * (1.0 - omega * omega)).sqrt();
        let u = grid.nodes().iter().map(|&r| amp / (k * r).cosh()).collect();
        StandingWave::new(Profile::new(grid, u).unwrap(), omega).unwrap()
    }

    fn matched_line(r_max: f64, h: f64) -> Geometry {
        Geometry::Line(LineGeometry::symmetric_box(r_max, h, Boundary::Periodic).unwrap())
    }

    #[test]
    fn embed_matches_radial_functionals() {
        let sw = sech_wave(0.8, 40.0, 2001);
        let geom = matched_line(40.0, 0.02);
        let state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let cons = conserved(&state, &sat4()).unwrap();
        let e_y = functionals::energy(&sw, &sat4()).unwrap();
        let c_y = functionals::charge(&sw);
        assert!((cons.energy - e_y).abs() < 1e-10 * e_y.abs().max(1.0));
        assert!((cons.charge - c_y).abs() < 1e-10 * c_y.abs().max(1.0));
        assert!(cons.momentum.abs() < 1e-12);
        assert_eq!(cons.ergocenter_velocity, cons.momentum / cons.energy);
        // periodicity of the embedding
        let again = embed_standing_wave(&sw, 2.0 * std::f64::consts::PI / 0.8, &geom).unwrap();
        let sup = state
            .psi
            .iter()
            .zip(&again.psi)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-12);
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let geom = matched_line(10.0, 0.05);
        let mut state = FieldState {
            psi: vec![Complex64::new(0.0, 0.0); geom.len()],
            psit: vec![Complex64::new(0.0, 0.0); geom.len()],
            geometry: geom,
            time: 0.0,
        };
        step(&mut state, 0.02, &sat4()).unwrap();
        assert!(state.psi.iter().all(|z| z.norm() == 0.0));
        let cons = conserved(&state, &sat4()).unwrap();
        assert_eq!(cons.energy, 0.0);
        assert_eq!(cons.charge, 0.0);
        assert_eq!(cons.ergocenter_velocity, 0.0);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let sw = sech_wave(0.8, 10.0, 501);
        let geom = matched_line(10.0, 0.02);
        let mut state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        assert!(matches!(
            step(&mut state, 0.02, &sat4()),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn standing_wave_short_evolution_tracks_the_phase() {
        let sw = sech_wave(0.8, 40.0, 2001);
        let geom = matched_line(40.0, 0.02);
        let mut state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let dt = 0.01;
        for _ in 0..200 {
            step(&mut state, dt, &sat4()).unwrap();
        }
        let exact = embed_standing_wave(&sw, state.time, &geom).unwrap();
        let sup = state
            .psi
            .iter()
            .zip(&exact.psi)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(sup < 2e-4, "sup deviation {sup}");
    }

    #[test]
    fn plane_wave_dispersion_on_linear_potential() {
        // psi = e^{i(kx - w t)} with w^2 = 1 + k^2 solves the linear equation
        let geom = matched_line(40.0, 0.02);
        let Geometry::Line(l) = &geom else { unreachable!() };
        let k = 2.0 * std::f64::consts::PI * 10.0 / 80.0;
        let w = (1.0 + k * k).sqrt();
        let lin = ScalarPotential::linear();
        let mut state = FieldState {
            psi: (0..l.n)
                .map(|j| Complex64::from_polar(1.0, k * l.x(j)))
                .collect(),
            psit: (0..l.n)
                .map(|j| Complex64::from_polar(w, k * l.x(j) - std::f64::consts::FRAC_PI_2))
                .collect(),
            geometry: geom.clone(),
            time: 0.0,
        };
        let dt = 0.01;
        for _ in 0..500 {
            step(&mut state, dt, &lin).unwrap();
        }
        let t = state.time;
        let sup = (0..l.n)
            .map(|j| (state.psi[j] - Complex64::from_polar(1.0, k * l.x(j) - w * t)).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-3, "plane wave phase error {sup}");
    }

    #[test]
    fn reversibility() {
        let sw = sech_wave(0.8, 20.0, 1001);
        let geom = matched_line(20.0, 0.02);
        let mut state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let orig = state.clone();
        for _ in 0..50 {
            step(&mut state, 0.01, &sat4()).unwrap();
        }
        for _ in 0..50 {
            step(&mut state, -0.01, &sat4()).unwrap();
        }
        let sup = state
            .psi
            .iter()
            .zip(&orig.psi)
            .chain(state.psit.iter().zip(&orig.psit))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-12, "round trip deviation {sup}");
        assert!(state.time.abs() < 1e-12);
    }

    #[test]
    fn boost_construction() {
        let sw = sech_wave(0.8, 40.0, 2001);
        let geom = matched_line(40.0, 0.02);
        // v = 0 reduces to the embedding
        let b0 = boost(&sw, 0.0, &geom, 0.0).unwrap();
        let e0 = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let sup = b0
            .psi
            .iter()
            .zip(&e0.psi)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-12);
        // carried frequency and wavenumber
        let gamma = 1.0 / (1.0f64 - 0.25).sqrt();
        assert_relative_eq!(gamma * 0.8, 0.9237604307034013, epsilon = 1e-12);
        assert_relative_eq!(gamma * 0.8 * 0.5, 0.46188021535170065, epsilon = 1e-12);
        // measured ergocenter velocity
        let b = boost(&sw, 0.5, &geom, 0.0).unwrap();
        let cons = conserved(&b, &sat4()).unwrap();
        assert!((cons.ergocenter_velocity - 0.5).abs() < 1e-2);
        assert!(boost(&sw, 1.0, &geom, 0.0).is_err());
    }

    #[test]
    fn polar_of_embedding() {
        let sw = sech_wave(0.8, 40.0, 2001);
        let geom = matched_line(40.0, 0.02);
        let state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let polar = polar_decompose(&state).unwrap();
        assert!((polar.omega_tilde - 0.8).abs() < 1e-10);
        assert!(polar.phase.iter().all(|&s| s.abs() < 1e-12));
        // at a later time the phase is uniform and omega_tilde is unchanged
        let state = embed_standing_wave(&sw, 1.7, &geom).unwrap();
        let polar = polar_decompose(&state).unwrap();
        assert!((polar.omega_tilde - 0.8).abs() < 1e-10);
        // defining identity: charge = -omega_tilde * int u^2
        let w = state.geometry.weights();
        let mass: f64 = polar.modulus.iter().zip(&w).map(|(u, w)| w * u * u).sum();
        let cons = conserved(&state, &sat4()).unwrap();
        assert!((cons.charge + polar.omega_tilde * mass).abs() < 1e-12 * cons.charge.abs());
    }

    #[test]
    fn projection_fixes_the_charge() {
        let sw = sech_wave(0.8, 40.0, 2001);
        let geom = matched_line(40.0, 0.02);
        let state = embed_standing_wave(&sw, 0.3, &geom).unwrap();
        let polar = polar_decompose(&state).unwrap();
        let target = -1.95;
        let omega = project_omega(&state, target).unwrap();
        let w = state.geometry.weights();
        let mass: f64 = polar.modulus.iter().zip(&w).map(|(u, w)| w * u * u).sum();
        assert!((-omega * mass - target).abs() < 1e-12);
        // a state already on the level set keeps omega_tilde
        let cons = conserved(&state, &sat4()).unwrap();
        let same = project_omega(&state, cons.charge).unwrap();
        assert_relative_eq!(same, polar.omega_tilde, epsilon = 1e-12);
    }

    #[test]
    fn orbital_distance_vanishes_on_the_orbit() {
        let sw = sech_wave(0.8, 20.0, 1001);
        let geom = matched_line(20.0, 0.02);
        for t in [0.0, 0.9, 4.4] {
            let state = embed_standing_wave(&sw, t, &geom).unwrap();
            let d = orbital_distance(&state, &sw).unwrap();
            assert!(d <= 1e-8, "distance {d} at t = {t}");
        }
        // grid-aligned translation by 3.7
        let mut state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let shift = (3.7 / 0.02_f64).round() as usize;
        state.psi.rotate_right(shift);
        state.psit.rotate_right(shift);
        let d = orbital_distance(&state, &sw).unwrap();
        assert!(d <= 1e-8, "translated distance {d}");
        // global phase invariance
        let rot = Complex64::from_polar(1.0, 1.234);
        for v in state.psi.iter_mut().chain(state.psit.iter_mut()) {
            *v *= rot;
        }
        let d2 = orbital_distance(&state, &sw).unwrap();
        assert!((d2 - d).abs() <= 1e-8, "phase changed the distance: {d} vs {d2}");
    }

    #[test]
    fn orbital_distance_of_perturbation_is_order_eps() {
        let sw = sech_wave(0.8, 20.0, 1001);
        let geom = matched_line(20.0, 0.02);
        let mut state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let Geometry::Line(l) = &geom else { unreachable!() };
        // normalized H1 bump
        let bump: Vec<f64> = (0..l.n).map(|j| (-l.x(j) * l.x(j) / 8.0).exp()).collect();
        let gb = real_gradient(&geom, &bump);
        let w = geom.weights();
        let norm: f64 = (0..l.n)
            .map(|j| w[j] * (bump[j] * bump[j] + gb[j] * gb[j]))
            .sum::<f64>()
            .sqrt();
        let eps = 0.01;
        for j in 0..l.n {
            state.psi[j] += eps * bump[j] / norm;
        }
        let d = orbital_distance(&state, &sw).unwrap();
        assert!(d > 0.0 && d <= 2.0 * eps, "distance {d}");
    }

    #[test]
    fn lyapunov_zero_on_ground_state_embedding() {
        let sw = sech_wave(0.8, 40.0, 2001);
        let geom = matched_line(40.0, 0.02);
        let state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let cons = conserved(&state, &sat4()).unwrap();
        let v = lyapunov_v(&state, cons.energy, cons.charge, &sat4()).unwrap();
        assert!(v <= 1e-10);
    }

    #[test]
    fn blow_up_detection() {
        let geom = matched_line(10.0, 0.05);
        let n = geom.len();
        let mut state = FieldState {
            psi: vec![Complex64::new(1e200, 0.0); n],
            psit: vec![Complex64::new(0.0, 0.0); n],
            geometry: geom,
            time: 0.0,
        };
        // power-law force on a huge field overflows to infinity in one kick
        let err = step(&mut state, 0.02, &ScalarPotential::power(4.0).unwrap());
        assert!(matches!(err, Err(Error::BlowUp { .. })), "{err:?}");
    }

    #[test]
    fn radial_evolution_conserves_energy() {
        let grid = RadialGrid::uniform(3, 20.0, 1001).unwrap();
        let geom = Geometry::Radial(grid.clone());
        let u: Vec<f64> = grid.nodes().iter().map(|&r| 0.3 * (-r * r / 4.0).exp()).collect();
        let sw = StandingWave::new(Profile::new(grid, u).unwrap(), 0.9).unwrap();
        let mut state = embed_standing_wave(&sw, 0.0, &geom).unwrap();
        let pot = sat4();
        let e0 = conserved(&state, &pot).unwrap().energy;
        for _ in 0..500 {
            step(&mut state, 0.01, &pot).unwrap();
        }
        let e1 = conserved(&state, &pot).unwrap().energy;
        assert!((e1 - e0).abs() < 1e-4 * e0.abs(), "radial drift {}", (e1 - e0).abs());
    }
}
