//! Experiment orchestration: dispersion curves, the convexity stability
//! test, charge-threshold estimation, all-charge witnesses and the
//! dynamical perturbation experiment.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    self, Boundary, FieldState, Geometry, LineGeometry, RecordRefs,
};
use crate::error::{Error, Result};
use crate::functionals::{self, StandingWave};
use crate::grid::RadialGrid;
use crate::groundstate::{self, GroundState, ShootOptions};
use crate::potential::{self, ScalarPotential};
use crate::report::TrajectorySeries;

/// One frequency sample of the ground-state branch.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionRow {
    pub omega: f64,
    pub charge: f64,
    pub energy: f64,
    /// d(omega) = E + omega C; convexity in omega decides stability.
    pub d: f64,
    pub lambda: f64,
}

/// d(omega) samples plus the per-frequency failures.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionTable {
    pub potential: String,
    pub dimension: u32,
    pub grid: String,
    pub rows: Vec<DispersionRow>,
    /// Frequencies where no ground state was found, with the reason.
    pub gaps: Vec<(f64, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct CurveOptions {
    pub shoot: ShootOptions,
    pub certify_tol: Option<f64>,
}

/// Ground-state branch over a frequency grid; failures become gaps rather
/// than errors. Sweep points are independent and run in parallel.
pub fn d_curve(
    pot: &ScalarPotential,
    omegas: &[f64],
    grid: &RadialGrid,
    opts: &CurveOptions,
) -> DispersionTable {
    let certify_tol = opts.certify_tol.unwrap_or(1e-4);
    let outcomes: Vec<(f64, std::result::Result<DispersionRow, String>)> = omegas
        .par_iter()
        .map(|&omega| {
            let out = groundstate::ground_state_for_omega(pot, omega, grid, &opts.shoot, certify_tol)
                .map(|gs| DispersionRow {
                    omega,
                    charge: gs.charge,
                    energy: gs.energy,
                    d: gs.energy + omega * gs.charge,
                    lambda: gs.lambda,
                })
                .map_err(|e| e.to_string());
            (omega, out)
        })
        .collect();
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for (omega, out) in outcomes {
        match out {
            Ok(row) => rows.push(row),
            Err(why) => gaps.push((omega, why)),
        }
    }
    rows.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    gaps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    DispersionTable {
        potential: pot.name().to_string(),
        dimension: grid.dim(),
        grid: format!("{} nodes on [0, {}]", grid.len(), grid.r_max()),
        rows,
        gaps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Outcome of a stability test, from either the convexity criterion or a
/// dynamical run (the unused evidence fields stay None).
#[derive(Debug, Clone, Serialize)]
pub struct StabilityVerdict {
    pub omega0: f64,
    pub verdict: Verdict,
    pub basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_second: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_used: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_orbital_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Central second difference of d at a table node; stable for d'' > tol,
/// unstable below -tol, inconclusive inside the band.
pub fn convexity_check(table: &DispersionTable, omega0: f64, tol: f64) -> Result<StabilityVerdict> {
    let rows = &table.rows;
    if rows.len() < 5 {
        return Err(Error::Argument("convexity check needs at least 5 table rows".into()));
    }
    let i = rows
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.omega - omega0)
                .abs()
                .partial_cmp(&(b.1.omega - omega0).abs())
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    if i < 2 || i + 2 >= rows.len() {
        return Err(Error::Argument(format!(
            "omega0 = {omega0} sits at the table edge; two neighbours are needed on each side"
        )));
    }
    let dl = rows[i].omega - rows[i - 1].omega;
    let dr = rows[i + 1].omega - rows[i].omega;
    if (dl - dr).abs() > 1e-9 * dl.abs() {
        return Err(Error::Argument("convexity check needs uniform omega spacing".into()));
    }
    let d2 = (rows[i + 1].d - 2.0 * rows[i].d + rows[i - 1].d) / (dl * dl);
    let verdict = if d2 > tol {
        Verdict::Stable
    } else if d2 < -tol {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    };
    Ok(StabilityVerdict {
        omega0: rows[i].omega,
        verdict,
        basis: "shatah-convexity".into(),
        d_second: Some(d2),
        epsilon_used: None,
        horizon: None,
        max_orbital_distance: None,
        note: None,
    })
}

/// Charge level above which the flat-top family certifies existence.
#[derive(Debug, Clone, Serialize)]
pub struct ChargeThreshold {
    /// |C| of the first family member with energy/charge ratio below 1.
    pub c0: f64,
    /// Plateau radius of that member.
    pub radius: f64,
    /// Frequency sqrt(alpha) minimizing the ratio for the member.
    pub omega: f64,
    pub lambda: f64,
    /// Plateau height (the near-minimizer of W(s)/(s^2/2)).
    pub plateau_value: f64,
}

impl ChargeThreshold {
    /// Rebuild the witness pair on a grid.
    pub fn witness(&self, grid: &RadialGrid) -> Result<StandingWave> {
        let profile = functionals::plateau_profile(self.plateau_value, self.radius, grid)?;
        StandingWave::new(profile, self.omega)
    }
}

/// Sweep the flat-top family u_R at the ratio-minimizing frequency
/// omega_R = sqrt(alpha(u_R)) until the energy/charge ratio drops below 1;
/// the charge there is the threshold C0. Fails when the potential does not
/// satisfy the alpha_0 < 1 hypothesis.
pub fn charge_threshold(pot: &ScalarPotential, grid: &RadialGrid) -> Result<ChargeThreshold> {
    // plateau height: near-minimizer of the ratio on a fine scan
    let mut r0 = 1.0;
    let mut best = f64::INFINITY;
    for i in 1..=10_000 {
        let s = i as f64 * 1e-3;
        let ratio = pot.eval(s)?.w / (0.5 * s * s);
        if ratio < best {
            best = ratio;
            r0 = s;
        }
    }
    let mut radius = 0.5;
    while radius + 1.0 < grid.r_max() {
        let profile = functionals::plateau_profile(r0, radius, grid)?;
        let a = functionals::alpha(&profile, pot)?;
        if a > 0.0 {
            let omega = a.sqrt();
            let sw = StandingWave::new(profile, omega)?;
            let lambda = functionals::lambda_ratio(&sw, pot)?;
            if lambda < 1.0 {
                let c0 = functionals::charge(&sw).abs();
                return Ok(ChargeThreshold {
                    c0,
                    radius,
                    omega,
                    lambda,
                    plateau_value: r0,
                });
            }
        }
        radius += 0.5;
    }
    Err(Error::Hypothesis(format!(
        "{}: the energy/charge ratio of the flat-top family never drops below 1 up to radius {:.1}; the alpha_0 < 1 condition fails",
        pot.name(),
        grid.r_max() - 1.0
    )))
}

/// Witness standing wave of prescribed charge C < 0 at frequency 1, built
/// from the mass-invariant family; requires the strengthened near-zero
/// hypothesis (checked for the grid's dimension).
pub fn witness_all_charges(
    pot: &ScalarPotential,
    c: f64,
    grid: &RadialGrid,
) -> Result<StandingWave> {
    if !(c < 0.0) {
        return Err(Error::Argument(format!("witness construction needs C < 0, got {c}")));
    }
    let report = potential::check_hypotheses(pot, &potential::default_check_grid(), grid.dim())?;
    if !report.h0.ok || !report.h1_prime.ok {
        return Err(Error::Hypothesis(format!(
            "{}: strengthened near-zero condition fails for N = {} ({})",
            pot.name(),
            grid.dim(),
            report
                .h1_prime
                .note
                .clone()
                .unwrap_or_else(|| format!("eps = {}", report.h1_prime.value)),
        )));
    }
    // gamma is fixed by the charge alone: the family has R-independent mass
    let probe = functionals::scaled_plateau(1.0, grid.r_max() / 4.0, grid)?;
    let unit_mass = probe.mass();
    let gamma = (c.abs() / unit_mass).sqrt();

    let mut radius = 1.0;
    while 2.0 * radius <= grid.r_max() {
        let profile = functionals::scaled_plateau(gamma, radius, grid)?;
        let j = functionals::functional_j(&profile, pot)?;
        if j < 0.0 {
            // recompute gamma on this member for an exact charge match
            let unit = functionals::scaled_plateau(1.0, radius, grid)?;
            let gamma_exact = (c.abs() / unit.mass()).sqrt();
            let profile = functionals::scaled_plateau(gamma_exact, radius, grid)?;
            let sw = StandingWave::new(profile, 1.0)?;
            debug_assert!((functionals::charge(&sw) - c).abs() <= 1e-9 * c.abs());
            return Ok(sw);
        }
        radius *= 1.5;
    }
    Err(Error::NoSolution(format!(
        "reduced functional never went negative for the scaled family up to radius {:.1}; a larger grid is needed",
        grid.r_max() / 2.0
    )))
}

/// Fixed perturbation recipes for reproducible experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    /// Real bump added to the field modulus.
    ModulusBump,
    /// Position-dependent phase rotation of field and velocity.
    PhaseRipple,
    /// Real bump added to the field velocity.
    VelocityKick,
}

impl PerturbationKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bump" | "modulus-bump" => Ok(PerturbationKind::ModulusBump),
            "ripple" | "phase-ripple" => Ok(PerturbationKind::PhaseRipple),
            "kick" | "velocity-kick" => Ok(PerturbationKind::VelocityKick),
            other => Err(Error::Argument(format!(
                "unknown perturbation kind '{other}' (use bump, ripple or kick)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    /// Perturbation size in the product norm (must stay below 0.1).
    pub eps: f64,
    pub horizon: f64,
    /// Stability bound: stable iff sup_t distance <= k_factor * eps.
    pub k_factor: f64,
    /// Time step as a fraction of the grid spacing (CFL requires <= 0.5).
    pub dt_factor: f64,
    /// Target number of recorded instants.
    pub records: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            eps: 0.01,
            horizon: 50.0,
            k_factor: 10.0,
            dt_factor: 0.5,
            records: 50,
        }
    }
}

/// Perturbation run outcome: the verdict plus the recorded series.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub verdict: StabilityVerdict,
    pub series: TrajectorySeries,
}

/// Apply a fixed perturbation recipe of product-norm size eps to a state.
pub fn apply_perturbation(
    state: &mut FieldState,
    kind: PerturbationKind,
    eps: f64,
) -> Result<()> {
    if eps == 0.0 {
        return Ok(());
    }
    let Geometry::Line(l) = &state.geometry else {
        return Err(Error::Argument("perturbation recipes are defined on line geometry".into()));
    };
    let n = l.n;
    let xs: Vec<f64> = (0..n).map(|j| l.x(j)).collect();
    let mut dpsi = vec![Complex64::new(0.0, 0.0); n];
    let mut dpsit = vec![Complex64::new(0.0, 0.0); n];
    match kind {
        PerturbationKind::ModulusBump => {
            for j in 0..n {
                let b = (-xs[j] * xs[j] / 8.0).exp();
                let a = state.psi[j].norm();
                let dir = if a > 1e-14 {
                    state.psi[j] / a
                } else {
                    Complex64::new(1.0, 0.0)
                };
                dpsi[j] = dir * b;
            }
        }
        PerturbationKind::PhaseRipple => {
            for j in 0..n {
                let phi = (-xs[j] * xs[j] / 8.0).exp() * (0.5 * xs[j]).cos();
                let i_phi = Complex64::new(0.0, phi);
                dpsi[j] = i_phi * state.psi[j];
                dpsit[j] = i_phi * state.psit[j];
            }
        }
        PerturbationKind::VelocityKick => {
            for j in 0..n {
                dpsit[j] = Complex64::new((-xs[j] * xs[j] / 8.0).exp(), 0.0);
            }
        }
    }
    // product norm ||dpsi||_{H1} + ||dpsit||_{L2}
    let w = state.geometry.weights();
    let grad = {
        let g = dynamics::real_gradient(&state.geometry, &dpsi.iter().map(|z| z.re).collect::<Vec<_>>());
        let gi = dynamics::real_gradient(&state.geometry, &dpsi.iter().map(|z| z.im).collect::<Vec<_>>());
        g.into_iter().zip(gi).map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>()
    };
    let mut h1 = 0.0;
    let mut l2 = 0.0;
    for j in 0..n {
        h1 += w[j] * (dpsi[j].norm_sqr() + grad[j].norm_sqr());
        l2 += w[j] * dpsit[j].norm_sqr();
    }
    let size = h1.max(0.0).sqrt() + l2.max(0.0).sqrt();
    if size <= 0.0 {
        return Err(Error::Argument("perturbation recipe produced a zero perturbation".into()));
    }
    let scale = eps / size;
    for j in 0..n {
        state.psi[j] += scale * dpsi[j];
        state.psit[j] += scale * dpsit[j];
    }
    Ok(())
}

/// Embed a certified ground state, perturb it, evolve to the horizon and
/// judge orbital stability by the recorded distance to the unperturbed
/// orbit. A finite run supports rather than proves stability; the verdict
/// is numerical evidence at the recorded tolerances.
pub fn perturbation_experiment(
    gs: &GroundState,
    pot: &ScalarPotential,
    geom: &Geometry,
    kind: PerturbationKind,
    opts: &ExperimentOptions,
) -> Result<ExperimentOutcome> {
    if !(opts.eps < 0.1) || opts.eps < 0.0 {
        return Err(Error::Argument(format!(
            "perturbation size must lie in [0, 0.1), got {}",
            opts.eps
        )));
    }
    if !gs.certified {
        return Err(Error::Argument(
            "perturbation experiment needs a certified ground state".into(),
        ));
    }
    if !(opts.dt_factor > 0.0 && opts.dt_factor <= 0.5) {
        return Err(Error::Argument("dt_factor must lie in (0, 0.5]".into()));
    }
    let mut state = dynamics::embed_standing_wave(&gs.sw, 0.0, geom)?;
    apply_perturbation(&mut state, kind, opts.eps)?;
    let h = geom.spacing()?;
    let dt = opts.dt_factor * h;
    let steps = (opts.horizon / dt).ceil() as usize;
    let stride = (steps / opts.records.max(1)).max(1);
    let refs = RecordRefs {
        orbit: Some(&gs.sw),
        lyapunov: Some((gs.energy, gs.charge)),
    };
    let series = dynamics::evolve_recorded(&mut state, pot, dt, steps, stride, &refs)?;
    let max_dist = series.max_orbital_distance().unwrap_or(0.0);
    let bound = opts.k_factor * opts.eps;
    let (verdict, note) = if series.blow_up_time.is_some() {
        (
            Verdict::Unstable,
            Some(format!(
                "field blow-up at t = {:.4}: instability evidence",
                series.blow_up_time.unwrap()
            )),
        )
    } else if opts.eps == 0.0 || max_dist <= bound {
        (Verdict::Stable, None)
    } else {
        (Verdict::Unstable, None)
    };
    Ok(ExperimentOutcome {
        verdict: StabilityVerdict {
            omega0: gs.sw.omega,
            verdict,
            basis: "dynamical-perturbation".into(),
            d_second: None,
            epsilon_used: Some(opts.eps),
            horizon: Some(opts.horizon),
            max_orbital_distance: Some(max_dist),
            note,
        },
        series,
    })
}

/// Default experiment geometry: periodic box matched to sech-type decay.
pub fn default_experiment_geometry(half_width: f64, h: f64) -> Result<Geometry> {
    Ok(Geometry::Line(LineGeometry::symmetric_box(
        half_width,
        h,
        Boundary::Periodic,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{saturate, ScalarPotential};

    fn sat4() -> ScalarPotential {
        saturate(&ScalarPotential::power(4.0).unwrap(), 1.2).unwrap()
    }

    fn exact_d(omega: f64) -> f64 {
        (4.0 / 3.0) * (1.0 - omega * omega).powf(1.5)
    }

    fn synthetic_table(lo: f64, hi: f64, step: f64) -> DispersionTable {
        let mut rows = Vec::new();
        let mut omega = lo;
        while omega <= hi + 1e-12 {
            let k = (1.0f64 - omega * omega).sqrt();
            let energy = 2.0 * k * (1.0 + omega * omega) - 2.0 / 3.0 * k.powi(3);
            let charge = -4.0 * omega * k;
            rows.push(DispersionRow {
                omega,
                charge,
                energy,
                d: energy + omega * charge,
                lambda: energy / charge.abs(),
            });
            omega += step;
        }
        DispersionTable {
            potential: "power(4)".into(),
            dimension: 1,
            grid: "synthetic".into(),
            rows,
            gaps: Vec::new(),
        }
    }

    #[test]
    fn convexity_signs_on_the_closed_form() {
        let table = synthetic_table(0.5, 0.95, 0.01);
        let stable = convexity_check(&table, 0.8, 1e-4).unwrap();
        assert_eq!(stable.verdict, Verdict::Stable);
        assert!(stable.d_second.unwrap() > 0.0);
        let unstable = convexity_check(&table, 0.6, 1e-4).unwrap();
        assert_eq!(unstable.verdict, Verdict::Unstable);
        // sign change within 0.01 of 1/sqrt(2)
        let mut flip = None;
        let mut omega = 0.52;
        while omega < 0.93 {
            let a = convexity_check(&table, omega, 1e-4).unwrap();
            let b = convexity_check(&table, omega + 0.01, 1e-4).unwrap();
            if a.d_second.unwrap() < 0.0 && b.d_second.unwrap() >= 0.0 {
                flip = Some(omega + 0.005);
                break;
            }
            omega += 0.01;
        }
        let flip = flip.expect("no sign change found");
        assert!((flip - std::f64::consts::FRAC_1_SQRT_2).abs() <= 0.01, "flip at {flip}");
        // table edge is rejected
        assert!(convexity_check(&table, 0.5, 1e-4).is_err());
    }

    #[test]
    fn d_curve_matches_the_sech_closed_form() {
        let grid = RadialGrid::uniform(1, 40.0, 2001).unwrap();
        let omegas = [0.6, 0.7, 0.8, 0.9];
        let table = d_curve(&sat4(), &omegas, &grid, &CurveOptions::default());
        assert!(table.gaps.is_empty(), "{:?}", table.gaps);
        for row in &table.rows {
            let rel = (row.d - exact_d(row.omega)).abs() / exact_d(row.omega);
            assert!(rel < 1e-3, "omega {}: rel error {rel}", row.omega);
            assert!(row.lambda < 1.0);
            // identity d = E + omega C against the stored columns
            assert!((row.d - (row.energy + row.omega * row.charge)).abs() < 1e-12);
        }
    }

    #[test]
    fn d_curve_records_gaps() {
        // saturated quartic has no soliton once the sech amplitude would
        // exceed the saturation level (omega below ~0.529)
        let grid = RadialGrid::uniform(1, 40.0, 1001).unwrap();
        let table = d_curve(&sat4(), &[0.4, 0.8], &grid, &CurveOptions::default());
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.gaps.len(), 1);
        assert_eq!(table.gaps[0].0, 0.4);
    }

    #[test]
    fn charge_threshold_for_double_well() {
        let grid = RadialGrid::uniform(1, 60.0, 3001).unwrap();
        let dw = ScalarPotential::double_well();
        let th = charge_threshold(&dw, &grid).unwrap();
        assert!(th.c0.is_finite() && th.c0 > 0.0);
        assert!(th.lambda < 1.0);
        assert!((th.plateau_value - 1.0).abs() < 2e-3);
        // AM-GM: omega = sqrt(alpha) minimizes the ratio, where it equals sqrt(alpha)
        let witness = th.witness(&grid).unwrap();
        let a = functionals::alpha(&witness.profile, &dw).unwrap();
        assert!((th.omega - a.sqrt()).abs() < 1e-9);
        assert!((th.lambda - a.sqrt()).abs() < 1e-9);
        // charge magnitude grows along the family beyond the threshold
        let mut last = th.c0;
        for extra in [2.0, 6.0, 14.0] {
            let p = functionals::plateau_profile(th.plateau_value, th.radius + extra, &grid).unwrap();
            let aa = functionals::alpha(&p, &dw).unwrap();
            let c = functionals::charge(&StandingWave::new(p, aa.sqrt()).unwrap()).abs();
            assert!(c > last, "charge not increasing: {c} after {last}");
            last = c;
        }
    }

    #[test]
    fn charge_threshold_rejects_linear() {
        let grid = RadialGrid::uniform(1, 40.0, 2001).unwrap();
        let err = charge_threshold(&ScalarPotential::linear(), &grid);
        assert!(matches!(err, Err(Error::Hypothesis(_))), "{err:?}");
    }

    #[test]
    fn witness_for_all_charges_in_1d() {
        let grid = RadialGrid::uniform(1, 90.0, 3001).unwrap();
        let pot = ScalarPotential::power(4.0).unwrap();
        let sw = witness_all_charges(&pot, -0.5, &grid).unwrap();
        assert_eq!(sw.omega, 1.0);
        assert!((functionals::charge(&sw) + 0.5).abs() < 1e-9);
        let lam = functionals::lambda_ratio(&sw, &pot).unwrap();
        assert!(lam < 1.0, "lambda = {lam}");
        // gamma scales like sqrt(|C|)
        let sw2 = witness_all_charges(&pot, -1.0, &grid).unwrap();
        let ratio = sw2.profile.max() / sw.profile.max();
        assert!((ratio - 2f64.sqrt()).abs() < 1e-6, "gamma ratio {ratio}");
    }

    #[test]
    fn witness_needs_the_strengthened_hypothesis() {
        // eps = 2 for the quartic exceeds 4/N already at N = 3
        let grid = RadialGrid::uniform(3, 40.0, 501).unwrap();
        let err = witness_all_charges(&ScalarPotential::power(4.0).unwrap(), -0.5, &grid);
        assert!(matches!(err, Err(Error::Hypothesis(_))), "{err:?}");
        let grid1 = RadialGrid::uniform(1, 40.0, 501).unwrap();
        let err = witness_all_charges(&ScalarPotential::linear(), -0.5, &grid1);
        assert!(matches!(err, Err(Error::Hypothesis(_))), "{err:?}");
    }

    #[test]
    fn short_perturbation_run_is_stable_at_stable_frequency() {
        let grid = RadialGrid::uniform(1, 20.0, 1001).unwrap();
        let gs = groundstate::ground_state_for_omega(
            &sat4(),
            0.8,
            &grid,
            &ShootOptions::default(),
            1e-3,
        )
        .unwrap();
        assert!(gs.certified);
        let geom = default_experiment_geometry(20.0, 0.02).unwrap();
        let opts = ExperimentOptions {
            horizon: 5.0,
            records: 10,
            ..ExperimentOptions::default()
        };
        let out =
            perturbation_experiment(&gs, &sat4(), &geom, PerturbationKind::ModulusBump, &opts).unwrap();
        assert_eq!(out.verdict.verdict, Verdict::Stable);
        assert!(out.verdict.max_orbital_distance.unwrap() <= 0.1);
        assert!(out.series.points.len() >= 10);
    }

    #[test]
    fn experiment_rejects_big_eps() {
        let grid = RadialGrid::uniform(1, 20.0, 501).unwrap();
        let gs = groundstate::ground_state_for_omega(
            &sat4(),
            0.8,
            &grid,
            &ShootOptions::default(),
            1e-2,
        )
        .unwrap();
        let geom = default_experiment_geometry(20.0, 0.04).unwrap();
        let opts = ExperimentOptions {
            eps: 0.5,
            ..ExperimentOptions::default()
        };
        assert!(perturbation_experiment(&gs, &sat4(), &geom, PerturbationKind::ModulusBump, &opts)
            .is_err());
    }
}
