//! Scalar potentials W(|psi|), hypothesis checks and the saturation wrapper.
//!
//! A potential is a C^2 function of the field modulus s >= 0, normalized so
//! that W(0) = W'(0) = 0 and W''(0) = 1. The remainder R(s) = W(s) - s^2/2
//! carries the nonlinearity; every diagnostic in this module is grid-based
//! because potentials are treated as black boxes.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Values of W and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub w: f64,
    pub dw: f64,
    pub ddw: f64,
}

type CustomFn = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// W(s) = s^2/2 - s^p/p
    Power { p: f64 },
    /// W(s) = s^2/2 (1 - s)^2
    DoubleWell,
    /// W(s) = s^2/2, the linear Klein-Gordon case
    Linear,
    /// Agrees with `inner` below `sbar`, monotone remainder above.
    Saturated { inner: Box<ScalarPotential>, blend: Blend },
    Custom(CustomFn),
}

/// Closed-form pieces of the saturation extension above sbar.
///
/// On [sbar, sbar+1] the remainder derivative is the smoothstep blend
/// sigma(x) * a + (1 - sigma(x)) * x with x = s - sbar,
/// sigma(x) = 1 - x^2 (3 - 2x) and a = max(R'(sbar), 0); beyond sbar + 1 it
/// is exactly x. The antiderivative is taken in closed form from R(sbar).
#[derive(Debug, Clone, Copy)]
struct Blend {
    sbar: f64,
    a: f64,
    r_sbar: f64,
}

impl Blend {
    fn remainder(&self, s: f64) -> (f64, f64, f64) {
        let x = s - self.sbar;
        if x <= 1.0 {
            let sigma = 1.0 - x * x * (3.0 - 2.0 * x);
            let dsigma = -6.0 * x * (1.0 - x);
            let r1 = sigma * self.a + (1.0 - sigma) * x;
            let r2 = dsigma * (self.a - x) + (1.0 - sigma);
            let r0 = self.r_sbar
                + self.a * (x - x.powi(3) + 0.5 * x.powi(4))
                + 0.75 * x.powi(4)
                - 0.4 * x.powi(5);
            (r0, r1, r2)
        } else {
            let r_end = self.r_sbar + 0.5 * self.a + 0.35;
            (r_end + 0.5 * (x * x - 1.0), x, 1.0)
        }
    }
}

/// Immutable scalar potential; safe to share across threads.
#[derive(Clone)]
pub struct ScalarPotential {
    kind: Kind,
    name: String,
    sbar: Option<f64>,
}

impl fmt::Debug for ScalarPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarPotential")
            .field("name", &self.name)
            .field("sbar", &self.sbar)
            .finish()
    }
}

impl ScalarPotential {
    /// W(s) = s^2/2 - s^p/p for p > 2.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 2.0) {
            return Err(Error::Argument(format!("power potential needs p > 2, got {p}")));
        }
        Ok(ScalarPotential {
            kind: Kind::Power { p },
            name: format!("power({p})"),
            sbar: None,
        })
    }

    pub fn double_well() -> Self {
        ScalarPotential {
            kind: Kind::DoubleWell,
            name: "double-well".into(),
            sbar: None,
        }
    }

    pub fn linear() -> Self {
        ScalarPotential {
            kind: Kind::Linear,
            name: "linear".into(),
            sbar: None,
        }
    }

    /// Black-box potential from a closure returning (W, W', W'').
    pub fn custom<F>(name: &str, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static,
    {
        ScalarPotential {
            kind: Kind::Custom(Arc::new(f)),
            name: name.into(),
            sbar: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Saturation level, when this potential was produced by [`saturate`].
    pub fn sbar(&self) -> Option<f64> {
        self.sbar
    }

    /// (W, W', W'') at modulus s >= 0.
    pub fn eval(&self, s: f64) -> Result<Evaluated> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("potential evaluated at negative s = {s}")));
        }
        let (w, dw, ddw) = match &self.kind {
            Kind::Power { p } => (
                0.5 * s * s - s.powf(*p) / p,
                s - s.powf(p - 1.0),
                1.0 - (p - 1.0) * s.powf(p - 2.0),
            ),
            Kind::DoubleWell => {
                let q = 1.0 - s;
                (
                    0.5 * s * s * q * q,
                    s * q * (1.0 - 2.0 * s),
                    1.0 - 6.0 * s + 6.0 * s * s,
                )
            }
            Kind::Linear => (0.5 * s * s, s, 1.0),
            Kind::Saturated { inner, blend } => {
                if s < blend.sbar {
                    let v = inner.eval(s)?;
                    (v.w, v.dw, v.ddw)
                } else {
                    let (r0, r1, r2) = blend.remainder(s);
                    (0.5 * s * s + r0, s + r1, 1.0 + r2)
                }
            }
            Kind::Custom(f) => f(s),
        };
        Ok(Evaluated { w, dw, ddw })
    }

    /// Remainder R = W - s^2/2 and derivatives, computed from `eval` along the
    /// same arithmetic path so that R == W - s^2/2 holds bitwise.
    pub fn remainder(&self, s: f64) -> Result<Evaluated> {
        let v = self.eval(s)?;
        Ok(Evaluated {
            w: v.w - 0.5 * s * s,
            dw: v.dw - s,
            ddw: v.ddw - 1.0,
        })
    }

    /// W'(psi) = F'(|psi|) psi / |psi| for complex fields, with the s -> 0
    /// limit W''(0) psi so the origin is regular.
    pub fn grad_complex(&self, z: Complex64) -> Result<Complex64> {
        let s = z.norm();
        if s < 1e-150 {
            return Ok(z * self.eval(0.0)?.ddw);
        }
        Ok(z * (self.eval(s)?.dw / s))
    }
}

/// Default check grid: 4096 log-spaced points on (1e-4, 10].
pub fn default_check_grid() -> Vec<f64> {
    log_grid(1e-4, 10.0, 4096)
}

/// Log-spaced grid on (lo, hi], endpoint included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (1..=n)
        .map(|i| (llo + (lhi - llo) * i as f64 / n as f64).exp())
        .collect()
}

/// Minimum over the grid of W(s) / (s^2/2); an upper bound for the infimum
/// alpha_0 that enters the existence condition.
pub fn estimate_alpha0(pot: &ScalarPotential, s_grid: &[f64]) -> Result<f64> {
    if s_grid.is_empty() {
        return Err(Error::Argument("alpha0 estimate needs a nonempty grid".into()));
    }
    if s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Argument("alpha0 grid must contain positive values only".into()));
    }
    let mut best = f64::INFINITY;
    for (i, &s) in s_grid.iter().enumerate() {
        let ratio = pot.eval(s)?.w / (0.5 * s * s);
        if !ratio.is_finite() {
            return Err(Error::Numeric {
                what: "alpha0 ratio is not finite".into(),
                node: i,
            });
        }
        best = best.min(ratio);
    }
    Ok(best)
}

/// One checked hypothesis: flag plus the measured quantity backing it.
#[derive(Debug, Clone, Serialize)]
pub struct Checked {
    pub ok: bool,
    pub value: f64,
    pub note: Option<String>,
}

impl Checked {
    fn new(ok: bool, value: f64) -> Self {
        Checked { ok, value, note: None }
    }

    fn with_note(ok: bool, value: f64, note: impl Into<String>) -> Self {
        Checked {
            ok,
            value,
            note: Some(note.into()),
        }
    }
}

/// Fitted growth bound |R''(s)| <= c1 s^(p-2) + c2 s^(q-2).
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub ok: bool,
    pub c1: f64,
    pub c2: f64,
    pub p: f64,
    pub q: f64,
    pub note: Option<String>,
}

/// Outcome of the grid-based hypothesis checks.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub potential: String,
    pub dimension: u32,
    /// W(0) = W'(0) = 0 and W''(0) = 1; value is the measured W''(0).
    pub h0: Checked,
    /// alpha_0 < 1; value is the (locally refined) grid estimate.
    pub h1: Checked,
    /// W >= 0 on the grid; value is the grid minimum of W.
    pub h2: Checked,
    /// Polynomial growth bound on R''.
    pub h3: GrowthFit,
    /// s^2/2 - W >= s^(2+eps) near zero with 0 < eps < 4/N; value is eps.
    pub h1_prime: Checked,
    /// Near-zero coercivity constant min_{0<s<=delta} W / (s^2/2).
    pub c1_near_zero: f64,
    pub grid_used: String,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    /// The existence hypotheses of the main theorem.
    pub fn admits_solitons(&self) -> bool {
        self.h0.ok && self.h1.ok && self.h2.ok
    }
}

fn log_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    // least squares of ln y against ln x; returns (slope, intercept, r2)
    if points.len() < 4 {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    let den = n * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / den;
    let intercept = (sy - slope * sx) / n;
    let ss_tot = syy - sy * sy / n;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let e = y.ln() - (slope * x.ln() + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot <= 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some((slope, intercept, r2))
}

/// Golden-section refinement of the ratio minimum around the grid argmin.
fn refine_ratio_min(pot: &ScalarPotential, lo: f64, hi: f64) -> Result<f64> {
    let ratio = |s: f64| -> Result<f64> { Ok(pot.eval(s)?.w / (0.5 * s * s)) };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = ratio(x1)?;
    let mut f2 = ratio(x2)?;
    for _ in 0..200 {
        if b - a < 1e-13 * (1.0 + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = ratio(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = ratio(x2)?;
        }
    }
    Ok(f1.min(f2))
}

fn tail_exponent(pts: &[(f64, f64)]) -> Option<f64> {
    // Fit the log-log slope on two sub-bands and extrapolate the 1/s
    // correction away; pre-asymptotic tails otherwise bias the exponent.
    if pts.len() < 12 {
        return log_fit(pts).map(|(m, _, _)| m);
    }
    let mid = pts.len() / 2;
    let (lo, hi) = pts.split_at(mid);
    let (m_lo, _, _) = log_fit(lo)?;
    let (m_hi, _, _) = log_fit(hi)?;
    let center = |band: &[(f64, f64)]| {
        let logs: f64 = band.iter().map(|p| p.0.ln()).sum();
        (logs / band.len() as f64).exp()
    };
    let (s_lo, s_hi) = (center(lo), center(hi));
    let denom = 1.0 / s_lo - 1.0 / s_hi;
    if denom.abs() < 1e-12 {
        return Some(m_hi);
    }
    Some(m_hi - (m_lo - m_hi) * (1.0 / s_hi) / denom)
}

/// Grid-based evaluation of hypotheses (H0)-(H3) and the strengthened
/// near-zero condition; inconclusive fits come back as false flags with a
/// note rather than errors.
pub fn check_hypotheses(
    pot: &ScalarPotential,
    s_grid: &[f64],
    dimension: u32,
) -> Result<HypothesisReport> {
    if s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Argument("hypothesis grid must be positive and nonempty".into()));
    }
    let s_max = s_grid.iter().cloned().fold(0.0, f64::max);
    if s_max < 2.0 {
        return Err(Error::Argument(format!(
            "hypothesis grid must reach s_max >= 2 (got {s_max})"
        )));
    }
    let mut grid: Vec<f64> = s_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut notes = Vec::new();

    // H0 by direct evaluation at zero.
    let at0 = pot.eval(0.0)?;
    let h0_ok = at0.w.abs() <= 1e-12 && at0.dw.abs() <= 1e-12 && (at0.ddw - 1.0).abs() <= 1e-9;
    let h0 = Checked::new(h0_ok, at0.ddw);

    // H1: grid minimum of the ratio, locally refined around the argmin.
    let mut best = f64::INFINITY;
    let mut best_i = 0;
    for (i, &s) in grid.iter().enumerate() {
        let ratio = pot.eval(s)?.w / (0.5 * s * s);
        if ratio < best {
            best = ratio;
            best_i = i;
        }
    }
    let lo = if best_i == 0 { grid[0] * 0.5 } else { grid[best_i - 1] };
    let hi = if best_i + 1 == grid.len() { grid[best_i] } else { grid[best_i + 1] };
    let alpha0 = best.min(refine_ratio_min(pot, lo, hi)?);
    let h1 = Checked::new(alpha0 < 1.0, alpha0);

    // H2: sign of W on the grid.
    let mut w_min = 0.0f64;
    for &s in &grid {
        w_min = w_min.min(pot.eval(s)?.w);
    }
    let h2 = Checked::new(w_min >= -1e-12, w_min);

    // H3: |R''| <= c1 s^(p-2) + c2 s^(q-2), exponents from log-log fits.
    let r2_abs: Vec<(f64, f64)> = grid
        .iter()
        .map(|&s| Ok((s, pot.remainder(s)?.ddw.abs())))
        .collect::<Result<_>>()?;
    let r2_max = r2_abs.iter().map(|p| p.1).fold(0.0, f64::max);
    let h3 = if r2_max < 1e-12 {
        GrowthFit {
            ok: true,
            c1: 0.0,
            c2: 0.0,
            p: 3.0,
            q: 3.0,
            note: Some("remainder vanishes on the grid".into()),
        }
    } else {
        let floor = 1e-12 * r2_max;
        let near: Vec<(f64, f64)> = r2_abs
            .iter()
            .filter(|&&(s, v)| s <= 0.05 && v > floor)
            .cloned()
            .collect();
        let tail: Vec<(f64, f64)> = r2_abs
            .iter()
            .filter(|&&(s, v)| s >= 2.0 && v > floor)
            .cloned()
            .collect();
        match (log_fit(&near), tail_exponent(&tail)) {
            (Some((m_near, _, r2n)), Some(m_tail)) if r2n > 0.95 => {
                let p = m_near + 2.0;
                let q = (m_tail + 2.0).max(p);
                let mut c1 = 0.0f64;
                let mut c2 = 0.0f64;
                for &(s, v) in &r2_abs {
                    if s <= 1.0 {
                        c1 = c1.max(v / s.powf(p - 2.0));
                    } else {
                        c2 = c2.max(v / s.powf(q - 2.0));
                    }
                }
                let critical = if dimension >= 3 {
                    2.0 * dimension as f64 / (dimension as f64 - 2.0)
                } else {
                    f64::INFINITY
                };
                let mut ok = p > 2.05 && q >= p;
                let mut note = None;
                if dimension >= 3 && q >= critical {
                    ok = false;
                    note = Some(format!(
                        "fitted q = {q:.3} reaches the critical exponent {critical:.3} for N = {dimension}"
                    ));
                } else if dimension <= 2 {
                    note = Some("q unconstrained above for N <= 2".into());
                }
                if p <= 2.05 {
                    note = Some(format!("near-zero exponent p = {p:.3} not above 2"));
                }
                GrowthFit { ok, c1, c2, p, q, note }
            }
            _ => GrowthFit {
                ok: false,
                c1: f64::NAN,
                c2: f64::NAN,
                p: f64::NAN,
                q: f64::NAN,
                note: Some("log-log fit of |R''| inconclusive".into()),
            },
        }
    };

    // H1': s^2/2 - W ~ c s^(2+eps) near zero with 0 < eps < 4/N. The
    // multiplicative constant is absorbable by shrinking the neighbourhood,
    // so only the exponent is constrained.
    let near_d: Vec<(f64, f64)> = grid
        .iter()
        .filter(|&&s| s <= 0.1)
        .map(|&s| Ok((s, -pot.remainder(s)?.w)))
        .collect::<Result<_>>()?;
    let h1_prime = if near_d.len() < 6 {
        Checked::with_note(false, f64::NAN, "too few grid points below 0.1")
    } else if near_d.iter().any(|&(_, d)| d <= 0.0) {
        Checked::with_note(false, f64::NAN, "s^2/2 - W is not strictly positive near zero")
    } else {
        match log_fit(&near_d) {
            Some((m, _, r2)) if r2 > 0.95 => {
                let eps = m - 2.0;
                let bound = 4.0 / dimension as f64;
                if eps > 1e-9 && eps < bound - 1e-9 {
                    Checked::new(true, eps)
                } else {
                    Checked::with_note(
                        false,
                        eps,
                        format!("fitted eps = {eps:.4} outside (0, {bound:.4})"),
                    )
                }
            }
            _ => Checked::with_note(false, f64::NAN, "near-zero power-law fit inconclusive"),
        }
    };

    // Coercivity constant over (0, delta] with delta = 0.1.
    let mut c1_near_zero = f64::INFINITY;
    for &s in grid.iter().filter(|&&s| s <= 0.1) {
        c1_near_zero = c1_near_zero.min(pot.eval(s)?.w / (0.5 * s * s));
    }
    if !c1_near_zero.is_finite() {
        notes.push("no grid points below delta = 0.1; coercivity constant unset".into());
        c1_near_zero = f64::NAN;
    }

    Ok(HypothesisReport {
        potential: pot.name().to_string(),
        dimension,
        h0,
        h1,
        h2,
        h3,
        h1_prime,
        c1_near_zero,
        grid_used: format!(
            "{} points on ({:.3e}, {:.3e}]",
            grid.len(),
            grid[0],
            grid[grid.len() - 1]
        ),
        notes,
    })
}

/// Replace the potential above `sbar` so that the remainder derivative is
/// nonnegative from `sbar` on, leaving everything below `sbar` untouched.
/// When the remainder is already nondecreasing past `sbar` the potential is
/// returned unchanged apart from recording the level.
pub fn saturate(pot: &ScalarPotential, sbar: f64) -> Result<ScalarPotential> {
    if !(sbar > 0.0) {
        return Err(Error::Argument(format!("saturation level must be positive, got {sbar}")));
    }
    let at0 = pot.eval(0.0)?;
    if at0.w.abs() > 1e-9 || at0.dw.abs() > 1e-9 || (at0.ddw - 1.0).abs() > 1e-6 {
        return Err(Error::Argument(
            "saturation requires a potential normalized at zero".into(),
        ));
    }
    // Already monotone above sbar? Then no modification is admissible or needed.
    let probe = log_grid(sbar, (2.0 * sbar + 10.0).max(10.0), 2048);
    let mut already = pot.remainder(sbar)?.dw >= -1e-12;
    if already {
        for &s in &probe {
            if pot.remainder(s)?.dw < -1e-12 {
                already = false;
                break;
            }
        }
    }
    if already {
        let mut out = pot.clone();
        out.sbar = Some(sbar);
        out.name = format!("saturate({}, {})", pot.name(), sbar);
        return Ok(out);
    }
    let rs = pot.remainder(sbar)?;
    let blend = Blend {
        sbar,
        a: rs.dw.max(0.0),
        r_sbar: rs.w,
    };
    Ok(ScalarPotential {
        kind: Kind::Saturated {
            inner: Box::new(pot.clone()),
            blend,
        },
        name: format!("saturate({}, {})", pot.name(), sbar),
        sbar: Some(sbar),
    })
}

/// Parse a potential spec: `power(p)`, `double-well`, `linear`, or
/// `saturate(inner, sbar)`.
pub fn parse_spec(spec: &str) -> Result<ScalarPotential> {
    let s = spec.trim();
    match s {
        "double-well" => return Ok(ScalarPotential::double_well()),
        "linear" => return Ok(ScalarPotential::linear()),
        _ => {}
    }
    let open = s.find('(');
    let (head, args) = match open {
        Some(i) if s.ends_with(')') => (&s[..i], &s[i + 1..s.len() - 1]),
        _ => {
            return Err(Error::Argument(format!(
                "unknown potential '{s}' (expected power(p), double-well, linear or saturate(inner, sbar))"
            )))
        }
    };
    match head.trim() {
        "power" => {
            let p: f64 = args
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("bad power exponent '{args}'")))?;
            ScalarPotential::power(p)
        }
        "saturate" => {
            // split at the last top-level comma: inner spec may contain commas
            let mut depth = 0i32;
            let mut split = None;
            for (i, c) in args.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' if depth == 0 => split = Some(i),
                    _ => {}
                }
            }
            let i = split.ok_or_else(|| {
                Error::Argument("saturate(inner, sbar) needs two arguments".into())
            })?;
            let inner = parse_spec(&args[..i])?;
            let sbar: f64 = args[i + 1..]
                .trim()
                .parse()
                .map_err(|_| Error::Argument(format!("bad saturation level '{}'", &args[i + 1..])))?;
            saturate(&inner, sbar)
        }
        other => Err(Error::Argument(format!("unknown potential '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn w4() -> ScalarPotential {
        ScalarPotential::power(4.0).unwrap()
    }

    #[test]
    fn eval_matches_analytic_derivatives() {
        // double-well at 0: normalization
        let dw = ScalarPotential::double_well();
        let v = dw.eval(0.0).unwrap();
        assert_eq!((v.w, v.dw, v.ddw), (0.0, 0.0, 1.0));
        // power(4) at 1: W'' = 1 - 3 s^2
        let v = w4().eval(1.0).unwrap();
        assert_relative_eq!(v.w, 0.25, epsilon = 1e-15);
        assert_relative_eq!(v.dw, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.ddw, -2.0, epsilon = 1e-15);
        // double-well at 1: W'' = 1 - 6 s + 6 s^2
        let v = dw.eval(1.0).unwrap();
        assert_relative_eq!(v.w, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.dw, 0.0, epsilon = 1e-15);
        assert_relative_eq!(v.ddw, 1.0, epsilon = 1e-15);
        assert!(dw.eval(-0.1).is_err());
    }

    #[test]
    fn second_derivative_consistent_with_first() {
        // central differences of W' reproduce W'' at 1e-6 relative
        let h = 1e-5;
        for pot in [w4(), ScalarPotential::double_well(), ScalarPotential::linear()] {
            for &s in &[0.3, 0.7, 1.1, 1.9, 3.4] {
                let fd = (pot.eval(s + h).unwrap().dw - pot.eval(s - h).unwrap().dw) / (2.0 * h);
                let exact = pot.eval(s).unwrap().ddw;
                assert!(
                    (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{} at s={s}: fd={fd}, exact={exact}",
                    pot.name()
                );
            }
        }
    }

    #[test]
    fn remainder_values() {
        // any H0 potential vanishes to second order at 0
        let v = ScalarPotential::double_well().remainder(0.0).unwrap();
        assert_eq!((v.w, v.dw, v.ddw), (0.0, 0.0, 0.0));
        // power(4): R = -s^4/4
        let v = w4().remainder(1.0).unwrap();
        assert_relative_eq!(v.w, -0.25, epsilon = 1e-15);
        assert_relative_eq!(v.dw, -1.0, epsilon = 1e-15);
        assert_relative_eq!(v.ddw, -3.0, epsilon = 1e-15);
        // double-well: R = s^4/2 - s^3
        let v = ScalarPotential::double_well().remainder(2.0).unwrap();
        assert_relative_eq!(v.w, 0.0, epsilon = 1e-12);
        assert_relative_eq!(v.dw, 4.0, epsilon = 1e-12);
        assert_relative_eq!(v.ddw, 12.0, epsilon = 1e-12);
    }

    #[test]
    fn alpha0_estimates() {
        let grid = default_check_grid();
        // double-well ratio (1-s)^2 vanishes at s = 1
        let a = estimate_alpha0(&ScalarPotential::double_well(), &[0.5, 1.0, 2.0]).unwrap();
        assert_relative_eq!(a, 0.0, epsilon = 1e-15);
        // power(4) on (0, 1.2]: ratio 1 - s^2/2 decreasing
        let g: Vec<f64> = (1..=120).map(|i| i as f64 / 100.0).collect();
        let a = estimate_alpha0(&w4(), &g).unwrap();
        assert_relative_eq!(a, 0.28, epsilon = 1e-12);
        // linear: identically 1
        let a = estimate_alpha0(&ScalarPotential::linear(), &grid).unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-15);
        assert!(estimate_alpha0(&w4(), &[]).is_err());
    }

    #[test]
    fn alpha0_monotone_under_refinement() {
        let coarse: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        let mut fine = coarse.clone();
        fine.extend((1..=200).map(|i| i as f64 * 0.01));
        let pot = ScalarPotential::double_well();
        let a_coarse = estimate_alpha0(&pot, &coarse).unwrap();
        let a_fine = estimate_alpha0(&pot, &fine).unwrap();
        assert!(a_fine <= a_coarse);
    }

    #[test]
    fn hypothesis_report_double_well() {
        let rep = check_hypotheses(&ScalarPotential::double_well(), &default_check_grid(), 1).unwrap();
        assert!(rep.h0.ok && rep.h1.ok && rep.h2.ok && rep.h3.ok, "{rep:?}");
        assert!(rep.h1.value <= 1e-6, "alpha0 = {}", rep.h1.value);
        assert!((rep.h3.p - 3.0).abs() < 0.1, "p = {}", rep.h3.p);
        assert!((rep.h3.q - 4.0).abs() < 0.15, "q = {}", rep.h3.q);
        assert!(rep.h1_prime.ok, "{:?}", rep.h1_prime);
        assert!((rep.h1_prime.value - 1.0).abs() < 0.05);
        assert!(rep.admits_solitons());
    }

    #[test]
    fn hypothesis_report_power4() {
        let rep = check_hypotheses(&w4(), &default_check_grid(), 1).unwrap();
        assert!(rep.h0.ok && rep.h1.ok);
        assert!(!rep.h2.ok, "W4(2) = -2 must fail H2");
        assert!(rep.h2.value < -1.9);
        assert!((rep.h3.p - 4.0).abs() < 0.1);
        assert!((rep.h3.q - 4.0).abs() < 0.15);
        // near zero s^2/2 - W = s^4/4: eps = 2, admissible for N = 1 only
        assert!(rep.h1_prime.ok);
        assert!((rep.h1_prime.value - 2.0).abs() < 0.05);
        let rep3 = check_hypotheses(&w4(), &default_check_grid(), 3).unwrap();
        assert!(!rep3.h1_prime.ok, "eps = 2 exceeds 4/3 in N = 3");
        assert!(!rep.admits_solitons());
    }

    #[test]
    fn hypothesis_report_linear() {
        let rep = check_hypotheses(&ScalarPotential::linear(), &default_check_grid(), 1).unwrap();
        assert!(rep.h0.ok && rep.h2.ok);
        assert!(!rep.h1.ok, "alpha0 = 1 is not < 1");
        assert!(rep.h3.ok, "vanishing remainder satisfies the growth bound");
        assert!(!rep.h1_prime.ok);
        assert!(!rep.admits_solitons());
    }

    #[test]
    fn saturation_agrees_below_and_monotone_above() {
        let sat = saturate(&w4(), 1.2).unwrap();
        assert_eq!(sat.sbar(), Some(1.2));
        // identical below sbar, machine precision
        for i in 0..100 {
            let s = 1.2 * (i as f64 + 0.5) / 100.5;
            let a = w4().eval(s).unwrap();
            let b = sat.eval(s).unwrap();
            assert_eq!(a.w, b.w);
            assert_eq!(a.dw, b.dw);
            assert_eq!(a.ddw, b.ddw);
        }
        // remainder derivative nonnegative on [sbar, 10]
        let mut min_r1 = f64::INFINITY;
        for i in 0..=2000 {
            let s = 1.2 + (10.0 - 1.2) * i as f64 / 2000.0;
            min_r1 = min_r1.min(sat.remainder(s).unwrap().dw);
        }
        assert!(min_r1 >= 0.0, "min R' = {min_r1}");
        // the saturated potential is nonnegative and passes H3
        let rep = check_hypotheses(&sat, &default_check_grid(), 1).unwrap();
        assert!(rep.h2.ok);
        assert!(rep.h3.ok, "{:?}", rep.h3);
    }

    #[test]
    fn saturation_noop_when_already_monotone() {
        // double-well: R' = 2s^3 - 3s^2 >= 0 for s >= 1.5, so sbar = 3 changes nothing
        let dw = ScalarPotential::double_well();
        let sat = saturate(&dw, 3.0).unwrap();
        for &s in &[0.5, 1.0, 2.9, 3.0, 3.5, 7.0, 20.0] {
            let a = dw.eval(s).unwrap();
            let b = sat.eval(s).unwrap();
            assert_eq!(a.w, b.w);
            assert_eq!(a.dw, b.dw);
            assert_eq!(a.ddw, b.ddw);
        }
        assert_eq!(sat.sbar(), Some(3.0));
        assert!(saturate(&dw, -1.0).is_err());
    }

    #[test]
    fn saturated_blend_is_c1_when_remainder_slope_nonneg() {
        // C2 within each piece; across sbar the blend keeps the value exactly
        let sat = saturate(&w4(), 1.2).unwrap();
        let below = sat.eval(1.2 - 1e-12).unwrap();
        let at = sat.eval(1.2).unwrap();
        assert!((below.w - at.w).abs() < 1e-9);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(parse_spec("double-well").unwrap().name(), "double-well");
        assert_eq!(parse_spec("linear").unwrap().name(), "linear");
        assert_eq!(parse_spec("power(4)").unwrap().name(), "power(4)");
        let sat = parse_spec("saturate(power(4), 1.2)").unwrap();
        assert_eq!(sat.sbar(), Some(1.2));
        assert!(parse_spec("poower(4)").is_err());
        assert!(parse_spec("power(1.5)").is_err());
        assert!(parse_spec("saturate(power(4))").is_err());
    }

    #[test]
    fn complex_gradient_limit() {
        let pot = w4();
        let z = Complex64::new(0.3, 0.4); // |z| = 0.5
        let g = pot.grad_complex(z).unwrap();
        let expected = z * ((0.5f64 - 0.125) / 0.5);
        assert_relative_eq!(g.re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(g.im, expected.im, epsilon = 1e-14);
        assert_eq!(pot.grad_complex(Complex64::new(0.0, 0.0)).unwrap().norm(), 0.0);
    }
}
