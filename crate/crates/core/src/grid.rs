//! Radial grids, quadrature and discrete differential operators.
//!
//! All integrals over R^N of radially symmetric integrands reduce to
//! one-dimensional integrals against the measure `omega_{N-1} r^{N-1} dr`.
//! Node weights come from integrating the piecewise-linear hat functions
//! against that measure exactly, so `sum(w) == |ball(r_max)|` to rounding
//! and quadrature of smooth integrands is second order in the spacing.
//! For N = 1 the measure is the line measure on [-r_max, r_max] folded to
//! r >= 0, i.e. the same formula with omega_0 = 2.

use crate::error::{Error, Result};

/// Surface area of the unit sphere S^{N-1} in R^N: 2 pi^{N/2} / Gamma(N/2).
pub fn unit_sphere_area(dim: u32) -> f64 {
    // Gamma at integer and half-integer arguments by the recurrence.
    let half_n = dim as f64 / 2.0;
    let gamma = if dim % 2 == 0 {
        // Gamma(k) = (k-1)!
        let k = dim / 2;
        (1..k).fold(1.0, |acc, i| acc * i as f64)
    } else {
        // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < half_n - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    };
    2.0 * std::f64::consts::PI.powf(half_n) / gamma
}

/// Discretization of the radial measure on [0, r_max].
#[derive(Debug, Clone)]
pub struct RadialGrid {
    dim: u32,
    r: Vec<f64>,
    /// Hat-function quadrature weights (include the surface factor).
    w: Vec<f64>,
    /// Exact measure of each cell [r_i, r_{i+1}], used by the stiffness form.
    cell: Vec<f64>,
}

impl RadialGrid {
    /// Uniform grid with `nodes` points from 0 to `r_max` in dimension `dim`.
    pub fn uniform(dim: u32, r_max: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::Argument("grid needs at least 2 nodes".into()));
        }
        if !(r_max > 0.0) || dim == 0 {
            return Err(Error::Argument(format!(
                "bad grid parameters: r_max = {r_max}, dim = {dim}"
            )));
        }
        let h = r_max / (nodes - 1) as f64;
        let r: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
        Self::from_nodes(dim, r)
    }

    /// Grid over explicit strictly increasing nodes starting at 0.
    pub fn from_nodes(dim: u32, r: Vec<f64>) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::Argument("grid needs at least 2 nodes".into()));
        }
        if r[0] != 0.0 {
            return Err(Error::Argument("radial grid must start at r = 0".into()));
        }
        if r.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Argument("grid nodes must be strictly increasing".into()));
        }
        let area = unit_sphere_area(dim);
        let n = dim as i32;
        // integral of r^{n-1} over [a, b]
        let mono = |a: f64, b: f64| (b.powi(n) - a.powi(n)) / n as f64;
        // integral of (r - a)/(b - a) * r^{n-1} over [a, b]
        let ramp_up = |a: f64, b: f64| {
            let h = b - a;
            ((b.powi(n + 1) - a.powi(n + 1)) / (n + 1) as f64 - a * mono(a, b)) / h
        };
        let m = r.len();
        let mut w = vec![0.0; m];
        let mut cell = vec![0.0; m - 1];
        for i in 0..m - 1 {
            let (a, b) = (r[i], r[i + 1]);
            let up = ramp_up(a, b);
            let total = mono(a, b);
            cell[i] = area * total;
            w[i + 1] += area * up;
            w[i] += area * (total - up);
        }
        Ok(RadialGrid { dim, r, w, cell })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// Spacing if the grid is uniform, within rounding.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = self.r[1] - self.r[0];
        let ok = self
            .r
            .windows(2)
            .all(|p| ((p[1] - p[0]) - h).abs() <= 1e-12 * (1.0 + h));
        ok.then_some(h)
    }

    /// Exact volume of the ball of radius r_max in dimension `dim`.
    pub fn ball_volume(&self) -> f64 {
        unit_sphere_area(self.dim) * self.r_max().powi(self.dim as i32) / self.dim as f64
    }

    /// Quadrature of nodal values against the radial measure.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.w.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted L2 inner product of two nodal vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.w
            .iter()
            .zip(a)
            .zip(b)
            .map(|((w, x), y)| w * x * y)
            .sum()
    }

    /// Weighted L2 norm.
    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Central-difference gradient with the r = 0 symmetry u'(0) = 0 and a
    /// one-sided stencil at the outer end.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let r = &self.r;
        let mut g = vec![0.0; m];
        g[0] = 0.0; // even extension across the origin
        for i in 1..m - 1 {
            g[i] = (u[i + 1] - u[i - 1]) / (r[i + 1] - r[i - 1]);
        }
        g[m - 1] = (u[m - 1] - u[m - 2]) / (r[m - 1] - r[m - 2]);
        g
    }

    /// Dirichlet energy 1/2 int |grad u|^2 of the P1 interpolant (exact for it).
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        let mut k = 0.0;
        for i in 0..self.len() - 1 {
            let slope = (u[i + 1] - u[i]) / (self.r[i + 1] - self.r[i]);
            k += self.cell[i] * slope * slope;
        }
        0.5 * k
    }

    /// Weighted-L2 gradient of the Dirichlet energy: the discrete radial
    /// -Laplacian with natural Neumann ends.
    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let mut out = vec![0.0; m];
        for i in 0..m - 1 {
            let h = self.r[i + 1] - self.r[i];
            let flux = self.cell[i] * (u[i + 1] - u[i]) / (h * h);
            out[i] -= flux;
            out[i + 1] += flux;
        }
        for i in 0..m {
            out[i] /= self.w[i];
        }
        out
    }

    /// True when the grids describe the same discretization.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self
                .r
                .iter()
                .zip(other.r.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }
}

/// Nonnegative radial function sampled on a grid.
#[derive(Debug, Clone)]
pub struct Profile {
    pub grid: RadialGrid,
    u: Vec<f64>,
}

impl Profile {
    /// Values must be nonnegative; dips below -1e-10 are rejected, smaller
    /// negative noise is clamped to zero.
    pub fn new(grid: RadialGrid, mut u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::Argument(format!(
                "profile has {} values for a {}-node grid",
                u.len(),
                grid.len()
            )));
        }
        for v in &mut u {
            if !v.is_finite() {
                return Err(Error::Argument("profile contains non-finite values".into()));
            }
            if *v < 0.0 {
                if *v < -1e-10 {
                    return Err(Error::Argument(format!("profile value {v} is negative")));
                }
                *v = 0.0;
            }
        }
        Ok(Profile { grid, u })
    }

    pub fn zero(grid: RadialGrid) -> Self {
        let u = vec![0.0; grid.len()];
        Profile { grid, u }
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn max(&self) -> f64 {
        self.u.iter().cloned().fold(0.0, f64::max)
    }

    /// int u^2 dx.
    pub fn mass(&self) -> f64 {
        self.u.iter().zip(self.grid.weights()).map(|(u, w)| w * u * u).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.max() == 0.0
    }

    /// Decay criterion for ground states: |u(r_max)| <= 1e-8 * max u.
    pub fn decays(&self) -> bool {
        let m = self.max();
        m == 0.0 || self.u.last().unwrap().abs() <= 1e-8 * m
    }

    /// Linear interpolation at radius `r` (zero beyond the grid).
    pub fn interp(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        let r = r.abs();
        if r >= self.grid.r_max() {
            return 0.0;
        }
        // uniform grids dominate; fall back to binary search otherwise
        let i = match self.grid.uniform_spacing() {
            Some(h) => ((r / h) as usize).min(nodes.len() - 2),
            None => match nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
                Ok(i) => i.min(nodes.len() - 2),
                Err(i) => i.saturating_sub(1).min(nodes.len() - 2),
            },
        };
        let t = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
        self.u[i] * (1.0 - t) + self.u[i + 1] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area(1), 2.0, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area(2), 2.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * std::f64::consts::PI, epsilon = 1e-14);
        assert_relative_eq!(
            unit_sphere_area(4),
            2.0 * std::f64::consts::PI * std::f64::consts::PI,
            epsilon = 1e-13
        );
    }

    #[test]
    fn ball_volume_matches_weights() {
        for dim in 1..=4 {
            let g = RadialGrid::uniform(dim, 7.5, 301).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert_relative_eq!(total, g.ball_volume(), max_relative = 1e-12);
        }
    }

    #[test]
    fn quadrature_is_second_order() {
        // exp(-r) has a nonzero end slope, so the error is genuinely O(h^2):
        // halving the spacing should cut it by about 4
        let exact = 2.0 * (1.0 - (-10.0f64).exp());
        let err = |nodes: usize| {
            let g = RadialGrid::uniform(1, 10.0, nodes).unwrap();
            let vals: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
            (g.integrate(&vals) - exact).abs()
        };
        let e1 = err(501);
        let e2 = err(1001);
        assert!(e2 < e1 / 3.0 && e2 > e1 / 5.0, "e1 = {e1:.3e}, e2 = {e2:.3e}");
    }

    #[test]
    fn laplacian_is_selfadjoint_and_consistent() {
        let g = RadialGrid::uniform(3, 10.0, 1001).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 4.0).exp()).collect();
        let v: Vec<f64> = g.nodes().iter().map(|r| 1.0 / (1.0 + r * r)).collect();
        let au = g.neg_laplacian(&u);
        let av = g.neg_laplacian(&v);
        assert_relative_eq!(g.inner(&au, &v), g.inner(&u, &av), max_relative = 1e-10);
        // -Lap exp(-r^2/4) = (N/2 - r^2/4) exp(-r^2/4) in 3d
        let i = 400;
        let r = g.nodes()[i];
        let exact = (1.5 - r * r / 4.0) * (-r * r / 4.0).exp();
        assert_relative_eq!(au[i], exact, max_relative = 1e-3);
    }

    #[test]
    fn dirichlet_energy_matches_gradient_quadrature() {
        // even profile (the gradient operator assumes u'(0) = 0)
        let g = RadialGrid::uniform(1, 20.0, 2001).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 8.0).exp()).collect();
        let grad = g.gradient(&u);
        let sq: Vec<f64> = grad.iter().map(|x| x * x).collect();
        let by_quadrature = 0.5 * g.integrate(&sq);
        assert_relative_eq!(g.dirichlet_energy(&u), by_quadrature, max_relative = 1e-3);
    }

    #[test]
    fn profile_rejects_negatives() {
        let g = RadialGrid::uniform(1, 1.0, 11).unwrap();
        let mut u = vec![1.0; 11];
        u[5] = -0.5;
        assert!(Profile::new(g.clone(), u).is_err());
        let mut tiny = vec![1.0; 11];
        tiny[5] = -1e-14;
        let p = Profile::new(g, tiny).unwrap();
        assert_eq!(p.values()[5], 0.0);
    }
}
