//! Structured run records shared by the library and the command line tool.

use serde::Serialize;

/// One recorded instant of a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub energy: f64,
    pub charge: f64,
    pub momentum: f64,
    pub ergocenter_velocity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbital_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<f64>,
    pub max_abs_psi: f64,
}

/// Conserved-quantity time series; `blow_up_time` is set when evolution
/// aborted on non-finite values (the points before it are retained).
#[derive(Debug, Clone, Default, Serialize)]
pub struct TrajectorySeries {
    pub points: Vec<TrajectoryPoint>,
    pub blow_up_time: Option<f64>,
}

impl TrajectorySeries {
    /// Largest relative drift of energy and charge against the first record.
    pub fn max_relative_drift(&self) -> (f64, f64) {
        let Some(first) = self.points.first() else {
            return (0.0, 0.0);
        };
        let mut de = 0.0f64;
        let mut dc = 0.0f64;
        for p in &self.points {
            de = de.max((p.energy - first.energy).abs() / first.energy.abs().max(1e-300));
            dc = dc.max((p.charge - first.charge).abs() / first.charge.abs().max(1e-300));
        }
        (de, dc)
    }

    pub fn max_orbital_distance(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|p| p.orbital_distance)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
    }
}

/// JSON sidecar accompanying a ground-state profile.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSidecar {
    pub omega: f64,
    pub charge: f64,
    pub energy: f64,
    /// Energy per unit |charge|.
    pub lambda: f64,
    /// Least-squares constraint multiplier (should equal -omega).
    pub lambda_multiplier: f64,
    pub residual: f64,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl GroundStateSidecar {
    pub fn from_ground_state(gs: &crate::groundstate::GroundState) -> Self {
        GroundStateSidecar {
            omega: gs.sw.omega,
            charge: gs.charge,
            energy: gs.energy,
            lambda: gs.lambda,
            lambda_multiplier: gs.lambda_multiplier,
            residual: gs.residual,
            certified: gs.certified,
            warning: gs.warning.clone(),
        }
    }
}
