//! Empirical check of the one-slot quadratic Lyapunov drift bound
//! `L(Q') - L(Q) <= (a^2 + b^2) / 2 + Q (a - b)` with `L(Q) = Q^2 / 2` and
//! `Q' = max(Q - b, 0) + a`.

use crate::service::{dpp_decide, DppParams, ServiceCandidate};

/// Arrival and departure offered to a queue in one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftSlot {
    pub arrival: f64,
    pub departure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub initial_backlog: f64,
    pub slots: Vec<DriftSlot>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DriftReport {
    pub slots: usize,
    pub violations: usize,
    /// Largest observed `(a^2 + b^2) / 2`, the constant of the bound.
    pub constant: f64,
    /// Smallest `bound - drift` seen; negative means a violation.
    pub min_slack: f64,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub fn lyapunov(backlog: f64) -> f64 {
    0.5 * backlog * backlog
}

pub fn drift_bound_check(trajectories: &[Trajectory]) -> DriftReport {
    let mut report = DriftReport {
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for t in trajectories {
        let mut q = t.initial_backlog;
        for s in &t.slots {
            let (a, b) = (s.arrival, s.departure);
            let next = (q - b).max(0.0) + a;
            let drift = lyapunov(next) - lyapunov(q);
            let half_sq = 0.5 * (a * a + b * b);
            let bound = half_sq + q * (a - b);
            let slack = bound - drift;
            // Relative tolerance for rounding in the squares.
            let tol = 1e-12 * (1.0 + next * next + q * q + a * a + b * b);
            if slack < -tol {
                report.violations += 1;
            }
            report.min_slack = report.min_slack.min(slack);
            report.constant = report.constant.max(half_sq);
            report.slots += 1;
            q = next;
        }
    }
    if report.slots == 0 {
        report.min_slack = 0.0;
    }
    report
}

/// Trajectory of one queue controlled by the drift-plus-penalty rule, with
/// one slot of arrival per slot and the given per-slot link distances.
pub fn dpp_trajectory(distances: &[f64], v: f64) -> Trajectory {
    let params = DppParams {
        v,
        uv_channels: None,
        enforce_staleness: false,
    };
    let mut q = 0.0;
    let mut slots = Vec::with_capacity(distances.len());
    for &d in distances {
        let c = ServiceCandidate {
            uv_id: 0,
            backlog: q,
            distance: d,
            content_aoi: 0,
            aoi_max: u32::MAX,
        };
        let served = dpp_decide(&[c], &params).action.alpha(0);
        let departure = if served { q } else { 0.0 };
        slots.push(DriftSlot {
            arrival: 1.0,
            departure,
        });
        q = (q - departure).max(0.0) + 1.0;
    }
    Trajectory {
        initial_backlog: 0.0,
        slots,
    }
}
