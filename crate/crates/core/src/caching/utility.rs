use serde::{Deserialize, Serialize};

use crate::aoi::{AoiLedger, PassEvent};
use crate::caching::{CachingAction, ChannelLimits};
use crate::error::Result;

/// How the per-content weight `W` of the freshness term is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Every cached RSU content weighs `1 / (number of cached contents)`.
    #[default]
    Uniform,
    /// A content weighs its share of the summed RSU ages.
    AoiShare,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    /// Importance of freshness against link cost, in `[0, 1]`.
    pub epsilon: f64,
    /// Scale matching the freshness term to the cost term.
    pub w: f64,
    pub weight_mode: WeightMode,
    /// Lower bound applied to popularity where it divides a cost.
    pub popularity_floor: f64,
}

impl Default for UtilityParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            w: 1.0,
            weight_mode: WeightMode::Uniform,
            popularity_floor: 0.01,
        }
    }
}

/// Distances and popularity the MBS observes in one slot.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinkContext {
    /// `d_j`: distance from CV `j` to the MBS.
    pub cv_distance: Vec<f64>,
    /// `d_k`: distance from RSU `k` to the MBS.
    pub rsu_distance: Vec<f64>,
    /// `p[k][h]`: request popularity of region `h`'s content at RSU `k`.
    pub popularity: Vec<Vec<f64>>,
}

impl LinkContext {
    pub fn popularity(&self, k: usize, h: usize) -> f64 {
        self.popularity[k][h]
    }
}

/// Cost of the links an action opens: CV distance per upload, and RSU
/// distance divided by (floored) popularity per update.
pub fn link_cost(action: &CachingAction, ctx: &LinkContext, params: &UtilityParams) -> f64 {
    let uploads: f64 = action.uploads().iter().map(|u| ctx.cv_distance[u.cv]).sum();
    let updates: f64 = action
        .updates()
        .iter()
        .map(|y| {
            let p = ctx.popularity(y.rsu, y.region).max(params.popularity_floor);
            ctx.rsu_distance[y.rsu] / p
        })
        .sum();
    uploads + updates
}

/// Freshness term: sum over cached RSU contents of
/// `aoi_max / age * W * popularity`. Ages of zero count as one.
pub fn freshness(ledger: &AoiLedger, ctx: &LinkContext, params: &UtilityParams) -> f64 {
    let n = ledger.num_rsu_contents();
    if n == 0 {
        return 0.0;
    }
    let total_age: f64 = ledger
        .rsu_contents()
        .map(|(_, _, a)| f64::from(a.max(1)))
        .sum();
    ledger
        .rsu_contents()
        .map(|(k, h, a)| {
            let age = f64::from(a.max(1));
            let weight = match params.weight_mode {
                WeightMode::Uniform => 1.0 / n as f64,
                WeightMode::AoiShare => age / total_age,
            };
            f64::from(ledger.aoi_max(h)) / age * weight * ctx.popularity(k, h)
        })
        .sum()
}

/// Caching utility of taking `action`, evaluated on the ledger that action
/// produces: `eps * w * freshness - (1 - eps) * link_cost`.
pub fn caching_utility(
    ledger_next: &AoiLedger,
    action: &CachingAction,
    ctx: &LinkContext,
    params: &UtilityParams,
) -> f64 {
    let eps = params.epsilon;
    eps * (freshness(ledger_next, ctx, params) * params.w)
        - (1.0 - eps) * link_cost(action, ctx, params)
}

/// Applies `action` and the slot's pass events, returning the next ledger
/// and the link cost paid.
pub fn transition(
    ledger: &AoiLedger,
    action: &CachingAction,
    pass_events: &[PassEvent],
    ctx: &LinkContext,
    params: &UtilityParams,
) -> Result<(AoiLedger, f64)> {
    let next = ledger.advance(action.uploads(), action.updates(), pass_events)?;
    Ok((next, link_cost(action, ctx, params)))
}

/// Picks `w` so that the freshness term of `ledger` and the cost of a slot
/// that fills every usable channel at the mean single-link price have equal
/// magnitude. Falls back to 1 when either side is zero.
pub fn auto_calibrate_w(
    ledger: &AoiLedger,
    ctx: &LinkContext,
    params: &UtilityParams,
    limits: &ChannelLimits,
) -> f64 {
    let probe = UtilityParams { w: 1.0, ..*params };
    let mut costs = Vec::new();
    let mut cv_links = 0;
    for j in 0..ledger.num_cvs() {
        let held = ledger.cv_contents(j).count();
        if held > 0 {
            cv_links += 1;
        }
        costs.extend(std::iter::repeat_n(ctx.cv_distance[j], held));
    }
    let mut rsu_links = 0;
    for k in 0..ledger.num_rsus() {
        if !ledger.coverage(k).is_empty() {
            rsu_links += 1;
        }
        for &h in ledger.coverage(k) {
            let p = ctx.popularity(k, h).max(params.popularity_floor);
            costs.push(ctx.rsu_distance[k] / p);
        }
    }
    let usable = (cv_links.min(limits.cv) + rsu_links.min(limits.rsu)).min(limits.total);
    let fresh = freshness(ledger, ctx, &probe);
    if costs.is_empty() || usable == 0 || fresh <= 0.0 {
        return 1.0;
    }
    let mean_cost = costs.iter().sum::<f64>() / costs.len() as f64;
    let w = mean_cost * usable as f64 / fresh;
    if w.is_finite() && w > 0.0 {
        w
    } else {
        1.0
    }
}
