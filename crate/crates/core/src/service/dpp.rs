use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Drift-plus-penalty parameters of one RSU.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DppParams {
    /// Weight of link cost against queue backlog.
    pub v: f64,
    /// Most UVs served per slot; `None` is unlimited.
    pub uv_channels: Option<usize>,
    /// Refuse service whose delivered age would exceed the region's
    /// validity threshold.
    pub enforce_staleness: bool,
}

impl Default for DppParams {
    fn default() -> Self {
        Self {
            v: 1.0,
            uv_channels: None,
            enforce_staleness: true,
        }
    }
}

/// What an RSU knows about one pending request when deciding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServiceCandidate {
    pub uv_id: usize,
    pub backlog: f64,
    /// UV-to-RSU distance.
    pub distance: f64,
    /// Age of the RSU's cached copy of the requested content.
    pub content_aoi: u32,
    /// Validity threshold of the requested region.
    pub aoi_max: u32,
}

/// `alpha`: the set of UVs served this slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ServiceAction {
    served: BTreeSet<usize>,
}

impl ServiceAction {
    pub fn alpha(&self, uv_id: usize) -> bool {
        self.served.contains(&uv_id)
    }

    pub fn served(&self) -> impl Iterator<Item = usize> + '_ {
        self.served.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.served.len()
    }

    pub fn is_empty(&self) -> bool {
        self.served.is_empty()
    }
}

impl FromIterator<usize> for ServiceAction {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self {
            served: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ServiceDecision {
    pub action: ServiceAction,
    /// UVs the drift-plus-penalty rule wanted to serve but whose content
    /// would have arrived stale.
    pub stale_blocked: Vec<usize>,
}

/// Age of the content a UV receives: the cached age plus the slot the
/// transfer takes, or 0 when nothing is sent.
pub fn received_aoi(rsu_content_aoi: u32, served: bool) -> u32 {
    if served {
        rsu_content_aoi + 1
    } else {
        0
    }
}

/// Link cost of serving a UV at `distance`.
pub fn service_cost(served: bool, distance: f64) -> f64 {
    if served {
        distance
    } else {
        0.0
    }
}

/// `V * C(alpha) - Q * b(alpha)` with `C(1) = d` and `b(1) = Q`.
pub fn dpp_objective(candidate: &ServiceCandidate, served: bool, v: f64) -> f64 {
    let departure = if served { candidate.backlog } else { 0.0 };
    v * service_cost(served, candidate.distance) - candidate.backlog * departure
}

/// Per-UV drift-plus-penalty rule: serve exactly when serving has the
/// strictly smaller objective, i.e. `Q^2 > V * d`.
///
/// With staleness enforcement a would-be service whose received age exceeds
/// `aoi_max` is withheld and reported. When more UVs qualify than there are
/// channels, those with the largest `Q^2 - V * d` win, lower ids first on
/// ties.
pub fn dpp_decide(candidates: &[ServiceCandidate], params: &DppParams) -> ServiceDecision {
    let mut chosen: Vec<(f64, usize)> = Vec::new();
    let mut stale_blocked = Vec::new();
    for c in candidates {
        let serve = dpp_objective(c, true, params.v) < dpp_objective(c, false, params.v);
        if !serve {
            continue;
        }
        if params.enforce_staleness && received_aoi(c.content_aoi, true) > c.aoi_max {
            stale_blocked.push(c.uv_id);
            continue;
        }
        chosen.push((c.backlog * c.backlog - params.v * c.distance, c.uv_id));
    }
    cap_by_priority(&mut chosen, params.uv_channels);
    stale_blocked.sort_unstable();
    ServiceDecision {
        action: chosen.into_iter().map(|(_, id)| id).collect(),
        stale_blocked,
    }
}

fn cap_by_priority(chosen: &mut Vec<(f64, usize)>, channels: Option<usize>) {
    if let Some(cap) = channels {
        chosen.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        chosen.truncate(cap);
    }
}

/// Serves every pending request immediately, longest wait first when the
/// channel cap binds.
pub fn latency_only_policy(candidates: &[ServiceCandidate], params: &DppParams) -> ServiceDecision {
    let mut chosen: Vec<(f64, usize)> = candidates.iter().map(|c| (c.backlog, c.uv_id)).collect();
    cap_by_priority(&mut chosen, params.uv_channels);
    ServiceDecision {
        action: chosen.into_iter().map(|(_, id)| id).collect(),
        stale_blocked: Vec::new(),
    }
}

/// Never serves.
pub fn cost_only_policy(_candidates: &[ServiceCandidate], _params: &DppParams) -> ServiceDecision {
    ServiceDecision::default()
}

/// Stage-two policy selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServicePolicy {
    Dpp,
    LatencyOnly,
    CostOnly,
}

impl ServicePolicy {
    pub const ALL: [ServicePolicy; 3] = [
        ServicePolicy::Dpp,
        ServicePolicy::LatencyOnly,
        ServicePolicy::CostOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ServicePolicy::Dpp => "dpp",
            ServicePolicy::LatencyOnly => "latency-only",
            ServicePolicy::CostOnly => "cost-only",
        }
    }

    pub fn decide(self, candidates: &[ServiceCandidate], params: &DppParams) -> ServiceDecision {
        match self {
            ServicePolicy::Dpp => dpp_decide(candidates, params),
            ServicePolicy::LatencyOnly => latency_only_policy(candidates, params),
            ServicePolicy::CostOnly => cost_only_policy(candidates, params),
        }
    }
}

impl fmt::Display for ServicePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ServicePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown stage-2 policy `{s}` (expected dpp, latency-only or cost-only)"))
    }
}

/// Named regimes of the cost weight `V`, relative to a reference `V0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VPreset {
    Light,
    Normal,
    Heavy,
}

impl VPreset {
    pub const ALL: [VPreset; 3] = [VPreset::Light, VPreset::Normal, VPreset::Heavy];

    pub fn scale(self, v0: f64) -> f64 {
        match self {
            VPreset::Light => v0 / 10.0,
            VPreset::Normal => v0,
            VPreset::Heavy => 10.0 * v0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VPreset::Light => "light",
            VPreset::Normal => "normal",
            VPreset::Heavy => "heavy",
        }
    }
}

impl FromStr for VPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown V preset `{s}` (expected light, normal or heavy)"))
    }
}

/// Reference weight `V0 = (traversal_slots / 2)^2 / mean_distance`: with it
/// a UV at the mean distance is served once it has waited half the time it
/// needs to cross one region.
pub fn reference_v(mean_distance: f64, traversal_slots: f64) -> f64 {
    let half = traversal_slots / 2.0;
    half * half / mean_distance
}
