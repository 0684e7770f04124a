use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aoi::{kmh_to_m_per_slot, Region, RegionKind, RoadLayout, DEFAULT_MBS_OFFSET, DEFAULT_RSU_OFFSET};
use crate::caching::{CachingPolicy, ChannelLimits, PlannerConfig, UtilityParams, WeightMode};
use crate::error::{Error, Result};
use crate::service::{reference_v, DppParams, ServicePolicy, VPreset};
use crate::sim::rng::{stream_rng, Stream};

/// Full description of one simulated scenario. Every field has a default,
/// so an empty TOML document is the default highway.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Number of slots simulated.
    pub horizon: u64,
    pub road: RoadConfig,
    pub vehicles: VehicleConfig,
    pub requests: RequestConfig,
    pub caching: CachingConfig,
    pub service: ServiceConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadConfig {
    /// Meters.
    pub length: f64,
    pub region_length: f64,
    pub regions_per_rsu: usize,
    pub lane_speeds_kmh: Vec<f64>,
    /// Explicit kinds, one per region. Drawn from the seed when absent.
    pub region_kinds: Option<Vec<RegionKind>>,
    pub aoi_max: AoiMaxConfig,
    pub rsu_offset: f64,
    pub mbs_offset: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoiMaxConfig {
    pub normal: u32,
    pub traffic_jam: u32,
    pub accident: u32,
    pub crowded: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    /// UVs placed in each RSU span at the start.
    pub uvs_per_rsu: usize,
    /// CVs placed in each RSU span at the start.
    pub cvs_per_rsu: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RequestConfig {
    /// Chance that a UV without a live request issues one in a slot.
    pub probability: f64,
    /// Slots of request history behind the popularity estimate.
    pub popularity_window: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CachingConfig {
    pub policy: CachingPolicy,
    pub epsilon: f64,
    /// Freshness scale; calibrated from the initial state when absent.
    pub w: Option<f64>,
    pub weight_mode: WeightMode,
    pub popularity_floor: f64,
    pub channels: ChannelLimits,
    pub lookahead: f64,
    pub exhaustive_bound: u64,
}

/// `V` as a preset relative to the scenario's reference weight, or as a
/// literal number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VSetting {
    Preset(VPreset),
    Value(f64),
}

impl FromStr for VSetting {
    type Err = String;

    /// A preset name or a number.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Ok(p) = s.parse::<VPreset>() {
            return Ok(VSetting::Preset(p));
        }
        s.parse::<f64>()
            .map(VSetting::Value)
            .map_err(|_| format!("`{s}` is neither a number nor a V preset (light, normal, heavy)"))
    }
}

impl fmt::Display for VSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VSetting::Preset(p) => f.write_str(p.name()),
            VSetting::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub policy: ServicePolicy,
    pub v: VSetting,
    pub uv_channels: Option<usize>,
    pub enforce_staleness: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            horizon: 100,
            road: RoadConfig::default(),
            vehicles: VehicleConfig::default(),
            requests: RequestConfig::default(),
            caching: CachingConfig::default(),
            service: ServiceConfig::default(),
        }
    }
}

impl Default for RoadConfig {
    fn default() -> Self {
        Self {
            length: 2000.0,
            region_length: 100.0,
            regions_per_rsu: 5,
            lane_speeds_kmh: vec![30.0, 50.0, 80.0],
            region_kinds: None,
            aoi_max: AoiMaxConfig::default(),
            rsu_offset: DEFAULT_RSU_OFFSET,
            mbs_offset: DEFAULT_MBS_OFFSET,
        }
    }
}

impl Default for AoiMaxConfig {
    fn default() -> Self {
        Self {
            normal: RegionKind::Normal.default_aoi_max(),
            traffic_jam: RegionKind::TrafficJam.default_aoi_max(),
            accident: RegionKind::Accident.default_aoi_max(),
            crowded: RegionKind::Crowded.default_aoi_max(),
        }
    }
}

impl AoiMaxConfig {
    pub fn of(&self, kind: RegionKind) -> u32 {
        match kind {
            RegionKind::Normal => self.normal,
            RegionKind::TrafficJam => self.traffic_jam,
            RegionKind::Accident => self.accident,
            RegionKind::Crowded => self.crowded,
        }
    }
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            uvs_per_rsu: 3,
            cvs_per_rsu: 3,
        }
    }
}

impl Default for RequestConfig {
    fn default() -> Self {
        Self {
            probability: 0.1,
            popularity_window: 20,
        }
    }
}

impl Default for CachingConfig {
    fn default() -> Self {
        let u = UtilityParams::default();
        let p = PlannerConfig::default();
        Self {
            policy: CachingPolicy::Proposed,
            epsilon: u.epsilon,
            w: None,
            weight_mode: u.weight_mode,
            popularity_floor: u.popularity_floor,
            channels: ChannelLimits::default(),
            lookahead: p.lookahead,
            exhaustive_bound: p.exhaustive_bound,
        }
    }
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            policy: ServicePolicy::Dpp,
            v: VSetting::Preset(VPreset::Normal),
            uv_channels: None,
            enforce_staleness: true,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl ScenarioConfig {
    /// One RSU over five regions with three UVs that always hold a request.
    pub fn single_rsu() -> Self {
        let mut c = Self::default();
        c.road.length = 500.0;
        c.requests.probability = 1.0;
        c.service.enforce_staleness = false;
        c
    }

    pub fn num_regions(&self) -> usize {
        (self.road.length / self.road.region_length).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let r = &self.road;
        if !(r.length.is_finite() && r.length > 0.0) {
            return Err(invalid(format!("road.length must be positive, got {}", r.length)));
        }
        if !(r.region_length.is_finite() && r.region_length > 0.0) {
            return Err(invalid(format!(
                "road.region_length must be positive, got {}",
                r.region_length
            )));
        }
        let ratio = r.length / r.region_length;
        if ratio < 0.5 || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid(format!(
                "road.region_length {} does not divide road.length {}",
                r.region_length, r.length
            )));
        }
        let regions = self.num_regions();
        if r.regions_per_rsu == 0 || !regions.is_multiple_of(r.regions_per_rsu) {
            return Err(invalid(format!(
                "{regions} regions cannot be split into RSU spans of {} regions",
                r.regions_per_rsu
            )));
        }
        if r.lane_speeds_kmh.is_empty() {
            return Err(invalid("road.lane_speeds_kmh must list at least one lane"));
        }
        if let Some(s) = r.lane_speeds_kmh.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(invalid(format!("lane speed must be nonnegative, got {s}")));
        }
        if let Some(kinds) = &r.region_kinds {
            if kinds.len() != regions {
                return Err(invalid(format!(
                    "road.region_kinds lists {} kinds for {regions} regions",
                    kinds.len()
                )));
            }
        }
        for kind in RegionKind::ALL {
            if r.aoi_max.of(kind) == 0 {
                return Err(invalid(format!("road.aoi_max.{kind} must be positive")));
            }
        }
        if !(r.rsu_offset.is_finite() && r.mbs_offset.is_finite()) {
            return Err(invalid("road offsets must be finite"));
        }
        if self.vehicles.uvs_per_rsu == 0 {
            return Err(invalid("vehicles.uvs_per_rsu must be positive"));
        }
        if self.vehicles.cvs_per_rsu == 0 {
            return Err(invalid("vehicles.cvs_per_rsu must be positive"));
        }
        let q = &self.requests;
        if !(0.0..=1.0).contains(&q.probability) {
            return Err(invalid(format!(
                "requests.probability must lie in [0, 1], got {}",
                q.probability
            )));
        }
        if q.popularity_window == 0 {
            return Err(invalid("requests.popularity_window must be positive"));
        }
        let c = &self.caching;
        if !(0.0..=1.0).contains(&c.epsilon) {
            return Err(invalid(format!("caching.epsilon must lie in [0, 1], got {}", c.epsilon)));
        }
        if let Some(w) = c.w {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid(format!("caching.w must be positive, got {w}")));
            }
        }
        if !(c.popularity_floor > 0.0 && c.popularity_floor <= 1.0) {
            return Err(invalid(format!(
                "caching.popularity_floor must lie in (0, 1], got {}",
                c.popularity_floor
            )));
        }
        if !(c.lookahead.is_finite() && c.lookahead >= 0.0) {
            return Err(invalid(format!("caching.lookahead must be nonnegative, got {}", c.lookahead)));
        }
        if let VSetting::Value(v) = self.service.v {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("service.v must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Region kinds in road order, drawn uniformly from the seed unless
    /// listed explicitly.
    pub fn region_kinds(&self) -> Vec<RegionKind> {
        if let Some(kinds) = &self.road.region_kinds {
            return kinds.clone();
        }
        let mut rng = stream_rng(self.seed, Stream::RegionKinds, 0, 0);
        (0..self.num_regions())
            .map(|_| RegionKind::ALL[rng.gen_range(0..RegionKind::ALL.len())])
            .collect()
    }

    pub fn layout(&self) -> Result<RoadLayout> {
        self.validate()?;
        let regions = self
            .region_kinds()
            .into_iter()
            .map(|kind| Region::new(kind, self.road.aoi_max.of(kind)))
            .collect::<Result<Vec<_>>>()?;
        RoadLayout::with_offsets(
            regions,
            self.road.regions_per_rsu,
            self.road.region_length,
            self.road.lane_speeds_kmh.iter().map(|&s| kmh_to_m_per_slot(s)).collect(),
            self.road.rsu_offset,
            self.road.mbs_offset,
        )
    }

    pub fn utility_params(&self, w: f64) -> UtilityParams {
        UtilityParams {
            epsilon: self.caching.epsilon,
            w,
            weight_mode: self.caching.weight_mode,
            popularity_floor: self.caching.popularity_floor,
        }
    }

    pub fn planner(&self) -> PlannerConfig {
        PlannerConfig {
            lookahead: self.caching.lookahead,
            exhaustive_bound: self.caching.exhaustive_bound,
        }
    }

    /// Reference weight `V0` of this scenario's geometry.
    pub fn reference_v(&self, layout: &RoadLayout) -> f64 {
        reference_v(mean_service_distance(layout), region_traversal_slots(layout))
    }

    pub fn resolve_v(&self, layout: &RoadLayout) -> f64 {
        match self.service.v {
            VSetting::Value(v) => v,
            VSetting::Preset(p) => p.scale(self.reference_v(layout)),
        }
    }

    pub fn dpp_params(&self, layout: &RoadLayout) -> DppParams {
        DppParams {
            v: self.resolve_v(layout),
            uv_channels: self.service.uv_channels,
            enforce_staleness: self.service.enforce_staleness,
        }
    }
}

/// Mean distance from an RSU to a vehicle uniformly placed on its span.
pub fn mean_service_distance(layout: &RoadLayout) -> f64 {
    const SAMPLES: usize = 1000;
    let span = layout.region_length() * layout.regions_per_rsu() as f64;
    let rsu = layout.rsu_position(0);
    let start = rsu.x - span / 2.0;
    (0..SAMPLES)
        .map(|i| {
            let x = start + span * (i as f64 + 0.5) / SAMPLES as f64;
            crate::aoi::link_distance(crate::aoi::Point::new(x, 0.0), rsu)
        })
        .sum::<f64>()
        / SAMPLES as f64
}

/// Slots a vehicle at the mean lane speed needs to cross one region.
pub fn region_traversal_slots(layout: &RoadLayout) -> f64 {
    let speeds = layout.lane_speeds();
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    if mean > 0.0 {
        layout.region_length() / mean
    } else {
        1.0
    }
}
