//! Road geometry, content regions and the three-layer age-of-information
//! ledger (CV storage, MBS store, RSU caches).
//!
//! Every content item describes one road region. CVs create it by driving
//! through the region, the MBS ingests it through uploads and pushes it to
//! RSUs through updates. Ages are counted in whole slots.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a road region (and of the content item describing it).
pub type RegionId = usize;

/// Lateral offset of the MBS from the road axis, in meters.
pub const DEFAULT_MBS_OFFSET: f64 = 50.0;
/// Lateral offset of every RSU from the road axis, in meters.
pub const DEFAULT_RSU_OFFSET: f64 = 10.0;
/// One slot lasts one second.
pub const SLOT_SECONDS: f64 = 1.0;

/// Converts a speed in km/h to meters travelled per slot.
pub fn kmh_to_m_per_slot(kmh: f64) -> f64 {
    kmh * 1000.0 / 3600.0 * SLOT_SECONDS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Normal,
    TrafficJam,
    Accident,
    Crowded,
}

impl RegionKind {
    pub const ALL: [RegionKind; 4] = [
        RegionKind::Normal,
        RegionKind::TrafficJam,
        RegionKind::Accident,
        RegionKind::Crowded,
    ];

    /// Validity threshold of content describing a region of this kind.
    pub fn default_aoi_max(self) -> u32 {
        match self {
            RegionKind::Normal => 20,
            RegionKind::TrafficJam => 10,
            RegionKind::Accident => 8,
            RegionKind::Crowded => 15,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionKind::Normal => "normal",
            RegionKind::TrafficJam => "traffic_jam",
            RegionKind::Accident => "accident",
            RegionKind::Crowded => "crowded",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A road region together with the validity threshold of its content.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub aoi_max: u32,
}

impl Region {
    pub fn new(kind: RegionKind, aoi_max: u32) -> Result<Self> {
        if aoi_max == 0 {
            return Err(Error::InvalidLayout(format!(
                "aoi_max of a {kind} region must be positive"
            )));
        }
        Ok(Self { kind, aoi_max })
    }

    pub fn of_kind(kind: RegionKind) -> Self {
        Self {
            kind,
            aoi_max: kind.default_aoi_max(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance between two points.
pub fn link_distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// A straight one-way road split into equal regions, with RSUs tiling it in
/// equal spans and a single MBS at its center.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadLayout {
    region_length: f64,
    regions: Vec<Region>,
    regions_per_rsu: usize,
    rsu_positions: Vec<Point>,
    mbs_position: Point,
    lane_speeds: Vec<f64>,
}

impl RoadLayout {
    /// Builds a layout with RSUs at span centers (10 m off the road) and the
    /// MBS at the road center (50 m off the road). Lane speeds are in meters
    /// per slot.
    pub fn new(
        regions: Vec<Region>,
        regions_per_rsu: usize,
        region_length: f64,
        lane_speeds: Vec<f64>,
    ) -> Result<Self> {
        Self::with_offsets(
            regions,
            regions_per_rsu,
            region_length,
            lane_speeds,
            DEFAULT_RSU_OFFSET,
            DEFAULT_MBS_OFFSET,
        )
    }

    pub fn with_offsets(
        regions: Vec<Region>,
        regions_per_rsu: usize,
        region_length: f64,
        lane_speeds: Vec<f64>,
        rsu_offset: f64,
        mbs_offset: f64,
    ) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidLayout("road has no regions".into()));
        }
        if !(region_length.is_finite() && region_length > 0.0) {
            return Err(Error::InvalidLayout(format!(
                "region_length must be positive, got {region_length}"
            )));
        }
        if regions_per_rsu == 0 || !regions.len().is_multiple_of(regions_per_rsu) {
            return Err(Error::InvalidLayout(format!(
                "{} regions cannot be split into RSU spans of {regions_per_rsu} regions",
                regions.len()
            )));
        }
        if let Some(r) = regions.iter().find(|r| r.aoi_max == 0) {
            return Err(Error::InvalidLayout(format!(
                "aoi_max of a {} region must be positive",
                r.kind
            )));
        }
        if lane_speeds.is_empty() {
            return Err(Error::InvalidLayout("road has no lanes".into()));
        }
        if let Some(s) = lane_speeds.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::InvalidLayout(format!(
                "lane speed must be finite and nonnegative, got {s}"
            )));
        }
        if !(rsu_offset.is_finite() && mbs_offset.is_finite()) {
            return Err(Error::InvalidLayout("offsets must be finite".into()));
        }

        let total_length = region_length * regions.len() as f64;
        let span_length = region_length * regions_per_rsu as f64;
        let rsu_count = regions.len() / regions_per_rsu;
        let rsu_positions = (0..rsu_count)
            .map(|k| Point::new(span_length * (k as f64 + 0.5), rsu_offset))
            .collect();

        Ok(Self {
            region_length,
            regions,
            regions_per_rsu,
            rsu_positions,
            mbs_position: Point::new(total_length / 2.0, mbs_offset),
            lane_speeds,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.region_length * self.regions.len() as f64
    }

    pub fn region_length(&self) -> f64 {
        self.region_length
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, h: RegionId) -> Region {
        self.regions[h]
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn regions_per_rsu(&self) -> usize {
        self.regions_per_rsu
    }

    pub fn num_rsus(&self) -> usize {
        self.rsu_positions.len()
    }

    pub fn rsu_positions(&self) -> &[Point] {
        &self.rsu_positions
    }

    pub fn rsu_position(&self, k: usize) -> Point {
        self.rsu_positions[k]
    }

    pub fn mbs_position(&self) -> Point {
        self.mbs_position
    }

    pub fn lane_speeds(&self) -> &[f64] {
        &self.lane_speeds
    }

    pub fn aoi_max(&self) -> Vec<u32> {
        self.regions.iter().map(|r| r.aoi_max).collect()
    }

    /// Region containing `position`.
    pub fn region_at(&self, position: f64) -> Result<RegionId> {
        let total_length = self.total_length();
        if !(position >= 0.0 && position < total_length) {
            return Err(Error::PositionOutOfRange {
                position,
                total_length,
            });
        }
        let h = (position / self.region_length).floor() as usize;
        // Guard against rounding just below the road end.
        Ok(h.min(self.regions.len() - 1))
    }

    /// RSU whose span contains region `h`.
    pub fn rsu_of_region(&self, h: RegionId) -> usize {
        h / self.regions_per_rsu
    }

    /// Regions covered (and cached) by RSU `k`.
    pub fn rsu_span(&self, k: usize) -> Range<RegionId> {
        k * self.regions_per_rsu..(k + 1) * self.regions_per_rsu
    }

    /// Cache coverage in the shape the ledger expects.
    pub fn coverage(&self) -> Vec<Vec<RegionId>> {
        (0..self.num_rsus()).map(|k| self.rsu_span(k).collect()).collect()
    }
}

/// A CV-to-MBS transfer of the content describing `region`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Upload {
    pub cv: usize,
    pub region: RegionId,
}

/// An MBS-to-RSU transfer of the content describing `region`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Update {
    pub rsu: usize,
    pub region: RegionId,
}

/// A CV finished driving through `region` and now holds fresh content for it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PassEvent {
    pub cv: usize,
    pub region: RegionId,
}

/// Ages of every copy of every content item.
///
/// CV copies live in `[1, aoi_max]` and vanish when they expire or are
/// uploaded. MBS and RSU copies are never dropped and may age past
/// `aoi_max`, which only marks them as stale.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AoiLedger {
    aoi_max: Vec<u32>,
    coverage: Vec<Vec<RegionId>>,
    cv: Vec<Vec<Option<u32>>>,
    mbs: Vec<u32>,
    rsu: Vec<Vec<u32>>,
}

impl AoiLedger {
    /// A ledger with empty CV storage and every cached copy at age 1.
    pub fn new(aoi_max: Vec<u32>, coverage: Vec<Vec<RegionId>>, cvs: usize) -> Result<Self> {
        if aoi_max.contains(&0) {
            return Err(Error::InvalidLayout("aoi_max must be positive".into()));
        }
        for (k, regions) in coverage.iter().enumerate() {
            for (i, &h) in regions.iter().enumerate() {
                if h >= aoi_max.len() {
                    return Err(Error::InvalidLayout(format!(
                        "RSU {k} covers unknown region {h}"
                    )));
                }
                if regions[..i].contains(&h) {
                    return Err(Error::InvalidLayout(format!(
                        "RSU {k} covers region {h} twice"
                    )));
                }
            }
        }
        let regions = aoi_max.len();
        let rsu = coverage.iter().map(|c| vec![1; c.len()]).collect();
        Ok(Self {
            aoi_max,
            coverage,
            cv: vec![vec![None; regions]; cvs],
            mbs: vec![1; regions],
            rsu,
        })
    }

    pub fn for_layout(layout: &RoadLayout, cvs: usize) -> Self {
        Self::new(layout.aoi_max(), layout.coverage(), cvs)
            .expect("a validated layout yields a valid ledger")
    }

    pub fn num_regions(&self) -> usize {
        self.aoi_max.len()
    }

    pub fn num_cvs(&self) -> usize {
        self.cv.len()
    }

    pub fn num_rsus(&self) -> usize {
        self.coverage.len()
    }

    pub fn aoi_max(&self, h: RegionId) -> u32 {
        self.aoi_max[h]
    }

    pub fn aoi_max_all(&self) -> &[u32] {
        &self.aoi_max
    }

    pub fn coverage(&self, k: usize) -> &[RegionId] {
        &self.coverage[k]
    }

    pub fn cv_aoi(&self, j: usize, h: RegionId) -> Option<u32> {
        self.cv[j][h]
    }

    /// Regions for which CV `j` currently holds content, in region order.
    pub fn cv_contents(&self, j: usize) -> impl Iterator<Item = (RegionId, u32)> + '_ {
        self.cv[j]
            .iter()
            .enumerate()
            .filter_map(|(h, a)| a.map(|a| (h, a)))
    }

    pub fn mbs_aoi(&self, h: RegionId) -> u32 {
        self.mbs[h]
    }

    /// Age of RSU `k`'s copy of region `h`, or `None` if `k` does not cache it.
    pub fn rsu_aoi(&self, k: usize, h: RegionId) -> Option<u32> {
        let slot = self.coverage[k].iter().position(|&r| r == h)?;
        Some(self.rsu[k][slot])
    }

    /// Every cached RSU copy as `(rsu, region, age)`, ordered by `(rsu, slot)`.
    pub fn rsu_contents(&self) -> impl Iterator<Item = (usize, RegionId, u32)> + '_ {
        self.coverage.iter().enumerate().flat_map(move |(k, regions)| {
            regions
                .iter()
                .zip(&self.rsu[k])
                .map(move |(&h, &a)| (k, h, a))
        })
    }

    pub fn num_rsu_contents(&self) -> usize {
        self.coverage.iter().map(Vec::len).sum()
    }

    pub fn set_cv_aoi(&mut self, j: usize, h: RegionId, aoi: Option<u32>) {
        if let Some(a) = aoi {
            assert!(
                (1..=self.aoi_max[h]).contains(&a),
                "CV content age {a} outside [1, {}]",
                self.aoi_max[h]
            );
        }
        self.cv[j][h] = aoi;
    }

    pub fn set_mbs_aoi(&mut self, h: RegionId, aoi: u32) {
        self.mbs[h] = aoi;
    }

    /// Panics if RSU `k` does not cache region `h`.
    pub fn set_rsu_aoi(&mut self, k: usize, h: RegionId, aoi: u32) {
        let slot = self.coverage[k]
            .iter()
            .position(|&r| r == h)
            .unwrap_or_else(|| panic!("RSU {k} does not cache region {h}"));
        self.rsu[k][slot] = aoi;
    }

    /// Checks the structural feasibility of a set of transfers against this
    /// ledger: valid indices, one upload per CV and per region, one update
    /// per RSU, and no upload of content the CV does not hold.
    pub fn check_transfers(&self, uploads: &[Upload], updates: &[Update]) -> Result<()> {
        for (i, u) in uploads.iter().enumerate() {
            if u.cv >= self.num_cvs() || u.region >= self.num_regions() {
                return Err(Error::InfeasibleAction(format!(
                    "upload ({}, {}) references an unknown CV or region",
                    u.cv, u.region
                )));
            }
            if self.cv[u.cv][u.region].is_none() {
                return Err(Error::InfeasibleAction(format!(
                    "CV {} holds no content for region {}",
                    u.cv, u.region
                )));
            }
            if uploads[..i].iter().any(|o| o.cv == u.cv) {
                return Err(Error::InfeasibleAction(format!(
                    "CV {} uploads more than one content",
                    u.cv
                )));
            }
            if uploads[..i].iter().any(|o| o.region == u.region) {
                return Err(Error::InfeasibleAction(format!(
                    "region {} is uploaded by more than one CV",
                    u.region
                )));
            }
        }
        for (i, y) in updates.iter().enumerate() {
            if y.rsu >= self.num_rsus() || !self.coverage[y.rsu].contains(&y.region) {
                return Err(Error::InfeasibleAction(format!(
                    "update ({}, {}) references content the RSU does not cache",
                    y.rsu, y.region
                )));
            }
            if updates[..i].iter().any(|o| o.rsu == y.rsu) {
                return Err(Error::InfeasibleAction(format!(
                    "RSU {} receives more than one update",
                    y.rsu
                )));
            }
        }
        Ok(())
    }

    /// The ledger one slot later. See [`advance_aoi`].
    pub fn advance(
        &self,
        uploads: &[Upload],
        updates: &[Update],
        pass_events: &[PassEvent],
    ) -> Result<Self> {
        self.check_transfers(uploads, updates)?;
        if let Some(e) = pass_events
            .iter()
            .find(|e| e.cv >= self.num_cvs() || e.region >= self.num_regions())
        {
            return Err(Error::InfeasibleAction(format!(
                "pass event ({}, {}) references an unknown CV or region",
                e.cv, e.region
            )));
        }

        let mut next = self.clone();

        for (j, row) in next.cv.iter_mut().enumerate() {
            for (h, entry) in row.iter_mut().enumerate() {
                *entry = match *entry {
                    Some(_) if uploads.iter().any(|u| u.cv == j && u.region == h) => None,
                    Some(a) if a >= self.aoi_max[h] => None,
                    Some(a) => Some(a + 1),
                    None => None,
                };
            }
        }
        for e in pass_events {
            next.cv[e.cv][e.region] = Some(1);
        }

        for (h, a) in next.mbs.iter_mut().enumerate() {
            *a = match uploads.iter().find(|u| u.region == h) {
                Some(u) => self.cv[u.cv][h].expect("checked above"),
                None => *a + 1,
            };
        }

        for (k, ages) in next.rsu.iter_mut().enumerate() {
            for (slot, a) in ages.iter_mut().enumerate() {
                let h = self.coverage[k][slot];
                *a = if updates.iter().any(|y| y.rsu == k && y.region == h) {
                    self.mbs[h]
                } else {
                    *a + 1
                };
            }
        }

        Ok(next)
    }
}

/// Applies one slot of the age dynamics.
///
/// * CV layer: uploaded content leaves the CV; content at `aoi_max` that was
///   not uploaded is deleted; anything else ages by one. A pass event then
///   stores fresh content with age 1, replacing any older copy.
/// * MBS layer: an upload replaces the MBS copy with the CV's copy as it was
///   at the start of the slot; otherwise it ages by one.
/// * RSU layer: an update replaces the RSU copy with the MBS copy as it was
///   at the start of the slot; otherwise it ages by one.
pub fn advance_aoi(
    ledger: &AoiLedger,
    uploads: &[Upload],
    updates: &[Update],
    pass_events: &[PassEvent],
) -> Result<AoiLedger> {
    ledger.advance(uploads, updates, pass_events)
}
