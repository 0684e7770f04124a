use std::collections::VecDeque;

use rand::Rng;

use crate::aoi::{link_distance, AoiLedger, PassEvent, Point, RegionId, RoadLayout};
use crate::caching::LinkContext;
use crate::service::RequestQueue;
use crate::sim::config::ScenarioConfig;
use crate::sim::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Uv,
    Cv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleState {
    /// Index among vehicles of the same role.
    pub id: usize,
    pub role: Role,
    /// Meters along the road, in `[0, total_length)`.
    pub position: f64,
    pub lane: usize,
    /// Meters per slot.
    pub speed: f64,
    /// Times the vehicle has wrapped past the road end.
    pub lap: u64,
}

impl VehicleState {
    pub fn point(&self) -> Point {
        Point::new(self.position, 0.0)
    }
}

/// A request issued at `slot` to RSU `rsu` for region `region`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RequestRecord {
    pub slot: u64,
    pub rsu: usize,
    pub region: RegionId,
}

#[derive(Clone, Debug)]
pub struct WorldState {
    pub clock: u64,
    pub uvs: Vec<VehicleState>,
    pub cvs: Vec<VehicleState>,
    pub ledger: AoiLedger,
    /// Live requests, one list per RSU.
    pub queues: Vec<Vec<RequestQueue>>,
    /// `popularity[k][h]`; zero outside RSU `k`'s span.
    pub popularity: Vec<Vec<f64>>,
    pub history: VecDeque<RequestRecord>,
}

fn place(layout: &RoadLayout, role: Role, per_rsu: usize, seed: u64) -> Vec<VehicleState> {
    let stream_id = match role {
        Role::Uv => 0,
        Role::Cv => 1,
    };
    let span = layout.region_length() * layout.regions_per_rsu() as f64;
    let lanes = layout.lane_speeds();
    let mut out = Vec::with_capacity(per_rsu * layout.num_rsus());
    for k in 0..layout.num_rsus() {
        for _ in 0..per_rsu {
            let id = out.len();
            let mut rng = stream_rng(seed, Stream::Placement, stream_id, id as u64);
            let position = span * k as f64 + rng.gen_range(0.0..span);
            let lane = rng.gen_range(0..lanes.len());
            out.push(VehicleState {
                id,
                role,
                position,
                lane,
                speed: lanes[lane],
                lap: 0,
            });
        }
    }
    out
}

impl WorldState {
    /// Vehicles spread evenly over the RSU spans, no live requests, uniform
    /// popularity, and cached ages drawn uniformly from `[1, aoi_max]`.
    pub fn new(config: &ScenarioConfig, layout: &RoadLayout) -> Self {
        let uvs = place(layout, Role::Uv, config.vehicles.uvs_per_rsu, config.seed);
        let cvs = place(layout, Role::Cv, config.vehicles.cvs_per_rsu, config.seed);
        let mut ledger = AoiLedger::for_layout(layout, cvs.len());
        let mut rng = stream_rng(config.seed, Stream::InitialAges, 0, 0);
        for h in 0..layout.num_regions() {
            let a = rng.gen_range(1..=ledger.aoi_max(h));
            ledger.set_mbs_aoi(h, a);
        }
        for k in 0..layout.num_rsus() {
            for h in layout.rsu_span(k) {
                let a = rng.gen_range(1..=ledger.aoi_max(h));
                ledger.set_rsu_aoi(k, h, a);
            }
        }
        Self {
            clock: 0,
            uvs,
            cvs,
            ledger,
            queues: vec![Vec::new(); layout.num_rsus()],
            popularity: update_popularity(layout, std::iter::empty(), 1.0),
            history: VecDeque::new(),
        }
    }

    pub fn has_live_request(&self, uv: usize) -> bool {
        self.queues.iter().flatten().any(|q| q.uv_id == uv)
    }

    pub fn live_requests(&self) -> usize {
        self.queues.iter().map(Vec::len).sum()
    }

    /// Distances and popularity the MBS sees this slot.
    pub fn link_context(&self, layout: &RoadLayout) -> LinkContext {
        let mbs = layout.mbs_position();
        LinkContext {
            cv_distance: self.cvs.iter().map(|v| link_distance(v.point(), mbs)).collect(),
            rsu_distance: layout.rsu_positions().iter().map(|&p| link_distance(p, mbs)).collect(),
            popularity: self.popularity.clone(),
        }
    }
}

/// Moves a vehicle one slot, wrapping at the road end. Returns the regions
/// it finished crossing, in order.
pub fn move_vehicle(vehicle: &mut VehicleState, layout: &RoadLayout) -> Vec<RegionId> {
    let total = layout.total_length();
    let rl = layout.region_length();
    let n = layout.num_regions();
    let start = vehicle.position;
    let end = start + vehicle.speed;
    let first = (start / rl).floor() as u64;
    let last = (end / rl).floor() as u64;
    let crossed = (first..last).map(|r| (r % n as u64) as RegionId).collect();
    let laps = (end / total).floor();
    let mut position = end - laps * total;
    if position >= total {
        position -= total;
    }
    vehicle.position = position.max(0.0);
    vehicle.lap += laps as u64;
    crossed
}

/// Advances every vehicle and returns the content-creation events of CVs.
pub fn step_world(world: &mut WorldState, layout: &RoadLayout) -> Vec<PassEvent> {
    world.clock += 1;
    for uv in &mut world.uvs {
        move_vehicle(uv, layout);
    }
    let mut events = Vec::new();
    for cv in &mut world.cvs {
        for region in move_vehicle(cv, layout) {
            events.push(PassEvent { cv: cv.id, region });
        }
    }
    events
}

/// Drops requests whose UV has passed the target region or wrapped.
/// Returns the number dropped.
pub fn expire_requests(world: &mut WorldState, layout: &RoadLayout) -> usize {
    let uvs = &world.uvs;
    let mut dropped = 0;
    for queues in &mut world.queues {
        queues.retain(|q| {
            let uv = &uvs[q.uv_id];
            let region = layout.region_at(uv.position).expect("vehicles stay on the road");
            let keep = q.is_valid_for(region, uv.lap);
            dropped += usize::from(!keep);
            keep
        });
    }
    dropped
}

/// Each UV without a live request issues one with probability
/// `probability`, targeting a region of its current RSU at or ahead of it.
pub fn generate_requests(
    world: &mut WorldState,
    layout: &RoadLayout,
    probability: f64,
    seed: u64,
) -> Vec<RequestQueue> {
    let mut issued = Vec::new();
    for uv in 0..world.uvs.len() {
        let mut rng = stream_rng(seed, Stream::Requests, world.clock, uv as u64);
        let draw: f64 = rng.gen();
        if world.has_live_request(uv) || draw >= probability {
            continue;
        }
        let v = &world.uvs[uv];
        let region = layout.region_at(v.position).expect("vehicles stay on the road");
        let rsu = layout.rsu_of_region(region);
        let target = rng.gen_range(region..layout.rsu_span(rsu).end);
        let q = RequestQueue::new(uv, rsu, target, v.lap, world.clock);
        world.history.push_back(RequestRecord {
            slot: world.clock,
            rsu,
            region: target,
        });
        world.queues[rsu].push(q.clone());
        issued.push(q);
    }
    issued
}

/// Smoothed request frequencies per RSU:
/// `(count_h + lambda) / (total + lambda * span)`, zero outside the span.
pub fn update_popularity<I>(layout: &RoadLayout, recent: I, lambda: f64) -> Vec<Vec<f64>>
where
    I: IntoIterator<Item = RequestRecord>,
{
    let n = layout.num_regions();
    let mut counts = vec![vec![0.0; n]; layout.num_rsus()];
    for r in recent {
        counts[r.rsu][r.region] += 1.0;
    }
    (0..layout.num_rsus())
        .map(|k| {
            let span = layout.rsu_span(k);
            let total: f64 = counts[k][span.clone()].iter().sum();
            let denom = total + lambda * span.len() as f64;
            let mut row = vec![0.0; n];
            for h in span.clone() {
                row[h] = if denom > 0.0 {
                    (counts[k][h] + lambda) / denom
                } else {
                    1.0 / span.len() as f64
                };
            }
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
            row
        })
        .collect()
}

/// Drops history older than `window` slots and re-estimates popularity.
pub fn refresh_popularity(world: &mut WorldState, layout: &RoadLayout, window: u64, floor: f64) {
    while world
        .history
        .front()
        .is_some_and(|r| r.slot + window <= world.clock)
    {
        world.history.pop_front();
    }
    let lambda = floor * window as f64;
    world.popularity = update_popularity(layout, world.history.iter().copied(), lambda);
}
