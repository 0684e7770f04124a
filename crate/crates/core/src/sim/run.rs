use rayon::prelude::*;

use crate::aoi::{link_distance, RoadLayout};
use crate::caching::{
    aoi_greedy_policy, auto_calibrate_w, lookahead_caching_policy, random_policy, transition,
    CachingAction, CachingPolicy, UtilityParams,
};
use crate::error::Result;
use crate::service::{
    queue_step, received_aoi, service_cost, DppParams, QueueStep, ServiceCandidate, ServiceDecision,
};
use crate::sim::config::ScenarioConfig;
use crate::sim::metrics::{ContentLabel, MetricsLog, ServiceEvent, SlotRow};
use crate::sim::rng::{stream_rng, Stream};
use crate::sim::world::{
    expire_requests, generate_requests, refresh_popularity, step_world, WorldState,
};

/// Weight `w` a run of `config` uses: the configured value, or one
/// calibrated on the initial world.
pub fn effective_w(config: &ScenarioConfig, layout: &RoadLayout, world: &WorldState) -> f64 {
    config.caching.w.unwrap_or_else(|| {
        auto_calibrate_w(
            &world.ledger,
            &world.link_context(layout),
            &config.utility_params(1.0),
            &config.caching.channels,
        )
    })
}

fn decide_caching(
    config: &ScenarioConfig,
    world: &WorldState,
    layout: &RoadLayout,
    params: &UtilityParams,
) -> CachingAction {
    let limits = &config.caching.channels;
    match config.caching.policy {
        CachingPolicy::Proposed => {
            let ctx = world.link_context(layout);
            lookahead_caching_policy(&world.ledger, &ctx, params, limits, &config.planner())
        }
        CachingPolicy::AoiGreedy => aoi_greedy_policy(&world.ledger, limits),
        CachingPolicy::Random => {
            let mut rng = stream_rng(config.seed, Stream::CachingPolicy, world.clock, 0);
            random_policy(&world.ledger, limits, &mut rng)
        }
    }
}

/// Stage-two decisions of every RSU, made independently.
fn decide_service(
    config: &ScenarioConfig,
    world: &WorldState,
    layout: &RoadLayout,
    dpp: &DppParams,
) -> Vec<(Vec<ServiceCandidate>, ServiceDecision)> {
    (0..layout.num_rsus())
        .into_par_iter()
        .map(|k| {
            let rsu = layout.rsu_position(k);
            let candidates: Vec<ServiceCandidate> = world.queues[k]
                .iter()
                .map(|q| ServiceCandidate {
                    uv_id: q.uv_id,
                    backlog: q.backlog,
                    distance: link_distance(world.uvs[q.uv_id].point(), rsu),
                    content_aoi: world
                        .ledger
                        .rsu_aoi(k, q.target_region)
                        .expect("requests target the RSU's own span"),
                    aoi_max: layout.region(q.target_region).aoi_max,
                })
                .collect();
            let decision = config.service.policy.decide(&candidates, dpp);
            (candidates, decision)
        })
        .collect()
}

/// Runs the two-stage pipeline for `config.horizon` slots. Each slot:
/// vehicles move, requests whose UV passed the target expire, new requests
/// arrive, the MBS uploads and updates, then every RSU serves.
pub fn run_scenario(config: &ScenarioConfig) -> Result<MetricsLog> {
    let layout = config.layout()?;
    let mut world = WorldState::new(config, &layout);
    let w = effective_w(config, &layout, &world);
    let params = config.utility_params(w);
    let dpp = config.dpp_params(&layout);

    let contents = world
        .ledger
        .rsu_contents()
        .map(|(k, h, _)| ContentLabel {
            rsu: k,
            region: h,
            kind: layout.region(h).kind,
            aoi_max: layout.region(h).aoi_max,
        })
        .collect();
    let mut log = MetricsLog {
        seed: config.seed,
        stage1: config.caching.policy.name().to_string(),
        stage2: config.service.policy.name().to_string(),
        v: dpp.v,
        w,
        contents,
        uvs: world.uvs.len(),
        rows: Vec::with_capacity(config.horizon as usize),
        events: Vec::new(),
    };

    for _ in 0..config.horizon {
        let passes = step_world(&mut world, &layout);
        let slot = world.clock;
        let expired = expire_requests(&mut world, &layout);
        let issued = generate_requests(&mut world, &layout, config.requests.probability, config.seed);
        refresh_popularity(
            &mut world,
            &layout,
            config.requests.popularity_window,
            config.caching.popularity_floor,
        );

        let action = decide_caching(config, &world, &layout, &params);
        let ctx = world.link_context(&layout);
        let (ledger, caching_cost) = transition(&world.ledger, &action, &passes, &ctx, &params)?;
        world.ledger = ledger;

        let mut row = SlotRow {
            slot,
            uploads: action.uploads().len(),
            updates: action.updates().len(),
            caching_cost,
            new_requests: issued.len(),
            expired,
            ..Default::default()
        };

        let decisions = decide_service(config, &world, &layout, &dpp);
        for (k, (candidates, decision)) in decisions.into_iter().enumerate() {
            for c in &candidates {
                let served = decision.action.alpha(c.uv_id);
                let blocked = decision.stale_blocked.contains(&c.uv_id);
                let cost = service_cost(served, c.distance);
                let q = world.queues[k].iter().find(|q| q.uv_id == c.uv_id).expect("candidate queue");
                log.events.push(ServiceEvent {
                    slot,
                    uv_id: c.uv_id,
                    rsu_id: k,
                    region: q.target_region,
                    backlog: c.backlog,
                    distance: c.distance,
                    alpha: u8::from(served),
                    cost,
                    received_aoi: received_aoi(c.content_aoi, served),
                    aoi_max: c.aoi_max,
                    stale_blocked: blocked,
                });
                row.pending += 1;
                row.served += usize::from(served);
                row.cost_save += usize::from(!served);
                row.stale_blocked += usize::from(blocked);
                row.service_cost += cost;
            }
            let uvs = &world.uvs;
            let region_of = |uv: usize| layout.region_at(uvs[uv].position).expect("vehicles stay on the road");
            world.queues[k] = world.queues[k]
                .iter()
                .filter_map(|q| match queue_step(q, decision.action.alpha(q.uv_id), region_of(q.uv_id)) {
                    QueueStep::Pending(next) => Some(next),
                    QueueStep::Removed(_) => None,
                })
                .collect();
        }

        row.rsu_aoi = world.ledger.rsu_contents().map(|(_, _, a)| a).collect();
        row.aoi_exceed = world
            .ledger
            .rsu_contents()
            .filter(|&(_, h, a)| a > world.ledger.aoi_max(h))
            .count();
        row.backlog = vec![0.0; world.uvs.len()];
        for q in world.queues.iter().flatten() {
            row.backlog[q.uv_id] = q.backlog;
        }
        log.rows.push(row);
    }
    Ok(log)
}
