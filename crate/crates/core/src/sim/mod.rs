//! Scenario harness: vehicles driving a looping highway, UV requests,
//! popularity estimation, and the per-slot caching-then-service pipeline.

mod config;
mod metrics;
mod rng;
mod run;
mod world;

pub use config::{
    mean_service_distance, region_traversal_slots, AoiMaxConfig, CachingConfig, RequestConfig,
    RoadConfig, ScenarioConfig, ServiceConfig, VSetting, VehicleConfig,
};
pub use metrics::{
    csv_reader, write_summaries, ContentLabel, KindStat, MetricsLog, ServiceEvent, SlotRow, Summary,
    CSV_SCHEMA_VERSION, KIND_STATS_INTERVAL, SUMMARY_COLUMNS,
};
pub use rng::{stream_rng, Stream};
pub use run::{effective_w, run_scenario};
pub use world::{
    expire_requests, generate_requests, move_vehicle, refresh_popularity, step_world,
    update_popularity, RequestRecord, Role, VehicleState, WorldState,
};
