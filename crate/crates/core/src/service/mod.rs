//! Stage two: RSUs deciding which pending UV requests to serve.
//!
//! Each UV request owns a queue that accumulates its waiting time. Serving
//! flushes the queue at the price of the UV-to-RSU distance; the
//! drift-plus-penalty rule trades the two through the weight `V`.

mod dpp;
pub mod drift;
mod queue;

pub use dpp::{
    cost_only_policy, dpp_decide, dpp_objective, latency_only_policy, received_aoi, reference_v,
    service_cost, DppParams, ServiceAction, ServiceCandidate, ServiceDecision, ServicePolicy,
    VPreset,
};
pub use drift::{drift_bound_check, DriftReport, DriftSlot, Trajectory};
pub use queue::{departure, queue_step, QueueStep, RemovalReason, RequestQueue, ARRIVAL_PER_SLOT};
