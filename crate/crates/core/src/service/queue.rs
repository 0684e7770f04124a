use serde::{Deserialize, Serialize};

use crate::aoi::RegionId;

/// Backlog added per slot a request waits.
pub const ARRIVAL_PER_SLOT: f64 = 1.0;

/// Waiting-time queue of one UV's outstanding request at one RSU.
///
/// The UV wants the content of `target_region` before it drives through
/// that region. `lap` distinguishes passes over the same road stretch: a UV
/// that wraps around the road end is a new arrival.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestQueue {
    pub uv_id: usize,
    pub rsu_id: usize,
    pub target_region: RegionId,
    pub lap: u64,
    /// Accumulated waiting time in slots.
    pub backlog: f64,
    pub created_at: u64,
}

impl RequestQueue {
    pub fn new(uv_id: usize, rsu_id: usize, target_region: RegionId, lap: u64, created_at: u64) -> Self {
        Self {
            uv_id,
            rsu_id,
            target_region,
            lap,
            backlog: 0.0,
            created_at,
        }
    }

    /// One-hot request vector over `regions` regions.
    pub fn request_vector(&self, regions: usize) -> Vec<u8> {
        (0..regions).map(|h| u8::from(h == self.target_region)).collect()
    }

    /// The queue only exists while the UV has not passed its target region.
    pub fn is_valid_for(&self, uv_region: RegionId, uv_lap: u64) -> bool {
        uv_lap == self.lap && uv_region <= self.target_region
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemovalReason {
    /// Served; the backlog was flushed.
    Served,
    /// The UV passed the target region unserved.
    Expired,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QueueStep {
    Pending(RequestQueue),
    Removed(RemovalReason),
}

/// Departure of the backlog when served: everything accumulated leaves.
pub fn departure(queue: &RequestQueue, served: bool) -> f64 {
    if served {
        queue.backlog
    } else {
        0.0
    }
}

/// Advances a queue one slot: `Q' = max(Q - b, 0) + a` with `a = 1` and
/// `b = Q` when served. A served queue is flushed and removed; a queue
/// whose UV is past the target region is removed regardless of backlog.
pub fn queue_step(queue: &RequestQueue, served: bool, uv_region: RegionId) -> QueueStep {
    if uv_region > queue.target_region {
        return QueueStep::Removed(RemovalReason::Expired);
    }
    if served {
        return QueueStep::Removed(RemovalReason::Served);
    }
    let b = departure(queue, served);
    let mut next = queue.clone();
    next.backlog = (queue.backlog - b).max(0.0) + ARRIVAL_PER_SLOT;
    QueueStep::Pending(next)
}
