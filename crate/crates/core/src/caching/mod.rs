//! Stage one: deciding which CV contents the MBS uploads and which RSU
//! caches it refreshes in each slot.
//!
//! The per-slot decision is a [`CachingAction`]. Its value is the caching
//! utility (freshness of RSU caches relative to each region's validity
//! threshold, minus link cost). [`value_iteration`] solves small discretized
//! instances exactly; the policies in [`policy`] scale to full scenarios.

mod actions;
mod mdp;
mod micro;
pub mod policy;
mod utility;

pub use actions::{enumerate_actions, ActionSpace, CachingAction, ChannelLimits};
pub use mdp::{finite_horizon_values, value_iteration, FiniteMdp, MdpConfig, StateAction, ValueIterationResult};
pub use micro::{MicroInstance, MicroMdp};
pub use policy::{
    action_utility, aoi_greedy_policy, lookahead_caching_policy, myopic_caching_policy, random_policy,
    CachingPolicy, PlannerConfig,
};
pub use utility::{
    auto_calibrate_w, caching_utility, freshness, link_cost, transition, LinkContext, UtilityParams,
    WeightMode,
};
