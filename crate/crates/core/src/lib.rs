//! Discrete-time simulator and policy library for age-of-information aware
//! content caching and delivery in connected-vehicle networks.
//!
//! The road is split into regions whose road-condition content is produced
//! by content vehicles (CVs), gathered by a macro base station (MBS), cached
//! at road side units (RSUs) and served to user vehicles (UVs). Each slot runs
//! two independent stages:
//!
//! 1. [`caching`]: the MBS picks CV uploads and RSU updates.
//! 2. [`service`]: every RSU decides which pending UV requests to serve,
//!    using drift-plus-penalty control over per-UV waiting queues.
//!
//! [`sim`] ties the stages to vehicle mobility and request generation and
//! records metrics.

pub mod aoi;
pub mod caching;
mod error;
pub mod service;
pub mod sim;
#[cfg(test)]
mod testkit;

pub use error::{Error, Result};
