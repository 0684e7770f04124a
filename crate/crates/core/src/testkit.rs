//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aoi::{AoiLedger, PassEvent};
use crate::caching::{ChannelLimits, LinkContext, UtilityParams, WeightMode};

/// Ledgers with up to `regions` regions, `cvs` CVs and `rsus` RSUs whose
/// coverage sets are arbitrary (possibly empty or overlapping).
pub fn arb_ledger(regions: usize, cvs: usize, rsus: usize) -> impl Strategy<Value = AoiLedger> {
    (1..=regions, 0..=cvs, 0..=rsus).prop_flat_map(|(n, cvs, rsus)| {
        (
            prop::collection::vec(1u32..=12, n),
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), rsus),
            prop::collection::vec(prop::collection::vec(prop::option::of(1u32..=12), n), cvs),
            prop::collection::vec(1u32..=30, n),
            prop::collection::vec(1u32..=30, n * rsus),
        )
            .prop_map(move |(aoi_max, cover, cv, mbs, rsu)| {
                let coverage = cover
                    .iter()
                    .map(|row| (0..n).filter(|&h| row[h]).collect())
                    .collect();
                let mut l = AoiLedger::new(aoi_max.clone(), coverage, cvs).unwrap();
                for (j, row) in cv.iter().enumerate() {
                    for (h, a) in row.iter().enumerate() {
                        l.set_cv_aoi(j, h, a.map(|a| a.min(aoi_max[h])));
                    }
                }
                for (h, &a) in mbs.iter().enumerate() {
                    l.set_mbs_aoi(h, a);
                }
                for k in 0..rsus {
                    for h in l.coverage(k).to_vec() {
                        l.set_rsu_aoi(k, h, rsu[k * n + h]);
                    }
                }
                l
            })
    })
}

pub fn arb_limits() -> impl Strategy<Value = ChannelLimits> {
    (0usize..=4, 0usize..=3, 0usize..=3).prop_map(|(total, cv, rsu)| ChannelLimits { total, cv, rsu })
}

/// Positive distances and normalized popularity rows sized for `ledger`.
pub fn arb_context(ledger: &AoiLedger) -> impl Strategy<Value = LinkContext> {
    let (n, cvs, rsus) = (ledger.num_regions(), ledger.num_cvs(), ledger.num_rsus());
    (
        prop::collection::vec(1.0f64..500.0, cvs),
        prop::collection::vec(1.0f64..500.0, rsus),
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, n), rsus),
    )
        .prop_map(|(cv_distance, rsu_distance, popularity)| LinkContext {
            cv_distance,
            rsu_distance,
            popularity,
        })
}

pub fn arb_params() -> impl Strategy<Value = UtilityParams> {
    (0.0f64..=1.0, 0.1f64..1e4, any::<bool>()).prop_map(|(epsilon, w, share)| UtilityParams {
        epsilon,
        w,
        weight_mode: if share { WeightMode::AoiShare } else { WeightMode::Uniform },
        popularity_floor: 0.01,
    })
}

/// Ledger together with a matching link context.
pub fn arb_instance() -> impl Strategy<Value = (AoiLedger, LinkContext)> {
    arb_ledger(4, 2, 2).prop_flat_map(|l| {
        let ctx = arb_context(&l);
        (Just(l), ctx)
    })
}

/// Every `(cv, region)` pair of `ledger` kept where the mask bit is set.
pub fn pass_events(ledger: &AoiLedger, mask: u64) -> Vec<PassEvent> {
    let n = ledger.num_regions();
    (0..ledger.num_cvs())
        .flat_map(|cv| (0..n).map(move |region| PassEvent { cv, region }))
        .enumerate()
        .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
        .map(|(_, e)| e)
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
