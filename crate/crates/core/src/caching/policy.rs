//! Stage-one decision rules.
//!
//! * [`myopic_caching_policy`]: maximizes the caching utility of the current
//!   slot. This is exactly the optimal policy when the discount is zero.
//! * [`lookahead_caching_policy`]: adds the discounted value of the best
//!   refresh the next slot makes possible, which is what makes uploads
//!   worth paying for. The full-scale proposed policy.
//! * [`aoi_greedy_policy`] and [`random_policy`]: baselines.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aoi::{AoiLedger, Update, Upload};
use crate::caching::utility::link_cost;
use crate::caching::{ActionSpace, CachingAction, ChannelLimits, LinkContext, UtilityParams, WeightMode};

/// Stage-one policy selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CachingPolicy {
    Proposed,
    AoiGreedy,
    Random,
}

impl CachingPolicy {
    pub const ALL: [CachingPolicy; 3] = [
        CachingPolicy::Proposed,
        CachingPolicy::AoiGreedy,
        CachingPolicy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CachingPolicy::Proposed => "proposed",
            CachingPolicy::AoiGreedy => "aoi-greedy",
            CachingPolicy::Random => "random",
        }
    }
}

impl fmt::Display for CachingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CachingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown stage-1 policy `{s}` (expected proposed, aoi-greedy or random)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Discount applied to the next slot's best refresh. Zero gives the
    /// myopic policy.
    pub lookahead: f64,
    /// Largest action set searched exhaustively; larger sets fall back to
    /// greedy marginal-gain selection.
    pub exhaustive_bound: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            lookahead: 0.9,
            exhaustive_bound: 20_000,
        }
    }
}

impl PlannerConfig {
    pub fn myopic(exhaustive_bound: u64) -> Self {
        Self {
            lookahead: 0.0,
            exhaustive_bound,
        }
    }
}

/// RSU ages after `action`, in `rsu_contents` order.
fn next_rsu_ages(ledger: &AoiLedger, action: &CachingAction) -> Vec<u32> {
    ledger
        .rsu_contents()
        .map(|(k, h, a)| {
            if action.y(k, h) {
                ledger.mbs_aoi(h)
            } else {
                a + 1
            }
        })
        .collect()
}

/// Freshness term over `ages` given in `rsu_contents` order. Must perform
/// the same arithmetic as [`crate::caching::utility::freshness`].
fn freshness_of(ledger: &AoiLedger, ages: &[u32], ctx: &LinkContext, params: &UtilityParams) -> f64 {
    let n = ages.len();
    if n == 0 {
        return 0.0;
    }
    let total_age: f64 = ages.iter().map(|&a| f64::from(a.max(1))).sum();
    ledger
        .rsu_contents()
        .zip(ages)
        .map(|((k, h, _), &a)| {
            let age = f64::from(a.max(1));
            let weight = match params.weight_mode {
                WeightMode::Uniform => 1.0 / n as f64,
                WeightMode::AoiShare => age / total_age,
            };
            f64::from(ledger.aoi_max(h)) / age * weight * ctx.popularity(k, h)
        })
        .sum()
}

/// Caching utility of `action` without materializing the next ledger.
/// Bit-identical to `caching_utility(&ledger.advance(..), action, ..)`.
pub fn action_utility(
    ledger: &AoiLedger,
    action: &CachingAction,
    ctx: &LinkContext,
    params: &UtilityParams,
) -> f64 {
    let ages = next_rsu_ages(ledger, action);
    let eps = params.epsilon;
    eps * (freshness_of(ledger, &ages, ctx, params) * params.w)
        - (1.0 - eps) * link_cost(action, ctx, params)
}

/// Value of the best set of refreshes available one slot after `action`,
/// relative to refreshing nothing. Each refresh is scored holding the other
/// contents fixed; RSUs keep their single best positive refresh and the top
/// ones within the RSU channel cap are summed.
fn next_refresh_value(
    ledger: &AoiLedger,
    action: &CachingAction,
    ctx: &LinkContext,
    params: &UtilityParams,
    limits: &ChannelLimits,
) -> f64 {
    let eps = params.epsilon;
    let ages = next_rsu_ages(ledger, action);
    let n = ages.len();
    if n == 0 {
        return 0.0;
    }
    let total_age: f64 = ages.iter().map(|&a| f64::from(a.max(1))).sum();
    let mut best_per_rsu = vec![0.0f64; ledger.num_rsus()];
    for ((k, h, _), &a) in ledger.rsu_contents().zip(&ages) {
        let mbs_next = match action.uploads().iter().find(|u| u.region == h) {
            Some(u) => ledger.cv_aoi(u.cv, h).expect("feasible upload"),
            None => ledger.mbs_aoi(h) + 1,
        };
        let refreshed = f64::from(mbs_next.max(1));
        let stale = f64::from((a + 1).max(1));
        let scale = f64::from(ledger.aoi_max(h)) * ctx.popularity(k, h);
        let gain_fresh = match params.weight_mode {
            WeightMode::Uniform => scale * (1.0 / refreshed - 1.0 / stale) / n as f64,
            WeightMode::AoiShare => {
                let others = total_age - stale;
                scale / (others + refreshed) - scale / (others + stale)
            }
        };
        let p = ctx.popularity(k, h).max(params.popularity_floor);
        let gain = eps * gain_fresh * params.w - (1.0 - eps) * ctx.rsu_distance[k] / p;
        if gain > best_per_rsu[k] {
            best_per_rsu[k] = gain;
        }
    }
    best_per_rsu.sort_by(|a, b| b.total_cmp(a));
    let channels = limits.rsu.min(limits.total);
    best_per_rsu.iter().take(channels).sum()
}

fn planning_value(
    ledger: &AoiLedger,
    action: &CachingAction,
    ctx: &LinkContext,
    params: &UtilityParams,
    limits: &ChannelLimits,
    lookahead: f64,
) -> f64 {
    let immediate = action_utility(ledger, action, ctx, params);
    if lookahead == 0.0 {
        return immediate;
    }
    immediate + lookahead * next_refresh_value(ledger, action, ctx, params, limits)
}

/// Single links that can be added to `action` without breaking feasibility,
/// uploads by `(cv, region)` then updates by `(rsu, region)`.
fn extensions(ledger: &AoiLedger, action: &CachingAction, limits: &ChannelLimits) -> Vec<CachingAction> {
    let mut out = Vec::new();
    if action.link_count() >= limits.total {
        return out;
    }
    if action.uploads().len() < limits.cv {
        for j in 0..ledger.num_cvs() {
            if action.uploads().iter().any(|u| u.cv == j) {
                continue;
            }
            for (h, _) in ledger.cv_contents(j) {
                if action.uploads().iter().all(|u| u.region != h) {
                    out.push(action.with_upload(Upload { cv: j, region: h }));
                }
            }
        }
    }
    if action.updates().len() < limits.rsu {
        for k in 0..ledger.num_rsus() {
            if action.updates().iter().any(|y| y.rsu == k) {
                continue;
            }
            for &h in ledger.coverage(k) {
                out.push(action.with_update(Update { rsu: k, region: h }));
            }
        }
    }
    out
}

/// Maximizes the planning value: exhaustively when the feasible set is at
/// most `exhaustive_bound`, otherwise by repeatedly adding the single link
/// with the largest strict improvement. Ties go to the earliest action in
/// canonical order.
pub fn lookahead_caching_policy(
    ledger: &AoiLedger,
    ctx: &LinkContext,
    params: &UtilityParams,
    limits: &ChannelLimits,
    planner: &PlannerConfig,
) -> CachingAction {
    let value = |a: &CachingAction| planning_value(ledger, a, ctx, params, limits, planner.lookahead);
    let space = ActionSpace::new(ledger, limits);
    if space.len() <= planner.exhaustive_bound {
        let mut best = CachingAction::noop();
        let mut best_value = value(&best);
        for action in space.iter().skip(1) {
            let v = value(&action);
            if v > best_value {
                best = action;
                best_value = v;
            }
        }
        return best;
    }

    let mut current = CachingAction::noop();
    let mut current_value = value(&current);
    loop {
        let mut improved: Option<(CachingAction, f64)> = None;
        for candidate in extensions(ledger, &current, limits) {
            let v = value(&candidate);
            let threshold = improved.as_ref().map_or(current_value, |(_, b)| *b);
            if v > threshold {
                improved = Some((candidate, v));
            }
        }
        match improved {
            Some((a, v)) => {
                current = a;
                current_value = v;
            }
            None => return current,
        }
    }
}

/// One-slot utility maximizer.
pub fn myopic_caching_policy(
    ledger: &AoiLedger,
    ctx: &LinkContext,
    params: &UtilityParams,
    limits: &ChannelLimits,
    exhaustive_bound: u64,
) -> CachingAction {
    lookahead_caching_policy(ledger, ctx, params, limits, &PlannerConfig::myopic(exhaustive_bound))
}

/// Picks, within the channel limits, the transfers with the largest drop in
/// the summed raw age of MBS and RSU copies, ignoring validity thresholds
/// and cost. An upload of `(j, h)` drops the MBS age by `A_h - A^c_{j,h}`;
/// an update of `(k, h)` drops the RSU age by `A^R_{k,h} - A_h`.
pub fn aoi_greedy_policy(ledger: &AoiLedger, limits: &ChannelLimits) -> CachingAction {
    #[derive(Clone, Copy)]
    enum Link {
        Up(Upload),
        Down(Update),
    }
    let mut candidates: Vec<(u32, Link)> = Vec::new();
    for j in 0..ledger.num_cvs() {
        for (h, a) in ledger.cv_contents(j) {
            let mbs = ledger.mbs_aoi(h);
            if mbs > a {
                candidates.push((mbs - a, Link::Up(Upload { cv: j, region: h })));
            }
        }
    }
    for (k, h, a) in ledger.rsu_contents() {
        let mbs = ledger.mbs_aoi(h);
        if a > mbs {
            candidates.push((a - mbs, Link::Down(Update { rsu: k, region: h })));
        }
    }
    // Stable sort keeps uploads before updates and lexicographic order on ties.
    candidates.sort_by_key(|c| std::cmp::Reverse(c.0));

    let mut uploads: Vec<Upload> = Vec::new();
    let mut updates: Vec<Update> = Vec::new();
    for (_, link) in candidates {
        if uploads.len() + updates.len() >= limits.total {
            break;
        }
        match link {
            Link::Up(u) => {
                if uploads.len() < limits.cv
                    && uploads.iter().all(|o| o.cv != u.cv && o.region != u.region)
                {
                    uploads.push(u);
                }
            }
            Link::Down(y) => {
                if updates.len() < limits.rsu && updates.iter().all(|o| o.rsu != y.rsu) {
                    updates.push(y);
                }
            }
        }
    }
    CachingAction::new(uploads, updates)
}

/// Uniform draw from the feasible action set.
pub fn random_policy<R: Rng + ?Sized>(
    ledger: &AoiLedger,
    limits: &ChannelLimits,
    rng: &mut R,
) -> CachingAction {
    let space = ActionSpace::new(ledger, limits);
    let index = rng.gen_range(0..space.len());
    space.nth(index).expect("index in range")
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::caching::{caching_utility, enumerate_actions};

    fn ctx(rsus: usize, regions: usize, cvs: usize) -> LinkContext {
        LinkContext {
            cv_distance: vec![100.0; cvs],
            rsu_distance: vec![200.0; rsus],
            popularity: vec![vec![1.0 / regions as f64; regions]; rsus],
        }
    }

    #[test]
    fn action_utility_matches_materialized_ledger() {
        let mut l = AoiLedger::new(vec![8, 20, 10], vec![vec![0, 1], vec![2]], 2).unwrap();
        l.set_cv_aoi(0, 1, Some(2));
        l.set_cv_aoi(1, 2, Some(5));
        l.set_mbs_aoi(0, 3);
        l.set_rsu_aoi(0, 1, 14);
        let c = LinkContext {
            cv_distance: vec![120.0, 340.0],
            rsu_distance: vec![250.0, 75.0],
            popularity: vec![vec![0.6, 0.4, 0.0], vec![0.0, 0.0, 1.0]],
        };
        for mode in [WeightMode::Uniform, WeightMode::AoiShare] {
            let params = UtilityParams {
                w: 37.0,
                weight_mode: mode,
                ..Default::default()
            };
            for a in enumerate_actions(&l, &ChannelLimits::unlimited()) {
                let next = l.advance(a.uploads(), a.updates(), &[]).unwrap();
                assert_eq!(
                    action_utility(&l, &a, &c, &params).to_bits(),
                    caching_utility(&next, &a, &c, &params).to_bits()
                );
            }
        }
    }

    #[test]
    fn myopic_idles_when_links_cost_more_than_they_gain() {
        let mut l = AoiLedger::new(vec![20, 20], vec![vec![0, 1]], 1).unwrap();
        l.set_cv_aoi(0, 0, Some(1));
        let params = UtilityParams {
            w: 1.0,
            ..Default::default()
        };
        let a = myopic_caching_policy(&l, &ctx(1, 2, 1), &params, &ChannelLimits::default(), 20_000);
        assert!(a.is_noop());
    }

    #[test]
    fn myopic_refreshes_the_stale_content_with_one_channel() {
        let mut l = AoiLedger::new(vec![10, 10], vec![vec![0, 1]], 0).unwrap();
        l.set_mbs_aoi(0, 1);
        l.set_mbs_aoi(1, 1);
        l.set_rsu_aoi(0, 0, 40);
        l.set_rsu_aoi(0, 1, 2);
        let params = UtilityParams {
            w: 1000.0,
            ..Default::default()
        };
        let limits = ChannelLimits { total: 1, cv: 1, rsu: 1 };
        let a = myopic_caching_policy(&l, &ctx(1, 2, 0), &params, &limits, 20_000);
        assert_eq!(a.updates(), &[Update { rsu: 0, region: 0 }]);
    }

    #[test]
    fn greedy_fallback_respects_constraints() {
        let mut l = AoiLedger::new(vec![10; 6], vec![vec![0, 1, 2], vec![3, 4, 5]], 3).unwrap();
        for j in 0..3 {
            for h in 0..6 {
                l.set_cv_aoi(j, h, Some(1 + ((j + h) % 3) as u32));
            }
        }
        for h in 0..6 {
            l.set_mbs_aoi(h, 9);
        }
        let params = UtilityParams {
            w: 50_000.0,
            ..Default::default()
        };
        let limits = ChannelLimits::default();
        let planner = PlannerConfig {
            lookahead: 0.9,
            exhaustive_bound: 0,
        };
        let a = lookahead_caching_policy(&l, &ctx(2, 6, 3), &params, &limits, &planner);
        a.check(&l, &limits).unwrap();
        assert!(!a.uploads().is_empty());
    }

    #[test]
    fn lookahead_values_uploads_that_enable_refreshes() {
        let mut l = AoiLedger::new(vec![10], vec![vec![0]], 1).unwrap();
        l.set_cv_aoi(0, 0, Some(1));
        l.set_mbs_aoi(0, 15);
        l.set_rsu_aoi(0, 0, 15);
        let params = UtilityParams {
            w: 2000.0,
            ..Default::default()
        };
        let c = ctx(1, 1, 1);
        let limits = ChannelLimits::default();
        let myopic = myopic_caching_policy(&l, &c, &params, &limits, 20_000);
        assert!(myopic.uploads().is_empty());
        let ahead = lookahead_caching_policy(&l, &c, &params, &limits, &PlannerConfig::default());
        assert_eq!(ahead.uploads(), &[Upload { cv: 0, region: 0 }]);
    }

    #[test]
    fn aoi_greedy_prefers_largest_reduction() {
        let mut l = AoiLedger::new(vec![20, 20], vec![vec![0], vec![1]], 0).unwrap();
        l.set_mbs_aoi(0, 2);
        l.set_rsu_aoi(0, 0, 30);
        let a = aoi_greedy_policy(&l, &ChannelLimits::default());
        assert!(a.y(0, 0));

        let mut equal = AoiLedger::new(vec![20, 20], vec![vec![0, 1]], 0).unwrap();
        equal.set_mbs_aoi(0, 4);
        equal.set_rsu_aoi(0, 0, 4);
        assert!(aoi_greedy_policy(&equal, &ChannelLimits::default()).is_noop());

        let mut two = AoiLedger::new(vec![20, 20], vec![vec![0], vec![1]], 0).unwrap();
        two.set_mbs_aoi(0, 1);
        two.set_rsu_aoi(0, 0, 6);
        two.set_mbs_aoi(1, 1);
        two.set_rsu_aoi(1, 1, 10);
        let limits = ChannelLimits { total: 1, cv: 1, rsu: 1 };
        assert_eq!(aoi_greedy_policy(&two, &limits).updates(), &[Update { rsu: 1, region: 1 }]);
    }

    #[test]
    fn random_is_reproducible_and_trivial_on_singletons() {
        let mut l = AoiLedger::new(vec![5, 5], vec![vec![0, 1]], 1).unwrap();
        l.set_cv_aoi(0, 0, Some(1));
        l.set_cv_aoi(0, 1, Some(2));
        let limits = ChannelLimits::default();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| random_policy(&l, &limits, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));

        let empty = AoiLedger::new(vec![5], vec![], 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(random_policy(&empty, &limits, &mut rng).is_noop());
    }

    #[test]
    fn policy_names_round_trip() {
        for p in CachingPolicy::ALL {
            assert_eq!(p.name().parse::<CachingPolicy>().unwrap(), p);
        }
        assert!("best".parse::<CachingPolicy>().is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::*;
        use crate::testkit::{arb_instance, arb_limits, arb_params, rng};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn policies_pick_feasible_actions(
                (l, c) in arb_instance(),
                limits in arb_limits(),
                params in arb_params(),
                seed: u64,
            ) {
                let feasible = enumerate_actions(&l, &limits);
                let picks = [
                    myopic_caching_policy(&l, &c, &params, &limits, 20_000),
                    lookahead_caching_policy(&l, &c, &params, &limits, &PlannerConfig::default()),
                    lookahead_caching_policy(&l, &c, &params, &limits, &PlannerConfig { lookahead: 0.9, exhaustive_bound: 1 }),
                    aoi_greedy_policy(&l, &limits),
                    random_policy(&l, &limits, &mut rng(seed)),
                ];
                for a in &picks {
                    prop_assert!(a.check(&l, &limits).is_ok());
                    prop_assert!(feasible.contains(a));
                }
            }

            #[test]
            fn exhaustive_myopic_is_optimal((l, c) in arb_instance(), limits in arb_limits(), params in arb_params()) {
                let best = myopic_caching_policy(&l, &c, &params, &limits, u64::MAX);
                let value = action_utility(&l, &best, &c, &params);
                for a in enumerate_actions(&l, &limits) {
                    prop_assert!(action_utility(&l, &a, &c, &params) <= value);
                }
            }

            #[test]
            fn shortcut_utility_is_exact((l, c) in arb_instance(), limits in arb_limits(), params in arb_params(), seed: u64) {
                let a = random_policy(&l, &limits, &mut rng(seed));
                let next = l.advance(a.uploads(), a.updates(), &[]).unwrap();
                prop_assert_eq!(
                    action_utility(&l, &a, &c, &params).to_bits(),
                    caching_utility(&next, &a, &c, &params).to_bits()
                );
            }
        }
    }
}
