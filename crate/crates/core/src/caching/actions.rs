use serde::{Deserialize, Serialize};

use crate::aoi::{AoiLedger, RegionId, Update, Upload};
use crate::error::{Error, Result};

/// How many links the MBS may open in one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelLimits {
    /// Cap on uploads plus updates.
    pub total: usize,
    /// Cap on uploads (CV links).
    pub cv: usize,
    /// Cap on updates (RSU links).
    pub rsu: usize,
}

impl Default for ChannelLimits {
    fn default() -> Self {
        Self {
            total: 6,
            cv: 3,
            rsu: 3,
        }
    }
}

impl ChannelLimits {
    pub fn unlimited() -> Self {
        Self {
            total: usize::MAX,
            cv: usize::MAX,
            rsu: usize::MAX,
        }
    }
}

/// The uploads and updates the MBS performs in one slot.
///
/// Transfers are kept sorted so that equal selections compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CachingAction {
    uploads: Vec<Upload>,
    updates: Vec<Update>,
}

impl CachingAction {
    pub fn new(mut uploads: Vec<Upload>, mut updates: Vec<Update>) -> Self {
        uploads.sort_unstable();
        updates.sort_unstable();
        Self { uploads, updates }
    }

    pub fn noop() -> Self {
        Self::default()
    }

    pub fn uploads(&self) -> &[Upload] {
        &self.uploads
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    /// `x(j, h)`: whether CV `j` uploads the content of region `h`.
    pub fn x(&self, cv: usize, region: RegionId) -> bool {
        self.uploads.contains(&Upload { cv, region })
    }

    /// `y(k, h)`: whether RSU `k` is refreshed with the content of region `h`.
    pub fn y(&self, rsu: usize, region: RegionId) -> bool {
        self.updates.contains(&Update { rsu, region })
    }

    pub fn is_noop(&self) -> bool {
        self.uploads.is_empty() && self.updates.is_empty()
    }

    pub fn link_count(&self) -> usize {
        self.uploads.len() + self.updates.len()
    }

    pub fn with_upload(&self, upload: Upload) -> Self {
        let mut uploads = self.uploads.clone();
        uploads.push(upload);
        Self::new(uploads, self.updates.clone())
    }

    pub fn with_update(&self, update: Update) -> Self {
        let mut updates = self.updates.clone();
        updates.push(update);
        Self::new(self.uploads.clone(), updates)
    }

    /// Checks every feasibility constraint: per-CV, per-region and per-RSU
    /// exclusivity, channel caps, and that uploaded content exists.
    pub fn check(&self, ledger: &AoiLedger, limits: &ChannelLimits) -> Result<()> {
        ledger.check_transfers(&self.uploads, &self.updates)?;
        if self.uploads.len() > limits.cv {
            return Err(Error::InfeasibleAction(format!(
                "{} uploads exceed the CV channel limit {}",
                self.uploads.len(),
                limits.cv
            )));
        }
        if self.updates.len() > limits.rsu {
            return Err(Error::InfeasibleAction(format!(
                "{} updates exceed the RSU channel limit {}",
                self.updates.len(),
                limits.rsu
            )));
        }
        if self.link_count() > limits.total {
            return Err(Error::InfeasibleAction(format!(
                "{} links exceed the channel limit {}",
                self.link_count(),
                limits.total
            )));
        }
        Ok(())
    }
}

/// The feasible action set of one ledger state, indexable without
/// materializing every action.
///
/// Actions are ordered lexicographically: CVs first, then RSUs, each entity
/// choosing "idle" before its regions in ascending order. Index 0 is always
/// the no-op.
#[derive(Clone, Debug)]
pub struct ActionSpace {
    upload_sets: Vec<Vec<Upload>>,
    coverage: Vec<Vec<RegionId>>,
    limits: ChannelLimits,
    /// `update_counts[k][c]`: update selections for RSUs `k..` with at most
    /// `c` updates.
    update_counts: Vec<Vec<u64>>,
    /// Cumulative action counts, one entry per upload set.
    prefix: Vec<u64>,
}

impl ActionSpace {
    pub fn new(ledger: &AoiLedger, limits: &ChannelLimits) -> Self {
        let upload_cap = limits.cv.min(limits.total);
        let mut upload_sets = Vec::new();
        let mut current = Vec::new();
        let mut used = vec![false; ledger.num_regions()];
        collect_upload_sets(ledger, 0, upload_cap, &mut current, &mut used, &mut upload_sets);

        let coverage: Vec<Vec<RegionId>> =
            (0..ledger.num_rsus()).map(|k| ledger.coverage(k).to_vec()).collect();
        let max_updates = limits.rsu.min(limits.total).min(coverage.len());
        let mut update_counts = vec![vec![1u64; max_updates + 1]; coverage.len() + 1];
        for k in (0..coverage.len()).rev() {
            for c in 0..=max_updates {
                let idle = update_counts[k + 1][c];
                let busy = if c == 0 {
                    0
                } else {
                    (coverage[k].len() as u64).saturating_mul(update_counts[k + 1][c - 1])
                };
                update_counts[k][c] = idle.saturating_add(busy);
            }
        }

        let mut space = Self {
            upload_sets,
            coverage,
            limits: *limits,
            update_counts,
            prefix: Vec::new(),
        };
        let mut total = 0u64;
        let prefix = space
            .upload_sets
            .iter()
            .map(|u| {
                total = total.saturating_add(space.update_count(space.update_cap(u.len())));
                total
            })
            .collect();
        space.prefix = prefix;
        space
    }

    fn update_cap(&self, uploads: usize) -> usize {
        let cap = self.limits.rsu.min(self.limits.total - uploads);
        cap.min(self.update_counts[0].len() - 1)
    }

    fn update_count(&self, cap: usize) -> u64 {
        self.update_counts[0][cap]
    }

    /// Number of feasible actions.
    pub fn len(&self) -> u64 {
        self.prefix.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn limits(&self) -> &ChannelLimits {
        &self.limits
    }

    /// The `index`-th action in canonical order.
    pub fn nth(&self, index: u64) -> Option<CachingAction> {
        if index >= self.len() {
            return None;
        }
        let set = self.prefix.partition_point(|&p| p <= index);
        let start = if set == 0 { 0 } else { self.prefix[set - 1] };
        let uploads = self.upload_sets[set].clone();
        let mut rest = index - start;
        let mut cap = self.update_cap(uploads.len());
        let mut updates = Vec::new();
        for (k, regions) in self.coverage.iter().enumerate() {
            let idle = self.update_counts[k + 1][cap];
            if rest < idle {
                continue;
            }
            rest -= idle;
            let per_region = self.update_counts[k + 1][cap - 1];
            let choice = (rest / per_region) as usize;
            rest %= per_region;
            updates.push(Update {
                rsu: k,
                region: regions[choice],
            });
            cap -= 1;
        }
        Some(CachingAction::new(uploads, updates))
    }

    pub fn iter(&self) -> impl Iterator<Item = CachingAction> + '_ {
        (0..self.len()).map(move |i| self.nth(i).expect("index in range"))
    }
}

fn collect_upload_sets(
    ledger: &AoiLedger,
    cv: usize,
    cap: usize,
    current: &mut Vec<Upload>,
    used: &mut [bool],
    out: &mut Vec<Vec<Upload>>,
) {
    if cv == ledger.num_cvs() {
        out.push(current.clone());
        return;
    }
    collect_upload_sets(ledger, cv + 1, cap, current, used, out);
    if current.len() == cap {
        return;
    }
    let held: Vec<RegionId> = ledger.cv_contents(cv).map(|(h, _)| h).collect();
    for h in held {
        if used[h] {
            continue;
        }
        used[h] = true;
        current.push(Upload { cv, region: h });
        collect_upload_sets(ledger, cv + 1, cap, current, used, out);
        current.pop();
        used[h] = false;
    }
}

/// Every feasible action for `ledger` under `limits`, no-op first.
pub fn enumerate_actions(ledger: &AoiLedger, limits: &ChannelLimits) -> Vec<CachingAction> {
    ActionSpace::new(ledger, limits).iter().collect()
}
