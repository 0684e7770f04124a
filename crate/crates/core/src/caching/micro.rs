//! Small caching instances discretized into explicit MDPs.

use std::collections::BTreeMap;

use crate::aoi::{AoiLedger, PassEvent, RegionId};
use crate::caching::{
    caching_utility, enumerate_actions, CachingAction, ChannelLimits, FiniteMdp, LinkContext,
    StateAction, UtilityParams,
};
use crate::error::{Error, Result};

/// A caching problem with fixed geometry and popularity whose ages saturate
/// at `aoi_cap`, small enough to enumerate every state.
///
/// Transfers are deterministic. CV content appears independently for every
/// `(cv, region)` pair with probability `cv_arrival` per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct MicroInstance {
    pub aoi_max: Vec<u32>,
    pub coverage: Vec<Vec<RegionId>>,
    pub cvs: usize,
    pub aoi_cap: u32,
    pub ctx: LinkContext,
    pub params: UtilityParams,
    pub limits: ChannelLimits,
    pub cv_arrival: f64,
}

/// The explicit MDP of a [`MicroInstance`] plus what each index means.
#[derive(Clone, Debug)]
pub struct MicroMdp {
    pub mdp: FiniteMdp,
    pub ledgers: Vec<AoiLedger>,
    pub actions: Vec<Vec<CachingAction>>,
}

impl MicroInstance {
    fn check(&self) -> Result<()> {
        let max = self.aoi_max.iter().copied().max().unwrap_or(1);
        if self.aoi_cap < max {
            return Err(Error::InvalidConfig(format!(
                "aoi_cap {} is below the largest aoi_max {max}",
                self.aoi_cap
            )));
        }
        if !(0.0..=1.0).contains(&self.cv_arrival) {
            return Err(Error::InvalidConfig(format!(
                "cv_arrival must be a probability, got {}",
                self.cv_arrival
            )));
        }
        AoiLedger::new(self.aoi_max.clone(), self.coverage.clone(), self.cvs)?;
        Ok(())
    }

    /// Number of values each state digit takes, CV digits first, then MBS,
    /// then RSU digits.
    fn radices(&self) -> Vec<u64> {
        let mut radices = Vec::new();
        for _ in 0..self.cvs {
            radices.extend(self.aoi_max.iter().map(|&m| u64::from(m) + 1));
        }
        radices.extend(std::iter::repeat_n(u64::from(self.aoi_cap), self.aoi_max.len()));
        let cached: usize = self.coverage.iter().map(Vec::len).sum();
        radices.extend(std::iter::repeat_n(u64::from(self.aoi_cap), cached));
        radices
    }

    pub fn num_states(&self) -> u64 {
        self.radices()
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r))
            .unwrap_or(u64::MAX)
    }

    /// Saturates every MBS and RSU age at `aoi_cap`. CV ages never exceed
    /// `aoi_max <= aoi_cap`.
    pub fn clamp(&self, ledger: &AoiLedger) -> AoiLedger {
        let mut out = ledger.clone();
        for h in 0..ledger.num_regions() {
            out.set_mbs_aoi(h, ledger.mbs_aoi(h).clamp(1, self.aoi_cap));
        }
        for (k, h, a) in ledger.rsu_contents() {
            out.set_rsu_aoi(k, h, a.clamp(1, self.aoi_cap));
        }
        out
    }

    pub fn decode(&self, mut index: u64) -> AoiLedger {
        let mut ledger = AoiLedger::new(self.aoi_max.clone(), self.coverage.clone(), self.cvs)
            .expect("checked instance");
        let mut digit = |radix: u64| {
            let d = index % radix;
            index /= radix;
            d as u32
        };
        for j in 0..self.cvs {
            for h in 0..self.aoi_max.len() {
                let d = digit(u64::from(self.aoi_max[h]) + 1);
                ledger.set_cv_aoi(j, h, (d > 0).then_some(d));
            }
        }
        for h in 0..self.aoi_max.len() {
            ledger.set_mbs_aoi(h, digit(u64::from(self.aoi_cap)) + 1);
        }
        for k in 0..self.coverage.len() {
            for &h in &self.coverage[k] {
                ledger.set_rsu_aoi(k, h, digit(u64::from(self.aoi_cap)) + 1);
            }
        }
        ledger
    }

    /// Index of a clamped ledger.
    pub fn encode(&self, ledger: &AoiLedger) -> u64 {
        let mut digits = Vec::new();
        for j in 0..self.cvs {
            for h in 0..self.aoi_max.len() {
                digits.push(u64::from(ledger.cv_aoi(j, h).unwrap_or(0)));
            }
        }
        for h in 0..self.aoi_max.len() {
            digits.push(u64::from(ledger.mbs_aoi(h) - 1));
        }
        for (_, _, a) in ledger.rsu_contents() {
            digits.push(u64::from(a - 1));
        }
        let mut index = 0;
        for (d, r) in digits.iter().zip(self.radices()).rev() {
            debug_assert!(*d < r);
            index = index * r + d;
        }
        index
    }

    /// Every combination of pass events with its probability.
    pub fn arrival_outcomes(&self) -> Vec<(Vec<PassEvent>, f64)> {
        let pairs: Vec<PassEvent> = (0..self.cvs)
            .flat_map(|cv| (0..self.aoi_max.len()).map(move |region| PassEvent { cv, region }))
            .collect();
        let rho = self.cv_arrival;
        if rho == 0.0 || pairs.is_empty() {
            return vec![(Vec::new(), 1.0)];
        }
        if rho == 1.0 {
            return vec![(pairs, 1.0)];
        }
        (0u64..1 << pairs.len())
            .map(|mask| {
                let mut events = Vec::new();
                let mut p = 1.0;
                for (i, e) in pairs.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        events.push(*e);
                        p *= rho;
                    } else {
                        p *= 1.0 - rho;
                    }
                }
                (events, p)
            })
            .collect()
    }

    /// Reward of `action` in `ledger`: the caching utility of the ledger it
    /// produces. Arrivals only touch CV storage, so the reward does not
    /// depend on them.
    pub fn reward(&self, ledger: &AoiLedger, action: &CachingAction) -> Result<f64> {
        let next = ledger.advance(action.uploads(), action.updates(), &[])?;
        Ok(caching_utility(&next, action, &self.ctx, &self.params))
    }

    pub fn build(&self, state_budget: usize) -> Result<MicroMdp> {
        self.check()?;
        let states = self.num_states();
        if states > state_budget as u64 {
            return Err(Error::StateBudgetExceeded {
                states: usize::try_from(states).unwrap_or(usize::MAX),
                budget: state_budget,
            });
        }
        let outcomes = self.arrival_outcomes();
        let mut ledgers = Vec::with_capacity(states as usize);
        let mut actions = Vec::with_capacity(states as usize);
        let mut labels = Vec::with_capacity(states as usize);
        let mut choices = Vec::with_capacity(states as usize);
        for s in 0..states {
            let ledger = self.decode(s);
            let feasible = enumerate_actions(&ledger, &self.limits);
            let mut entries = Vec::with_capacity(feasible.len());
            for action in &feasible {
                let reward = self.reward(&ledger, action)?;
                let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
                for (events, p) in &outcomes {
                    let next = ledger.advance(action.uploads(), action.updates(), events)?;
                    let index = self.encode(&self.clamp(&next)) as usize;
                    *merged.entry(index).or_insert(0.0) += p;
                }
                entries.push(StateAction {
                    label: action_label(action),
                    reward,
                    transitions: merged.into_iter().collect(),
                });
            }
            labels.push(state_label(&ledger));
            choices.push(entries);
            actions.push(feasible);
            ledgers.push(ledger);
        }
        Ok(MicroMdp {
            mdp: FiniteMdp {
                states: labels,
                actions: choices,
            },
            ledgers,
            actions,
        })
    }
}

fn state_label(ledger: &AoiLedger) -> String {
    let cv: Vec<String> = (0..ledger.num_cvs())
        .map(|j| {
            (0..ledger.num_regions())
                .map(|h| ledger.cv_aoi(j, h).unwrap_or(0).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let mbs: Vec<String> = (0..ledger.num_regions())
        .map(|h| ledger.mbs_aoi(h).to_string())
        .collect();
    let rsu: Vec<String> = ledger.rsu_contents().map(|(_, _, a)| a.to_string()).collect();
    format!("cv[{}] mbs[{}] rsu[{}]", cv.join(";"), mbs.join(","), rsu.join(","))
}

fn action_label(action: &CachingAction) -> String {
    if action.is_noop() {
        return "noop".into();
    }
    let mut parts: Vec<String> = action
        .uploads()
        .iter()
        .map(|u| format!("x{}.{}", u.cv, u.region))
        .collect();
    parts.extend(action.updates().iter().map(|y| format!("y{}.{}", y.rsu, y.region)));
    parts.join("+")
}
