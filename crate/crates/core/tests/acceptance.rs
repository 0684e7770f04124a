//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vcache::aoi::{AoiLedger, PassEvent, RegionId};
use vcache::caching::{
    finite_horizon_values, myopic_caching_policy, random_policy, value_iteration,
    CachingPolicy, ChannelLimits, LinkContext, MdpConfig, MicroInstance, UtilityParams, WeightMode,
};
use vcache::service::drift::dpp_trajectory;
use vcache::service::{
    dpp_decide, drift_bound_check, DppParams, DriftSlot, ServiceCandidate, ServicePolicy, Trajectory,
    VPreset,
};
use vcache::sim::{run_scenario, ScenarioConfig, VSetting};

/// Result of one criterion: pass flag and a one-line detail.
type Verdict = (bool, String);

/// Upload and update sets of one action.
type Transfers = (Vec<(usize, RegionId)>, Vec<(usize, RegionId)>);

type Criterion = (&'static str, Duration, fn() -> Verdict);

const STATE_LIMIT: usize = 5_000;
const VI_TOLERANCE: f64 = 1e-9;
const THETA: f64 = 1e-6;
const GAMMA: f64 = 0.9;
const HORIZON: usize = 3;
const MICRO_INSTANCES: usize = 24;
const ORDERING_SEEDS: u64 = 10;
const ORDERING_REQUIRED: usize = 8;

fn main() {
    let criteria: [Criterion; 10] = [
        ("AoI law over 10,000 random steps", Duration::from_secs(1), aoi_law),
        ("value iteration matches tree search", Duration::from_secs(60), vi_oracle),
        ("value iteration converges monotonically", Duration::from_secs(60), vi_convergence),
        ("DPP serves iff Q^2 > V d", Duration::MAX, dpp_threshold),
        ("Lyapunov drift bound", Duration::MAX, drift),
        ("stage-1 policy orderings", Duration::from_secs(120), policy_orderings),
        ("service monotonicity in V", Duration::from_secs(30), v_monotonicity),
        ("latency-only and cost-only extremes", Duration::MAX, baseline_extremes),
        ("no stale content delivered", Duration::MAX, staleness),
        ("byte-identical replays", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < *limit;
        let pass = ok && in_time;
        failed += usize::from(!pass);
        let timing = if *limit == Duration::MAX {
            format!("{elapsed:.2?}")
        } else {
            format!("{elapsed:.2?}, limit {limit:?}")
        };
        println!(
            "[{}] {:>2}. {name} ({timing}): {detail}{}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            if in_time { "" } else { " [over time limit]" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- oracles

/// Plain copy of a ledger the oracles manipulate without library code.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ages {
    cv: Vec<Vec<Option<u32>>>,
    mbs: Vec<u32>,
    /// Aligned with `coverage`.
    rsu: Vec<Vec<u32>>,
}

fn ages_of(l: &AoiLedger) -> Ages {
    Ages {
        cv: (0..l.num_cvs())
            .map(|j| (0..l.num_regions()).map(|h| l.cv_aoi(j, h)).collect())
            .collect(),
        mbs: (0..l.num_regions()).map(|h| l.mbs_aoi(h)).collect(),
        rsu: (0..l.num_rsus())
            .map(|k| l.coverage(k).iter().map(|&h| l.rsu_aoi(k, h).unwrap()).collect())
            .collect(),
    }
}

/// The AoI update law written out directly.
fn oracle_next(
    a: &Ages,
    aoi_max: &[u32],
    coverage: &[Vec<RegionId>],
    uploads: &[(usize, RegionId)],
    updates: &[(usize, RegionId)],
    passes: &[(usize, RegionId)],
) -> Ages {
    let mut cv = a.cv.clone();
    for (j, row) in cv.iter_mut().enumerate() {
        for (h, e) in row.iter_mut().enumerate() {
            *e = match *e {
                _ if uploads.contains(&(j, h)) => None,
                Some(v) if v < aoi_max[h] => Some(v + 1),
                _ => None,
            };
            if passes.contains(&(j, h)) {
                *e = Some(1);
            }
        }
    }
    let mbs = (0..a.mbs.len())
        .map(|h| match uploads.iter().find(|u| u.1 == h) {
            Some(&(j, _)) => a.cv[j][h].unwrap(),
            None => a.mbs[h] + 1,
        })
        .collect();
    let rsu = coverage
        .iter()
        .enumerate()
        .map(|(k, regions)| {
            regions
                .iter()
                .enumerate()
                .map(|(i, &h)| if updates.contains(&(k, h)) { a.mbs[h] } else { a.rsu[k][i] + 1 })
                .collect()
        })
        .collect();
    Ages { cv, mbs, rsu }
}

fn random_ledger(rng: &mut ChaCha8Rng, regions: usize, max_aoi: u32, cvs: usize, rsus: usize) -> AoiLedger {
    let aoi_max: Vec<u32> = (0..regions).map(|_| rng.gen_range(1..=max_aoi)).collect();
    let coverage: Vec<Vec<RegionId>> = (0..rsus)
        .map(|_| {
            let mut c: Vec<RegionId> = (0..regions).filter(|_| rng.gen_bool(0.6)).collect();
            c.shuffle(rng);
            c
        })
        .collect();
    let mut l = AoiLedger::new(aoi_max.clone(), coverage.clone(), cvs).unwrap();
    for j in 0..cvs {
        for (h, &max) in aoi_max.iter().enumerate() {
            let v = rng.gen_bool(0.5).then(|| rng.gen_range(1..=max));
            l.set_cv_aoi(j, h, v);
        }
    }
    for h in 0..regions {
        l.set_mbs_aoi(h, rng.gen_range(1..=2 * max_aoi));
    }
    for (k, c) in coverage.iter().enumerate() {
        for &h in c {
            l.set_rsu_aoi(k, h, rng.gen_range(1..=2 * max_aoi));
        }
    }
    l
}

fn random_limits(rng: &mut ChaCha8Rng, most: usize) -> ChannelLimits {
    ChannelLimits {
        total: rng.gen_range(0..=most),
        cv: rng.gen_range(0..=most),
        rsu: rng.gen_range(0..=most),
    }
}

// ------------------------------------------------------------ criterion 1

fn aoi_law() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut steps = 0;
    let mut violations = 0;
    let mut expiries = 0;
    while steps < 10_000 {
        let regions = rng.gen_range(1..=6);
        let cvs = rng.gen_range(0..=4);
        let rsus = rng.gen_range(0..=3);
        let mut ledger = random_ledger(&mut rng, regions, 20, cvs, rsus);
        let aoi_max = ledger.aoi_max_all().to_vec();
        let coverage: Vec<Vec<RegionId>> = (0..rsus).map(|k| ledger.coverage(k).to_vec()).collect();
        for _ in 0..10 {
            let limits = random_limits(&mut rng, 6);
            let action = random_policy(&ledger, &limits, &mut rng);
            let passes: Vec<PassEvent> = (0..cvs)
                .flat_map(|cv| (0..regions).map(move |region| PassEvent { cv, region }))
                .filter(|_| rng.gen_bool(0.2))
                .collect();
            let before = ages_of(&ledger);
            let next = ledger.advance(action.uploads(), action.updates(), &passes).unwrap();
            let after = ages_of(&next);
            let ups: Vec<_> = action.uploads().iter().map(|u| (u.cv, u.region)).collect();
            let downs: Vec<_> = action.updates().iter().map(|u| (u.rsu, u.region)).collect();
            let ps: Vec<_> = passes.iter().map(|p| (p.cv, p.region)).collect();
            if after != oracle_next(&before, &aoi_max, &coverage, &ups, &downs, &ps) {
                violations += 1;
            }
            for (j, row) in after.cv.iter().enumerate() {
                for (h, e) in row.iter().enumerate() {
                    if e.is_some_and(|v| v == 0 || v > aoi_max[h]) {
                        violations += 1;
                    }
                    if before.cv[j][h] == Some(aoi_max[h]) && !ps.contains(&(j, h)) {
                        expiries += 1;
                        if e.is_some() {
                            violations += 1;
                        }
                    }
                }
            }
            ledger = next;
            steps += 1;
        }
    }
    (
        violations == 0 && expiries > 0,
        format!("{steps} steps, {violations} violations, {expiries} expiries checked"),
    )
}

// ---------------------------------------------------------- criteria 2, 3

fn micro_instances() -> Vec<MicroInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut out = Vec::new();
    while out.len() < MICRO_INSTANCES {
        let regions = rng.gen_range(1..=3);
        let cvs = rng.gen_range(0..=1);
        let rsus = rng.gen_range(1..=2);
        let base = random_ledger(&mut rng, regions, 3, cvs, rsus);
        let aoi_max = base.aoi_max_all().to_vec();
        let coverage: Vec<Vec<RegionId>> = (0..rsus).map(|k| base.coverage(k).to_vec()).collect();
        let cap = aoi_max.iter().max().unwrap() + rng.gen_range(0..=1);
        let popularity = (0..rsus)
            .map(|_| (0..regions).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let inst = MicroInstance {
            aoi_max,
            coverage,
            cvs,
            aoi_cap: cap,
            ctx: LinkContext {
                cv_distance: (0..cvs).map(|_| rng.gen_range(1.0..300.0)).collect(),
                rsu_distance: (0..rsus).map(|_| rng.gen_range(1.0..300.0)).collect(),
                popularity,
            },
            params: UtilityParams {
                epsilon: rng.gen_range(0.0..=1.0),
                w: rng.gen_range(1.0..200.0),
                weight_mode: if rng.gen_bool(0.5) { WeightMode::Uniform } else { WeightMode::AoiShare },
                popularity_floor: 0.01,
            },
            limits: ChannelLimits {
                total: rng.gen_range(1..=3),
                cv: rng.gen_range(0..=2),
                rsu: rng.gen_range(0..=2),
            },
            cv_arrival: *[0.0, 0.25, 0.5, 1.0].choose(&mut rng).unwrap(),
        };
        let states = inst.num_states();
        if (20..=STATE_LIMIT as u64).contains(&states) {
            out.push(inst);
        }
    }
    out
}

/// Every feasible transfer set, by brute force over per-entity choices.
fn oracle_actions(inst: &MicroInstance, a: &Ages) -> Vec<Transfers> {
    let mut upload_sets: Vec<Vec<(usize, RegionId)>> = vec![Vec::new()];
    for j in 0..inst.cvs {
        let mut next = Vec::new();
        for set in &upload_sets {
            next.push(set.clone());
            for h in 0..inst.aoi_max.len() {
                if a.cv[j][h].is_some() && set.iter().all(|u| u.1 != h) {
                    let mut s = set.clone();
                    s.push((j, h));
                    next.push(s);
                }
            }
        }
        upload_sets = next;
    }
    let mut update_sets: Vec<Vec<(usize, RegionId)>> = vec![Vec::new()];
    for (k, regions) in inst.coverage.iter().enumerate() {
        let mut next = Vec::new();
        for set in &update_sets {
            next.push(set.clone());
            for &h in regions {
                let mut s = set.clone();
                s.push((k, h));
                next.push(s);
            }
        }
        update_sets = next;
    }
    let l = inst.limits;
    let mut out = Vec::new();
    for u in &upload_sets {
        for y in &update_sets {
            if u.len() <= l.cv && y.len() <= l.rsu && u.len() + y.len() <= l.total {
                out.push((u.clone(), y.clone()));
            }
        }
    }
    out
}

fn oracle_reward(inst: &MicroInstance, next: &Ages, ups: &[(usize, RegionId)], downs: &[(usize, RegionId)]) -> f64 {
    let p = &inst.ctx.popularity;
    let mut contents = Vec::new();
    for (k, regions) in inst.coverage.iter().enumerate() {
        for (i, &h) in regions.iter().enumerate() {
            contents.push((k, h, f64::from(next.rsu[k][i].max(1))));
        }
    }
    let total: f64 = contents.iter().map(|c| c.2).sum();
    let fresh: f64 = contents
        .iter()
        .map(|&(k, h, age)| {
            let weight = match inst.params.weight_mode {
                WeightMode::Uniform => 1.0 / contents.len() as f64,
                WeightMode::AoiShare => age / total,
            };
            f64::from(inst.aoi_max[h]) / age * weight * p[k][h]
        })
        .sum();
    let cost: f64 = ups.iter().map(|&(j, _)| inst.ctx.cv_distance[j]).sum::<f64>()
        + downs
            .iter()
            .map(|&(k, h)| inst.ctx.rsu_distance[k] / p[k][h].max(inst.params.popularity_floor))
            .sum::<f64>();
    let eps = inst.params.epsilon;
    eps * fresh * inst.params.w - (1.0 - eps) * cost
}

fn oracle_outcomes(inst: &MicroInstance) -> Vec<(Vec<(usize, RegionId)>, f64)> {
    let mut outcomes = vec![(Vec::new(), 1.0)];
    for j in 0..inst.cvs {
        for h in 0..inst.aoi_max.len() {
            let rho = inst.cv_arrival;
            let mut next = Vec::new();
            for (events, p) in outcomes {
                if rho < 1.0 {
                    next.push((events.clone(), p * (1.0 - rho)));
                }
                if rho > 0.0 {
                    let mut e = events;
                    e.push((j, h));
                    next.push((e, p * rho));
                }
            }
            outcomes = next;
        }
    }
    outcomes
}

fn saturate(inst: &MicroInstance, a: &Ages) -> Ages {
    let mut out = a.clone();
    out.mbs.iter_mut().for_each(|v| *v = (*v).min(inst.aoi_cap));
    out.rsu.iter_mut().flatten().for_each(|v| *v = (*v).min(inst.aoi_cap));
    out
}

/// Optimal expected discounted reward over `depth` slots, by exhaustive
/// expectimax over every action and arrival outcome.
fn tree_value(
    inst: &MicroInstance,
    outcomes: &[(Vec<(usize, RegionId)>, f64)],
    a: &Ages,
    depth: usize,
    memo: &mut HashMap<(Ages, usize), f64>,
) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    if let Some(&v) = memo.get(&(a.clone(), depth)) {
        return v;
    }
    let mut best = f64::NEG_INFINITY;
    for (ups, downs) in oracle_actions(inst, a) {
        let plain = oracle_next(a, &inst.aoi_max, &inst.coverage, &ups, &downs, &[]);
        let mut q = oracle_reward(inst, &plain, &ups, &downs);
        for (events, p) in outcomes {
            let next = oracle_next(a, &inst.aoi_max, &inst.coverage, &ups, &downs, events);
            q += GAMMA * p * tree_value(inst, outcomes, &saturate(inst, &next), depth - 1, memo);
        }
        best = best.max(q);
    }
    memo.insert((a.clone(), depth), best);
    best
}

fn vi_oracle() -> Verdict {
    let instances = micro_instances();
    let mut worst: f64 = 0.0;
    let mut states = 0;
    let mut policy_mismatches = 0;
    for inst in &instances {
        let micro = inst.build(STATE_LIMIT).unwrap();
        let (values, _) = finite_horizon_values(&micro.mdp, GAMMA, HORIZON).unwrap();
        let outcomes = oracle_outcomes(inst);
        let mut memo = HashMap::new();
        for (s, ledger) in micro.ledgers.iter().enumerate() {
            let expected = tree_value(inst, &outcomes, &ages_of(ledger), HORIZON, &mut memo);
            worst = worst.max((values[s] - expected).abs());
        }
        states += micro.ledgers.len();

        let config = MdpConfig {
            gamma: 0.0,
            theta: THETA,
            state_budget: STATE_LIMIT,
            ..Default::default()
        };
        let vi = value_iteration(&micro.mdp, &config).unwrap();
        for (s, ledger) in micro.ledgers.iter().enumerate() {
            let myopic = myopic_caching_policy(ledger, &inst.ctx, &inst.params, &inst.limits, u64::MAX);
            if micro.actions[s][vi.policy[s]] != myopic {
                policy_mismatches += 1;
            }
        }
    }
    (
        worst <= VI_TOLERANCE && policy_mismatches == 0 && instances.len() >= 20,
        format!(
            "{} instances, {states} states, max |VI - tree| = {worst:.2e} (tol {VI_TOLERANCE:e}), \
             gamma=0 policy mismatches {policy_mismatches}",
            instances.len()
        ),
    )
}

fn vi_convergence() -> Verdict {
    let config = MdpConfig {
        gamma: GAMMA,
        theta: THETA,
        state_budget: STATE_LIMIT,
        ..Default::default()
    };
    let mut bad = 0;
    let mut worst_final: f64 = 0.0;
    let mut max_sweeps = 0;
    let instances = micro_instances();
    for inst in &instances {
        let micro = inst.build(STATE_LIMIT).unwrap();
        let vi = value_iteration(&micro.mdp, &config).unwrap();
        let monotone = vi.residuals.windows(2).all(|w| w[1] <= w[0]);
        if !(monotone && vi.converged && vi.final_residual() < THETA) {
            bad += 1;
        }
        worst_final = worst_final.max(vi.final_residual());
        max_sweeps = max_sweeps.max(vi.sweeps());
    }
    (
        bad == 0,
        format!(
            "{} instances, {bad} non-monotone or unconverged, worst final residual {worst_final:.2e} \
             (theta {THETA:e}), up to {max_sweeps} sweeps",
            instances.len()
        ),
    )
}

// ---------------------------------------------------------- criteria 4, 5

fn dpp_threshold() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut zero_served = 0;
    let mut served = 0;
    for i in 0..10_000 {
        let d: f64 = rng.gen_range(0.01..500.0);
        let v: f64 = rng.gen_range(0.0..50.0);
        let q = match i % 4 {
            0 => 0.0,
            // Exactly on the threshold when it is representable.
            1 => (v * d).sqrt(),
            2 => rng.gen_range(0..100) as f64,
            _ => rng.gen_range(0.0..200.0),
        };
        let c = ServiceCandidate {
            uv_id: i,
            backlog: q,
            distance: d,
            content_aoi: 1,
            aoi_max: 1,
        };
        let params = DppParams {
            v,
            uv_channels: None,
            enforce_staleness: false,
        };
        let serve = dpp_decide(&[c], &params).action.alpha(i);
        if serve != (q * q > v * d) {
            violations += 1;
        }
        if q == 0.0 && serve {
            zero_served += 1;
        }
        served += usize::from(serve);
    }
    (
        violations == 0 && zero_served == 0,
        format!("10000 triples, {served} served, {violations} violations, {zero_served} served at Q=0"),
    )
}

fn drift() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut trajectories = Vec::with_capacity(1000);
    for i in 0..1000 {
        if i % 2 == 0 {
            let distances: Vec<f64> = (0..100).map(|_| rng.gen_range(1.0..300.0)).collect();
            trajectories.push(dpp_trajectory(&distances, rng.gen_range(0.0..5.0)));
        } else {
            let slots = (0..100)
                .map(|_| DriftSlot {
                    arrival: rng.gen_range(0.0..5.0),
                    departure: if rng.gen_bool(0.3) { rng.gen_range(0.0..50.0) } else { 0.0 },
                })
                .collect();
            trajectories.push(Trajectory {
                initial_backlog: rng.gen_range(0.0..100.0),
                slots,
            });
        }
    }
    let report = drift_bound_check(&trajectories);
    (
        report.passed() && report.slots == 100_000,
        format!(
            "{} slots, {} violations, C = {:.2}, min slack {:.3e}",
            report.slots, report.violations, report.constant, report.min_slack
        ),
    )
}

// ------------------------------------------------------------ criterion 6

fn policy_orderings() -> Verdict {
    let policies = [CachingPolicy::Proposed, CachingPolicy::AoiGreedy, CachingPolicy::Random];
    let mut exceed_ok = 0;
    let mut cost_ok = 0;
    let mut totals = [(0usize, 0usize, 0.0f64); 3];
    for seed in 1..=ORDERING_SEEDS {
        let runs: Vec<_> = policies
            .iter()
            .map(|&p| {
                let mut c = ScenarioConfig {
                    seed,
                    ..Default::default()
                };
                c.caching.policy = p;
                run_scenario(&c).unwrap().summary()
            })
            .collect();
        for (t, s) in totals.iter_mut().zip(&runs) {
            t.0 += s.aoi_max_exceed;
            t.1 += s.updates;
            t.2 += s.caching_cost;
        }
        let (p, g, r) = (&runs[0], &runs[1], &runs[2]);
        exceed_ok += usize::from(r.aoi_max_exceed > g.aoi_max_exceed && g.aoi_max_exceed > p.aoi_max_exceed);
        cost_ok += usize::from(g.caching_cost > p.caching_cost && p.caching_cost > r.caching_cost);
    }
    let n = ORDERING_SEEDS as f64;
    let mean = |i: usize| (totals[i].0 as f64 / n, totals[i].1 as f64 / n, totals[i].2 / n);
    let (p, g, r) = (mean(0), mean(1), mean(2));
    (
        exceed_ok >= ORDERING_REQUIRED && cost_ok >= ORDERING_REQUIRED,
        format!(
            "exceed random>greedy>proposed on {exceed_ok}/{ORDERING_SEEDS} seeds, \
             cost greedy>proposed>random on {cost_ok}/{ORDERING_SEEDS} (need {ORDERING_REQUIRED}); \
             mean exceed P/G/R {:.0}/{:.0}/{:.0}, updates {:.0}/{:.0}/{:.0}, cost {:.0}/{:.0}/{:.0} \
             (published reference: exceed 638/1018/1741, updates 260/297/146)",
            p.0, g.0, r.0, p.1, g.1, r.1, p.2, g.2, r.2
        ),
    )
}

// ------------------------------------------------------------ criterion 7

fn v_monotonicity() -> Verdict {
    let mut bad = 0;
    let mut rows = Vec::new();
    for seed in 1..=10 {
        let runs: Vec<_> = VPreset::ALL
            .iter()
            .map(|&v| {
                let mut c = ScenarioConfig::single_rsu();
                c.seed = seed;
                c.service.v = VSetting::Preset(v);
                run_scenario(&c).unwrap().summary()
            })
            .collect();
        let success_ok = runs.windows(2).all(|w| w[1].service_success <= w[0].service_success);
        let save_ok = runs.windows(2).all(|w| w[1].cost_save >= w[0].cost_save);
        let total = runs[0].service_success + runs[0].cost_save;
        let constant = runs.iter().all(|s| s.service_success + s.cost_save == total);
        bad += usize::from(!(success_ok && save_ok && constant));
        if seed == 1 {
            rows = runs.iter().map(|s| (s.service_success, s.cost_save)).collect();
        }
    }
    (
        bad == 0,
        format!(
            "10 seeds, {bad} violating; seed 1 light/normal/heavy success {}/{}/{} cost_save {}/{}/{} \
             (published reference: success 151/51/38, cost save 141/245/257)",
            rows[0].0, rows[1].0, rows[2].0, rows[0].1, rows[1].1, rows[2].1
        ),
    )
}

// ------------------------------------------------------------ criterion 8

fn baseline_extremes() -> Verdict {
    let mut problems = Vec::new();
    let mut slots_checked = 0;
    for base in [ScenarioConfig::default(), ScenarioConfig::single_rsu()] {
        for seed in 1..=3 {
            let run = |policy: ServicePolicy, v: VPreset| {
                let mut c = base.clone();
                c.seed = seed;
                c.service.policy = policy;
                c.service.v = VSetting::Preset(v);
                run_scenario(&c).unwrap()
            };
            let latency = run(ServicePolicy::LatencyOnly, VPreset::Normal);
            for row in &latency.rows {
                let events: Vec<_> = latency.events.iter().filter(|e| e.slot == row.slot).collect();
                let distances: f64 = events.iter().map(|e| e.distance).sum();
                if (row.service_cost - distances).abs() > 1e-9 * (1.0 + distances) || row.served != row.pending {
                    problems.push(format!("latency-only slot {} seed {seed}", row.slot));
                }
                slots_checked += 1;
            }
            let best = latency.summary().service_success;
            for v in VPreset::ALL {
                let s = run(ServicePolicy::Dpp, v).summary();
                if s.service_success > best {
                    problems.push(format!("dpp {} beat latency-only on seed {seed}", v.name()));
                }
            }
            let cost_only = run(ServicePolicy::CostOnly, VPreset::Normal).summary();
            if cost_only.service_cost != 0.0 || cost_only.service_success != 0 || cost_only.cost_save == 0 {
                problems.push(format!("cost-only seed {seed}"));
            }
        }
    }
    (
        problems.is_empty(),
        format!("{slots_checked} latency-only slots checked, problems: {problems:?}"),
    )
}

// ------------------------------------------------------------ criterion 9

fn staleness() -> Verdict {
    let mut served = 0;
    let mut blocked = 0;
    let mut violations = 0;
    for seed in 1..=10 {
        let c = ScenarioConfig {
            seed,
            ..Default::default()
        };
        assert!(c.service.enforce_staleness);
        let log = run_scenario(&c).unwrap();
        for e in &log.events {
            if e.alpha == 1 {
                served += 1;
                if e.received_aoi > e.aoi_max {
                    violations += 1;
                }
            }
            blocked += usize::from(e.stale_blocked);
        }
    }
    (
        violations == 0 && served > 0,
        format!("10 runs, {served} deliveries, {blocked} stale-blocked, {violations} violations"),
    )
}

// ----------------------------------------------------------- criterion 10

fn slots_csv(c: &ScenarioConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    run_scenario(c).unwrap().write_slots_csv(&mut buf).unwrap();
    buf
}

fn determinism() -> Verdict {
    let mut mismatches = 0;
    let mut runs = 0;
    for policy in [CachingPolicy::Proposed, CachingPolicy::AoiGreedy, CachingPolicy::Random] {
        let mut c = ScenarioConfig {
            seed: 7,
            ..Default::default()
        };
        c.caching.policy = policy;
        let reference = slots_csv(&c);
        let mut replays = vec![slots_csv(&c)];
        for threads in [1, 4] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            replays.push(pool.install(|| slots_csv(&c)));
        }
        runs += replays.len() + 1;
        mismatches += replays.iter().filter(|r| **r != reference).count();
    }
    (
        mismatches == 0,
        format!("{runs} runs over 3 policies and 1/4/default threads, {mismatches} differing slots.csv"),
    )
}
