//! Human-readable tables. Published reference magnitudes are printed next
//! to simulated values but never checked.

use std::fmt::Write;

use vcache::caching::CachingPolicy;
use vcache::service::VPreset;
use vcache::sim::{Summary, VSetting};

/// Published (updates, AoI-max exceed count) of each stage-1 policy.
pub fn policy_reference(policy: CachingPolicy) -> (u32, u32) {
    match policy {
        CachingPolicy::Proposed => (260, 638),
        CachingPolicy::AoiGreedy => (297, 1018),
        CachingPolicy::Random => (146, 1741),
    }
}

/// Published (service success, cost save) of each V preset.
pub fn v_reference(v: VSetting) -> Option<(u32, u32)> {
    match v {
        VSetting::Preset(VPreset::Light) => Some((151, 141)),
        VSetting::Preset(VPreset::Normal) => Some((51, 245)),
        VSetting::Preset(VPreset::Heavy) => Some((38, 257)),
        VSetting::Value(_) => None,
    }
}

/// random > aoi-greedy > proposed on exceed counts.
pub fn exceed_order_holds(proposed: &Summary, greedy: &Summary, random: &Summary) -> bool {
    random.aoi_max_exceed > greedy.aoi_max_exceed && greedy.aoi_max_exceed > proposed.aoi_max_exceed
}

/// aoi-greedy > proposed > random on caching cost.
pub fn cost_order_holds(proposed: &Summary, greedy: &Summary, random: &Summary) -> bool {
    greedy.caching_cost > proposed.caching_cost && proposed.caching_cost > random.caching_cost
}

/// Raising V never raises service success nor lowers cost save.
pub fn monotone_in_v(runs: &[&Summary]) -> bool {
    let mut sorted = runs.to_vec();
    sorted.sort_by(|a, b| a.v.total_cmp(&b.v));
    sorted.windows(2).all(|w| {
        w[1].service_success <= w[0].service_success && w[1].cost_save >= w[0].cost_save
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn run_report(summaries: &[Summary]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:<10} {:<12} {:>10} {:>7} {:>7} {:>10} {:>12} {:>8} {:>8} {:>9} {:>12} {:>7} {:>8}",
        "seed", "stage1", "stage2", "V", "updates", "uploads", "aoi_over", "cache_cost", "requests",
        "success", "cost_save", "service_cost", "stale", "mean_aoi"
    );
    for r in summaries {
        let _ = writeln!(
            s,
            "{:>6} {:<10} {:<12} {:>10.4} {:>7} {:>7} {:>10} {:>12.1} {:>8} {:>8} {:>9} {:>12.1} {:>7} {:>8.2}",
            r.seed,
            r.stage1,
            r.stage2,
            r.v,
            r.updates,
            r.uploads,
            r.aoi_max_exceed,
            r.caching_cost,
            r.requests,
            r.service_success,
            r.cost_save,
            r.service_cost,
            r.stale_blocked,
            r.mean_rsu_aoi
        );
    }
    s
}

/// `runs[i][j]`: policy `policies[i]` on seed `seeds[j]`.
pub fn compare_report(policies: &[CachingPolicy], seeds: &[u64], runs: &[Vec<Summary>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Stage-1 comparison, mean over {} seed(s)", seeds.len());
    let _ = writeln!(
        s,
        "{:<12} {:>10} {:>12} {:>14}   {:>15} {:>15}",
        "policy", "updates", "aoi_max_over", "caching_cost", "ref. updates", "ref. aoi_over"
    );
    for (p, rows) in policies.iter().zip(runs) {
        let (ru, re) = policy_reference(*p);
        let _ = writeln!(
            s,
            "{:<12} {:>10.1} {:>12.1} {:>14.1}   {:>15} {:>15}",
            p.name(),
            mean(rows.iter().map(|r| r.updates as f64)),
            mean(rows.iter().map(|r| r.aoi_max_exceed as f64)),
            mean(rows.iter().map(|r| r.caching_cost)),
            ru,
            re
        );
    }
    let index = |p| policies.iter().position(|&q| q == p);
    match (
        index(CachingPolicy::Proposed),
        index(CachingPolicy::AoiGreedy),
        index(CachingPolicy::Random),
    ) {
        (Some(pi), Some(gi), Some(ri)) => {
            let (mut exceed_ok, mut cost_ok) = (0, 0);
            for (j, seed) in seeds.iter().enumerate() {
                let (p, g, r) = (&runs[pi][j], &runs[gi][j], &runs[ri][j]);
                let (e, c) = (exceed_order_holds(p, g, r), cost_order_holds(p, g, r));
                exceed_ok += usize::from(e);
                cost_ok += usize::from(c);
                let _ = writeln!(
                    s,
                    "seed {seed}: exceed order {}, cost order {}",
                    verdict(e),
                    verdict(c)
                );
            }
            let _ = writeln!(
                s,
                "ordering pass rate: exceed (random > aoi-greedy > proposed) {exceed_ok}/{n}, \
                 cost (aoi-greedy > proposed > random) {cost_ok}/{n}",
                n = seeds.len()
            );
        }
        _ => {
            let _ = writeln!(s, "ordering verdicts need all three policies");
        }
    }
    let _ = writeln!(s, "reference columns are published magnitudes, not expectations");
    s
}

/// `runs[i][j]`: V setting `vs[i]` on seed `seeds[j]`.
pub fn sweep_report(vs: &[VSetting], seeds: &[u64], runs: &[Vec<Summary>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "V sweep, mean over {} seed(s)", seeds.len());
    let _ = writeln!(
        s,
        "{:<10} {:>10} {:>9} {:>10} {:>13}   {:>12} {:>14}",
        "setting", "V", "success", "cost_save", "service_cost", "ref. success", "ref. cost_save"
    );
    for (v, rows) in vs.iter().zip(runs) {
        let (rs, rc) = v_reference(*v)
            .map_or(("-".to_string(), "-".to_string()), |(a, b)| (a.to_string(), b.to_string()));
        let _ = writeln!(
            s,
            "{:<10} {:>10.4} {:>9.1} {:>10.1} {:>13.1}   {:>12} {:>14}",
            v.to_string(),
            mean(rows.iter().map(|r| r.v)),
            mean(rows.iter().map(|r| r.service_success as f64)),
            mean(rows.iter().map(|r| r.cost_save as f64)),
            mean(rows.iter().map(|r| r.service_cost)),
            rs,
            rc
        );
    }
    let mut ok = 0;
    for (j, seed) in seeds.iter().enumerate() {
        let column: Vec<&Summary> = runs.iter().map(|rows| &rows[j]).collect();
        let holds = monotone_in_v(&column);
        ok += usize::from(holds);
        let _ = writeln!(s, "seed {seed}: monotone in V {}", verdict(holds));
    }
    let _ = writeln!(
        s,
        "monotonicity (larger V: success never higher, cost save never lower) holds on {ok}/{} seed(s)",
        seeds.len()
    );
    let _ = writeln!(s, "reference columns are published magnitudes, not expectations");
    s
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
