use std::io::Write;

use serde::Serialize;

use crate::aoi::{RegionId, RegionKind};

/// Version written in the comment line opening every CSV file.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Slots per row of the per-kind AoI statistics.
pub const KIND_STATS_INTERVAL: u64 = 10;

/// One cached RSU content, identifying the per-content columns of
/// `slots.csv` (`aoi_k{rsu}_h{region}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContentLabel {
    pub rsu: usize,
    pub region: RegionId,
    pub kind: RegionKind,
    pub aoi_max: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SlotRow {
    pub slot: u64,
    pub uploads: usize,
    pub updates: usize,
    pub caching_cost: f64,
    /// Cached contents whose age exceeds their region's threshold after
    /// this slot's transfers.
    pub aoi_exceed: usize,
    pub new_requests: usize,
    pub expired: usize,
    /// Requests pending when stage two decided.
    pub pending: usize,
    pub served: usize,
    pub cost_save: usize,
    pub stale_blocked: usize,
    pub service_cost: f64,
    /// RSU ages in `MetricsLog::contents` order.
    pub rsu_aoi: Vec<u32>,
    /// Backlog of each UV's live request after the slot, 0 without one.
    pub backlog: Vec<f64>,
}

/// One stage-two decision about one pending request.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ServiceEvent {
    pub slot: u64,
    pub uv_id: usize,
    pub rsu_id: usize,
    pub region: RegionId,
    pub backlog: f64,
    pub distance: f64,
    pub alpha: u8,
    pub cost: f64,
    pub received_aoi: u32,
    pub aoi_max: u32,
    pub stale_blocked: bool,
}

pub const SUMMARY_COLUMNS: [&str; 17] = [
    "seed",
    "stage1",
    "stage2",
    "v",
    "w",
    "slots",
    "updates",
    "uploads",
    "aoi_max_exceed",
    "caching_cost",
    "requests",
    "service_success",
    "cost_save",
    "service_cost",
    "stale_blocked",
    "expired",
    "mean_rsu_aoi",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub stage1: String,
    pub stage2: String,
    pub v: f64,
    pub w: f64,
    pub slots: u64,
    pub updates: usize,
    pub uploads: usize,
    pub aoi_max_exceed: usize,
    pub caching_cost: f64,
    pub requests: usize,
    pub service_success: usize,
    pub cost_save: usize,
    pub service_cost: f64,
    pub stale_blocked: usize,
    pub expired: usize,
    pub mean_rsu_aoi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KindStat {
    /// Last slot of the interval.
    pub slot: u64,
    pub kind: RegionKind,
    pub aoi_max: u32,
    pub mean: f64,
    pub min: u32,
    pub max: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsLog {
    pub seed: u64,
    pub stage1: String,
    pub stage2: String,
    pub v: f64,
    pub w: f64,
    pub contents: Vec<ContentLabel>,
    pub uvs: usize,
    pub rows: Vec<SlotRow>,
    pub events: Vec<ServiceEvent>,
}

impl MetricsLog {
    /// Counters folded from the per-slot rows.
    pub fn summary(&self) -> Summary {
        let sum = |f: fn(&SlotRow) -> usize| self.rows.iter().map(f).sum::<usize>();
        let ages: Vec<u32> = self.rows.iter().flat_map(|r| r.rsu_aoi.iter().copied()).collect();
        Summary {
            seed: self.seed,
            stage1: self.stage1.clone(),
            stage2: self.stage2.clone(),
            v: self.v,
            w: self.w,
            slots: self.rows.len() as u64,
            updates: sum(|r| r.updates),
            uploads: sum(|r| r.uploads),
            aoi_max_exceed: sum(|r| r.aoi_exceed),
            caching_cost: self.rows.iter().map(|r| r.caching_cost).sum(),
            requests: sum(|r| r.new_requests),
            service_success: sum(|r| r.served),
            cost_save: sum(|r| r.cost_save),
            service_cost: self.rows.iter().map(|r| r.service_cost).sum(),
            stale_blocked: sum(|r| r.stale_blocked),
            expired: sum(|r| r.expired),
            mean_rsu_aoi: if ages.is_empty() {
                0.0
            } else {
                ages.iter().map(|&a| f64::from(a)).sum::<f64>() / ages.len() as f64
            },
        }
    }

    /// Mean, min and max RSU age per region kind over consecutive
    /// `KIND_STATS_INTERVAL`-slot windows.
    pub fn kind_stats(&self) -> Vec<KindStat> {
        let mut out = Vec::new();
        for chunk in self.rows.chunks(KIND_STATS_INTERVAL as usize) {
            let slot = chunk.last().map_or(0, |r| r.slot);
            for kind in RegionKind::ALL {
                let cols: Vec<usize> = (0..self.contents.len())
                    .filter(|&i| self.contents[i].kind == kind)
                    .collect();
                if cols.is_empty() {
                    continue;
                }
                let ages: Vec<u32> = chunk
                    .iter()
                    .flat_map(|r| cols.iter().map(move |&i| r.rsu_aoi[i]))
                    .collect();
                out.push(KindStat {
                    slot,
                    kind,
                    aoi_max: self.contents[cols[0]].aoi_max,
                    mean: ages.iter().map(|&a| f64::from(a)).sum::<f64>() / ages.len() as f64,
                    min: ages.iter().copied().min().unwrap_or(0),
                    max: ages.iter().copied().max().unwrap_or(0),
                });
            }
        }
        out
    }

    pub fn slots_header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "slot",
            "uploads",
            "updates",
            "caching_cost",
            "aoi_exceed",
            "new_requests",
            "expired",
            "pending",
            "served",
            "cost_save",
            "stale_blocked",
            "service_cost",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(self.contents.iter().map(|c| format!("aoi_k{}_h{}", c.rsu, c.region)));
        h.extend((0..self.uvs).map(|i| format!("backlog_uv{i}")));
        h
    }

    pub fn write_slots_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = versioned_writer(out, "slots")?;
        w.write_record(self.slots_header())?;
        for r in &self.rows {
            let mut rec = vec![
                r.slot.to_string(),
                r.uploads.to_string(),
                r.updates.to_string(),
                r.caching_cost.to_string(),
                r.aoi_exceed.to_string(),
                r.new_requests.to_string(),
                r.expired.to_string(),
                r.pending.to_string(),
                r.served.to_string(),
                r.cost_save.to_string(),
                r.stale_blocked.to_string(),
                r.service_cost.to_string(),
            ];
            rec.extend(r.rsu_aoi.iter().map(u32::to_string));
            rec.extend(r.backlog.iter().map(f64::to_string));
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        write_summaries(out, &[self.summary()])
    }

    pub fn write_events_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = versioned_writer(out, "events")?;
        for e in &self.events {
            w.serialize(e)?;
        }
        if self.events.is_empty() {
            w.write_record([
                "slot", "uv_id", "rsu_id", "region", "backlog", "distance", "alpha", "cost",
                "received_aoi", "aoi_max", "stale_blocked",
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_kind_stats_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = versioned_writer(out, "kind_stats")?;
        let stats = self.kind_stats();
        for s in &stats {
            w.serialize(s)?;
        }
        if stats.is_empty() {
            w.write_record(["slot", "kind", "aoi_max", "mean", "min", "max"])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn versioned_writer<W: Write>(mut out: W, name: &str) -> csv::Result<csv::Writer<W>> {
    writeln!(out, "# vcache {name} v{CSV_SCHEMA_VERSION}")?;
    Ok(csv::Writer::from_writer(out))
}

/// Writes one summary row per run.
pub fn write_summaries<W: Write>(out: W, summaries: &[Summary]) -> csv::Result<()> {
    let mut w = versioned_writer(out, "summary")?;
    for s in summaries {
        w.serialize(s)?;
    }
    if summaries.is_empty() {
        w.write_record(SUMMARY_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV reader that skips the version comment line.
pub fn csv_reader<R: std::io::Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input)
}
