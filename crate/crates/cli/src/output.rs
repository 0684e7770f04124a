use std::fs;
use std::io::Write;
use std::path::Path;

use vcache::sim::{write_summaries, MetricsLog, Summary};

use crate::error::{CliError, Result};

/// Files of one run, rendered in memory.
pub struct RunFiles {
    files: Vec<(&'static str, Vec<u8>)>,
}

fn render<E: std::fmt::Display>(f: impl FnOnce(&mut Vec<u8>) -> Result<(), E>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).unwrap_or_else(|e| panic!("rendering into memory failed: {e}"));
    buf
}

impl RunFiles {
    pub fn new(log: &MetricsLog) -> Self {
        Self {
            files: vec![
                ("slots.csv", render(|b| log.write_slots_csv(b))),
                ("summary.csv", render(|b| log.write_summary_csv(b))),
                ("events.csv", render(|b| log.write_events_csv(b))),
                ("kind_stats.csv", render(|b| log.write_kind_stats_csv(b))),
            ],
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        for (name, bytes) in &self.files {
            write_atomic(&dir.join(name), bytes)?;
        }
        Ok(())
    }
}

pub fn summaries_csv(summaries: &[Summary]) -> Vec<u8> {
    render(|b| write_summaries(b, summaries))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let fail = |e: &dyn std::fmt::Display| CliError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| fail(&e))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(".vcache-")
        .tempfile_in(dir)
        .map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}
