//! Command-line front end of the `vcache` simulator.
//!
//! Every command parses and validates all scenarios before running any,
//! runs them in parallel, and writes nothing unless every run succeeded.

mod args;
pub mod config;
mod error;
mod output;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vcache::caching::CachingPolicy;
use vcache::service::VPreset;
use vcache::sim::{run_scenario, MetricsLog, ScenarioConfig, Summary, VSetting};

pub use args::{Cli, Command, CommonArgs, CompareArgs, RunArgs, SweepArgs};
pub use config::{parse_config, parse_config_str};
pub use error::{CliError, Result};
use output::{summaries_csv, write_atomic, RunFiles};

pub fn execute(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::SweepV(a) => cmd_sweep_v(a, out),
        Command::DefaultConfig => emit(out, &config::default_config_toml()),
    }
}

struct Job {
    dir: PathBuf,
    config: ScenarioConfig,
}

fn base_config(common: &CommonArgs) -> Result<ScenarioConfig> {
    let mut c = match &common.config {
        Some(path) => parse_config(path)?,
        None if common.single_rsu => ScenarioConfig::single_rsu(),
        None => ScenarioConfig::default(),
    };
    if let Some(h) = common.horizon {
        c.horizon = h;
    }
    Ok(c)
}

fn seeds(common: &CommonArgs, base: &ScenarioConfig) -> Vec<u64> {
    if common.seeds.is_empty() {
        return vec![base.seed];
    }
    let mut out = Vec::new();
    for &s in &common.seeds {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn unique<T: PartialEq + Copy>(items: &[T], default: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for &x in if items.is_empty() { default } else { items } {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn origin(common: &CommonArgs) -> String {
    common
        .config
        .as_ref()
        .map_or_else(|| "scenario".to_string(), |p| p.display().to_string())
}

fn validate_all(jobs: &[Job], origin: &str) -> Result<()> {
    for j in jobs {
        j.config.validate().map_err(|source| CliError::Invalid {
            origin: origin.to_string(),
            source,
        })?;
    }
    Ok(())
}

fn run_all(jobs: &[Job], origin: &str) -> Result<Vec<MetricsLog>> {
    validate_all(jobs, origin)?;
    jobs.par_iter()
        .map(|j| run_scenario(&j.config))
        .collect::<vcache::Result<Vec<_>>>()
        .map_err(|source| CliError::Invalid {
            origin: origin.to_string(),
            source,
        })
}

fn write_runs(jobs: &[Job], logs: &[MetricsLog]) -> Result<Vec<Summary>> {
    let files: Vec<RunFiles> = logs.par_iter().map(RunFiles::new).collect();
    for (job, f) in jobs.iter().zip(&files) {
        f.write(&job.dir)?;
    }
    Ok(logs.iter().map(MetricsLog::summary).collect())
}

fn emit(out: &mut impl Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Write {
        path: PathBuf::from("<stdout>"),
        message: e.to_string(),
    })
}

fn finish(out: &mut impl Write, dir: &Path, name: &str, summaries: &[Summary], report: String) -> Result<()> {
    write_atomic(&dir.join(format!("{name}.csv")), &summaries_csv(summaries))?;
    write_atomic(&dir.join(format!("{name}.txt")), report.as_bytes())?;
    emit(out, &report)?;
    emit(out, &format!("results written to {}\n", dir.display()))
}

fn cmd_run(a: &RunArgs, out: &mut impl Write) -> Result<()> {
    let mut base = base_config(&a.common)?;
    if let Some(p) = a.stage1 {
        base.caching.policy = p;
    }
    if let Some(p) = a.stage2 {
        base.service.policy = p;
    }
    if let Some(v) = a.v {
        base.service.v = v;
    }
    let seeds = seeds(&a.common, &base);
    let jobs: Vec<Job> = seeds
        .iter()
        .map(|&seed| Job {
            dir: if seeds.len() == 1 {
                a.common.out.clone()
            } else {
                a.common.out.join(format!("seed-{seed}"))
            },
            config: ScenarioConfig { seed, ..base.clone() },
        })
        .collect();
    let logs = run_all(&jobs, &origin(&a.common))?;
    let summaries = write_runs(&jobs, &logs)?;
    let report = report::run_report(&summaries);
    if seeds.len() == 1 {
        write_atomic(&a.common.out.join("summary.txt"), report.as_bytes())?;
        emit(out, &report)?;
        emit(out, &format!("results written to {}\n", a.common.out.display()))
    } else {
        finish(out, &a.common.out, "summary", &summaries, report)
    }
}

fn cmd_compare(a: &CompareArgs, out: &mut impl Write) -> Result<()> {
    let mut base = base_config(&a.common)?;
    if let Some(p) = a.stage2 {
        base.service.policy = p;
    }
    if let Some(v) = a.v {
        base.service.v = v;
    }
    let seeds = seeds(&a.common, &base);
    let policies = unique(&a.policies, &CachingPolicy::ALL);
    let mut jobs = Vec::new();
    for &p in &policies {
        for &seed in &seeds {
            let mut config = ScenarioConfig { seed, ..base.clone() };
            config.caching.policy = p;
            jobs.push(Job {
                dir: a.common.out.join(p.name()).join(format!("seed-{seed}")),
                config,
            });
        }
    }
    let logs = run_all(&jobs, &origin(&a.common))?;
    let summaries = write_runs(&jobs, &logs)?;
    let grid: Vec<Vec<Summary>> = summaries.chunks(seeds.len()).map(<[Summary]>::to_vec).collect();
    let report = report::compare_report(&policies, &seeds, &grid);
    finish(out, &a.common.out, "compare", &summaries, report)
}

fn cmd_sweep_v(a: &SweepArgs, out: &mut impl Write) -> Result<()> {
    let mut base = base_config(&a.common)?;
    if let Some(p) = a.stage1 {
        base.caching.policy = p;
    }
    if let Some(p) = a.stage2 {
        base.service.policy = p;
    }
    let seeds = seeds(&a.common, &base);
    let presets: Vec<VSetting> = VPreset::ALL.into_iter().map(VSetting::Preset).collect();
    let vs = unique(&a.vs, &presets);
    let mut jobs = Vec::new();
    for &v in &vs {
        for &seed in &seeds {
            let mut config = ScenarioConfig { seed, ..base.clone() };
            config.service.v = v;
            jobs.push(Job {
                dir: a.common.out.join(format!("v-{v}")).join(format!("seed-{seed}")),
                config,
            });
        }
    }
    let logs = run_all(&jobs, &origin(&a.common))?;
    let summaries = write_runs(&jobs, &logs)?;
    let grid: Vec<Vec<Summary>> = summaries.chunks(seeds.len()).map(<[Summary]>::to_vec).collect();
    let report = report::sweep_report(&vs, &seeds, &grid);
    finish(out, &a.common.out, "sweep_v", &summaries, report)
}
