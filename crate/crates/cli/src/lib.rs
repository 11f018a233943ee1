//! Configuration-driven batch runner: sampling sweeps, phase-estimation
//! ensembles and bound audits.
//!
//! Work is spread over a rayon pool of `jobs` threads. Every task derives
//! its own seed from the master seed and results are collected in index
//! order, so outputs are byte-identical for any thread count.

pub mod audit;
pub mod config;
pub mod error;
pub mod inputs;
pub mod output;
pub mod pe;
pub mod sweep;

use std::path::PathBuf;

pub use config::{Config, Mode};
pub use error::CliError;

use output::ensure_dir;

/// Default worker count when `--jobs` is absent.
pub const JOBS_ENV: &str = "RHPE_JOBS";

/// Files written by one run.
#[derive(Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub strict_violations: usize,
}

pub fn execute(cfg: &Config, jobs: usize) -> Result<RunReport, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    pool.install(|| run(cfg))
}

fn run(cfg: &Config) -> Result<RunReport, CliError> {
    let dir = &cfg.output;
    ensure_dir(dir)?;
    let mut report = RunReport::default();
    match cfg.mode {
        Mode::Sweep => {
            let s = cfg.sweep.as_ref().expect("validated");
            let rows = sweep::run_sweep(s, cfg.seed)?;
            report.files.push(sweep::sweep_table(&rows).write(&dir.join("sweep.csv"))?);
        }
        Mode::PeSession => {
            let p = cfg.pe.as_ref().expect("validated");
            let outcomes = pe::run_sessions(p, cfg.seed)?;
            report.files.push(pe::sessions_table(&outcomes).write(&dir.join("sessions.csv"))?);
            report.files.push(pe::summary_table(&outcomes).write(&dir.join("summary.csv"))?);
            if p.write_traces {
                pe::write_traces(dir, &outcomes)?;
                report.files.push(dir.join("traces"));
            }
        }
        Mode::BoundsAudit => {
            let a = cfg.audit.as_ref().expect("validated");
            let res = audit::run_audit(a, cfg.seed)?;
            report.files.push(audit::reports_table(&res).write(&dir.join("bound_reports.csv"))?);
            report.files.push(audit::satisfaction_table(&res).write(&dir.join("satisfaction.csv"))?);
            report.files.push(audit::subsample_table(&res).write(&dir.join("subsample.csv"))?);
            report.files.push(audit::summary_table(&res).write(&dir.join("audit_summary.csv"))?);
            report.strict_violations = res.strict_violations();
        }
    }
    Ok(report)
}
