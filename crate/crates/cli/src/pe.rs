//! Ensembles of phase-estimation sessions.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rhpe_core::bounds::{eigenphase_shift_bound, failure_condition_with, FailureConvention, SequenceStats};
use rhpe_core::hamiltonian::Hamiltonian;
use rhpe_core::phase::{
    run_session, write_trace_csv, DesignStrategy, Estimator, SamplerSettings, SessionConfig, SessionTrace,
    DEFAULT_GRID_POINTS,
};
use rhpe_core::rng::derive_seed;

use crate::config::{EstimatorName, PeSection};
use crate::error::CliError;
use crate::inputs::{load_hamiltonian, load_surrogate};
use crate::output::{ensure_dir, float, Table};

pub const SESSION_COLUMNS: [&str; 16] = [
    "session",
    "seed",
    "energy_estimate",
    "exact_ground_energy",
    "abs_energy_error",
    "phase_error",
    "posterior_std",
    "underflows",
    "total_segments",
    "min_gap",
    "max_step",
    "shift_bound",
    "budget",
    "within_budget",
    "failure_condition",
    "below_tolerance",
];

/// One finished session measured against the sequence bound.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionOutcome {
    pub trace: SessionTrace,
    pub posterior_std: f64,
    pub stats: Option<SequenceStats>,
    /// `2Mλ²/(γ-2λ)²`; infinite when vacuous.
    pub shift_bound: f64,
    /// `shift_bound + 3 σ_posterior`.
    pub budget: f64,
    pub failure_condition: bool,
    pub below_tolerance: bool,
}

impl SessionOutcome {
    pub fn within_budget(&self) -> bool {
        self.trace.phase_error() <= self.budget
    }
}

pub fn session_config(cfg: &PeSection, h: &Hamiltonian) -> Result<SessionConfig, CliError> {
    let mut design = DesignStrategy::default();
    if let Some(m) = cfg.max_reps {
        design.max_reps = m;
    }
    let sampler = match &cfg.sampler {
        None => None,
        Some(s) => Some(SamplerSettings {
            rho: s.rho,
            draws: s.draws,
            floor_fraction: (s.floor_fraction > 0.0).then_some(s.floor_fraction),
            surrogate: load_surrogate(&s.surrogate, h)?,
        }),
    };
    Ok(SessionConfig {
        experiments: cfg.experiments,
        grid_points: cfg.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
        design,
        time_per_rep: cfg.time_per_rep,
        sampler,
        track_sequence: true,
        estimator: match cfg.estimator {
            EstimatorName::PosteriorMean => Estimator::PosteriorMean,
            EstimatorName::CircularMean => Estimator::CircularMean,
        },
        carry_state: cfg.carry_state,
    })
}

fn assess(trace: SessionTrace, epsilon: f64, tolerance: f64) -> Result<SessionOutcome, CliError> {
    let posterior_std = trace.posterior.std_dev();
    let stats = trace.sequence.map(|s| SequenceStats {
        gamma: s.min_gap,
        lambda: s.max_step,
        m_count: s.total_segments,
    });
    let (shift_bound, failure_condition) = match &stats {
        None => (0.0, true),
        Some(st) => {
            let bound = match eigenphase_shift_bound(st) {
                Ok(b) => b,
                Err(rhpe_core::Error::VacuousBound(_)) => f64::INFINITY,
                Err(e) => return Err(e.into()),
            };
            // Every experiment starts in the ground state of the unsampled
            // Hamiltonian, so each segment is a transition.
            let ok = st.lambda == 0.0
                || st.m_count >= 2 && failure_condition_with(st, epsilon, FailureConvention::UnsampledStart)?;
            (bound, ok)
        }
    };
    let below_tolerance = trace.phase_error() < tolerance;
    Ok(SessionOutcome {
        posterior_std,
        stats,
        shift_bound,
        budget: shift_bound + 3.0 * posterior_std,
        failure_condition,
        below_tolerance,
        trace,
    })
}

/// Session `s` runs with `derive_seed(seed, [s])`.
pub fn run_sessions(cfg: &PeSection, seed: u64) -> Result<Vec<SessionOutcome>, CliError> {
    let h = load_hamiltonian(&cfg.hamiltonian)?;
    run_sessions_on(&h, cfg, seed)
}

pub fn run_sessions_on(h: &Hamiltonian, cfg: &PeSection, seed: u64) -> Result<Vec<SessionOutcome>, CliError> {
    let config = session_config(cfg, h)?;
    (0..cfg.sessions)
        .into_par_iter()
        .map(|s| {
            let trace = run_session(h, &config, derive_seed(seed, &[s as u64]))?;
            assess(trace, cfg.epsilon, cfg.tolerance)
        })
        .collect()
}

pub fn sessions_table(outcomes: &[SessionOutcome]) -> Table {
    let mut t = Table::new(&SESSION_COLUMNS);
    for (i, o) in outcomes.iter().enumerate() {
        let tr = &o.trace;
        let (segments, gap, step) = match &o.stats {
            Some(s) => (s.m_count.to_string(), float(s.gamma), float(s.lambda)),
            None => ("0".into(), String::new(), String::new()),
        };
        t.push(vec![
            i.to_string(),
            tr.seed.to_string(),
            float(tr.energy_estimate),
            float(tr.exact_ground_energy),
            float((tr.energy_estimate - tr.exact_ground_energy).abs()),
            float(tr.phase_error()),
            float(o.posterior_std),
            tr.underflows.to_string(),
            segments,
            gap,
            step,
            float(o.shift_bound),
            float(o.budget),
            o.within_budget().to_string(),
            o.failure_condition.to_string(),
            o.below_tolerance.to_string(),
        ]);
    }
    t
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 { f64::NAN } else { hits as f64 / total as f64 }
}

/// `metric,value` rows summarizing the ensemble.
pub fn summary_table(outcomes: &[SessionOutcome]) -> Table {
    let n = outcomes.len();
    let errors: Vec<f64> = outcomes.iter().map(|o| o.trace.phase_error()).collect();
    let energy_errors: Vec<f64> = outcomes
        .iter()
        .map(|o| (o.trace.energy_estimate - o.trace.exact_ground_energy).abs())
        .collect();
    let conditioned: Vec<&SessionOutcome> = outcomes.iter().filter(|o| o.failure_condition).collect();
    let mean_phase = if n == 0 {
        f64::NAN
    } else {
        outcomes.iter().map(|o| o.trace.phase_estimate).sum::<f64>() / n as f64
    };
    let rows = [
        ("sessions", n.to_string()),
        ("mean_phase_estimate", float(mean_phase)),
        ("median_phase_error", float(median(errors.clone()))),
        ("max_phase_error", float(errors.iter().cloned().fold(f64::NAN, f64::max))),
        ("median_abs_energy_error", float(median(energy_errors))),
        (
            "fraction_below_tolerance",
            float(fraction(outcomes.iter().filter(|o| o.below_tolerance).count(), n)),
        ),
        ("failure_condition_sessions", conditioned.len().to_string()),
        (
            "fraction_within_budget",
            float(fraction(conditioned.iter().filter(|o| o.within_budget()).count(), conditioned.len())),
        ),
        ("underflows", outcomes.iter().map(|o| o.trace.underflows).sum::<usize>().to_string()),
    ];
    let mut t = Table::new(&["metric", "value"]);
    for (k, v) in rows {
        t.push(vec![k.to_string(), v]);
    }
    t
}

/// Writes `traces/session_NNNN.csv` for every session.
pub fn write_traces(dir: &Path, outcomes: &[SessionOutcome]) -> Result<(), CliError> {
    let traces = dir.join("traces");
    ensure_dir(&traces)?;
    for (i, o) in outcomes.iter().enumerate() {
        let path = traces.join(format!("session_{i:04}.csv"));
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &o.trace).map_err(|e| CliError::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
