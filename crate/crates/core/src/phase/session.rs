use std::f64::consts::PI;
use std::io::{self, Write};

use super::{
    bayes_update, design_experiment, simulate_outcome_with, DesignStrategy, ExperimentRecord,
    PosteriorGrid, UpdateStatus, DEFAULT_GRID_POINTS,
};
use crate::error::{invalid, Result};
use crate::hamiltonian::Hamiltonian;
use crate::rng::derive_seed;
use crate::sampler::{draw_sampled_hamiltonian, importance_weights_with_floor, ImportanceDistribution};
use crate::solver::{expectation, operator_norm_diff, Eigensystem};

/// Column order of [`write_trace_csv`].
pub const TRACE_CSV_HEADER: &str =
    "experiment,reps,offset,outcome,segment_seeds,posterior_mean,posterior_variance";

/// `t = π / (Σ|c_j| + 0.1)`, which keeps every eigenphase inside `(-π, π)`.
pub fn default_time_per_rep(h: &Hamiltonian) -> f64 {
    PI / (h.one_norm() + 0.1)
}

/// Source of the per-term expectations that drive the importance weights.
#[derive(Clone, Debug, PartialEq)]
pub enum Surrogate {
    /// `<ψ_0|H_j|ψ_0>` in the exact ground state of the unsampled Hamiltonian.
    ExactGroundState,
    /// Externally supplied values, aligned with the canonical term order.
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerSettings {
    pub rho: f64,
    pub draws: u64,
    pub floor_fraction: Option<f64>,
    pub surrogate: Surrogate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    /// Linear mean on the branch `[-π, π)`.
    PosteriorMean,
    CircularMean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionConfig {
    pub experiments: usize,
    pub grid_points: usize,
    pub design: DesignStrategy,
    /// `None` selects [`default_time_per_rep`].
    pub time_per_rep: Option<f64>,
    /// `None` evolves under the exact Hamiltonian in every segment.
    pub sampler: Option<SamplerSettings>,
    /// Record gap and step statistics of the sampled sequence.
    pub track_sequence: bool,
    pub estimator: Estimator,
    /// Start each experiment from the previous post-measurement state
    /// instead of the exact ground state.
    pub carry_state: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            experiments: 40,
            grid_points: DEFAULT_GRID_POINTS,
            design: DesignStrategy::default(),
            time_per_rep: None,
            sampler: None,
            track_sequence: false,
            estimator: Estimator::PosteriorMean,
            carry_state: false,
        }
    }
}

/// Gap and step statistics over every evolution segment of a session.
///
/// `max_step` includes the step from the unsampled Hamiltonian (whose
/// ground state is prepared) to the first segment of each experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceSummary {
    pub min_gap: f64,
    pub max_step: f64,
    pub total_segments: usize,
    pub max_segments: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub experiment: usize,
    pub reps: f64,
    pub offset: f64,
    pub outcome: u8,
    pub segment_seeds: Vec<u64>,
    pub posterior_mean: f64,
    pub posterior_variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionTrace {
    pub seed: u64,
    pub time_per_rep: f64,
    pub exact_ground_energy: f64,
    pub records: Vec<ExperimentRecord>,
    pub rows: Vec<TraceRow>,
    pub posterior: PosteriorGrid,
    pub underflows: usize,
    pub phase_estimate: f64,
    pub energy_estimate: f64,
    pub sequence: Option<SequenceSummary>,
}

impl SessionTrace {
    /// `|φ̂ - E_0 t|`.
    pub fn phase_error(&self) -> f64 {
        (self.phase_estimate - self.exact_ground_energy * self.time_per_rep).abs()
    }
}

struct SequenceTracker {
    summary: SequenceSummary,
}

impl SequenceTracker {
    fn new() -> Self {
        SequenceTracker {
            summary: SequenceSummary {
                min_gap: f64::INFINITY,
                max_step: 0.0,
                total_segments: 0,
                max_segments: 0,
            },
        }
    }

    fn observe(&mut self, base: &Hamiltonian, segments: &[Hamiltonian], systems: &[Eigensystem]) -> Result<()> {
        let s = &mut self.summary;
        let mut prev = base;
        for (h, eig) in segments.iter().zip(systems) {
            s.min_gap = s.min_gap.min(eig.gap()?.value);
            if !std::ptr::eq(prev, h) {
                s.max_step = s.max_step.max(operator_norm_diff(prev, h)?);
            }
            prev = h;
        }
        s.total_segments += segments.len();
        s.max_segments = s.max_segments.max(segments.len());
        Ok(())
    }
}

/// Runs `config.experiments` rounds of design, simulation and update.
///
/// Seeds: the Hamiltonian for segment `k` of experiment `j` is drawn with
/// `derive_seed(seed, [j, 1, k])`; the outcome of experiment `j` is
/// sampled with `derive_seed(seed, [j, 0])`.
pub fn run_session(h: &Hamiltonian, config: &SessionConfig, seed: u64) -> Result<SessionTrace> {
    let exact = Eigensystem::new(h)?;
    let e0 = exact.ground_energy();
    let t = config.time_per_rep.unwrap_or_else(|| default_time_per_rep(h));
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("time per repetition must be positive, got {t}")));
    }
    if e0.abs() * t >= PI {
        return Err(invalid(format!(
            "ground phase |E_0| t = {} is outside (-π, π); reduce the time per repetition",
            e0.abs() * t
        )));
    }

    let dist = match &config.sampler {
        None => None,
        Some(s) => {
            let values = match &s.surrogate {
                Surrogate::ExactGroundState => {
                    let psi = exact.ground_state();
                    h.terms()
                        .iter()
                        .map(|term| expectation(&psi, term))
                        .collect::<Result<Vec<_>>>()?
                }
                Surrogate::Values(v) => v.clone(),
            };
            Some((importance_weights_with_floor(h, &values, s.rho, s.floor_fraction)?, s.draws))
        }
    };

    let mut posterior = PosteriorGrid::uniform(config.grid_points)?;
    let mut tracker = config.track_sequence.then(SequenceTracker::new);
    let mut state = exact.ground_state();
    let mut records = Vec::with_capacity(config.experiments);
    let mut rows = Vec::with_capacity(config.experiments);
    let mut underflows = 0;

    for j in 0..config.experiments {
        let setting = design_experiment(&posterior, &config.design, t)?;
        let n_seg = setting.segments();
        let segment_seeds: Vec<u64> =
            (0..n_seg as u64).map(|k| derive_seed(seed, &[j as u64, 1, k])).collect();
        let input = if config.carry_state { state.clone() } else { exact.ground_state() };

        let outcome_seed = derive_seed(seed, &[j as u64, 0]);
        let (outcome, post) = match &dist {
            None => {
                let segs = vec![&exact; n_seg];
                if let Some(tr) = tracker.as_mut() {
                    let s = &mut tr.summary;
                    s.min_gap = s.min_gap.min(exact.gap()?.value);
                    s.total_segments += n_seg;
                    s.max_segments = s.max_segments.max(n_seg);
                }
                simulate_outcome_with(&input, &segs, &setting, outcome_seed)?
            }
            Some((d, draws)) => {
                let hams = sample_segments(d, h, *draws, &segment_seeds)?;
                let systems = hams.iter().map(Eigensystem::new).collect::<Result<Vec<_>>>()?;
                if let Some(tr) = tracker.as_mut() {
                    tr.observe(h, &hams, &systems)?;
                }
                let refs: Vec<&Eigensystem> = systems.iter().collect();
                simulate_outcome_with(&input, &refs, &setting, outcome_seed)?
            }
        };
        state = post;

        let record = ExperimentRecord {
            setting,
            outcome,
            segment_seeds,
        };
        let (next, status) = bayes_update(&posterior, &record);
        if status == UpdateStatus::Underflow {
            underflows += 1;
        }
        posterior = next;
        rows.push(TraceRow {
            experiment: j,
            reps: record.setting.reps,
            offset: record.setting.offset,
            outcome,
            segment_seeds: record.segment_seeds.clone(),
            posterior_mean: posterior.mean(),
            posterior_variance: posterior.variance(),
        });
        records.push(record);
    }

    let phase_estimate = match config.estimator {
        Estimator::PosteriorMean => posterior.mean(),
        Estimator::CircularMean => posterior.circular_mean(),
    };
    let sequence = tracker.map(|tr| tr.summary).filter(|s| s.total_segments > 0);
    Ok(SessionTrace {
        seed,
        time_per_rep: t,
        exact_ground_energy: e0,
        records,
        rows,
        posterior,
        underflows,
        phase_estimate,
        energy_estimate: phase_estimate / t,
        sequence,
    })
}

fn sample_segments(
    dist: &ImportanceDistribution,
    h: &Hamiltonian,
    draws: u64,
    seeds: &[u64],
) -> Result<Vec<Hamiltonian>> {
    seeds
        .iter()
        .map(|&s| Ok(draw_sampled_hamiltonian(dist, h, draws, s)?.into_hamiltonian()))
        .collect()
}

/// Writes the header and one line per experiment. Floats use `{:.16e}`,
/// segment seeds are joined by `;`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &SessionTrace) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for r in &trace.rows {
        let seeds: Vec<String> = r.segment_seeds.iter().map(u64::to_string).collect();
        writeln!(
            w,
            "{},{:.16e},{:.16e},{},{},{:.16e},{:.16e}",
            r.experiment,
            r.reps,
            r.offset,
            r.outcome,
            seeds.join(";"),
            r.posterior_mean,
            r.posterior_variance
        )?;
    }
    Ok(())
}
