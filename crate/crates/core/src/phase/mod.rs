//! Grid-based Bayesian iterative phase estimation.
//!
//! The eigenphase is `φ = E t`, where `t` is the evolution time per
//! repetition. One experiment prepares the ancilla in `|+>`, applies a
//! phase `Mθ` between its branches, runs the controlled evolution for `M`
//! repetitions and measures in the X basis, so that for an eigenstate
//!
//! ```text
//! Pr(o | φ; M, θ) = (1 + (-1)^o cos(M(φ - θ))) / 2.
//! ```

mod circuit;
mod design;
mod posterior;
mod session;

pub use circuit::{interfere, simulate_outcome, simulate_outcome_with, Interference};
pub use design::{design_experiment, DesignRule, DesignStrategy, ExperimentRecord, ExperimentSetting};
pub use posterior::{bayes_update, posterior_mean, PosteriorGrid, UpdateStatus, DEFAULT_GRID_POINTS};
pub use session::{
    default_time_per_rep, run_session, write_trace_csv, Estimator, SamplerSettings, SequenceSummary,
    SessionConfig, SessionTrace, Surrogate, TraceRow, TRACE_CSV_HEADER,
};

/// Probability of outcome `o` for eigenphase `phi` after `m` repetitions
/// with offset `theta`. The two outcomes sum to exactly 1.
pub fn likelihood(o: u8, phi: f64, m: f64, theta: f64) -> f64 {
    let p0 = 0.5 * (1.0 + (m * (phi - theta)).cos());
    if o == 0 { p0 } else { 1.0 - p0 }
}
