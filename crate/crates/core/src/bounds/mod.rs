//! Closed-form perturbation bounds and checkers that compare them with
//! exact numerics.
//!
//! Symbols: `γ` is the smallest spectral gap in a Hamiltonian sequence,
//! `λ` the largest operator-norm step between consecutive members and `M`
//! the sequence length. The likelihood-ratio gap of the factored posterior
//! bound is called `ratio_gap` to keep it apart from `γ`.

mod likelihood;
mod spectral;
mod subsample;
mod suites;

pub use likelihood::{LikelihoodInstance, LikelihoodReports, PerturbedExperiment};
pub use spectral::{
    adiabatic_deviation, overlap_success_probability, sequence_phase_deviation, sequence_stats,
    DeviationReport, SequenceStats,
};
pub use subsample::{subsample_error_scaling, LikelihoodProbe, ScalingReport, ScalingRow};
pub use suites::{
    perturbative_case, random_hamiltonian, strict_case, PerturbativeCase, PerturbativeSettings,
    StrictCase, StrictSettings,
};

use crate::error::{invalid, Error, Result};

/// Slack allowed when comparing an observed value with its bound.
pub const REPORT_SLACK: f64 = 1e-12;

/// Observed value against its bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub context: String,
    pub bound: f64,
    pub observed: f64,
    pub satisfied: bool,
}

impl BoundReport {
    pub fn new(context: impl Into<String>, bound: f64, observed: f64) -> Self {
        BoundReport {
            context: context.into(),
            bound,
            observed,
            satisfied: observed <= bound + REPORT_SLACK,
        }
    }
}

/// Which transition count enters the failure condition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FailureConvention {
    /// `M - 1` transitions, starting in the ground state of the first member.
    #[default]
    Transitions,
    /// `M` transitions, starting in the ground state of the unsampled
    /// Hamiltonian.
    UnsampledStart,
}

/// `2 M λ² / (γ - 2λ)²`.
pub fn eigenphase_shift_bound(s: &SequenceStats) -> Result<f64> {
    if s.lambda == 0.0 {
        return Ok(0.0);
    }
    if s.gamma <= 2.0 * s.lambda {
        return Err(Error::VacuousBound(format!(
            "gap {} does not exceed twice the step {}",
            s.gamma, s.lambda
        )));
    }
    Ok(2.0 * s.m_count as f64 * s.lambda.powi(2) / (s.gamma - 2.0 * s.lambda).powi(2))
}

/// Largest admissible `λ/γ` for failure probability `epsilon` over
/// `transitions` steps: `sqrt(1 - exp(ln(1-ε)/transitions))`.
pub fn failure_threshold(transitions: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if transitions == 0 {
        return Err(invalid("need at least one transition"));
    }
    Ok((1.0 - ((1.0 - epsilon).ln() / transitions as f64).exp()).sqrt())
}

pub fn failure_condition(s: &SequenceStats, epsilon: f64) -> Result<bool> {
    failure_condition_with(s, epsilon, FailureConvention::Transitions)
}

/// True iff `λ/γ` is strictly below [`failure_threshold`].
pub fn failure_condition_with(
    s: &SequenceStats,
    epsilon: f64,
    convention: FailureConvention,
) -> Result<bool> {
    if s.m_count < 2 {
        return Err(invalid(format!("need M >= 2, got {}", s.m_count)));
    }
    let transitions = match convention {
        FailureConvention::Transitions => s.m_count - 1,
        FailureConvention::UnsampledStart => s.m_count,
    };
    let threshold = failure_threshold(transitions, epsilon)?;
    if s.lambda == 0.0 {
        return Ok(true);
    }
    Ok(s.lambda / s.gamma < threshold)
}

/// `5πΔ / P(E)`; requires `P(E) >= 2Δ`.
pub fn posterior_perturbation_bound(delta_sup: f64, p_evidence: f64) -> Result<f64> {
    if !(delta_sup >= 0.0) {
        return Err(invalid(format!("sup distance must be non-negative, got {delta_sup}")));
    }
    if !(p_evidence >= 2.0 * delta_sup) || p_evidence <= 0.0 {
        return Err(Error::HypothesisViolated {
            index: 0,
            message: format!("evidence {p_evidence} is below twice the sup distance {delta_sup}"),
        });
    }
    Ok(5.0 * std::f64::consts::PI * delta_sup / p_evidence)
}

/// `5π((1 + ratio_gap)^N - 1)`.
pub fn factored_perturbation_bound(ratio_gap: f64, n_experiments: usize) -> Result<f64> {
    if !(ratio_gap >= 0.0) {
        return Err(invalid(format!("ratio gap must be non-negative, got {ratio_gap}")));
    }
    Ok(5.0 * std::f64::consts::PI * ((1.0 + ratio_gap).powi(n_experiments as i32) - 1.0))
}

fn check_ratio_hypotheses(ratios: &[f64]) -> Result<()> {
    for (j, &r) in ratios.iter().enumerate() {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(invalid(format!("ratio {j} must be finite and non-negative, got {r}")));
        }
        if r > 0.5 {
            return Err(Error::HypothesisViolated {
                index: j,
                message: format!("ratio {r} exceeds 1/2"),
            });
        }
    }
    let n = ratios.len() as f64;
    if let Some((j, &r)) = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    {
        if n * r >= 1.0 {
            return Err(Error::HypothesisViolated {
                index: j,
                message: format!("N * max ratio = {} is not below 1", n * r),
            });
        }
    }
    Ok(())
}

/// Relative joint-likelihood shift bound `|δ̄| / P(o) <= 2 Σ_j r_j`, where
/// `r_j = max_φ |ε_j(φ)| / P(o_j|φ)`. Requires every `r_j <= 1/2` and
/// `N max_j r_j < 1`.
pub fn joint_likelihood_shift_bound(per_experiment_ratios: &[f64]) -> Result<f64> {
    check_ratio_hypotheses(per_experiment_ratios)?;
    Ok(2.0 * per_experiment_ratios.iter().sum::<f64>())
}

/// `8 Σ_j r_j · mean|φ|` under the posterior. The extra hypothesis
/// `|δ̄| <= P(o)/2` is taken from `relative_shift = |δ̄|/P(o)` when known,
/// otherwise from its sufficient condition `2 Σ r_j <= 1/2`.
pub fn posterior_mean_shift_bound(
    per_experiment_ratios: &[f64],
    abs_phi_post: f64,
    relative_shift: Option<f64>,
) -> Result<f64> {
    check_ratio_hypotheses(per_experiment_ratios)?;
    let sum: f64 = per_experiment_ratios.iter().sum();
    let shift = relative_shift.unwrap_or(2.0 * sum);
    if shift > 0.5 {
        return Err(Error::HypothesisViolated {
            index: 0,
            message: format!("relative evidence shift {shift} exceeds 1/2"),
        });
    }
    if !(abs_phi_post >= 0.0) {
        return Err(invalid(format!("mean |φ| must be non-negative, got {abs_phi_post}")));
    }
    Ok(8.0 * sum * abs_phi_post)
}

/// `8π (Σ_j M_j / P_min) |Δφ|`.
pub fn phase_error_budget(m_values: &[f64], min_likelihood: f64, delta_phi: f64) -> Result<f64> {
    if !(min_likelihood > 0.0) {
        return Err(Error::HypothesisViolated {
            index: 0,
            message: format!("minimum likelihood {min_likelihood} is not positive"),
        });
    }
    let total: f64 = m_values.iter().sum();
    Ok(8.0 * std::f64::consts::PI * total / min_likelihood * delta_phi.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn stats(gamma: f64, lambda: f64, m: usize) -> SequenceStats {
        SequenceStats {
            gamma,
            lambda,
            m_count: m,
        }
    }

    #[test]
    fn eigenphase_examples() {
        assert_eq!(eigenphase_shift_bound(&stats(1.0, 0.0, 5)).unwrap(), 0.0);
        assert!((eigenphase_shift_bound(&stats(1.0, 0.1, 10)).unwrap() - 0.3125).abs() < 1e-12);
        for m in [2, 7, 40] {
            let b = eigenphase_shift_bound(&stats(0.8, 0.2, m)).unwrap();
            assert!((b - m as f64 / 2.0).abs() < 1e-12);
        }
        assert!(matches!(
            eigenphase_shift_bound(&stats(1.0, 0.5, 3)),
            Err(Error::VacuousBound(_))
        ));
    }

    #[test]
    fn failure_examples() {
        assert!(failure_condition(&stats(1.0, 0.5, 2), 0.5).unwrap());
        assert!((failure_threshold(1, 0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(failure_condition(&stats(1.0, 0.0, 50), 1e-9).unwrap());
        assert!(!failure_condition(&stats(1.0, 1e-3, 2), 1e-12).unwrap());
        assert!(failure_condition(&stats(1.0, 0.1, 1), 0.1).is_err());
        // The unsampled-start convention counts one more transition.
        let s = stats(1.0, 0.3, 2);
        assert!(failure_condition(&s, 0.1).unwrap());
        assert!(!failure_condition_with(&s, 0.1, FailureConvention::UnsampledStart).unwrap());
    }

    #[test]
    fn posterior_examples() {
        assert_eq!(posterior_perturbation_bound(0.0, 0.3).unwrap(), 0.0);
        assert!((posterior_perturbation_bound(0.01, 0.5).unwrap() - 0.1 * PI).abs() < 1e-12);
        assert!(posterior_perturbation_bound(0.3, 0.5).is_err());
        assert_eq!(factored_perturbation_bound(0.0, 4).unwrap(), 0.0);
        assert!((factored_perturbation_bound(0.1, 1).unwrap() - 0.5 * PI).abs() < 1e-12);
        let b = factored_perturbation_bound(0.01, 3).unwrap();
        assert!((b - 5.0 * PI * (1.01f64.powi(3) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(joint_likelihood_shift_bound(&[0.0, 0.0]).unwrap(), 0.0);
        assert!((joint_likelihood_shift_bound(&[0.1]).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(
            joint_likelihood_shift_bound(&[0.1, 0.6]),
            Err(Error::HypothesisViolated { index: 1, .. })
        ));
        assert!(joint_likelihood_shift_bound(&[0.3, 0.3, 0.4]).is_err());
        assert_eq!(posterior_mean_shift_bound(&[0.0], 2.0, None).unwrap(), 0.0);
        let b = posterior_mean_shift_bound(&[0.02, 0.03], PI, None).unwrap();
        assert!((b - 0.4 * PI).abs() < 1e-12);
        assert!(posterior_mean_shift_bound(&[0.2, 0.2], 1.0, None).is_err());
        assert!(posterior_mean_shift_bound(&[0.2, 0.2], 1.0, Some(0.1)).is_ok());
    }

    #[test]
    fn budget_examples() {
        assert_eq!(phase_error_budget(&[1.0, 2.0], 0.5, 0.0).unwrap(), 0.0);
        let b = phase_error_budget(&[1.0, 2.0], 0.5, 0.001).unwrap();
        assert!((b - 8.0 * PI * 6.0 * 0.001).abs() < 1e-12);
        assert!(phase_error_budget(&[1.0], 0.0, 0.1).is_err());
    }

    #[test]
    fn report_slack() {
        assert!(BoundReport::new("x", 1.0, 1.0 + 1e-13).satisfied);
        assert!(!BoundReport::new("x", 1.0, 1.0 + 1e-9).satisfied);
    }

    proptest! {
        #[test]
        fn eigenphase_monotone(
            gamma in 0.5f64..5.0,
            frac in 0.0f64..0.45,
            m in 2usize..100,
            bump in 0.001f64..0.05,
        ) {
            let lambda = frac * gamma;
            let base = eigenphase_shift_bound(&stats(gamma, lambda, m)).unwrap();
            prop_assert!(eigenphase_shift_bound(&stats(gamma, lambda, m + 1)).unwrap() >= base);
            prop_assert!(eigenphase_shift_bound(&stats(gamma * (1.0 + bump), lambda, m)).unwrap() <= base);
            let larger = (lambda * (1.0 + bump)).min(0.499 * gamma);
            prop_assert!(eigenphase_shift_bound(&stats(gamma, larger, m)).unwrap() >= base);
        }

        #[test]
        fn threshold_shrinks_with_length(eps in 0.01f64..0.99, m in 1usize..200) {
            prop_assert!(failure_threshold(m + 1, eps).unwrap() <= failure_threshold(m, eps).unwrap());
        }
    }
}
