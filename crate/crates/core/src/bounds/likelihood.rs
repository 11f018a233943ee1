use std::f64::consts::PI;

use super::{
    factored_perturbation_bound, joint_likelihood_shift_bound, phase_error_budget,
    posterior_mean_shift_bound, posterior_perturbation_bound, BoundReport,
};
use crate::error::{invalid, Result};

/// One experiment whose likelihood is `(1 + (-1)^o v cos(M(φ - θ)))/2`
/// under the reference model and the same with `φ` shifted by `shift`
/// under the perturbed one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbedExperiment {
    pub reps: f64,
    pub offset: f64,
    pub outcome: u8,
    pub visibility: f64,
    pub shift: f64,
}

impl PerturbedExperiment {
    pub fn reference(&self, phi: f64) -> f64 {
        let c = self.visibility * (self.reps * (phi - self.offset)).cos();
        if self.outcome == 0 {
            0.5 * (1.0 + c)
        } else {
            0.5 * (1.0 - c)
        }
    }

    pub fn perturbed(&self, phi: f64) -> f64 {
        self.reference(phi + self.shift)
    }

    /// `min_φ P(o|φ) = (1 - v)/2`.
    pub fn min_likelihood(&self) -> f64 {
        0.5 * (1.0 - self.visibility)
    }
}

/// Prior and experiment list, integrated on a midpoint grid over `[-π, π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodInstance {
    /// Unnormalized prior density at the grid points; normalized on use.
    pub prior: Vec<f64>,
    pub experiments: Vec<PerturbedExperiment>,
}

/// Every likelihood-perturbation bound evaluated on one instance.
/// A field is `None` when the instance does not meet that bound's hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodReports {
    pub posterior_perturbation: Option<BoundReport>,
    pub factored_perturbation: Option<BoundReport>,
    pub joint_likelihood_shift: Option<BoundReport>,
    pub posterior_mean_shift: Option<BoundReport>,
    pub phase_error_budget: Option<BoundReport>,
}

impl LikelihoodReports {
    pub fn all(&self) -> impl Iterator<Item = &BoundReport> {
        [
            &self.posterior_perturbation,
            &self.factored_perturbation,
            &self.joint_likelihood_shift,
            &self.posterior_mean_shift,
            &self.phase_error_budget,
        ]
        .into_iter()
        .flatten()
    }
}

struct Moments {
    evidence: f64,
    mean: f64,
    mean_abs: f64,
}

impl LikelihoodInstance {
    pub fn grid_points(&self) -> usize {
        self.prior.len()
    }

    fn point(&self, i: usize) -> f64 {
        -PI + (i as f64 + 0.5) * 2.0 * PI / self.grid_points() as f64
    }

    fn normalized_prior(&self) -> Result<Vec<f64>> {
        let total: f64 = self.prior.iter().sum();
        if !(total > 0.0) || self.prior.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("prior must be non-negative with positive mass"));
        }
        Ok(self.prior.iter().map(|p| p / total).collect())
    }

    fn moments(&self, prior: &[f64], like: &[f64]) -> Moments {
        let mut evidence = 0.0;
        let mut first = 0.0;
        let mut abs = 0.0;
        for (i, (&p, &l)) in prior.iter().zip(like).enumerate() {
            let w = p * l;
            let phi = self.point(i);
            evidence += w;
            first += w * phi;
            abs += w * phi.abs();
        }
        Moments {
            evidence,
            mean: first / evidence,
            mean_abs: abs / evidence,
        }
    }

    /// Evaluates every bound whose hypotheses hold on this instance.
    pub fn evaluate(&self) -> Result<LikelihoodReports> {
        if self.experiments.is_empty() {
            return Err(invalid("instance has no experiments"));
        }
        let prior = self.normalized_prior()?;
        let g = self.grid_points();
        let n = self.experiments.len();

        let mut joint = vec![1.0; g];
        let mut joint_p = vec![1.0; g];
        let mut ratios = vec![0.0f64; n];
        let mut ratio_gap: f64 = 0.0;
        for i in 0..g {
            let phi = self.point(i);
            for (j, e) in self.experiments.iter().enumerate() {
                let p = e.reference(phi);
                let q = e.perturbed(phi);
                joint[i] *= p;
                joint_p[i] *= q;
                // Points where the reference likelihood vanishes make the ratio unbounded.
                let r = if p > 0.0 { (q - p).abs() / p } else if q == p { 0.0 } else { f64::INFINITY };
                ratios[j] = ratios[j].max(r);
                ratio_gap = ratio_gap.max(r);
            }
        }
        let delta_sup = joint
            .iter()
            .zip(&joint_p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let m = self.moments(&prior, &joint);
        let mp = self.moments(&prior, &joint_p);
        let mean_shift = (m.mean - mp.mean).abs();
        let evidence_shift = (mp.evidence - m.evidence).abs();

        let posterior_perturbation = if m.evidence.min(mp.evidence) >= 2.0 * delta_sup {
            let b = posterior_perturbation_bound(delta_sup, m.evidence)?;
            Some(BoundReport::new("posterior perturbation", b, mean_shift))
        } else {
            None
        };
        let factored_perturbation = ratio_gap.is_finite().then(|| {
            let b = factored_perturbation_bound(ratio_gap, n).expect("finite non-negative gap");
            BoundReport::new("factored perturbation", b, mean_shift)
        });
        let joint_likelihood_shift = joint_likelihood_shift_bound(&ratios)
            .ok()
            .map(|b| BoundReport::new("joint likelihood shift", b * m.evidence, evidence_shift));
        let posterior_mean_shift =
            posterior_mean_shift_bound(&ratios, m.mean_abs, Some(evidence_shift / m.evidence))
                .ok()
                .map(|b| BoundReport::new("posterior mean shift", b, mean_shift));
        let p_min = self
            .experiments
            .iter()
            .map(PerturbedExperiment::min_likelihood)
            .fold(f64::INFINITY, f64::min);
        let max_shift = self.experiments.iter().map(|e| e.shift.abs()).fold(0.0, f64::max);
        let m_values: Vec<f64> = self.experiments.iter().map(|e| e.reps).collect();
        let phase_error = if posterior_mean_shift.is_some() {
            phase_error_budget(&m_values, p_min, max_shift)
                .ok()
                .map(|b| BoundReport::new("phase error budget", b, mean_shift))
        } else {
            None
        };

        Ok(LikelihoodReports {
            posterior_perturbation,
            factored_perturbation,
            joint_likelihood_shift,
            posterior_mean_shift,
            phase_error_budget: phase_error,
        })
    }
}
