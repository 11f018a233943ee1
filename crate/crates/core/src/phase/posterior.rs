use std::f64::consts::PI;

use num_complex::Complex64;

use super::{likelihood, ExperimentRecord};
use crate::error::{invalid, Result};

pub const DEFAULT_GRID_POINTS: usize = 1 << 14;

/// Discretized distribution over the eigenphase on `[-π, π)`.
///
/// Cell `i` covers `[-π + iΔ, -π + (i+1)Δ)` with `Δ = 2π/G`; its mass sits
/// at the cell center so that the uniform grid has mean exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorGrid {
    masses: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateStatus {
    Updated,
    /// The likelihood vanished on every grid point; the prior was kept.
    Underflow,
}

impl PosteriorGrid {
    pub fn uniform(grid_points: usize) -> Result<Self> {
        if grid_points == 0 {
            return Err(invalid("grid needs at least one point"));
        }
        Ok(PosteriorGrid {
            masses: vec![1.0 / grid_points as f64; grid_points],
        })
    }

    /// Normalizes arbitrary non-negative masses.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(invalid("masses must be finite and non-negative"));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("masses sum to zero"));
        }
        Ok(PosteriorGrid {
            masses: masses.into_iter().map(|m| m / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.masses.len() as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -PI + (i as f64 + 0.5) * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Index of the cell containing `phi` (wrapped into `[-π, π)`).
    pub fn index_of(&self, phi: f64) -> usize {
        let wrapped = (phi + PI).rem_euclid(2.0 * PI);
        ((wrapped / self.spacing()) as usize).min(self.len() - 1)
    }

    /// Multiplies by `likelihood(φ)` pointwise and renormalizes.
    pub fn update_with<F: Fn(f64) -> f64>(&self, likelihood: F) -> (PosteriorGrid, UpdateStatus) {
        let spacing = self.spacing();
        let masses: Vec<f64> = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, &m)| m * likelihood(-PI + (i as f64 + 0.5) * spacing))
            .collect();
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return (self.clone(), UpdateStatus::Underflow);
        }
        let inv = 1.0 / total;
        (
            PosteriorGrid {
                masses: masses.into_iter().map(|m| m * inv).collect(),
            },
            UpdateStatus::Updated,
        )
    }

    /// Expectation of `g(φ)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &m)| m * g(self.point(i)))
            .sum()
    }

    /// Linear mean on the branch `[-π, π)`.
    pub fn mean(&self) -> f64 {
        self.expect(|phi| phi)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.expect(|phi| (phi - mu) * (phi - mu)).max(0.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Mean of `|φ|`.
    pub fn mean_abs(&self) -> f64 {
        self.expect(f64::abs)
    }

    /// First trigonometric moment `E[e^{iφ}]`.
    pub fn first_moment(&self) -> Complex64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &m)| Complex64::from_polar(m, self.point(i)))
            .sum()
    }

    pub fn circular_mean(&self) -> f64 {
        self.first_moment().arg()
    }

    /// Angular deviation `sqrt(2(1 - R))`, where `R = |E[e^{iφ}]|`.
    /// Finite for every distribution, `√2` for the uniform one.
    pub fn circular_std(&self) -> f64 {
        let r = self.first_moment().norm().min(1.0);
        (2.0 * (1.0 - r)).sqrt()
    }
}

/// Bayes' rule for one recorded experiment.
pub fn bayes_update(prior: &PosteriorGrid, record: &ExperimentRecord) -> (PosteriorGrid, UpdateStatus) {
    let m = record.setting.reps;
    let theta = record.setting.offset;
    let o = record.outcome;
    prior.update_with(|phi| likelihood(o, phi, m, theta))
}

pub fn posterior_mean(p: &PosteriorGrid) -> f64 {
    p.mean()
}
