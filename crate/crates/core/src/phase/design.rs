use std::f64::consts::PI;

use super::PosteriorGrid;
use crate::error::{invalid, Result};

/// Parameters of one interferometer run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentSetting {
    /// Repetitions `M > 0`, possibly fractional.
    pub reps: f64,
    /// Phase offset `θ` on `[-π, π)`.
    pub offset: f64,
    /// Evolution time per repetition.
    pub time_per_rep: f64,
}

impl ExperimentSetting {
    pub fn new(reps: f64, offset: f64, time_per_rep: f64) -> Result<Self> {
        if !(reps > 0.0 && reps.is_finite()) {
            return Err(invalid(format!("repetitions must be positive, got {reps}")));
        }
        if !(time_per_rep.is_finite() && time_per_rep > 0.0) {
            return Err(invalid(format!("time per repetition must be positive, got {time_per_rep}")));
        }
        Ok(ExperimentSetting {
            reps,
            offset,
            time_per_rep,
        })
    }

    /// Number of evolution segments, `⌈M⌉`.
    pub fn segments(&self) -> usize {
        self.reps.ceil() as usize
    }

    /// Duration of each segment, `Δt = M t / ⌈M⌉`, so the segments add up
    /// to exactly `M t`.
    pub fn segment_time(&self) -> f64 {
        self.reps * self.time_per_rep / self.segments() as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub setting: ExperimentSetting,
    pub outcome: u8,
    /// Seed of the Hamiltonian sampled for each segment.
    pub segment_seeds: Vec<u64>,
}

/// How `(M, θ)` is chosen from the current posterior.
#[derive(Clone, Debug, PartialEq)]
pub enum DesignRule {
    /// Picks the candidate with the smallest expected posterior variance
    /// after one more outcome. Candidates are `M = c/σ` for every `c` in
    /// `multipliers` (σ the linear posterior deviation), each with
    /// `offsets` values of θ spread over half a fringe above the mean.
    ExpectedVariance { multipliers: Vec<f64>, offsets: usize },
    /// `M = scale / σ_circ`, `θ` = posterior mean. With `quadrature` set, θ
    /// moves a quarter fringe, `π/(2M)`, off the mean: a posterior that is
    /// symmetric about its mean stays symmetric under a pure mean offset.
    Width { scale: f64, quadrature: bool },
}

impl DesignRule {
    pub fn width() -> Self {
        DesignRule::Width {
            scale: 1.25,
            quadrature: true,
        }
    }
}

impl Default for DesignRule {
    fn default() -> Self {
        DesignRule::ExpectedVariance {
            multipliers: vec![0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0],
            offsets: 8,
        }
    }
}

/// Adaptive design; every rule caps `M` at `max_reps`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignStrategy {
    pub rule: DesignRule,
    pub max_reps: f64,
}

impl Default for DesignStrategy {
    fn default() -> Self {
        DesignStrategy {
            rule: DesignRule::default(),
            max_reps: 1024.0,
        }
    }
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI { -PI } else { y }
}

/// Deterministic in the posterior; ties go to the earlier candidate.
pub fn design_experiment(
    p: &PosteriorGrid,
    strategy: &DesignStrategy,
    time_per_rep: f64,
) -> Result<ExperimentSetting> {
    if !(strategy.max_reps > 0.0) {
        return Err(invalid(format!("max_reps must be positive, got {}", strategy.max_reps)));
    }
    let (reps, offset) = match &strategy.rule {
        DesignRule::Width { scale, quadrature } => {
            let sigma = p.circular_std();
            let reps = if sigma > 0.0 {
                (scale / sigma).min(strategy.max_reps)
            } else {
                strategy.max_reps
            };
            let offset = if *quadrature { p.mean() + 0.5 * PI / reps } else { p.mean() };
            (reps, offset)
        }
        DesignRule::ExpectedVariance { multipliers, offsets } => {
            if multipliers.is_empty() || *offsets == 0 {
                return Err(invalid("expected-variance design needs candidates"));
            }
            let sigma = p.std_dev();
            let mut best = (f64::INFINITY, strategy.max_reps, p.mean());
            for &c in multipliers {
                let reps = if sigma > 0.0 {
                    (c / sigma).min(strategy.max_reps)
                } else {
                    strategy.max_reps
                };
                let (risk, offset) = best_offset(p, reps, *offsets);
                if risk < best.0 {
                    best = (risk, reps, offset);
                }
            }
            (best.1, best.2)
        }
    };
    ExperimentSetting::new(reps, wrap(offset), time_per_rep)
}

/// Smallest expected posterior variance over `θ = μ + kπ/(nM)`, `k < n`.
///
/// With `d = φ - μ` and prior moments `C_a = E[d^a cos Mφ]`,
/// `S_a = E[d^a sin Mφ]`, outcome `o` (sign `s = ±1`) has evidence
/// `z = (1 + s c_0)/2` and posterior moments `E[d] = s c_1 / 2z`,
/// `E[d²] = (v + s c_2)/2z`, where `c_a = C_a cos Mθ + S_a sin Mθ`.
/// One pass over the grid serves every θ.
fn best_offset(p: &PosteriorGrid, reps: f64, n: usize) -> (f64, f64) {
    let mean = p.mean();
    let var = p.variance();
    let mut cos_m = [0.0; 3];
    let mut sin_m = [0.0; 3];
    for (i, &w) in p.masses().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let x = p.point(i);
        let d = x - mean;
        let (s, c) = (reps * x).sin_cos();
        let powers = [w, w * d, w * d * d];
        for a in 0..3 {
            cos_m[a] += powers[a] * c;
            sin_m[a] += powers[a] * s;
        }
    }
    let mut best = (f64::INFINITY, mean);
    for k in 0..n {
        let theta = mean + k as f64 * PI / (n as f64 * reps);
        let (st, ct) = (reps * theta).sin_cos();
        let c: Vec<f64> = (0..3).map(|a| cos_m[a] * ct + sin_m[a] * st).collect();
        let mut risk = 0.0;
        for sign in [1.0, -1.0] {
            let z = 0.5 * (1.0 + sign * c[0]);
            if z <= 1e-300 {
                continue;
            }
            let m1 = 0.5 * sign * c[1] / z;
            let m2 = 0.5 * (var + sign * c[2]) / z;
            risk += z * (m2 - m1 * m1);
        }
        if risk < best.0 {
            best = (risk, theta);
        }
    }
    best
}
