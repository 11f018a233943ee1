use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result};
use crate::hamiltonian::Hamiltonian;
use crate::phase::likelihood;
use crate::rng::derive_seed;
use crate::sampler::uniform_subsample;
use crate::solver::{hamiltonian_expectation, Eigensystem, QuantumState};

/// Experiment used to compare likelihoods: `M` repetitions of time `t`.
/// The offset sits a quarter fringe from the reference phase, where the
/// likelihood is most sensitive to an energy error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodProbe {
    pub reps: f64,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub m: u64,
    pub rms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln rms` against `ln m`; `None` when fewer
    /// than two rows have a positive error.
    pub slope: Option<f64>,
}

/// RMS over `trials` uniform subsamples `H_i` of `|P(0|E t) - P(0|E_i t)|`,
/// where `E = <ψ|H|ψ>` and `E_i` is the ground energy of `H_i`.
///
/// Trial `i` at position `a` of `m_values` uses `derive_seed(seed, [a, i])`.
pub fn subsample_error_scaling(
    h: &Hamiltonian,
    psi: &QuantumState,
    m_values: &[u64],
    trials: usize,
    probe: LikelihoodProbe,
    seed: u64,
) -> Result<ScalingReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let e = hamiltonian_expectation(psi, h)?;
    let phi = e * probe.time;
    let theta = phi + FRAC_PI_2 / probe.reps;
    let p_ref = likelihood(0, phi, probe.reps, theta);

    let mut rows = Vec::with_capacity(m_values.len());
    for (a, &m) in m_values.iter().enumerate() {
        let mut sum_sq = 0.0;
        for i in 0..trials {
            let sub = uniform_subsample(h, m, derive_seed(seed, &[a as u64, i as u64]))?;
            let e_i = Eigensystem::new(sub.hamiltonian())?.ground_energy();
            let d = likelihood(0, e_i * probe.time, probe.reps, theta) - p_ref;
            sum_sq += d * d;
        }
        rows.push(ScalingRow {
            m,
            rms: (sum_sq / trials as f64).sqrt(),
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.rms > 0.0)
        .map(|r| ((r.m as f64).ln(), r.rms.ln()))
        .collect();
    Ok(ScalingReport {
        rows,
        slope: fit_slope(&points),
    })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Pauli, PauliTerm};

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 4.0, 16.0]
            .iter()
            .map(|m| (m.ln(), (3.0 * m.powf(-0.5)).ln()))
            .collect();
        assert!((fit_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(fit_slope(&pts[..1]), None);
    }

    #[test]
    fn single_term_has_no_error() {
        let h = Hamiltonian::new(vec![PauliTerm::from_factors(0.8, [(0, Pauli::Z)]).unwrap()], 1).unwrap();
        let psi = QuantumState::basis(1, 1).unwrap();
        let probe = LikelihoodProbe { reps: 1.0, time: 0.5 };
        let r = subsample_error_scaling(&h, &psi, &[1, 5, 50], 10, probe, 4).unwrap();
        assert!(r.rows.iter().all(|row| row.rms == 0.0));
        assert_eq!(r.slope, None);
    }
}
