use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use super::ExperimentSetting;
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::rng::rng_from_seed;
use crate::solver::{Eigensystem, QuantumState};

/// Ancilla-conditioned system amplitudes at the end of the interferometer,
/// before measurement. `branches[o]` is the (unnormalized) system state
/// paired with ancilla outcome `o`.
#[derive(Clone, Debug)]
pub struct Interference {
    pub branches: [DVector<Complex64>; 2],
}

impl Interference {
    pub fn probability(&self, outcome: u8) -> f64 {
        self.branches[outcome as usize].norm_squared()
    }
}

/// Runs the interferometer up to (but excluding) the ancilla measurement.
///
/// The ancilla starts in `(|0> + |1>)/√2`, receives `R_z(Mθ)`, controls the
/// product `Π_k e^{-i H_k Δt}` (first segment applied first) and is rotated
/// back by a Hadamard.
pub fn interfere(
    state: &QuantumState,
    segments: &[&Eigensystem],
    setting: &ExperimentSetting,
) -> Result<Interference> {
    if segments.len() != setting.segments() {
        return Err(invalid(format!(
            "{} segments supplied for {} repetitions (expected {})",
            segments.len(),
            setting.reps,
            setting.segments()
        )));
    }
    let dt = setting.segment_time();
    let mut evolved = state.clone();
    let mut k = 0;
    while k < segments.len() {
        // Consecutive repeats of one Hamiltonian collapse into a single evolution.
        let mut run = 1;
        while k + run < segments.len() && std::ptr::eq(segments[k], segments[k + run]) {
            run += 1;
        }
        if segments[k].dimension() != state.dimension() {
            return Err(Error::DimensionMismatch {
                expected: state.dimension(),
                found: segments[k].dimension(),
            });
        }
        evolved = segments[k].evolve(&evolved, dt * run as f64)?;
        k += run;
    }

    let half_angle = 0.5 * setting.reps * setting.offset;
    let a0 = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -half_angle);
    let a1 = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, half_angle);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let idle = state.amplitudes() * a0;
    let driven = evolved.amplitudes() * a1;
    Ok(Interference {
        branches: [(&idle + &driven) * h, (&idle - &driven) * h],
    })
}

/// Samples the ancilla outcome and returns it with the normalized
/// post-measurement system state.
pub fn simulate_outcome_with(
    state: &QuantumState,
    segments: &[&Eigensystem],
    setting: &ExperimentSetting,
    seed: u64,
) -> Result<(u8, QuantumState)> {
    let out = interfere(state, segments, setting)?;
    let p0 = out.probability(0);
    let u: f64 = rng_from_seed(seed).random();
    let outcome = if u < p0 { 0 } else { 1 };
    let [b0, b1] = out.branches;
    let branch = if outcome == 0 { b0 } else { b1 };
    Ok((outcome, QuantumState::normalized(branch)?))
}

/// As [`simulate_outcome_with`], diagonalizing each segment Hamiltonian.
pub fn simulate_outcome(
    state: &QuantumState,
    segments: &[Hamiltonian],
    setting: &ExperimentSetting,
    seed: u64,
) -> Result<(u8, QuantumState)> {
    if let Some(h) = segments.iter().find(|h| h.qubit_count() != state.qubit_count()) {
        return Err(Error::DimensionMismatch {
            expected: state.qubit_count(),
            found: h.qubit_count(),
        });
    }
    let systems = segments
        .iter()
        .map(Eigensystem::new)
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Eigensystem> = systems.iter().collect();
    simulate_outcome_with(state, &refs, setting, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::transverse_field_ising;
    use crate::phase::likelihood;

    #[test]
    fn eigenstate_matches_likelihood() {
        let h = transverse_field_ising(2, 1.0, 0.5);
        let eig = Eigensystem::new(&h).unwrap();
        let psi = eig.ground_state();
        let e0 = eig.ground_energy();
        let t = 0.3;
        for &(m, theta) in &[(1.0, 0.0), (3.0, -0.4), (7.0, 1.2), (2.5, 0.1)] {
            let setting = ExperimentSetting::new(m, theta, t).unwrap();
            let segs = vec![&eig; setting.segments()];
            let out = interfere(&psi, &segs, &setting).unwrap();
            let expected = likelihood(0, e0 * t, m, theta);
            assert!((out.probability(0) - expected).abs() < 1e-9);
            assert!((out.probability(0) + out.probability(1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matched_offset_forces_zero() {
        let h = transverse_field_ising(2, 1.0, 0.5);
        let eig = Eigensystem::new(&h).unwrap();
        let t = 0.25;
        let setting = ExperimentSetting::new(3.0, eig.ground_energy() * t, t).unwrap();
        let segs = vec![&eig; 3];
        for seed in 0..20 {
            let (o, post) =
                simulate_outcome_with(&eig.ground_state(), &segs, &setting, seed).unwrap();
            assert_eq!(o, 0);
            // Projection leaves an eigenstate unchanged up to a global phase.
            assert!((post.inner(&eig.ground_state()).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn segment_count_checked() {
        let h = transverse_field_ising(2, 1.0, 0.5);
        let psi = QuantumState::basis(2, 0).unwrap();
        let setting = ExperimentSetting::new(2.0, 0.0, 0.1).unwrap();
        assert!(simulate_outcome(&psi, &[h.clone()], &setting, 0).is_err());
        let other = transverse_field_ising(3, 1.0, 0.5);
        assert!(simulate_outcome(&psi, &[h, other], &setting, 0).is_err());
    }
}
