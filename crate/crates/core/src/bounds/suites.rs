//! Random instances for the bound checkers. Each case is a pure function
//! of its seed, so callers may evaluate cases in any order or in parallel.

use std::f64::consts::PI;

use rand::Rng;

use super::{
    sequence_phase_deviation, BoundReport, DeviationReport, LikelihoodInstance, LikelihoodReports,
    PerturbedExperiment, SequenceStats,
};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{Hamiltonian, Pauli, PauliTerm};
use crate::phase::DEFAULT_GRID_POINTS;
use crate::rng::{derive_seed, rng_from_seed, SimRng};
use crate::solver::{operator_norm_diff, Eigensystem};

const MAX_ATTEMPTS: u64 = 64;

/// Random Hamiltonian with `terms` Pauli strings on `qubits` qubits and
/// coefficients uniform in `[-1, 1)`; each factor is non-identity with
/// probability 1/2.
pub fn random_hamiltonian(qubits: usize, terms: usize, rng: &mut SimRng) -> Result<Hamiltonian> {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut factors = Vec::new();
        for q in 0..qubits {
            let pick: u8 = rng.random_range(0..6);
            let p = match pick {
                0 => Pauli::X,
                1 => Pauli::Y,
                2 => Pauli::Z,
                _ => continue,
            };
            factors.push((q, p));
        }
        out.push(PauliTerm::from_factors(rng.random_range(-1.0..1.0), factors)?);
    }
    Ok(Hamiltonian::new(out, qubits)?.canonicalize())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrictSettings {
    pub grid_points: usize,
    pub max_experiments: usize,
    pub max_reps: f64,
}

impl Default for StrictSettings {
    fn default() -> Self {
        StrictSettings {
            grid_points: 10 * DEFAULT_GRID_POINTS,
            max_experiments: 4,
            max_reps: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrictCase {
    pub seed: u64,
    pub instance: LikelihoodInstance,
    pub reports: LikelihoodReports,
}

impl StrictCase {
    pub fn violations(&self) -> usize {
        self.reports.all().filter(|r| !r.satisfied).count()
    }
}

/// A likelihood instance meeting the hypotheses of every exact posterior
/// bound. Phase shifts are shrunk until all hypotheses hold.
pub fn strict_case(seed: u64, settings: &StrictSettings) -> Result<StrictCase> {
    if settings.max_experiments == 0 || settings.grid_points == 0 {
        return Err(invalid("strict cases need experiments and grid points"));
    }
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(1..=settings.max_experiments);
    let amp: f64 = rng.random_range(0.0..0.9);
    let centre: f64 = rng.random_range(-PI..PI);
    let g = settings.grid_points;
    let prior: Vec<f64> = (0..g)
        .map(|i| {
            let phi = -PI + (i as f64 + 0.5) * 2.0 * PI / g as f64;
            1.0 + amp * (phi - centre).cos()
        })
        .collect();
    let mut experiments: Vec<PerturbedExperiment> = (0..n)
        .map(|_| PerturbedExperiment {
            reps: rng.random_range(0.5..settings.max_reps),
            offset: rng.random_range(-PI..PI),
            outcome: rng.random_range(0..2),
            visibility: rng.random_range(0.5..0.95),
            shift: rng.random_range(-1.0..1.0),
        })
        .collect();
    // |ε_j|/P_j <= v M |Δφ| / (1 - v); scale so the sum stays below `c`.
    let c: f64 = 10f64.powf(rng.random_range(-4.0..-0.7));
    let cap = experiments
        .iter()
        .map(|e| (1.0 - e.visibility) / (e.visibility * e.reps))
        .fold(f64::INFINITY, f64::min)
        * c
        / n as f64;
    for e in &mut experiments {
        e.shift *= cap;
    }
    let mut instance = LikelihoodInstance { prior, experiments };
    for _ in 0..MAX_ATTEMPTS {
        let reports = instance.evaluate()?;
        if reports.all().count() == 5 {
            return Ok(StrictCase {
                seed,
                instance,
                reports,
            });
        }
        for e in &mut instance.experiments {
            e.shift *= 0.5;
        }
    }
    Err(invalid(format!("strict case {seed} never met every hypothesis")))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeSettings {
    pub min_qubits: usize,
    pub max_qubits: usize,
    pub terms: usize,
    pub min_length: usize,
    pub max_length: usize,
    /// Upper end of the `λ/γ` range; targets are drawn uniformly below it.
    pub max_ratio: f64,
    pub min_gap: f64,
}

impl Default for PerturbativeSettings {
    fn default() -> Self {
        PerturbativeSettings {
            min_qubits: 2,
            max_qubits: 3,
            terms: 6,
            min_length: 2,
            max_length: 6,
            max_ratio: 0.05,
            min_gap: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbativeCase {
    pub seed: u64,
    pub qubits: usize,
    pub dt: f64,
    pub stats: SequenceStats,
    /// `1 - Π|<ψ_0^{k+1}|ψ_0^k>|²` against `1 - (1 - λ²/γ²)^{M-1}`.
    pub overlap: BoundReport,
    pub deviation: DeviationReport,
}

impl PerturbativeCase {
    pub fn ratio(&self) -> f64 {
        self.stats.lambda / self.stats.gamma
    }
}

fn perturbed_sequence(base: &Hamiltonian, perturbations: &[Hamiltonian], scale: f64) -> Vec<Hamiltonian> {
    perturbations
        .iter()
        .map(|v| {
            let mut terms = base.terms().to_vec();
            terms.extend(v.scaled(scale).terms().iter().cloned());
            Hamiltonian::new(terms, base.qubit_count())
                .expect("same register")
                .canonicalize()
        })
        .collect()
}

fn stats_for(seq: &[Hamiltonian]) -> Result<SequenceStats> {
    super::sequence_stats(seq)
}

fn try_perturbative(seed: u64, settings: &PerturbativeSettings, rng: &mut SimRng) -> Result<PerturbativeCase> {
    let qubits = rng.random_range(settings.min_qubits..=settings.max_qubits);
    let length = rng.random_range(settings.min_length..=settings.max_length);
    let target: f64 = rng.random_range(0.0..1.0) * settings.max_ratio;
    let dt: f64 = rng.random_range(0.1..1.0);

    let base = random_hamiltonian(qubits, settings.terms, rng)?;
    let g = Eigensystem::new(&base)?.gap()?;
    if g.value < settings.min_gap {
        return Err(Error::Degenerate { gap: g.value });
    }
    let mut perturbations = Vec::with_capacity(length);
    for _ in 0..length {
        let v = random_hamiltonian(qubits, settings.terms, rng)?;
        let norm = operator_norm_diff(&v, &Hamiltonian::zero(qubits))?;
        if norm == 0.0 {
            return Err(invalid("zero perturbation"));
        }
        perturbations.push(v.scaled(1.0 / norm));
    }

    // λ is linear in the scale and γ nearly constant, so a few rescalings
    // land close to the target ratio.
    let mut scale = 0.01 * g.value;
    let mut seq = perturbed_sequence(&base, &perturbations, scale);
    let mut stats = stats_for(&seq)?;
    for _ in 0..4 {
        let ratio = stats.lambda / stats.gamma;
        if ratio == 0.0 {
            break;
        }
        scale *= target / ratio;
        seq = perturbed_sequence(&base, &perturbations, scale);
        stats = stats_for(&seq)?;
    }
    while stats.lambda / stats.gamma > settings.max_ratio {
        scale *= 0.98;
        seq = perturbed_sequence(&base, &perturbations, scale);
        stats = stats_for(&seq)?;
    }

    let success = super::overlap_success_probability(&seq)?;
    let r2 = (stats.lambda / stats.gamma).powi(2);
    let failure_bound = 1.0 - (1.0 - r2).powi(stats.m_count as i32 - 1);
    let mut overlap = BoundReport::new("ground-state overlap", failure_bound, 1.0 - success);
    overlap.satisfied = overlap.observed <= overlap.bound + 1e-9;
    let deviation = sequence_phase_deviation(&seq, dt)?;
    Ok(PerturbativeCase {
        seed,
        qubits,
        dt,
        stats,
        overlap,
        deviation,
    })
}

/// A random 2 to 3 qubit sequence with `λ/γ` below `settings.max_ratio`.
/// Draws with a small base gap or an ambiguous ground pairing are
/// replaced by fresh draws from `derive_seed(seed, [attempt])`.
pub fn perturbative_case(seed: u64, settings: &PerturbativeSettings) -> Result<PerturbativeCase> {
    if settings.min_qubits == 0 || settings.min_qubits > settings.max_qubits {
        return Err(invalid("invalid qubit range"));
    }
    if settings.min_length < 2 || settings.min_length > settings.max_length {
        return Err(invalid("sequence lengths must be at least 2"));
    }
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[attempt]));
        match try_perturbative(seed, settings, &mut rng) {
            Ok(c) => return Ok(c),
            Err(e @ (Error::Degenerate { .. } | Error::AmbiguousPairing { .. } | Error::VacuousBound(_))) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| invalid("no admissible instance")))
}
