//! Ensemble statistics of sampled Hamiltonians over a (ρ, N) grid.

use rayon::prelude::*;
use rhpe_core::hamiltonian::Hamiltonian;
use rhpe_core::rng::derive_seed;
use rhpe_core::sampler::{draw_sampled_hamiltonian, importance_weights_with_floor, ImportanceDistribution};
use rhpe_core::solver::Eigensystem;

use crate::config::SweepSection;
use crate::error::CliError;
use crate::inputs::{load_hamiltonian, load_surrogate, surrogate_values};
use crate::output::{float, Table};

pub const SWEEP_COLUMNS: [&str; 6] = [
    "rho",
    "n_samples",
    "mean_shift",
    "shift_variance",
    "mean_unique_terms",
    "mean_qubit_support",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub n_samples: u64,
    /// Mean of `E_0^samp - E_0`.
    pub mean_shift: f64,
    /// Population variance of `E_0^samp`.
    pub shift_variance: f64,
    pub mean_unique_terms: f64,
    pub mean_qubit_support: f64,
}

struct Member {
    energy: f64,
    unique_terms: usize,
    support: usize,
}

fn draw_member(dist: &ImportanceDistribution, h: &Hamiltonian, n: u64, seed: u64) -> Result<Member, CliError> {
    let sampled = draw_sampled_hamiltonian(dist, h, n, seed)?;
    let energy = Eigensystem::new(sampled.hamiltonian())?.ground_energy();
    Ok(Member {
        energy,
        unique_terms: sampled.unique_terms(),
        support: sampled.hamiltonian().support().len(),
    })
}

/// Member `i` of cell `(a, b)` uses `derive_seed(seed, [a, b, i])`, where
/// `a` indexes `rho_values` and `b` indexes `sample_counts`.
pub fn run_sweep(cfg: &SweepSection, seed: u64) -> Result<Vec<SweepRow>, CliError> {
    let h = load_hamiltonian(&cfg.hamiltonian)?;
    let surrogate = load_surrogate(&cfg.surrogate, &h)?;
    sweep_hamiltonian(&h, &surrogate, cfg, seed)
}

pub fn sweep_hamiltonian(
    h: &Hamiltonian,
    surrogate: &rhpe_core::phase::Surrogate,
    cfg: &SweepSection,
    seed: u64,
) -> Result<Vec<SweepRow>, CliError> {
    let eig = Eigensystem::new(h)?;
    let e0 = eig.ground_energy();
    let values = surrogate_values(surrogate, h, &eig)?;
    let floor = (cfg.floor_fraction > 0.0).then_some(cfg.floor_fraction);
    let mut rows = Vec::new();
    for (a, &rho) in cfg.rho_values.iter().enumerate() {
        let dist = importance_weights_with_floor(h, &values, rho, floor)?;
        for (b, &n) in cfg.sample_counts.iter().enumerate() {
            let members: Vec<Member> = (0..cfg.ensemble_size)
                .into_par_iter()
                .map(|i| draw_member(&dist, h, n, derive_seed(seed, &[a as u64, b as u64, i as u64])))
                .collect::<Result<_, _>>()?;
            rows.push(aggregate(rho, n, e0, &members));
        }
    }
    Ok(rows)
}

fn aggregate(rho: f64, n: u64, e0: f64, members: &[Member]) -> SweepRow {
    let k = members.len() as f64;
    let mean_energy = members.iter().map(|m| m.energy).sum::<f64>() / k;
    let shift_variance = members
        .iter()
        .map(|m| (m.energy - mean_energy).powi(2))
        .sum::<f64>()
        / k;
    SweepRow {
        rho,
        n_samples: n,
        mean_shift: members.iter().map(|m| m.energy - e0).sum::<f64>() / k,
        shift_variance,
        mean_unique_terms: members.iter().map(|m| m.unique_terms as f64).sum::<f64>() / k,
        mean_qubit_support: members.iter().map(|m| m.support as f64).sum::<f64>() / k,
    }
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            float(r.rho),
            r.n_samples.to_string(),
            float(r.mean_shift),
            float(r.shift_variance),
            float(r.mean_unique_terms),
            float(r.mean_qubit_support),
        ]);
    }
    t
}
