//! wasm-bindgen entry points for `www/index.html`. Each export takes plain
//! numbers (seeds and draw counts as `u32` to avoid BigInt) and returns a
//! JSON string; errors come back as a JS string.

use rhpe_core::bounds::{eigenphase_shift_bound, failure_threshold, SequenceStats};
use rhpe_core::hamiltonian::{transverse_field_ising, Hamiltonian};
use rhpe_core::phase::{run_session, DesignStrategy, PosteriorGrid, SessionConfig};
use rhpe_core::rng::derive_seed;
use rhpe_core::sampler::{draw_sampled_hamiltonian, importance_weights};
use rhpe_core::solver::{expectation, Eigensystem};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_QUBITS: usize = 6;
const PLOT_BINS: usize = 256;
const GRID_POINTS: usize = 1 << 12;

#[derive(Serialize, Debug)]
pub struct PosteriorFrame {
    pub reps: f64,
    pub offset: f64,
    pub outcome: u8,
    pub mean: f64,
    pub std_dev: f64,
    pub density: Vec<f64>,
}

#[derive(Serialize, Debug)]
pub struct PosteriorEvolution {
    pub true_phase: f64,
    pub time_per_rep: f64,
    pub frames: Vec<PosteriorFrame>,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct SweepCell {
    pub mean_shift: f64,
    pub shift_variance: f64,
    pub mean_unique_terms: f64,
    pub mean_qubit_support: f64,
    pub term_count: usize,
}

#[derive(Serialize, Debug, PartialEq)]
pub struct BoundPoint {
    /// `None` when `γ <= 2λ`.
    pub bound: Option<f64>,
    pub ratio: f64,
    pub threshold: f64,
    pub condition: bool,
}

fn chain(qubits: usize, field: f64) -> Result<Hamiltonian, String> {
    if !(2..=MAX_QUBITS).contains(&qubits) {
        return Err(format!("qubits must lie in 2..={MAX_QUBITS}"));
    }
    Ok(transverse_field_ising(qubits, 1.0, field))
}

fn coarse(p: &PosteriorGrid) -> Vec<f64> {
    let per = p.len() / PLOT_BINS;
    p.masses().chunks(per).map(|c| c.iter().sum()).collect()
}

/// Posterior after each experiment of one exact session, binned to 256 cells.
pub fn posterior_evolution(qubits: usize, field: f64, experiments: usize, seed: u64) -> Result<PosteriorEvolution, String> {
    let h = chain(qubits, field)?;
    let config = SessionConfig {
        experiments,
        grid_points: GRID_POINTS,
        design: DesignStrategy { max_reps: 256.0, ..DesignStrategy::default() },
        ..SessionConfig::default()
    };
    let trace = run_session(&h, &config, seed).map_err(|e| e.to_string())?;
    let mut posterior = PosteriorGrid::uniform(GRID_POINTS).map_err(|e| e.to_string())?;
    let mut frames = Vec::with_capacity(trace.records.len());
    for r in &trace.records {
        posterior = rhpe_core::phase::bayes_update(&posterior, r).0;
        frames.push(PosteriorFrame {
            reps: r.setting.reps,
            offset: r.setting.offset,
            outcome: r.outcome,
            mean: posterior.mean(),
            std_dev: posterior.std_dev(),
            density: coarse(&posterior),
        });
    }
    Ok(PosteriorEvolution {
        true_phase: trace.exact_ground_energy * trace.time_per_rep,
        time_per_rep: trace.time_per_rep,
        frames,
    })
}

/// Ensemble statistics of `ensemble` sampled chains with `n` draws each.
pub fn sweep_cell(qubits: usize, field: f64, rho: f64, n: u64, ensemble: usize, seed: u64) -> Result<SweepCell, String> {
    let h = chain(qubits, field)?;
    if ensemble == 0 {
        return Err("ensemble must be at least 1".into());
    }
    let e = |x: rhpe_core::Error| x.to_string();
    let eig = Eigensystem::new(&h).map_err(e)?;
    let psi = eig.ground_state();
    let values = h.terms().iter().map(|t| expectation(&psi, t)).collect::<Result<Vec<_>, _>>().map_err(e)?;
    let dist = importance_weights(&h, &values, rho).map_err(e)?;
    let (mut energies, mut unique, mut support) = (Vec::new(), 0.0, 0.0);
    for i in 0..ensemble {
        let s = draw_sampled_hamiltonian(&dist, &h, n, derive_seed(seed, &[i as u64])).map_err(e)?;
        energies.push(Eigensystem::new(s.hamiltonian()).map_err(e)?.ground_energy());
        unique += s.unique_terms() as f64;
        support += s.hamiltonian().support().len() as f64;
    }
    let k = ensemble as f64;
    let mean = energies.iter().sum::<f64>() / k;
    Ok(SweepCell {
        mean_shift: mean - eig.ground_energy(),
        shift_variance: energies.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k,
        mean_unique_terms: unique / k,
        mean_qubit_support: support / k,
        term_count: h.len(),
    })
}

/// `2Mλ²/(γ-2λ)²` and the failure condition at probability `epsilon`.
pub fn bound_point(gamma: f64, lambda: f64, m: usize, epsilon: f64) -> Result<BoundPoint, String> {
    if !(gamma > 0.0 && lambda >= 0.0) {
        return Err("need gamma > 0 and lambda >= 0".into());
    }
    let stats = SequenceStats { gamma, lambda, m_count: m };
    let threshold = failure_threshold(m.saturating_sub(1).max(1), epsilon).map_err(|e| e.to_string())?;
    Ok(BoundPoint {
        bound: eigenphase_shift_bound(&stats).ok(),
        ratio: lambda / gamma,
        threshold,
        condition: lambda == 0.0 || lambda / gamma < threshold,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = posteriorEvolution)]
pub fn posterior_evolution_js(qubits: usize, field: f64, experiments: usize, seed: u32) -> Result<String, JsValue> {
    to_js(posterior_evolution(qubits, field, experiments, seed.into()))
}

#[wasm_bindgen(js_name = sweepCell)]
pub fn sweep_cell_js(qubits: usize, field: f64, rho: f64, n: u32, ensemble: usize, seed: u32) -> Result<String, JsValue> {
    to_js(sweep_cell(qubits, field, rho, n.into(), ensemble, seed.into()))
}

#[wasm_bindgen(js_name = boundPoint)]
pub fn bound_point_js(gamma: f64, lambda: f64, m: usize, epsilon: f64) -> Result<String, JsValue> {
    to_js(bound_point(gamma, lambda, m, epsilon))
}
