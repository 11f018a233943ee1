use std::fs;
use std::path::Path;

use rhpe_core::hamiltonian::{parse_hamiltonian, Hamiltonian, DENSE_CUTOFF};
use rhpe_core::phase::Surrogate;
use rhpe_core::sampler::parse_surrogate;
use rhpe_core::solver::{expectation, Eigensystem};

use crate::config::EXACT_GROUND_STATE;
use crate::error::CliError;

/// Parses a term file and returns it in canonical order.
pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let h = parse_hamiltonian(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if h.qubit_count() > DENSE_CUTOFF {
        return Err(rhpe_core::Error::DimensionOverflow {
            qubits: h.qubit_count(),
            cutoff: DENSE_CUTOFF,
        }
        .into());
    }
    Ok(h.canonicalize())
}

/// `exact-ground-state` or a surrogate file indexed by canonical term order.
pub fn load_surrogate(spec: &str, h: &Hamiltonian) -> Result<Surrogate, CliError> {
    if spec == EXACT_GROUND_STATE {
        return Ok(Surrogate::ExactGroundState);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let values = parse_surrogate(&text, h.len())
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Surrogate::Values(values))
}

pub fn surrogate_values(s: &Surrogate, h: &Hamiltonian, eig: &Eigensystem) -> Result<Vec<f64>, CliError> {
    match s {
        Surrogate::Values(v) => Ok(v.clone()),
        Surrogate::ExactGroundState => {
            let psi = eig.ground_state();
            Ok(h.terms()
                .iter()
                .map(|t| expectation(&psi, t))
                .collect::<Result<_, _>>()?)
        }
    }
}
