use super::{Hamiltonian, Pauli, PauliTerm};

/// Open-boundary transverse-field Ising chain
/// `H = -J Σ Z_i Z_{i+1} - h Σ X_i`.
pub fn transverse_field_ising(n: usize, coupling: f64, field: f64) -> Hamiltonian {
    let mut terms = Vec::with_capacity(2 * n);
    for i in 0..n.saturating_sub(1) {
        terms.push(PauliTerm::from_factors(-coupling, [(i, Pauli::Z), (i + 1, Pauli::Z)]).unwrap());
    }
    for i in 0..n {
        terms.push(PauliTerm::from_factors(-field, [(i, Pauli::X)]).unwrap());
    }
    Hamiltonian::new(terms, n).unwrap().canonicalize()
}

/// A TFIM chain on qubits `0..n` plus one extra qubit `n` attached through
/// a weak `Z_{n-1} Z_n` bond and a weak field.
pub fn decoupled_ancilla(n: usize, coupling: f64, field: f64, weak: f64) -> Hamiltonian {
    let chain = transverse_field_ising(n, coupling, field);
    let mut terms = chain.terms().to_vec();
    terms.push(PauliTerm::from_factors(-weak, [(n - 1, Pauli::Z), (n, Pauli::Z)]).unwrap());
    terms.push(PauliTerm::from_factors(-weak, [(n, Pauli::X)]).unwrap());
    Hamiltonian::new(terms, n + 1).unwrap().canonicalize()
}
