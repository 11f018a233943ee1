//! Hamiltonians given as real-weighted sums of Pauli strings.
//!
//! Qubit 0 is the least-significant bit of a computational basis index
//! throughout the crate.

mod models;
mod parse;
mod pauli;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub use models::{decoupled_ancilla, transverse_field_ising};
pub use parse::parse_hamiltonian;
pub use pauli::{Pauli, PauliString, PauliTerm};

/// Largest register realized as a dense matrix.
pub const DENSE_CUTOFF: usize = 14;

/// Qubits touched by a non-identity factor of some term.
pub type SupportSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    terms: Vec<PauliTerm>,
    qubit_count: usize,
}

impl Hamiltonian {
    /// Wraps a term list without merging duplicates; see [`Hamiltonian::canonicalize`].
    pub fn new(terms: Vec<PauliTerm>, qubit_count: usize) -> Result<Self> {
        for t in &terms {
            if let Some(q) = t.string().max_index() {
                if q >= qubit_count {
                    return Err(invalid(format!(
                        "term {t} acts on qubit {q} but the register has {qubit_count} qubits"
                    )));
                }
            }
        }
        Ok(Hamiltonian { terms, qubit_count })
    }

    /// Empty (zero) Hamiltonian on `qubit_count` qubits.
    pub fn zero(qubit_count: usize) -> Self {
        Hamiltonian {
            terms: Vec::new(),
            qubit_count,
        }
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dimension(&self) -> usize {
        1usize << self.qubit_count
    }

    /// Sum of coefficient magnitudes, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(PauliTerm::norm).sum()
    }

    pub fn support(&self) -> SupportSet {
        self.terms
            .iter()
            .flat_map(|t| t.string().factors().iter().map(|&(q, _)| q))
            .collect()
    }

    /// Merges terms with equal Pauli strings, drops exact zeros and sorts
    /// into canonical order.
    pub fn canonicalize(&self) -> Hamiltonian {
        let mut sorted: Vec<&PauliTerm> = self.terms.iter().collect();
        sorted.sort_by(|a, b| a.string().cmp(b.string()));
        let mut terms: Vec<PauliTerm> = Vec::with_capacity(sorted.len());
        for t in sorted {
            match terms.last_mut() {
                Some(last) if last.string() == t.string() => {
                    *last = last.with_coefficient(last.coefficient() + t.coefficient());
                }
                _ => terms.push(t.clone()),
            }
        }
        terms.retain(|t| t.coefficient() != 0.0);
        Hamiltonian {
            terms,
            qubit_count: self.qubit_count,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.terms
            .windows(2)
            .all(|w| w[0].string() < w[1].string())
            && self.terms.iter().all(|t| t.coefficient() != 0.0)
    }

    /// Canonical form of `self - other`.
    pub fn difference(&self, other: &Hamiltonian) -> Result<Hamiltonian> {
        if self.qubit_count != other.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                found: other.qubit_count,
            });
        }
        let terms = self
            .terms
            .iter()
            .cloned()
            .chain(other.terms.iter().map(|t| t.with_coefficient(-t.coefficient())))
            .collect();
        Ok(Hamiltonian {
            terms,
            qubit_count: self.qubit_count,
        }
        .canonicalize())
    }

    pub fn scaled(&self, factor: f64) -> Hamiltonian {
        Hamiltonian {
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coefficient(t.coefficient() * factor))
                .collect(),
            qubit_count: self.qubit_count,
        }
    }

    pub fn to_dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_matrix_with_cutoff(DENSE_CUTOFF)
    }

    pub fn to_dense_matrix_with_cutoff(&self, cutoff: usize) -> Result<DMatrix<Complex64>> {
        if self.qubit_count > cutoff {
            return Err(Error::DimensionOverflow {
                qubits: self.qubit_count,
                cutoff,
            });
        }
        let dim = self.dimension();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            let (x_mask, z_mask, n_y) = t.string().masks();
            let base = Complex64::new(t.coefficient(), 0.0) * Complex64::i().powu(n_y);
            for b in 0..dim {
                let amp = if (b & z_mask).count_ones() % 2 == 0 {
                    base
                } else {
                    -base
                };
                m[(b ^ x_mask, b)] += amp;
            }
        }
        Ok(m)
    }

    /// Text form accepted by [`parse_hamiltonian`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits: {}", self.qubit_count)?;
        for t in &self.terms {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}
