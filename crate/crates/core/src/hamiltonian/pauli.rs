use std::fmt;

use crate::error::{invalid, Result};

/// Non-identity single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of Pauli factors, stored sorted by qubit index.
///
/// Qubits that do not appear carry the identity, so the empty string is the
/// identity operator. The derived ordering compares the `(index, letter)`
/// sequences lexicographically, which is the canonical term order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<(usize, Pauli)>);

impl PauliString {
    pub fn identity() -> Self {
        PauliString(Vec::new())
    }

    /// Builds a string from `(qubit, factor)` pairs in any order.
    /// A qubit may appear at most once.
    pub fn new<I>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Pauli)>,
    {
        let mut factors: Vec<_> = factors.into_iter().collect();
        factors.sort_by_key(|&(q, _)| q);
        if let Some(w) = factors.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(invalid(format!("duplicate qubit index {}", w[0].0)));
        }
        Ok(PauliString(factors))
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&(q, _)| q)
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        self.0
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .ok()
            .map(|i| self.0[i].1)
    }

    /// Bit masks describing the action on computational basis states:
    /// `P|b> = i^{n_y} (-1)^{popcount(b & z_mask)} |b ^ x_mask>`.
    pub(crate) fn masks(&self) -> (usize, usize, u32) {
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut n_y = 0u32;
        for &(q, p) in &self.0 {
            match p {
                Pauli::X => x_mask |= 1 << q,
                Pauli::Y => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => z_mask |= 1 << q,
            }
        }
        (x_mask, z_mask, n_y)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (q, p)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}{}", p.as_char(), q)?;
        }
        f.write_str("]")
    }
}

/// A real coefficient times a Pauli string.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    coefficient: f64,
    string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(invalid(format!("non-finite coefficient {coefficient}")));
        }
        Ok(PauliTerm { coefficient, string })
    }

    /// Convenience constructor from `(qubit, factor)` pairs.
    pub fn from_factors<I>(coefficient: f64, factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Pauli)>,
    {
        PauliTerm::new(coefficient, PauliString::new(factors)?)
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn string(&self) -> &PauliString {
        &self.string
    }

    /// Operator norm. Every non-identity Pauli string is unitary and
    /// Hermitian, so this is just the coefficient magnitude.
    pub fn norm(&self) -> f64 {
        self.coefficient.abs()
    }

    pub(crate) fn with_coefficient(&self, coefficient: f64) -> Self {
        PauliTerm {
            coefficient,
            string: self.string.clone(),
        }
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coefficient, self.string)
    }
}
