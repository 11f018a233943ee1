//! Dense exact diagonalization and time evolution for desk-scale registers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{Hamiltonian, PauliTerm};

/// Gaps below this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

const NORM_TOL: f64 = 1e-10;

/// Normalized state vector over `2^n` computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState(DVector<Complex64>);

impl QuantumState {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        check_dimension(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(QuantumState(amplitudes))
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        check_dimension(amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(QuantumState(amplitudes / Complex64::new(norm, 0.0)))
    }

    pub fn basis(qubit_count: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubit_count;
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for {qubit_count} qubits")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState(v))
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn qubit_count(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn distance(&self, other: &QuantumState) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

fn check_dimension(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(invalid(format!("state length {len} is not a power of two")));
    }
    Ok(())
}

/// Full eigendecomposition of a Hamiltonian, energies ascending.
///
/// Each eigenvector has its largest-magnitude amplitude made real and
/// positive so results are reproducible.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        Self::from_matrix(h.to_dense_matrix()?)
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 1000 * dim.max(1))
            .ok_or_else(|| invalid("eigensolver failed to converge"))?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(dim, dim);
        for (col, &i) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(i).into_owned();
            fix_phase(&mut v);
            vectors.set_column(col, &v);
        }
        Ok(Eigensystem { energies, vectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvectors as columns, in the order of [`Eigensystem::energies`].
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn state(&self, level: usize) -> QuantumState {
        QuantumState(self.vectors.column(level).into_owned())
    }

    pub fn ground_state(&self) -> QuantumState {
        self.state(0)
    }

    pub fn gap(&self) -> Result<Gap> {
        gap_of(&self.energies)
    }

    pub fn slice(&self, k: usize) -> Result<SpectrumSlice> {
        if k == 0 || k > self.dimension() {
            return Err(invalid(format!("requested {k} levels of a {}-dimensional spectrum", self.dimension())));
        }
        Ok(SpectrumSlice {
            energies: self.energies[..k].to_vec(),
            states: (0..k).map(|i| self.state(i)).collect(),
        })
    }

    /// `e^{-iHt}|psi>`.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        if state.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: state.dimension(),
            });
        }
        let mut coeffs = self.vectors.ad_mul(&state.0);
        for (c, &e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        Ok(QuantumState(&self.vectors * coeffs))
    }

    /// Dense `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.dimension(),
            self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        );
        let scaled = DMatrix::from_fn(self.dimension(), self.dimension(), |r, c| {
            self.vectors[(r, c)] * phases[c]
        });
        scaled * self.vectors.adjoint()
    }
}

fn fix_phase(v: &mut DVector<Complex64>) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        // Small slack so that numerically tied entries resolve to the first index.
        if z.norm() > best_mag * (1.0 + 1e-9) {
            best = i;
            best_mag = z.norm();
        }
    }
    if best_mag > 0.0 {
        let phase = v[best].conj() / best_mag;
        *v *= phase;
    }
}

/// The lowest `k` eigenpairs of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectrumSlice {
    energies: Vec<f64>,
    states: Vec<QuantumState>,
}

impl SpectrumSlice {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

pub fn low_spectrum(h: &Hamiltonian, k: usize) -> Result<SpectrumSlice> {
    Eigensystem::new(h)?.slice(k)
}

/// Spectral gap `E_1 - E_0`, with a flag for (numerically) degenerate ground spaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub value: f64,
    pub degenerate: bool,
}

pub fn gap(s: &SpectrumSlice) -> Result<Gap> {
    gap_of(&s.energies)
}

fn gap_of(energies: &[f64]) -> Result<Gap> {
    if energies.len() < 2 {
        return Err(invalid("a gap needs at least two energies"));
    }
    let value = (energies[1] - energies[0]).max(0.0);
    Ok(Gap {
        value,
        degenerate: value < DEGENERACY_TOL,
    })
}

/// `<psi|P|psi>` for one Pauli term, evaluated without forming a matrix.
pub fn expectation(state: &QuantumState, term: &PauliTerm) -> Result<f64> {
    let dim = state.dimension();
    if let Some(q) = term.string().max_index() {
        if (1usize << q) >= dim {
            return Err(Error::DimensionMismatch {
                expected: 1 << (q + 1),
                found: dim,
            });
        }
    }
    let (x_mask, z_mask, n_y) = term.string().masks();
    let amps = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 0..dim {
        let z = amps[b ^ x_mask].conj() * amps[b];
        if (b & z_mask).count_ones() % 2 == 0 {
            acc += z;
        } else {
            acc -= z;
        }
    }
    let value = acc * Complex64::i().powu(n_y) * term.coefficient();
    Ok(value.re)
}

/// `<psi|H|psi>`.
pub fn hamiltonian_expectation(state: &QuantumState, h: &Hamiltonian) -> Result<f64> {
    if state.dimension() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            found: state.dimension(),
        });
    }
    h.terms().iter().map(|t| expectation(state, t)).sum()
}

/// Exact `e^{-iHt}|psi>` through the full eigendecomposition.
pub fn evolve(state: &QuantumState, h: &Hamiltonian, t: f64) -> Result<QuantumState> {
    if state.dimension() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            found: state.dimension(),
        });
    }
    Eigensystem::new(h)?.evolve(state, t)
}

/// `||A - B||`, the largest eigenvalue magnitude of the Hermitian difference.
pub fn operator_norm_diff(a: &Hamiltonian, b: &Hamiltonian) -> Result<f64> {
    let diff = a.difference(b)?;
    if diff.is_empty() {
        return Ok(0.0);
    }
    let m = diff.to_dense_matrix()?;
    let eig = m.symmetric_eigenvalues();
    Ok(eig.iter().fold(0.0, |acc: f64, &e| acc.max(e.abs())))
}
