use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{eigenphase_shift_bound, BoundReport};
use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::solver::{operator_norm_diff, Eigensystem};

/// Two overlaps closer than this make the ground-state pairing ambiguous.
const PAIRING_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceStats {
    /// Smallest ground gap over the sequence.
    pub gamma: f64,
    /// Largest `||H_k - H_{k-1}||`.
    pub lambda: f64,
    /// Sequence length `M`.
    pub m_count: usize,
}

/// Deviation of the true from the adiabatic evolution, with diagnostics.
///
/// `report.observed` is the operator norm of the difference; `squared` is
/// its square, the quantity that grows at second order in `λ/γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    pub report: BoundReport,
    pub stats: SequenceStats,
    pub squared: f64,
}

fn eigensystems(seq: &[Hamiltonian]) -> Result<Vec<Eigensystem>> {
    seq.iter().map(Eigensystem::new).collect()
}

fn stats_of(seq: &[Hamiltonian], systems: &[Eigensystem]) -> Result<SequenceStats> {
    let mut gamma = f64::INFINITY;
    for eig in systems {
        let g = eig.gap()?;
        if g.degenerate {
            return Err(Error::Degenerate { gap: g.value });
        }
        gamma = gamma.min(g.value);
    }
    let mut lambda: f64 = 0.0;
    for pair in seq.windows(2) {
        lambda = lambda.max(operator_norm_diff(&pair[1], &pair[0])?);
    }
    Ok(SequenceStats {
        gamma,
        lambda,
        m_count: seq.len(),
    })
}

pub fn sequence_stats(seq: &[Hamiltonian]) -> Result<SequenceStats> {
    if seq.len() < 2 {
        return Err(invalid("a sequence needs at least two Hamiltonians"));
    }
    stats_of(seq, &eigensystems(seq)?)
}

/// `Π_k |<ψ_0^{k+1}|ψ_0^k>|²`.
pub fn overlap_success_probability(seq: &[Hamiltonian]) -> Result<f64> {
    let systems = eigensystems(seq)?;
    for eig in &systems {
        let g = eig.gap()?;
        if g.degenerate {
            return Err(Error::Degenerate { gap: g.value });
        }
    }
    Ok(systems
        .windows(2)
        .map(|w| w[1].ground_state().inner(&w[0].ground_state()).norm_sqr())
        .product())
}

/// Eigenbasis of `next` with columns reordered to pair with `prev` and
/// rephased so each paired overlap is real and non-negative.
fn transported_basis(prev: &DMatrix<Complex64>, next: &Eigensystem, level: usize) -> Result<DMatrix<Complex64>> {
    let dim = prev.ncols();
    let overlaps = next.vectors().ad_mul(prev);
    let mut ground: Vec<(usize, f64)> = (0..dim).map(|p| (p, overlaps[(p, 0)].norm())).collect();
    ground.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    if dim > 1 && ground[0].1 - ground[1].1 < PAIRING_TOL {
        return Err(Error::AmbiguousPairing {
            level,
            first: ground[0].1,
            second: ground[1].1,
        });
    }

    // Greedy maximum-overlap assignment, largest overlaps first.
    let mut candidates: Vec<(usize, usize, f64)> = (0..dim)
        .flat_map(|l| (0..dim).map(move |p| (l, p)))
        .map(|(l, p)| (l, p, overlaps[(p, l)].norm()))
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let mut target = vec![usize::MAX; dim];
    let mut used = vec![false; dim];
    for (l, p, _) in candidates {
        if target[l] == usize::MAX && !used[p] {
            target[l] = p;
            used[p] = true;
        }
    }

    let mut out = DMatrix::zeros(dim, dim);
    for (l, &p) in target.iter().enumerate() {
        let ov = overlaps[(p, l)];
        let phase = if ov.norm() > 0.0 {
            ov / ov.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // <phase·v_p | u_l> = conj(phase)·ov is real and non-negative.
        let col: DVector<Complex64> = next.vectors().column(p) * phase;
        out.set_column(l, &col);
    }
    Ok(out)
}

fn ground_projector(basis: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let g = basis.column(0);
    &g * g.adjoint()
}

fn adiabatic_unitary(
    from: &DMatrix<Complex64>,
    to: &DMatrix<Complex64>,
    energies: &[f64],
    dt: f64,
) -> DMatrix<Complex64> {
    let dim = from.ncols();
    let phased = DMatrix::from_fn(dim, dim, |r, c| to[(r, c)] * Complex64::from_polar(1.0, -energies[c] * dt));
    phased * from.adjoint()
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Exact `||U_M P_0^M ... U_1 P_0^1 - U_{M,ad} P_0^M ... U_{1,ad} P_0^1||`
/// over the `M - 1` transitions of `seq`, against `2 M λ²/(γ - 2λ)²` with
/// `M` the sequence length.
///
/// `U_k = e^{-i H_k dt}` and `U_{k,ad} = Σ_l |ψ_l^{k+1}><ψ_l^k| e^{-i E_l^k dt}`,
/// eigenvectors paired by maximum overlap and rephased along the chain.
pub fn sequence_phase_deviation(seq: &[Hamiltonian], dt: f64) -> Result<DeviationReport> {
    if seq.len() < 2 {
        return Err(invalid("a sequence needs at least two Hamiltonians"));
    }
    let systems = eigensystems(seq)?;
    let stats = stats_of(seq, &systems)?;
    let bound = eigenphase_shift_bound(&stats)?;

    let dim = systems[0].dimension();
    let mut basis = systems[0].vectors().clone();
    let mut actual = DMatrix::<Complex64>::identity(dim, dim);
    let mut ideal = DMatrix::<Complex64>::identity(dim, dim);
    for k in 0..seq.len() - 1 {
        let next = transported_basis(&basis, &systems[k + 1], k + 1)?;
        let p0 = ground_projector(&basis);
        let u = systems[k].propagator(dt);
        let u_ad = adiabatic_unitary(&basis, &next, systems[k].energies(), dt);
        actual = &u * &p0 * actual;
        ideal = &u_ad * &p0 * ideal;
        basis = next;
    }
    let observed = spectral_norm(&(actual - ideal));
    Ok(DeviationReport {
        report: BoundReport::new(format!("sequence of {}", seq.len()), bound, observed),
        stats,
        squared: observed * observed,
    })
}

/// Single-step form of [`sequence_phase_deviation`]:
/// `||(U_k - U_{k,ad}) P_0^k||` against `2λ²/(γ - 2λ)²`.
pub fn adiabatic_deviation(h_k: &Hamiltonian, h_next: &Hamiltonian, dt: f64) -> Result<DeviationReport> {
    let seq = [h_k.clone(), h_next.clone()];
    let mut r = sequence_phase_deviation(&seq, dt)?;
    let single = SequenceStats { m_count: 1, ..r.stats };
    r.report = BoundReport::new("single step", eigenphase_shift_bound(&single)?, r.report.observed);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{transverse_field_ising, Pauli, PauliTerm};

    fn single(c: f64, p: Pauli) -> Hamiltonian {
        Hamiltonian::new(vec![PauliTerm::from_factors(c, [(0, p)]).unwrap()], 1).unwrap()
    }

    #[test]
    fn stats_examples() {
        let h = transverse_field_ising(2, 1.0, 0.5);
        let s = sequence_stats(&[h.clone(), h.clone()]).unwrap();
        assert_eq!(s.lambda, 0.0);
        let g = Eigensystem::new(&h).unwrap().gap().unwrap().value;
        assert!((s.gamma - g).abs() < 1e-12);
        let s = sequence_stats(&[single(1.0, Pauli::Z), single(1.0, Pauli::X)]).unwrap();
        assert!((s.lambda - 2f64.sqrt()).abs() < 1e-12);
        assert!((s.gamma - 2.0).abs() < 1e-12);
        assert_eq!(s.m_count, 2);
    }

    #[test]
    fn overlap_examples() {
        let h = transverse_field_ising(2, 1.0, 0.5);
        assert!((overlap_success_probability(&[h.clone(), h.clone(), h]).unwrap() - 1.0).abs() < 1e-12);
        let p = overlap_success_probability(&[single(1.0, Pauli::Z), single(1.0, Pauli::X)]).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_and_commuting_pairs_have_no_deviation() {
        let h = transverse_field_ising(2, 1.0, 0.5);
        let r = adiabatic_deviation(&h, &h, 0.3).unwrap();
        assert!(r.report.observed < 1e-12);
        assert_eq!(r.report.bound, 0.0);
        assert!(r.report.satisfied);
        let r = adiabatic_deviation(&single(1.0, Pauli::Z), &single(1.5, Pauli::Z), 0.7).unwrap();
        assert!(r.report.observed < 1e-12);
    }

    #[test]
    fn two_element_sequence_matches_single_step() {
        let a = transverse_field_ising(2, 1.0, 0.5);
        let b = transverse_field_ising(2, 1.02, 0.49);
        let s = sequence_phase_deviation(&[a.clone(), b.clone()], 0.4).unwrap();
        let d = adiabatic_deviation(&a, &b, 0.4).unwrap();
        assert!((s.report.observed - d.report.observed).abs() < 1e-14);
        // Rank one: the norm is the distance between the paired ground states.
        let ea = Eigensystem::new(&a).unwrap();
        let eb = Eigensystem::new(&b).unwrap();
        let ov = eb.ground_state().inner(&ea.ground_state()).norm();
        assert!((d.report.observed - (2.0 - 2.0 * ov).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn identical_sequence_has_no_deviation() {
        let h = transverse_field_ising(3, 1.0, 0.7);
        let r = sequence_phase_deviation(&[h.clone(), h.clone(), h.clone(), h], 0.2).unwrap();
        assert!(r.report.observed < 1e-12);
    }

    #[test]
    fn degenerate_ground_is_rejected() {
        let h = Hamiltonian::zero(1);
        assert!(matches!(sequence_stats(&[h.clone(), h.clone()]), Err(Error::Degenerate { .. })));
        assert!(overlap_success_probability(&[h.clone(), h]).is_err());
    }
}
