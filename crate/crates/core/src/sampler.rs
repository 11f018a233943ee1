//! Importance-sampled and uniformly subsampled Hamiltonians, plus the
//! closed-form variance expressions for the reweighted mean estimator.
//!
//! A sampled Hamiltonian is `(1/N) Σ_i H_{l_i} / f(l_i)` where the `N`
//! indices are drawn independently from the importance distribution `f`.
//! Only the multiset of drawn indices matters, so draws are stored as a
//! per-term count vector and the Hamiltonian is built in canonical form
//! (duplicates merged).

use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::rng::{rng_from_seed, SimRng};

/// Raw weights below this fraction of the largest raw weight are raised
/// to it, so no term is unsampleable.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-9;

/// Normalized per-term sampling probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceDistribution {
    weights: Vec<f64>,
    rho: f64,
    surrogate_expectations: Vec<f64>,
}

impl ImportanceDistribution {
    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid(format!("weight {i} is negative or non-finite")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroWeights);
        }
        let len = weights.len();
        Ok(ImportanceDistribution {
            weights: weights.into_iter().map(|w| w / total).collect(),
            rho: 1.0,
            surrogate_expectations: vec![0.0; len],
        })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; len])
    }

    /// The zero-variance choice `f(j) ∝ |F(j)|`.
    pub fn optimal(values: &[f64]) -> Result<Self> {
        Self::from_weights(values.iter().map(|v| v.abs()).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn surrogate_expectations(&self) -> &[f64] {
        &self.surrogate_expectations
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Hedged importance `f(j) ∝ (1-ρ)|<H_j>| + ρ||H_j||` with the default floor.
pub fn importance_weights(
    h: &Hamiltonian,
    surrogate_expectations: &[f64],
    rho: f64,
) -> Result<ImportanceDistribution> {
    importance_weights_with_floor(h, surrogate_expectations, rho, Some(DEFAULT_FLOOR_FRACTION))
}

/// As [`importance_weights`]; `floor_fraction = None` disables the floor.
pub fn importance_weights_with_floor(
    h: &Hamiltonian,
    surrogate_expectations: &[f64],
    rho: f64,
    floor_fraction: Option<f64>,
) -> Result<ImportanceDistribution> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(invalid(format!("rho = {rho} is outside [0, 1]")));
    }
    if surrogate_expectations.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            found: surrogate_expectations.len(),
        });
    }
    if let Some(f) = floor_fraction {
        if !(0.0..1.0).contains(&f) {
            return Err(invalid(format!("floor fraction {f} is outside [0, 1)")));
        }
    }
    let mut raw: Vec<f64> = h
        .terms()
        .iter()
        .zip(surrogate_expectations)
        .map(|(t, e)| (1.0 - rho) * e.abs() + rho * t.norm())
        .collect();
    let max_raw = raw.iter().cloned().fold(0.0, f64::max);
    if !(max_raw > 0.0) {
        return Err(Error::ZeroWeights);
    }
    if let Some(f) = floor_fraction {
        let floor = f * max_raw;
        for w in &mut raw {
            *w = w.max(floor);
        }
    }
    let total: f64 = raw.iter().sum();
    Ok(ImportanceDistribution {
        weights: raw.into_iter().map(|w| w / total).collect(),
        rho,
        surrogate_expectations: surrogate_expectations.to_vec(),
    })
}

/// A randomly generated Hamiltonian together with how it was drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledHamiltonian {
    hamiltonian: Hamiltonian,
    seed: u64,
    draws: u64,
    counts: Vec<u64>,
}

impl SampledHamiltonian {
    /// Builds `(1/N) Σ_j n_j H_j / f(j)` from per-term draw counts `n_j`.
    pub fn from_counts(
        dist: &ImportanceDistribution,
        h: &Hamiltonian,
        counts: Vec<u64>,
        seed: u64,
    ) -> Result<Self> {
        if dist.len() != h.len() || counts.len() != h.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len(),
                found: if dist.len() != h.len() { dist.len() } else { counts.len() },
            });
        }
        let draws: u64 = counts.iter().sum();
        if draws == 0 {
            return Err(invalid("a sampled Hamiltonian needs at least one draw"));
        }
        let n = draws as f64;
        let mut terms = Vec::new();
        for ((term, &f), &c) in h.terms().iter().zip(dist.weights()).zip(&counts) {
            if c == 0 {
                continue;
            }
            if f == 0.0 {
                return Err(invalid("a zero-weight term cannot have been drawn"));
            }
            terms.push(term.with_coefficient(term.coefficient() * c as f64 / (n * f)));
        }
        Ok(SampledHamiltonian {
            hamiltonian: Hamiltonian::new(terms, h.qubit_count())?.canonicalize(),
            seed,
            draws,
            counts,
        })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn into_hamiltonian(self) -> Hamiltonian {
        self.hamiltonian
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// How many times each source term was drawn.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The drawn multiset `{l_i}` in ascending index order.
    pub fn source_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j, c as usize))
    }

    pub fn unique_terms(&self) -> usize {
        self.hamiltonian.len()
    }
}

/// Draws `n_draws` i.i.d. term indices from `dist` and builds the
/// reweighted Hamiltonian.
///
/// The draws are generated as one multinomial count vector by conditional
/// binomial splitting, which has the same law as `n_draws` categorical
/// draws but costs `O(L)` instead of `O(N)`.
pub fn draw_sampled_hamiltonian(
    dist: &ImportanceDistribution,
    h: &Hamiltonian,
    n_draws: u64,
    seed: u64,
) -> Result<SampledHamiltonian> {
    if n_draws == 0 {
        return Err(invalid("n_draws must be at least 1"));
    }
    if dist.len() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            found: dist.len(),
        });
    }
    let mut rng = rng_from_seed(seed);
    let counts = multinomial(&mut rng, n_draws, dist.weights())?;
    SampledHamiltonian::from_counts(dist, h, counts, seed)
}

/// `H_est = (L/m) Σ_i H_{l_i}` with `l_i` uniform over the `L` terms.
pub fn uniform_subsample(h: &Hamiltonian, m: u64, seed: u64) -> Result<SampledHamiltonian> {
    if h.is_empty() {
        return Err(invalid("cannot subsample an empty Hamiltonian"));
    }
    draw_sampled_hamiltonian(&ImportanceDistribution::uniform(h.len())?, h, m, seed)
}

fn multinomial(rng: &mut SimRng, n: u64, weights: &[f64]) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; weights.len()];
    let last = weights
        .iter()
        .rposition(|&w| w > 0.0)
        .ok_or(Error::ZeroWeights)?;
    let mut remaining = n;
    let mut remaining_mass = 1.0;
    for (j, &w) in weights.iter().enumerate().take(last + 1) {
        if remaining == 0 {
            break;
        }
        if j == last {
            counts[j] = remaining;
            break;
        }
        if w == 0.0 {
            continue;
        }
        let p = (w / remaining_mass).clamp(0.0, 1.0);
        let c = if p >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, p)
                .map_err(|e| invalid(format!("binomial({remaining}, {p}): {e}")))?
                .sample(rng)
        };
        counts[j] = c;
        remaining -= c;
        remaining_mass -= w;
    }
    Ok(counts)
}

/// Variance of the single-draw reweighted estimator of the mean of `F`:
/// `(1/N²) Σ F(j)²/f(j) - ((1/N) Σ F(j))²` with `N = F.len()`.
pub fn estimator_variance(dist: &ImportanceDistribution, values: &[f64]) -> Result<f64> {
    if dist.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            found: dist.len(),
        });
    }
    let n = values.len() as f64;
    let mut second = 0.0;
    for (j, (&f, &v)) in dist.weights().iter().zip(values).enumerate() {
        if v == 0.0 {
            continue;
        }
        if f == 0.0 {
            return Err(Error::InfiniteVariance { index: j });
        }
        second += v * v / f;
    }
    let mean = values.iter().sum::<f64>() / n;
    Ok(second / (n * n) - mean * mean)
}

/// `(E|F|)² - (E F)²`, the variance attained by `f ∝ |F|`.
pub fn optimal_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let abs_mean = values.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean = values.iter().sum::<f64>() / n;
    (abs_mean * abs_mean - mean * mean).max(0.0)
}

/// Upper bound on the estimator variance when the importance function is
/// built from an approximation `F̃` with `||F̃(j)| - |F(j)|| <= |F(j)|/2`:
/// `(4/N²)(Σ|δ_k|)(Σ|F(j)|) + V_opt(F)`.
pub fn robust_variance_bound(values: &[f64], perturbed: &[f64]) -> Result<f64> {
    if values.len() != perturbed.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            found: perturbed.len(),
        });
    }
    let mut delta_sum = 0.0;
    for (j, (&f, &g)) in values.iter().zip(perturbed).enumerate() {
        let delta = g.abs() - f.abs();
        if delta.abs() > f.abs() / 2.0 {
            return Err(Error::HypothesisViolated {
                index: j,
                message: format!("|δ| = {} exceeds |F|/2 = {}", delta.abs(), f.abs() / 2.0),
            });
        }
        delta_sum += delta.abs();
    }
    let n = values.len() as f64;
    let abs_sum: f64 = values.iter().map(|v| v.abs()).sum();
    Ok(4.0 / (n * n) * delta_sum * abs_sum + optimal_variance(values))
}

/// Parses surrogate expectations, one `<term-index> <expectation>` pair per
/// line aligned with the canonical term order; `#` starts a comment. Every
/// index in `0..term_count` must appear exactly once.
pub fn parse_surrogate(text: &str, term_count: usize) -> Result<Vec<f64>> {
    let mut values = vec![None; term_count];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: n + 1, message };
        let mut fields = line.split_whitespace();
        let (Some(idx), Some(val), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err("expected `<term-index> <expectation>`".into()));
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(format!("bad term index `{idx}`")))?;
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(format!("bad expectation `{val}`")))?;
        if !val.is_finite() {
            return Err(parse_err("expectation is not finite".into()));
        }
        let slot = values
            .get_mut(idx)
            .ok_or_else(|| parse_err(format!("term index {idx} is out of range (0..{term_count})")))?;
        if slot.replace(val).is_some() {
            return Err(parse_err(format!("term index {idx} appears twice")));
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| invalid(format!("no expectation for term {i}"))))
        .collect()
}
