//! VQE and CVaR-VQE objectives, plus the success metric.
//!
//! The CVaR cost at fraction `rho` is the mean of the lowest-`rho` tail of
//! the state's energy distribution; `rho = 1` is the plain expectation and
//! reproduces standard VQE. Both the exact (full distribution) and sampled
//! (finite shot batch) estimators live here, together with the overlap of a
//! state with the ground manifold and the success cut-off.

use alloc::vec::Vec;

use crate::qubo::{QuboInstance, SpectrumReport};
use crate::simulator::{Prepared, ShotBatch};

/// How the cost estimator observes the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EvalMode {
    /// Full-wavefunction expectation values (the infinite-shot limit).
    Exact,
    /// Stochastic estimate from the given number of measurement shots.
    Shots(u64),
}

/// CVaR fraction plus evaluation mode; `rho = 1` is standard VQE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig {
    pub rho: f64,
    pub mode: EvalMode,
}

impl CostConfig {
    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(CostError::BadFraction(self.rho));
        }
        if let EvalMode::Shots(0) = self.mode {
            return Err(CostError::EmptyBatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("CVaR fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("energy distribution is empty")]
    EmptyDistribution,
    #[error("probabilities must be nonnegative and sum to 1 (got sum {0})")]
    BadProbabilities(f64),
    #[error("shot batch is empty")]
    EmptyBatch,
    #[error("state has {state} qubits, report has {report}")]
    DimensionMismatch { state: usize, report: usize },
}

/// Discrete energy distribution: `(energy, probability)` entries sorted by
/// strictly increasing energy, equal-energy outcomes merged.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDistribution {
    entries: Vec<(i64, f64)>,
}

impl EnergyDistribution {
    pub fn new(mut entries: Vec<(i64, f64)>) -> Result<Self, CostError> {
        if entries.is_empty() {
            return Err(CostError::EmptyDistribution);
        }
        entries.sort_by_key(|&(e, _)| e);
        let mut merged: Vec<(i64, f64)> = Vec::with_capacity(entries.len());
        let mut sum = 0.0;
        for (e, p) in entries {
            if p < 0.0 {
                return Err(CostError::BadProbabilities(p));
            }
            sum += p;
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += p,
                _ => merged.push((e, p)),
            }
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(CostError::BadProbabilities(sum));
        }
        Ok(Self { entries: merged })
    }

    /// Builds the distribution of a prepared state under an instance's
    /// energy, enumerating all `2^n` bitstrings.
    pub fn from_state(state: &Prepared, inst: &QuboInstance) -> Self {
        let landscape = EnergyLandscape::new(inst);
        landscape.distribution(&state.probabilities())
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn expectation(&self) -> f64 {
        self.entries.iter().map(|&(e, p)| e as f64 * p).sum()
    }
}

/// Exact CVaR at fraction `rho`: mean of the lowest-`rho` probability mass,
/// with fractional weight on the quantile atom. `rho = 1` is the mean.
pub fn exact_cost(dist: &EnergyDistribution, rho: f64) -> Result<f64, CostError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(CostError::BadFraction(rho));
    }
    Ok(lower_tail_mean(
        dist.entries.iter().map(|&(e, p)| (e, p)),
        rho,
    ))
}

/// Shared tail accumulation over `(energy, mass)` pairs in ascending energy
/// order. Entries fully below the `rho` quantile contribute all their mass;
/// the boundary entry contributes the remaining fraction.
fn lower_tail_mean(entries: impl Iterator<Item = (i64, f64)>, rho: f64) -> f64 {
    let mut mass = 0.0;
    let mut acc = 0.0;
    for (e, p) in entries {
        if mass + p <= rho {
            acc += p * e as f64;
            mass += p;
        } else {
            acc += (rho - mass) * e as f64;
            break;
        }
    }
    acc / rho
}

/// Sampled CVaR estimator: the mean of the `max(1, floor(rho K))` lowest
/// energy outcomes of the batch.
pub fn sampled_cost(batch: &ShotBatch, inst: &QuboInstance, rho: f64) -> Result<f64, CostError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(CostError::BadFraction(rho));
    }
    if batch.total() == 0 {
        return Err(CostError::EmptyBatch);
    }
    let mut outcomes: Vec<(i64, u64)> = batch
        .counts()
        .iter()
        .map(|(&x, &c)| (inst.energy(x), c))
        .collect();
    outcomes.sort_by_key(|&(e, _)| e);
    let m = ((rho * batch.total() as f64) as u64).max(1);
    let mut taken = 0u64;
    let mut acc = 0.0;
    for (e, c) in outcomes {
        let take = c.min(m - taken);
        acc += e as f64 * take as f64;
        taken += take;
        if taken == m {
            break;
        }
    }
    Ok(acc / m as f64)
}

/// Instance energies indexed by bitstring, pre-sorted ascending: the fast
/// path for repeated exact cost evaluations during an optimization.
#[derive(Debug, Clone)]
pub struct EnergyLandscape {
    /// Bitstrings ordered by ascending energy (ties by bitstring value).
    order: Vec<u32>,
    /// `energies[k]` is the energy of `order[k]`.
    energies: Vec<i64>,
}

impl EnergyLandscape {
    pub fn new(inst: &QuboInstance) -> Self {
        let dim = 1u64 << inst.n();
        let mut order: Vec<u32> = (0..dim as u32).collect();
        let table: Vec<i64> = (0..dim).map(|x| inst.energy(x)).collect();
        order.sort_by_key(|&x| table[x as usize]);
        let energies = order.iter().map(|&x| table[x as usize]).collect();
        Self { order, energies }
    }

    /// Exact CVaR over a full probability vector. Agrees with
    /// [`exact_cost`] on the merged distribution of the same state.
    pub fn exact_cost(&self, probs: &[f64], rho: f64) -> f64 {
        lower_tail_mean(
            self.order
                .iter()
                .zip(&self.energies)
                .map(|(&x, &e)| (e, probs[x as usize])),
            rho,
        )
    }

    /// Merged energy distribution of a probability vector.
    pub fn distribution(&self, probs: &[f64]) -> EnergyDistribution {
        let mut entries: Vec<(i64, f64)> = Vec::new();
        for (&x, &e) in self.order.iter().zip(&self.energies) {
            match entries.last_mut() {
                Some(last) if last.0 == e => last.1 += probs[x as usize],
                _ => entries.push((e, probs[x as usize])),
            }
        }
        EnergyDistribution { entries }
    }
}

/// Probability mass of the state on the ground manifold (summed over all
/// degenerate ground bitstrings).
pub fn overlap_with_ground(state: &Prepared, report: &SpectrumReport) -> Result<f64, CostError> {
    if state.n() != report.n {
        return Err(CostError::DimensionMismatch {
            state: state.n(),
            report: report.n,
        });
    }
    Ok(report
        .ground_manifold
        .iter()
        .map(|&g| state.probability(g))
        .sum())
}

/// Success indicator: 1 iff the overlap reaches the cut-off (inclusive).
pub fn success(overlap: f64, beta: f64) -> bool {
    overlap >= beta
}

/// Lower bound on the probability of observing a solution at least once in
/// `k` measurements of a successful state: `1 - (1 - beta)^k`.
pub fn repetition_bound(beta: f64, k: u32) -> f64 {
    1.0 - crate::math::powf(1.0 - beta, f64::from(k))
}
