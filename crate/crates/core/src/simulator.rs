//! Ansatz circuits and real-amplitude statevector evolution.
//!
//! The circuit family alternates single-qubit Y rotations with layers of
//! control-Z entanglers. Both gate kinds map real vectors to real vectors, so
//! the state stores one `f64` per amplitude. Qubit 0 is the least-significant
//! bit of the amplitude index.
//!
//! Zero-layer circuits are product states with an `O(n)` representation and
//! per-qubit sampling; [`Prepared`] abstracts over the two paths.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;
use crate::qubo::QuboInstance;
use crate::rng::rng_from_seed;

const NORM_TOLERANCE: f64 = 1e-6;

/// Entangler topology of the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Entanglement {
    /// No entangling layers: the product-state ansatz (requires `L = 0`).
    None,
    /// Chain pairs `(0,1), (1,2), ..., (n-2, n-1)` in every layer.
    Linear,
    /// The problem graph's edge set in every layer.
    Compatible,
    /// Per layer, `|edges|` distinct random pairs, frozen at build time.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("entanglement 'none' requires zero layers, got {0}")]
    ProductStateWithLayers(usize),
    #[error("entangled ansatz requires at least one layer")]
    EntangledWithoutLayers,
    #[error("compatible entanglement needs a graph with at least one edge")]
    CompatibleOnEmptyGraph,
    #[error("parameter dimensions {got_n}x{got_layers} do not match ansatz {n}x{layers}")]
    DimensionMismatch {
        n: usize,
        layers: usize,
        got_n: usize,
        got_layers: usize,
    },
    #[error("state norm deviates from 1 by more than {NORM_TOLERANCE}")]
    Unnormalized,
    #[error("shot count must be at least 1")]
    NoShots,
}

/// Circuit topology: entangler pairs for each of the `L` layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzSpec {
    n: usize,
    layers: usize,
    entanglement: Entanglement,
    /// `pairs[l]` holds the entangler pairs of layer `l + 1`.
    pairs: Vec<Vec<(usize, usize)>>,
    seed: u64,
}

impl AnsatzSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn entanglement(&self) -> Entanglement {
        self.entanglement
    }

    pub fn entangler_pairs(&self) -> &[Vec<(usize, usize)>] {
        &self.pairs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of variational parameters, `n * (L + 1)`.
    pub fn parameter_count(&self) -> usize {
        self.n * (self.layers + 1)
    }
}

/// Builds the circuit topology for an instance. Random entangler pairs are
/// drawn here, independently per layer, and then frozen for the whole
/// optimization.
pub fn build_ansatz(
    inst: &QuboInstance,
    entanglement: Entanglement,
    layers: usize,
    seed: u64,
) -> Result<AnsatzSpec, SimError> {
    let n = inst.n();
    match entanglement {
        Entanglement::None => {
            if layers != 0 {
                return Err(SimError::ProductStateWithLayers(layers));
            }
        }
        _ => {
            if layers == 0 {
                return Err(SimError::EntangledWithoutLayers);
            }
        }
    }
    let pairs = match entanglement {
        Entanglement::None => Vec::new(),
        Entanglement::Linear => {
            let layer: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            vec![layer; layers]
        }
        Entanglement::Compatible => {
            if inst.edges().is_empty() {
                return Err(SimError::CompatibleOnEmptyGraph);
            }
            let layer: Vec<_> = inst.edges().iter().map(|&(i, j, _)| (i, j)).collect();
            vec![layer; layers]
        }
        Entanglement::Random => {
            let mut rng = rng_from_seed(seed);
            let count = inst.edges().len();
            let all = n * (n - 1) / 2;
            (0..layers)
                .map(|_| {
                    rand::seq::index::sample(&mut rng, all, count.min(all))
                        .iter()
                        .map(|k| pair_from_index(n, k))
                        .collect()
                })
                .collect()
        }
    };
    Ok(AnsatzSpec {
        n,
        layers,
        entanglement,
        pairs,
        seed,
    })
}

fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    for i in 0..n - 1 {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range");
}

/// The `n x (L+1)` rotation angles of a circuit, stored layer-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    n: usize,
    layers: usize,
    /// `theta[l * n + q]` is the angle of qubit `q` in rotation layer `l`.
    theta: Vec<f64>,
}

impl ParameterVector {
    pub fn from_slice(n: usize, layers: usize, theta: &[f64]) -> Result<Self, SimError> {
        if theta.len() != n * (layers + 1) {
            return Err(SimError::DimensionMismatch {
                n,
                layers,
                got_n: theta.len(),
                got_layers: 0,
            });
        }
        Ok(Self {
            n,
            layers,
            theta: theta.to_vec(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    #[inline]
    pub fn get(&self, qubit: usize, layer: usize) -> f64 {
        self.theta[layer * self.n + qubit]
    }

    pub fn set(&mut self, qubit: usize, layer: usize, angle: f64) {
        self.theta[layer * self.n + qubit] = angle;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    /// Angles of one rotation layer.
    pub fn layer(&self, layer: usize) -> &[f64] {
        &self.theta[layer * self.n..(layer + 1) * self.n]
    }
}

/// Initial parameters: Hadamard-like `pi/4` on the first rotation layer
/// (uniform superposition) and a constant weak perturbation on the rest.
pub fn init_params(spec: &AnsatzSpec, perturbation: f64) -> ParameterVector {
    let mut theta = vec![perturbation; spec.parameter_count()];
    theta[..spec.n].fill(core::f64::consts::FRAC_PI_4);
    ParameterVector {
        n: spec.n,
        layers: spec.layers,
        theta,
    }
}

/// Randomized variant: perturbation layers drawn uniformly from
/// `[0, max_perturbation]` instead of a constant.
pub fn init_params_jittered<R: Rng + ?Sized>(
    spec: &AnsatzSpec,
    max_perturbation: f64,
    rng: &mut R,
) -> ParameterVector {
    let mut params = init_params(spec, 0.0);
    for l in 1..=spec.layers {
        for q in 0..spec.n {
            params.set(q, l, rng.random_range(0.0..=max_perturbation));
        }
    }
    params
}

/// `2^n` real amplitudes; qubit 0 is the least-significant index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<f64>,
}

impl StateVector {
    /// The computational basis state `|0...0>`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![0.0; 1usize << n];
        amps[0] = 1.0;
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    #[inline]
    pub fn probability(&self, x: u64) -> f64 {
        let a = self.amps[x as usize];
        a * a
    }

    /// Y rotation on one qubit: on `|0>` it yields
    /// `cos(theta)|0> + sin(theta)|1>`.
    pub fn apply_ry(&mut self, qubit: usize, angle: f64) {
        assert!(qubit < self.n, "qubit {qubit} out of range for n={}", self.n);
        let (s, c) = (math::sin(angle), math::cos(angle));
        let bit = 1usize << qubit;
        let mut base = 0;
        while base < self.amps.len() {
            for i0 in base..base + bit {
                let i1 = i0 + bit;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = c * a0 - s * a1;
                self.amps[i1] = s * a0 + c * a1;
            }
            base += bit << 1;
        }
    }

    /// Control-Z: negates every amplitude whose bits `i` and `j` are both 1.
    pub fn apply_cz(&mut self, i: usize, j: usize) {
        assert!(i != j, "control-Z needs two distinct qubits");
        assert!(i < self.n && j < self.n, "qubit out of range for n={}", self.n);
        let mask = (1u64 << i) | (1u64 << j);
        for (x, a) in self.amps.iter_mut().enumerate() {
            if x as u64 & mask == mask {
                *a = -*a;
            }
        }
    }
}

/// Runs the full circuit from `|0...0>`: rotation layer 0, then for each
/// layer `l = 1..=L` the entangling layer followed by rotation layer `l`.
pub fn evolve(spec: &AnsatzSpec, params: &ParameterVector) -> Result<StateVector, SimError> {
    if params.n() != spec.n || params.layers() != spec.layers {
        return Err(SimError::DimensionMismatch {
            n: spec.n,
            layers: spec.layers,
            got_n: params.n(),
            got_layers: params.layers(),
        });
    }
    let mut state = StateVector::zero(spec.n);
    for q in 0..spec.n {
        state.apply_ry(q, params.get(q, 0));
    }
    for l in 1..=spec.layers {
        for &(i, j) in &spec.pairs[l - 1] {
            state.apply_cz(i, j);
        }
        for q in 0..spec.n {
            state.apply_ry(q, params.get(q, l));
        }
    }
    Ok(state)
}

/// Separable state `prod_j (cos(theta_j)|0> + sin(theta_j)|1>)` in `O(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    cosines: Vec<f64>,
    sines: Vec<f64>,
}

impl ProductState {
    pub fn new(angles: &[f64]) -> Self {
        Self {
            cosines: angles.iter().map(|&t| math::cos(t)).collect(),
            sines: angles.iter().map(|&t| math::sin(t)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.cosines.len()
    }

    /// Marginal probability of qubit `q` measuring 1.
    #[inline]
    pub fn probability_one(&self, q: usize) -> f64 {
        self.sines[q] * self.sines[q]
    }

    #[inline]
    pub fn probability(&self, x: u64) -> f64 {
        let mut p = 1.0;
        for q in 0..self.n() {
            let a = if x >> q & 1 == 1 {
                self.sines[q]
            } else {
                self.cosines[q]
            };
            p *= a * a;
        }
        p
    }
}

/// A prepared variational state: either a full statevector or the fast
/// separable representation for zero-layer circuits.
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    Full(StateVector),
    Product(ProductState),
}

impl Prepared {
    pub fn n(&self) -> usize {
        match self {
            Prepared::Full(s) => s.n(),
            Prepared::Product(p) => p.n(),
        }
    }

    pub fn probability(&self, x: u64) -> f64 {
        match self {
            Prepared::Full(s) => s.probability(x),
            Prepared::Product(p) => p.probability(x),
        }
    }

    /// All `2^n` bitstring probabilities, indexed by the bitstring.
    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            Prepared::Full(s) => s.amplitudes().iter().map(|a| a * a).collect(),
            Prepared::Product(p) => {
                let mut probs = Vec::with_capacity(1 << p.n());
                probs.push(1.0);
                for q in 0..p.n() {
                    let c2 = p.cosines[q] * p.cosines[q];
                    let s2 = p.sines[q] * p.sines[q];
                    for i in 0..probs.len() {
                        probs.push(probs[i] * s2);
                        probs[i] *= c2;
                    }
                }
                probs
            }
        }
    }

    /// Draws `k` computational-basis shots. Product states sample each qubit
    /// independently; full states check normalization first.
    pub fn sample<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> Result<ShotBatch, SimError> {
        if k == 0 {
            return Err(SimError::NoShots);
        }
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        match self {
            Prepared::Full(s) => {
                if math::abs(s.norm_sq() - 1.0) > NORM_TOLERANCE {
                    return Err(SimError::Unnormalized);
                }
                let mut cumulative = Vec::with_capacity(s.amps.len());
                let mut acc = 0.0;
                for a in &s.amps {
                    acc += a * a;
                    cumulative.push(acc);
                }
                for _ in 0..k {
                    let r: f64 = rng.random::<f64>() * acc;
                    let x = cumulative.partition_point(|&c| c <= r).min(s.amps.len() - 1);
                    *counts.entry(x as u64).or_insert(0) += 1;
                }
            }
            Prepared::Product(p) => {
                let p1: Vec<f64> = p.sines.iter().map(|s| s * s).collect();
                for _ in 0..k {
                    let mut x = 0u64;
                    for (q, &prob_one) in p1.iter().enumerate() {
                        if rng.random::<f64>() < prob_one {
                            x |= 1 << q;
                        }
                    }
                    *counts.entry(x).or_insert(0) += 1;
                }
            }
        }
        Ok(ShotBatch {
            n: self.n(),
            counts,
            total: k,
        })
    }
}

/// Prepares the state for a parameter vector, picking the separable path
/// for zero-layer circuits.
pub fn prepare(spec: &AnsatzSpec, params: &ParameterVector) -> Result<Prepared, SimError> {
    if spec.layers == 0 {
        if params.n() != spec.n || params.layers() != 0 {
            return Err(SimError::DimensionMismatch {
                n: spec.n,
                layers: 0,
                got_n: params.n(),
                got_layers: params.layers(),
            });
        }
        Ok(Prepared::Product(ProductState::new(params.layer(0))))
    } else {
        Ok(Prepared::Full(evolve(spec, params)?))
    }
}

/// Measurement outcomes: occurrence count per bitstring, `sum = total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotBatch {
    n: usize,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl ShotBatch {
    /// Builds a batch from raw counts; the total is their sum.
    pub fn from_counts(n: usize, counts: BTreeMap<u64, u64>) -> Self {
        let total = counts.values().sum();
        Self { n, counts, total }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }
}
