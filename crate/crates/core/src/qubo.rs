//! QUBO problems on random weighted graphs.
//!
//! A problem instance is a symmetric integer weight matrix with zero diagonal
//! over `n` binary variables, viewed as an undirected graph. This module
//! generates instances (regular or uniform-random graphs with nonzero integer
//! weights in `[-10, 10]`), evaluates the QUBO energy, rewrites it as an
//! equivalent Ising model, and brute-forces the exact low-energy spectrum
//! together with the Hamming-distance hardness metric.
//!
//! Bitstrings are packed into `u64` with variable 0 as the least-significant
//! bit; every file format and manifold listing uses that order.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::rng_from_seed;

/// Hard cap on the variable count, set by brute-force enumeration feasibility.
pub const MAX_VARS: usize = 30;

/// Restart budget for the pairing-model regular graph construction.
const REGULAR_RESTARTS: usize = 10_000;

/// Which family the underlying graph is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GraphKind {
    /// Every vertex has the same degree (configuration/pairing model).
    Regular,
    /// Edge set sampled uniformly without replacement from all pairs.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuboError {
    #[error("variable count {0} outside supported range 1..={MAX_VARS}")]
    BadVariableCount(usize),
    #[error("edge count {requested} outside 0..={max} for n={n}")]
    EdgeCountOutOfRange {
        requested: usize,
        max: usize,
        n: usize,
    },
    #[error("no regular graph on n={n} vertices has {edges} edges (degree 2*{edges}/{n} is not an integer below n)")]
    InfeasibleRegularDegree { n: usize, edges: usize },
    #[error("regular graph construction failed after {0} restarts")]
    RegularRetriesExhausted(usize),
    #[error("invalid edge ({i}, {j}) weight {w}: need i < j < n and w != 0")]
    InvalidEdge { i: usize, j: usize, w: i64 },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("density undefined for n < 2")]
    DensityUndefined,
    #[error("enumeration of 2^{n} states exceeds the cap of 2^{cap}")]
    EnumerationTooLarge { n: usize, cap: usize },
    #[error("spectrum has a single degenerate level; first-excited manifold undefined")]
    DegenerateSpectrum,
}

/// A QUBO instance: symmetric integer matrix `Q` with zero diagonal,
/// stored redundantly as the edge list of its graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuboInstance {
    n: usize,
    graph_kind: GraphKind,
    seed: u64,
    /// `(i, j, w)` with `i < j`, `w != 0`, sorted lexicographically.
    edges: Vec<(usize, usize, i64)>,
    /// Row-major `n * n` symmetric matrix.
    weights: Vec<i64>,
}

impl QuboInstance {
    /// Builds an instance from an edge list, validating all invariants.
    pub fn new(
        n: usize,
        graph_kind: GraphKind,
        seed: u64,
        mut edges: Vec<(usize, usize, i64)>,
    ) -> Result<Self, QuboError> {
        if n == 0 || n > MAX_VARS {
            return Err(QuboError::BadVariableCount(n));
        }
        edges.sort_unstable();
        let mut weights = vec![0i64; n * n];
        for &(i, j, w) in &edges {
            if i >= j || j >= n || w == 0 {
                return Err(QuboError::InvalidEdge { i, j, w });
            }
            if weights[i * n + j] != 0 {
                return Err(QuboError::DuplicateEdge(i, j));
            }
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
        Ok(Self {
            n,
            graph_kind,
            seed,
            edges,
            weights,
        })
    }

    /// Generates a complete instance (graph plus weights) from a seed.
    pub fn generate(
        n: usize,
        edge_count: usize,
        kind: GraphKind,
        seed: u64,
    ) -> Result<Self, QuboError> {
        let mut rng = rng_from_seed(seed);
        let pairs = generate_graph(n, edge_count, kind, &mut rng)?;
        assign_weights(n, kind, seed, &pairs, &mut rng)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn graph_kind(&self) -> GraphKind {
        self.graph_kind
    }

    pub fn edges(&self) -> &[(usize, usize, i64)] {
        &self.edges
    }

    pub fn weight(&self, i: usize, j: usize) -> i64 {
        self.weights[i * self.n + j]
    }

    /// Ratio of present edges to the `n(n-1)/2` possible ones.
    pub fn density(&self) -> Result<f64, QuboError> {
        if self.n < 2 {
            return Err(QuboError::DensityUndefined);
        }
        Ok(2.0 * self.edges.len() as f64 / (self.n * (self.n - 1)) as f64)
    }

    /// QUBO energy `sum_{i,j} x_i Q_ij x_j` (full double sum: an edge of
    /// weight `w` contributes `2w` when both endpoints are set).
    ///
    /// Panics if `x` has bits set at or above position `n`.
    #[inline]
    pub fn energy(&self, x: u64) -> i64 {
        assert!(x >> self.n == 0, "bitstring wider than n={}", self.n);
        let mut e = 0i64;
        for &(i, j, w) in &self.edges {
            if x >> i & 1 == 1 && x >> j & 1 == 1 {
                e += 2 * w;
            }
        }
        e
    }

    /// Minimization-aligned Ising rewriting: for every bitstring the Ising
    /// energy equals the QUBO energy exactly, so both share their minima.
    pub fn to_ising(&self) -> IsingModel {
        let mut fields = vec![0.0f64; self.n];
        let mut couplings = Vec::with_capacity(self.edges.len());
        let mut total = 0i64;
        for &(i, j, w) in &self.edges {
            couplings.push((i, j, w as f64 / 2.0));
            fields[i] += w as f64 / 2.0;
            fields[j] += w as f64 / 2.0;
            total += w;
        }
        IsingModel {
            n: self.n,
            couplings,
            fields,
            offset: total as f64 / 2.0,
        }
    }

    /// Exhaustive two-level spectrum with the default enumeration cap.
    pub fn brute_force_spectrum(&self) -> Result<SpectrumReport, QuboError> {
        self.spectrum_with_cap(MAX_VARS)
    }

    /// Enumerates all `2^n` bitstrings and reports the two lowest distinct
    /// energy levels, their complete manifolds, and the minimum normalized
    /// Hamming distance between the manifolds.
    pub fn spectrum_with_cap(&self, cap: usize) -> Result<SpectrumReport, QuboError> {
        if self.n > cap {
            return Err(QuboError::EnumerationTooLarge { n: self.n, cap });
        }
        let dim: u64 = 1 << self.n;

        // Pass 1: the two lowest distinct energies.
        let mut e0 = i64::MAX;
        let mut e1 = i64::MAX;
        for x in 0..dim {
            let e = self.energy(x);
            if e < e0 {
                e1 = e0;
                e0 = e;
            } else if e > e0 && e < e1 {
                e1 = e;
            }
        }
        if e1 == i64::MAX {
            return Err(QuboError::DegenerateSpectrum);
        }

        // Pass 2: collect both manifolds in ascending bitstring order.
        let mut ground = Vec::new();
        let mut excited = Vec::new();
        for x in 0..dim {
            let e = self.energy(x);
            if e == e0 {
                ground.push(x);
            } else if e == e1 {
                excited.push(x);
            }
        }

        let mut min_bits = u32::MAX;
        for &g in &ground {
            for &x in &excited {
                min_bits = min_bits.min((g ^ x).count_ones());
            }
        }

        Ok(SpectrumReport {
            n: self.n,
            ground_energy: e0,
            ground_manifold: ground,
            first_excited_energy: e1,
            first_excited_manifold: excited,
            min_hamming_bits: min_bits,
        })
    }
}

/// The `(J, h, offset)` triple equivalent to a QUBO energy under
/// `sigma_i = 2 x_i - 1`. Entries are half-integers, exact in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    n: usize,
    /// Upper-triangular couplings `(i, j, J_ij)` with `i < j`.
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `offset + sum J_ij s_i s_j + sum h_i s_i` with `s_i = 2 x_i - 1`.
    pub fn energy(&self, x: u64) -> f64 {
        assert!(x >> self.n == 0, "bitstring wider than n={}", self.n);
        let spin = |q: usize| -> f64 {
            if x >> q & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        };
        let mut e = self.offset;
        for &(i, j, jij) in &self.couplings {
            e += jij * spin(i) * spin(j);
        }
        for (i, &h) in self.fields.iter().enumerate() {
            e += h * spin(i);
        }
        e
    }
}

/// Exact two-level spectrum of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumReport {
    pub n: usize,
    pub ground_energy: i64,
    /// All bitstrings at the ground energy, ascending as unsigned integers.
    pub ground_manifold: Vec<u64>,
    pub first_excited_energy: i64,
    pub first_excited_manifold: Vec<u64>,
    /// Minimum Hamming distance between the manifolds, in bits.
    pub min_hamming_bits: u32,
}

impl SpectrumReport {
    /// Normalized minimum Hamming distance, a multiple of `1/n` in `(0, 1]`.
    pub fn min_hamming_distance(&self) -> f64 {
        self.min_hamming_bits as f64 / self.n as f64
    }
}

/// Draws an edge set: `edge_count` distinct unordered pairs on `n` vertices.
///
/// For [`GraphKind::Regular`] the pairing model is used, restarting on
/// self-loops or duplicate edges; for [`GraphKind::UniformRandom`] the edge
/// set is a uniform sample without replacement from all pairs.
pub fn generate_graph<R: Rng + ?Sized>(
    n: usize,
    edge_count: usize,
    kind: GraphKind,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>, QuboError> {
    if n == 0 || n > MAX_VARS {
        return Err(QuboError::BadVariableCount(n));
    }
    let max = n * (n - 1) / 2;
    if edge_count > max {
        return Err(QuboError::EdgeCountOutOfRange {
            requested: edge_count,
            max,
            n,
        });
    }
    let mut edges = match kind {
        GraphKind::UniformRandom => {
            let idx = rand::seq::index::sample(rng, max, edge_count);
            idx.iter().map(|k| pair_from_index(n, k)).collect::<Vec<_>>()
        }
        GraphKind::Regular => {
            if edge_count == 0 {
                Vec::new()
            } else {
                let degree = 2 * edge_count / n;
                if degree * n != 2 * edge_count || degree >= n {
                    return Err(QuboError::InfeasibleRegularDegree {
                        n,
                        edges: edge_count,
                    });
                }
                if degree > (n - 1) / 2 {
                    // Dense graphs defeat stub matching (the collision-free
                    // probability vanishes), but complementation is a bijection
                    // between d-regular and (n-1-d)-regular graphs, so draw the
                    // sparse complement instead and invert it.
                    let co = pairing_model(n, n - 1 - degree, rng)?;
                    let present: BTreeSet<(usize, usize)> = co.into_iter().collect();
                    (0..n)
                        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                        .filter(|p| !present.contains(p))
                        .collect()
                } else {
                    pairing_model(n, degree, rng)?
                }
            }
        }
    };
    edges.sort_unstable();
    Ok(edges)
}

/// Maps a linear index in `0..n(n-1)/2` to the pair `(i, j)`, `i < j`,
/// in lexicographic order.
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

/// Configuration-model construction of a `degree`-regular simple graph,
/// restarting from scratch on any self-loop or multi-edge collision.
fn pairing_model<R: Rng + ?Sized>(
    n: usize,
    degree: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>, QuboError> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| core::iter::repeat_n(v, degree)).collect();
    'restart: for _ in 0..REGULAR_RESTARTS {
        stubs.shuffle(rng);
        let mut present = vec![false; n * n];
        let mut edges = Vec::with_capacity(stubs.len() / 2);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || present[a * n + b] {
                continue 'restart;
            }
            present[a * n + b] = true;
            edges.push((a, b));
        }
        return Ok(edges);
    }
    Err(QuboError::RegularRetriesExhausted(REGULAR_RESTARTS))
}

/// Assigns each edge a uniform nonzero integer weight in `[-10, 10]`
/// (zero draws are rejected and redrawn) and builds the instance.
pub fn assign_weights<R: Rng + ?Sized>(
    n: usize,
    kind: GraphKind,
    seed: u64,
    pairs: &[(usize, usize)],
    rng: &mut R,
) -> Result<QuboInstance, QuboError> {
    let edges = pairs
        .iter()
        .map(|&(i, j)| {
            let w = loop {
                let w: i64 = rng.random_range(-10..=10);
                if w != 0 {
                    break w;
                }
            };
            (i, j, w)
        })
        .collect();
    QuboInstance::new(n, kind, seed, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn inst(n: usize, edges: Vec<(usize, usize, i64)>) -> QuboInstance {
        QuboInstance::new(n, GraphKind::UniformRandom, 0, edges).unwrap()
    }

    #[test]
    fn complete_graph_is_the_only_maximal_edge_set() {
        let mut rng = rng_from_seed(1);
        for kind in [GraphKind::Regular, GraphKind::UniformRandom] {
            let edges = generate_graph(12, 66, kind, &mut rng).unwrap();
            assert_eq!(edges.len(), 66);
            let set: BTreeSet<_> = edges.iter().copied().collect();
            assert_eq!(set.len(), 66);
        }
    }

    #[test]
    fn density_examples() {
        let mut rng = rng_from_seed(2);
        for (edges, expect) in [(66, 1.0), (59, 59.0 / 66.0), (17, 17.0 / 66.0), (3, 3.0 / 66.0)] {
            let pairs = generate_graph(12, edges, GraphKind::UniformRandom, &mut rng).unwrap();
            let q = assign_weights(12, GraphKind::UniformRandom, 0, &pairs, &mut rng).unwrap();
            assert!((q.density().unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn density_needs_two_vertices() {
        let q = inst(1, vec![]);
        assert_eq!(q.density(), Err(QuboError::DensityUndefined));
    }

    #[test]
    fn regular_four_cycle() {
        // n=4, 4 edges, d=2: every 2-regular graph on 4 vertices is a 4-cycle.
        for seed in 0..50 {
            let mut rng = rng_from_seed(seed);
            let edges = generate_graph(4, 4, GraphKind::Regular, &mut rng).unwrap();
            let mut degree = [0usize; 4];
            for &(i, j) in &edges {
                degree[i] += 1;
                degree[j] += 1;
            }
            assert_eq!(degree, [2, 2, 2, 2]);
            // Connected 2-regular on 4 vertices: no vertex pair may appear twice.
            let set: BTreeSet<_> = edges.iter().collect();
            assert_eq!(set.len(), 4);
        }
    }

    #[test]
    fn regular_every_feasible_degree() {
        // n=12 admits every degree 1..=11; dense degrees go through the
        // complement construction.
        for d in 1..12usize {
            let edges = 12 * d / 2;
            let mut rng = rng_from_seed(d as u64);
            let got = generate_graph(12, edges, GraphKind::Regular, &mut rng).unwrap();
            assert_eq!(got.len(), edges);
            let mut deg = [0usize; 12];
            for &(i, j) in &got {
                assert!(i < j);
                deg[i] += 1;
                deg[j] += 1;
            }
            assert!(deg.iter().all(|&x| x == d), "degree {d}: {deg:?}");
            let set: BTreeSet<_> = got.iter().collect();
            assert_eq!(set.len(), edges, "degree {d} produced duplicate edges");
        }
    }

    #[test]
    fn regular_infeasible_degree() {
        let mut rng = rng_from_seed(3);
        assert!(matches!(
            generate_graph(12, 17, GraphKind::Regular, &mut rng),
            Err(QuboError::InfeasibleRegularDegree { .. })
        ));
    }

    #[test]
    fn edge_count_out_of_range() {
        let mut rng = rng_from_seed(3);
        assert!(matches!(
            generate_graph(4, 7, GraphKind::UniformRandom, &mut rng),
            Err(QuboError::EdgeCountOutOfRange { .. })
        ));
    }

    #[test]
    fn weights_in_support_and_deterministic() {
        let a = QuboInstance::generate(6, 5, GraphKind::UniformRandom, 77).unwrap();
        let b = QuboInstance::generate(6, 5, GraphKind::UniformRandom, 77).unwrap();
        assert_eq!(a, b);
        for &(_, _, w) in a.edges() {
            assert!(w != 0 && (-10..=10).contains(&w));
        }
    }

    #[test]
    fn empty_edge_list_is_zero_matrix() {
        let q = inst(3, vec![]);
        for x in 0..8 {
            assert_eq!(q.energy(x), 0);
        }
    }

    #[test]
    fn energy_single_edge() {
        let q = inst(2, vec![(0, 1, 3)]);
        assert_eq!(q.energy(0b11), 6);
        assert_eq!(q.energy(0b01), 0);
        assert_eq!(q.energy(0b00), 0);
    }

    #[test]
    fn energy_matches_naive_double_sum() {
        // Independent oracle: literal double loop over the weight matrix.
        let q = QuboInstance::generate(4, 5, GraphKind::UniformRandom, 4242).unwrap();
        for x in 0..16u64 {
            let mut e = 0i64;
            for i in 0..4 {
                for j in 0..4 {
                    if x >> i & 1 == 1 && x >> j & 1 == 1 {
                        e += q.weight(i, j);
                    }
                }
            }
            assert_eq!(q.energy(x), e);
        }
    }

    #[test]
    #[should_panic(expected = "wider than n")]
    fn energy_rejects_wide_bitstring() {
        inst(2, vec![(0, 1, 1)]).energy(0b100);
    }

    #[test]
    fn ising_two_variable_identity() {
        let q = inst(2, vec![(0, 1, 4)]);
        let m = q.to_ising();
        assert_eq!(m.couplings(), &[(0, 1, 2.0)]);
        assert_eq!(m.fields(), &[2.0, 2.0]);
        assert_eq!(m.offset(), 2.0);
        assert_eq!(m.energy(0b11), 8.0);
        assert_eq!(m.energy(0b01), 0.0);
    }

    #[test]
    fn ising_equivalence_exhaustive() {
        let q = QuboInstance::generate(5, 7, GraphKind::UniformRandom, 99).unwrap();
        let m = q.to_ising();
        for x in 0..32u64 {
            assert_eq!(m.energy(x), q.energy(x) as f64);
        }
    }

    #[test]
    fn zero_model_is_zero() {
        let q = inst(3, vec![]);
        let m = q.to_ising();
        for x in 0..8 {
            assert_eq!(m.energy(x), 0.0);
        }
    }

    #[test]
    fn spectrum_two_variable_ferromagnet() {
        let q = inst(2, vec![(0, 1, -5)]);
        let s = q.brute_force_spectrum().unwrap();
        assert_eq!(s.ground_energy, -10);
        assert_eq!(s.ground_manifold, vec![0b11]);
        assert_eq!(s.first_excited_energy, 0);
        assert_eq!(s.first_excited_manifold, vec![0b00, 0b01, 0b10]);
        assert_eq!(s.min_hamming_bits, 1);
        assert!((s.min_hamming_distance() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spectrum_degenerate_constant_instance() {
        assert_eq!(
            inst(1, vec![]).brute_force_spectrum(),
            Err(QuboError::DegenerateSpectrum)
        );
    }

    #[test]
    fn spectrum_cap_enforced() {
        let q = QuboInstance::generate(12, 17, GraphKind::UniformRandom, 5).unwrap();
        assert!(matches!(
            q.spectrum_with_cap(10),
            Err(QuboError::EnumerationTooLarge { n: 12, cap: 10 })
        ));
    }

    #[test]
    fn spectrum_matches_naive_minimum() {
        for seed in 0..20 {
            let q = QuboInstance::generate(8, 11, GraphKind::UniformRandom, seed).unwrap();
            let s = q.brute_force_spectrum().unwrap();
            let naive_min = (0..256u64).map(|x| q.energy(x)).min().unwrap();
            assert_eq!(s.ground_energy, naive_min);
            assert!(s.ground_energy < s.first_excited_energy);
            assert!(!s.ground_manifold.is_empty() && !s.first_excited_manifold.is_empty());
            // No energy strictly between the two levels.
            for x in 0..256u64 {
                let e = q.energy(x);
                assert!(e <= s.ground_energy || e >= s.first_excited_energy);
            }
        }
    }

    #[test]
    fn scaling_weights_preserves_manifolds_and_distance() {
        let q = QuboInstance::generate(7, 9, GraphKind::UniformRandom, 31).unwrap();
        let scaled_edges = q.edges().iter().map(|&(i, j, w)| (i, j, 3 * w)).collect();
        let q3 = QuboInstance::new(7, q.graph_kind(), q.seed(), scaled_edges).unwrap();
        let (a, b) = (q.brute_force_spectrum().unwrap(), q3.brute_force_spectrum().unwrap());
        assert_eq!(a.ground_manifold, b.ground_manifold);
        assert_eq!(a.first_excited_manifold, b.first_excited_manifold);
        assert_eq!(a.min_hamming_bits, b.min_hamming_bits);
    }

    #[test]
    fn duplicate_and_invalid_edges_rejected() {
        assert!(matches!(
            QuboInstance::new(3, GraphKind::UniformRandom, 0, vec![(0, 1, 2), (0, 1, 2)]),
            Err(QuboError::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            QuboInstance::new(3, GraphKind::UniformRandom, 0, vec![(1, 0, 2)]),
            Err(QuboError::InvalidEdge { .. })
        ));
        assert!(matches!(
            QuboInstance::new(3, GraphKind::UniformRandom, 0, vec![(0, 1, 0)]),
            Err(QuboError::InvalidEdge { .. })
        ));
    }
}
