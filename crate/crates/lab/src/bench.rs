//! Batched experiment orchestration: sweep grids over instance ensembles,
//! per-instance optimization runs, bootstrap confidence intervals, and
//! hardness binning.
//!
//! Everything is reproducible from `(ExperimentSpec, master_seed)` alone.
//! Per-instance and per-stream seeds are derived with the counter-based
//! mixer from the core crate, so results are identical for any worker
//! count.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cvqe_core::cost::{
    overlap_with_ground, sampled_cost, success, EnergyLandscape, EvalMode,
};
use cvqe_core::optim::{minimize, OptimizerConfig, OptimizerKind};
use cvqe_core::qubo::{GraphKind, QuboInstance};
use cvqe_core::rng::{hash_tag, mix, rng_from_seed};
use cvqe_core::simulator::{build_ansatz, init_params, prepare, Entanglement, ParameterVector};

/// Entanglement structure plus layer count, the circuit half of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzChoice {
    pub entanglement: Entanglement,
    pub layers: usize,
}

impl AnsatzChoice {
    pub fn product() -> Self {
        Self {
            entanglement: Entanglement::None,
            layers: 0,
        }
    }

    pub fn entangled(entanglement: Entanglement, layers: usize) -> Self {
        Self {
            entanglement,
            layers,
        }
    }
}

/// Optimizer selection for a sweep; `Auto` picks quasi-Newton for exact
/// cost evaluation and SPSA under shot noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerChoice {
    Auto,
    Spsa,
    NelderMead,
    QuasiNewton,
}

impl OptimizerChoice {
    pub fn resolve(self, mode: EvalMode) -> OptimizerKind {
        match self {
            OptimizerChoice::Auto => match mode {
                EvalMode::Exact => OptimizerKind::QuasiNewton,
                EvalMode::Shots(_) => OptimizerKind::Spsa,
            },
            OptimizerChoice::Spsa => OptimizerKind::Spsa,
            OptimizerChoice::NelderMead => OptimizerKind::NelderMead,
            OptimizerChoice::QuasiNewton => OptimizerKind::QuasiNewton,
        }
    }
}

fn default_beta() -> f64 {
    0.1
}

fn default_perturbation() -> f64 {
    1e-2
}

fn default_optimizers() -> Vec<OptimizerChoice> {
    vec![OptimizerChoice::Auto]
}

/// Full description of a batched experiment. The sweep is the cartesian
/// product of edge counts, ansatz choices, CVaR fractions, evaluation
/// modes, and optimizers, with `instances` problems per cell. Instances
/// depend only on `(name, master_seed, edge count, index)`, so cells that
/// differ in circuit or cost settings see the same problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub n: usize,
    pub graph_kind: GraphKind,
    pub edge_counts: Vec<usize>,
    pub instances: usize,
    pub ansatz: Vec<AnsatzChoice>,
    pub rho: Vec<f64>,
    pub modes: Vec<EvalMode>,
    #[serde(default = "default_optimizers")]
    pub optimizers: Vec<OptimizerChoice>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("sweep list `{0}` is empty")]
    EmptySweep(&'static str),
    #[error("instances must be >= 1")]
    NoInstances,
    #[error("CVaR fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("cut-off beta {0} outside (0, 1)")]
    BadBeta(f64),
    #[error("bootstrap needs at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("bootstrap needs at least 1000 resamples, got {0}")]
    TooFewResamples(usize),
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.edge_counts.is_empty() {
            return Err(BenchError::EmptySweep("edge_counts"));
        }
        if self.ansatz.is_empty() {
            return Err(BenchError::EmptySweep("ansatz"));
        }
        if self.rho.is_empty() {
            return Err(BenchError::EmptySweep("rho"));
        }
        if self.modes.is_empty() {
            return Err(BenchError::EmptySweep("modes"));
        }
        if self.optimizers.is_empty() {
            return Err(BenchError::EmptySweep("optimizers"));
        }
        if self.instances == 0 {
            return Err(BenchError::NoInstances);
        }
        for &r in &self.rho {
            if !(r > 0.0 && r <= 1.0) {
                return Err(BenchError::BadFraction(r));
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(BenchError::BadBeta(self.beta));
        }
        Ok(())
    }

    /// All sweep cells in canonical order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &edges in &self.edge_counts {
            for &ansatz in &self.ansatz {
                for &rho in &self.rho {
                    for &mode in &self.modes {
                        for &optimizer in &self.optimizers {
                            cells.push(Cell {
                                edges,
                                ansatz,
                                rho,
                                mode,
                                optimizer: optimizer.resolve(mode),
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Seed of instance `index` at the given edge count. Depends only on
    /// the experiment name, master seed, edge count, and index, so every
    /// cell at one edge count shares its problem set while distinct
    /// experiments get fresh instances.
    pub fn instance_seed(&self, edges: usize, index: usize) -> u64 {
        mix(
            self.master_seed,
            &[
                hash_tag("instance"),
                hash_tag(&self.name),
                edges as u64,
                index as u64,
            ],
        )
    }

    /// Seed of the run streams (entangler draw, optimizer, shot sampling)
    /// for one (cell, instance) task. Unlike instance seeds this varies
    /// with every cell coordinate.
    pub fn run_seed(&self, cell: &Cell, index: usize) -> u64 {
        let mode_words = match cell.mode {
            EvalMode::Exact => [hash_tag("exact"), 0],
            EvalMode::Shots(k) => [hash_tag("shots"), k],
        };
        mix(
            self.master_seed,
            &[
                hash_tag("run"),
                hash_tag(&self.name),
                cell.edges as u64,
                hash_tag(entanglement_label(cell.ansatz.entanglement)),
                cell.ansatz.layers as u64,
                cell.rho.to_bits(),
                mode_words[0],
                mode_words[1],
                hash_tag(optimizer_label(cell.optimizer)),
                index as u64,
            ],
        )
    }
}

/// One point of the sweep grid, with the optimizer already resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub edges: usize,
    pub ansatz: AnsatzChoice,
    pub rho: f64,
    pub mode: EvalMode,
    pub optimizer: OptimizerKind,
}

pub fn entanglement_label(e: Entanglement) -> &'static str {
    match e {
        Entanglement::None => "none",
        Entanglement::Linear => "linear",
        Entanglement::Compatible => "compatible",
        Entanglement::Random => "random",
    }
}

pub fn optimizer_label(k: OptimizerKind) -> &'static str {
    match k {
        OptimizerKind::Spsa => "spsa",
        OptimizerKind::NelderMead => "nelder-mead",
        OptimizerKind::QuasiNewton => "quasi-newton",
    }
}

pub fn mode_label(m: EvalMode) -> String {
    match m {
        EvalMode::Exact => "exact".into(),
        EvalMode::Shots(k) => format!("shots-{k}"),
    }
}

impl Cell {
    /// Stable display key, also the aggregate group label.
    pub fn key(&self) -> String {
        format!(
            "e{}-{}-L{}-rho{}-{}-{}",
            self.edges,
            entanglement_label(self.ansatz.entanglement),
            self.ansatz.layers,
            self.rho,
            mode_label(self.mode),
            optimizer_label(self.optimizer),
        )
    }
}

/// One completed instance run. `wall_time` lives in a sidecar (see
/// [`BatchOutput`]) so these records are byte-stable across machines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub edges: usize,
    pub entanglement: Entanglement,
    pub layers: usize,
    pub rho: f64,
    pub mode: EvalMode,
    pub optimizer: OptimizerKind,
    pub instance: usize,
    pub seed: u64,
    pub density: f64,
    pub d_h: f64,
    pub success: u8,
    pub overlap: f64,
    pub evaluations: u64,
    pub final_cost: f64,
}

impl InstanceRecord {
    pub fn cell_key(&self) -> String {
        Cell {
            edges: self.edges,
            ansatz: AnsatzChoice {
                entanglement: self.entanglement,
                layers: self.layers,
            },
            rho: self.rho,
            mode: self.mode,
            optimizer: self.optimizer,
        }
        .key()
    }
}

/// A quarantined failure: never aborts the batch, never enters aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub cell: String,
    pub instance: usize,
    pub seed: u64,
    pub error: String,
}

/// Merged batch results, ordered by (cell, instance index) regardless of
/// scheduling. `wall_times[i]` is the runtime in seconds of `records[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub records: Vec<InstanceRecord>,
    pub wall_times: Vec<f64>,
    pub failures: Vec<FailureRecord>,
}

/// Runs one instance against one cell. The returned record carries the
/// spectrum-derived hardness, the final overlap/success, and the exact
/// cost-evaluation count.
pub fn run_instance(
    inst: &QuboInstance,
    cell: &Cell,
    beta: f64,
    perturbation: f64,
    run_seed: u64,
) -> Result<InstanceRecord, String> {
    solve_instance(inst, cell, beta, perturbation, run_seed).map(|(rec, _)| rec)
}

/// Like [`run_instance`], additionally returning the optimized parameters
/// (for consumers that want to inspect or re-prepare the final state).
pub fn solve_instance(
    inst: &QuboInstance,
    cell: &Cell,
    beta: f64,
    perturbation: f64,
    run_seed: u64,
) -> Result<(InstanceRecord, ParameterVector), String> {
    let tag = |what: &str| format!("instance seed {}: {what}", inst.seed());
    let spectrum = inst
        .brute_force_spectrum()
        .map_err(|e| tag(&e.to_string()))?;
    let ansatz = build_ansatz(
        inst,
        cell.ansatz.entanglement,
        cell.ansatz.layers,
        mix(run_seed, &[hash_tag("pairs")]),
    )
    .map_err(|e| tag(&e.to_string()))?;
    let params0 = init_params(&ansatz, perturbation);
    let n = inst.n();
    let layers = cell.ansatz.layers;
    let rho = cell.rho;

    let mut cfg = match cell.mode {
        EvalMode::Exact => OptimizerConfig::exact(cell.optimizer),
        EvalMode::Shots(_) => OptimizerConfig::sampled(cell.optimizer),
    };
    if cell.optimizer == OptimizerKind::Spsa {
        // SPSA pays a flat two evaluations per iteration no matter how many
        // parameters move, so give it an iteration budget that grows with
        // the parameter count instead of a fixed cap.
        cfg.max_iterations = 20 * ansatz.parameter_count() + 10;
    }
    let mut opt_rng = rng_from_seed(mix(run_seed, &[hash_tag("optimizer")]));

    let trace = match cell.mode {
        EvalMode::Exact => {
            let landscape = EnergyLandscape::new(inst);
            let cost = |x: &[f64]| match ParameterVector::from_slice(n, layers, x) {
                Ok(p) => match prepare(&ansatz, &p) {
                    Ok(state) => landscape.exact_cost(&state.probabilities(), rho),
                    Err(_) => f64::NAN,
                },
                Err(_) => f64::NAN,
            };
            minimize(cost, params0.as_slice(), &cfg, &mut opt_rng)
        }
        EvalMode::Shots(k) => {
            let mut shot_rng = rng_from_seed(mix(run_seed, &[hash_tag("sampling")]));
            let cost = |x: &[f64]| match ParameterVector::from_slice(n, layers, x) {
                Ok(p) => match prepare(&ansatz, &p) {
                    Ok(state) => match state.sample(k, &mut shot_rng) {
                        Ok(batch) => sampled_cost(&batch, inst, rho).unwrap_or(f64::NAN),
                        Err(_) => f64::NAN,
                    },
                    Err(_) => f64::NAN,
                },
                Err(_) => f64::NAN,
            };
            minimize(cost, params0.as_slice(), &cfg, &mut opt_rng)
        }
    }
    .map_err(|e| tag(&e.to_string()))?;

    let best = ParameterVector::from_slice(n, layers, &trace.best_params)
        .map_err(|e| tag(&e.to_string()))?;
    let state = prepare(&ansatz, &best).map_err(|e| tag(&e.to_string()))?;
    let overlap = overlap_with_ground(&state, &spectrum).map_err(|e| tag(&e.to_string()))?;

    let record = InstanceRecord {
        edges: cell.edges,
        entanglement: cell.ansatz.entanglement,
        layers,
        rho,
        mode: cell.mode,
        optimizer: cell.optimizer,
        instance: 0, // filled by the batch driver
        seed: inst.seed(),
        density: inst.density().map_err(|e| tag(&e.to_string()))?,
        d_h: spectrum.min_hamming_distance(),
        success: u8::from(success(overlap, beta)),
        overlap,
        evaluations: trace.evaluations,
        final_cost: trace.best_cost,
    };
    Ok((record, best))
}

/// Executes every (cell, instance) task of the spec, in parallel over the
/// given worker count. Failed instances are quarantined, not fatal.
pub fn run_batch(spec: &ExperimentSpec, workers: usize) -> Result<BatchOutput, BenchError> {
    spec.validate()?;
    let cells = spec.cells();
    let tasks: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|&cell| (0..spec.instances).map(move |i| (cell, i)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("worker pool");
    let outcomes: Vec<Result<(InstanceRecord, f64), FailureRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(cell, index)| {
                let inst_seed = spec.instance_seed(cell.edges, index);
                let started = Instant::now();
                let result = QuboInstance::generate(spec.n, cell.edges, spec.graph_kind, inst_seed)
                    .map_err(|e| e.to_string())
                    .and_then(|inst| {
                        run_instance(
                            &inst,
                            &cell,
                            spec.beta,
                            spec.perturbation,
                            spec.run_seed(&cell, index),
                        )
                    });
                match result {
                    Ok(mut rec) => {
                        rec.instance = index;
                        Ok((rec, started.elapsed().as_secs_f64()))
                    }
                    Err(error) => Err(FailureRecord {
                        cell: cell.key(),
                        instance: index,
                        seed: inst_seed,
                        error,
                    }),
                }
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut wall_times = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((rec, dt)) => {
                records.push(rec);
                wall_times.push(dt);
            }
            Err(f) => failures.push(f),
        }
    }
    Ok(BatchOutput {
        records,
        wall_times,
        failures,
    })
}

/// A bootstrap percentile interval around the sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ci {
    pub lo: f64,
    pub point: f64,
    pub hi: f64,
}

/// Percentile bootstrap for the mean: resample with replacement, take the
/// `(1-level)/2` and `(1+level)/2` percentiles of the resampled means.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    values: &[f64],
    level: f64,
    resamples: usize,
    rng: &mut R,
) -> Result<Ci, BenchError> {
    if values.len() < 2 {
        return Err(BenchError::TooFewValues(values.len()));
    }
    if resamples < 1000 {
        return Err(BenchError::TooFewResamples(resamples));
    }
    let n = values.len();
    let point = values.iter().sum::<f64>() / n as f64;
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.random_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let pick = |q: f64| {
        let idx = (q * (resamples - 1) as f64).round() as usize;
        means[idx.min(resamples - 1)]
    };
    let tail = (1.0 - level) / 2.0;
    Ok(Ci {
        lo: pick(tail),
        point,
        hi: pick(1.0 - tail),
    })
}

/// Aggregated statistics of one record group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub key: String,
    pub count: usize,
    pub success_rate: Ci,
    pub mean_evaluations: Ci,
}

pub const DEFAULT_RESAMPLES: usize = 10_000;

fn group_stats(key: String, group: &[&InstanceRecord], seed: u64) -> GroupStats {
    let successes: Vec<f64> = group.iter().map(|r| f64::from(r.success)).collect();
    let evals: Vec<f64> = group.iter().map(|r| r.evaluations as f64).collect();
    let ci_of = |values: &[f64], tag: &str| {
        if values.len() < 2 {
            let point = values[0];
            return Ci {
                lo: point,
                point,
                hi: point,
            };
        }
        let mut rng = rng_from_seed(mix(seed, &[hash_tag("bootstrap"), hash_tag(tag), hash_tag(&key)]));
        bootstrap_ci(values, 0.95, DEFAULT_RESAMPLES, &mut rng).expect("bootstrap preconditions")
    };
    GroupStats {
        count: group.len(),
        success_rate: ci_of(&successes, "success"),
        mean_evaluations: ci_of(&evals, "evaluations"),
        key,
    }
}

/// Per-cell aggregates in the order cells first appear in the records.
pub fn aggregate_by_cell(records: &[InstanceRecord], seed: u64) -> Vec<GroupStats> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<&InstanceRecord>> = BTreeMap::new();
    for rec in records {
        let key = rec.cell_key();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(rec);
    }
    order
        .into_iter()
        .map(|key| {
            let group = &groups[&key];
            group_stats(key, group, seed)
        })
        .collect()
}

/// Hardness bins over the normalized minimum Hamming distance. The
/// boundaries use half-open midpoint rules so every realizable `k/n`
/// value has an unambiguous home: A = [0, 0.35), B = [0.35, 0.75),
/// C = [0.75, 1].
pub const HARDNESS_BOUNDARIES: [f64; 2] = [0.35, 0.75];
pub const HARDNESS_LABELS: [&str; 3] = ["A", "B", "C"];

pub fn hardness_bin(d_h: f64) -> usize {
    HARDNESS_BOUNDARIES.iter().position(|&b| d_h < b).unwrap_or(2)
}

/// One hardness bin; `stats` is `None` when the bin is empty (an explicit
/// marker, never a fabricated zero rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinAggregate {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub stats: Option<GroupStats>,
}

/// Partitions records into the three hardness bins and aggregates each.
/// Every record lands in exactly one bin.
pub fn bin_by_hardness(records: &[InstanceRecord], seed: u64) -> Vec<BinAggregate> {
    let mut bins: [Vec<&InstanceRecord>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for rec in records {
        bins[hardness_bin(rec.d_h)].push(rec);
    }
    let ranges = [
        (0.0, HARDNESS_BOUNDARIES[0]),
        (HARDNESS_BOUNDARIES[0], HARDNESS_BOUNDARIES[1]),
        (HARDNESS_BOUNDARIES[1], 1.0),
    ];
    bins.iter()
        .zip(HARDNESS_LABELS)
        .zip(ranges)
        .map(|((group, label), (lo, hi))| BinAggregate {
            label: label.to_string(),
            lo,
            hi,
            count: group.len(),
            stats: (!group.is_empty())
                .then(|| group_stats(label.to_string(), group, seed)),
        })
        .collect()
}
