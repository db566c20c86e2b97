//! End-to-end acceptance gate: eight checks covering numerical oracles, the
//! tail-objective advantage, final-state character, optimizer behavior under
//! shot noise, hardness correlation, the product-vs-entangled comparison,
//! layer saturation, and determinism/performance budgets.
//!
//! Each `#[test]` is one pass/fail line. Expensive fixtures (the density
//! sweep batch and the hardness-engineered corpus) are built once and shared.

use std::sync::OnceLock;
use std::time::Instant;

use cvqe_core::cost::{exact_cost, sampled_cost, EnergyDistribution, EvalMode};
use cvqe_core::optim::OptimizerKind;
use cvqe_core::qubo::{GraphKind, QuboInstance};
use cvqe_core::rng::{hash_tag, mix, rng_from_seed};
use cvqe_core::simulator::{
    build_ansatz, evolve, init_params_jittered, prepare, AnsatzSpec, Entanglement,
    ParameterVector,
};
use cvqe_lab::bench::{run_batch, run_instance, AnsatzChoice, BatchOutput, Cell, InstanceRecord};
use cvqe_lab::formats::write_ndjson;
use cvqe_lab::presets::preset;
use rand::Rng;

// ---------------------------------------------------------------------------
// Shared fixtures

struct TimedBatch {
    out: BatchOutput,
    seconds: f64,
}

fn density_sweep() -> &'static TimedBatch {
    static BATCH: OnceLock<TimedBatch> = OnceLock::new();
    BATCH.get_or_init(|| {
        let spec = preset("fig5-desk").expect("preset exists");
        let start = Instant::now();
        let out = run_batch(&spec, 8).expect("density sweep batch");
        TimedBatch {
            out,
            seconds: start.elapsed().as_secs_f64(),
        }
    })
}

/// One solved run on the hardness-engineered corpus.
#[derive(Clone, Copy)]
struct CorpusRun {
    /// Hamming distance in twelfths (1..=12).
    k: u32,
    product: bool,
    mode: EvalMode,
    success: bool,
    evaluations: u64,
}

const CORPUS_N: usize = 12;
const CORPUS_EDGES: usize = 45;
const PER_VALUE_CAP: usize = 25;

/// Random draws are almost always easy (d_H = 1/12), so scan seeds and keep a
/// bounded number of instances per realizable d_H value. This "engineered
/// corpus" spreads instances across the whole hardness range.
fn engineered_corpus() -> &'static Vec<CorpusRun> {
    static CORPUS: OnceLock<Vec<CorpusRun>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut buckets: Vec<Vec<QuboInstance>> = vec![Vec::new(); 13];
        for seed in 0..40_000u64 {
            let inst =
                QuboInstance::generate(CORPUS_N, CORPUS_EDGES, GraphKind::UniformRandom, seed)
                    .expect("generation");
            let Ok(rep) = inst.brute_force_spectrum() else {
                continue;
            };
            let k = (rep.min_hamming_distance() * CORPUS_N as f64).round() as usize;
            if buckets[k].len() < PER_VALUE_CAP {
                buckets[k].push(inst);
            }
        }

        let mut runs = Vec::new();
        for mode in [EvalMode::Exact, EvalMode::Shots(9000), EvalMode::Shots(3000)] {
            for ansatz in [
                AnsatzChoice::product(),
                AnsatzChoice {
                    entanglement: Entanglement::Compatible,
                    layers: 1,
                },
            ] {
                let optimizer = match mode {
                    EvalMode::Exact => OptimizerKind::QuasiNewton,
                    EvalMode::Shots(_) => OptimizerKind::Spsa,
                };
                let cell = Cell {
                    edges: CORPUS_EDGES,
                    ansatz,
                    rho: 0.1,
                    mode,
                    optimizer,
                };
                for (k, bucket) in buckets.iter().enumerate() {
                    for (i, inst) in bucket.iter().enumerate() {
                        let seed = mix(
                            0xacce_5500,
                            &[hash_tag(&cell.key()), k as u64, i as u64],
                        );
                        let rec = run_instance(inst, &cell, 0.1, 1e-2, seed)
                            .expect("corpus run");
                        runs.push(CorpusRun {
                            k: k as u32,
                            product: ansatz.layers == 0,
                            mode,
                            success: rec.success == 1,
                            evaluations: rec.evaluations,
                        });
                    }
                }
            }
        }
        runs
    })
}

// ---------------------------------------------------------------------------
// Small statistics helpers

fn success_rate(records: &[&InstanceRecord]) -> f64 {
    records.iter().map(|r| r.success as f64).sum::<f64>() / records.len() as f64
}

fn mean_evals(records: &[&InstanceRecord]) -> f64 {
    records.iter().map(|r| r.evaluations as f64).sum::<f64>() / records.len() as f64
}

fn select<'a>(records: &'a [InstanceRecord], f: impl Fn(&InstanceRecord) -> bool) -> Vec<&'a InstanceRecord> {
    records.iter().filter(|r| f(r)).collect()
}

/// Average ranks (midpoints for ties).
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &p in &idx[i..=j] {
            out[p] = rank;
        }
        i = j + 1;
    }
    out
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

// ---------------------------------------------------------------------------
// 1. Numerical oracle suite, re-run as a single timed block.

fn eye(dim: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn kron(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut m = vec![vec![0.0; ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    m[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn ry_full(n: usize, qubit: usize, angle: f64) -> Vec<Vec<f64>> {
    let (c, s) = (angle.cos(), angle.sin());
    let g = vec![vec![c, -s], vec![s, c]];
    kron(&kron(&eye(1 << (n - 1 - qubit)), &g), &eye(1 << qubit))
}

fn cz_full(n: usize, i: usize, j: usize) -> Vec<Vec<f64>> {
    let mask = (1u64 << i) | (1u64 << j);
    let mut m = eye(1 << n);
    for (b, row) in m.iter_mut().enumerate() {
        if b as u64 & mask == mask {
            row[b] = -1.0;
        }
    }
    m
}

fn dense_evolve(spec: &AnsatzSpec, params: &ParameterVector) -> Vec<f64> {
    let n = spec.n();
    let mut v = vec![0.0; 1 << n];
    v[0] = 1.0;
    for q in 0..n {
        v = mat_vec(&ry_full(n, q, params.get(q, 0)), &v);
    }
    for (l, pairs) in spec.entangler_pairs().iter().enumerate() {
        for &(i, j) in pairs {
            v = mat_vec(&cz_full(n, i, j), &v);
        }
        for q in 0..n {
            v = mat_vec(&ry_full(n, q, params.get(q, l + 1)), &v);
        }
    }
    v
}

#[test]
fn oracle_suite_passes_within_budget() {
    let start = Instant::now();
    let mut rng = rng_from_seed(0xacc0);

    // Spin-model energies agree with the binary form on every bitstring.
    for seed in 0..100u64 {
        let n = 2 + (seed % 9) as usize;
        let edges = 1 + (seed as usize * 7) % (n * (n - 1) / 2);
        let inst = QuboInstance::generate(n, edges, GraphKind::UniformRandom, seed).unwrap();
        let ising = inst.to_ising();
        for x in 0..1u64 << n {
            assert!((inst.energy(x) as f64 - ising.energy(x)).abs() < 1e-9);
        }
    }

    // Dense matrix-product evolution agrees, the norm is preserved, the
    // entangler is an involution, and the separable path matches.
    for (n, edges, ent, layers) in [
        (3, 2, Entanglement::Linear, 1),
        (4, 4, Entanglement::Compatible, 2),
        (5, 6, Entanglement::Random, 3),
        (6, 9, Entanglement::Linear, 2),
    ] {
        let inst = QuboInstance::generate(n, edges, GraphKind::UniformRandom, n as u64).unwrap();
        let spec = build_ansatz(&inst, ent, layers, 11).unwrap();
        let theta: Vec<f64> = (0..spec.parameter_count())
            .map(|_| rng.random_range(-3.14..3.14))
            .collect();
        let params = ParameterVector::from_slice(n, layers, &theta).unwrap();
        let fast = evolve(&spec, &params).unwrap();
        assert!((fast.norm_sq() - 1.0).abs() < 1e-10, "norm drifted");
        for (a, b) in fast.amplitudes().iter().zip(&dense_evolve(&spec, &params)) {
            assert!((a - b).abs() < 1e-10, "dense oracle mismatch");
        }
        let mut twice = fast.clone();
        twice.apply_cz(0, n - 1);
        twice.apply_cz(0, n - 1);
        assert_eq!(twice, fast, "entangler is not an involution");
    }
    for n in 1..=8usize {
        let inst = QuboInstance::generate(n, 0, GraphKind::UniformRandom, 5).unwrap();
        let spec = build_ansatz(&inst, Entanglement::None, 0, 0).unwrap();
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-3.14..3.14)).collect();
        let params = ParameterVector::from_slice(n, 0, &theta).unwrap();
        let product = prepare(&spec, &params).unwrap();
        let full = evolve(&spec, &params).unwrap();
        for (x, a) in full.amplitudes().iter().enumerate() {
            assert!((product.probability(x as u64) - a * a).abs() < 1e-12);
        }
    }

    // The full tail (rho = 1) is the plain expectation.
    let inst = QuboInstance::generate(8, 13, GraphKind::UniformRandom, 21).unwrap();
    let spec = build_ansatz(&inst, Entanglement::Linear, 2, 3).unwrap();
    let params = init_params_jittered(&spec, 0.5, &mut rng_from_seed(9));
    let state = prepare(&spec, &params).unwrap();
    let dist = EnergyDistribution::from_state(&state, &inst);
    assert!((exact_cost(&dist, 1.0).unwrap() - dist.expectation()).abs() < 1e-10);

    // Sampled tail cost converges toward the exact value at rate K^(-1/2).
    let rho = 0.1;
    let exact = exact_cost(&dist, rho).unwrap();
    let shots = [1_000u64, 10_000, 100_000];
    let errs: Vec<f64> = shots
        .iter()
        .map(|&k| {
            (0..50u64)
                .map(|seed| {
                    let mut srng = rng_from_seed(1000 + seed);
                    let batch = state.sample(k, &mut srng).unwrap();
                    (sampled_cost(&batch, &inst, rho).unwrap() - exact).abs()
                })
                .sum::<f64>()
                / 50.0
        })
        .collect();
    let xs: Vec<f64> = shots.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / 3.0;
    let ym = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "convergence slope {slope}");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "oracle suite took {elapsed:.1}s");
    println!("oracle suite clean in {elapsed:.1}s, sampling slope {slope:.3}");
}

// ---------------------------------------------------------------------------
// 2. The tail objective beats the plain-mean objective across densities.

#[test]
fn tail_objective_outperforms_plain_mean() {
    let batch = &density_sweep().out;
    let mut big_gaps = 0;
    for edges in [3usize, 17, 59] {
        for layers in [0usize, 3] {
            let vqe = select(&batch.records, |r| {
                r.edges == edges && r.layers == layers && r.rho == 1.0
            });
            let cvar = select(&batch.records, |r| {
                r.edges == edges && r.layers == layers && r.rho == 0.1
            });
            assert_eq!(vqe.len(), 100);
            assert_eq!(cvar.len(), 100);
            let (sv, sc) = (success_rate(&vqe), success_rate(&cvar));
            println!("edges {edges} L{layers}: tail {sc:.3} vs mean {sv:.3}");
            assert!(
                sc >= sv,
                "tail objective lost at edges={edges} L={layers}: {sc:.3} < {sv:.3}"
            );
            if sc - sv >= 0.10 {
                big_gaps += 1;
            }
        }
    }
    assert!(big_gaps >= 4, "only {big_gaps}/6 cells show a >= 10pt gap");
}

// ---------------------------------------------------------------------------
// 3. Plain-mean runs collapse to (near-)classical states; tail runs do not.

#[test]
fn final_state_overlap_histograms_differ_by_objective() {
    let batch = &density_sweep().out;
    let vqe = select(&batch.records, |r| {
        r.edges == 17 && r.layers == 3 && r.rho == 1.0
    });
    let cvar = select(&batch.records, |r| {
        r.edges == 17 && r.layers == 3 && r.rho == 0.1
    });
    let extreme = vqe
        .iter()
        .filter(|r| r.overlap < 0.1 || r.overlap >= 0.9)
        .count() as f64
        / vqe.len() as f64;
    let middle = cvar
        .iter()
        .filter(|r| (0.1..0.9).contains(&r.overlap))
        .count() as f64
        / cvar.len() as f64;
    println!("mean-objective extreme-bin mass {extreme:.2}, tail middle mass {middle:.2}");
    assert!(extreme >= 0.70, "bimodal mass only {extreme:.2}");
    assert!(middle >= 0.30, "intermediate mass only {middle:.2}");
}

// ---------------------------------------------------------------------------
// 4. Under shot noise the stochastic optimizer wins; exactly evaluated, the
//    gradient-based one keeps up.

#[test]
fn optimizer_dichotomy_under_shot_noise() {
    let spec = preset("fig8-desk").expect("preset exists");
    let batch = run_batch(&spec, 8).expect("shot-noise batch");
    let rate = |mode: EvalMode, opt: OptimizerKind| {
        let rows = select(&batch.records, |r| r.mode == mode && r.optimizer == opt);
        assert_eq!(rows.len(), 100);
        success_rate(&rows)
    };
    let noisy_spsa = rate(EvalMode::Shots(3000), OptimizerKind::Spsa);
    let noisy_qn = rate(EvalMode::Shots(3000), OptimizerKind::QuasiNewton);
    let exact_spsa = rate(EvalMode::Exact, OptimizerKind::Spsa);
    let exact_qn = rate(EvalMode::Exact, OptimizerKind::QuasiNewton);
    println!(
        "3000 shots: spsa {noisy_spsa:.2} qn {noisy_qn:.2}; exact: spsa {exact_spsa:.2} qn {exact_qn:.2}"
    );
    assert!(
        noisy_spsa - noisy_qn >= 0.15,
        "shot-noise gap only {:.3}",
        noisy_spsa - noisy_qn
    );
    assert!(
        exact_qn >= exact_spsa - 0.10,
        "exact-mode gradient optimizer fell behind: {exact_qn:.3} vs {exact_spsa:.3}"
    );
}

// ---------------------------------------------------------------------------
// 5. Success anticorrelates with the ground/first-excited Hamming distance.

#[test]
fn hamming_distance_predicts_success() {
    let runs = engineered_corpus();
    for product in [true, false] {
        let exact: Vec<&CorpusRun> = runs
            .iter()
            .filter(|r| r.product == product && r.mode == EvalMode::Exact)
            .collect();
        assert!(exact.len() >= 150, "corpus too small: {}", exact.len());

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 1..=12u32 {
            let group: Vec<&&CorpusRun> = exact.iter().filter(|r| r.k == k).collect();
            if group.len() < 5 {
                continue;
            }
            xs.push(k as f64 / 12.0);
            ys.push(group.iter().filter(|r| r.success).count() as f64 / group.len() as f64);
        }
        let rho_s = spearman(&xs, &ys);

        let rate_where = |f: &dyn Fn(u32) -> bool| {
            let g: Vec<&&CorpusRun> = exact.iter().filter(|r| f(r.k)).collect();
            g.iter().filter(|r| r.success).count() as f64 / g.len() as f64
        };
        let easy = rate_where(&|k| k as f64 / 12.0 <= 0.3);
        let hard = rate_where(&|k| k as f64 / 12.0 >= 0.8);
        let label = if product { "product" } else { "entangled" };
        println!(
            "{label}: spearman {rho_s:.3}, easy {easy:.3} vs hard {hard:.3} over {} runs",
            exact.len()
        );
        assert!(rho_s <= -0.7, "{label}: weak correlation {rho_s:.3}");
        assert!(
            easy - hard >= 0.20,
            "{label}: hardness gap only {:.3}",
            easy - hard
        );
    }
}

// ---------------------------------------------------------------------------
// 6. Product vs entangled across hardness bins and shot budgets.

/// Hardness bins in twelfths: A = d_H <= 0.3, B = 0.4..0.7, C = >= 0.8.
fn table_bin(k: u32) -> Option<usize> {
    match k {
        1..=3 => Some(0),
        5..=8 => Some(1),
        10..=12 => Some(2),
        _ => None,
    }
}

#[test]
fn entanglement_tradeoff_across_hardness_and_shots() {
    let runs = engineered_corpus();
    let modes = [EvalMode::Shots(3000), EvalMode::Shots(9000), EvalMode::Exact];
    // Reference mean evaluation counts per (mode, bin) column, product then
    // entangled; measured counts must stay within one order of magnitude.
    let reference_product = [[335.0, 274.0, 327.0], [316.0, 262.0, 298.0], [73.0, 206.0, 288.0]];
    let reference_entangled = [[496.0, 538.0, 625.0], [463.0, 372.0, 461.0], [129.0, 390.0, 560.0]];

    let mut success = [[[0.0f64; 3]; 3]; 2]; // [ansatz][mode][bin]
    let mut evals = [[[0.0f64; 3]; 3]; 2];
    for (m, &mode) in modes.iter().enumerate() {
        for (a, product) in [true, false].into_iter().enumerate() {
            for b in 0..3 {
                let grp: Vec<&CorpusRun> = runs
                    .iter()
                    .filter(|r| {
                        r.product == product && r.mode == mode && table_bin(r.k) == Some(b)
                    })
                    .collect();
                assert!(grp.len() >= 20, "thin bin {b}: {}", grp.len());
                success[a][m][b] =
                    grp.iter().filter(|r| r.success).count() as f64 / grp.len() as f64;
                evals[a][m][b] =
                    grp.iter().map(|r| r.evaluations as f64).sum::<f64>() / grp.len() as f64;
            }
        }
    }

    let (product, entangled) = (0usize, 1usize);
    let exact = 2usize;
    println!("product  success {:?}", success[product]);
    println!("entangled success {:?}", success[entangled]);
    println!("product  evals {:?}", evals[product]);
    println!("entangled evals {:?}", evals[entangled]);

    // Exact evaluation: success degrades with hardness and stays high on
    // easy problems; entanglement never hurts the success rate.
    let s = success[product][exact];
    assert!(s[0] > s[1] && s[1] > s[2], "ordering violated: {s:?}");
    assert!(s[0] >= 0.85, "easy-bin success only {:.3}", s[0]);
    for b in 0..3 {
        assert!(
            success[entangled][exact][b] >= success[product][exact][b],
            "exact bin {b}: entangled below product"
        );
    }

    // The entangled ansatz always pays more cost evaluations, and every
    // column's mean stays within 10x of the reference counts.
    for m in 0..3 {
        for b in 0..3 {
            assert!(
                evals[entangled][m][b] > evals[product][m][b],
                "column ({m},{b}): entangled not slower"
            );
            for (a, reference) in [(product, &reference_product), (entangled, &reference_entangled)]
            {
                let ratio = evals[a][m][b] / reference[m][b];
                assert!(
                    (0.1..=10.0).contains(&ratio),
                    "column ({m},{b}) ansatz {a}: {:.0} evals vs reference {:.0}",
                    evals[a][m][b],
                    reference[m][b]
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 7. Success saturates after one entangling layer; evaluations keep growing.

#[test]
fn layer_count_saturates() {
    let spec = preset("fig7-desk").expect("preset exists");
    let batch = run_batch(&spec, 8).expect("layer sweep batch");
    let product = select(&batch.records, |r| r.layers == 0);
    assert_eq!(product.len(), 100);
    let product_evals = mean_evals(&product);
    for ent in [Entanglement::Linear, Entanglement::Compatible] {
        let per_layer: Vec<(f64, f64)> = (1..=3usize)
            .map(|l| {
                let rows = select(&batch.records, |r| r.entanglement == ent && r.layers == l);
                assert_eq!(rows.len(), 100);
                (success_rate(&rows), mean_evals(&rows))
            })
            .collect();
        println!("{ent:?}: product {product_evals:.0} evals, layers {per_layer:?}");
        assert!(
            per_layer[2].0 - per_layer[0].0 <= 0.05,
            "{ent:?}: success still climbing: {:?}",
            per_layer
        );
        let mut prev = product_evals;
        for (l, &(_, e)) in per_layer.iter().enumerate() {
            assert!(
                e > prev,
                "{ent:?}: evaluations not increasing at L{}: {e:.0} <= {prev:.0}",
                l + 1
            );
            prev = e;
        }
    }
}

// ---------------------------------------------------------------------------
// 8. Determinism and performance budgets.

#[test]
fn determinism_and_performance_budgets() {
    // Identical stores regardless of worker count.
    let spec = cvqe_lab::bench::ExperimentSpec {
        name: "det-check".into(),
        n: 8,
        graph_kind: GraphKind::UniformRandom,
        edge_counts: vec![6, 14],
        instances: 5,
        ansatz: vec![
            AnsatzChoice::product(),
            AnsatzChoice {
                entanglement: Entanglement::Linear,
                layers: 1,
            },
        ],
        rho: vec![0.1],
        modes: vec![EvalMode::Exact, EvalMode::Shots(500)],
        optimizers: vec![cvqe_lab::bench::OptimizerChoice::Auto],
        beta: 0.1,
        perturbation: 1e-2,
        master_seed: 77,
    };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("w1.ndjson"), dir.path().join("w8.ndjson"));
    write_ndjson(&a, &run_batch(&spec, 1).unwrap().records).unwrap();
    write_ndjson(&b, &run_batch(&spec, 8).unwrap().records).unwrap();
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "worker count changed the output"
    );

    // A single 12-qubit, 3-layer evolution stays under 5 ms.
    let inst = QuboInstance::generate(12, 17, GraphKind::UniformRandom, 3).unwrap();
    let spec12 = build_ansatz(&inst, Entanglement::Linear, 3, 0).unwrap();
    let params = init_params_jittered(&spec12, 1e-2, &mut rng_from_seed(1));
    evolve(&spec12, &params).unwrap(); // warm-up
    let start = Instant::now();
    let reps = 100;
    for _ in 0..reps {
        std::hint::black_box(evolve(&spec12, &params).unwrap());
    }
    let per_call = start.elapsed().as_secs_f64() / reps as f64;
    assert!(per_call < 5e-3, "evolve took {:.3} ms", per_call * 1e3);

    // The density sweep finishes inside its one-hour budget.
    let sweep = density_sweep();
    println!(
        "evolve {:.3} ms, density sweep {:.0}s",
        per_call * 1e3,
        sweep.seconds
    );
    assert!(
        sweep.seconds < 3600.0,
        "density sweep took {:.0}s",
        sweep.seconds
    );
}
