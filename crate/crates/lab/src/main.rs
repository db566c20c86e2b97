//! `cvqe` — command-line entry point for instance generation, single-run
//! solving, batched benchmarking, hardness profiling, and report emission.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cvqe_core::cost::EvalMode;
use cvqe_core::qubo::{GraphKind, QuboInstance};
use cvqe_core::rng::{hash_tag, mix};
use cvqe_core::simulator::{Entanglement, Prepared};

use cvqe_lab::bench::{
    aggregate_by_cell, bin_by_hardness, run_batch, solve_instance, AnsatzChoice, Cell,
    ExperimentSpec, OptimizerChoice,
};
use cvqe_lab::formats::{
    read_instance, read_ndjson, write_aggregates, write_instance, write_ndjson,
    write_results_csv, write_times_csv, AggregateDocument,
};
use cvqe_lab::presets::{preset, PRESET_NAMES};
use cvqe_lab::report::{emit_figure, FIGURES};

#[derive(Parser)]
#[command(name = "cvqe", version, about = "Variational QUBO simulation laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Regular,
    UniformRandom,
}

impl From<KindArg> for GraphKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Regular => GraphKind::Regular,
            KindArg::UniformRandom => GraphKind::UniformRandom,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EntanglementArg {
    None,
    Linear,
    Compatible,
    Random,
}

impl From<EntanglementArg> for Entanglement {
    fn from(e: EntanglementArg) -> Self {
        match e {
            EntanglementArg::None => Entanglement::None,
            EntanglementArg::Linear => Entanglement::Linear,
            EntanglementArg::Compatible => Entanglement::Compatible,
            EntanglementArg::Random => Entanglement::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Auto,
    Spsa,
    NelderMead,
    QuasiNewton,
}

impl From<OptimizerArg> for OptimizerChoice {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Auto => OptimizerChoice::Auto,
            OptimizerArg::Spsa => OptimizerChoice::Spsa,
            OptimizerArg::NelderMead => OptimizerChoice::NelderMead,
            OptimizerArg::QuasiNewton => OptimizerChoice::QuasiNewton,
        }
    }
}

#[derive(Args)]
struct GenParams {
    /// Number of binary variables (graph vertices).
    #[arg(long)]
    n: usize,
    /// Exact edge count of each instance graph.
    #[arg(long, conflicts_with = "density")]
    edges: Option<usize>,
    /// Target density; resolved to the nearest realizable edge count.
    #[arg(long)]
    density: Option<f64>,
    /// Graph family.
    #[arg(long, value_enum, default_value = "uniform-random")]
    kind: KindArg,
    /// How many instances to produce.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed; per-instance seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate problem instances and a manifest.
    Gen {
        #[command(flatten)]
        params: GenParams,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one full variational optimization on an instance file.
    Solve {
        /// Instance JSON file.
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "none")]
        entanglement: EntanglementArg,
        #[arg(long, default_value_t = 0)]
        layers: usize,
        /// CVaR fraction; 1.0 is the plain VQE mean.
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        /// Measurement shots per cost evaluation; omit for exact mode.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, value_enum, default_value = "auto")]
        optimizer: OptimizerArg,
        /// Success cut-off on the ground-manifold overlap.
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Execute a batched experiment from a preset or spec file.
    Bench {
        /// Built-in experiment preset.
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// Experiment spec file (.json or .toml).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory for the result store.
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Worker threads (default: $CVQE_WORKERS or 1).
        #[arg(long)]
        workers: Option<usize>,
        /// Spec overrides, e.g. --set instances=10 --set rho.0=0.25
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        /// Override the spec's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Brute-force instances and emit a hardness table.
    Hardness {
        /// Instance JSON files to analyze (alternative to gen parameters).
        #[arg(long, num_args = 1.., conflicts_with = "n")]
        instances: Vec<PathBuf>,
        #[command(flatten)]
        gen: Option<GenParamsOpt>,
        /// Keep only rows with hardness at least this value.
        #[arg(long)]
        dh_min: Option<f64>,
        /// Keep only rows with hardness at most this value.
        #[arg(long)]
        dh_max: Option<f64>,
        /// Output CSV path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit plot-ready per-figure CSV series from a result store.
    Report {
        /// Result store directory (or a results.ndjson file).
        #[arg(long)]
        store: PathBuf,
        /// Figure preset.
        #[arg(long)]
        figure: String,
        /// Output directory (default: the store directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render a static SVG line plot per series.
        #[arg(long)]
        svg: bool,
    },
}

/// `GenParams` with everything optional, for subcommands where generation
/// is one of two input sources.
#[derive(Args)]
struct GenParamsOpt {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, conflicts_with = "density")]
    edges: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_enum, default_value = "uniform-random")]
    kind: KindArg,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, String> {
    match cmd {
        Cmd::Gen { params, out } => cmd_gen(&params, &out),
        Cmd::Solve {
            instance,
            entanglement,
            layers,
            rho,
            shots,
            optimizer,
            beta,
            seed,
        } => cmd_solve(
            &instance,
            entanglement.into(),
            layers,
            rho,
            shots,
            optimizer.into(),
            beta,
            seed,
        ),
        Cmd::Bench {
            preset,
            spec,
            out,
            workers,
            sets,
            seed,
        } => cmd_bench(preset.as_deref(), spec.as_deref(), &out, workers, &sets, seed),
        Cmd::Hardness {
            instances,
            gen,
            dh_min,
            dh_max,
            out,
        } => cmd_hardness(&instances, gen, dh_min, dh_max, out.as_deref()),
        Cmd::Report {
            store,
            figure,
            out,
            svg,
        } => cmd_report(&store, &figure, out.as_deref(), svg),
    }
}

/// Resolves a target density to the nearest realizable edge count.
fn resolve_edges(
    n: usize,
    edges: Option<usize>,
    density: Option<f64>,
) -> Result<(usize, bool), String> {
    let max = n * n.saturating_sub(1) / 2;
    match (edges, density) {
        (Some(e), None) => Ok((e, false)),
        (None, Some(d)) => {
            if !(0.0..=1.0).contains(&d) {
                return Err(format!("density {d} outside [0, 1]"));
            }
            Ok((((d * max as f64).round() as usize).min(max), true))
        }
        (None, None) => Err("one of --edges or --density is required".into()),
        (Some(_), Some(_)) => Err("--edges conflicts with --density".into()),
    }
}

fn cmd_gen(params: &GenParams, out: &Path) -> Result<ExitCode, String> {
    let (edges, resolved) = resolve_edges(params.n, params.edges, params.density)?;
    let max = params.n * params.n.saturating_sub(1) / 2;
    if resolved {
        println!(
            "density {} resolved to {edges} edges (realized {:.6})",
            params.density.unwrap(),
            edges as f64 / max as f64
        );
    }
    std::fs::create_dir_all(out).map_err(|e| format!("creating {}: {e}", out.display()))?;

    #[derive(serde::Serialize)]
    struct ManifestEntry {
        index: usize,
        file: String,
        seed: u64,
        density: f64,
    }
    #[derive(serde::Serialize)]
    struct Manifest {
        n: usize,
        graph_kind: GraphKind,
        edges: usize,
        count: usize,
        master_seed: u64,
        instances: Vec<ManifestEntry>,
    }

    let mut entries = Vec::new();
    for index in 0..params.count {
        let seed = mix(params.seed, &[hash_tag("gen"), index as u64]);
        let inst = QuboInstance::generate(params.n, edges, params.kind.into(), seed)
            .map_err(|e| e.to_string())?;
        let file = format!("inst-{index:04}.json");
        write_instance(&out.join(&file), &inst).map_err(|e| e.to_string())?;
        entries.push(ManifestEntry {
            index,
            file,
            seed,
            density: inst.density().map_err(|e| e.to_string())?,
        });
    }
    let manifest = Manifest {
        n: params.n,
        graph_kind: params.kind.into(),
        edges,
        count: params.count,
        master_seed: params.seed,
        instances: entries,
    };
    let mut body = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    body.push('\n');
    std::fs::write(out.join("manifest.json"), body)
        .map_err(|e| format!("writing manifest: {e}"))?;
    println!("wrote {} instance(s) to {}", params.count, out.display());
    Ok(ExitCode::SUCCESS)
}

/// The most probable bitstring of a prepared state, without materializing
/// `2^n` probabilities for separable states.
fn top_bitstring(state: &Prepared) -> (u64, f64) {
    match state {
        Prepared::Product(p) => {
            let mut x = 0u64;
            for q in 0..p.n() {
                if p.probability_one(q) > 0.5 {
                    x |= 1 << q;
                }
            }
            (x, state.probability(x))
        }
        Prepared::Full(s) => {
            let mut best = (0u64, f64::MIN);
            for (i, a) in s.amplitudes().iter().enumerate() {
                let p = a * a;
                if p > best.1 {
                    best = (i as u64, p);
                }
            }
            best
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    instance: &Path,
    entanglement: Entanglement,
    layers: usize,
    rho: f64,
    shots: Option<u64>,
    optimizer: OptimizerChoice,
    beta: f64,
    seed: u64,
) -> Result<ExitCode, String> {
    let inst = read_instance(instance).map_err(|e| e.to_string())?;
    let mode = match shots {
        Some(k) => EvalMode::Shots(k),
        None => EvalMode::Exact,
    };
    let cell = Cell {
        edges: inst.edges().len(),
        ansatz: AnsatzChoice {
            entanglement,
            layers,
        },
        rho,
        mode,
        optimizer: optimizer.resolve(mode),
    };
    let (record, params) = solve_instance(&inst, &cell, beta, 1e-2, seed)?;
    let spec = cvqe_core::simulator::build_ansatz(
        &inst,
        entanglement,
        layers,
        mix(seed, &[hash_tag("pairs")]),
    )
    .map_err(|e| e.to_string())?;
    let state = cvqe_core::simulator::prepare(&spec, &params).map_err(|e| e.to_string())?;
    let (best_x, best_p) = top_bitstring(&state);

    let objective = if rho == 1.0 { "VQE" } else { "CVaR-VQE" };
    println!("instance: {} (n={}, density={:.3})", instance.display(), inst.n(), record.density);
    println!(
        "objective: {objective} (rho = {rho}), {}",
        match mode {
            EvalMode::Exact => "exact evaluation".to_string(),
            EvalMode::Shots(k) => format!("{k} shots per evaluation"),
        }
    );
    println!("optimizer: {}", cvqe_lab::bench::optimizer_label(cell.optimizer));
    println!("final cost: {}", record.final_cost);
    println!("evaluations: {}", record.evaluations);
    println!(
        "best bitstring: {best_x:0width$b} (probability {best_p:.4}, energy {})",
        inst.energy(best_x),
        width = inst.n()
    );
    println!("ground-manifold overlap: {:.4} (beta = {beta})", record.overlap);
    println!("success: {}", if record.success == 1 { "yes" } else { "no" });
    Ok(if record.success == 1 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

/// Applies `--set key=value` overrides onto the JSON form of a spec.
/// Dotted paths traverse objects and array indices; values parse as JSON
/// with a fallback to plain strings.
fn apply_overrides(root: &mut serde_json::Value, sets: &[String]) -> Result<(), String> {
    for s in sets {
        let (path, raw) = s
            .split_once('=')
            .ok_or_else(|| format!("override `{s}` is not KEY=VALUE"))?;
        let parsed: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let parts: Vec<&str> = path.split('.').collect();
        let (&leaf, walk) = parts.split_last().expect("split always yields parts");
        let mut cur = &mut *root;
        for part in walk {
            cur = match cur {
                serde_json::Value::Object(map) => map
                    .get_mut(*part)
                    .ok_or_else(|| format!("unknown spec key `{part}` in `{path}`"))?,
                serde_json::Value::Array(arr) => {
                    let idx: usize = part
                        .parse()
                        .map_err(|_| format!("`{part}` is not an array index in `{path}`"))?;
                    arr.get_mut(idx)
                        .ok_or_else(|| format!("index {idx} out of range in `{path}`"))?
                }
                _ => return Err(format!("`{path}` does not address a spec field")),
            };
        }
        match cur {
            serde_json::Value::Object(map) => {
                map.insert(leaf.to_string(), parsed);
            }
            serde_json::Value::Array(arr) => {
                let idx: usize = leaf
                    .parse()
                    .map_err(|_| format!("`{leaf}` is not an array index in `{path}`"))?;
                *arr.get_mut(idx)
                    .ok_or_else(|| format!("index {idx} out of range in `{path}`"))? = parsed;
            }
            _ => return Err(format!("`{path}` does not address a spec field")),
        }
    }
    Ok(())
}

fn load_spec(
    preset_name: Option<&str>,
    spec_path: Option<&Path>,
    sets: &[String],
    seed: Option<u64>,
) -> Result<ExperimentSpec, String> {
    let mut value = match (preset_name, spec_path) {
        (Some(name), None) => serde_json::to_value(preset(name).ok_or_else(|| {
            format!("unknown preset `{name}` (available: {})", PRESET_NAMES.join(", "))
        })?)
        .expect("spec serialization"),
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            if path.extension().is_some_and(|e| e == "toml") {
                let t: toml::Value =
                    toml::from_str(&body).map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::to_value(t).expect("toml conversion")
            } else {
                serde_json::from_str(&body).map_err(|e| format!("{}: {e}", path.display()))?
            }
        }
        _ => return Err("exactly one of --preset or --spec is required".into()),
    };
    apply_overrides(&mut value, sets)?;
    if let Some(seed) = seed {
        value["master_seed"] = serde_json::Value::from(seed);
    }
    let spec: ExperimentSpec =
        serde_json::from_value(value).map_err(|e| format!("invalid spec: {e}"))?;
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn default_workers() -> usize {
    std::env::var("CVQE_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1)
}

fn cmd_bench(
    preset_name: Option<&str>,
    spec_path: Option<&Path>,
    out: &Path,
    workers: Option<usize>,
    sets: &[String],
    seed: Option<u64>,
) -> Result<ExitCode, String> {
    let spec = load_spec(preset_name, spec_path, sets, seed)?;
    let workers = workers.unwrap_or_else(default_workers);
    std::fs::create_dir_all(out).map_err(|e| format!("creating {}: {e}", out.display()))?;

    // Echo the fully-resolved spec so the run can be reproduced from the
    // output directory alone.
    let mut echo = serde_json::to_string_pretty(&spec).expect("spec serialization");
    echo.push('\n');
    std::fs::write(out.join("spec.json"), echo).map_err(|e| format!("writing spec echo: {e}"))?;

    let batch = run_batch(&spec, workers).map_err(|e| e.to_string())?;
    write_ndjson(&out.join("results.ndjson"), &batch.records).map_err(|e| e.to_string())?;
    write_times_csv(&out.join("times.csv"), &batch.records, &batch.wall_times)
        .map_err(|e| e.to_string())?;
    write_results_csv(&out.join("results.csv"), &batch.records, &batch.wall_times)
        .map_err(|e| e.to_string())?;
    if !batch.failures.is_empty() {
        let mut body = String::new();
        for f in &batch.failures {
            body.push_str(&serde_json::to_string(f).expect("failure serialization"));
            body.push('\n');
        }
        std::fs::write(out.join("failures.ndjson"), body)
            .map_err(|e| format!("writing failures: {e}"))?;
    }

    let cells = aggregate_by_cell(&batch.records, spec.master_seed);
    let bins = bin_by_hardness(&batch.records, spec.master_seed);
    write_aggregates(
        &out.join("aggregates.json"),
        &AggregateDocument {
            cells: cells.clone(),
            hardness_bins: bins,
        },
    )
    .map_err(|e| e.to_string())?;

    println!(
        "{:<44} {:>5}  {:>22}  {:>24}",
        "cell", "count", "success [95% CI]", "evaluations [95% CI]"
    );
    for stats in &cells {
        println!(
            "{:<44} {:>5}  {:>6.3} [{:.3}, {:.3}]  {:>8.1} [{:.1}, {:.1}]",
            stats.key,
            stats.count,
            stats.success_rate.point,
            stats.success_rate.lo,
            stats.success_rate.hi,
            stats.mean_evaluations.point,
            stats.mean_evaluations.lo,
            stats.mean_evaluations.hi,
        );
    }
    if !batch.failures.is_empty() {
        println!(
            "{} instance(s) failed and were quarantined (see failures.ndjson)",
            batch.failures.len()
        );
    }
    println!("result store written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_hardness(
    files: &[PathBuf],
    gen: Option<GenParamsOpt>,
    dh_min: Option<f64>,
    dh_max: Option<f64>,
    out: Option<&Path>,
) -> Result<ExitCode, String> {
    let mut instances: Vec<QuboInstance> = Vec::new();
    if !files.is_empty() {
        for f in files {
            instances.push(read_instance(f).map_err(|e| e.to_string())?);
        }
    } else if let Some(g) = gen {
        let n = g.n.ok_or("either --instances or --n is required")?;
        let (edges, _) = resolve_edges(n, g.edges, g.density)?;
        for index in 0..g.count {
            let seed = mix(g.seed, &[hash_tag("gen"), index as u64]);
            instances.push(
                QuboInstance::generate(n, edges, g.kind.into(), seed)
                    .map_err(|e| e.to_string())?,
            );
        }
    } else {
        return Err("either --instances or generation parameters are required".into());
    }

    let mut rows = vec![
        "seed,density,ground_energy,ground_degeneracy,first_excited_degeneracy,d_h".to_string(),
    ];
    for inst in &instances {
        let report = inst.brute_force_spectrum().map_err(|e| e.to_string())?;
        let d_h = report.min_hamming_distance();
        if dh_min.is_some_and(|m| d_h < m) || dh_max.is_some_and(|m| d_h > m) {
            continue;
        }
        rows.push(format!(
            "{},{},{},{},{},{}",
            inst.seed(),
            inst.density().map_err(|e| e.to_string())?,
            report.ground_energy,
            report.ground_manifold.len(),
            report.first_excited_manifold.len(),
            d_h,
        ));
    }
    let body = rows.join("\n") + "\n";
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| format!("writing {}: {e}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(
    store: &Path,
    figure: &str,
    out: Option<&Path>,
    svg: bool,
) -> Result<ExitCode, String> {
    let store_file = if store.is_dir() {
        store.join("results.ndjson")
    } else {
        store.to_path_buf()
    };
    let records = read_ndjson(&store_file).map_err(|e| e.to_string())?;
    let out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| store_file.parent().unwrap_or(Path::new(".")).to_path_buf());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| format!("creating {}: {e}", out_dir.display()))?;
    let files = emit_figure(figure, &records, &out_dir, svg).map_err(|e| {
        format!("{e} (figures: {})", FIGURES.join(", "))
    })?;
    for f in &files {
        println!("{}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}
