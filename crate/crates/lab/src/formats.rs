//! On-disk formats: instance JSON, spectrum reports, NDJSON result stores,
//! aggregate documents, and CSV export with a stable column order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use cvqe_core::qubo::{GraphKind, QuboInstance, SpectrumReport};

use crate::bench::{entanglement_label, mode_label, optimizer_label, BinAggregate, GroupStats, InstanceRecord};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid instance in {path}: {message}")]
    BadInstance { path: String, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Canonical instance file: `{n, graph_kind, seed, edges: [[i, j, w], ...]}`
/// with `i < j` and edges sorted lexicographically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub graph_kind: GraphKind,
    pub seed: u64,
    pub edges: Vec<(usize, usize, i64)>,
}

impl From<&QuboInstance> for InstanceFile {
    fn from(inst: &QuboInstance) -> Self {
        Self {
            n: inst.n(),
            graph_kind: inst.graph_kind(),
            seed: inst.seed(),
            edges: inst.edges().to_vec(),
        }
    }
}

pub fn write_instance(path: &Path, inst: &QuboInstance) -> Result<(), FormatError> {
    let file = InstanceFile::from(inst);
    let mut body = serde_json::to_string_pretty(&file).expect("instance serialization");
    body.push('\n');
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}

pub fn read_instance(path: &Path) -> Result<QuboInstance, FormatError> {
    let body = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: InstanceFile = serde_json::from_str(&body).map_err(|e| FormatError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    QuboInstance::new(file.n, file.graph_kind, file.seed, file.edges).map_err(|e| {
        FormatError::BadInstance {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    })
}

/// Spectrum serialization with manifolds as lowercase hex bit patterns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub n: usize,
    pub ground_energy: i64,
    pub ground_manifold: Vec<String>,
    pub first_excited_energy: i64,
    pub first_excited_manifold: Vec<String>,
    pub min_hamming_distance: f64,
}

fn hex_bits(x: u64, n: usize) -> String {
    format!("{x:0width$x}", width = n.div_ceil(4))
}

impl SpectrumFile {
    pub fn from_report(report: &SpectrumReport) -> Self {
        let hex = |xs: &[u64]| xs.iter().map(|&x| hex_bits(x, report.n)).collect();
        Self {
            n: report.n,
            ground_energy: report.ground_energy,
            ground_manifold: hex(&report.ground_manifold),
            first_excited_energy: report.first_excited_energy,
            first_excited_manifold: hex(&report.first_excited_manifold),
            min_hamming_distance: report.min_hamming_distance(),
        }
    }
}

/// One record per line, in batch order; wall times are segregated into
/// [`write_times_csv`] so this file is deterministic.
pub fn write_ndjson(path: &Path, records: &[InstanceRecord]) -> Result<(), FormatError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for rec in records {
        serde_json::to_writer(&mut w, rec).map_err(|e| FormatError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_ndjson(path: &Path) -> Result<Vec<InstanceRecord>, FormatError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|e| FormatError::Parse {
                path: path.display().to_string(),
                message: format!("line {}: {e}", lineno + 1),
            })?,
        );
    }
    Ok(records)
}

const CSV_HEADER: [&str; 13] = [
    "edges",
    "entanglement",
    "layers",
    "rho",
    "mode",
    "optimizer",
    "instance",
    "density",
    "d_h",
    "success",
    "overlap",
    "evaluations",
    "final_cost",
];

/// Full results table; `wall_times` must align with `records`.
pub fn write_results_csv(
    path: &Path,
    records: &[InstanceRecord],
    wall_times: &[f64],
) -> Result<(), FormatError> {
    assert_eq!(records.len(), wall_times.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| FormatError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    header.push("wall_time");
    let write = |w: &mut csv::Writer<File>, row: Vec<String>| {
        w.write_record(row).map_err(|e| FormatError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    };
    write(&mut w, header.iter().map(|s| s.to_string()).collect())?;
    for (rec, &dt) in records.iter().zip(wall_times) {
        let mut row = record_row(rec);
        row.push(format!("{dt:.6}"));
        write(&mut w, row)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn record_row(rec: &InstanceRecord) -> Vec<String> {
    vec![
        rec.edges.to_string(),
        entanglement_label(rec.entanglement).to_string(),
        rec.layers.to_string(),
        rec.rho.to_string(),
        mode_label(rec.mode),
        optimizer_label(rec.optimizer).to_string(),
        rec.instance.to_string(),
        rec.density.to_string(),
        rec.d_h.to_string(),
        rec.success.to_string(),
        rec.overlap.to_string(),
        rec.evaluations.to_string(),
        rec.final_cost.to_string(),
    ]
}

/// Wall-time sidecar: the non-deterministic column lives here, keyed by
/// the same cell/instance coordinates as the NDJSON store.
pub fn write_times_csv(
    path: &Path,
    records: &[InstanceRecord],
    wall_times: &[f64],
) -> Result<(), FormatError> {
    assert_eq!(records.len(), wall_times.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| FormatError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    w.write_record(["cell", "instance", "wall_time"])
        .map_err(|e| FormatError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    for (rec, &dt) in records.iter().zip(wall_times) {
        w.write_record([
            rec.cell_key(),
            rec.instance.to_string(),
            format!("{dt:.6}"),
        ])
        .map_err(|e| FormatError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// The aggregate document bundled with a result store.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateDocument {
    pub cells: Vec<GroupStats>,
    pub hardness_bins: Vec<BinAggregate>,
}

pub fn write_aggregates(path: &Path, doc: &AggregateDocument) -> Result<(), FormatError> {
    let mut body = serde_json::to_string_pretty(doc).expect("aggregate serialization");
    body.push('\n');
    std::fs::write(path, body).map_err(|e| io_err(path, e))
}
