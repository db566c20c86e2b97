//! Plot-ready data emission from a result store: per-figure CSV series
//! (x = density / layers / shots / hardness bin; y = success rate or mean
//! evaluations with CI columns) and optional static SVG line plots.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cvqe_core::cost::EvalMode;
use cvqe_core::rng::{hash_tag, mix, rng_from_seed};

use crate::bench::{
    bin_by_hardness, bootstrap_ci, entanglement_label, mode_label, optimizer_label, Ci,
    InstanceRecord, DEFAULT_RESAMPLES,
};
use crate::formats::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("result store is missing data for this figure: {0}")]
    MissingData(&'static str),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("unknown figure `{0}`")]
    UnknownFigure(String),
}

pub const FIGURES: [&str; 5] = ["fig5", "fig7", "fig8", "fig9", "overlap-hist"];

/// Emits the series files of one figure into `out`, returning the paths
/// written. `svg` additionally renders a line plot next to each CSV.
pub fn emit_figure(
    figure: &str,
    records: &[InstanceRecord],
    out: &Path,
    svg: bool,
) -> Result<Vec<PathBuf>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::MissingData("store has no records"));
    }
    match figure {
        "fig5" => fig5(records, out, svg),
        "fig7" => fig7(records, out, svg),
        "fig8" => fig8(records, out, svg),
        "fig9" => fig9(records, out),
        "overlap-hist" => overlap_hist(records, out),
        other => Err(ReportError::UnknownFigure(other.to_string())),
    }
}

#[derive(Clone, Copy)]
enum Metric {
    Success,
    Evaluations,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::Success => "success",
            Metric::Evaluations => "evaluations",
        }
    }

    fn values(self, group: &[&InstanceRecord]) -> Vec<f64> {
        match self {
            Metric::Success => group.iter().map(|r| f64::from(r.success)).collect(),
            Metric::Evaluations => group.iter().map(|r| r.evaluations as f64).collect(),
        }
    }
}

fn ci_for(values: &[f64], label: &str) -> Ci {
    if values.len() < 2 {
        let point = values[0];
        return Ci {
            lo: point,
            point,
            hi: point,
        };
    }
    let mut rng = rng_from_seed(mix(0x5e71e5, &[hash_tag(label)]));
    bootstrap_ci(values, 0.95, DEFAULT_RESAMPLES, &mut rng).expect("bootstrap preconditions")
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| FormatError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let fail = |e: csv::Error| FormatError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.flush().map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn ansatz_key(r: &InstanceRecord) -> String {
    format!("{}-L{}", entanglement_label(r.entanglement), r.layers)
}

/// Success/evaluations against density, one file per (ansatz, metric),
/// with the CVaR fraction as a row key.
fn fig5(records: &[InstanceRecord], out: &Path, svg: bool) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = Vec::new();
    let ansaetze: Vec<String> = {
        let mut keys: Vec<String> = records.iter().map(ansatz_key).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    let densities: Vec<u64> = unique_sorted(records, |r| r.density.to_bits());
    if densities.len() < 2 {
        return Err(ReportError::MissingData("fig5 needs a density sweep"));
    }
    for ansatz in &ansaetze {
        for metric in [Metric::Success, Metric::Evaluations] {
            let mut rows = Vec::new();
            let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for &dbits in &densities {
                let density = f64::from_bits(dbits);
                let mut rhos: Vec<u64> = unique_sorted(records, |r| r.rho.to_bits());
                rhos.reverse(); // rho = 1 (VQE) first
                for rbits in rhos {
                    let rho = f64::from_bits(rbits);
                    let group: Vec<&InstanceRecord> = records
                        .iter()
                        .filter(|r| {
                            ansatz_key(r) == *ansatz
                                && r.density.to_bits() == dbits
                                && r.rho.to_bits() == rbits
                        })
                        .collect();
                    if group.is_empty() {
                        continue;
                    }
                    let ci = ci_for(
                        &metric.values(&group),
                        &format!("fig5-{ansatz}-{}-{density}-{rho}", metric.label()),
                    );
                    rows.push(vec![
                        density.to_string(),
                        rho.to_string(),
                        ci.point.to_string(),
                        ci.lo.to_string(),
                        ci.hi.to_string(),
                    ]);
                    series
                        .entry(format!("rho={rho}"))
                        .or_default()
                        .push((density, ci.point));
                }
            }
            let path = out.join(format!("fig5-{ansatz}-{}.csv", metric.label()));
            write_csv(&path, &["density", "rho", "y", "lo", "hi"], &rows)
                .map_err(ReportError::Format)?;
            if svg {
                written.push(write_svg(
                    &out.join(format!("fig5-{ansatz}-{}.svg", metric.label())),
                    &series,
                )?);
            }
            written.push(path);
        }
    }
    Ok(written)
}

/// Success/evaluations against layer count, one series per entanglement.
fn fig7(records: &[InstanceRecord], out: &Path, svg: bool) -> Result<Vec<PathBuf>, ReportError> {
    let layer_counts: Vec<u64> = unique_sorted(records, |r| r.layers as u64);
    if layer_counts.len() < 2 {
        return Err(ReportError::MissingData("fig7 needs a layer sweep"));
    }
    let mut written = Vec::new();
    for metric in [Metric::Success, Metric::Evaluations] {
        let mut rows = Vec::new();
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        let ents: Vec<String> = {
            let mut keys: Vec<String> = records
                .iter()
                .map(|r| entanglement_label(r.entanglement).to_string())
                .collect();
            keys.sort();
            keys.dedup();
            keys
        };
        for ent in &ents {
            for &layers in &layer_counts {
                let group: Vec<&InstanceRecord> = records
                    .iter()
                    .filter(|r| {
                        entanglement_label(r.entanglement) == ent && r.layers as u64 == layers
                    })
                    .collect();
                if group.is_empty() {
                    continue;
                }
                let ci = ci_for(
                    &metric.values(&group),
                    &format!("fig7-{ent}-{layers}-{}", metric.label()),
                );
                rows.push(vec![
                    layers.to_string(),
                    ent.clone(),
                    ci.point.to_string(),
                    ci.lo.to_string(),
                    ci.hi.to_string(),
                ]);
                series
                    .entry(ent.clone())
                    .or_default()
                    .push((layers as f64, ci.point));
            }
        }
        let path = out.join(format!("fig7-{}.csv", metric.label()));
        write_csv(&path, &["layers", "entanglement", "y", "lo", "hi"], &rows)
            .map_err(ReportError::Format)?;
        if svg {
            written.push(write_svg(
                &out.join(format!("fig7-{}.svg", metric.label())),
                &series,
            )?);
        }
        written.push(path);
    }
    Ok(written)
}

/// Success/evaluations per (observation mode, optimizer).
fn fig8(records: &[InstanceRecord], out: &Path, svg: bool) -> Result<Vec<PathBuf>, ReportError> {
    let modes: Vec<String> = {
        let mut keys: Vec<String> = records.iter().map(|r| mode_label(r.mode)).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    if modes.len() < 2 {
        return Err(ReportError::MissingData("fig8 needs an observation-mode sweep"));
    }
    let mut written = Vec::new();
    for metric in [Metric::Success, Metric::Evaluations] {
        let mut rows = Vec::new();
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        let opts: Vec<String> = {
            let mut keys: Vec<String> = records
                .iter()
                .map(|r| optimizer_label(r.optimizer).to_string())
                .collect();
            keys.sort();
            keys.dedup();
            keys
        };
        for opt in &opts {
            for mode in &modes {
                let group: Vec<&InstanceRecord> = records
                    .iter()
                    .filter(|r| {
                        optimizer_label(r.optimizer) == opt && mode_label(r.mode) == *mode
                    })
                    .collect();
                if group.is_empty() {
                    continue;
                }
                let ci = ci_for(
                    &metric.values(&group),
                    &format!("fig8-{opt}-{mode}-{}", metric.label()),
                );
                // Exact evaluation is the infinite-shot limit; place it at
                // shot count 0 on the x axis.
                let shots = match group[0].mode {
                    EvalMode::Exact => 0,
                    EvalMode::Shots(k) => k,
                };
                rows.push(vec![
                    mode.clone(),
                    shots.to_string(),
                    opt.clone(),
                    ci.point.to_string(),
                    ci.lo.to_string(),
                    ci.hi.to_string(),
                ]);
                series
                    .entry(opt.clone())
                    .or_default()
                    .push((shots as f64, ci.point));
            }
        }
        let path = out.join(format!("fig8-{}.csv", metric.label()));
        write_csv(
            &path,
            &["mode", "shots", "optimizer", "y", "lo", "hi"],
            &rows,
        )
        .map_err(ReportError::Format)?;
        if svg {
            written.push(write_svg(
                &out.join(format!("fig8-{}.svg", metric.label())),
                &series,
            )?);
        }
        written.push(path);
    }
    Ok(written)
}

/// Success per hardness bin, split by ansatz.
fn fig9(records: &[InstanceRecord], out: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let ansaetze: Vec<String> = {
        let mut keys: Vec<String> = records.iter().map(ansatz_key).collect();
        keys.sort();
        keys.dedup();
        keys
    };
    let mut rows = Vec::new();
    for ansatz in &ansaetze {
        let subset: Vec<InstanceRecord> = records
            .iter()
            .filter(|r| ansatz_key(r) == *ansatz)
            .cloned()
            .collect();
        for bin in bin_by_hardness(&subset, 0x5e71e5) {
            let (y, lo, hi) = match &bin.stats {
                Some(s) => (
                    s.success_rate.point.to_string(),
                    s.success_rate.lo.to_string(),
                    s.success_rate.hi.to_string(),
                ),
                None => ("".into(), "".into(), "".into()),
            };
            rows.push(vec![
                ansatz.clone(),
                bin.label,
                bin.lo.to_string(),
                bin.hi.to_string(),
                bin.count.to_string(),
                y,
                lo,
                hi,
            ]);
        }
    }
    let path = out.join("fig9-success.csv");
    write_csv(
        &path,
        &["ansatz", "bin", "bin_lo", "bin_hi", "count", "y", "lo", "hi"],
        &rows,
    )
    .map_err(ReportError::Format)?;
    Ok(vec![path])
}

/// Ten-bin histogram of final ground-manifold overlaps, per (ansatz, rho).
fn overlap_hist(records: &[InstanceRecord], out: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry(format!("{}-rho{}", ansatz_key(r), r.rho))
            .or_default()
            .push(r.overlap);
    }
    let mut rows = Vec::new();
    for (key, overlaps) in &groups {
        let mut counts = [0usize; 10];
        for &v in overlaps {
            let bin = ((v * 10.0) as usize).min(9);
            counts[bin] += 1;
        }
        for (bin, &count) in counts.iter().enumerate() {
            rows.push(vec![
                key.clone(),
                format!("{:.1}", bin as f64 / 10.0),
                format!("{:.1}", (bin + 1) as f64 / 10.0),
                count.to_string(),
                (count as f64 / overlaps.len() as f64).to_string(),
            ]);
        }
    }
    let path = out.join("overlap-hist.csv");
    write_csv(
        &path,
        &["cell", "bin_lo", "bin_hi", "count", "fraction"],
        &rows,
    )
    .map_err(ReportError::Format)?;
    Ok(vec![path])
}

fn unique_sorted<K: Ord + Copy>(records: &[InstanceRecord], key: impl Fn(&InstanceRecord) -> K) -> Vec<K> {
    let mut keys: Vec<K> = records.iter().map(key).collect();
    keys.sort();
    keys.dedup();
    keys
}

/// A minimal static line plot: one polyline per series over shared axes.
fn write_svg(
    path: &Path,
    series: &BTreeMap<String, Vec<(f64, f64)>>,
) -> Result<PathBuf, ReportError> {
    let (w, h, margin) = (640.0, 400.0, 50.0);
    let points: Vec<(f64, f64)> = series.values().flatten().copied().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];
    let mut body = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    body.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = margin,
        b = h - margin,
        r = w - margin,
        t = margin,
    ));
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        let path_points: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        body.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path_points.join(" ")
        ));
        body.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\" font-size=\"12\">{label}</text>\n",
            w - margin + 4.0 - 100.0,
            margin + 16.0 * i as f64,
        ));
    }
    body.push_str("</svg>\n");
    std::fs::write(path, body).map_err(|e| {
        ReportError::Format(FormatError::Io {
            path: path.display().to_string(),
            source: e,
        })
    })?;
    Ok(path.to_path_buf())
}
