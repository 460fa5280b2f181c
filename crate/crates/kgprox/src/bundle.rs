//! Report bundle: the tables and summary of one pipeline run as a directory
//! of CSV and JSON files.

use std::path::{Path, PathBuf};

use kgprox_core::pipeline::{AnalysisReport, Experiment, ExperimentConfig, Provenance};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{create, write_json};
use crate::manifest::RunManifest;

pub const PER_FOCAL: &str = "per_focal.csv";
pub const PAIRWISE: &str = "pairwise.csv";
pub const SUMMARY: &str = "summary.json";
pub const BOXPLOT: &str = "boxplot.csv";
pub const PROVENANCE: &str = "provenance.json";
/// Only written by `diagnosis_compare`.
pub const PROXIMITY: &str = "proximity.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceFile {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub manifest: RunManifest,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| Error::io(path, e.into());
    out.write_record(header).map_err(io)?;
    for r in rows {
        out.write_record(&r).map_err(io)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes the bundle and returns the paths written.
pub fn write_bundle(dir: &Path, report: &AnalysisReport, manifest: RunManifest) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    write_csv(
        &path(PER_FOCAL),
        &["focal", "name", "module_size", "lcc", "mu", "sigma", "z"],
        report.per_focal.iter().map(|r| {
            vec![
                r.focal.to_string(),
                r.name.clone(),
                r.module_size.to_string(),
                r.lcc.to_string(),
                cell(r.mu),
                cell(r.sigma),
                cell(r.z),
            ]
        }),
    )?;
    write_csv(
        &path(PAIRWISE),
        &["a", "b", "co_count", "rr", "semsim", "d_ab", "s_ab", "a_name", "b_name"],
        report.pairwise.iter().map(|r| {
            vec![
                r.a.to_string(),
                r.b.to_string(),
                r.co_count.to_string(),
                cell(r.rr),
                cell(r.semsim),
                cell(r.d_ab),
                cell(r.s_ab),
                r.a_name.clone(),
                r.b_name.clone(),
            ]
        }),
    )?;
    write_json(&path(SUMMARY), &report.summary)?;
    write_csv(
        &path(BOXPLOT),
        &["group", "metric", "n", "min", "q1", "median", "q3", "max"],
        report.summary.boxplots.iter().map(|b| {
            let s = b.stats;
            vec![
                b.group.as_str().to_string(),
                b.metric.clone(),
                s.n.to_string(),
                s.min.to_string(),
                s.q1.to_string(),
                s.median.to_string(),
                s.q3.to_string(),
                s.max.to_string(),
            ]
        }),
    )?;
    if report.config.experiment == Experiment::DiagnosisCompare {
        write_csv(
            &path(PROXIMITY),
            &["group", "disease", "symptom", "disease_name", "symptom_name", "module_size", "d", "mu", "sigma", "z"],
            report.proximity.iter().map(|r| {
                vec![
                    r.group.as_str().to_string(),
                    r.disease.to_string(),
                    r.symptom.to_string(),
                    r.disease_name.clone(),
                    r.symptom_name.clone(),
                    r.module_size.to_string(),
                    cell(r.d),
                    cell(r.mu),
                    cell(r.sigma),
                    cell(r.z),
                ]
            }),
        )?;
    }
    write_json(
        &path(PROVENANCE),
        &ProvenanceFile {
            provenance: report.provenance.clone(),
            config: report.config.clone(),
            manifest,
        },
    )?;
    Ok(written)
}
