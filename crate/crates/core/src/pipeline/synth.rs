//! Synthetic knowledge graphs with planted disease clusters.
//!
//! Cluster `c` pairs disease `c` with a block of symptoms and a block of
//! drugs. Each planted link appears with `within_prob`; every other legal
//! disease pair gets a link with `background_prob`. Optional hub symptoms
//! attach to several random diseases, which makes them broadly shared.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ingest_triples, EntityType, IngestOptions, KnowledgeGraph, Predicate, RawRow};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticKgConfig {
    pub diseases: usize,
    pub symptoms: usize,
    pub drugs: usize,
    pub risk_factors: usize,
    pub patients: usize,
    pub severities: usize,
    pub clusters: usize,
    /// Symptoms planted per cluster.
    pub cluster_size: usize,
    /// Drugs planted per cluster.
    pub drug_cluster_size: usize,
    pub within_prob: f64,
    pub background_prob: f64,
    /// Planted symptom links use `primary_diagnosis` instead of `diagnosis`.
    pub tiered_primary: bool,
    /// The last `hub_symptoms` symptoms each diagnose `hub_degree` random
    /// diseases and take no background links.
    pub hub_symptoms: usize,
    pub hub_degree: usize,
    /// Chance that a planted symptom is also a differential diagnosis of the
    /// next cluster's disease.
    pub differential_prob: f64,
    pub seed: u64,
}

impl Default for SyntheticKgConfig {
    fn default() -> Self {
        SyntheticKgConfig {
            diseases: 12,
            symptoms: 150,
            drugs: 30,
            risk_factors: 8,
            patients: 0,
            severities: 0,
            clusters: 4,
            cluster_size: 8,
            drug_cluster_size: 4,
            within_prob: 0.8,
            background_prob: 0.05,
            tiered_primary: false,
            hub_symptoms: 0,
            hub_degree: 4,
            differential_prob: 0.0,
            seed: 7,
        }
    }
}

impl SyntheticKgConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        for (name, p) in [
            ("within_prob", self.within_prob),
            ("background_prob", self.background_prob),
            ("differential_prob", self.differential_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.clusters > self.diseases {
            return bad(format!("{} clusters need as many diseases, have {}", self.clusters, self.diseases));
        }
        let planted = self.clusters * self.cluster_size;
        if planted + self.hub_symptoms > self.symptoms {
            return bad(format!(
                "{planted} planted and {} hub symptoms exceed the {} symptoms",
                self.hub_symptoms, self.symptoms
            ));
        }
        if self.clusters * self.drug_cluster_size > self.drugs {
            return bad(format!(
                "{} planted drugs exceed the {} drugs",
                self.clusters * self.drug_cluster_size,
                self.drugs
            ));
        }
        if self.hub_symptoms > 0 && self.hub_degree > self.diseases {
            return bad(format!("hub_degree {} exceeds the {} diseases", self.hub_degree, self.diseases));
        }
        if (self.patients > 0 || self.severities > 0) && self.diseases == 0 {
            return bad("patients and severities need at least one disease".into());
        }
        Ok(())
    }

    pub fn total_nodes(&self) -> usize {
        self.diseases + self.symptoms + self.drugs + self.risk_factors + self.patients + self.severities
    }

    fn cluster_of_symptom(&self, s: usize) -> Option<usize> {
        (self.cluster_size > 0 && s < self.clusters * self.cluster_size).then(|| s / self.cluster_size)
    }

    fn cluster_of_drug(&self, r: usize) -> Option<usize> {
        (self.drug_cluster_size > 0 && r < self.clusters * self.drug_cluster_size)
            .then(|| r / self.drug_cluster_size)
    }
}

fn name(t: EntityType, i: usize) -> String {
    format!("{}_{i:03}", t.as_str())
}

fn row(head: (EntityType, usize), predicate: Predicate, tail: (EntityType, usize)) -> RawRow {
    RawRow::new(
        name(head.0, head.1),
        head.0.as_str(),
        predicate.as_str(),
        name(tail.0, tail.1),
        tail.0.as_str(),
    )
}

/// Triple rows of the synthetic graph, in generation order.
pub fn synthetic_rows(cfg: &SyntheticKgConfig) -> Result<Vec<RawRow>, SynthError> {
    use EntityType::*;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let planted_link = if cfg.tiered_primary {
        Predicate::PrimaryDiagnosis
    } else {
        Predicate::Diagnosis
    };
    let hub_start = cfg.symptoms - cfg.hub_symptoms;

    for s in 0..hub_start {
        let own = cfg.cluster_of_symptom(s);
        for d in 0..cfg.diseases {
            if own == Some(d) {
                if rng.random_bool(cfg.within_prob) {
                    rows.push(row((Symptom, s), planted_link, (Disease, d)));
                }
            } else if rng.random_bool(cfg.background_prob) {
                rows.push(row((Symptom, s), Predicate::Diagnosis, (Disease, d)));
            }
        }
        if let Some(c) = own {
            if cfg.diseases > 1 && rng.random_bool(cfg.differential_prob) {
                let next = (c + 1) % cfg.diseases;
                rows.push(row((Symptom, s), Predicate::DifferentialDiagnosis, (Disease, next)));
            }
        }
    }
    for s in hub_start..cfg.symptoms {
        for d in index::sample(&mut rng, cfg.diseases, cfg.hub_degree).into_vec() {
            rows.push(row((Symptom, s), Predicate::Diagnosis, (Disease, d)));
        }
    }
    for r in 0..cfg.drugs {
        let own = cfg.cluster_of_drug(r);
        for d in 0..cfg.diseases {
            let p = if own == Some(d) { cfg.within_prob } else { cfg.background_prob };
            if rng.random_bool(p) {
                rows.push(row((Drug, r), Predicate::Treat, (Disease, d)));
            }
        }
    }
    for f in 0..cfg.risk_factors {
        for d in 0..cfg.diseases {
            if rng.random_bool(cfg.background_prob) {
                rows.push(row((RiskFactor, f), Predicate::Cause, (Disease, d)));
            }
        }
    }
    for p in 0..cfg.patients {
        let d = rng.random_range(0..cfg.diseases);
        rows.push(row((Patient, p), Predicate::Suffer, (Disease, d)));
    }
    for v in 0..cfg.severities {
        let d = rng.random_range(0..cfg.diseases);
        rows.push(row((Severity, v), Predicate::Diagnosis, (Disease, d)));
    }
    Ok(rows)
}

/// Builds the synthetic graph. Entities that drew no link are absent.
pub fn generate_synthetic_kg(cfg: &SyntheticKgConfig) -> Result<KnowledgeGraph, SynthError> {
    let rows = synthetic_rows(cfg)?;
    ingest_triples(rows, IngestOptions::default())
        .map_err(|e| SynthError::InvalidConfig(format!("generated row rejected: {e}")))
}
