//! End-to-end experiments: module clustering, separation and correlation
//! analyses centred on diseases, symptoms or drugs, and the comparison of
//! diagnosis tiers by network proximity.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::assoc::IcMode;
use crate::metrics::{LccMode, MetricError, RandomizationConfig, SeparationConvention, UnreachablePolicy};
use crate::model::{EntityType, KnowledgeGraph, Predicate, PredicateSet, TypeMask};

mod experiments;
pub mod report;
pub mod synth;

pub use experiments::{
    run_diagnosis_compare, run_disease_drug, run_disease_symptom, run_experiment, run_symptom_disease,
};
pub use report::{AnalysisReport, BoxRow, FiveNumber, FocalRow, PairRow, Provenance, ProximityRow, Summary};
pub use synth::{generate_synthetic_kg, synthetic_rows, SynthError, SyntheticKgConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    DiseaseSymptom,
    SymptomDisease,
    DiseaseDrug,
    DiagnosisCompare,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::DiseaseSymptom,
        Experiment::SymptomDisease,
        Experiment::DiseaseDrug,
        Experiment::DiagnosisCompare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::DiseaseSymptom => "disease_symptom",
            Experiment::SymptomDisease => "symptom_disease",
            Experiment::DiseaseDrug => "disease_drug",
            Experiment::DiagnosisCompare => "diagnosis_compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Experiment::ALL.into_iter().find(|e| e.as_str() == s)
    }

    /// `(focal type, member type)`.
    pub fn roles(self) -> (EntityType, EntityType) {
        match self {
            Experiment::DiseaseSymptom | Experiment::DiagnosisCompare => {
                (EntityType::Disease, EntityType::Symptom)
            }
            Experiment::SymptomDisease => (EntityType::Symptom, EntityType::Disease),
            Experiment::DiseaseDrug => (EntityType::Disease, EntityType::Drug),
        }
    }

    pub fn default_z_threshold(self) -> f64 {
        match self {
            Experiment::DiseaseSymptom => 1.5,
            Experiment::SymptomDisease => 1.03,
            Experiment::DiseaseDrug => 2.9,
            Experiment::DiagnosisCompare => 1.1,
        }
    }

    pub fn default_predicates(self) -> PredicateSet {
        match self {
            Experiment::DiseaseSymptom | Experiment::SymptomDisease => {
                [Predicate::Diagnosis, Predicate::PrimaryDiagnosis].into_iter().collect()
            }
            Experiment::DiseaseDrug => PredicateSet::single(Predicate::Treat),
            Experiment::DiagnosisCompare => {
                [Predicate::PrimaryDiagnosis, Predicate::Diagnosis].into_iter().collect()
            }
        }
    }

    fn legal_predicates(self) -> PredicateSet {
        match self {
            Experiment::DiseaseSymptom | Experiment::SymptomDisease => [
                Predicate::Diagnosis,
                Predicate::PrimaryDiagnosis,
                Predicate::DifferentialDiagnosis,
            ]
            .into_iter()
            .collect(),
            Experiment::DiseaseDrug => PredicateSet::single(Predicate::Treat),
            Experiment::DiagnosisCompare => self.default_predicates(),
        }
    }
}

/// Experiment settings. `predicates` and `z_threshold` fall back to the
/// experiment's defaults when unset; [`ExperimentConfig::effective`] fills
/// them in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub predicates: Option<PredicateSet>,
    pub z_threshold: Option<f64>,
    pub randomization: RandomizationConfig,
    pub mask: TypeMask,
    pub lcc_mode: LccMode,
    pub separation: SeparationConvention,
    pub ic_mode: IcMode,
    pub skip_unreachable: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::new(Experiment::DiseaseSymptom)
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            predicates: None,
            z_threshold: None,
            randomization: RandomizationConfig::default(),
            mask: TypeMask::default(),
            lcc_mode: LccMode::default(),
            separation: SeparationConvention::default(),
            ic_mode: IcMode::default(),
            skip_unreachable: false,
        }
    }

    pub fn effective(&self) -> Self {
        ExperimentConfig {
            predicates: Some(self.predicate_set()),
            z_threshold: Some(self.threshold()),
            ..self.clone()
        }
    }

    pub fn predicate_set(&self) -> PredicateSet {
        self.predicates
            .unwrap_or_else(|| self.experiment.default_predicates())
    }

    pub fn threshold(&self) -> f64 {
        self.z_threshold
            .unwrap_or_else(|| self.experiment.default_z_threshold())
    }

    pub fn policy(&self) -> UnreachablePolicy {
        if self.skip_unreachable {
            UnreachablePolicy::Skip
        } else {
            UnreachablePolicy::Error
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let predicates = self.predicate_set();
        let legal = self.experiment.legal_predicates();
        if predicates.is_empty() || predicates.iter().any(|p| !legal.contains(p)) {
            return Err(PipelineError::InvalidConfig(format!(
                "predicate set {:?} is not legal for {}",
                Vec::from(predicates),
                self.experiment.as_str()
            )));
        }
        if self.experiment == Experiment::DiagnosisCompare && predicates != legal {
            return Err(PipelineError::InvalidConfig(
                "diagnosis_compare always compares primary_diagnosis with diagnosis".into(),
            ));
        }
        let (focal, member) = self.experiment.roles();
        for t in [focal, member] {
            if !self.mask.contains(t) {
                return Err(PipelineError::InvalidConfig(format!(
                    "node-type mask excludes `{t}`, which {} needs",
                    self.experiment.as_str()
                )));
            }
        }
        if !self.threshold().is_finite() {
            return Err(PipelineError::InvalidConfig("z_threshold must be finite".into()));
        }
        self.randomization.validate()?;
        Ok(())
    }

    /// SHA-256 of the effective configuration's canonical rendering.
    pub fn fingerprint(&self) -> String {
        sha256_hex(format!("{:?}", self.effective()).as_bytes())
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use core::fmt::Write;
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// SHA-256 over a canonical rendering of the graph's entities and triples.
pub fn graph_fingerprint(graph: &KnowledgeGraph) -> String {
    use core::fmt::Write;
    let mut text = String::new();
    for e in graph.entities() {
        let _ = writeln!(text, "E\t{}\t{}\t{:?}", e.name, e.entity_type, e.aliases);
    }
    for t in graph.triples() {
        let _ = writeln!(text, "T\t{}\t{}\t{}\t{}", t.head, t.predicate, t.tail, t.multiplicity);
    }
    sha256_hex(text.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PipelineError {
    #[error("experiment has nothing to analyse: {0}")]
    EmptyExperiment(String),
    #[error("graph has no `{0}` triples")]
    MissingPredicate(Predicate),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("summary field `{0}` does not match its tables")]
    SummaryMismatch(&'static str),
}
