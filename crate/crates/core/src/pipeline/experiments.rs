use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::report::{AnalysisReport, FocalRow, PairRow, Provenance, ProximityRow, Summary};
use super::{graph_fingerprint, Experiment, ExperimentConfig, PipelineError};
use crate::assoc::AssociationMatrix;
use crate::exec::{Executor, Sequential};
use crate::metrics::null::{proximity_null, standardize};
use crate::metrics::{
    lcc_size, lcc_zscore, network_distance, proximity_distance, separation, DistanceMatrix, MetricError,
    NetworkView, ZScore,
};
use crate::model::{EntityId, EntityType, KnowledgeGraph, Predicate, PredicateSet};
use crate::module::NodeModule;

/// Runs whichever experiment `cfg` names.
pub fn run_experiment<E: Executor>(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<AnalysisReport, PipelineError> {
    match cfg.experiment {
        Experiment::DiseaseSymptom => run_disease_symptom(graph, cfg, exec),
        Experiment::SymptomDisease => run_symptom_disease(graph, cfg, exec),
        Experiment::DiseaseDrug => run_disease_drug(graph, cfg, exec),
        Experiment::DiagnosisCompare => run_diagnosis_compare(graph, cfg, exec),
    }
}

/// Symptom modules of diseases.
pub fn run_disease_symptom<E: Executor>(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<AnalysisReport, PipelineError> {
    run_module_experiment(graph, &with_experiment(cfg, Experiment::DiseaseSymptom), exec)
}

/// Disease modules of symptoms, with relative risk between symptom pairs.
pub fn run_symptom_disease<E: Executor>(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<AnalysisReport, PipelineError> {
    run_module_experiment(graph, &with_experiment(cfg, Experiment::SymptomDisease), exec)
}

/// Drug modules of diseases.
pub fn run_disease_drug<E: Executor>(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<AnalysisReport, PipelineError> {
    run_module_experiment(graph, &with_experiment(cfg, Experiment::DiseaseDrug), exec)
}

fn with_experiment(cfg: &ExperimentConfig, experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        ..cfg.clone()
    }
}

fn run_module_experiment<E: Executor>(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<AnalysisReport, PipelineError> {
    cfg.validate()?;
    let (focal_type, member_type) = cfg.experiment.roles();
    let predicates = cfg.predicate_set();
    let matrix = AssociationMatrix::from_graph(graph, focal_type, member_type, predicates);
    if matrix.rows().is_empty() {
        return Err(PipelineError::EmptyExperiment(format!(
            "no {focal_type} has {member_type} neighbours via {:?}",
            Vec::from(predicates)
        )));
    }
    let view = NetworkView::new(graph, cfg.mask);
    let dm = view.distances(exec)?;
    let (per_focal, pairwise) = module_tables(&dm, &matrix, member_type, predicates, cfg, exec)?;
    finish(graph, cfg, per_focal, pairwise, Vec::new())
}

fn modules_of(matrix: &AssociationMatrix, member_type: EntityType, predicates: PredicateSet) -> Vec<NodeModule> {
    (0..matrix.rows().len())
        .map(|r| {
            let members = matrix.support(r).iter().map(|&c| matrix.cols()[c as usize]).collect();
            NodeModule::from_parts(Some(matrix.rows()[r]), members, member_type, predicates)
        })
        .collect()
}

/// Per-focal LCC scores and all-pairs module comparisons over the rows of
/// `matrix`.
fn module_tables<E: Executor>(
    dm: &DistanceMatrix<'_>,
    matrix: &AssociationMatrix,
    member_type: EntityType,
    predicates: PredicateSet,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<(Vec<FocalRow>, Vec<PairRow>), PipelineError> {
    let view = dm.view();
    let graph = view.graph();
    let modules = modules_of(matrix, member_type, predicates);

    let per_focal = exec.map(modules.len(), |i| {
        let module = &modules[i];
        let focal = matrix.rows()[i];
        let lcc = lcc_size(view, module, cfg.lcc_mode)?;
        let rand = cfg.randomization.reseeded(focal.0 as u64);
        let z = lcc_zscore(view, module, cfg.lcc_mode, &rand, &Sequential);
        let z = tolerate_degenerate(z)?;
        Ok(FocalRow {
            focal,
            name: graph.name(focal).to_string(),
            module_size: module.len(),
            lcc,
            mu: z.map(|z| z.mu),
            sigma: z.map(|z| z.sigma),
            z: z.map(|z| z.z),
        })
    });
    let per_focal = per_focal.into_iter().collect::<Result<Vec<_>, MetricError>>()?;

    let pairs: Vec<(usize, usize)> = (0..modules.len())
        .flat_map(|i| (i + 1..modules.len()).map(move |j| (i, j)))
        .collect();
    let transposed = (cfg.experiment == Experiment::SymptomDisease).then(|| matrix.transpose());
    let policy = cfg.policy();
    let pairwise = exec.map(pairs.len(), |k| {
        let (i, j) = pairs[k];
        let (a, b) = (&modules[i], &modules[j]);
        let d_ab = tolerate_unreachable(network_distance(dm, a, b, policy))?.map(|avg| avg.value);
        let s_ab = match separation(dm, a, b, cfg.separation, policy) {
            Err(MetricError::SingletonSet) => None,
            other => tolerate_unreachable(other)?.map(|s| s.value),
        };
        let (rr, semsim) = match &transposed {
            Some(t) => (Some(t.relative_risk_at(i, j)), None),
            None => (None, matrix.semantic_similarity_at(i, j, cfg.ic_mode).ok()),
        };
        Ok(PairRow {
            a: matrix.rows()[i],
            b: matrix.rows()[j],
            a_name: graph.name(matrix.rows()[i]).to_string(),
            b_name: graph.name(matrix.rows()[j]).to_string(),
            d_ab,
            s_ab,
            co_count: matrix.co_count_at(i, j),
            rr,
            semsim,
        })
    });
    let pairwise = pairwise.into_iter().collect::<Result<Vec<_>, MetricError>>()?;
    Ok((per_focal, pairwise))
}

fn tolerate_degenerate(z: Result<ZScore, MetricError>) -> Result<Option<ZScore>, MetricError> {
    match z {
        Ok(z) => Ok(Some(z)),
        Err(MetricError::DegenerateNull { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn tolerate_unreachable<T>(r: Result<T, MetricError>) -> Result<Option<T>, MetricError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(MetricError::UnreachablePair { .. } | MetricError::UnreachableSource(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Compares the two symptom tiers. Every `(symptom s, disease D)` link in
/// tier `p` yields one row: the proximity from the diseases `s` reaches
/// through `p` to `D`, and its z-score against random disease sets of the
/// same sizes. Differential-diagnosis modules, when present, fill the
/// per-focal and pairwise tables.
pub fn run_diagnosis_compare<E: Executor>(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<AnalysisReport, PipelineError> {
    let cfg = with_experiment(cfg, Experiment::DiagnosisCompare);
    cfg.validate()?;
    for p in [Predicate::PrimaryDiagnosis, Predicate::Diagnosis] {
        if graph.triple_count(p) == 0 {
            return Err(PipelineError::MissingPredicate(p));
        }
    }
    let view = NetworkView::new(graph, cfg.mask);
    let dm = view.distances(exec)?;

    let mut links: Vec<(Predicate, EntityId, Vec<EntityId>)> = Vec::new();
    for group in [Predicate::PrimaryDiagnosis, Predicate::Diagnosis] {
        let m = AssociationMatrix::from_graph(graph, EntityType::Symptom, EntityType::Disease, PredicateSet::single(group));
        for (r, &s) in m.rows().iter().enumerate() {
            let diseases: Vec<EntityId> = m.support(r).iter().map(|&c| m.cols()[c as usize]).collect();
            links.push((group, s, diseases));
        }
    }
    if links.is_empty() {
        return Err(PipelineError::EmptyExperiment("no symptom–disease links".into()));
    }
    let proximity = proximity_rows(&dm, &links, &cfg, exec)?;

    let differential = PredicateSet::single(Predicate::DifferentialDiagnosis);
    let matrix = AssociationMatrix::from_graph(graph, EntityType::Disease, EntityType::Symptom, differential);
    let (per_focal, pairwise) = if matrix.rows().is_empty() {
        (Vec::new(), Vec::new())
    } else {
        module_tables(&dm, &matrix, EntityType::Symptom, differential, &cfg, exec)?
    };
    finish(graph, &cfg, per_focal, pairwise, proximity)
}

fn proximity_rows<E: Executor>(
    dm: &DistanceMatrix<'_>,
    links: &[(Predicate, EntityId, Vec<EntityId>)],
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<Vec<ProximityRow>, PipelineError> {
    let graph = dm.view().graph();
    let policy = cfg.policy();
    let jobs: Vec<(usize, EntityId)> = links
        .iter()
        .enumerate()
        .flat_map(|(k, (_, _, ds))| ds.iter().map(move |&d| (k, d)))
        .collect();
    let set = |ids: Vec<EntityId>| NodeModule::from_parts(None, ids, EntityType::Disease, PredicateSet::EMPTY);

    let binned = cfg.randomization.null_model == crate::metrics::NullModel::DegreeBinned;
    // Under the uniform model the null depends only on |A|, so one sample
    // per size serves every row.
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    if !binned {
        for (_, _, ds) in links {
            let k = ds.len();
            if let Entry::Vacant(slot) = by_size.entry(k) {
                let template = set(ds.clone());
                let target = set(ds[..1].to_vec());
                slot.insert(proximity_null(dm, &template, &target, &cfg.randomization.reseeded(k as u64), exec)?);
            }
        }
    }

    let rows = exec.map(jobs.len(), |j| {
        let (k, disease) = jobs[j];
        let (group, symptom, diseases) = &links[k];
        let a = set(diseases.clone());
        let b = set(alloc::vec![disease]);
        let d = tolerate_unreachable(proximity_distance(dm, &a, &b, policy))?.map(|avg| avg.value);
        let z = match d {
            None => None,
            Some(d) => {
                let null;
                let samples = if binned {
                    let salt = ((disease.0 as u64) << 32) | symptom.0 as u64;
                    null = proximity_null(dm, &a, &b, &cfg.randomization.reseeded(salt), &Sequential)?;
                    &null
                } else {
                    &by_size[&diseases.len()]
                };
                tolerate_degenerate(standardize(d, samples))?
            }
        };
        Ok(ProximityRow {
            group: *group,
            disease,
            symptom: *symptom,
            disease_name: graph.name(disease).to_string(),
            symptom_name: graph.name(*symptom).to_string(),
            module_size: diseases.len(),
            d,
            mu: z.map(|z| z.mu),
            sigma: z.map(|z| z.sigma),
            z: z.map(|z| z.z),
        })
    });
    Ok(rows.into_iter().collect::<Result<Vec<_>, MetricError>>()?)
}

fn finish(
    graph: &KnowledgeGraph,
    cfg: &ExperimentConfig,
    per_focal: Vec<FocalRow>,
    pairwise: Vec<PairRow>,
    proximity: Vec<ProximityRow>,
) -> Result<AnalysisReport, PipelineError> {
    let summary = Summary::from_tables(cfg.experiment, cfg.threshold(), &per_focal, &pairwise, &proximity);
    let report = AnalysisReport {
        config: cfg.effective(),
        per_focal,
        pairwise,
        proximity,
        summary,
        provenance: Provenance {
            seed: cfg.randomization.seed,
            config_hash: cfg.fingerprint(),
            input_digest: graph_fingerprint(graph),
        },
    };
    report.verify()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::RandomizationConfig;
    use crate::model::GraphBuilder;

    fn fast(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            randomization: RandomizationConfig {
                iterations: 50,
                ..Default::default()
            },
            ..ExperimentConfig::new(experiment)
        }
    }

    fn link(b: &mut GraphBuilder, s: &str, p: Predicate, d: &str) {
        b.add_triple(0, s, EntityType::Symptom, p, d, EntityType::Disease, 1).unwrap();
    }

    #[test]
    fn single_disease_has_no_pairs() {
        let mut b = GraphBuilder::new();
        link(&mut b, "fever", Predicate::Diagnosis, "flu");
        link(&mut b, "cough", Predicate::Diagnosis, "flu");
        let g = b.build();
        let r = run_disease_symptom(&g, &fast(Experiment::DiseaseSymptom), &Sequential).unwrap();
        assert_eq!(r.per_focal.len(), 1);
        assert!(r.pairwise.is_empty());
        assert_eq!(r.summary.mean_s_ab, None);
    }

    #[test]
    fn identical_symptoms_have_zero_distance_and_top_rr() {
        // s1 and s2 both diagnose only d1; s3 diagnoses d2 and d3
        let mut b = GraphBuilder::new();
        for (s, d) in [("s1", "d1"), ("s2", "d1"), ("s3", "d2"), ("s3", "d3")] {
            link(&mut b, s, Predicate::Diagnosis, d);
        }
        let g = b.build();
        let r = run_symptom_disease(&g, &fast(Experiment::SymptomDisease), &Sequential).unwrap();
        let twin = r
            .pairwise
            .iter()
            .find(|p| p.a_name == "s1" && p.b_name == "s2")
            .unwrap();
        assert_eq!(twin.d_ab, Some(0.0));
        let best = r.pairwise.iter().filter_map(|p| p.rr).fold(f64::MIN, f64::max);
        assert_eq!(twin.rr, Some(best));
        assert!(r.pairwise.iter().all(|p| p.semsim.is_none()));
    }

    #[test]
    fn unreachable_drug_pairs_are_counted() {
        let mut b = GraphBuilder::new();
        for (r, d) in [("r1", "d1"), ("r2", "d1"), ("r3", "d2"), ("r4", "d2")] {
            b.add_triple(0, r, EntityType::Drug, Predicate::Treat, d, EntityType::Disease, 1)
                .unwrap();
        }
        let g = b.build();
        let r = run_disease_drug(&g, &fast(Experiment::DiseaseDrug), &Sequential).unwrap();
        assert_eq!(r.pairwise.len(), 1);
        assert_eq!(r.pairwise[0].d_ab, None);
        assert_eq!(r.summary.unreachable_pairs, 1);
    }

    #[test]
    fn empty_and_missing() {
        let mut b = GraphBuilder::new();
        b.add_triple(0, "r1", EntityType::Drug, Predicate::Treat, "d1", EntityType::Disease, 1)
            .unwrap();
        let g = b.build();
        assert!(matches!(
            run_disease_symptom(&g, &fast(Experiment::DiseaseSymptom), &Sequential),
            Err(PipelineError::EmptyExperiment(_))
        ));
        assert_eq!(
            run_diagnosis_compare(&g, &fast(Experiment::DiagnosisCompare), &Sequential).unwrap_err(),
            PipelineError::MissingPredicate(Predicate::PrimaryDiagnosis)
        );
    }

    #[test]
    fn identical_tiers_give_identical_boxes() {
        let mut b = GraphBuilder::new();
        for (s, d) in [("s1", "d1"), ("s2", "d1"), ("s2", "d2"), ("s3", "d2"), ("s3", "d3"), ("s4", "d3")] {
            link(&mut b, s, Predicate::Diagnosis, d);
            link(&mut b, s, Predicate::PrimaryDiagnosis, d);
        }
        let g = b.build();
        let r = run_diagnosis_compare(&g, &fast(Experiment::DiagnosisCompare), &Sequential).unwrap();
        let boxes = &r.summary.boxplots;
        assert_eq!(boxes.len(), 4);
        assert_eq!(boxes[0].stats, boxes[2].stats);
        assert_eq!(boxes[1].stats, boxes[3].stats);
    }

    #[test]
    fn illegal_predicates_rejected() {
        let g = KnowledgeGraph::empty();
        let cfg = ExperimentConfig {
            predicates: Some(PredicateSet::single(Predicate::Diagnosis)),
            ..fast(Experiment::DiseaseDrug)
        };
        assert!(matches!(run_experiment(&g, &cfg, &Sequential), Err(PipelineError::InvalidConfig(_))));
    }
}
