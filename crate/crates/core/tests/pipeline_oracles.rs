mod common;

use kgprox_core::metrics::{lcc_zscore, LccMode, NetworkView, NullModel, RandomizationConfig};
use kgprox_core::model::{EntityId, EntityType, GraphBuilder, KnowledgeGraph, Predicate, TypeMask};
use kgprox_core::pipeline::{
    generate_synthetic_kg, run_experiment, Experiment, ExperimentConfig, SyntheticKgConfig,
};
use kgprox_core::{Executor, NodeModule, Sequential};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 20 diseases and 180 symptoms with sparse random diagnosis links, plus
/// six symptoms that all diagnose `hub` and nothing else.
fn planted_hub_graph() -> (KnowledgeGraph, NodeModule) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut b = GraphBuilder::new();
    let link = |b: &mut GraphBuilder, s: usize, d: usize| {
        b.add_triple(0, &format!("s{s:03}"), EntityType::Symptom, Predicate::Diagnosis, &format!("d{d:02}"), EntityType::Disease, 1)
            .unwrap();
    };
    for s in 0..174 {
        b.add_entity(&format!("s{s:03}"), EntityType::Symptom, std::iter::empty::<String>());
        for d in 0..20 {
            if rng.random_bool(0.08) {
                link(&mut b, s, d);
            }
        }
    }
    for s in 174..180 {
        link(&mut b, s, 0);
    }
    let g = b.build();
    let members: Vec<EntityId> = (174..180).map(|s| g.find(&format!("s{s:03}"), EntityType::Symptom).unwrap()).collect();
    let module = NodeModule::from_members(&g, members).unwrap();
    (g, module)
}

/// Reference z from an independent Monte-Carlo run: shuffled-prefix draws
/// and the brute-force shared-neighbour LCC.
fn reference_lcc_z(g: &KnowledgeGraph, module: &NodeModule, iterations: usize) -> f64 {
    let mask = TypeMask::default();
    let observed = common::brute_lcc_shared(g, mask, module.members()) as f64;
    let mut pool: Vec<EntityId> = g.ids_of_type(EntityType::Symptom).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let samples: Vec<f64> = (0..iterations)
        .map(|_| {
            pool.shuffle(&mut rng);
            let mut draw = pool[..module.len()].to_vec();
            draw.sort();
            common::brute_lcc_shared(g, mask, &draw) as f64
        })
        .collect();
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    let sigma = (samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n).sqrt();
    (observed - mu) / sigma
}

// Established once by `reference_lcc_z(.., 10_000)`; rerun the ignored
// test below after changing the fixture.
const PLANTED_HUB_LCC_Z: f64 = 3.468;

#[test]
#[ignore = "slow; prints the Monte-Carlo reference"]
fn print_planted_hub_reference() {
    let (g, module) = planted_hub_graph();
    println!("{}", reference_lcc_z(&g, &module, 10_000));
}

#[test]
fn planted_hub_lcc_z_matches_the_reference() {
    let (g, module) = planted_hub_graph();
    assert_eq!(g.len(), 200);
    let view = NetworkView::new(&g, TypeMask::default());
    for seed in 0..5 {
        let cfg = RandomizationConfig { iterations: 2000, seed, ..Default::default() };
        let z = lcc_zscore(&view, &module, LccMode::SharedNeighbor, &cfg, &Sequential).unwrap();
        assert_eq!(z.observed, 6.0);
        assert!((z.z - PLANTED_HUB_LCC_Z).abs() <= 0.2, "seed {seed}: z = {} vs {PLANTED_HUB_LCC_Z}", z.z);
        assert!(z.z > 1.5);
    }
}

fn fast(experiment: Experiment, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        randomization: RandomizationConfig { iterations: 300, seed, ..Default::default() },
        ..ExperimentConfig::new(experiment)
    }
}

#[test]
fn two_planted_clusters_are_separated_and_cohesive() {
    // without background links the two modules never meet
    let isolated = SyntheticKgConfig {
        diseases: 2,
        symptoms: 20,
        drugs: 8,
        risk_factors: 0,
        clusters: 2,
        cluster_size: 10,
        within_prob: 1.0,
        background_prob: 0.0,
        ..Default::default()
    };
    let g = generate_synthetic_kg(&isolated).unwrap();
    let cfg = ExperimentConfig { skip_unreachable: true, ..fast(Experiment::DiseaseSymptom, 3) };
    let report = run_experiment(&g, &cfg, &Sequential).unwrap();
    assert_eq!(report.per_focal.len(), 2);
    assert_eq!(report.summary.unreachable_pairs, 1);

    for seed in 0..5 {
        let synth = SyntheticKgConfig {
            clusters: 2,
            cluster_size: 10,
            within_prob: 1.0,
            background_prob: 0.02,
            seed,
            ..Default::default()
        };
        let g = generate_synthetic_kg(&synth).unwrap();
        let cfg = ExperimentConfig { skip_unreachable: true, ..fast(Experiment::DiseaseSymptom, seed) };
        let report = run_experiment(&g, &cfg, &Sequential).unwrap();
        let threshold = report.summary.z_threshold;
        for name in ["disease_000", "disease_001"] {
            let row = report.per_focal.iter().find(|r| r.name == name).unwrap();
            assert!(row.z.unwrap() > threshold, "seed {seed} {name}: z = {:?}", row.z);
        }
        assert!(report.summary.mean_s_ab.unwrap() > 0.0);
    }
}

fn eight_symptom_profile(seed: u64) -> SyntheticKgConfig {
    SyntheticKgConfig {
        clusters: 1,
        cluster_size: 8,
        within_prob: 1.0,
        background_prob: 0.02,
        seed,
        ..Default::default()
    }
}

fn eight_symptom_module(g: &KnowledgeGraph) -> NodeModule {
    let d = g.find("disease_000", EntityType::Disease).unwrap();
    g.module_of(d, Predicate::Diagnosis, EntityType::Symptom).unwrap()
}

// `reference_lcc_z` at 10,000 iterations on `eight_symptom_profile(7)`.
const EIGHT_SYMPTOM_LCC_Z: f64 = 4.425;

#[test]
#[ignore = "slow; prints the Monte-Carlo reference"]
fn print_eight_symptom_reference() {
    let g = generate_synthetic_kg(&eight_symptom_profile(7)).unwrap();
    println!("{}", reference_lcc_z(&g, &eight_symptom_module(&g), 10_000));
}

#[test]
fn eight_symptom_cluster_beats_two_sigma() {
    let g = generate_synthetic_kg(&eight_symptom_profile(7)).unwrap();
    let view = NetworkView::new(&g, TypeMask::default());
    let cfg = RandomizationConfig { iterations: 10_000, seed: 7, ..Default::default() };
    let z = lcc_zscore(&view, &eight_symptom_module(&g), LccMode::SharedNeighbor, &cfg, &Sequential).unwrap();
    assert!((z.z - EIGHT_SYMPTOM_LCC_Z).abs() <= 0.2, "z = {} vs {EIGHT_SYMPTOM_LCC_Z}", z.z);

    for seed in 0..10 {
        let g = generate_synthetic_kg(&eight_symptom_profile(seed)).unwrap();
        let view = NetworkView::new(&g, TypeMask::default());
        let cfg = RandomizationConfig { iterations: 1000, seed, ..Default::default() };
        let z = lcc_zscore(&view, &eight_symptom_module(&g), LccMode::SharedNeighbor, &cfg, &Sequential).unwrap();
        assert!(z.z > 2.0, "seed {seed}: z = {}", z.z);
    }
}

#[test]
fn planted_profile_reproduces_negative_correlations() {
    for seed in 0..3 {
        let g = generate_synthetic_kg(&SyntheticKgConfig { seed, ..Default::default() }).unwrap();
        let cfg = ExperimentConfig { skip_unreachable: true, ..fast(Experiment::DiseaseSymptom, seed) };
        let s = run_experiment(&g, &cfg, &Sequential).unwrap().summary;
        assert!(s.corr_d_co.unwrap().r < -0.2, "seed {seed}: {:?}", s.corr_d_co);
        assert!(s.corr_d_semsim.unwrap().r < -0.2, "seed {seed}: {:?}", s.corr_d_semsim);
        let cfg = ExperimentConfig { skip_unreachable: true, ..fast(Experiment::SymptomDisease, seed) };
        let s = run_experiment(&g, &cfg, &Sequential).unwrap().summary;
        assert!(s.corr_d_co.unwrap().r < -0.2, "seed {seed}: {:?}", s.corr_d_co);
        assert!(s.corr_d_rr.unwrap().r < -0.2, "seed {seed}: {:?}", s.corr_d_rr);
    }
}

#[test]
fn tiered_primary_symptoms_sit_closer() {
    let synth = SyntheticKgConfig {
        tiered_primary: true,
        hub_symptoms: 30,
        background_prob: 0.02,
        ..Default::default()
    };
    let g = generate_synthetic_kg(&synth).unwrap();
    let report = run_experiment(&g, &fast(Experiment::DiagnosisCompare, 1), &Sequential).unwrap();
    let median = |metric: &str, group: Predicate| {
        report
            .summary
            .boxplots
            .iter()
            .find(|b| b.metric == metric && b.group == group)
            .unwrap()
            .stats
            .median
    };
    for metric in ["d", "z"] {
        assert!(median(metric, Predicate::PrimaryDiagnosis) < median(metric, Predicate::Diagnosis));
    }
}

/// Runs work items on scoped threads in interleaved chunks.
struct Threads(usize);

impl Executor for Threads {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let f = &f;
        let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..self.0)
                .map(|t| s.spawn(move || (t..n).step_by(self.0).map(|i| (i, f(i))).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut all: Vec<(usize, T)> = parts.drain(..).flatten().collect();
        all.sort_by_key(|(i, _)| *i);
        all.into_iter().map(|(_, t)| t).collect()
    }
}

#[test]
fn reports_do_not_depend_on_the_executor() {
    let g = generate_synthetic_kg(&SyntheticKgConfig { differential_prob: 0.5, tiered_primary: true, ..Default::default() }).unwrap();
    for experiment in [Experiment::DiseaseSymptom, Experiment::SymptomDisease, Experiment::DiseaseDrug, Experiment::DiagnosisCompare] {
        for null_model in [NullModel::UniformByType, NullModel::DegreeBinned] {
            let mut cfg = ExperimentConfig { skip_unreachable: true, ..fast(experiment, 11) };
            cfg.randomization.iterations = 40;
            cfg.randomization.null_model = null_model;
            let one = run_experiment(&g, &cfg, &Sequential).unwrap();
            let four = run_experiment(&g, &cfg, &Threads(4)).unwrap();
            assert_eq!(one, four, "{experiment:?} {null_model:?}");
            one.verify().unwrap();
        }
    }
}
