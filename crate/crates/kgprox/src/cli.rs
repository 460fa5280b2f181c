//! Command-line surface. Parsing lives in [`Cli`]; [`run`] executes a
//! parsed command and maps failures to exit codes through
//! [`Error::exit_code`](crate::error::Error::exit_code).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use kgprox_core::align::{align_graph, AlignOptions, EmbeddingTable, SimilarityWeights, TextMode};
use kgprox_core::assoc::{pearson, AssociationMatrix, IcMode};
use kgprox_core::metrics::{
    lcc_size, lcc_zscore, network_distance, proximity_distance, proximity_zscore, separation, LccMode,
    MetricError, NetworkView, NullModel, RandomizationConfig, SeparationConvention, UnreachablePolicy, ZScore,
};
use kgprox_core::model::{EntityType, IngestOptions, KnowledgeGraph, Predicate, PredicateSet, TypeMask, LEGAL_SCHEMAS};
use kgprox_core::pipeline::{run_experiment, synthetic_rows, Experiment, ExperimentConfig, SyntheticKgConfig};
use kgprox_core::{EntityId, NodeModule};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::bundle::write_bundle;
use crate::error::{Error, Result};
use crate::exec::RayonExecutor;
use crate::io;
use crate::manifest::{sidecar, ManifestBuilder};

fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

fn parse_type(s: &str) -> Result<EntityType, String> {
    EntityType::parse(s).ok_or_else(|| format!("unknown entity type `{s}`"))
}

fn parse_predicate(s: &str) -> Result<Predicate, String> {
    Predicate::parse(s).ok_or_else(|| format!("unknown predicate `{s}`"))
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    Experiment::parse(s).ok_or_else(|| format!("unknown experiment `{s}`"))
}

#[derive(Debug, Parser)]
#[command(name = "kgprox", version, about = "Network proximity statistics over clinical knowledge graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Randomization, substrate and parallelism settings shared by every
/// command. Unset values fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true)]
    pub iterations: Option<usize>,
    /// uniform_by_type or degree_binned.
    #[arg(long, global = true, value_parser = parse_serde::<NullModel>)]
    pub null_model: Option<NullModel>,
    #[arg(long, global = true)]
    pub bin_floor: Option<usize>,
    /// Comma-separated entity types forming the distance substrate.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_type)]
    pub mask: Option<Vec<EntityType>>,
    /// induced or shared_neighbor.
    #[arg(long, global = true, value_parser = parse_serde::<LccMode>)]
    pub lcc_mode: Option<LccMode>,
    /// all_pairs or nearest_neighbor.
    #[arg(long, global = true, value_parser = parse_serde::<SeparationConvention>)]
    pub separation_convention: Option<SeparationConvention>,
    /// unit or neg_log_freq.
    #[arg(long, global = true, value_parser = parse_serde::<IcMode>)]
    pub ic_mode: Option<IcMode>,
    #[arg(long, global = true)]
    pub skip_unreachable: bool,
}

impl GlobalArgs {
    fn randomization(&self, base: RandomizationConfig) -> RandomizationConfig {
        RandomizationConfig {
            iterations: self.iterations.unwrap_or(base.iterations),
            seed: self.seed.unwrap_or(base.seed),
            null_model: self.null_model.unwrap_or(base.null_model),
            bin_floor: self.bin_floor.unwrap_or(base.bin_floor),
        }
    }

    fn type_mask(&self) -> TypeMask {
        self.mask
            .as_ref()
            .map_or_else(TypeMask::default, |ts| ts.iter().copied().collect())
    }

    fn policy(&self) -> UnreachablePolicy {
        if self.skip_unreachable {
            UnreachablePolicy::Skip
        } else {
            UnreachablePolicy::Error
        }
    }

    /// Overlays the flags that were given onto a pipeline config.
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        cfg.randomization = self.randomization(cfg.randomization);
        if let Some(m) = &self.mask {
            cfg.mask = m.iter().copied().collect();
        }
        if let Some(m) = self.lcc_mode {
            cfg.lcc_mode = m;
        }
        if let Some(s) = self.separation_convention {
            cfg.separation = s;
        }
        if let Some(m) = self.ic_mode {
            cfg.ic_mode = m;
        }
        cfg.skip_unreachable |= self.skip_unreachable;
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a triple TSV and write the graph as JSON.
    Ingest(IngestArgs),
    /// Merge surface variants of the same entity.
    Align(AlignArgs),
    /// Write a synthetic triple TSV with planted clusters.
    Synth(SynthArgs),
    /// Compute one metric and print it as JSON.
    #[command(subcommand)]
    Metric(MetricCommand),
    /// Run a full experiment and write its report bundle.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub triples: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Lowercase entity names before keying them.
    #[arg(long)]
    pub lowercase: bool,
    /// Keep surrounding whitespace in names.
    #[arg(long)]
    pub no_trim: bool,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    pub graph: PathBuf,
    /// `surface<TAB>vector` file; character bigrams are used when absent.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 0.85)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.4)]
    pub text_weight: f64,
    #[arg(long, default_value_t = 0.6)]
    pub semantic_weight: f64,
    /// char_set or char_multiset.
    #[arg(long, value_parser = parse_serde::<TextMode>, default_value = "char_set")]
    pub text_mode: TextMode,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Alignment CSV; defaults to `<out>.alignment.csv`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON generator config; unset fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum MetricCommand {
    /// Largest connected component of a module.
    Lcc(ModuleArgs),
    /// LCC z-score against random same-type sets.
    LccZ(ModuleArgs),
    /// Mean distance over all cross pairs.
    Distance(PairArgs),
    Separation(PairArgs),
    /// Mean distance from each node of A to its nearest node of B.
    Proximity(PairArgs),
    ProximityZ(PairArgs),
    /// Relative risk of two entities sharing neighbours.
    Rr(PairArgs),
    /// Semantic similarity of two entities' neighbourhoods.
    Semsim(PairArgs),
    /// Pearson correlation of two CSV columns.
    Pearson(PearsonArgs),
}

/// A node set given either as entity names (`--a x --a y`) or as the
/// neighbourhood of one entity (`--a x --via diagnosis`).
#[derive(Debug, Clone, Args)]
pub struct ModuleArgs {
    pub graph: PathBuf,
    #[arg(long = "a", visible_alias = "from", required = true)]
    pub a: Vec<String>,
    #[arg(long, value_parser = parse_type)]
    pub a_type: Option<EntityType>,
    #[command(flatten)]
    pub link: LinkArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    pub graph: PathBuf,
    #[arg(long = "a", visible_alias = "from", required = true)]
    pub a: Vec<String>,
    #[arg(long, value_parser = parse_type)]
    pub a_type: Option<EntityType>,
    #[arg(long = "b", visible_alias = "to", required = true)]
    pub b: Vec<String>,
    #[arg(long, value_parser = parse_type)]
    pub b_type: Option<EntityType>,
    #[command(flatten)]
    pub link: LinkArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LinkArgs {
    /// Comma-separated predicates linking an entity to its module.
    #[arg(long, value_delimiter = ',', value_parser = parse_predicate)]
    pub via: Option<Vec<Predicate>>,
    /// Module member type when the predicates allow several.
    #[arg(long, value_parser = parse_type)]
    pub member_type: Option<EntityType>,
}

#[derive(Debug, Args)]
pub struct PearsonArgs {
    pub csv: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(value_parser = parse_experiment)]
    pub experiment: Experiment,
    pub graph: PathBuf,
    /// JSON experiment config; unset fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub z_threshold: Option<f64>,
    /// Comma-separated predicates defining the modules.
    #[arg(long, value_delimiter = ',', value_parser = parse_predicate)]
    pub predicates: Option<Vec<Predicate>>,
    /// Also write the focal × member association matrix as CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
}

/// Executes a parsed command line. `argv` is recorded in run manifests.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    let exec = RayonExecutor::with_threads(cli.global.threads)
        .map_err(|e| Error::Usage(format!("cannot start {} threads: {e}", cli.global.threads)))?;
    let manifest = ManifestBuilder::start(argv, exec.threads());
    let g = &cli.global;
    match cli.command {
        Command::Ingest(args) => ingest(args, manifest),
        Command::Align(args) => align_cmd(args, manifest),
        Command::Synth(args) => synth(args, g, manifest),
        Command::Metric(m) => metric(m, g, &exec),
        Command::Pipeline(args) => pipeline(args, g, &exec, manifest),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    println!("{text}");
    Ok(())
}

fn ingest(args: IngestArgs, mut manifest: ManifestBuilder) -> Result<()> {
    let options = IngestOptions {
        trim_names: !args.no_trim,
        lowercase_names: args.lowercase,
    };
    manifest.input(&args.triples)?;
    let graph = io::ingest_file(&args.triples, options)?;
    io::write_graph(&args.out, &graph)?;
    let config = serde_json::json!({
        "trim_names": options.trim_names,
        "lowercase_names": options.lowercase_names,
    });
    io::write_json(&sidecar(&args.out), &manifest.finish(&config))?;
    eprintln!(
        "ingested {} entities and {} triples into {}",
        graph.len(),
        graph.triples().len(),
        args.out.display()
    );
    print_json(&graph.stats())
}

fn align_cmd(args: AlignArgs, mut manifest: ManifestBuilder) -> Result<()> {
    manifest.input(&args.graph)?;
    let graph = io::read_graph(&args.graph)?;
    let emb = match &args.embeddings {
        Some(path) => {
            manifest.input(path)?;
            io::read_embeddings(path)?
        }
        None => EmbeddingTable::bigram_fallback(graph.entities().iter().map(|e| e.name.as_str())),
    };
    let options = AlignOptions {
        threshold: args.threshold,
        weights: SimilarityWeights {
            text: args.text_weight,
            semantic: args.semantic_weight,
        },
        text_mode: args.text_mode,
    };
    let (result, aligned) = align_graph(&graph, &emb, &options)?;
    io::write_graph(&args.out, &aligned)?;
    let report = args.report.clone().unwrap_or_else(|| {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".alignment.csv");
        args.out.with_file_name(name)
    });
    io::write_alignment_csv(io::create(&report)?, &result).map_err(|e| Error::io(&report, e))?;
    io::write_json(&sidecar(&args.out), &manifest.finish(&options))?;
    print_json(&serde_json::json!({
        "entities_before": graph.len(),
        "entities_after": aligned.len(),
        "clusters": result.clusters.len(),
        "merged": result.clusters.iter().filter(|c| c.members.len() > 1).count(),
    }))
}

fn synth(args: SynthArgs, g: &GlobalArgs, mut manifest: ManifestBuilder) -> Result<()> {
    let mut cfg: SyntheticKgConfig = match &args.config {
        Some(path) => {
            manifest.input(path)?;
            io::read_json(path)?
        }
        None => SyntheticKgConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let rows = synthetic_rows(&cfg)?;
    io::write_triples(&args.out, &rows)?;
    io::write_json(&sidecar(&args.out), &manifest.finish(&cfg))?;
    eprintln!("wrote {} triples to {}", rows.len(), args.out.display());
    Ok(())
}

/// Predicates and member type linking entities of type `t` to a module.
/// Without `--member-type`, candidates are narrowed to types that `focal`
/// actually reaches.
fn resolve_link(
    graph: &KnowledgeGraph,
    focal: EntityId,
    via: Option<&[Predicate]>,
    member_type: Option<EntityType>,
) -> Result<(PredicateSet, EntityType)> {
    let t = graph.entity_type(focal).map_err(|e| Error::Usage(e.to_string()))?;
    let schemas = LEGAL_SCHEMAS.iter().filter_map(|s| {
        let other = if s.tail_type == t {
            s.head_type
        } else if s.head_type == t {
            s.tail_type
        } else {
            return None;
        };
        let wanted = via.is_none_or(|v| v.contains(&s.predicate)) && member_type.is_none_or(|m| m == other);
        wanted.then_some((s.predicate, other))
    });
    let schemas: Vec<(Predicate, EntityType)> = schemas.collect();
    let mut types: Vec<EntityType> = schemas.iter().map(|&(_, o)| o).collect();
    types.sort();
    types.dedup();
    if types.len() > 1 {
        types.retain(|&o| {
            let preds: PredicateSet = schemas.iter().filter(|s| s.1 == o).map(|s| s.0).collect();
            graph.module_via(focal, preds, o).is_ok_and(|m| !m.is_empty())
        });
    }
    match types.as_slice() {
        [member] => {
            let preds = schemas.iter().filter(|s| s.1 == *member).map(|s| s.0).collect();
            Ok((preds, *member))
        }
        [] => Err(Error::Usage(format!("no relation links `{}` ({t}) to a module", graph.name(focal)))),
        _ => Err(Error::Usage(format!(
            "`{}` links to several entity types; pass --member-type",
            graph.name(focal)
        ))),
    }
}

fn resolve_module(
    graph: &KnowledgeGraph,
    names: &[String],
    entity_type: Option<EntityType>,
    link: &LinkArgs,
) -> Result<NodeModule> {
    let ids = names
        .iter()
        .map(|n| io::resolve(graph, n, entity_type))
        .collect::<Result<Vec<_>>>()?;
    if link.via.is_none() && link.member_type.is_none() {
        return NodeModule::from_members(graph, ids).map_err(|e| Error::Usage(e.to_string()));
    }
    let [focal] = ids[..] else {
        return Err(Error::Usage("a neighbourhood module needs exactly one focal entity".into()));
    };
    let (preds, member) = resolve_link(graph, focal, link.via.as_deref(), link.member_type)?;
    let module = graph
        .module_via(focal, preds, member)
        .map_err(|e| Error::Usage(e.to_string()))?;
    if module.is_empty() {
        return Err(Error::Usage(format!("`{}` has no {member} neighbours", graph.name(focal))));
    }
    Ok(module)
}

/// One metric result on standard output.
#[derive(Debug, Default, Serialize)]
pub struct MetricRecord {
    pub metric: &'static str,
    pub a: Vec<String>,
    pub b: Option<Vec<String>>,
    pub value: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub z: Option<f64>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub null_model: Option<NullModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl MetricRecord {
    fn with_z(mut self, z: &ZScore, cfg: &RandomizationConfig) -> Self {
        self.value = Some(z.observed);
        self.mu = Some(z.mu);
        self.sigma = Some(z.sigma);
        self.z = Some(z.z);
        self.iterations = Some(cfg.iterations);
        self.seed = Some(cfg.seed);
        self.null_model = Some(cfg.null_model);
        self
    }

    /// For a degenerate null: the observation and null mean, without z.
    fn degenerate(mut self, observed: f64, mu: f64, cfg: &RandomizationConfig) -> Self {
        self.value = Some(observed);
        self.mu = Some(mu);
        self.sigma = Some(0.0);
        self.iterations = Some(cfg.iterations);
        self.seed = Some(cfg.seed);
        self.null_model = Some(cfg.null_model);
        self
    }
}

/// Prints the record for a z-score computation, or its degenerate form
/// before failing with exit status 3.
fn emit_z(record: MetricRecord, z: Result<ZScore, MetricError>, cfg: &RandomizationConfig) -> Result<()> {
    match z {
        Ok(z) => print_json(&record.with_z(&z, cfg)),
        Err(e @ MetricError::DegenerateNull { observed, mu }) => {
            print_json(&record.degenerate(observed, mu, cfg))?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn metric(cmd: MetricCommand, g: &GlobalArgs, exec: &RayonExecutor) -> Result<()> {
    let rand = g.randomization(RandomizationConfig::default());
    let lcc_mode = g.lcc_mode.unwrap_or_default();
    match cmd {
        MetricCommand::Lcc(args) => {
            let graph = io::read_graph(&args.graph)?;
            let view = NetworkView::new(&graph, g.type_mask());
            let m = resolve_module(&graph, &args.a, args.a_type, &args.link)?;
            let value = lcc_size(&view, &m, lcc_mode)?;
            print_json(&MetricRecord {
                metric: "lcc",
                a: args.a,
                value: Some(value as f64),
                ..Default::default()
            })
        }
        MetricCommand::LccZ(args) => {
            let graph = io::read_graph(&args.graph)?;
            let view = NetworkView::new(&graph, g.type_mask());
            let m = resolve_module(&graph, &args.a, args.a_type, &args.link)?;
            let z = lcc_zscore(&view, &m, lcc_mode, &rand, exec);
            let record = MetricRecord {
                metric: "lcc-z",
                a: args.a,
                ..Default::default()
            };
            emit_z(record, z, &rand)
        }
        MetricCommand::Distance(args) => pair_metric("distance", args, g, exec),
        MetricCommand::Separation(args) => pair_metric("separation", args, g, exec),
        MetricCommand::Proximity(args) => pair_metric("proximity", args, g, exec),
        MetricCommand::ProximityZ(args) => pair_metric("proximity-z", args, g, exec),
        MetricCommand::Rr(args) => assoc_metric("rr", args, g),
        MetricCommand::Semsim(args) => assoc_metric("semsim", args, g),
        MetricCommand::Pearson(args) => pearson_cmd(args),
    }
}

fn pair_metric(name: &'static str, args: PairArgs, g: &GlobalArgs, exec: &RayonExecutor) -> Result<()> {
    let graph = io::read_graph(&args.graph)?;
    let view = NetworkView::new(&graph, g.type_mask());
    let a = resolve_module(&graph, &args.a, args.a_type, &args.link)?;
    let b = resolve_module(&graph, &args.b, args.b_type, &args.link)?;
    let record = MetricRecord {
        metric: name,
        a: args.a,
        b: Some(args.b),
        ..Default::default()
    };
    let rand = g.randomization(RandomizationConfig::default());
    if name == "proximity-z" {
        let dm = view.distances(exec)?;
        return emit_z(record, proximity_zscore(&dm, &a, &b, &rand, g.policy(), exec), &rand);
    }
    let dm = view.distances(exec)?;
    let (value, skipped) = match name {
        "distance" => {
            let avg = network_distance(&dm, &a, &b, g.policy())?;
            (avg.value, avg.skipped)
        }
        "separation" => {
            let convention = g.separation_convention.unwrap_or_default();
            let s = separation(&dm, &a, &b, convention, g.policy())?;
            (s.value, s.skipped)
        }
        _ => {
            let avg = proximity_distance(&dm, &a, &b, g.policy())?;
            (avg.value, avg.skipped)
        }
    };
    print_json(&MetricRecord {
        value: Some(value),
        skipped: Some(skipped),
        ..record
    })
}

/// `rr` compares two entities as columns of the matrix of their
/// neighbours; `semsim` compares them as rows.
fn assoc_metric(name: &'static str, args: PairArgs, g: &GlobalArgs) -> Result<()> {
    let graph = io::read_graph(&args.graph)?;
    let [a_name] = &args.a[..] else {
        return Err(Error::Usage(format!("{name} takes one entity per side")));
    };
    let [b_name] = &args.b[..] else {
        return Err(Error::Usage(format!("{name} takes one entity per side")));
    };
    let a = io::resolve(&graph, a_name, args.a_type)?;
    let b = io::resolve(&graph, b_name, args.b_type)?;
    let t = graph.entity_type(a).map_err(|e| Error::Usage(e.to_string()))?;
    if graph.entity_type(b).ok() != Some(t) {
        return Err(Error::Usage(format!("`{a_name}` and `{b_name}` differ in type")));
    }
    let (preds, other) = resolve_link(&graph, a, args.link.via.as_deref(), args.link.member_type)?;
    let usage = |e: kgprox_core::assoc::AssocError| Error::Usage(e.to_string());
    let (value, n) = if name == "rr" {
        let m = AssociationMatrix::from_graph(&graph, other, t, preds);
        (m.relative_risk(a, b).map_err(usage)?, m.rows().len())
    } else {
        let m = AssociationMatrix::from_graph(&graph, t, other, preds);
        let mode = g.ic_mode.unwrap_or_default();
        (m.semantic_similarity(a, b, mode).map_err(usage)?, m.cols().len())
    };
    print_json(&MetricRecord {
        metric: name,
        a: args.a,
        b: Some(args.b),
        value: Some(value),
        n: Some(n),
        ..Default::default()
    })
}

fn pearson_cmd(args: PearsonArgs) -> Result<()> {
    let path = &args.csv;
    let mut reader = csv::Reader::from_reader(io::open(path)?);
    let headers = reader
        .headers()
        .map_err(|e| Error::input(path, Some(1), e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::input(path, Some(1), format!("no column `{name}`")))
    };
    let (xi, yi) = (column(&args.x)?, column(&args.y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| Error::input(path, e.position().map(|p| p.line()), e.to_string()))?;
        let line = record.position().map(|p| p.line());
        let num = |i: usize| -> Result<Option<f64>> {
            match record.get(i).map(str::trim) {
                None | Some("") => Ok(None),
                Some(s) => s.parse().map(Some).map_err(|_| Error::input(path, line, format!("`{s}` is not a number"))),
            }
        };
        // rows with an empty cell in either column are left out
        if let (Some(x), Some(y)) = (num(xi)?, num(yi)?) {
            xs.push(x);
            ys.push(y);
        }
    }
    let r = pearson(&xs, &ys).map_err(|e| Error::input(path, None, e.to_string()))?;
    print_json(&MetricRecord {
        metric: "pearson",
        a: vec![args.x],
        b: Some(vec![args.y]),
        value: Some(r.r),
        n: Some(r.n),
        p: r.p,
        ..Default::default()
    })
}

/// Effective pipeline config: file, then flags, then the positional
/// experiment.
pub fn pipeline_config(args: &PipelineArgs, g: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match &args.config {
        Some(path) => io::read_json(path)?,
        None => ExperimentConfig::new(args.experiment),
    };
    cfg.experiment = args.experiment;
    g.apply(&mut cfg);
    if let Some(z) = args.z_threshold {
        cfg.z_threshold = Some(z);
    }
    if let Some(p) = &args.predicates {
        cfg.predicates = Some(p.iter().copied().collect());
    }
    Ok(cfg.effective())
}

fn pipeline(args: PipelineArgs, g: &GlobalArgs, exec: &RayonExecutor, mut manifest: ManifestBuilder) -> Result<()> {
    let cfg = pipeline_config(&args, g)?;
    manifest.input(&args.graph)?;
    if let Some(path) = &args.config {
        manifest.input(path)?;
    }
    let graph = io::read_graph(&args.graph)?;
    let report = run_experiment(&graph, &cfg, exec)?;
    if let Some(path) = &args.matrix {
        let (focal, member) = cfg.experiment.roles();
        let m = AssociationMatrix::from_graph(&graph, focal, member, cfg.predicate_set());
        io::write_matrix_csv(io::create(path)?, &m).map_err(|e| Error::io(path, e))?;
    }
    let written = write_bundle(&args.out, &report, manifest.finish(&cfg))?;
    let s = &report.summary;
    eprintln!(
        "{}: {} focal entities, {} above z {}, {} pairs ({} unreachable); wrote {} files to {}",
        cfg.experiment.as_str(),
        s.focal_count,
        s.above_threshold,
        s.z_threshold,
        s.pair_count,
        s.unreachable_pairs,
        written.len(),
        args.out.display()
    );
    Ok(())
}

/// Convenience for tests and embedding: parse `args` (without the program
/// name) and run.
pub fn run_args<I, S>(args: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = std::iter::once("kgprox".to_string())
        .chain(args.into_iter().map(Into::into))
        .collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Usage(e.to_string()))?;
    run(cli, argv)
}
