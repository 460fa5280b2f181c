//! Typed triple store.
//!
//! Entities are keyed by `(name, type)`. Identifiers are positions in the
//! `(name, type)`-sorted entity list, so the same set of input rows always
//! yields the same ids no matter what order the rows arrived in.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::module::NodeModule;
use crate::topology::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    Patient,
    Symptom,
    Severity,
    RiskFactor,
    Drug,
    Disease,
}

impl EntityType {
    pub const ALL: [EntityType; 6] = [
        EntityType::Patient,
        EntityType::Symptom,
        EntityType::Severity,
        EntityType::RiskFactor,
        EntityType::Drug,
        EntityType::Disease,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Patient => "patient",
            EntityType::Symptom => "symptom",
            EntityType::Severity => "severity",
            EntityType::RiskFactor => "risk_factor",
            EntityType::Drug => "drug",
            EntityType::Disease => "disease",
        }
    }

    /// Parses a type token. The extraction-stage disease subtypes
    /// (`diagnosed_disease`, `differential_diagnosed_disease`) fold into
    /// [`EntityType::Disease`]; spaces are accepted in place of underscores.
    pub fn parse(token: &str) -> Option<Self> {
        let token = token.trim();
        let normalized: String = token
            .chars()
            .map(|c| if c == ' ' { '_' } else { c })
            .collect();
        Some(match normalized.as_str() {
            "patient" => EntityType::Patient,
            "symptom" => EntityType::Symptom,
            "severity" => EntityType::Severity,
            "risk_factor" => EntityType::RiskFactor,
            "drug" => EntityType::Drug,
            "disease" | "diagnosed_disease" | "differential_diagnosed_disease" => {
                EntityType::Disease
            }
            _ => return None,
        })
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Suffer,
    Treat,
    Diagnosis,
    PrimaryDiagnosis,
    DifferentialDiagnosis,
    Cause,
}

impl Predicate {
    pub const ALL: [Predicate; 6] = [
        Predicate::Suffer,
        Predicate::Treat,
        Predicate::Diagnosis,
        Predicate::PrimaryDiagnosis,
        Predicate::DifferentialDiagnosis,
        Predicate::Cause,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Predicate::Suffer => "suffer",
            Predicate::Treat => "treat",
            Predicate::Diagnosis => "diagnosis",
            Predicate::PrimaryDiagnosis => "primary_diagnosis",
            Predicate::DifferentialDiagnosis => "differential_diagnosis",
            Predicate::Cause => "cause",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.as_str() == token.trim())
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One legal `(head type, predicate, tail type)` combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelationSchema {
    pub head_type: EntityType,
    pub predicate: Predicate,
    pub tail_type: EntityType,
}

const fn schema(head_type: EntityType, predicate: Predicate, tail_type: EntityType) -> RelationSchema {
    RelationSchema {
        head_type,
        predicate,
        tail_type,
    }
}

pub const LEGAL_SCHEMAS: [RelationSchema; 7] = [
    schema(EntityType::Patient, Predicate::Suffer, EntityType::Disease),
    schema(EntityType::Drug, Predicate::Treat, EntityType::Disease),
    schema(EntityType::Symptom, Predicate::Diagnosis, EntityType::Disease),
    schema(EntityType::Symptom, Predicate::PrimaryDiagnosis, EntityType::Disease),
    schema(EntityType::Symptom, Predicate::DifferentialDiagnosis, EntityType::Disease),
    schema(EntityType::RiskFactor, Predicate::Cause, EntityType::Disease),
    schema(EntityType::Severity, Predicate::Diagnosis, EntityType::Disease),
];

pub fn is_legal(head_type: EntityType, predicate: Predicate, tail_type: EntityType) -> bool {
    LEGAL_SCHEMAS
        .iter()
        .any(|s| s.head_type == head_type && s.predicate == predicate && s.tail_type == tail_type)
}

/// True when `predicate` may link the two types in either orientation.
pub fn links(a: EntityType, predicate: Predicate, b: EntityType) -> bool {
    is_legal(a, predicate, b) || is_legal(b, predicate, a)
}

/// Small bitset over [`Predicate`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Predicate>", into = "Vec<Predicate>")]
pub struct PredicateSet(u8);

impl PredicateSet {
    pub const EMPTY: PredicateSet = PredicateSet(0);

    pub fn all() -> Self {
        Predicate::ALL.into_iter().collect()
    }

    pub fn single(p: Predicate) -> Self {
        PredicateSet(p.bit())
    }

    pub fn insert(&mut self, p: Predicate) {
        self.0 |= p.bit();
    }

    pub fn contains(self, p: Predicate) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn intersects(self, other: PredicateSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: PredicateSet) -> Self {
        PredicateSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Predicate> {
        Predicate::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

impl FromIterator<Predicate> for PredicateSet {
    fn from_iter<I: IntoIterator<Item = Predicate>>(iter: I) -> Self {
        let mut set = PredicateSet::EMPTY;
        for p in iter {
            set.insert(p);
        }
        set
    }
}

impl From<Vec<Predicate>> for PredicateSet {
    fn from(v: Vec<Predicate>) -> Self {
        v.into_iter().collect()
    }
}

impl From<PredicateSet> for Vec<Predicate> {
    fn from(s: PredicateSet) -> Self {
        s.iter().collect()
    }
}

/// Node-type mask selecting which entity types take part in the distance
/// substrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<EntityType>", into = "Vec<EntityType>")]
pub struct TypeMask(u8);

impl TypeMask {
    pub const NONE: TypeMask = TypeMask(0);

    pub fn all() -> Self {
        EntityType::ALL.into_iter().collect()
    }

    pub fn contains(self, t: EntityType) -> bool {
        self.0 & t.bit() != 0
    }

    pub fn insert(&mut self, t: EntityType) {
        self.0 |= t.bit();
    }

    pub fn iter(self) -> impl Iterator<Item = EntityType> {
        EntityType::ALL.into_iter().filter(move |t| self.contains(*t))
    }
}

/// Symptom, disease, drug and risk factor; patients and severities are left out.
impl Default for TypeMask {
    fn default() -> Self {
        [
            EntityType::Symptom,
            EntityType::Disease,
            EntityType::Drug,
            EntityType::RiskFactor,
        ]
        .into_iter()
        .collect()
    }
}

impl FromIterator<EntityType> for TypeMask {
    fn from_iter<I: IntoIterator<Item = EntityType>>(iter: I) -> Self {
        let mut m = TypeMask::NONE;
        for t in iter {
            m.insert(t);
        }
        m
    }
}

impl From<Vec<EntityType>> for TypeMask {
    fn from(v: Vec<EntityType>) -> Self {
        v.into_iter().collect()
    }
}

impl From<TypeMask> for Vec<EntityType> {
    fn from(m: TypeMask) -> Self {
        m.iter().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub aliases: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub head: EntityId,
    pub predicate: Predicate,
    pub tail: EntityId,
    /// Number of input rows collapsed into this triple.
    pub multiplicity: u32,
}

/// One unvalidated input record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRow {
    pub head: String,
    pub head_type: String,
    pub predicate: String,
    pub tail: String,
    pub tail_type: String,
}

impl RawRow {
    pub fn new(
        head: impl Into<String>,
        head_type: impl Into<String>,
        predicate: impl Into<String>,
        tail: impl Into<String>,
        tail_type: impl Into<String>,
    ) -> Self {
        RawRow {
            head: head.into(),
            head_type: head_type.into(),
            predicate: predicate.into(),
            tail: tail.into(),
            tail_type: tail_type.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IngestOptions {
    /// Strip surrounding whitespace from names.
    pub trim_names: bool,
    /// Lowercase names before keying entities.
    pub lowercase_names: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            trim_names: true,
            lowercase_names: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("row {row}: unknown entity type `{token}`")]
    UnknownType { row: usize, token: String },
    #[error("row {row}: unknown predicate `{token}`")]
    UnknownPredicate { row: usize, token: String },
    #[error("row {row}: empty entity name")]
    EmptyName { row: usize },
    #[error("row {row}: illegal relation ({head_type}, {predicate}, {tail_type})")]
    SchemaViolation {
        row: usize,
        head_type: EntityType,
        predicate: Predicate,
        tail_type: EntityType,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(EntityId),
    #[error("no relation `{predicate}` links {member_type} to {focal_type}")]
    IllegalSchema {
        focal_type: EntityType,
        predicate: Predicate,
        member_type: EntityType,
    },
    #[error("module members must share one entity type")]
    MixedTypes,
    #[error("module is empty")]
    EmptyModule,
}

type EntityKey = (String, EntityType);

/// Accumulates validated triples and entities before freezing them into a
/// [`KnowledgeGraph`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    entities: BTreeMap<EntityKey, BTreeSet<String>>,
    triples: BTreeMap<(EntityKey, Predicate, EntityKey), u32>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an entity, merging `aliases` into any existing alias set.
    pub fn add_entity<I, S>(&mut self, name: &str, entity_type: EntityType, aliases: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set = self
            .entities
            .entry((name.to_string(), entity_type))
            .or_default();
        set.insert(name.to_string());
        set.extend(aliases.into_iter().map(Into::into));
    }

    /// Adds a triple after checking it against the relation schema. `row`
    /// is only used for error reporting.
    #[allow(clippy::too_many_arguments)]
    pub fn add_triple(
        &mut self,
        row: usize,
        head: &str,
        head_type: EntityType,
        predicate: Predicate,
        tail: &str,
        tail_type: EntityType,
        multiplicity: u32,
    ) -> Result<(), IngestError> {
        if head.is_empty() || tail.is_empty() {
            return Err(IngestError::EmptyName { row });
        }
        if !is_legal(head_type, predicate, tail_type) {
            return Err(IngestError::SchemaViolation {
                row,
                head_type,
                predicate,
                tail_type,
            });
        }
        self.add_entity(head, head_type, core::iter::empty::<String>());
        self.add_entity(tail, tail_type, core::iter::empty::<String>());
        *self
            .triples
            .entry(((head.to_string(), head_type), predicate, (tail.to_string(), tail_type)))
            .or_insert(0) += multiplicity;
        Ok(())
    }

    pub fn build(self) -> KnowledgeGraph {
        let keys: Vec<EntityKey> = self.entities.keys().cloned().collect();
        let entities: Vec<Entity> = self
            .entities
            .into_iter()
            .enumerate()
            .map(|(i, ((name, entity_type), aliases))| Entity {
                id: EntityId(i as u32),
                name,
                entity_type,
                aliases,
            })
            .collect();
        let lookup = |key: &EntityKey| EntityId(keys.binary_search(key).expect("registered") as u32);
        let mut triples: Vec<Triple> = self
            .triples
            .iter()
            .map(|((h, p, t), &m)| Triple {
                head: lookup(h),
                predicate: *p,
                tail: lookup(t),
                multiplicity: m,
            })
            .collect();
        triples.sort();
        let topology = Topology::from_edges(
            entities.len(),
            triples
                .iter()
                .map(|t| (t.head.0, t.tail.0, PredicateSet::single(t.predicate))),
        );
        KnowledgeGraph {
            entities,
            triples,
            topology,
        }
    }
}

/// Parses, validates and deduplicates a stream of raw rows.
pub fn ingest_triples<I>(rows: I, options: IngestOptions) -> Result<KnowledgeGraph, IngestError>
where
    I: IntoIterator<Item = RawRow>,
{
    let mut builder = GraphBuilder::new();
    for (row, raw) in rows.into_iter().enumerate() {
        let head_type = EntityType::parse(&raw.head_type).ok_or_else(|| IngestError::UnknownType {
            row,
            token: raw.head_type.clone(),
        })?;
        let tail_type = EntityType::parse(&raw.tail_type).ok_or_else(|| IngestError::UnknownType {
            row,
            token: raw.tail_type.clone(),
        })?;
        let predicate =
            Predicate::parse(&raw.predicate).ok_or_else(|| IngestError::UnknownPredicate {
                row,
                token: raw.predicate.clone(),
            })?;
        let head = normalize_name(&raw.head, options);
        let tail = normalize_name(&raw.tail, options);
        builder.add_triple(row, &head, head_type, predicate, &tail, tail_type, 1)?;
    }
    Ok(builder.build())
}

fn normalize_name(name: &str, options: IngestOptions) -> String {
    let name = if options.trim_names { name.trim() } else { name };
    if options.lowercase_names {
        name.to_lowercase()
    } else {
        name.to_string()
    }
}

/// Immutable typed multigraph with a collapsed undirected view.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    triples: Vec<Triple>,
    topology: Topology,
}

impl KnowledgeGraph {
    pub fn empty() -> Self {
        GraphBuilder::new().build()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entity(&self, id: EntityId) -> Result<&Entity, GraphError> {
        self.entities.get(id.index()).ok_or(GraphError::UnknownNode(id))
    }

    pub fn entity_type(&self, id: EntityId) -> Result<EntityType, GraphError> {
        self.entity(id).map(|e| e.entity_type)
    }

    pub fn name(&self, id: EntityId) -> &str {
        &self.entities[id.index()].name
    }

    pub fn find(&self, name: &str, entity_type: EntityType) -> Option<EntityId> {
        self.entities
            .binary_search_by(|e| (e.name.as_str(), e.entity_type).cmp(&(name, entity_type)))
            .ok()
            .map(|i| EntityId(i as u32))
    }

    /// All entities carrying `name`, across types.
    pub fn find_any(&self, name: &str) -> Vec<EntityId> {
        EntityType::ALL
            .into_iter()
            .filter_map(|t| self.find(name, t))
            .collect()
    }

    pub fn ids_of_type(&self, entity_type: EntityType) -> impl Iterator<Item = EntityId> + '_ {
        self.entities
            .iter()
            .filter(move |e| e.entity_type == entity_type)
            .map(|e| e.id)
    }

    /// `true` for every node whose type passes `mask`.
    pub fn node_mask(&self, mask: TypeMask) -> Vec<bool> {
        self.entities
            .iter()
            .map(|e| mask.contains(e.entity_type))
            .collect()
    }

    pub fn triple_count(&self, predicate: Predicate) -> usize {
        self.triples.iter().filter(|t| t.predicate == predicate).count()
    }

    /// Entities sharing at least one triple with `node`, optionally restricted
    /// by predicate and by neighbor type. Never contains `node` itself.
    pub fn neighbors(
        &self,
        node: EntityId,
        predicate_filter: Option<PredicateSet>,
        type_filter: Option<TypeMask>,
    ) -> Result<BTreeSet<EntityId>, GraphError> {
        self.entity(node)?;
        Ok(self
            .topology
            .neighbors(node.0)
            .filter(|(_, labels)| predicate_filter.is_none_or(|f| f.intersects(*labels)))
            .map(|(n, _)| EntityId(n))
            .filter(|&n| n != node)
            .filter(|&n| type_filter.is_none_or(|m| m.contains(self.entities[n.index()].entity_type)))
            .collect())
    }

    /// Members of `member_type` linked to `focal` by `predicate`.
    pub fn module_of(
        &self,
        focal: EntityId,
        predicate: Predicate,
        member_type: EntityType,
    ) -> Result<NodeModule, GraphError> {
        self.module_via(focal, PredicateSet::single(predicate), member_type)
    }

    /// Like [`module_of`](Self::module_of) with a set of predicates; a
    /// member qualifies through any of them. Predicates that cannot link
    /// the two types are an error.
    pub fn module_via(
        &self,
        focal: EntityId,
        predicates: PredicateSet,
        member_type: EntityType,
    ) -> Result<NodeModule, GraphError> {
        let focal_type = self.entity_type(focal)?;
        for predicate in predicates.iter() {
            if !links(member_type, predicate, focal_type) {
                return Err(GraphError::IllegalSchema {
                    focal_type,
                    predicate,
                    member_type,
                });
            }
        }
        let members = self.neighbors(focal, Some(predicates), Some(TypeMask::NONE.with(member_type)))?;
        Ok(NodeModule::from_parts(
            Some(focal),
            members.into_iter().collect(),
            member_type,
            predicates,
        ))
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }
}

impl TypeMask {
    pub fn with(mut self, t: EntityType) -> Self {
        self.insert(t);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub entities_by_type: BTreeMap<EntityType, usize>,
    pub triples_by_predicate: BTreeMap<Predicate, usize>,
    pub total_entities: usize,
    pub total_triples: usize,
    pub undirected_edges: usize,
}

pub fn graph_stats(graph: &KnowledgeGraph) -> GraphStats {
    let mut entities_by_type: BTreeMap<EntityType, usize> =
        EntityType::ALL.into_iter().map(|t| (t, 0)).collect();
    for e in &graph.entities {
        *entities_by_type.entry(e.entity_type).or_default() += 1;
    }
    let mut triples_by_predicate: BTreeMap<Predicate, usize> =
        Predicate::ALL.into_iter().map(|p| (p, 0)).collect();
    for t in &graph.triples {
        *triples_by_predicate.entry(t.predicate).or_default() += 1;
    }
    GraphStats {
        entities_by_type,
        triples_by_predicate,
        total_entities: graph.entities.len(),
        total_triples: graph.triples.len(),
        undirected_edges: graph.topology.edge_count(),
    }
}
