//! Distance, module-clustering, separation and proximity metrics.
//!
//! Everything here runs on a [`NetworkView`]: the knowledge graph seen as an
//! undirected unweighted graph restricted to the node types of a
//! [`TypeMask`]. Distance-based metrics read from a precomputed
//! [`DistanceMatrix`] over that view.

use alloc::vec::Vec;

use thiserror::Error;

use crate::exec::Executor;
use crate::model::{EntityId, EntityType, KnowledgeGraph, TypeMask};
use crate::module::NodeModule;
use crate::topology::UNREACHABLE;

pub mod distance;
pub mod lcc;
pub mod null;

pub use distance::{
    network_distance, proximity_distance, separation, shortest_path_length, Averaged, Distance,
    Separation, SeparationConvention, UnreachablePolicy,
};
pub use lcc::{lcc_size, lcc_zscore, LccMode};
pub use null::{proximity_zscore, NullModel, RandomizationConfig, ZScore};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MetricError {
    #[error("unknown node {0}")]
    UnknownNode(EntityId),
    #[error("node {0} is excluded by the node-type mask")]
    MaskedNode(EntityId),
    #[error("module is empty")]
    EmptyModule,
    #[error("nodes {a} and {b} are not connected")]
    UnreachablePair { a: EntityId, b: EntityId },
    #[error("node {0} reaches no node of the target set")]
    UnreachableSource(EntityId),
    #[error("intra-set distance is undefined for a set with fewer than two nodes")]
    SingletonSet,
    #[error("null distribution has zero spread (observed {observed}, mean {mu})")]
    DegenerateNull { observed: f64, mu: f64 },
    #[error("need {needed} nodes for a random draw but only {available} are available")]
    InsufficientPopulation { needed: usize, available: usize },
    #[error("graph with {0} nodes is too large for a dense distance matrix")]
    GraphTooLarge(usize),
    #[error("invalid randomization config: {0}")]
    InvalidConfig(&'static str),
}

/// A knowledge graph restricted to the node types of a mask.
#[derive(Clone, Debug)]
pub struct NetworkView<'g> {
    graph: &'g KnowledgeGraph,
    mask: TypeMask,
    allowed: Vec<bool>,
}

impl<'g> NetworkView<'g> {
    pub fn new(graph: &'g KnowledgeGraph, mask: TypeMask) -> Self {
        NetworkView {
            graph,
            mask,
            allowed: graph.node_mask(mask),
        }
    }

    pub fn graph(&self) -> &'g KnowledgeGraph {
        self.graph
    }

    pub fn mask(&self) -> TypeMask {
        self.mask
    }

    pub fn allowed(&self) -> &[bool] {
        &self.allowed
    }

    pub fn is_allowed(&self, id: EntityId) -> bool {
        self.allowed.get(id.index()).copied().unwrap_or(false)
    }

    pub fn check_node(&self, id: EntityId) -> Result<(), MetricError> {
        if id.index() >= self.allowed.len() {
            Err(MetricError::UnknownNode(id))
        } else if !self.allowed[id.index()] {
            Err(MetricError::MaskedNode(id))
        } else {
            Ok(())
        }
    }

    pub fn check_module(&self, module: &NodeModule) -> Result<(), MetricError> {
        if module.is_empty() {
            return Err(MetricError::EmptyModule);
        }
        module.members().iter().try_for_each(|&m| self.check_node(m))
    }

    /// Allowed nodes of one type, ascending.
    pub fn pool(&self, entity_type: EntityType) -> Vec<EntityId> {
        if !self.mask.contains(entity_type) {
            return Vec::new();
        }
        self.graph.ids_of_type(entity_type).collect()
    }

    /// Number of allowed neighbors.
    pub fn degree(&self, id: EntityId) -> usize {
        self.graph
            .topology()
            .neighbor_ids(id.0)
            .iter()
            .filter(|&&v| self.allowed[v as usize])
            .count()
    }

    /// All-pairs hop counts over this view, one BFS per allowed node.
    pub fn distances<E: Executor>(&self, exec: &E) -> Result<DistanceMatrix<'g>, MetricError> {
        DistanceMatrix::build(self.clone(), exec)
    }
}

const NO_PATH: u16 = u16::MAX;

/// Dense hop-count table over a [`NetworkView`].
#[derive(Clone, Debug)]
pub struct DistanceMatrix<'g> {
    view: NetworkView<'g>,
    rows: Vec<Vec<u16>>,
}

impl<'g> DistanceMatrix<'g> {
    pub fn build<E: Executor>(view: NetworkView<'g>, exec: &E) -> Result<Self, MetricError> {
        let n = view.graph.len();
        if n >= NO_PATH as usize {
            return Err(MetricError::GraphTooLarge(n));
        }
        let topology = view.graph.topology();
        let allowed = &view.allowed;
        let rows = exec.map(n, |i| {
            if !allowed[i] {
                return Vec::new();
            }
            topology
                .bfs(&[i as u32], allowed)
                .into_iter()
                .map(|d| if d == UNREACHABLE { NO_PATH } else { d as u16 })
                .collect()
        });
        Ok(DistanceMatrix { view, rows })
    }

    pub fn view(&self) -> &NetworkView<'g> {
        &self.view
    }

    /// Hop count, or `None` when unreachable or either node is masked.
    #[inline]
    pub fn get(&self, a: EntityId, b: EntityId) -> Option<u32> {
        match self.rows.get(a.index()).and_then(|r| r.get(b.index())) {
            Some(&d) if d != NO_PATH => Some(d as u32),
            _ => None,
        }
    }
}
