use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{EntityId, EntityType, GraphError, KnowledgeGraph, PredicateSet};

/// A set of same-typed nodes, usually the members linked to one focal
/// entity through a predicate filter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeModule {
    focal: Option<EntityId>,
    members: Vec<EntityId>,
    member_type: EntityType,
    predicates: PredicateSet,
}

impl NodeModule {
    pub(crate) fn from_parts(
        focal: Option<EntityId>,
        mut members: Vec<EntityId>,
        member_type: EntityType,
        predicates: PredicateSet,
    ) -> Self {
        members.sort_unstable();
        members.dedup();
        NodeModule {
            focal,
            members,
            member_type,
            predicates,
        }
    }

    /// Ad-hoc module from explicit members, which must exist and share a type.
    pub fn from_members(
        graph: &KnowledgeGraph,
        members: impl IntoIterator<Item = EntityId>,
    ) -> Result<Self, GraphError> {
        let members: Vec<EntityId> = members.into_iter().collect();
        let first = *members.first().ok_or(GraphError::EmptyModule)?;
        let member_type = graph.entity_type(first)?;
        for &m in &members {
            if graph.entity_type(m)? != member_type {
                return Err(GraphError::MixedTypes);
            }
        }
        Ok(Self::from_parts(None, members, member_type, PredicateSet::EMPTY))
    }

    pub fn focal(&self) -> Option<EntityId> {
        self.focal
    }

    /// Sorted, deduplicated members.
    pub fn members(&self) -> &[EntityId] {
        &self.members
    }

    pub fn member_type(&self) -> EntityType {
        self.member_type
    }

    pub fn predicates(&self) -> PredicateSet {
        self.predicates
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.members.binary_search(&id).is_ok()
    }
}
