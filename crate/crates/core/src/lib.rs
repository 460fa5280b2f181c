//! Network-proximity statistics over typed clinical knowledge graphs.
//!
//! The crate is `no_std` (it needs `alloc`). It covers the typed triple
//! store and its undirected analysis view, entity alignment, the
//! distance/clustering/proximity metrics with their seeded randomization
//! engine, association statistics, and the experiment pipeline. File
//! formats, parallel execution and the command line live in the `kgprox`
//! crate.
#![no_std]

extern crate alloc;

pub mod align;
pub mod assoc;
pub mod exec;
pub mod model;
pub mod module;
pub mod metrics;
pub mod pipeline;
pub mod special;
pub mod topology;

pub use exec::{Executor, Sequential};
pub use model::{
    EntityId, EntityType, GraphError, GraphStats, IngestError, IngestOptions, KnowledgeGraph,
    Predicate, PredicateSet, RawRow, TypeMask,
};
pub use module::NodeModule;
