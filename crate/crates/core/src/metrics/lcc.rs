use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::null::{standardize, stream_rng, Sampler};
use super::{MetricError, NetworkView, RandomizationConfig, ZScore};
use crate::exec::Executor;
use crate::model::EntityId;
use crate::module::NodeModule;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LccMode {
    /// Only direct edges between members.
    Induced,
    /// Two members are joined when they share a neighbor outside the set.
    #[default]
    SharedNeighbor,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: alloc::vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    fn largest(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&i| self.parent[i] == i)
            .map(|i| self.size[i])
            .max()
            .unwrap_or(0)
    }
}

/// LCC size of a sorted member list.
pub(crate) fn lcc_of(view: &NetworkView<'_>, members: &[EntityId], mode: LccMode) -> usize {
    let topology = view.graph().topology();
    let allowed = view.allowed();
    let mut uf = UnionFind::new(members.len());
    match mode {
        LccMode::Induced => {
            for (i, m) in members.iter().enumerate() {
                for &w in topology.neighbor_ids(m.0) {
                    if allowed[w as usize] {
                        if let Ok(j) = members.binary_search(&EntityId(w)) {
                            uf.union(i, j);
                        }
                    }
                }
            }
        }
        LccMode::SharedNeighbor => {
            let mut via: Vec<(u32, usize)> = Vec::new();
            for (i, m) in members.iter().enumerate() {
                for &w in topology.neighbor_ids(m.0) {
                    if allowed[w as usize] && members.binary_search(&EntityId(w)).is_err() {
                        via.push((w, i));
                    }
                }
            }
            via.sort_unstable();
            for pair in via.windows(2) {
                if pair[0].0 == pair[1].0 {
                    uf.union(pair[0].1, pair[1].1);
                }
            }
        }
    }
    uf.largest()
}

/// Size of the largest connected component formed by the module.
pub fn lcc_size(view: &NetworkView<'_>, module: &NodeModule, mode: LccMode) -> Result<usize, MetricError> {
    for &m in module.members() {
        view.check_node(m)?;
    }
    Ok(lcc_of(view, module.members(), mode))
}

/// LCC z-score against random same-size node sets of the module's type.
pub fn lcc_zscore<E: Executor>(
    view: &NetworkView<'_>,
    module: &NodeModule,
    mode: LccMode,
    cfg: &RandomizationConfig,
    exec: &E,
) -> Result<ZScore, MetricError> {
    cfg.validate()?;
    view.check_module(module)?;
    let observed = lcc_of(view, module.members(), mode) as f64;
    let sampler = Sampler::new(view, module.member_type(), module.members(), cfg)?;
    let seed = cfg.seed;
    let samples = exec.map(cfg.iterations, |i| {
        let mut rng = stream_rng(seed, i as u64);
        lcc_of(view, &sampler.draw(&mut rng), mode) as f64
    });
    standardize(observed, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::model::{EntityType, GraphBuilder, KnowledgeGraph, Predicate, TypeMask};

    fn fixture() -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for (s, d) in [("s1", "d1"), ("s2", "d1"), ("s3", "d2"), ("s4", "d2")] {
            b.add_triple(0, s, EntityType::Symptom, Predicate::Diagnosis, d, EntityType::Disease, 1)
                .unwrap();
        }
        b.build()
    }

    fn module(g: &KnowledgeGraph, names: &[&str]) -> NodeModule {
        NodeModule::from_members(g, names.iter().map(|n| g.find(n, EntityType::Symptom).unwrap()))
            .unwrap()
    }

    #[test]
    fn small_cases() {
        let g = fixture();
        let view = NetworkView::new(&g, TypeMask::default());
        let mode = LccMode::SharedNeighbor;
        assert_eq!(lcc_size(&view, &module(&g, &["s1"]), mode).unwrap(), 1);
        assert_eq!(lcc_size(&view, &module(&g, &["s1", "s2"]), mode).unwrap(), 2);
        assert_eq!(lcc_size(&view, &module(&g, &["s1", "s3"]), mode).unwrap(), 1);
        assert_eq!(lcc_size(&view, &module(&g, &["s1", "s2"]), LccMode::Induced).unwrap(), 1);
        let d = NodeModule::from_members(&g, g.ids_of_type(EntityType::Disease)).unwrap();
        assert_eq!(lcc_size(&view, &d, LccMode::Induced).unwrap(), 1);
    }

    #[test]
    fn whole_population_scores_zero() {
        let g = fixture();
        let view = NetworkView::new(&g, TypeMask::default());
        let all = NodeModule::from_members(&g, g.ids_of_type(EntityType::Symptom)).unwrap();
        let z = lcc_zscore(&view, &all, LccMode::SharedNeighbor, &RandomizationConfig::default(), &Sequential)
            .unwrap();
        assert_eq!(z.z, 0.0);
        assert_eq!(z.observed, 2.0);
    }

    #[test]
    fn insufficient_population() {
        let g = fixture();
        let view = NetworkView::new(&g, TypeMask::default());
        let cfg = RandomizationConfig {
            null_model: crate::metrics::NullModel::DegreeBinned,
            bin_floor: 10,
            ..Default::default()
        };
        // a single bin of four symptoms: drawing all four is fine
        let all = NodeModule::from_members(&g, g.ids_of_type(EntityType::Symptom)).unwrap();
        assert!(lcc_zscore(&view, &all, LccMode::SharedNeighbor, &cfg, &Sequential).is_ok());
        let masked = NetworkView::new(&g, [EntityType::Disease].into_iter().collect());
        assert!(matches!(
            lcc_zscore(&masked, &module(&g, &["s1"]), LccMode::SharedNeighbor, &cfg, &Sequential),
            Err(MetricError::MaskedNode(_))
        ));
    }
}
