use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, MetricError, NetworkView};
use crate::model::{EntityId, KnowledgeGraph, TypeMask};
use crate::module::NodeModule;
use crate::topology::UNREACHABLE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

/// Single-pair BFS hop count on the masked undirected view.
pub fn shortest_path_length(
    graph: &KnowledgeGraph,
    a: EntityId,
    b: EntityId,
    mask: TypeMask,
) -> Result<Distance, MetricError> {
    let view = NetworkView::new(graph, mask);
    view.check_node(a)?;
    view.check_node(b)?;
    if a == b {
        return Ok(Distance::Hops(0));
    }
    let d = graph.topology().bfs(&[a.0], view.allowed())[b.index()];
    Ok(if d == UNREACHABLE {
        Distance::Unreachable
    } else {
        Distance::Hops(d)
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnreachablePolicy {
    /// Any unreachable pair is an error.
    #[default]
    Error,
    /// Average over reachable pairs only and count the rest.
    Skip,
}

/// A mean together with the number of terms dropped as unreachable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Averaged {
    pub value: f64,
    pub skipped: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationConvention {
    /// Means over all distinct node pairs.
    #[default]
    AllPairs,
    /// Means over each node's distance to its nearest (distinct) partner.
    NearestNeighbor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Separation {
    pub value: f64,
    pub d_ab: f64,
    pub d_aa: f64,
    pub d_bb: f64,
    pub skipped: usize,
}

/// Running mean of integer hop counts. Sums stay exact, so the result does
/// not depend on summation order.
#[derive(Default)]
struct HopMean {
    sum: u64,
    count: u64,
    skipped: usize,
}

impl HopMean {
    fn finish(self) -> Option<Averaged> {
        (self.count > 0).then(|| Averaged {
            value: self.sum as f64 / self.count as f64,
            skipped: self.skipped,
        })
    }
}

fn check_sets(dm: &DistanceMatrix<'_>, a: &NodeModule, b: &NodeModule) -> Result<(), MetricError> {
    dm.view().check_module(a)?;
    dm.view().check_module(b)
}

/// Mean hop count over all `|A|·|B|` ordered pairs; nodes in both sets
/// contribute zero.
pub fn network_distance(
    dm: &DistanceMatrix<'_>,
    a: &NodeModule,
    b: &NodeModule,
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    check_sets(dm, a, b)?;
    network_distance_ids(dm, a.members(), b.members(), policy)
}

pub(crate) fn network_distance_ids(
    dm: &DistanceMatrix<'_>,
    a: &[EntityId],
    b: &[EntityId],
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    let mut acc = HopMean::default();
    for &x in a {
        for &y in b {
            add_pair(dm, &mut acc, x, y, policy)?;
        }
    }
    acc.finish().ok_or_else(|| first_unreachable(a, b))
}

fn add_pair(
    dm: &DistanceMatrix<'_>,
    acc: &mut HopMean,
    x: EntityId,
    y: EntityId,
    policy: UnreachablePolicy,
) -> Result<(), MetricError> {
    match dm.get(x, y) {
        Some(d) => {
            acc.sum += d as u64;
            acc.count += 1;
        }
        None => match policy {
            UnreachablePolicy::Error => return Err(MetricError::UnreachablePair { a: x, b: y }),
            UnreachablePolicy::Skip => acc.skipped += 1,
        },
    }
    Ok(())
}

fn first_unreachable(a: &[EntityId], b: &[EntityId]) -> MetricError {
    match (a.first(), b.first()) {
        (Some(&a), Some(&b)) => MetricError::UnreachablePair { a, b },
        _ => MetricError::EmptyModule,
    }
}

/// Network separation `⟨d_ab⟩ − (⟨d_aa⟩ + ⟨d_bb⟩)/2`.
///
/// With [`SeparationConvention::AllPairs`] every mean runs over pairs of
/// distinct nodes, so `⟨d_ab⟩` leaves out a node paired with itself and
/// `S(A, A) = 0`. With [`SeparationConvention::NearestNeighbor`] each node
/// contributes its distance to the closest node of the other set
/// (`⟨d_ab⟩`, over `|A| + |B|` terms) or the closest other node of its own
/// set (`⟨d_aa⟩`).
pub fn separation(
    dm: &DistanceMatrix<'_>,
    a: &NodeModule,
    b: &NodeModule,
    convention: SeparationConvention,
    policy: UnreachablePolicy,
) -> Result<Separation, MetricError> {
    check_sets(dm, a, b)?;
    separation_ids(dm, a.members(), b.members(), convention, policy)
}

pub(crate) fn separation_ids(
    dm: &DistanceMatrix<'_>,
    a: &[EntityId],
    b: &[EntityId],
    convention: SeparationConvention,
    policy: UnreachablePolicy,
) -> Result<Separation, MetricError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MetricError::SingletonSet);
    }
    let (d_ab, d_aa, d_bb) = match convention {
        SeparationConvention::AllPairs => (
            cross_distinct_mean(dm, a, b, policy)?,
            intra_all_pairs(dm, a, policy)?,
            intra_all_pairs(dm, b, policy)?,
        ),
        SeparationConvention::NearestNeighbor => {
            let mut acc = HopMean::default();
            nearest_into(dm, &mut acc, a, b, false, policy)?;
            nearest_into(dm, &mut acc, b, a, false, policy)?;
            let cross = acc.finish().ok_or_else(|| first_unreachable(a, b))?;
            (cross, intra_nearest(dm, a, policy)?, intra_nearest(dm, b, policy)?)
        }
    };
    Ok(Separation {
        value: d_ab.value - (d_aa.value + d_bb.value) / 2.0,
        d_ab: d_ab.value,
        d_aa: d_aa.value,
        d_bb: d_bb.value,
        skipped: d_ab.skipped + d_aa.skipped + d_bb.skipped,
    })
}

fn cross_distinct_mean(
    dm: &DistanceMatrix<'_>,
    a: &[EntityId],
    b: &[EntityId],
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    let mut acc = HopMean::default();
    for &x in a {
        for &y in b {
            if x != y {
                add_pair(dm, &mut acc, x, y, policy)?;
            }
        }
    }
    acc.finish().ok_or(MetricError::SingletonSet)
}

fn intra_all_pairs(
    dm: &DistanceMatrix<'_>,
    set: &[EntityId],
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    let mut acc = HopMean::default();
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[i + 1..] {
            add_pair(dm, &mut acc, x, y, policy)?;
        }
    }
    acc.finish().ok_or_else(|| first_unreachable(set, &set[1..]))
}

fn intra_nearest(
    dm: &DistanceMatrix<'_>,
    set: &[EntityId],
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    let mut acc = HopMean::default();
    nearest_into(dm, &mut acc, set, set, true, policy)?;
    acc.finish().ok_or_else(|| first_unreachable(set, &set[1..]))
}

/// Adds, for every source, its distance to the closest target (excluding
/// itself when `distinct`).
fn nearest_into(
    dm: &DistanceMatrix<'_>,
    acc: &mut HopMean,
    sources: &[EntityId],
    targets: &[EntityId],
    distinct: bool,
    policy: UnreachablePolicy,
) -> Result<(), MetricError> {
    for &s in sources {
        let best = targets
            .iter()
            .filter(|&&t| !(distinct && t == s))
            .filter_map(|&t| dm.get(s, t))
            .min();
        match best {
            Some(d) => {
                acc.sum += d as u64;
                acc.count += 1;
            }
            None => match policy {
                UnreachablePolicy::Error => return Err(MetricError::UnreachableSource(s)),
                UnreachablePolicy::Skip => acc.skipped += 1,
            },
        }
    }
    Ok(())
}

/// Proximity `d(A, B)`: mean over `a ∈ A` of the hop count to the closest
/// node of `B`. Not symmetric.
pub fn proximity_distance(
    dm: &DistanceMatrix<'_>,
    a: &NodeModule,
    b: &NodeModule,
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    check_sets(dm, a, b)?;
    proximity_ids(dm, a.members(), b.members(), policy)
}

pub(crate) fn proximity_ids(
    dm: &DistanceMatrix<'_>,
    a: &[EntityId],
    b: &[EntityId],
    policy: UnreachablePolicy,
) -> Result<Averaged, MetricError> {
    let mut acc = HopMean::default();
    nearest_into(dm, &mut acc, a, b, false, policy)?;
    acc.finish()
        .ok_or_else(|| a.first().map_or(MetricError::EmptyModule, |&s| MetricError::UnreachableSource(s)))
}

/// Hop counts of every ordered pair, for callers that want raw values.
pub fn pair_distances(dm: &DistanceMatrix<'_>, a: &[EntityId], b: &[EntityId]) -> Vec<Option<u32>> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .map(|(x, y)| dm.get(x, y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::model::{EntityType, GraphBuilder, Predicate};
    use alloc::format;

    /// Path graph built from legal triples: s0 - d0 - s1 - d1 - s2 ...
    /// Returns the graph and the node ids along the path.
    fn path_graph(len: usize) -> (KnowledgeGraph, Vec<EntityId>) {
        let mut b = GraphBuilder::new();
        let name = |i: usize| {
            if i % 2 == 0 {
                (format!("s{i:02}"), EntityType::Symptom)
            } else {
                (format!("d{i:02}"), EntityType::Disease)
            }
        };
        for i in 0..len - 1 {
            let (x, tx) = name(i);
            let (y, ty) = name(i + 1);
            let ((h, th), (t, tt)) = if tx == EntityType::Symptom {
                ((x, tx), (y, ty))
            } else {
                ((y, ty), (x, tx))
            };
            b.add_triple(i, &h, th, Predicate::Diagnosis, &t, tt, 1).unwrap();
        }
        let g = b.build();
        let ids = (0..len)
            .map(|i| {
                let (n, t) = name(i);
                g.find(&n, t).unwrap()
            })
            .collect();
        (g, ids)
    }

    #[test]
    fn path_examples() {
        let (g, p) = path_graph(3);
        let (x, y, z) = (p[0], p[1], p[2]);
        let mask = TypeMask::all();
        assert_eq!(shortest_path_length(&g, x, x, mask).unwrap(), Distance::Hops(0));
        assert_eq!(shortest_path_length(&g, x, z, mask).unwrap(), Distance::Hops(2));
        let dm = NetworkView::new(&g, mask).distances(&Sequential).unwrap();
        let strict = UnreachablePolicy::Error;
        assert_eq!(network_distance_ids(&dm, &[x], &[x], strict).unwrap().value, 0.0);
        assert_eq!(network_distance_ids(&dm, &[x], &[z], strict).unwrap().value, 2.0);
        assert_eq!(network_distance_ids(&dm, &[x, y], &[y, z], strict).unwrap().value, 1.0);
        assert_eq!(proximity_ids(&dm, &[x, z], &[y], strict).unwrap().value, 1.0);
        assert_eq!(proximity_ids(&dm, &[x, z], &[x, y, z], strict).unwrap().value, 0.0);
    }

    #[test]
    fn masked_and_unreachable() {
        let (g, p) = path_graph(3);
        // masking diseases cuts the path
        let mask: TypeMask = [EntityType::Symptom].into_iter().collect();
        assert_eq!(shortest_path_length(&g, p[0], p[2], mask).unwrap(), Distance::Unreachable);
        assert_eq!(
            shortest_path_length(&g, p[0], p[1], mask),
            Err(MetricError::MaskedNode(p[1]))
        );
        let dm = NetworkView::new(&g, mask).distances(&Sequential).unwrap();
        assert!(matches!(
            network_distance_ids(&dm, &[p[0]], &[p[2]], UnreachablePolicy::Error),
            Err(MetricError::UnreachablePair { .. })
        ));
        let skipped =
            network_distance_ids(&dm, &[p[0], p[2]], &[p[2]], UnreachablePolicy::Skip).unwrap();
        assert_eq!(skipped.value, 0.0);
        assert_eq!(skipped.skipped, 1);
        assert!(matches!(
            proximity_ids(&dm, &[p[0]], &[p[2]], UnreachablePolicy::Error),
            Err(MetricError::UnreachableSource(_))
        ));
    }

    #[test]
    fn square_cycle_separation() {
        // w - x - y - z - w, with w, y symptoms and x, z diseases
        let mut b = GraphBuilder::new();
        for (s, d) in [("w", "x"), ("y", "x"), ("y", "z"), ("w", "z")] {
            b.add_triple(0, s, EntityType::Symptom, Predicate::Diagnosis, d, EntityType::Disease, 1)
                .unwrap();
        }
        let g = b.build();
        let id = |n: &str| g.find_any(n)[0];
        let dm = NetworkView::new(&g, TypeMask::all()).distances(&Sequential).unwrap();
        let s = separation_ids(
            &dm,
            &[id("w"), id("y")],
            &[id("x"), id("z")],
            SeparationConvention::AllPairs,
            UnreachablePolicy::Error,
        )
        .unwrap();
        assert_eq!(s.d_ab, 1.0);
        assert_eq!(s.d_aa, 2.0);
        assert_eq!(s.d_bb, 2.0);
        assert_eq!(s.value, -1.0);
    }

    #[test]
    fn identical_sets_separate_by_zero() {
        let (g, p) = path_graph(7);
        let dm = NetworkView::new(&g, TypeMask::all()).distances(&Sequential).unwrap();
        let a = [p[0], p[3], p[6]];
        let s = separation_ids(&dm, &a, &a, SeparationConvention::AllPairs, UnreachablePolicy::Error)
            .unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(
            separation_ids(&dm, &a, &[p[1]], SeparationConvention::AllPairs, UnreachablePolicy::Error),
            Err(MetricError::SingletonSet)
        );
        // nearest-neighbour on the path: A = {0, 3, 6}
        let nn = separation_ids(
            &dm,
            &[p[0], p[3]],
            &[p[4], p[6]],
            SeparationConvention::NearestNeighbor,
            UnreachablePolicy::Error,
        )
        .unwrap();
        // cross: 0->4:4, 3->4:1, 4->3:1, 6->3:3 => 9/4; intra: 3, 2
        assert_eq!(nn.d_ab, 2.25);
        assert_eq!(nn.d_aa, 3.0);
        assert_eq!(nn.d_bb, 2.0);
        assert_eq!(nn.value, -0.25);
    }
}
