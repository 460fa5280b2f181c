//! Compressed undirected adjacency with breadth-first search.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::PredicateSet;

/// Hop count marking an unreachable node in BFS output.
pub const UNREACHABLE: u32 = u32::MAX;

/// Undirected simple graph in CSR layout. Parallel edges between the same
/// pair are merged, keeping the union of their predicate labels; self
/// loops are dropped.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    offsets: Vec<u32>,
    targets: Vec<u32>,
    labels: Vec<PredicateSet>,
}

impl Topology {
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, PredicateSet)>,
    {
        let mut half: Vec<(u32, u32, PredicateSet)> = Vec::new();
        for (a, b, label) in edges {
            assert!((a as usize) < n && (b as usize) < n, "edge endpoint out of range");
            if a == b {
                continue;
            }
            half.push((a, b, label));
            half.push((b, a, label));
        }
        half.sort_unstable_by_key(|&(a, b, _)| (a, b));
        let mut merged: Vec<(u32, u32, PredicateSet)> = Vec::with_capacity(half.len());
        for (a, b, label) in half {
            match merged.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 = last.2.union(label),
                _ => merged.push((a, b, label)),
            }
        }
        let mut offsets = vec![0u32; n + 1];
        for &(a, _, _) in &merged {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Topology {
            offsets,
            targets: merged.iter().map(|e| e.1).collect(),
            labels: merged.iter().map(|e| e.2).collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, node: u32) -> usize {
        let (lo, hi) = self.range(node);
        hi - lo
    }

    fn range(&self, node: u32) -> (usize, usize) {
        (
            self.offsets[node as usize] as usize,
            self.offsets[node as usize + 1] as usize,
        )
    }

    /// Neighbors of `node` in ascending order, with their edge labels.
    pub fn neighbors(&self, node: u32) -> impl Iterator<Item = (u32, PredicateSet)> + '_ {
        let (lo, hi) = self.range(node);
        self.targets[lo..hi]
            .iter()
            .copied()
            .zip(self.labels[lo..hi].iter().copied())
    }

    pub fn neighbor_ids(&self, node: u32) -> &[u32] {
        let (lo, hi) = self.range(node);
        &self.targets[lo..hi]
    }

    /// Hop counts from every node in `sources` to all nodes, walking only
    /// through nodes with `allowed[v]`. Sources that are not allowed are
    /// ignored. Unreached nodes hold [`UNREACHABLE`].
    pub fn bfs(&self, sources: &[u32], allowed: &[bool]) -> Vec<u32> {
        let n = self.node_count();
        let mut dist = vec![UNREACHABLE; n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if allowed[s as usize] && dist[s as usize] == UNREACHABLE {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = dist[u as usize] + 1;
            for &v in self.neighbor_ids(u) {
                if allowed[v as usize] && dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}
