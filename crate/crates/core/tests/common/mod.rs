//! Reference implementations used as test oracles. They favour the most
//! direct reading of each formula over speed.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use kgprox_core::model::{EntityId, EntityType, GraphBuilder, KnowledgeGraph, Predicate, TypeMask};
use rand::Rng;

/// Random schema-respecting graph on `n` named nodes. Node types are drawn
/// from `types`; every disease/non-disease pair is linked with probability
/// `p` through a legal predicate. Isolated nodes are registered as entities.
pub fn random_kg<R: Rng>(rng: &mut R, n: usize, p: f64, types: &[EntityType]) -> KnowledgeGraph {
    let kinds: Vec<EntityType> = (0..n).map(|_| types[rng.random_range(0..types.len())]).collect();
    let name = |i: usize| format!("n{i:03}");
    let mut b = GraphBuilder::new();
    for (i, &t) in kinds.iter().enumerate() {
        b.add_entity(&name(i), t, std::iter::empty::<String>());
    }
    for i in 0..n {
        for j in 0..n {
            if kinds[j] != EntityType::Disease || kinds[i] == EntityType::Disease {
                continue;
            }
            if !rng.random_bool(p) {
                continue;
            }
            let pred = match kinds[i] {
                EntityType::Symptom => [Predicate::Diagnosis, Predicate::PrimaryDiagnosis, Predicate::DifferentialDiagnosis]
                    [rng.random_range(0..3)],
                EntityType::Drug => Predicate::Treat,
                EntityType::RiskFactor => Predicate::Cause,
                EntityType::Patient => Predicate::Suffer,
                EntityType::Severity => Predicate::Diagnosis,
                EntityType::Disease => unreachable!(),
            };
            b.add_triple(0, &name(i), kinds[i], pred, &name(j), EntityType::Disease, 1)
                .unwrap();
        }
    }
    b.build()
}

/// Undirected edges of the graph restricted to nodes passing `mask`.
pub fn masked_edges(g: &KnowledgeGraph, mask: TypeMask) -> Vec<(usize, usize)> {
    g.triples()
        .iter()
        .filter(|t| {
            mask.contains(g.entities()[t.head.index()].entity_type)
                && mask.contains(g.entities()[t.tail.index()].entity_type)
        })
        .map(|t| (t.head.index(), t.tail.index()))
        .collect()
}

/// All-pairs hop counts by Floyd–Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        if a != b {
            d[a][b] = 1;
            d[b][a] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter()
        .map(|row| row.into_iter().map(|x| (x < INF).then_some(x as u32)).collect())
        .collect()
}

pub type Dist = Vec<Vec<Option<u32>>>;

fn mean(values: &[u32]) -> f64 {
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

/// Mean over every ordered cross pair, shared nodes included.
pub fn brute_d_ab(dist: &Dist, a: &[usize], b: &[usize]) -> Option<f64> {
    let mut all = Vec::new();
    for &x in a {
        for &y in b {
            all.push(dist[x][y]?);
        }
    }
    Some(mean(&all))
}

/// Separation with every mean taken over pairs of distinct nodes.
pub fn brute_s_ab(dist: &Dist, a: &[usize], b: &[usize]) -> Option<f64> {
    let intra = |s: &[usize]| -> Option<f64> {
        let mut v = Vec::new();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                v.push(dist[s[i]][s[j]]?);
            }
        }
        (!v.is_empty()).then(|| mean(&v))
    };
    let mut cross = Vec::new();
    for &x in a {
        for &y in b {
            if x != y {
                cross.push(dist[x][y]?);
            }
        }
    }
    if cross.is_empty() {
        return None;
    }
    Some(mean(&cross) - (intra(a)? + intra(b)?) / 2.0)
}

/// Mean over `a` of the distance to the nearest node of `b`.
pub fn brute_proximity(dist: &Dist, a: &[usize], b: &[usize]) -> Option<f64> {
    let mut v = Vec::new();
    for &x in a {
        v.push(b.iter().filter_map(|&y| dist[x][y]).min()?);
    }
    Some(mean(&v))
}

/// LCC of `members` in the projection where two members are linked when
/// some allowed non-member is adjacent to both.
pub fn brute_lcc_shared(g: &KnowledgeGraph, mask: TypeMask, members: &[EntityId]) -> usize {
    let set: BTreeSet<EntityId> = members.iter().copied().collect();
    let allowed = |id: EntityId| mask.contains(g.entities()[id.index()].entity_type);
    let nbrs = |m: EntityId| -> BTreeSet<EntityId> {
        g.neighbors(m, None, None)
            .unwrap()
            .into_iter()
            .filter(|&w| allowed(w) && !set.contains(&w))
            .collect()
    };
    let hoods: Vec<BTreeSet<EntityId>> = members.iter().map(|&m| nbrs(m)).collect();
    let mut seen = vec![false; members.len()];
    let mut best = 0;
    for start in 0..members.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            for j in 0..members.len() {
                if !seen[j] && !hoods[i].is_disjoint(&hoods[j]) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        best = best.max(size);
    }
    best
}

/// Pearson r as sample covariance over the product of sample SDs.
pub fn two_pass_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0);
    let sx = (xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (ys.iter().map(|y| (y - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}

/// `Γ((ν+1)/2) / Γ(ν/2)` for integer ν, by the half-integer recursion.
fn gamma_ratio(df: u32) -> f64 {
    let mut r = if df % 2 == 1 {
        1.0 / std::f64::consts::PI.sqrt()
    } else {
        std::f64::consts::PI.sqrt() / 2.0
    };
    let mut nu = if df % 2 == 1 { 1 } else { 2 };
    while nu < df {
        r *= (nu as f64 + 1.0) / nu as f64;
        nu += 2;
    }
    r
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Two-sided Student-t p-value by adaptive Simpson integration of the
/// density over `[0, |t|]`.
pub fn t_pvalue_by_quadrature(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let c = gamma_ratio(df) / (nu * std::f64::consts::PI).sqrt();
    let f = |x: f64| c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    let b = t.abs();
    if b == 0.0 {
        return 1.0;
    }
    let (fa, fm, fb) = (f(0.0), f(b / 2.0), f(b));
    let whole = b / 6.0 * (fa + 4.0 * fm + fb);
    let half = simpson(&f, 0.0, b, fa, fm, fb, whole, 1e-13, 50);
    (1.0 - 2.0 * half).max(0.0)
}

/// Dice coefficient of two index sets.
pub fn dice(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> f64 {
    2.0 * a.intersection(b).count() as f64 / (a.len() + b.len()) as f64
}

/// Connected symptom/disease/drug graph on 200 nodes for null calibration.
pub fn calibration_graph(seed: u64) -> KnowledgeGraph {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let types = [EntityType::Symptom, EntityType::Disease, EntityType::Drug];
    loop {
        let g = random_kg(&mut rng, 200, 0.06, &types);
        let fw_connected = {
            let edges = masked_edges(&g, TypeMask::all());
            let mut adj = vec![Vec::new(); g.len()];
            for (a, b) in edges {
                adj[a].push(b);
                adj[b].push(a);
            }
            let mut seen = vec![false; g.len()];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        if fw_connected {
            return g;
        }
    }
}

/// Mean proximity z of `trials` random (symptom, disease) set pairs drawn
/// from the same pools the null samples.
pub fn mean_null_proximity_z(g: &KnowledgeGraph, trials: usize, iterations: usize) -> f64 {
    use kgprox_core::metrics::{proximity_zscore, NetworkView, RandomizationConfig, UnreachablePolicy};
    use kgprox_core::{NodeModule, Sequential};
    use rand::SeedableRng;
    let dm = NetworkView::new(g, TypeMask::all()).distances(&Sequential).unwrap();
    let symptoms: Vec<EntityId> = g.ids_of_type(EntityType::Symptom).collect();
    let diseases: Vec<EntityId> = g.ids_of_type(EntityType::Disease).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut total = 0.0;
    for t in 0..trials {
        let a = rand::seq::index::sample(&mut rng, symptoms.len(), 5).into_iter().map(|i| symptoms[i]);
        let a = NodeModule::from_members(g, a).unwrap();
        let b = rand::seq::index::sample(&mut rng, diseases.len(), 3).into_iter().map(|i| diseases[i]);
        let b = NodeModule::from_members(g, b).unwrap();
        let cfg = RandomizationConfig { iterations, seed: 1000 + t as u64, ..Default::default() };
        total += proximity_zscore(&dm, &a, &b, &cfg, UnreachablePolicy::Error, &Sequential).unwrap().z;
    }
    total / trials as f64
}

/// Mean all-pairs separation of `trials` random same-type symptom set pairs.
pub fn mean_random_separation(g: &KnowledgeGraph, trials: usize) -> f64 {
    use kgprox_core::metrics::{separation, NetworkView, SeparationConvention, UnreachablePolicy};
    use kgprox_core::{NodeModule, Sequential};
    use rand::SeedableRng;
    let dm = NetworkView::new(g, TypeMask::all()).distances(&Sequential).unwrap();
    let symptoms: Vec<EntityId> = g.ids_of_type(EntityType::Symptom).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(18);
    let mut total = 0.0;
    for _ in 0..trials {
        let mut draw = || {
            let ids = rand::seq::index::sample(&mut rng, symptoms.len(), 6).into_iter().map(|i| symptoms[i]);
            NodeModule::from_members(g, ids).unwrap()
        };
        let (a, b) = (draw(), draw());
        total += separation(&dm, &a, &b, SeparationConvention::AllPairs, UnreachablePolicy::Error)
            .unwrap()
            .value;
    }
    total / trials as f64
}
