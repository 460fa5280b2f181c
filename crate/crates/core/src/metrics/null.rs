//! Seeded randomization engine shared by the z-score metrics.
//!
//! Iteration `i` draws from its own ChaCha8 stream `(seed, i)`, so the
//! samples are the same whichever worker evaluates them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distance::{proximity_ids, UnreachablePolicy};
use super::{DistanceMatrix, MetricError, NetworkView};
use crate::exec::Executor;
use crate::model::{EntityId, EntityType};
use crate::module::NodeModule;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullModel {
    /// Uniform draws without replacement from all nodes of the member type.
    #[default]
    UniformByType,
    /// Each member is replaced by a node from its degree bin.
    DegreeBinned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomizationConfig {
    pub iterations: usize,
    pub seed: u64,
    pub null_model: NullModel,
    /// Minimum number of nodes per degree bin.
    pub bin_floor: usize,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            iterations: 1000,
            seed: 42,
            null_model: NullModel::UniformByType,
            bin_floor: 10,
        }
    }
}

impl RandomizationConfig {
    pub fn validate(&self) -> Result<(), MetricError> {
        if self.iterations < 2 {
            return Err(MetricError::InvalidConfig("iterations must be at least 2"));
        }
        if self.bin_floor == 0 {
            return Err(MetricError::InvalidConfig("bin_floor must be positive"));
        }
        Ok(())
    }

    /// Same config with the seed mixed with `salt`.
    pub fn reseeded(&self, salt: u64) -> Self {
        RandomizationConfig {
            seed: mix_seed(self.seed, salt),
            ..*self
        }
    }
}

/// RNG for one iteration.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// Observed value standardized against a null sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub observed: f64,
    pub mu: f64,
    /// Population standard deviation (divides by the sample count).
    pub sigma: f64,
    pub z: f64,
    /// Null draws that produced a value.
    pub samples: usize,
}

/// `(observed − μ) / σ` with σ the population SD of `samples`.
///
/// A zero-spread null gives `z = 0` when the observation equals the null
/// mean and [`MetricError::DegenerateNull`] otherwise.
pub fn standardize(observed: f64, samples: &[f64]) -> Result<ZScore, MetricError> {
    let n = samples.len();
    if n == 0 {
        return Err(MetricError::DegenerateNull {
            observed,
            mu: f64::NAN,
        });
    }
    let mu = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Err(MetricError::DegenerateNull { observed, mu });
    }
    let var = samples.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n as f64;
    let sigma = libm::sqrt(var);
    let z = if sigma > 0.0 {
        (observed - mu) / sigma
    } else if observed == mu {
        0.0
    } else {
        return Err(MetricError::DegenerateNull { observed, mu });
    };
    Ok(ZScore {
        observed,
        mu,
        sigma,
        z,
        samples: n,
    })
}

/// Degree bins over one type's node pool: nodes sorted by degree are cut
/// at degree boundaries once a bin holds at least `floor` nodes; a short
/// final bin joins its predecessor.
#[derive(Clone, Debug)]
struct DegreeBins {
    bins: Vec<Vec<EntityId>>,
    bin_of: BTreeMap<EntityId, usize>,
}

impl DegreeBins {
    fn new(view: &NetworkView<'_>, pool: &[EntityId], floor: usize) -> Self {
        let mut by_degree: Vec<(usize, EntityId)> = pool.iter().map(|&id| (view.degree(id), id)).collect();
        by_degree.sort_unstable();
        let mut bins: Vec<Vec<EntityId>> = Vec::new();
        let mut current: Vec<EntityId> = Vec::new();
        for (i, &(deg, id)) in by_degree.iter().enumerate() {
            current.push(id);
            let boundary = by_degree.get(i + 1).is_none_or(|&(next, _)| next != deg);
            if boundary && current.len() >= floor {
                bins.push(core::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            match bins.last_mut() {
                Some(last) => last.extend(current),
                None => bins.push(current),
            }
        }
        let bin_of = bins
            .iter()
            .enumerate()
            .flat_map(|(b, ids)| ids.iter().map(move |&id| (id, b)))
            .collect();
        DegreeBins { bins, bin_of }
    }
}

#[derive(Clone, Debug)]
enum Plan {
    Uniform(usize),
    Binned(Vec<(usize, usize)>),
}

/// Draws random stand-ins for a template node set.
#[derive(Clone, Debug)]
pub(crate) struct Sampler {
    pool: Vec<EntityId>,
    bins: Option<DegreeBins>,
    plan: Plan,
}

impl Sampler {
    pub(crate) fn new(
        view: &NetworkView<'_>,
        member_type: EntityType,
        template: &[EntityId],
        cfg: &RandomizationConfig,
    ) -> Result<Self, MetricError> {
        let pool = view.pool(member_type);
        let k = template.len();
        match cfg.null_model {
            NullModel::UniformByType => {
                if pool.len() < k {
                    return Err(MetricError::InsufficientPopulation {
                        needed: k,
                        available: pool.len(),
                    });
                }
                Ok(Sampler {
                    pool,
                    bins: None,
                    plan: Plan::Uniform(k),
                })
            }
            NullModel::DegreeBinned => {
                let bins = DegreeBins::new(view, &pool, cfg.bin_floor);
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                for m in template {
                    let b = *bins.bin_of.get(m).ok_or(MetricError::MaskedNode(*m))?;
                    *counts.entry(b).or_default() += 1;
                }
                for (&b, &c) in &counts {
                    if bins.bins[b].len() < c {
                        return Err(MetricError::InsufficientPopulation {
                            needed: c,
                            available: bins.bins[b].len(),
                        });
                    }
                }
                Ok(Sampler {
                    pool,
                    bins: Some(bins),
                    plan: Plan::Binned(counts.into_iter().collect()),
                })
            }
        }
    }

    /// A sorted random node set matching the template.
    pub(crate) fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<EntityId> {
        let mut out = match (&self.plan, &self.bins) {
            (Plan::Uniform(k), _) => index::sample(rng, self.pool.len(), *k)
                .into_iter()
                .map(|i| self.pool[i])
                .collect(),
            (Plan::Binned(counts), Some(bins)) => {
                let mut out = Vec::new();
                for &(b, c) in counts {
                    let bin = &bins.bins[b];
                    out.extend(index::sample(rng, bin.len(), c).into_iter().map(|i| bin[i]));
                }
                out
            }
            (Plan::Binned(_), None) => unreachable!("binned plan without bins"),
        };
        out.sort_unstable();
        out
    }
}

/// Proximity values of `cfg.iterations` random set pairs sized (and, for
/// the degree-binned model, degree-matched) like `a` and `b`. Draws in
/// which no source reaches the target set are dropped.
pub fn proximity_null<E: Executor>(
    dm: &DistanceMatrix<'_>,
    a: &NodeModule,
    b: &NodeModule,
    cfg: &RandomizationConfig,
    exec: &E,
) -> Result<Vec<f64>, MetricError> {
    cfg.validate()?;
    let view = dm.view();
    let sa = Sampler::new(view, a.member_type(), a.members(), cfg)?;
    let sb = Sampler::new(view, b.member_type(), b.members(), cfg)?;
    let seed = cfg.seed;
    let draws = exec.map(cfg.iterations, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let ra = sa.draw(&mut rng);
        let rb = sb.draw(&mut rng);
        proximity_ids(dm, &ra, &rb, UnreachablePolicy::Skip)
            .ok()
            .map(|avg| avg.value)
    });
    Ok(draws.into_iter().flatten().collect())
}

/// Proximity z-score of `d(A, B)` against random set pairs.
pub fn proximity_zscore<E: Executor>(
    dm: &DistanceMatrix<'_>,
    a: &NodeModule,
    b: &NodeModule,
    cfg: &RandomizationConfig,
    policy: UnreachablePolicy,
    exec: &E,
) -> Result<ZScore, MetricError> {
    let observed = super::distance::proximity_distance(dm, a, b, policy)?.value;
    let null = proximity_null(dm, a, b, cfg, exec)?;
    standardize(observed, &null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardize_population_sd() {
        let z = standardize(4.0, &[1.0, 3.0]).unwrap();
        assert_eq!(z.mu, 2.0);
        assert_eq!(z.sigma, 1.0);
        assert_eq!(z.z, 2.0);
        assert_eq!(standardize(2.0, &[2.0, 2.0]).unwrap().z, 0.0);
        assert!(matches!(
            standardize(3.0, &[2.0, 2.0]),
            Err(MetricError::DegenerateNull { .. })
        ));
        assert!(standardize(1.0, &[1.0]).is_err());
    }

    #[test]
    fn streams_are_independent_of_order() {
        use rand::RngCore;
        let a: Vec<u64> = (0..4).map(|i| stream_rng(7, i).next_u64()).collect();
        let b: Vec<u64> = (0..4).rev().map(|i| stream_rng(7, i).next_u64()).collect();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RandomizationConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.iterations = 1;
        assert!(cfg.validate().is_err());
        let cfg = RandomizationConfig {
            bin_floor: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
