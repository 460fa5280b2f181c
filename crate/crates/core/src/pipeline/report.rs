use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentConfig, PipelineError};
use crate::assoc::{pearson, CorrelationResult};
use crate::model::{EntityId, Predicate};

/// One focal entity's module and its clustering score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalRow {
    pub focal: EntityId,
    pub name: String,
    pub module_size: usize,
    pub lcc: usize,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    /// Absent when the null distribution was degenerate.
    pub z: Option<f64>,
}

/// Module comparison for one unordered pair of focal entities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub a: EntityId,
    pub b: EntityId,
    pub a_name: String,
    pub b_name: String,
    /// Absent when some cross pair is unreachable under the strict policy.
    pub d_ab: Option<f64>,
    pub s_ab: Option<f64>,
    pub co_count: usize,
    pub rr: Option<f64>,
    pub semsim: Option<f64>,
}

/// Proximity of one symptom–disease link within a diagnosis tier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityRow {
    pub group: Predicate,
    pub disease: EntityId,
    pub symptom: EntityId,
    pub disease_name: String,
    pub symptom_name: String,
    /// Diseases linked to the symptom within the tier.
    pub module_size: usize,
    pub d: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub z: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    /// Quartiles by linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| {
            let h = (v.len() - 1) as f64 * p;
            let lo = libm::floor(h) as usize;
            let hi = libm::ceil(h) as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(FiveNumber {
            n: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub group: Predicate,
    /// `d` or `z`.
    pub metric: String,
    #[serde(flatten)]
    pub stats: FiveNumber,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: Experiment,
    pub focal_count: usize,
    pub z_threshold: f64,
    pub above_threshold: usize,
    pub pair_count: usize,
    pub finite_pairs: usize,
    pub unreachable_pairs: usize,
    pub mean_d_ab: Option<f64>,
    pub separation_pairs: usize,
    pub mean_s_ab: Option<f64>,
    pub corr_d_co: Option<CorrelationResult>,
    pub corr_d_semsim: Option<CorrelationResult>,
    pub corr_d_rr: Option<CorrelationResult>,
    pub boxplots: Vec<BoxRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub input_digest: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: ExperimentConfig,
    pub per_focal: Vec<FocalRow>,
    pub pairwise: Vec<PairRow>,
    pub proximity: Vec<ProximityRow>,
    pub summary: Summary,
    pub provenance: Provenance,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Pearson r between `D_ab` and a per-pair quantity over the pairs where
/// both are defined; `None` when fewer than two such pairs or a constant
/// column.
fn correlate(rows: &[PairRow], y: impl Fn(&PairRow) -> Option<f64>) -> Option<CorrelationResult> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| Some((r.d_ab?, y(r)?)))
        .unzip();
    pearson(&xs, &ys).ok()
}

fn boxplots(rows: &[ProximityRow]) -> Vec<BoxRow> {
    let mut out = Vec::new();
    for group in [Predicate::PrimaryDiagnosis, Predicate::Diagnosis] {
        let in_group = || rows.iter().filter(move |r| r.group == group);
        let ds: Vec<f64> = in_group().filter_map(|r| r.d).collect();
        let zs: Vec<f64> = in_group().filter_map(|r| r.z).collect();
        for (metric, values) in [("d", ds), ("z", zs)] {
            if let Some(stats) = FiveNumber::of(&values) {
                out.push(BoxRow {
                    group,
                    metric: metric.into(),
                    stats,
                });
            }
        }
    }
    out
}

impl Summary {
    /// Every summary scalar derived from the report tables.
    pub fn from_tables(
        experiment: Experiment,
        z_threshold: f64,
        per_focal: &[FocalRow],
        pairwise: &[PairRow],
        proximity: &[ProximityRow],
    ) -> Self {
        let with_semsim = experiment != Experiment::SymptomDisease;
        Summary {
            experiment,
            focal_count: per_focal.len(),
            z_threshold,
            above_threshold: per_focal
                .iter()
                .filter(|r| r.z.is_some_and(|z| z > z_threshold))
                .count(),
            pair_count: pairwise.len(),
            finite_pairs: pairwise.iter().filter(|r| r.d_ab.is_some()).count(),
            unreachable_pairs: pairwise.iter().filter(|r| r.d_ab.is_none()).count(),
            mean_d_ab: mean(pairwise.iter().filter_map(|r| r.d_ab)),
            separation_pairs: pairwise.iter().filter(|r| r.s_ab.is_some()).count(),
            mean_s_ab: mean(pairwise.iter().filter_map(|r| r.s_ab)),
            corr_d_co: correlate(pairwise, |r| Some(r.co_count as f64)),
            corr_d_semsim: if with_semsim { correlate(pairwise, |r| r.semsim) } else { None },
            corr_d_rr: if with_semsim { None } else { correlate(pairwise, |r| r.rr) },
            boxplots: boxplots(proximity),
        }
    }

    /// Compares against another summary, allowing `tol` on real values.
    pub fn check_against(&self, other: &Summary, tol: f64) -> Result<(), PipelineError> {
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => (x - y).abs() <= tol,
            (None, None) => true,
            _ => false,
        };
        let corr_close = |a: &Option<CorrelationResult>, b: &Option<CorrelationResult>| match (a, b) {
            (Some(x), Some(y)) => x.n == y.n && (x.r - y.r).abs() <= tol && close(x.p, y.p),
            (None, None) => true,
            _ => false,
        };
        let checks: [(&'static str, bool); 12] = [
            ("experiment", self.experiment == other.experiment),
            ("focal_count", self.focal_count == other.focal_count),
            ("above_threshold", self.above_threshold == other.above_threshold),
            ("pair_count", self.pair_count == other.pair_count),
            ("finite_pairs", self.finite_pairs == other.finite_pairs),
            ("unreachable_pairs", self.unreachable_pairs == other.unreachable_pairs),
            ("mean_d_ab", close(self.mean_d_ab, other.mean_d_ab)),
            ("mean_s_ab", close(self.mean_s_ab, other.mean_s_ab) && self.separation_pairs == other.separation_pairs),
            ("corr_d_co", corr_close(&self.corr_d_co, &other.corr_d_co)),
            ("corr_d_semsim", corr_close(&self.corr_d_semsim, &other.corr_d_semsim)),
            ("corr_d_rr", corr_close(&self.corr_d_rr, &other.corr_d_rr)),
            (
                "boxplots",
                self.boxplots.len() == other.boxplots.len()
                    && self.boxplots.iter().zip(&other.boxplots).all(|(a, b)| {
                        a.group == b.group
                            && a.metric == b.metric
                            && a.stats.n == b.stats.n
                            && [
                                (a.stats.min, b.stats.min),
                                (a.stats.q1, b.stats.q1),
                                (a.stats.median, b.stats.median),
                                (a.stats.q3, b.stats.q3),
                                (a.stats.max, b.stats.max),
                            ]
                            .iter()
                            .all(|&(x, y)| (x - y).abs() <= tol)
                    }),
            ),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((field, _)) => Err(PipelineError::SummaryMismatch(field)),
            None => Ok(()),
        }
    }
}

impl AnalysisReport {
    /// Recomputes the summary from the tables and checks it within 1e-9,
    /// and that provenance is filled in.
    pub fn verify(&self) -> Result<(), PipelineError> {
        let recomputed = Summary::from_tables(
            self.summary.experiment,
            self.summary.z_threshold,
            &self.per_focal,
            &self.pairwise,
            &self.proximity,
        );
        recomputed.check_against(&self.summary, 1e-9)?;
        if self.provenance.config_hash.is_empty() || self.provenance.input_digest.is_empty() {
            return Err(PipelineError::SummaryMismatch("provenance"));
        }
        Ok(())
    }
}
