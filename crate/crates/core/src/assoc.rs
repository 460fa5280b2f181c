//! Co-occurrence counts, relative risk, shared-information similarity and
//! Pearson correlation.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{links, EntityId, EntityType, KnowledgeGraph, PredicateSet};
use crate::special::student_t_two_sided;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AssocError {
    #[error("unknown row {0}")]
    UnknownRow(EntityId),
    #[error("unknown column {0}")]
    UnknownColumn(EntityId),
    #[error("column {0} has no incidence")]
    ZeroMarginal(EntityId),
    #[error("both rows carry zero information content")]
    EmptyRows,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum StatsError {
    #[error("sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two observations, got {0}")]
    TooShort(usize),
    #[error("input sequence is constant")]
    ConstantInput,
}

/// Information content assigned to one column term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcMode {
    /// Every term weighs 1; the similarity reduces to the Dice coefficient.
    #[default]
    Unit,
    /// `−log2(column frequency)`.
    NegLogFreq,
}

/// Binary incidence between focal rows and neighbor columns, both in
/// ascending id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociationMatrix {
    rows: Vec<EntityId>,
    cols: Vec<EntityId>,
    row_support: Vec<Vec<u32>>,
    col_support: Vec<Vec<u32>>,
}

impl AssociationMatrix {
    /// Rows and columns are exactly the ids that appear in `pairs`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (EntityId, EntityId)>) -> Self {
        let pairs: BTreeSet<(EntityId, EntityId)> = pairs.into_iter().collect();
        let rows: Vec<EntityId> = pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
        let cols: Vec<EntityId> = pairs.iter().map(|p| p.1).collect::<BTreeSet<_>>().into_iter().collect();
        let mut row_support = vec![Vec::new(); rows.len()];
        let mut col_support = vec![Vec::new(); cols.len()];
        for (r, c) in pairs {
            let ri = rows.binary_search(&r).unwrap();
            let ci = cols.binary_search(&c).unwrap();
            row_support[ri].push(ci as u32);
            col_support[ci].push(ri as u32);
        }
        for s in row_support.iter_mut().chain(col_support.iter_mut()) {
            s.sort_unstable();
        }
        AssociationMatrix {
            rows,
            cols,
            row_support,
            col_support,
        }
    }

    /// Incidence of `row_type` entities against `col_type` entities through
    /// any predicate in `predicates`. Entities without any incidence are
    /// left out.
    pub fn from_graph(
        graph: &KnowledgeGraph,
        row_type: EntityType,
        col_type: EntityType,
        predicates: PredicateSet,
    ) -> Self {
        let predicates: PredicateSet = predicates
            .iter()
            .filter(|&p| links(row_type, p, col_type))
            .collect();
        let types = |t: &crate::model::Triple| {
            (
                graph.entities()[t.head.index()].entity_type,
                graph.entities()[t.tail.index()].entity_type,
            )
        };
        Self::from_pairs(graph.triples().iter().filter(|t| predicates.contains(t.predicate)).filter_map(|t| {
            match types(t) {
                (h, tl) if h == row_type && tl == col_type => Some((t.head, t.tail)),
                (h, tl) if h == col_type && tl == row_type => Some((t.tail, t.head)),
                _ => None,
            }
        }))
    }

    pub fn transpose(&self) -> Self {
        AssociationMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            row_support: self.col_support.clone(),
            col_support: self.row_support.clone(),
        }
    }

    pub fn rows(&self) -> &[EntityId] {
        &self.rows
    }

    pub fn cols(&self) -> &[EntityId] {
        &self.cols
    }

    pub fn row_index(&self, id: EntityId) -> Option<usize> {
        self.rows.binary_search(&id).ok()
    }

    pub fn col_index(&self, id: EntityId) -> Option<usize> {
        self.cols.binary_search(&id).ok()
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.row_support[row].binary_search(&(col as u32)).is_ok()
    }

    /// Column indices incident to `row`.
    pub fn support(&self, row: usize) -> &[u32] {
        &self.row_support[row]
    }

    pub fn row_sum(&self, row: usize) -> usize {
        self.row_support[row].len()
    }

    pub fn col_sum(&self, col: usize) -> usize {
        self.col_support[col].len()
    }

    fn row(&self, id: EntityId) -> Result<usize, AssocError> {
        self.row_index(id).ok_or(AssocError::UnknownRow(id))
    }

    fn col(&self, id: EntityId) -> Result<usize, AssocError> {
        self.col_index(id).ok_or(AssocError::UnknownColumn(id))
    }

    /// Number of columns shared by two rows.
    pub fn co_count(&self, g1: EntityId, g2: EntityId) -> Result<usize, AssocError> {
        Ok(self.co_count_at(self.row(g1)?, self.row(g2)?))
    }

    pub fn co_count_at(&self, r1: usize, r2: usize) -> usize {
        intersection_len(&self.row_support[r1], &self.row_support[r2])
    }

    /// Observed over expected co-occurrence of two columns across rows:
    /// `C12 · N / (P1 · P2)`.
    pub fn relative_risk(&self, s1: EntityId, s2: EntityId) -> Result<f64, AssocError> {
        let (c1, c2) = (self.col(s1)?, self.col(s2)?);
        if self.col_sum(c1) == 0 {
            return Err(AssocError::ZeroMarginal(s1));
        }
        if self.col_sum(c2) == 0 {
            return Err(AssocError::ZeroMarginal(s2));
        }
        Ok(self.relative_risk_at(c1, c2))
    }

    pub fn relative_risk_at(&self, c1: usize, c2: usize) -> f64 {
        let c12 = intersection_len(&self.col_support[c1], &self.col_support[c2]) as f64;
        let n = self.rows.len() as f64;
        c12 * n / (self.col_sum(c1) as f64 * self.col_sum(c2) as f64)
    }

    fn information(&self, col: u32, mode: IcMode) -> f64 {
        match mode {
            IcMode::Unit => 1.0,
            IcMode::NegLogFreq => {
                -libm::log2(self.col_sum(col as usize) as f64 / self.rows.len() as f64)
            }
        }
    }

    /// `2 · Σ_{t ∈ T1 ∩ T2} IC(t) / (IC(g1) + IC(g2))`, where a row's IC is
    /// the summed IC of its terms (its row sum in unit mode).
    pub fn semantic_similarity(&self, g1: EntityId, g2: EntityId, mode: IcMode) -> Result<f64, AssocError> {
        self.semantic_similarity_at(self.row(g1)?, self.row(g2)?, mode)
    }

    pub fn semantic_similarity_at(&self, r1: usize, r2: usize, mode: IcMode) -> Result<f64, AssocError> {
        let (t1, t2) = (&self.row_support[r1], &self.row_support[r2]);
        let ic = |terms: &[u32]| terms.iter().map(|&t| self.information(t, mode)).sum::<f64>();
        let denom = ic(t1) + ic(t2);
        if denom <= 0.0 || denom.is_nan() {
            return Err(AssocError::EmptyRows);
        }
        let mut shared = 0.0;
        for_each_common(t1, t2, |t| shared += self.information(t, mode));
        Ok(2.0 * shared / denom)
    }
}

fn for_each_common(a: &[u32], b: &[u32], mut f: impl FnMut(u32)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                f(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

fn intersection_len(a: &[u32], b: &[u32]) -> usize {
    let mut n = 0;
    for_each_common(a, b, |_| n += 1);
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    /// Two-sided p-value; present only when `n ≥ 3`.
    pub p: Option<f64>,
}

/// Sample Pearson correlation with a two-sided t-test p-value.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(StatsError::TooShort(n));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let p = (n >= 3).then(|| {
        let df = (n - 2) as f64;
        let t = r * libm::sqrt(df / (1.0 - r * r));
        student_t_two_sided(t, df)
    });
    Ok(CorrelationResult { r, n, p })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(pairs: &[(u32, u32)]) -> AssociationMatrix {
        AssociationMatrix::from_pairs(pairs.iter().map(|&(r, c)| (EntityId(r), EntityId(c))))
    }

    const G1: EntityId = EntityId(1);
    const G2: EntityId = EntityId(2);

    #[test]
    fn co_counts() {
        // T_g1 = {s1, s2, s3}, T_g2 = {s2, s3, s4}
        let mat = m(&[(1, 11), (1, 12), (1, 13), (2, 12), (2, 13), (2, 14), (3, 15)]);
        assert_eq!(mat.co_count(G1, G2).unwrap(), 2);
        assert_eq!(mat.co_count(G1, G1).unwrap(), 3);
        assert_eq!(mat.co_count(G1, EntityId(3)).unwrap(), 0);
        assert_eq!(mat.co_count(G1, EntityId(9)), Err(AssocError::UnknownRow(EntityId(9))));
    }

    #[test]
    fn relative_risk_cases() {
        // N = 10 rows, P1 = P2 = 2, C12 = 2
        let mut pairs = vec![(0, 100), (0, 101), (1, 100), (1, 101)];
        for r in 2..10 {
            pairs.push((r, 102));
        }
        let mat = m(&pairs);
        assert_eq!(mat.relative_risk(EntityId(100), EntityId(101)).unwrap(), 5.0);
        assert_eq!(mat.relative_risk(EntityId(100), EntityId(102)).unwrap(), 0.0);
        // independence: N = 4, P1 = P2 = 2, C12 = 1
        let ind = m(&[(0, 100), (0, 101), (1, 100), (2, 101), (3, 102)]);
        assert_eq!(ind.relative_risk(EntityId(100), EntityId(101)).unwrap(), 1.0);
    }

    #[test]
    fn semantic_similarity_cases() {
        let mat = m(&[(1, 11), (1, 12), (2, 12), (2, 13), (3, 11), (3, 12), (4, 14)]);
        assert_eq!(mat.semantic_similarity(G1, G2, IcMode::Unit).unwrap(), 0.5);
        assert_eq!(mat.semantic_similarity(G1, EntityId(3), IcMode::Unit).unwrap(), 1.0);
        assert_eq!(mat.semantic_similarity(G1, EntityId(4), IcMode::Unit).unwrap(), 0.0);
        // 4 rows; col 11 in 2 rows (IC 1), col 12 in 3 (IC log2 4/3), col 13 in 1 (IC 2)
        let ic12 = libm::log2(4.0 / 3.0);
        let expected = 2.0 * ic12 / ((1.0 + ic12) + (ic12 + 2.0));
        let got = mat.semantic_similarity(G1, G2, IcMode::NegLogFreq).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn neg_log_freq_all_common_terms() {
        // every column in every row: zero information everywhere
        let mat = m(&[(1, 10), (2, 10)]);
        assert_eq!(mat.semantic_similarity(G1, G2, IcMode::NegLogFreq), Err(AssocError::EmptyRows));
    }

    #[test]
    fn pearson_cases() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&xs, &xs).unwrap().r - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap().r + 1.0).abs() < 1e-15);
        let c = pearson(&xs, &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((c.r - 0.6).abs() < 1e-15);
        // t = 0.6 * sqrt(2 / 0.64) = 1.0607, df = 2: p = 1 - t / sqrt(2 + t^2)
        let t = 0.6 * libm::sqrt(2.0 / 0.64);
        assert!((c.p.unwrap() - (1.0 - t / libm::sqrt(2.0 + t * t))).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 2.0], &[3.0, 1.0]).unwrap().p, None);
        assert_eq!(pearson(&xs, &[1.0; 4]), Err(StatsError::ConstantInput));
        assert_eq!(pearson(&xs, &[1.0; 3]), Err(StatsError::LengthMismatch(4, 3)));
        assert_eq!(pearson(&[1.0], &[1.0]), Err(StatsError::TooShort(1)));
    }
}
