//! Converting raw relational data into dissimilarity sequences.
//!
//! Inputs arrive in many shapes: time-indexed edge lists, similarity or
//! co-occurrence matrices, tabular feature snapshots. This module turns
//! each of them into the [`DissimilaritySequence`] the fitting pipeline
//! consumes, and balances panels whose rosters change over time by padding
//! absent objects with placeholders and recording an [`InclusionMask`].

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::seq::{DissimilaritySequence, InclusionMask, SimilaritySequence};

/// One observed pair in a time-indexed edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRow {
    /// Period label (a year, a quarter, any sortable tag).
    pub period: String,
    /// First object of the unordered pair.
    pub id_a: String,
    /// Second object of the unordered pair.
    pub id_b: String,
    /// Pair score (typically a similarity).
    pub score: f64,
}

/// A time-indexed edge list: each row scores one unordered pair of objects
/// within one period.
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    rows: Vec<EdgeRow>,
}

impl EdgeList {
    /// Wraps rows into an edge list after basic value checks. Duplicate
    /// pair-period rows are tolerated here and resolved (or rejected) by
    /// [`edgelist_to_matrices`].
    pub fn new(rows: Vec<EdgeRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data("edge list is empty".into()));
        }
        for row in &rows {
            if !row.score.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite score for pair ({}, {}) in period {}",
                    row.id_a, row.id_b, row.period
                )));
            }
            if row.id_a == row.id_b {
                return Err(Error::Data(format!(
                    "self-pair ({}, {}) in period {}: edge lists relate distinct objects",
                    row.id_a, row.id_b, row.period
                )));
            }
        }
        Ok(Self { rows })
    }

    /// The underlying rows.
    pub fn rows(&self) -> &[EdgeRow] {
        &self.rows
    }
}

/// Per-period square matrices over per-period rosters, the intermediate
/// form between an edge list and a balanced sequence.
#[derive(Debug, Clone)]
pub struct PeriodMatrices {
    /// One symmetric matrix per period.
    pub matrices: Vec<DMatrix<f64>>,
    /// The roster of each period's matrix, sorted lexicographically.
    pub labels: Vec<Vec<String>>,
    /// Period labels in chronological order.
    pub periods: Vec<String>,
}

/// Sorts period labels chronologically: numerically when every label
/// parses as a number, lexicographically otherwise.
fn sort_periods(mut periods: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<f64>> = periods.iter().map(|p| p.parse::<f64>().ok()).collect();
    match numeric {
        Some(values) => {
            let mut pairs: Vec<_> = values.into_iter().zip(periods).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
            pairs.into_iter().map(|(_, p)| p).collect()
        }
        None => {
            periods.sort();
            periods
        }
    }
}

/// Converts an edge list into one symmetric matrix per period, each over
/// the sorted roster of ids observed in that period. Pairs not observed
/// within a period default to 0. Duplicate rows for the same pair-period
/// are collapsed when their scores agree and rejected otherwise.
pub fn edgelist_to_matrices(e: &EdgeList) -> Result<PeriodMatrices> {
    let mut by_period: BTreeMap<&str, Vec<&EdgeRow>> = BTreeMap::new();
    for row in e.rows() {
        by_period.entry(&row.period).or_default().push(row);
    }
    let periods = sort_periods(by_period.keys().map(|p| p.to_string()).collect());

    let mut matrices = Vec::with_capacity(periods.len());
    let mut labels = Vec::with_capacity(periods.len());
    for period in &periods {
        let rows = &by_period[period.as_str()];
        let mut roster: Vec<&str> = rows
            .iter()
            .flat_map(|r| [r.id_a.as_str(), r.id_b.as_str()])
            .collect();
        roster.sort_unstable();
        roster.dedup();
        let index: BTreeMap<&str, usize> =
            roster.iter().enumerate().map(|(i, l)| (*l, i)).collect();

        let n = roster.len();
        let mut m = DMatrix::zeros(n, n);
        let mut seen = DMatrix::from_element(n, n, false);
        for row in rows {
            let (i, j) = (index[row.id_a.as_str()], index[row.id_b.as_str()]);
            if seen[(i, j)] {
                if m[(i, j)] != row.score {
                    return Err(Error::Data(format!(
                        "conflicting duplicate scores for pair ({}, {}) in period {period}: {} vs {}",
                        row.id_a, row.id_b, m[(i, j)], row.score
                    )));
                }
                continue;
            }
            m[(i, j)] = row.score;
            m[(j, i)] = row.score;
            seen[(i, j)] = true;
            seen[(j, i)] = true;
        }
        matrices.push(m);
        labels.push(roster.into_iter().map(String::from).collect());
    }
    Ok(PeriodMatrices {
        matrices,
        labels,
        periods,
    })
}

/// Embeds per-period matrices into a common roster: the global roster is
/// the sorted union of all per-period labels, absent objects get
/// placeholder-zero rows/columns, and the returned mask records who was
/// actually observed when. Entry order is identical across periods.
pub fn expand_matrices(
    pm: &PeriodMatrices,
) -> Result<(Vec<DMatrix<f64>>, Vec<String>, InclusionMask)> {
    if pm.matrices.len() != pm.labels.len() {
        return Err(Error::Data(format!(
            "{} matrices but {} label rosters",
            pm.matrices.len(),
            pm.labels.len()
        )));
    }
    for (t, (m, ls)) in pm.matrices.iter().zip(&pm.labels).enumerate() {
        if m.nrows() != m.ncols() || m.nrows() != ls.len() {
            return Err(Error::Data(format!(
                "period {t} matrix is {}x{} but its roster has {} labels",
                m.nrows(),
                m.ncols(),
                ls.len()
            )));
        }
        let mut dedup = ls.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() != ls.len() {
            return Err(Error::Data(format!(
                "period {t} roster contains duplicate labels"
            )));
        }
    }

    let mut global: Vec<String> = pm.labels.iter().flatten().cloned().collect();
    global.sort();
    global.dedup();
    let index: BTreeMap<&str, usize> = global
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let n = global.len();

    let mut balanced = Vec::with_capacity(pm.matrices.len());
    let mut included = Vec::with_capacity(pm.matrices.len());
    for (m, ls) in pm.matrices.iter().zip(&pm.labels) {
        let mut big = DMatrix::zeros(n, n);
        let mut present = vec![false; n];
        let gidx: Vec<usize> = ls.iter().map(|l| index[l.as_str()]).collect();
        for &g in &gidx {
            present[g] = true;
        }
        for (li, &gi) in gidx.iter().enumerate() {
            for (lj, &gj) in gidx.iter().enumerate() {
                big[(gi, gj)] = m[(li, lj)];
            }
        }
        balanced.push(big);
        included.push(present);
    }
    let mask = InclusionMask::new(included)?;
    Ok((balanced, global, mask))
}

/// Flattens a balanced similarity sequence back into a canonical edge
/// list: one row per upper-triangle pair per period, in (period, row,
/// column) order. Composing with [`edgelist_to_matrices`] recovers the
/// original matrices.
pub fn matrices_to_edgelist(s: &SimilaritySequence) -> Result<EdgeList> {
    let mut rows = Vec::new();
    for (t, m) in s.matrices().iter().enumerate() {
        for i in 0..s.n_objects() {
            for j in (i + 1)..s.n_objects() {
                rows.push(EdgeRow {
                    period: s.periods()[t].clone(),
                    id_a: s.labels()[i].clone(),
                    id_b: s.labels()[j].clone(),
                    score: m[(i, j)],
                });
            }
        }
    }
    EdgeList::new(rows)
}

/// How to turn similarities into dissimilarities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimToDiss {
    /// δ = 1 − s; requires s ∈ [0, 1].
    Mirror,
    /// δ = max(S) − s, with the maximum taken over the whole sequence.
    MaxMinus,
    /// δ = 1/s; requires s > 0 off the diagonal.
    Reciprocal,
}

impl std::fmt::Display for SimToDiss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimToDiss::Mirror => "mirror",
            SimToDiss::MaxMinus => "max_minus",
            SimToDiss::Reciprocal => "reciprocal",
        })
    }
}

impl std::str::FromStr for SimToDiss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror" => Ok(SimToDiss::Mirror),
            "max_minus" => Ok(SimToDiss::MaxMinus),
            "reciprocal" => Ok(SimToDiss::Reciprocal),
            other => Err(Error::Config(format!(
                "unknown similarity transformation '{other}' (expected mirror, max_minus, or reciprocal)"
            ))),
        }
    }
}

/// Maps a similarity sequence to a dissimilarity sequence entry-by-entry
/// under the chosen transformation; the diagonal is forced to 0.
pub fn sim_to_diss(s: &SimilaritySequence, transformation: SimToDiss) -> Result<DissimilaritySequence> {
    let global_max = s
        .matrices()
        .iter()
        .flat_map(|m| m.iter())
        .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));

    let mut out = Vec::with_capacity(s.n_periods());
    for m in s.matrices() {
        let n = m.nrows();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = m[(i, j)];
                d[(i, j)] = match transformation {
                    SimToDiss::Mirror => {
                        if !(0.0..=1.0).contains(&v) {
                            return Err(Error::Domain(format!(
                                "mirror requires similarities in [0, 1], got {v}"
                            )));
                        }
                        1.0 - v
                    }
                    SimToDiss::MaxMinus => global_max - v,
                    SimToDiss::Reciprocal => {
                        if v <= 0.0 {
                            return Err(Error::Domain(format!(
                                "reciprocal requires positive off-diagonal similarities, got {v}"
                            )));
                        }
                        1.0 / v
                    }
                };
            }
        }
        out.push(d);
    }
    DissimilaritySequence::new(out, s.labels().to_vec(), s.periods().to_vec())
}

/// Normalizes co-occurrence counts into similarities:
/// `s_ij = c_ij / sqrt(c_ii · c_jj)`, with the diagonal set to 1. The
/// diagonal of the input must hold each object's marginal occurrence count.
pub fn coocc_to_sim(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = c.nrows();
    if c.ncols() != n || n == 0 {
        return Err(Error::Data(format!(
            "co-occurrence matrix must be square and non-empty, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let v = c[(i, j)];
            if !v.is_finite() || v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Data(format!(
                    "co-occurrence entries must be nonnegative integer counts, got {v} at ({i}, {j})"
                )));
            }
            if c[(j, i)] != v {
                return Err(Error::Data(format!(
                    "co-occurrence matrix must be symmetric, differs at ({i}, {j})"
                )));
            }
        }
        if c[(i, i)] == 0.0 {
            return Err(Error::Domain(format!(
                "object {i} has zero marginal count; its similarity is undefined"
            )));
        }
    }
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = 1.0;
        for j in 0..n {
            if i != j {
                s[(i, j)] = c[(i, j)] / (c[(i, i)] * c[(j, j)]).sqrt();
            }
        }
    }
    Ok(s)
}

/// Distance metric for [`table_to_diss`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMetric {
    /// Euclidean (L2) distance between feature rows.
    Euclidean,
    /// City-block (L1) distance between feature rows.
    Cityblock,
    /// Cosine distance 1 − cos(u, v); rejects zero rows.
    CosineDistance,
}

/// Builds the pairwise distance matrix of each period's feature table.
/// All tables must share the number of rows and columns.
pub fn table_to_diss(tables: &[DMatrix<f64>], metric: TableMetric) -> Result<DissimilaritySequence> {
    if tables.is_empty() {
        return Err(Error::Data("no feature tables given".into()));
    }
    let (n, k) = tables[0].shape();
    let mut out = Vec::with_capacity(tables.len());
    for (t, z) in tables.iter().enumerate() {
        if z.shape() != (n, k) {
            return Err(Error::Data(format!(
                "table {t} is {}x{}, expected {n}x{k}",
                z.nrows(),
                z.ncols()
            )));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("table {t} has non-finite entries")));
        }
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let u = z.row(i);
                let v = z.row(j);
                let dij = match metric {
                    TableMetric::Euclidean => (u - v).norm(),
                    TableMetric::Cityblock => (u - v).iter().map(|x| x.abs()).sum(),
                    TableMetric::CosineDistance => {
                        let (nu, nv) = (u.norm(), v.norm());
                        if nu == 0.0 || nv == 0.0 {
                            return Err(Error::Domain(format!(
                                "cosine distance is undefined for the zero feature row in table {t}"
                            )));
                        }
                        1.0 - u.dot(&v) / (nu * nv)
                    }
                };
                // Cosine of near-identical rows can dip epsilon-negative.
                let dij = dij.max(0.0);
                d[(i, j)] = dij;
                d[(j, i)] = dij;
            }
        }
        out.push(d);
    }
    DissimilaritySequence::from_matrices(out)
}

/// Rescaling applied by [`normalize_diss`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissNormalization {
    /// Divide every entry by the global maximum, so the largest becomes 1.
    Max1,
    /// Standardize off-diagonal entries globally (z-scores), then shift so
    /// the smallest becomes 0.
    ZscoreOffdiag,
}

/// Rescales a dissimilarity sequence; some mapping methods converge poorly
/// on raw scales. Symmetry and the zero diagonal are preserved.
pub fn normalize_diss(
    d: &DissimilaritySequence,
    mode: DissNormalization,
) -> Result<DissimilaritySequence> {
    let offdiag: Vec<f64> = d
        .matrices()
        .iter()
        .flat_map(|m| {
            let n = m.nrows();
            (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| m[(i, j)]))
        })
        .collect();
    let global_max = offdiag.iter().fold(0.0f64, |acc, &v| acc.max(v));
    if global_max == 0.0 {
        return Err(Error::Domain(
            "all dissimilarities are zero; nothing to normalize".into(),
        ));
    }

    let mats = match mode {
        DissNormalization::Max1 => d.matrices().iter().map(|m| m / global_max).collect(),
        DissNormalization::ZscoreOffdiag => {
            let count = offdiag.len() as f64;
            let mean = offdiag.iter().sum::<f64>() / count;
            let var = offdiag.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
            let std = var.sqrt();
            if std == 0.0 {
                return Err(Error::Domain(
                    "off-diagonal dissimilarities are constant; z-scores are undefined".into(),
                ));
            }
            let z_min = offdiag
                .iter()
                .map(|v| (v - mean) / std)
                .fold(f64::INFINITY, f64::min);
            d.matrices()
                .iter()
                .map(|m| {
                    let n = m.nrows();
                    DMatrix::from_fn(n, n, |i, j| {
                        if i == j {
                            0.0
                        } else {
                            (m[(i, j)] - mean) / std - z_min
                        }
                    })
                })
                .collect()
        }
    };
    DissimilaritySequence::new(mats, d.labels().to_vec(), d.periods().to_vec())
}
