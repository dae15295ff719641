//! Quality metrics for configuration sequences.
//!
//! Two families live here. Temporal metrics read only the maps: misalignment
//! (how far objects move between periods), alignment (cosine stability of
//! positions), and persistence (correlation of consecutive movements).
//! Fit metrics compare a map against its period's dissimilarity matrix:
//! the hit rate counts shared nearest neighbors, optionally adjusted for
//! chance agreement. All metrics accept an [`InclusionMask`] and skip
//! masked objects exactly as the fit does.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::seq::{ConfigurationSequence, DissimilaritySequence, InclusionMask};

/// How [`misalign_score`] aggregates per-transition path lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MisalignAggregate {
    /// Mean over all (object, transition) pairs.
    #[default]
    Mean,
    /// Raw total path length.
    Total,
}

/// How [`persistence_score`] pools movement pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PersistenceMode {
    /// One correlation over all objects and transitions pooled together.
    #[default]
    Pooled,
    /// Mean of per-object correlations (objects without variation are
    /// skipped).
    PerObject,
}

fn check_mask(x: &ConfigurationSequence, mask: Option<&InclusionMask>) -> Result<()> {
    if let Some(m) = mask {
        m.check_shape(x.n_periods(), x.n_objects())?;
    }
    Ok(())
}

fn transition_included(mask: Option<&InclusionMask>, i: usize, lo: usize, hi: usize) -> bool {
    mask.map_or(true, |m| m.included_through(i, lo, hi))
}

/// Total (or mean) length of all object movement paths across consecutive
/// periods. Zero means a perfectly stable map sequence. Transitions where
/// the object is masked out of either endpoint period are skipped.
pub fn misalign_score(
    x: &ConfigurationSequence,
    mask: Option<&InclusionMask>,
    aggregate: MisalignAggregate,
) -> Result<f64> {
    if x.n_periods() < 2 {
        return Err(Error::Data(
            "misalignment requires at least 2 periods".into(),
        ));
    }
    check_mask(x, mask)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 1..x.n_periods() {
        for i in 0..x.n_objects() {
            if !transition_included(mask, i, t - 1, t) {
                continue;
            }
            let step = x.maps()[t].row(i) - x.maps()[t - 1].row(i);
            sum += step.norm();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Data(
            "no unmasked object transitions to aggregate".into(),
        ));
    }
    Ok(match aggregate {
        MisalignAggregate::Mean => sum / count as f64,
        MisalignAggregate::Total => sum,
    })
}

/// Mean cosine similarity between each object's consecutive position
/// vectors (taken relative to the origin). 1 means directions never change;
/// −1 means every position flips through the origin each period. Terms with
/// a zero position vector are skipped.
pub fn align_score(x: &ConfigurationSequence, mask: Option<&InclusionMask>) -> Result<f64> {
    if x.n_periods() < 2 {
        return Err(Error::Data("alignment requires at least 2 periods".into()));
    }
    check_mask(x, mask)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 1..x.n_periods() {
        for i in 0..x.n_objects() {
            if !transition_included(mask, i, t - 1, t) {
                continue;
            }
            let u = x.maps()[t - 1].row(i);
            let v = x.maps()[t].row(i);
            let nu = u.norm();
            let nv = v.norm();
            if nu == 0.0 || nv == 0.0 {
                continue;
            }
            sum += (u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Data(
            "alignment is undefined: every term has a zero position vector or is masked".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// Indices of the `k` nearest neighbors of object `i` under the given
/// distance lookup, self excluded, distance ties broken by the lower index.
fn knn_indices(n: usize, i: usize, k: usize, dist: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| dist(a).partial_cmp(&dist(b)).unwrap().then(a.cmp(&b)));
    order.truncate(k);
    order
}

fn check_hitrate_args(x_t: &DMatrix<f64>, d_t: &DMatrix<f64>, k: usize) -> Result<usize> {
    let n = d_t.nrows();
    if d_t.ncols() != n {
        return Err(Error::Data(format!(
            "dissimilarity matrix must be square, got {}x{}",
            d_t.nrows(),
            d_t.ncols()
        )));
    }
    if x_t.nrows() != n {
        return Err(Error::Data(format!(
            "map has {} rows but the dissimilarity matrix has {n}",
            x_t.nrows()
        )));
    }
    if k == 0 || k + 1 > n {
        return Err(Error::Config(format!(
            "k must satisfy 1 <= k <= n-1, got k={k} with n={n}"
        )));
    }
    Ok(n)
}

/// Fraction of each object's `k` nearest neighbors in the data that are
/// also among its `k` nearest neighbors on the map, averaged over objects.
pub fn hitrate_score(x_t: &DMatrix<f64>, d_t: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = check_hitrate_args(x_t, d_t, k)?;
    let mut total = 0.0;
    for i in 0..n {
        let data_nn = knn_indices(n, i, k, |j| d_t[(i, j)]);
        let map_nn = knn_indices(n, i, k, |j| (x_t.row(i) - x_t.row(j)).norm());
        let overlap = data_nn.iter().filter(|j| map_nn.contains(j)).count();
        total += overlap as f64 / k as f64;
    }
    Ok(total / n as f64)
}

/// Rescales a raw hit rate so chance-level agreement maps to 0 and perfect
/// agreement to 1, clamped to [0, 1].
pub(crate) fn chance_adjust(hitrate: f64, k: usize, n: usize) -> f64 {
    let chance = k as f64 / (n - 1) as f64;
    ((hitrate - chance) / (1.0 - chance)).clamp(0.0, 1.0)
}

/// Hit rate adjusted for chance: `(HR − c)/(1 − c)` with chance level
/// `c = k/(n−1)`, clamped to [0, 1].
pub fn adjusted_hitrate_score(x_t: &DMatrix<f64>, d_t: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = check_hitrate_args(x_t, d_t, k)?;
    if k == n - 1 {
        return Err(Error::Config(format!(
            "adjusted hit rate is undefined at k = n-1 = {k}: chance agreement is certain"
        )));
    }
    Ok(chance_adjust(hitrate_score(x_t, d_t, k)?, k, n))
}

fn check_sequence_pair(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    mask: Option<&InclusionMask>,
) -> Result<()> {
    if x.n_periods() != d.n_periods() || x.n_objects() != d.n_objects() {
        return Err(Error::Data(format!(
            "maps are T={} n={} but the dissimilarities are T={} n={}",
            x.n_periods(),
            x.n_objects(),
            d.n_periods(),
            d.n_objects()
        )));
    }
    check_mask(x, mask)
}

fn per_period_submatrices(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    mask: Option<&InclusionMask>,
    t: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    match mask {
        Some(m) if !m.period_complete(t) => {
            let idx = m.included_in(t);
            let xs = DMatrix::from_fn(idx.len(), x.dims(), |a, c| x.maps()[t][(idx[a], c)]);
            let ds = DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
                d.matrices()[t][(idx[a], idx[b])]
            });
            (xs, ds)
        }
        _ => (x.maps()[t].clone(), d.matrices()[t].clone()),
    }
}

fn avg_over_periods(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    mask: Option<&InclusionMask>,
    score: impl Fn(&DMatrix<f64>, &DMatrix<f64>) -> Result<f64>,
) -> Result<f64> {
    check_sequence_pair(x, d, mask)?;
    let mut sum = 0.0;
    for t in 0..x.n_periods() {
        let (xs, ds) = per_period_submatrices(x, d, mask, t);
        sum += score(&xs, &ds)?;
    }
    Ok(sum / x.n_periods() as f64)
}

/// Mean per-period hit rate; masked objects are dropped from their absent
/// periods before neighbors are counted.
pub fn avg_hitrate_score(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    k: usize,
    mask: Option<&InclusionMask>,
) -> Result<f64> {
    avg_over_periods(x, d, mask, |xs, ds| hitrate_score(xs, ds, k))
}

/// Mean per-period adjusted hit rate; masked objects are dropped from their
/// absent periods before neighbors are counted.
pub fn avg_adjusted_hitrate_score(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    k: usize,
    mask: Option<&InclusionMask>,
) -> Result<f64> {
    avg_over_periods(x, d, mask, |xs, ds| adjusted_hitrate_score(xs, ds, k))
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::Degenerate(
            "correlation is undefined: one sample has zero variance".into(),
        ));
    }
    Ok((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

/// Correlation between consecutive movement vectors: for every object and
/// every interior period, the components of the step into that period are
/// paired with the components of the step out of it. 1 means straight-line
/// motion, −1 an exact zigzag. An object enters a pair only when it is
/// unmasked across all three periods involved.
pub fn persistence_score(
    x: &ConfigurationSequence,
    mask: Option<&InclusionMask>,
    mode: PersistenceMode,
) -> Result<f64> {
    if x.n_periods() < 3 {
        return Err(Error::Data(
            "persistence requires at least 3 periods".into(),
        ));
    }
    check_mask(x, mask)?;
    let collect = |i: usize, prev: &mut Vec<f64>, next: &mut Vec<f64>| {
        for t in 1..x.n_periods() - 1 {
            if !transition_included(mask, i, t - 1, t + 1) {
                continue;
            }
            for c in 0..x.dims() {
                prev.push(x.maps()[t][(i, c)] - x.maps()[t - 1][(i, c)]);
                next.push(x.maps()[t + 1][(i, c)] - x.maps()[t][(i, c)]);
            }
        }
    };
    match mode {
        PersistenceMode::Pooled => {
            let mut prev = Vec::new();
            let mut next = Vec::new();
            for i in 0..x.n_objects() {
                collect(i, &mut prev, &mut next);
            }
            if prev.is_empty() {
                return Err(Error::Data(
                    "no unmasked three-period windows to correlate".into(),
                ));
            }
            pearson(&prev, &next)
        }
        PersistenceMode::PerObject => {
            let mut sum = 0.0;
            let mut count = 0usize;
            for i in 0..x.n_objects() {
                let mut prev = Vec::new();
                let mut next = Vec::new();
                collect(i, &mut prev, &mut next);
                if prev.len() < 2 {
                    continue;
                }
                if let Ok(r) = pearson(&prev, &next) {
                    sum += r;
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::Degenerate(
                    "no object has enough movement variation for a correlation".into(),
                ));
            }
            Ok(sum / count as f64)
        }
    }
}

/// Default neighborhood size for hit-rate metrics: 5, capped at n−1.
pub fn default_k(n_objects: usize) -> usize {
    5.min(n_objects.saturating_sub(1)).max(1)
}

/// A bundle of every metric this module can compute for one fitted
/// sequence. Metrics whose preconditions the input cannot meet (too few
/// periods, k at the chance ceiling) are `None` rather than errors, so a
/// report can always be produced.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Neighborhood size used by the hit-rate family.
    pub k: usize,
    /// Mean movement path length (`None` when T = 1).
    pub misalign: Option<f64>,
    /// Mean cosine of consecutive positions (`None` when T = 1 or every
    /// term is skipped).
    pub alignment: Option<f64>,
    /// Correlation of consecutive movements (`None` when T < 3 or motion
    /// has no variance).
    pub persistence: Option<f64>,
    /// Per-period hit rates.
    pub hitrate: Vec<f64>,
    /// Per-period adjusted hit rates (`None` when k = n−1 in some period).
    pub adjusted_hitrate: Option<Vec<f64>>,
    /// Mean of `hitrate`.
    pub avg_hitrate: f64,
    /// Mean of `adjusted_hitrate`.
    pub avg_adjusted_hitrate: Option<f64>,
    /// Mean per-period static cost carried over from the fit, when known.
    pub cost_static_avg: Option<f64>,
}

impl EvalReport {
    /// Flattens the report into (name, value) rows, skipping metrics that
    /// were not computable. Per-period hit rates are included only when
    /// `per_period` is set, named `hitrate_<period label>`.
    pub fn named_values(&self, period_labels: &[String], per_period: bool) -> Vec<(String, f64)> {
        let mut rows = Vec::new();
        if let Some(v) = self.misalign {
            rows.push(("misalign".to_string(), v));
        }
        if let Some(v) = self.alignment {
            rows.push(("alignment".to_string(), v));
        }
        if let Some(v) = self.persistence {
            rows.push(("persistence".to_string(), v));
        }
        rows.push(("avg_hitrate".to_string(), self.avg_hitrate));
        if let Some(v) = self.avg_adjusted_hitrate {
            rows.push(("avg_adjusted_hitrate".to_string(), v));
        }
        if let Some(v) = self.cost_static_avg {
            rows.push(("cost_static_avg".to_string(), v));
        }
        if per_period {
            for (t, v) in self.hitrate.iter().enumerate() {
                rows.push((format!("hitrate_{}", period_labels[t]), *v));
            }
            if let Some(adj) = &self.adjusted_hitrate {
                for (t, v) in adj.iter().enumerate() {
                    rows.push((format!("adjusted_hitrate_{}", period_labels[t]), *v));
                }
            }
        }
        rows
    }
}

/// Computes every applicable metric for a fitted sequence against its data.
/// `cost_static_avg` is threaded through from the fit result when
/// available. Hit rates are computed per period and averaged; temporal
/// metrics are `None` when the sequence is too short for them.
pub fn evaluate(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    k: usize,
    mask: Option<&InclusionMask>,
    cost_static_avg: Option<f64>,
) -> Result<EvalReport> {
    check_sequence_pair(x, d, mask)?;
    let t_count = x.n_periods();

    let mut hitrate = Vec::with_capacity(t_count);
    let mut adjusted: Option<Vec<f64>> = Some(Vec::with_capacity(t_count));
    for t in 0..t_count {
        let (xs, ds) = per_period_submatrices(x, d, mask, t);
        hitrate.push(hitrate_score(&xs, &ds, k)?);
        if let Some(adj) = &mut adjusted {
            match adjusted_hitrate_score(&xs, &ds, k) {
                Ok(v) => adj.push(v),
                Err(Error::Config(_)) => adjusted = None,
                Err(e) => return Err(e),
            }
        }
    }
    let avg_hitrate = hitrate.iter().sum::<f64>() / t_count as f64;
    let avg_adjusted_hitrate = adjusted
        .as_ref()
        .map(|adj| adj.iter().sum::<f64>() / t_count as f64);

    let misalign = if t_count >= 2 {
        Some(misalign_score(x, mask, MisalignAggregate::Mean)?)
    } else {
        None
    };
    let alignment = if t_count >= 2 {
        align_score(x, mask).ok()
    } else {
        None
    };
    let persistence = if t_count >= 3 {
        persistence_score(x, mask, PersistenceMode::Pooled).ok()
    } else {
        None
    };

    Ok(EvalReport {
        k,
        misalign,
        alignment,
        persistence,
        hitrate,
        adjusted_hitrate: adjusted,
        avg_hitrate,
        avg_adjusted_hitrate,
        cost_static_avg,
    })
}
