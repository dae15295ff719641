//! Assembly of the joint objective: per-period static costs plus the
//! weighted temporal smoothness penalty, with inclusion masking.

use nalgebra::DMatrix;

use crate::config::FitSpec;
use crate::error::{Error, Result};
use crate::methods::PeriodCost;
use crate::seq::{ConfigurationSequence, DissimilaritySequence, InclusionMask};
use crate::weights::{compute_object_weights, ObjectWeights};

/// Binomial coefficients C(k, 0..=k) as floats.
fn binomials(k: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..k {
        let mut next = vec![1.0];
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(1.0);
        row = next;
    }
    row
}

fn check_temporal_args(
    x: &ConfigurationSequence,
    p: usize,
    w: &ObjectWeights,
    mask: Option<&InclusionMask>,
) -> Result<()> {
    let t_count = x.n_periods();
    if t_count < 2 {
        return Err(Error::Data(
            "temporal penalty requires at least 2 periods".into(),
        ));
    }
    if p == 0 || p >= t_count {
        return Err(Error::Config(format!(
            "smoothing order p={p} must satisfy 1 <= p < T={t_count}"
        )));
    }
    if w.len() != x.n_objects() {
        return Err(Error::Config(format!(
            "got {} object weights for {} objects",
            w.len(),
            x.n_objects()
        )));
    }
    if let Some(m) = mask {
        m.check_shape(t_count, x.n_objects())?;
    }
    Ok(())
}

/// Temporal smoothness penalty: Σ_i w_i Σ_{k=1}^{p} Σ_t ‖∇ᵏ x_{i,t}‖²,
/// where ∇ᵏ is the k-th backward difference over consecutive periods.
/// With a mask, a (i, k, t) term counts only when object i is included in
/// every period t−k..=t.
pub fn temporal_cost(
    x: &ConfigurationSequence,
    p: usize,
    w: &ObjectWeights,
    mask: Option<&InclusionMask>,
) -> Result<f64> {
    check_temporal_args(x, p, w, mask)?;
    Ok(temporal_cost_raw(x.maps(), p, w, mask))
}

/// [`temporal_cost`] without argument validation, for the optimizer's
/// inner loop. The caller guarantees consistent shapes and 1 ≤ p < T.
pub(crate) fn temporal_cost_raw(
    maps: &[DMatrix<f64>],
    p: usize,
    w: &ObjectWeights,
    mask: Option<&InclusionMask>,
) -> f64 {
    let t_count = maps.len();
    let n = maps[0].nrows();
    let d = maps[0].ncols();

    let mut total = 0.0;
    for k in 1..=p {
        let binom = binomials(k);
        for t in k..t_count {
            for i in 0..n {
                if let Some(m) = mask {
                    if !m.included_through(i, t - k, t) {
                        continue;
                    }
                }
                let mut sq = 0.0;
                for dim in 0..d {
                    let mut diff = 0.0;
                    let mut sign = 1.0;
                    for (m_idx, &c) in binom.iter().enumerate() {
                        diff += sign * c * maps[t - m_idx][(i, dim)];
                        sign = -sign;
                    }
                    sq += diff * diff;
                }
                total += w.w[i] * sq;
            }
        }
    }
    total
}

/// Gradient of [`temporal_cost`] with respect to every coordinate,
/// returned as one n×d matrix per period. Masked-out entries receive a
/// zero gradient.
pub fn temporal_gradient(
    x: &ConfigurationSequence,
    p: usize,
    w: &ObjectWeights,
    mask: Option<&InclusionMask>,
) -> Result<Vec<DMatrix<f64>>> {
    check_temporal_args(x, p, w, mask)?;
    Ok(temporal_gradient_raw(x.maps(), p, w, mask))
}

/// [`temporal_gradient`] without argument validation; see
/// [`temporal_cost_raw`].
pub(crate) fn temporal_gradient_raw(
    maps: &[DMatrix<f64>],
    p: usize,
    w: &ObjectWeights,
    mask: Option<&InclusionMask>,
) -> Vec<DMatrix<f64>> {
    let t_count = maps.len();
    let n = maps[0].nrows();
    let d = maps[0].ncols();

    let mut grad: Vec<DMatrix<f64>> = (0..t_count).map(|_| DMatrix::zeros(n, d)).collect();
    for k in 1..=p {
        let binom = binomials(k);
        for t in k..t_count {
            for i in 0..n {
                if let Some(m) = mask {
                    if !m.included_through(i, t - k, t) {
                        continue;
                    }
                }
                for dim in 0..d {
                    let mut diff = 0.0;
                    let mut sign = 1.0;
                    for (m_idx, &c) in binom.iter().enumerate() {
                        diff += sign * c * maps[t - m_idx][(i, dim)];
                        sign = -sign;
                    }
                    let base = 2.0 * w.w[i] * diff;
                    let mut sign = 1.0;
                    for (m_idx, &c) in binom.iter().enumerate() {
                        grad[t - m_idx][(i, dim)] += base * sign * c;
                        sign = -sign;
                    }
                }
            }
        }
    }
    grad
}

/// A fitting problem with all per-period static state prepared: the
/// methods' probability matrices or normalizers, the object weights, and
/// the per-period inclusion index sets.
pub struct JointProblem<'a> {
    alpha: f64,
    p: usize,
    n_objects: usize,
    n_periods: usize,
    weights: ObjectWeights,
    mask: Option<&'a InclusionMask>,
    period_costs: Vec<Box<dyn PeriodCost>>,
    /// Included row indices per period; `None` when all objects are in.
    included: Vec<Option<Vec<usize>>>,
}

fn gather_rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let d = x.ncols();
    let mut out = DMatrix::zeros(idx.len(), d);
    for (r, &i) in idx.iter().enumerate() {
        for k in 0..d {
            out[(r, k)] = x[(i, k)];
        }
    }
    out
}

impl<'a> JointProblem<'a> {
    /// Validates the spec against the data and precomputes per-period
    /// static-cost state on the included submatrices.
    pub fn new(
        d: &DissimilaritySequence,
        spec: &FitSpec,
        mask: Option<&'a InclusionMask>,
    ) -> Result<Self> {
        let t_count = d.n_periods();
        let n = d.n_objects();
        if let Some(m) = mask {
            m.check_shape(t_count, n)?;
        }
        if t_count == 1 && spec.alpha > 0.0 {
            return Err(Error::Data(
                "temporal penalty requires at least 2 periods".into(),
            ));
        }
        if t_count >= 2 && spec.p >= t_count {
            return Err(Error::Config(format!(
                "smoothing order p={} requires p < T={t_count}",
                spec.p
            )));
        }

        let mut period_costs = Vec::with_capacity(t_count);
        let mut included = Vec::with_capacity(t_count);
        for t in 0..t_count {
            let idx: Option<Vec<usize>> = match mask {
                Some(m) if !m.period_complete(t) => Some(m.included_in(t)),
                _ => None,
            };
            let n_eff = idx.as_ref().map_or(n, |v| v.len());
            if n_eff < 2 {
                return Err(Error::Data(format!(
                    "period {t} includes {n_eff} objects; at least 2 are required"
                )));
            }
            spec.method.validate_for_size(n_eff)?;
            let sub = match &idx {
                Some(v) => {
                    let full = &d.matrices()[t];
                    DMatrix::from_fn(v.len(), v.len(), |a, b| full[(v[a], v[b])])
                }
                None => d.matrices()[t].clone(),
            };
            period_costs.push(spec.method.prepare(&sub)?);
            included.push(idx);
        }

        let weights = if spec.alpha > 0.0 && t_count >= 2 {
            compute_object_weights(d, mask)?
        } else {
            ObjectWeights::uniform(n)
        };

        Ok(Self {
            alpha: spec.alpha,
            p: spec.p,
            n_objects: n,
            n_periods: t_count,
            weights,
            mask,
            period_costs,
            included,
        })
    }

    fn check_x(&self, x: &ConfigurationSequence) -> Result<()> {
        if x.n_periods() != self.n_periods || x.n_objects() != self.n_objects {
            return Err(Error::Config(format!(
                "configuration sequence is {}x{} objects/periods, expected {}x{}",
                x.n_objects(),
                x.n_periods(),
                self.n_objects,
                self.n_periods
            )));
        }
        Ok(())
    }

    /// Number of periods T.
    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    /// Number of objects n.
    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    /// The object weights in use (uniform when α = 0).
    pub fn weights(&self) -> &ObjectWeights {
        &self.weights
    }

    /// Per-period static cost of `x`, evaluated on the included
    /// sub-configurations.
    pub fn static_costs(&self, x: &ConfigurationSequence) -> Result<Vec<f64>> {
        self.check_x(x)?;
        self.static_costs_raw(x.maps())
    }

    pub(crate) fn static_costs_raw(&self, maps: &[DMatrix<f64>]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.n_periods);
        for t in 0..self.n_periods {
            let cost = match &self.included[t] {
                Some(idx) => self.period_costs[t].cost(&gather_rows(&maps[t], idx))?,
                None => self.period_costs[t].cost(&maps[t])?,
            };
            out.push(cost);
        }
        Ok(out)
    }

    /// Total cost: Σ_t static_t + α · temporal.
    pub fn total_cost(&self, x: &ConfigurationSequence) -> Result<f64> {
        self.check_x(x)?;
        self.total_cost_raw(x.maps())
    }

    pub(crate) fn total_cost_raw(&self, maps: &[DMatrix<f64>]) -> Result<f64> {
        let static_sum: f64 = self.static_costs_raw(maps)?.iter().sum();
        if self.alpha == 0.0 || self.n_periods == 1 {
            return Ok(static_sum);
        }
        let temporal = temporal_cost_raw(maps, self.p, &self.weights, self.mask);
        Ok(static_sum + self.alpha * temporal)
    }

    /// Captures each period's inner transformation (the MDS disparities)
    /// at the current maps; entries are `None` for methods without one.
    pub(crate) fn freeze_raw(
        &self,
        maps: &[DMatrix<f64>],
    ) -> Result<Vec<Option<DMatrix<f64>>>> {
        let mut out = Vec::with_capacity(self.n_periods);
        for t in 0..self.n_periods {
            let state = match &self.included[t] {
                Some(idx) => self.period_costs[t].freeze(&gather_rows(&maps[t], idx))?,
                None => self.period_costs[t].freeze(&maps[t])?,
            };
            out.push(state);
        }
        Ok(out)
    }

    /// Total cost with every period's inner transformation held at
    /// `states`. At the maps the states were frozen from this equals
    /// [`JointProblem::total_cost`]; the optimizer's line search evaluates
    /// candidates through it so that a step cannot pay for temporal
    /// improvements by rescaling the maps under a refit static cost.
    pub(crate) fn total_cost_frozen_raw(
        &self,
        maps: &[DMatrix<f64>],
        states: &[Option<DMatrix<f64>>],
    ) -> Result<f64> {
        let mut static_sum = 0.0;
        for t in 0..self.n_periods {
            let state = states[t].as_ref();
            static_sum += match &self.included[t] {
                Some(idx) => self.period_costs[t].cost_at(&gather_rows(&maps[t], idx), state)?,
                None => self.period_costs[t].cost_at(&maps[t], state)?,
            };
        }
        if self.alpha == 0.0 || self.n_periods == 1 {
            return Ok(static_sum);
        }
        let temporal = temporal_cost_raw(maps, self.p, &self.weights, self.mask);
        Ok(static_sum + self.alpha * temporal)
    }

    /// Gradient counterpart of [`JointProblem::total_cost_frozen_raw`].
    pub(crate) fn total_gradient_frozen_raw(
        &self,
        maps: &[DMatrix<f64>],
        states: &[Option<DMatrix<f64>>],
    ) -> Result<Vec<DMatrix<f64>>> {
        let d = maps[0].ncols();
        let mut grad: Vec<DMatrix<f64>> = if self.alpha > 0.0 && self.n_periods >= 2 {
            let mut g = temporal_gradient_raw(maps, self.p, &self.weights, self.mask);
            for m in &mut g {
                *m *= self.alpha;
            }
            g
        } else {
            (0..self.n_periods)
                .map(|_| DMatrix::zeros(self.n_objects, d))
                .collect()
        };
        for t in 0..self.n_periods {
            let state = states[t].as_ref();
            match &self.included[t] {
                Some(idx) => {
                    let sub = gather_rows(&maps[t], idx);
                    let gsub = self.period_costs[t].gradient_at(&sub, state)?;
                    for (r, &i) in idx.iter().enumerate() {
                        for k in 0..d {
                            grad[t][(i, k)] += gsub[(r, k)];
                        }
                    }
                }
                None => {
                    let g = self.period_costs[t].gradient_at(&maps[t], state)?;
                    grad[t] += g;
                }
            }
        }
        Ok(grad)
    }

    /// Analytic gradient of [`JointProblem::total_cost`], one n×d matrix
    /// per period. Excluded entries receive zero gradient.
    pub fn total_gradient(&self, x: &ConfigurationSequence) -> Result<Vec<DMatrix<f64>>> {
        self.check_x(x)?;
        self.total_gradient_raw(x.maps())
    }

    pub(crate) fn total_gradient_raw(&self, maps: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
        let d = maps[0].ncols();
        let mut grad: Vec<DMatrix<f64>> = if self.alpha > 0.0 && self.n_periods >= 2 {
            let mut g = temporal_gradient_raw(maps, self.p, &self.weights, self.mask);
            for m in &mut g {
                *m *= self.alpha;
            }
            g
        } else {
            (0..self.n_periods)
                .map(|_| DMatrix::zeros(self.n_objects, d))
                .collect()
        };
        for t in 0..self.n_periods {
            match &self.included[t] {
                Some(idx) => {
                    let sub = gather_rows(&maps[t], idx);
                    let gsub = self.period_costs[t].gradient(&sub)?;
                    for (r, &i) in idx.iter().enumerate() {
                        for k in 0..d {
                            grad[t][(i, k)] += gsub[(r, k)];
                        }
                    }
                }
                None => {
                    let g = self.period_costs[t].gradient(&maps[t])?;
                    grad[t] += g;
                }
            }
        }
        Ok(grad)
    }
}

/// Convenience wrapper: builds the problem and evaluates the total cost.
pub fn total_cost(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    spec: &FitSpec,
    mask: Option<&InclusionMask>,
) -> Result<f64> {
    JointProblem::new(d, spec, mask)?.total_cost(x)
}

/// Convenience wrapper: builds the problem and evaluates the gradient.
pub fn total_gradient(
    x: &ConfigurationSequence,
    d: &DissimilaritySequence,
    spec: &FitSpec,
    mask: Option<&InclusionMask>,
) -> Result<Vec<DMatrix<f64>>> {
    JointProblem::new(d, spec, mask)?.total_gradient(x)
}
