//! Hyperparameter search: exhaustive grids and Bayesian optimization.
//!
//! Both searches evaluate candidate parameter settings by running a full
//! fit and scoring it with user-supplied metrics, then scalarize the
//! scores into a single combined loss (a nonnegative weighted sum, so all
//! metrics must be oriented "lower is better"). Grid search enumerates a
//! Cartesian product; Bayesian search fits a Gaussian-process surrogate
//! (Matérn-5/2 kernel) to past evaluations and proposes the candidate with
//! the highest expected improvement.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::config::{FitSpec, OptimizerSettings};
use crate::error::{Error, Result};
use crate::optimize::fit;
use crate::seq::{ConfigurationSequence, DissimilaritySequence, InclusionMask};

/// Number of seeded candidate points scored per acquisition round.
const EI_CANDIDATES: usize = 1024;
/// Initial observation-noise jitter on the surrogate's covariance.
const BASE_JITTER: f64 = 1e-6;
/// Largest jitter tried before the surrogate is declared singular.
const MAX_JITTER: f64 = 1e-2;
/// Coarse log-grid over which per-dimension length scales are selected.
const LENGTH_SCALE_GRID: [f64; 5] = [0.05, 0.1, 0.3, 1.0, 3.0];

/// One tunable parameter's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamRange {
    /// A real interval [lo, hi].
    Real {
        /// Lower bound.
        lo: f64,
        /// Upper bound.
        hi: f64,
    },
    /// An integer interval [lo, hi]; proposals are rounded to the nearest
    /// integer before evaluation.
    Integer {
        /// Lower bound.
        lo: i64,
        /// Upper bound.
        hi: i64,
    },
}

impl ParamRange {
    fn check(&self) -> Result<()> {
        match *self {
            ParamRange::Real { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(Error::Config(format!(
                        "real range requires finite lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
            ParamRange::Integer { lo, hi } => {
                if lo > hi {
                    return Err(Error::Config(format!(
                        "integer range requires lo <= hi, got [{lo}, {hi}]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Maps a unit-cube coordinate into the range, rounding integer dims.
    fn from_unit(&self, u: f64) -> f64 {
        match *self {
            ParamRange::Real { lo, hi } => lo + u * (hi - lo),
            ParamRange::Integer { lo, hi } => {
                (lo as f64 + u * (hi - lo) as f64).round().clamp(lo as f64, hi as f64)
            }
        }
    }

    /// Maps a parameter value back onto the unit cube (0 for zero-width
    /// ranges, so degenerate dimensions stay constant).
    fn to_unit(&self, v: f64) -> f64 {
        match *self {
            ParamRange::Real { lo, hi } => {
                if hi > lo {
                    (v - lo) / (hi - lo)
                } else {
                    0.0
                }
            }
            ParamRange::Integer { lo, hi } => {
                if hi > lo {
                    (v - lo as f64) / (hi - lo) as f64
                } else {
                    0.0
                }
            }
        }
    }
}

/// Named parameter ranges defining the Bayesian search domain.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    params: Vec<(String, ParamRange)>,
}

impl SearchSpace {
    /// Builds a space from named ranges; at least one parameter is
    /// required and each range must be non-empty.
    pub fn new(params: Vec<(String, ParamRange)>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Config("search space has no parameters".into()));
        }
        for (name, range) in &params {
            if name.is_empty() {
                return Err(Error::Config("parameter names must be non-empty".into()));
            }
            range.check()?;
        }
        Ok(Self { params })
    }

    /// The named ranges, in declaration order.
    pub fn params(&self) -> &[(String, ParamRange)] {
        &self.params
    }

    /// Number of search dimensions.
    pub fn dims(&self) -> usize {
        self.params.len()
    }

    fn names(&self) -> Vec<String> {
        self.params.iter().map(|(n, _)| n.clone()).collect()
    }
}

/// A named scoring function applied to every fitted candidate. Metrics
/// must be minimization-aligned: invert "higher is better" scores (for
/// example use `1 − hit rate`) before wrapping them.
pub struct EvalMetric {
    name: String,
    f: Box<dyn Fn(&ConfigurationSequence) -> Result<f64> + Send + Sync>,
}

impl EvalMetric {
    /// Wraps a scoring closure under a column name.
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&ConfigurationSequence) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Box::new(f),
        }
    }

    /// The metric's column name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Scores a fitted sequence.
    pub fn evaluate(&self, x: &ConfigurationSequence) -> Result<f64> {
        (self.f)(x)
    }
}

impl std::fmt::Debug for EvalMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvalMetric").field("name", &self.name).finish()
    }
}

/// One evaluated parameter setting.
#[derive(Debug, Clone)]
pub struct TuneRow {
    /// Parameter values, in the order of the search's parameter names.
    pub params: Vec<f64>,
    /// Metric values, in the order of the search's metric names (empty on
    /// a failed evaluation).
    pub metrics: Vec<f64>,
    /// Mean per-period static cost of the fit (absent on failure or when
    /// the objective was injected directly).
    pub cost_static_avg: Option<f64>,
    /// Scalarized loss (absent when no weights were supplied or the
    /// evaluation failed).
    pub combined_loss: Option<f64>,
    /// The failure message, when the evaluation errored.
    pub error: Option<String>,
}

/// The full evaluation table of a search.
#[derive(Debug, Clone)]
pub struct TuneResult {
    /// Parameter column names.
    pub param_names: Vec<String>,
    /// Metric column names.
    pub metric_names: Vec<String>,
    /// One row per evaluation, in evaluation order.
    pub rows: Vec<TuneRow>,
    /// Index of the row minimizing the combined loss; absent when no row
    /// has one.
    pub best_row: Option<usize>,
}

impl TuneResult {
    /// The best-scoring row, when one exists.
    pub fn best(&self) -> Option<&TuneRow> {
        self.best_row.map(|i| &self.rows[i])
    }

    fn select_best(rows: &[TuneRow]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, row) in rows.iter().enumerate() {
            let Some(loss) = row.combined_loss else {
                continue;
            };
            if best.is_none_or(|b| loss < rows[b].combined_loss.unwrap()) {
                best = Some(i);
            }
        }
        best
    }
}

/// Scalarizes an evaluation into one loss:
/// `weights[0]·static_avg + Σ_k weights[k]·metric_values[k−1]`. Weights
/// must be nonnegative and one longer than the metric vector.
pub fn combined_loss(static_avg: f64, metric_values: &[f64], weights: &[f64]) -> Result<f64> {
    if weights.len() != metric_values.len() + 1 {
        return Err(Error::Config(format!(
            "expected {} weights (static cost plus {} metrics), got {}",
            metric_values.len() + 1,
            metric_values.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Config("weights must be finite and >= 0".into()));
    }
    Ok(weights[0] * static_avg
        + weights[1..]
            .iter()
            .zip(metric_values)
            .map(|(w, v)| w * v)
            .sum::<f64>())
}

/// Writes a named parameter value into a spec, re-validating the result.
/// Recognized names: `alpha`, `p`, `dims`, and `perplexity` (t-SNE only).
fn apply_param(spec: &FitSpec, name: &str, value: f64) -> Result<FitSpec> {
    let mut method = spec.method.clone();
    let mut alpha = spec.alpha;
    let mut p = spec.p;
    let mut dims = spec.dims;
    match name {
        "alpha" => alpha = value,
        "p" => {
            if value.round() < 1.0 {
                return Err(Error::Config(format!("p must be >= 1, got {value}")));
            }
            p = value.round() as usize;
        }
        "dims" => {
            if value.round() < 1.0 {
                return Err(Error::Config(format!("dims must be >= 1, got {value}")));
            }
            dims = value.round() as usize;
        }
        "perplexity" => match &mut method {
            crate::methods::Method::Tsne { perplexity } => *perplexity = value,
            _ => {
                return Err(Error::Config(
                    "perplexity is only tunable for the t-SNE method".into(),
                ))
            }
        },
        other => {
            return Err(Error::Config(format!(
                "unknown tunable parameter '{other}' (expected alpha, p, dims, or perplexity)"
            )))
        }
    }
    FitSpec::new(method, alpha, p, dims)
}

fn specialize(spec: &FitSpec, names: &[String], values: &[f64]) -> Result<FitSpec> {
    let mut out = spec.clone();
    for (name, value) in names.iter().zip(values) {
        out = apply_param(&out, name, *value)?;
    }
    Ok(out)
}

/// Fits one candidate and scores it; shared by both searches.
fn evaluate_candidate(
    d: &DissimilaritySequence,
    spec_template: &FitSpec,
    settings: &OptimizerSettings,
    mask: Option<&InclusionMask>,
    names: &[String],
    values: &[f64],
    eval_functions: &[EvalMetric],
    weights: Option<&[f64]>,
) -> TuneRow {
    let outcome = (|| {
        let spec = specialize(spec_template, names, values)?;
        let result = fit(d, &spec, settings, mask)?;
        let metrics = eval_functions
            .iter()
            .map(|m| m.evaluate(&result.coords))
            .collect::<Result<Vec<f64>>>()?;
        let loss = match weights {
            Some(w) => Some(combined_loss(result.cost_static_avg, &metrics, w)?),
            None => None,
        };
        Ok::<_, Error>((metrics, result.cost_static_avg, loss))
    })();
    match outcome {
        Ok((metrics, static_avg, loss)) => TuneRow {
            params: values.to_vec(),
            metrics,
            cost_static_avg: Some(static_avg),
            combined_loss: loss,
            error: None,
        },
        Err(e) => TuneRow {
            params: values.to_vec(),
            metrics: Vec::new(),
            cost_static_avg: None,
            combined_loss: None,
            error: Some(e.to_string()),
        },
    }
}

/// Evaluates every point of a Cartesian parameter grid with one fit each
/// (all fits share the same optimizer settings, so inits are comparable
/// across points). Failed fits become error rows; the search only fails
/// when every point does. `best_row` is populated only when `weights` are
/// supplied.
pub fn grid_search(
    d: &DissimilaritySequence,
    spec_template: &FitSpec,
    settings: &OptimizerSettings,
    param_grid: &[(String, Vec<f64>)],
    eval_functions: &[EvalMetric],
    weights: Option<&[f64]>,
    mask: Option<&InclusionMask>,
) -> Result<TuneResult> {
    if param_grid.is_empty() || param_grid.iter().any(|(_, vs)| vs.is_empty()) {
        return Err(Error::Config(
            "the parameter grid must have at least one value per parameter".into(),
        ));
    }
    let names: Vec<String> = param_grid.iter().map(|(n, _)| n.clone()).collect();

    // Walk the Cartesian product in row-major order, last parameter
    // fastest.
    let sizes: Vec<usize> = param_grid.iter().map(|(_, vs)| vs.len()).collect();
    let total: usize = sizes.iter().product();
    let mut rows = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut values = vec![0.0; names.len()];
        for k in (0..names.len()).rev() {
            values[k] = param_grid[k].1[rem % sizes[k]];
            rem /= sizes[k];
        }
        rows.push(evaluate_candidate(
            d,
            spec_template,
            settings,
            mask,
            &names,
            &values,
            eval_functions,
            weights,
        ));
    }
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(Error::Data(format!(
            "every grid point failed; first error: {}",
            rows[0].error.as_deref().unwrap_or("unknown")
        )));
    }
    let best_row = TuneResult::select_best(&rows);
    Ok(TuneResult {
        param_names: names,
        metric_names: eval_functions.iter().map(|m| m.name().to_string()).collect(),
        rows,
        best_row,
    })
}

/// Matérn-5/2 covariance between two points under per-dimension length
/// scales, with unit signal variance.
fn matern52(a: &[f64], b: &[f64], length_scales: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(length_scales)
        .map(|((x, y), l)| {
            let d = (x - y) / l;
            d * d
        })
        .sum();
    let r = r2.sqrt();
    let s = 5.0f64.sqrt() * r;
    (1.0 + s + 5.0 * r2 / 3.0) * (-s).exp()
}

/// A Gaussian-process surrogate with a Matérn-5/2 kernel, unit signal
/// variance on standardized targets, and per-dimension length scales
/// chosen by maximum marginal likelihood over a coarse log-grid.
pub struct GaussianProcess {
    x: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    length_scales: Vec<f64>,
    y_mean: f64,
    y_std: f64,
}

impl GaussianProcess {
    /// Fits the surrogate to observations. Starts from a 1e-6 observation
    /// jitter and escalates it tenfold (up to 1e-2) whenever the
    /// covariance is numerically singular.
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::Data(format!(
                "surrogate needs matching non-empty inputs, got {} points and {} targets",
                x.len(),
                y.len()
            )));
        }
        let dims = x[0].len();
        if x.iter().any(|p| p.len() != dims) {
            return Err(Error::Data("surrogate inputs differ in dimension".into()));
        }
        let n = y.len();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64;
        let y_std = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let ys = DVector::from_iterator(n, y.iter().map(|v| (v - y_mean) / y_std));

        // Enumerate every per-dimension combination of the coarse grid and
        // keep the one with the highest marginal log-likelihood; escalate
        // the jitter only when no combination factorizes.
        let mut jitter = BASE_JITTER;
        loop {
            let mut best: Option<(f64, Vec<f64>, Cholesky<f64, Dyn>, DVector<f64>)> = None;
            let combos = LENGTH_SCALE_GRID.len().pow(dims as u32);
            for combo in 0..combos {
                let mut rem = combo;
                let mut scales = vec![0.0; dims];
                for s in scales.iter_mut() {
                    *s = LENGTH_SCALE_GRID[rem % LENGTH_SCALE_GRID.len()];
                    rem /= LENGTH_SCALE_GRID.len();
                }
                let mut k = DMatrix::from_fn(n, n, |i, j| matern52(&x[i], &x[j], &scales));
                for i in 0..n {
                    k[(i, i)] += jitter;
                }
                let Some(chol) = Cholesky::new(k) else {
                    continue;
                };
                let alpha = chol.solve(&ys);
                let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
                let mll = -0.5 * ys.dot(&alpha)
                    - 0.5 * log_det
                    - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
                if best.as_ref().is_none_or(|(b, ..)| mll > *b) {
                    best = Some((mll, scales, chol, alpha));
                }
            }
            if let Some((_, length_scales, chol, alpha)) = best {
                return Ok(Self {
                    x: x.to_vec(),
                    alpha,
                    chol,
                    length_scales,
                    y_mean,
                    y_std,
                });
            }
            jitter *= 10.0;
            if jitter > MAX_JITTER {
                return Err(Error::Degenerate(
                    "surrogate covariance stayed singular up to the maximum jitter".into(),
                ));
            }
        }
    }

    /// Posterior mean and standard deviation at a point.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let k_star = DVector::from_fn(n, |i, _| matern52(&self.x[i], point, &self.length_scales));
        let mean_std = k_star.dot(&self.alpha);
        let v = self.chol.solve(&k_star);
        let var_std = (matern52(point, point, &self.length_scales) - k_star.dot(&v)).max(0.0);
        (
            self.y_mean + self.y_std * mean_std,
            self.y_std * var_std.sqrt(),
        )
    }

    /// The selected per-dimension length scales.
    pub fn length_scales(&self) -> &[f64] {
        &self.length_scales
    }
}

/// Acquisition function for the Bayesian search. Expected improvement is
/// the only supported choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acquisition {
    /// Expected improvement over the incumbent best.
    #[default]
    ExpectedImprovement,
}

/// `EI(x) = (f*−μ)Φ(z) + σφ(z)` with `z = (f*−μ)/σ`; at σ = 0 this
/// degenerates to `max(f*−μ, 0)`.
fn expected_improvement(mean: f64, std: f64, f_best: f64) -> f64 {
    if std <= 1e-12 {
        return (f_best - mean).max(0.0);
    }
    let gauss = Normal::new(0.0, 1.0).expect("unit normal");
    let z = (f_best - mean) / std;
    ((f_best - mean) * gauss.cdf(z) + std * gauss.pdf(z)).max(0.0)
}

/// Element of the low-discrepancy Halton sequence for one base.
fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const HALTON_BASES: [usize; 6] = [2, 3, 5, 7, 11, 13];

/// Budget and seeding knobs of the Bayesian search.
#[derive(Debug, Clone)]
pub struct BayesConfig {
    /// Total number of objective evaluations.
    pub n_calls: usize,
    /// Quasi-random evaluations before the surrogate takes over.
    pub n_initial_points: usize,
    /// Acquisition function.
    pub acquisition: Acquisition,
    /// Seed for the candidate streams.
    pub seed: u64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        Self {
            n_calls: 20,
            n_initial_points: 3,
            acquisition: Acquisition::ExpectedImprovement,
            seed: 0,
        }
    }
}

impl BayesConfig {
    fn validate(&self) -> Result<()> {
        if self.n_initial_points == 0 {
            return Err(Error::Config("n_initial_points must be >= 1".into()));
        }
        if self.n_calls < self.n_initial_points {
            return Err(Error::Config(format!(
                "n_calls ({}) must be >= n_initial_points ({})",
                self.n_calls, self.n_initial_points
            )));
        }
        Ok(())
    }
}

/// Core loop shared by the fitting and injected-objective entry points:
/// quasi-random warmup, then GP + EI proposals. The objective returns the
/// scalar loss to minimize; evaluation errors abort the search.
fn bayesian_minimize(
    space: &SearchSpace,
    cfg: &BayesConfig,
    mut objective: impl FnMut(&[f64]) -> Result<TuneRow>,
) -> Result<Vec<TuneRow>> {
    cfg.validate()?;
    if space.dims() > HALTON_BASES.len() {
        return Err(Error::Config(format!(
            "at most {} search dimensions are supported",
            HALTON_BASES.len()
        )));
    }

    let to_values = |unit: &[f64]| -> Vec<f64> {
        space
            .params()
            .iter()
            .zip(unit)
            .map(|((_, range), u)| range.from_unit(*u))
            .collect()
    };
    let to_unit = |values: &[f64]| -> Vec<f64> {
        space
            .params()
            .iter()
            .zip(values)
            .map(|((_, range), v)| range.to_unit(*v))
            .collect()
    };

    let mut rows: Vec<TuneRow> = Vec::with_capacity(cfg.n_calls);
    let mut observed_unit: Vec<Vec<f64>> = Vec::with_capacity(cfg.n_calls);
    let mut observed_y: Vec<f64> = Vec::with_capacity(cfg.n_calls);

    let mut eval_at = |values: Vec<f64>,
                       rows: &mut Vec<TuneRow>,
                       observed_unit: &mut Vec<Vec<f64>>,
                       observed_y: &mut Vec<f64>|
     -> Result<()> {
        let row = objective(&values)?;
        let loss = row.combined_loss.ok_or_else(|| {
            Error::Data("objective returned no combined loss to minimize".into())
        })?;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration: rows.len() });
        }
        observed_unit.push(to_unit(&values));
        observed_y.push(loss);
        rows.push(row);
        Ok(())
    };

    // Warmup: low-discrepancy Halton points cover the box evenly.
    for k in 0..cfg.n_initial_points {
        let unit: Vec<f64> = (0..space.dims())
            .map(|d| halton(k + 1, HALTON_BASES[d]))
            .collect();
        eval_at(to_values(&unit), &mut rows, &mut observed_unit, &mut observed_y)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while rows.len() < cfg.n_calls {
        let Acquisition::ExpectedImprovement = cfg.acquisition;
        let gp = GaussianProcess::fit(&observed_unit, &observed_y)?;
        let f_best = observed_y.iter().cloned().fold(f64::INFINITY, f64::min);

        // Score a fresh seeded candidate batch and take the best unseen
        // point (falling back to the overall argmax when every candidate
        // collides with an observation).
        let mut best_new: Option<(f64, Vec<f64>)> = None;
        let mut best_any: Option<(f64, Vec<f64>)> = None;
        for _ in 0..EI_CANDIDATES {
            let raw: Vec<f64> = (0..space.dims()).map(|_| rng.random::<f64>()).collect();
            let values = to_values(&raw);
            let unit = to_unit(&values);
            let (mean, std) = gp.predict(&unit);
            let ei = expected_improvement(mean, std, f_best);
            let seen = observed_unit
                .iter()
                .any(|o| o.iter().zip(&unit).all(|(a, b)| (a - b).abs() < 1e-12));
            if best_any.as_ref().is_none_or(|(b, _)| ei > *b) {
                best_any = Some((ei, values.clone()));
            }
            if !seen && best_new.as_ref().is_none_or(|(b, _)| ei > *b) {
                best_new = Some((ei, values));
            }
        }
        let (_, proposal) = best_new
            .or(best_any)
            .expect("candidate batch is never empty");
        eval_at(proposal, &mut rows, &mut observed_unit, &mut observed_y)?;
    }
    Ok(rows)
}

/// Bayesian hyperparameter search over fits: evaluates
/// `cfg.n_initial_points` quasi-random settings, then repeatedly fits the
/// surrogate and evaluates the expected-improvement argmax until
/// `cfg.n_calls` evaluations are spent. The combined loss uses `weights`
/// over (static cost, metrics...). Deterministic per seed.
#[allow(clippy::too_many_arguments)]
pub fn bayesian_search(
    d: &DissimilaritySequence,
    spec_template: &FitSpec,
    settings: &OptimizerSettings,
    space: &SearchSpace,
    eval_functions: &[EvalMetric],
    weights: &[f64],
    cfg: &BayesConfig,
    mask: Option<&InclusionMask>,
) -> Result<TuneResult> {
    let names = space.names();
    let rows = bayesian_minimize(space, cfg, |values| {
        let row = evaluate_candidate(
            d,
            spec_template,
            settings,
            mask,
            &names,
            values,
            eval_functions,
            Some(weights),
        );
        if let Some(err) = &row.error {
            return Err(Error::Data(format!(
                "evaluation at {:?} failed: {err}",
                values
            )));
        }
        Ok(row)
    })?;
    let best_row = TuneResult::select_best(&rows);
    Ok(TuneResult {
        param_names: names,
        metric_names: eval_functions.iter().map(|m| m.name().to_string()).collect(),
        rows,
        best_row,
    })
}

/// Bayesian minimization of an arbitrary injected objective (no fitting):
/// the closure receives parameter values in space order and returns the
/// loss. Useful for testing the search itself and for custom objectives.
pub fn bayesian_search_objective(
    space: &SearchSpace,
    cfg: &BayesConfig,
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<TuneResult> {
    let rows = bayesian_minimize(space, cfg, |values| {
        let loss = objective(values)?;
        Ok(TuneRow {
            params: values.to_vec(),
            metrics: Vec::new(),
            cost_static_avg: None,
            combined_loss: Some(loss),
            error: None,
        })
    })?;
    let best_row = TuneResult::select_best(&rows);
    Ok(TuneResult {
        param_names: space.names(),
        metric_names: Vec::new(),
        rows,
        best_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{MdsType, Method};
    use crate::metrics::{misalign_score, MisalignAggregate};
    use crate::sim::{measure_distances, simulate_paths, SimConfig};
    use approx::assert_abs_diff_eq;

    fn ratio_spec(alpha: f64) -> FitSpec {
        FitSpec::new(Method::Mds { mds_type: MdsType::Ratio }, alpha, 1, 2).unwrap()
    }

    fn small_data() -> DissimilaritySequence {
        let truth = simulate_paths(&SimConfig {
            n: 5,
            t: 4,
            seed: 11,
            ..SimConfig::default()
        })
        .unwrap();
        measure_distances(&truth, 0.05, 12).unwrap()
    }

    fn quick_settings() -> OptimizerSettings {
        OptimizerSettings {
            n_iter: 150,
            ..OptimizerSettings::default()
        }
    }

    #[test]
    fn combined_loss_follows_the_weighted_sum() {
        let loss = combined_loss(0.1905, &[0.0471, 0.43], &[0.95, 0.03, 0.02]).unwrap();
        assert_abs_diff_eq!(loss, 0.1910, epsilon = 1e-4);
        assert_abs_diff_eq!(
            combined_loss(0.7, &[9.0, 9.0], &[1.0, 0.0, 0.0]).unwrap(),
            0.7,
            epsilon = 1e-15
        );
        assert_eq!(
            combined_loss(0.7, &[9.0], &[0.0, 0.0]).unwrap(),
            0.0
        );
        assert!(combined_loss(0.7, &[9.0], &[1.0]).is_err());
        assert!(combined_loss(0.7, &[9.0], &[1.0, -0.1]).is_err());
    }

    #[test]
    fn one_by_one_grid_equals_a_direct_fit() {
        let d = small_data();
        let settings = quick_settings();
        let spec = ratio_spec(0.5);
        let evals = vec![EvalMetric::new("misalign", |x: &ConfigurationSequence| {
            misalign_score(x, None, MisalignAggregate::Mean)
        })];
        let res = grid_search(
            &d,
            &spec,
            &settings,
            &[("alpha".into(), vec![0.5]), ("p".into(), vec![1.0])],
            &evals,
            Some(&[1.0, 0.0]),
            None,
        )
        .unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.best_row, Some(0));

        let direct = fit(&d, &spec, &settings, None).unwrap();
        assert_eq!(res.rows[0].cost_static_avg, Some(direct.cost_static_avg));
        assert_eq!(
            res.rows[0].metrics[0],
            misalign_score(&direct.coords, None, MisalignAggregate::Mean).unwrap()
        );
    }

    #[test]
    fn stronger_smoothing_reduces_misalignment_on_the_grid() {
        let d = small_data();
        let settings = quick_settings();
        let evals = vec![EvalMetric::new("misalign", |x: &ConfigurationSequence| {
            misalign_score(x, None, MisalignAggregate::Mean)
        })];
        let res = grid_search(
            &d,
            &ratio_spec(0.0),
            &settings,
            &[("alpha".into(), vec![0.0, 5.0])],
            &evals,
            None,
            None,
        )
        .unwrap();
        assert_eq!(res.rows.len(), 2);
        assert!(res.best_row.is_none());
        let loose = res.rows[0].metrics[0];
        let tight = res.rows[1].metrics[0];
        assert!(
            tight < loose,
            "misalign at alpha=5 ({tight}) should beat alpha=0 ({loose})"
        );
    }

    #[test]
    fn grid_rows_follow_cartesian_order_and_bad_points_become_error_rows() {
        let d = small_data();
        let settings = quick_settings();
        // p = 9 exceeds T - 1 = 3 and must fail per-row, not abort.
        let res = grid_search(
            &d,
            &ratio_spec(0.3),
            &settings,
            &[
                ("alpha".into(), vec![0.0, 0.3]),
                ("p".into(), vec![1.0, 9.0]),
            ],
            &[],
            None,
            None,
        )
        .unwrap();
        assert_eq!(res.rows.len(), 4);
        assert_eq!(res.rows[0].params, vec![0.0, 1.0]);
        assert_eq!(res.rows[1].params, vec![0.0, 9.0]);
        assert_eq!(res.rows[2].params, vec![0.3, 1.0]);
        assert_eq!(res.rows[3].params, vec![0.3, 9.0]);
        assert!(res.rows[0].error.is_none());
        assert!(res.rows[1].error.is_some());
        assert!(res.rows[3].error.is_some());
    }

    #[test]
    fn all_failed_grid_is_an_error() {
        let d = small_data();
        let res = grid_search(
            &d,
            &ratio_spec(0.3),
            &quick_settings(),
            &[("p".into(), vec![9.0])],
            &[],
            None,
            None,
        );
        assert!(res.is_err());
    }

    #[test]
    fn gp_interpolates_training_points() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
        let y: Vec<f64> = x.iter().map(|p| (p[0] - 0.33).powi(2)).collect();
        let gp = GaussianProcess::fit(&x, &y).unwrap();
        for (p, target) in x.iter().zip(&y) {
            let (mean, _) = gp.predict(p);
            assert!(
                (mean - target).abs() <= 1e-4,
                "GP mean {mean} differs from target {target}"
            );
        }
        // Away from the data the predictive spread opens up.
        let (_, std_far) = gp.predict(&[5.0]);
        assert!(std_far > 0.1);
    }

    #[test]
    fn expected_improvement_is_nonnegative_and_zero_when_hopeless() {
        assert_eq!(expected_improvement(1.0, 0.0, 0.5), 0.0);
        assert_abs_diff_eq!(expected_improvement(0.2, 0.0, 0.5), 0.3, epsilon = 1e-15);
        for mean in [-1.0, 0.0, 2.0] {
            for std in [0.0, 0.3, 2.0] {
                assert!(expected_improvement(mean, std, 0.1) >= 0.0);
            }
        }
    }

    #[test]
    fn quadratic_objective_is_located_by_the_search() {
        let space = SearchSpace::new(vec![(
            "x".into(),
            ParamRange::Real { lo: 0.0, hi: 1.0 },
        )])
        .unwrap();
        let cfg = BayesConfig {
            n_calls: 20,
            n_initial_points: 3,
            seed: 5,
            ..BayesConfig::default()
        };
        let res =
            bayesian_search_objective(&space, &cfg, |v| Ok((v[0] - 0.7312).powi(2))).unwrap();
        assert_eq!(res.rows.len(), 20);
        let best = res.best().unwrap();
        assert!(
            (best.params[0] - 0.7312).abs() < 0.05,
            "best x = {}",
            best.params[0]
        );
    }

    #[test]
    fn pure_random_search_when_calls_equal_initial_points() {
        let space = SearchSpace::new(vec![(
            "x".into(),
            ParamRange::Real { lo: 0.0, hi: 1.0 },
        )])
        .unwrap();
        let cfg = BayesConfig {
            n_calls: 5,
            n_initial_points: 5,
            ..BayesConfig::default()
        };
        let res = bayesian_search_objective(&space, &cfg, |v| Ok(v[0])).unwrap();
        assert_eq!(res.rows.len(), 5);
        let argmin = res
            .rows
            .iter()
            .enumerate()
            .min_by(|a, b| {
                a.1.combined_loss
                    .unwrap()
                    .partial_cmp(&b.1.combined_loss.unwrap())
                    .unwrap()
            })
            .unwrap()
            .0;
        assert_eq!(res.best_row, Some(argmin));
    }

    #[test]
    fn constant_objective_keeps_loss_constant_across_rows() {
        let space = SearchSpace::new(vec![
            ("x".into(), ParamRange::Real { lo: 0.0, hi: 1.0 }),
            ("k".into(), ParamRange::Integer { lo: 1, hi: 3 }),
        ])
        .unwrap();
        let cfg = BayesConfig {
            n_calls: 8,
            n_initial_points: 3,
            ..BayesConfig::default()
        };
        let res = bayesian_search_objective(&space, &cfg, |_| Ok(2.5)).unwrap();
        assert!(res.rows.iter().all(|r| r.combined_loss == Some(2.5)));
        assert_eq!(res.best_row, Some(0));
        // Integer dimension really is integral.
        assert!(res.rows.iter().all(|r| r.params[1].fract() == 0.0));
    }

    #[test]
    fn search_is_deterministic_per_seed() {
        let space = SearchSpace::new(vec![(
            "x".into(),
            ParamRange::Real { lo: -2.0, hi: 2.0 },
        )])
        .unwrap();
        let cfg = BayesConfig {
            n_calls: 12,
            n_initial_points: 3,
            seed: 77,
            ..BayesConfig::default()
        };
        let f = |v: &[f64]| Ok((v[0] + 1.0).powi(2) + 0.1 * (3.0 * v[0]).sin());
        let a = bayesian_search_objective(&space, &cfg, f).unwrap();
        let b = bayesian_search_objective(&space, &cfg, f).unwrap();
        assert_eq!(a.best_row, b.best_row);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.params, rb.params);
            assert_eq!(ra.combined_loss, rb.combined_loss);
        }
    }

    #[test]
    fn bayesian_search_tunes_a_real_fit() {
        let d = small_data();
        let space = SearchSpace::new(vec![(
            "alpha".into(),
            ParamRange::Real { lo: 0.0, hi: 1.0 },
        )])
        .unwrap();
        let evals = vec![EvalMetric::new("misalign", |x: &ConfigurationSequence| {
            misalign_score(x, None, MisalignAggregate::Mean)
        })];
        let cfg = BayesConfig {
            n_calls: 6,
            n_initial_points: 3,
            ..BayesConfig::default()
        };
        let res = bayesian_search(
            &d,
            &ratio_spec(0.0),
            &quick_settings(),
            &space,
            &evals,
            &[0.95, 0.05],
            &cfg,
            None,
        )
        .unwrap();
        assert_eq!(res.rows.len(), 6);
        assert_eq!(res.metric_names, vec!["misalign"]);
        assert!(res.best().unwrap().combined_loss.unwrap().is_finite());
    }

    #[test]
    fn unknown_parameters_are_rejected() {
        let d = small_data();
        let res = grid_search(
            &d,
            &ratio_spec(0.3),
            &quick_settings(),
            &[("gamma".into(), vec![1.0])],
            &[],
            None,
            None,
        );
        assert!(res.is_err());
    }
}
