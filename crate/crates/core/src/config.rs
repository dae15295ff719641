//! Problem and optimizer configuration.

use crate::error::{Error, Result};
use crate::methods::Method;
use crate::seq::{ConfigurationSequence, DissimilaritySequence};

/// What to fit: the static method, the temporal penalty weight α, the
/// smoothing order p, and the embedding dimensionality.
#[derive(Debug, Clone)]
pub struct FitSpec {
    /// Static mapping method (MDS variant, Sammon, or t-SNE).
    pub method: Method,
    /// Temporal penalty weight α ≥ 0.
    pub alpha: f64,
    /// Smoothing order p ≥ 1: the penalty covers backward differences of
    /// orders 1..=p.
    pub p: usize,
    /// Embedding dimensionality d ≥ 1.
    pub dims: usize,
}

impl FitSpec {
    /// Builds a spec, checking the value-level invariants (α ≥ 0 and
    /// finite, p ≥ 1, d ≥ 1). Sequence-dependent checks such as p < T
    /// happen in [`FitSpec::validate_for`].
    pub fn new(method: Method, alpha: f64, p: usize, dims: usize) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Config(format!("alpha must be >= 0, got {alpha}")));
        }
        if p == 0 {
            return Err(Error::Config("p must be >= 1".into()));
        }
        if dims == 0 {
            return Err(Error::Config("dims must be >= 1".into()));
        }
        Ok(Self {
            method,
            alpha,
            p,
            dims,
        })
    }

    /// Checks this spec against a concrete sequence: the smoothing order
    /// needs a (p+1)-period window somewhere, t-SNE's perplexity must be
    /// below the number of included objects, and single-period data only
    /// supports α = 0 (a purely static fit).
    pub fn validate_for(&self, d: &DissimilaritySequence) -> Result<()> {
        let t = d.n_periods();
        if t == 1 && self.alpha > 0.0 {
            return Err(Error::Data(
                "temporal penalty requires at least 2 periods".into(),
            ));
        }
        if t >= 2 && self.p >= t {
            return Err(Error::Config(format!(
                "smoothing order p={} requires p < T={t}",
                self.p
            )));
        }
        self.method.validate_for_size(d.n_objects())?;
        Ok(())
    }
}

/// Knobs for the iterative optimizer.
#[derive(Debug, Clone)]
pub struct OptimizerSettings {
    /// Maximum number of iterations.
    pub n_iter: usize,
    /// Convergence threshold on the RMS gradient entry.
    pub tol: f64,
    /// Initial step size (MDS/Sammon); t-SNE's learning rate is
    /// `step_size * 200`.
    pub step_size: f64,
    /// Number of random restarts; ignored when `init` is given.
    pub n_inits: usize,
    /// Optional fixed starting sequence. When set, exactly one run is
    /// performed from it.
    pub init: Option<ConfigurationSequence>,
    /// Cadence (in iterations) of the cost-stagnation check and of
    /// verbose progress lines.
    pub n_iter_check: usize,
    /// Verbosity: 0 silent, 1 banner + terminal line, 2 adds per-check
    /// progress lines.
    pub verbose: u8,
    /// PRNG seed; restart r draws its start from seed + r.
    pub seed: u64,
    /// Maximum number of step halvings per backtracking line search.
    pub max_halvings: usize,
    /// Momentum coefficient for the t-SNE optimizer.
    pub momentum: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            n_iter: 2000,
            tol: 1e-4,
            step_size: 1.0,
            n_inits: 1,
            init: None,
            n_iter_check: 50,
            verbose: 0,
            seed: 0,
            max_halvings: 16,
            momentum: 0.8,
        }
    }
}

impl OptimizerSettings {
    /// Checks the value-level invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::Config("n_iter must be >= 1".into()));
        }
        if !self.tol.is_finite() || self.tol < 0.0 {
            return Err(Error::Config(format!("tol must be >= 0, got {}", self.tol)));
        }
        if !self.step_size.is_finite() || self.step_size <= 0.0 {
            return Err(Error::Config(format!(
                "step_size must be > 0, got {}",
                self.step_size
            )));
        }
        if self.n_inits == 0 {
            return Err(Error::Config("n_inits must be >= 1".into()));
        }
        if self.n_iter_check == 0 {
            return Err(Error::Config("n_iter_check must be >= 1".into()));
        }
        if self.verbose > 2 {
            return Err(Error::Config(format!(
                "verbose must be 0, 1, or 2, got {}",
                self.verbose
            )));
        }
        if !self.momentum.is_finite() || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}
