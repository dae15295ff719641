//! Static mapping methods: metric and nonmetric MDS, Sammon mapping, and
//! t-SNE. Each exposes a cost plus analytic gradient, and a
//! [`PeriodCost`] wrapper that precomputes whatever per-period state the
//! optimizer needs (Sammon's normalizer, t-SNE's probability matrix).

pub mod mds;
pub mod sammon;
pub mod tsne;

use nalgebra::DMatrix;

pub use mds::{cmds, fit_disparities, map_distances, mds_gradient, mds_stress, pava, Cmds, MdsType};
pub use sammon::{sammon_cost, sammon_gradient};
pub use tsne::{tsne_cost, tsne_gradient, tsne_p_matrix, PMatrix};

use crate::error::{Error, Result};

/// Which iterative scheme the optimizer should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Gradient descent with a backtracking-by-halving line search.
    BacktrackingHalving,
    /// Gradient descent with momentum and per-parameter gains.
    Momentum,
}

/// A static mapping method together with its method-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Stress-based MDS with the given disparity transformation.
    Mds {
        /// Disparity flavor: ratio, interval, or ordinal.
        mds_type: MdsType,
    },
    /// Sammon mapping.
    Sammon,
    /// t-SNE with the given perplexity.
    Tsne {
        /// Effective neighborhood size; must stay below n.
        perplexity: f64,
    },
}

impl Method {
    /// Short name used in diagnostics, e.g. "[MDS] Iteration 50 ...".
    pub fn label(&self) -> &'static str {
        match self {
            Method::Mds { .. } => "MDS",
            Method::Sammon => "Sammon",
            Method::Tsne { .. } => "TSNE",
        }
    }

    /// The optimizer variant this method is paired with.
    pub fn optimizer_kind(&self) -> OptimizerKind {
        match self {
            Method::Tsne { .. } => OptimizerKind::Momentum,
            _ => OptimizerKind::BacktrackingHalving,
        }
    }

    /// Validates method parameters against the (effective) number of
    /// objects in a period.
    pub fn validate_for_size(&self, n: usize) -> Result<()> {
        if let Method::Tsne { perplexity } = self {
            if !perplexity.is_finite() || *perplexity <= 0.0 {
                return Err(Error::Config(format!(
                    "perplexity must be positive, got {perplexity}"
                )));
            }
            if *perplexity >= n as f64 {
                return Err(Error::Config(format!(
                    "perplexity {perplexity} must be below the number of objects {n}"
                )));
            }
        }
        Ok(())
    }

    /// Precomputes the per-period cost state for one dissimilarity matrix
    /// (already restricted to the included objects of that period).
    pub fn prepare(&self, delta: &DMatrix<f64>) -> Result<Box<dyn PeriodCost>> {
        match self {
            Method::Mds { mds_type } => Ok(Box::new(MdsPeriod {
                delta: delta.clone(),
                mds_type: *mds_type,
            })),
            Method::Sammon => {
                sammon::check_positive_offdiag(delta)?;
                Ok(Box::new(SammonPeriod {
                    delta: delta.clone(),
                }))
            }
            Method::Tsne { perplexity } => {
                let pm = tsne_p_matrix(delta, *perplexity)?;
                Ok(Box::new(TsnePeriod { p: pm.p }))
            }
        }
    }
}

/// Per-period static cost with all method state precomputed.
///
/// Methods with an inner transformation fitted to the current
/// configuration (the MDS disparities) additionally expose a frozen view:
/// [`PeriodCost::freeze`] captures the transformation at the current
/// configuration, and [`PeriodCost::cost_at`] / [`PeriodCost::gradient_at`]
/// evaluate with that capture held constant. The optimizer refreshes the
/// capture once per iteration and runs its line search against the frozen
/// cost; this is the alternating scheme that keeps the map scale anchored
/// to the disparities. Evaluating the refit cost inside the line search
/// instead would let a temporal penalty shrink the maps toward zero,
/// because the refit static cost is scale-invariant.
pub trait PeriodCost: Send + Sync {
    /// Cost of the period's configuration, refitting any inner
    /// transformation.
    fn cost(&self, x: &DMatrix<f64>) -> Result<f64>;
    /// Gradient of the cost with respect to the configuration (inner
    /// transformation refreshed at `x`, then held constant).
    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>>;
    /// Captures the inner transformation at `x`; `None` for methods whose
    /// state is data-only (Sammon, t-SNE).
    fn freeze(&self, _x: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
        Ok(None)
    }
    /// Cost with the inner transformation held at `state`. At the
    /// configuration `state` was frozen from, this equals [`Self::cost`].
    fn cost_at(&self, x: &DMatrix<f64>, state: Option<&DMatrix<f64>>) -> Result<f64> {
        let _ = state;
        self.cost(x)
    }
    /// Gradient with the inner transformation held at `state`.
    fn gradient_at(
        &self,
        x: &DMatrix<f64>,
        state: Option<&DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        let _ = state;
        self.gradient(x)
    }
}

struct MdsPeriod {
    delta: DMatrix<f64>,
    mds_type: MdsType,
}

impl PeriodCost for MdsPeriod {
    fn cost(&self, x: &DMatrix<f64>) -> Result<f64> {
        mds_stress(x, &self.delta, self.mds_type).map(|(s, _)| s)
    }

    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        mds_gradient(x, &self.delta, self.mds_type)
    }

    fn freeze(&self, x: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
        let dist = mds::map_distances(x);
        mds::fit_disparities(&dist, &self.delta, self.mds_type).map(Some)
    }

    fn cost_at(&self, x: &DMatrix<f64>, state: Option<&DMatrix<f64>>) -> Result<f64> {
        match state {
            Some(dhat) => mds::stress_at_disparities(&mds::map_distances(x), dhat),
            None => self.cost(x),
        }
    }

    fn gradient_at(
        &self,
        x: &DMatrix<f64>,
        state: Option<&DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        match state {
            Some(dhat) => {
                mds::stress_gradient_at_disparities(x, &mds::map_distances(x), dhat)
            }
            None => self.gradient(x),
        }
    }
}

struct SammonPeriod {
    delta: DMatrix<f64>,
}

impl PeriodCost for SammonPeriod {
    fn cost(&self, x: &DMatrix<f64>) -> Result<f64> {
        sammon_cost(x, &self.delta)
    }

    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        sammon_gradient(x, &self.delta)
    }
}

struct TsnePeriod {
    p: DMatrix<f64>,
}

impl PeriodCost for TsnePeriod {
    fn cost(&self, x: &DMatrix<f64>) -> Result<f64> {
        tsne_cost(x, &self.p)
    }

    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        tsne_gradient(x, &self.p)
    }
}
