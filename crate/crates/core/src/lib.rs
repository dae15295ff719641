//! Dynamic proximity mapping.
//!
//! Fits a sequence of low-dimensional configurations to a sequence of
//! dissimilarity matrices by minimizing per-period mapping cost (MDS,
//! Sammon mapping, or t-SNE) plus a temporal penalty on object movement.
//! The penalty aligns consecutive maps and smooths trajectories, so the
//! resulting map sequence can be read as an evolving market or network
//! rather than T unrelated snapshots.
//!
//! The pipeline in brief:
//!
//! 1. [`preprocess`] turns raw relationship data (edge lists, similarity
//!    or co-occurrence matrices, feature tables) into a validated
//!    [`DissimilaritySequence`], optionally with an [`InclusionMask`] for
//!    unbalanced panels.
//! 2. [`optimize::fit`] minimizes the joint cost for a chosen
//!    [`FitSpec`], producing a [`ConfigurationSequence`].
//! 3. [`transform`] aligns map sequences via Procrustes analysis, and
//!    [`metrics`] scores them (stress, misalignment, hit rates,
//!    persistence).
//! 4. [`tune`] searches hyperparameters by grid or Bayesian optimization,
//!    and [`sim`] provides synthetic ground-truth studies.

#![warn(missing_docs)]

pub mod config;
pub mod cost;
pub mod error;
pub mod methods;
pub mod metrics;
pub mod optimize;
pub mod preprocess;
pub mod seq;
pub mod sim;
pub mod transform;
pub mod tune;
pub mod weights;

pub use config::{FitSpec, OptimizerSettings};
pub use cost::{temporal_cost, temporal_gradient, total_cost, total_gradient, JointProblem};
pub use error::{Error, Result};
pub use methods::{MdsType, Method};
pub use metrics::{
    adjusted_hitrate_score, align_score, avg_adjusted_hitrate_score, avg_hitrate_score, evaluate,
    hitrate_score, misalign_score, persistence_score, EvalReport, MisalignAggregate,
    PersistenceMode,
};
pub use optimize::{describe_progress, fit, FitResult, StopReason, TracePoint};
pub use preprocess::{
    coocc_to_sim, edgelist_to_matrices, expand_matrices, matrices_to_edgelist, normalize_diss,
    sim_to_diss, table_to_diss, DissNormalization, EdgeList, EdgeRow, PeriodMatrices, SimToDiss,
    TableMetric,
};
pub use seq::{ConfigurationSequence, DissimilaritySequence, InclusionMask, SimilaritySequence};
pub use sim::{
    measure_distances, recovery_study, runtime_benchmark, simulate_paths, tech_firms_standin,
    BenchRow, RecoveryRow, SimConfig,
};
pub use transform::{align_maps, procrustes_distance, procrustes_fit, AlignMode, ProcrustesTransform};
pub use tune::{
    bayesian_search, bayesian_search_objective, combined_loss, grid_search, Acquisition,
    BayesConfig, EvalMetric, GaussianProcess, ParamRange, SearchSpace, TuneResult, TuneRow,
};
pub use weights::{compute_object_weights, ObjectWeights};
