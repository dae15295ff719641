//! Argument declarations for the `dynamap` binary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Dynamic proximity mapping: fit, evaluate, tune, and draw sequences of
/// low-dimensional maps from dissimilarity data.
#[derive(Debug, Parser)]
#[command(name = "dynamap", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Convert an edgelist CSV into the matrix, labels, and mask files.
    Convert(ConvertArgs),
    /// Fit a map sequence to a matrix file.
    Fit(FitArgs),
    /// Score fitted coordinates against their input matrices.
    Eval(EvalArgs),
    /// Search hyperparameters by grid or Bayesian optimization.
    Tune(TuneArgs),
    /// Generate synthetic paths, or run the recovery study.
    Simulate(SimulateArgs),
    /// Time joint fits against independent per-period fits.
    Bench(BenchArgs),
    /// Render coordinates to a deterministic SVG map.
    Plot(PlotArgs),
    /// Procrustes-align a coordinates file to a reference map.
    Align(AlignArgs),
    /// Emit the bundled synthetic tech-firms edgelist.
    Example(ExampleArgs),
}

/// Method and hyperparameter flags shared by fit-like commands.
#[derive(Debug, Args)]
pub struct MethodOpts {
    /// Static mapping method.
    #[arg(long, default_value = "mds", value_parser = ["mds", "sammon", "tsne"])]
    pub method: String,
    /// Disparity transformation for MDS.
    #[arg(long, default_value = "ratio", value_parser = ["ratio", "interval", "ordinal"])]
    pub mds_type: String,
    /// Effective neighborhood size for t-SNE.
    #[arg(long, default_value_t = 15.0)]
    pub perplexity: f64,
    /// Temporal penalty weight.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Smoothing order (1 damps movement, 2 damps acceleration, ...).
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Map dimensionality.
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
}

/// Optimizer flags shared by fit-like commands.
#[derive(Debug, Args)]
pub struct OptimOpts {
    /// Iteration cap per start.
    #[arg(long, default_value_t = 2000)]
    pub n_iter: usize,
    /// Stop when the RMS gradient falls below this.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Initial line-search step size.
    #[arg(long, default_value_t = 1.0)]
    pub step_size: f64,
    /// Number of random starts; the best final cost wins.
    #[arg(long, default_value_t = 1)]
    pub n_inits: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coordinates CSV to start from instead of random inits.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Diagnostic chatter: 0 silent, 1 summary, 2 per-check lines.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
    pub verbose: u8,
    /// Iterations between convergence checks and progress reports.
    #[arg(long, default_value_t = 50)]
    pub n_iter_check: usize,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Edgelist CSV to read.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding the period.
    #[arg(long, default_value = "period")]
    pub period_col: String,
    /// Column holding the first object of a pair.
    #[arg(long, default_value = "id_a")]
    pub id_a_col: String,
    /// Column holding the second object of a pair.
    #[arg(long, default_value = "id_b")]
    pub id_b_col: String,
    /// Column holding the pair's score.
    #[arg(long, default_value = "score")]
    pub score_col: String,
    /// Treat scores as similarities and convert them to dissimilarities.
    #[arg(long, value_parser = ["mirror", "max_minus", "reciprocal"])]
    pub transform: Option<String>,
    /// Rescale the converted dissimilarities.
    #[arg(long, value_parser = ["max1", "zscore_offdiag"])]
    pub normalize: Option<String>,
    /// Allow per-period rosters to differ (entry and exit), emitting a
    /// mask that marks which objects each period observed.
    #[arg(long)]
    pub unbalanced: bool,
    /// Matrix CSV to write.
    #[arg(long)]
    pub out_matrix: PathBuf,
    /// Labels CSV to write (default: <out-matrix stem>_labels.csv).
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    /// Mask CSV to write (default: <out-matrix stem>_mask.csv).
    #[arg(long)]
    pub out_mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Matrix CSV to fit.
    #[arg(long)]
    pub input: PathBuf,
    /// Mask CSV for unbalanced panels.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub method: MethodOpts,
    #[command(flatten)]
    pub optim: OptimOpts,
    /// Coordinates CSV to write.
    #[arg(long)]
    pub out_coords: PathBuf,
    /// Manifest file to write (default: <out-coords>.manifest).
    #[arg(long)]
    pub out_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Coordinates CSV to score.
    #[arg(long)]
    pub coords: PathBuf,
    /// Matrix CSV the coordinates were fitted to.
    #[arg(long)]
    pub input: PathBuf,
    /// Mask CSV for unbalanced panels.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Hit-rate neighborhood size (default: min(5, n-1)).
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma list of metrics to compute (misalign, alignment,
    /// persistence, hitrate, adjusted_hitrate); default: all available.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Misalignment aggregation.
    #[arg(long, default_value = "mean", value_parser = ["mean", "total"])]
    pub aggregate: String,
    /// Average persistence per object instead of pooling steps.
    #[arg(long)]
    pub per_object: bool,
    /// Also list per-period hit rates.
    #[arg(long)]
    pub per_period: bool,
    /// Also report the mean static cost under the flagged method.
    #[arg(long)]
    pub with_cost: bool,
    #[command(flatten)]
    pub method: MethodOpts,
    /// Metrics CSV to write (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Matrix CSV to tune on.
    #[arg(long)]
    pub input: PathBuf,
    /// Mask CSV for unbalanced panels.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[command(flatten)]
    pub method: MethodOpts,
    #[command(flatten)]
    pub optim: OptimOpts,
    /// Grid token name=v1,v2,... or name=start:stop:count (repeatable).
    #[arg(long)]
    pub grid: Vec<String>,
    /// Run Bayesian search over --space instead of a grid.
    #[arg(long)]
    pub bayes: bool,
    /// Space token name=lo..hi or name=lo..hi:int (repeatable).
    #[arg(long)]
    pub space: Vec<String>,
    /// Objective evaluations for the Bayesian search.
    #[arg(long, default_value_t = 20)]
    pub n_calls: usize,
    /// Quasi-random evaluations before the surrogate takes over.
    #[arg(long, default_value_t = 3)]
    pub n_initial_points: usize,
    /// Comma list weighting (static cost, misalign, hitrate_loss) into
    /// one loss; required for --bayes, optional for grids.
    #[arg(long)]
    pub weights: Option<String>,
    /// Hit-rate neighborhood size (default: min(5, n-1)).
    #[arg(long)]
    pub k: Option<usize>,
    /// Evaluation-table CSV to write (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Objects to simulate.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Periods to simulate.
    #[arg(long, default_value_t = 10)]
    pub t: usize,
    /// Initial position spread.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Step noise scale; under --recovery, a comma list of measurement
    /// noise levels instead.
    #[arg(long, default_value = "0.25")]
    pub noise: String,
    /// Velocity carry-over in [0,1).
    #[arg(long, default_value_t = 0.6)]
    pub momentum: f64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Distance noise applied when writing --out-matrix.
    #[arg(long, default_value_t = 0.0)]
    pub measurement_noise: f64,
    /// Run the noise-by-alpha recovery study instead of one simulation.
    #[arg(long)]
    pub recovery: bool,
    /// Comma list of temporal weights for --recovery.
    #[arg(long, default_value = "0,0.3")]
    pub alphas: String,
    /// Replications per recovery cell.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Iteration cap for recovery fits.
    #[arg(long, default_value_t = 2000)]
    pub n_iter: usize,
    /// Truth coordinates CSV to write (plain mode).
    #[arg(long)]
    pub out_coords: Option<PathBuf>,
    /// Measured-distances matrix CSV to write (plain mode).
    #[arg(long)]
    pub out_matrix: Option<PathBuf>,
    /// Recovery-table CSV to write (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma list of object counts.
    #[arg(long, default_value = "10,50,100")]
    pub n: String,
    /// Comma list of period counts.
    #[arg(long, default_value = "10,50,100")]
    pub t: String,
    /// Fixed gradient-descent iterations per fit.
    #[arg(long, default_value_t = 750)]
    pub iterations: usize,
    /// Joint-fit timing CSV to write.
    #[arg(long)]
    pub out_joint: PathBuf,
    /// Independent-static timing CSV to write.
    #[arg(long)]
    pub out_independent: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Coordinates CSV to draw.
    #[arg(long)]
    pub coords: PathBuf,
    /// Plot kind.
    #[arg(long, default_value = "static", value_parser = ["static", "dynamic", "trajectories"])]
    pub mode: String,
    /// Period to draw in static mode (default: the first).
    #[arg(long)]
    pub period: Option<String>,
    /// Mask CSV; excluded objects are omitted from their absent periods.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Draw movement arrows between consecutive positions (dynamic mode).
    #[arg(long)]
    pub show_arrows: bool,
    /// Opacity of the oldest period in dynamic mode.
    #[arg(long, default_value_t = 0.25)]
    pub transparency_start: f64,
    /// Opacity of the newest period in dynamic mode.
    #[arg(long, default_value_t = 1.0)]
    pub transparency_end: f64,
    /// CSV (label,color) assigning marker colors.
    #[arg(long)]
    pub color_file: Option<PathBuf>,
    /// CSV (label,size) assigning marker radii.
    #[arg(long)]
    pub size_file: Option<PathBuf>,
    /// CSV (label,text) overriding displayed names.
    #[arg(long)]
    pub label_file: Option<PathBuf>,
    /// SVG file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Coordinates CSV to align.
    #[arg(long)]
    pub coords: PathBuf,
    /// Single-period coordinates CSV to align onto.
    #[arg(long)]
    pub reference: PathBuf,
    /// Alignment mode: per_map fits each period to the reference; fixed
    /// applies the first period's transform to all periods.
    #[arg(long, default_value = "per_map", value_parser = ["per_map", "fixed"])]
    pub align: String,
    /// Also rescale maps toward the reference.
    #[arg(long)]
    pub allow_scaling: bool,
    /// Aligned coordinates CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// RNG seed for the stand-in generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edgelist CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional ground-truth coordinates CSV to write.
    #[arg(long)]
    pub out_truth: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_tree_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn fit_flags_parse_with_canonical_names() {
        let cli = Cli::parse_from([
            "dynamap",
            "fit",
            "--input",
            "m.csv",
            "--method",
            "mds",
            "--mds-type",
            "ordinal",
            "--alpha",
            "0.4",
            "--p",
            "2",
            "--dims",
            "2",
            "--n-iter",
            "500",
            "--tol",
            "1e-5",
            "--step-size",
            "0.5",
            "--n-inits",
            "3",
            "--seed",
            "7",
            "--verbose",
            "2",
            "--n-iter-check",
            "25",
            "--out-coords",
            "x.csv",
        ]);
        match cli.cmd {
            Cmd::Fit(args) => {
                assert_eq!(args.method.mds_type, "ordinal");
                assert_eq!(args.method.alpha, 0.4);
                assert_eq!(args.method.p, 2);
                assert_eq!(args.optim.n_inits, 3);
                assert_eq!(args.optim.verbose, 2);
            }
            _ => panic!("expected fit"),
        }
    }

    #[test]
    fn bad_enum_values_are_rejected_at_parse_time() {
        assert!(Cli::try_parse_from([
            "dynamap",
            "fit",
            "--input",
            "m.csv",
            "--method",
            "pca",
            "--out-coords",
            "x.csv",
        ])
        .is_err());
        assert!(Cli::try_parse_from([
            "dynamap", "plot", "--coords", "x.csv", "--mode", "gif", "--out", "m.svg",
        ])
        .is_err());
    }
}
