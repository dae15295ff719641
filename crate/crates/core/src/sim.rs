//! Synthetic ground truth, recovery studies, and runtime benchmarks.
//!
//! The generator draws smooth 2-D object trajectories from a momentum-based
//! random walk, measures (optionally noisy) pairwise distances from them,
//! and provides two harnesses on top: a recovery study that fits the
//! measured distances back and scores how well the known truth is
//! recovered, and a wall-clock benchmark over problem sizes. A bundled
//! "tech firms" generator produces a small labeled panel shaped like the
//! inter-firm similarity data used throughout the examples.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::{FitSpec, OptimizerSettings};
use crate::error::{Error, Result};
use crate::optimize::fit;
use crate::seq::{ConfigurationSequence, DissimilaritySequence};
use crate::transform::procrustes_distance;

/// Parameters of the momentum-based random walk generator.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Number of objects.
    pub n: usize,
    /// Number of periods.
    pub t: usize,
    /// Spread of the initial positions.
    pub scale: f64,
    /// Scale of the per-step velocity innovations.
    pub noise: f64,
    /// Velocity carry-over between steps, in [0, 1).
    pub momentum: f64,
    /// Scale of the position perturbation applied before distances are
    /// measured.
    pub measurement_noise: f64,
    /// PRNG seed.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 6,
            t: 10,
            scale: 1.0,
            noise: 0.25,
            momentum: 0.6,
            measurement_noise: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Checks the value-level invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        if self.t < 2 {
            return Err(Error::Config(format!("t must be >= 2, got {}", self.t)));
        }
        if !self.momentum.is_finite() || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        for (name, v) in [
            ("scale", self.scale),
            ("noise", self.noise),
            ("measurement_noise", self.measurement_noise),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Draws 2-D ground-truth trajectories: initial positions are
/// `Normal(0, scale²)`, velocities start at `Normal(0, noise²)` and evolve
/// as `dX ← momentum·dX + (1−momentum)·Normal(0, noise²)`, and each period
/// adds the current velocity. Bit-reproducible per seed.
pub fn simulate_paths(cfg: &SimConfig) -> Result<ConfigurationSequence> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = |scale: f64, m: &mut DMatrix<f64>| {
        for i in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v: f64 = StandardNormal.sample(&mut rng);
                m[(i, c)] = scale * v;
            }
        }
    };

    let mut x = DMatrix::zeros(cfg.n, 2);
    draw(cfg.scale, &mut x);
    let mut dx = DMatrix::zeros(cfg.n, 2);
    draw(cfg.noise, &mut dx);

    let mut maps = Vec::with_capacity(cfg.t);
    maps.push(x.clone());
    let mut eps = DMatrix::zeros(cfg.n, 2);
    for _ in 1..cfg.t {
        draw(cfg.noise, &mut eps);
        dx = &dx * cfg.momentum + &eps * (1.0 - cfg.momentum);
        x += &dx;
        maps.push(x.clone());
    }
    ConfigurationSequence::new(maps)
}

fn distance_matrix(points: &DMatrix<f64>) -> DMatrix<f64> {
    let n = points.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (points.row(i) - points.row(j)).norm()
        }
    })
}

/// Measures pairwise Euclidean distances from the true positions, after
/// perturbing each coordinate by `Normal(0, measurement_noise²)`. The
/// noise hits positions, not distances, so the output is always a valid
/// metric on the perturbed points.
pub fn measure_distances(
    x_true: &ConfigurationSequence,
    measurement_noise: f64,
    seed: u64,
) -> Result<DissimilaritySequence> {
    if !measurement_noise.is_finite() || measurement_noise < 0.0 {
        return Err(Error::Config(format!(
            "measurement_noise must be >= 0, got {measurement_noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mats = Vec::with_capacity(x_true.n_periods());
    for map in x_true.maps() {
        let mut perturbed = map.clone();
        if measurement_noise > 0.0 {
            for i in 0..perturbed.nrows() {
                for c in 0..perturbed.ncols() {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    perturbed[(i, c)] += measurement_noise * v;
                }
            }
        }
        mats.push(distance_matrix(&perturbed));
    }
    DissimilaritySequence::from_matrices(mats)
}

/// One aggregated cell of a recovery study.
#[derive(Debug, Clone)]
pub struct RecoveryRow {
    /// Measurement noise level of the cell.
    pub noise: f64,
    /// Temporal penalty weight of the cell.
    pub alpha: f64,
    /// Mean per-period static cost over successful replications.
    pub stress: f64,
    /// Mean per-period Procrustes distance to the truth over successful
    /// replications.
    pub procrustes: f64,
    /// Replications whose fit failed.
    pub failures: usize,
}

/// Simulates, measures, fits, and scores recovery for every combination of
/// measurement noise and α, averaging over `reps` seeded replications.
/// Truth paths are shared across cells within a replication, so cells are
/// paired comparisons.
pub fn recovery_study(
    noise_levels: &[f64],
    alpha_levels: &[f64],
    reps: usize,
    spec_template: &FitSpec,
    settings: &OptimizerSettings,
    cfg: &SimConfig,
) -> Result<Vec<RecoveryRow>> {
    if noise_levels.is_empty() || alpha_levels.is_empty() {
        return Err(Error::Config(
            "recovery study needs at least one noise level and one alpha".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::Config("reps must be >= 1".into()));
    }
    cfg.validate()?;

    let mut rows = Vec::with_capacity(noise_levels.len() * alpha_levels.len());
    for &noise in noise_levels {
        for &alpha in alpha_levels {
            let spec = FitSpec::new(
                spec_template.method.clone(),
                alpha,
                spec_template.p,
                spec_template.dims,
            )?;
            let mut stress_sum = 0.0;
            let mut proc_sum = 0.0;
            let mut ok = 0usize;
            let mut failures = 0usize;
            for rep in 0..reps {
                let rep_cfg = SimConfig {
                    seed: cfg.seed.wrapping_add(rep as u64),
                    ..cfg.clone()
                };
                let truth = simulate_paths(&rep_cfg)?;
                let measured = measure_distances(
                    &truth,
                    noise,
                    cfg.seed.wrapping_add(10_000 + rep as u64),
                )?;
                let outcome = fit(&measured, &spec, settings, None).and_then(|res| {
                    let mut dist = 0.0;
                    for (fitted, true_map) in res.coords.maps().iter().zip(truth.maps()) {
                        dist += procrustes_distance(fitted, true_map)?;
                    }
                    Ok((res.cost_static_avg, dist / truth.n_periods() as f64))
                });
                match outcome {
                    Ok((stress, proc)) => {
                        stress_sum += stress;
                        proc_sum += proc;
                        ok += 1;
                    }
                    Err(_) => failures += 1,
                }
            }
            let denom = ok.max(1) as f64;
            rows.push(RecoveryRow {
                noise,
                alpha,
                stress: if ok > 0 { stress_sum / denom } else { f64::NAN },
                procrustes: if ok > 0 { proc_sum / denom } else { f64::NAN },
                failures,
            });
        }
    }
    Ok(rows)
}

/// One timed cell of the runtime benchmark.
#[derive(Debug, Clone)]
pub struct BenchRow {
    /// Number of objects.
    pub n: usize,
    /// Number of periods.
    pub t: usize,
    /// Wall-clock seconds for the cell's fit(s).
    pub seconds: f64,
}

/// Times (a) one joint fit and (b) T independent per-period static fits on
/// simulated data for every (n, t) cell, each run for exactly `iterations`
/// gradient steps (convergence checks are disabled so budgets match).
/// Returns the joint-fit table and the independent-fit table. Cells run
/// one at a time so timings do not contaminate each other.
pub fn runtime_benchmark(
    n_list: &[usize],
    t_list: &[usize],
    iterations: usize,
) -> Result<(Vec<BenchRow>, Vec<BenchRow>)> {
    if n_list.is_empty() || t_list.is_empty() {
        return Err(Error::Config(
            "benchmark needs at least one n and one t".into(),
        ));
    }
    if iterations == 0 {
        return Err(Error::Config("iterations must be >= 1".into()));
    }

    // Fixed budget: tol 0 disables the gradient stop and a check interval
    // beyond the budget disables the stagnation stop, so every fit runs
    // the full iteration count.
    let settings = OptimizerSettings {
        n_iter: iterations,
        tol: 0.0,
        n_iter_check: iterations + 1,
        ..OptimizerSettings::default()
    };

    let mut joint = Vec::new();
    let mut independent = Vec::new();
    for &n in n_list {
        for &t in t_list {
            let cfg = SimConfig {
                n,
                t,
                seed: 7,
                ..SimConfig::default()
            };
            let truth = simulate_paths(&cfg)?;
            let measured = measure_distances(&truth, 0.0, 17)?;

            let joint_spec = FitSpec::new(crate::methods::Method::Mds { mds_type: crate::methods::MdsType::Ratio }, 0.3, 1, 2)?;
            let start = Instant::now();
            fit(&measured, &joint_spec, &settings, None)?;
            joint.push(BenchRow {
                n,
                t,
                seconds: start.elapsed().as_secs_f64(),
            });

            let static_spec = FitSpec::new(joint_spec.method.clone(), 0.0, 1, 2)?;
            let start = Instant::now();
            for period in 0..t {
                let single = DissimilaritySequence::from_matrices(vec![
                    measured.matrices()[period].clone()
                ])?;
                fit(&single, &static_spec, &settings, None)?;
            }
            independent.push(BenchRow {
                n,
                t,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok((joint, independent))
}

/// Fictional firm labels for the bundled stand-in panel.
const FIRM_NAMES: [&str; 9] = [
    "Acmetech",
    "BitHarbor",
    "CloudNimbus",
    "DataSpire",
    "EchoGrid",
    "FluxWare",
    "GigaMint",
    "HelioByte",
    "IonForge",
];

/// Generates the bundled synthetic "tech firms" panel: 9 labeled firms in
/// 3 loose clusters drifting smoothly over 20 yearly periods, measured
/// with a small amount of position noise. The firms live in a
/// three-dimensional attribute space, so two-dimensional maps of the
/// panel carry irreducible stress, as with real dissimilarity data.
/// Returns the dissimilarity sequence and the ground-truth configuration
/// it was measured from.
pub fn tech_firms_standin(seed: u64) -> Result<(DissimilaritySequence, ConfigurationSequence)> {
    let n = FIRM_NAMES.len();
    let t = 20;
    let dims = 3;
    let centers = [
        [-2.0, 0.0, 0.9],
        [2.0, 1.5, -0.7],
        [0.5, -2.2, 0.4],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Initial positions: cluster center plus a small offset.
    let mut x = DMatrix::zeros(n, dims);
    for i in 0..n {
        for c in 0..dims {
            let o: f64 = StandardNormal.sample(&mut rng);
            x[(i, c)] = centers[i / 3][c] + 0.45 * o;
        }
    }

    // Smooth momentum-walk drift. The step size keeps year-over-year
    // movement comfortably above the positional jitter that separate
    // per-period fits exhibit, so alignment quality is visible in the
    // motion metrics rather than buried in fit noise.
    let momentum = 0.7;
    let noise = 0.2;
    let mut dx = DMatrix::zeros(n, dims);
    for i in 0..n {
        for c in 0..dims {
            let v: f64 = StandardNormal.sample(&mut rng);
            dx[(i, c)] = noise * v;
        }
    }
    let mut maps = Vec::with_capacity(t);
    maps.push(x.clone());
    for _ in 1..t {
        for i in 0..n {
            for c in 0..dims {
                let v: f64 = StandardNormal.sample(&mut rng);
                dx[(i, c)] = momentum * dx[(i, c)] + (1.0 - momentum) * noise * v;
            }
        }
        x += &dx;
        maps.push(x.clone());
    }
    let truth = ConfigurationSequence::new(maps)?;

    let measured = measure_distances(&truth, 0.02, seed.wrapping_add(1))?;
    let labels: Vec<String> = FIRM_NAMES.iter().map(|s| s.to_string()).collect();
    let periods: Vec<String> = (2001..2001 + t as i32).map(|y| y.to_string()).collect();
    let d = DissimilaritySequence::new(measured.matrices().to_vec(), labels, periods)?;
    Ok((d, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::temporal_gradient;
    use crate::metrics::{persistence_score, PersistenceMode};
    use crate::weights::ObjectWeights;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_noise_paths_are_constant() {
        let cfg = SimConfig {
            noise: 0.0,
            ..SimConfig::default()
        };
        let x = simulate_paths(&cfg).unwrap();
        for t in 1..x.n_periods() {
            assert_eq!(x.maps()[t], x.maps()[0]);
        }
    }

    #[test]
    fn default_config_produces_ten_maps_of_six_by_two() {
        let x = simulate_paths(&SimConfig::default()).unwrap();
        assert_eq!(x.n_periods(), 10);
        assert_eq!(x.n_objects(), 6);
        assert_eq!(x.dims(), 2);
    }

    #[test]
    fn paths_are_bit_reproducible_per_seed() {
        let cfg = SimConfig {
            seed: 99,
            ..SimConfig::default()
        };
        let a = simulate_paths(&cfg).unwrap();
        let b = simulate_paths(&cfg).unwrap();
        for (ma, mb) in a.maps().iter().zip(b.maps()) {
            assert_eq!(ma, mb);
        }
        let c = simulate_paths(&SimConfig {
            seed: 100,
            ..cfg
        })
        .unwrap();
        assert_ne!(a.maps()[0], c.maps()[0]);
    }

    #[test]
    fn zero_momentum_steps_are_uncorrelated() {
        // With no velocity carry-over the walk's consecutive increments are
        // independent, so their pooled correlation (persistence) is near 0
        // over ~10^4 sampled pairs.
        let cfg = SimConfig {
            n: 50,
            t: 102,
            momentum: 0.0,
            ..SimConfig::default()
        };
        let x = simulate_paths(&cfg).unwrap();
        let rho = persistence_score(&x, None, PersistenceMode::Pooled).unwrap();
        assert!(rho.abs() < 0.1, "lag-1 increment correlation {rho}");

        let smooth = simulate_paths(&SimConfig {
            momentum: 0.6,
            ..cfg
        })
        .unwrap();
        let rho_smooth = persistence_score(&smooth, None, PersistenceMode::Pooled).unwrap();
        assert!(rho_smooth > 0.3, "momentum walk should persist, got {rho_smooth}");
    }

    #[test]
    fn noiseless_measurement_returns_exact_euclidean_distances() {
        let x = simulate_paths(&SimConfig::default()).unwrap();
        let d = measure_distances(&x, 0.0, 5).unwrap();
        for (map, m) in x.maps().iter().zip(d.matrices()) {
            for i in 0..x.n_objects() {
                for j in 0..x.n_objects() {
                    assert_abs_diff_eq!(
                        m[(i, j)],
                        (map.row(i) - map.row(j)).norm(),
                        epsilon = 1e-15
                    );
                }
            }
        }
        // The triangle inequality holds for true Euclidean distances.
        let m = &d.matrices()[0];
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    assert!(m[(i, j)] <= m[(i, k)] + m[(k, j)] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn noisy_measurement_still_builds_a_valid_sequence() {
        let x = simulate_paths(&SimConfig::default()).unwrap();
        let d = measure_distances(&x, 0.5, 5).unwrap();
        assert_eq!(d.n_periods(), 10);
        let again = measure_distances(&x, 0.5, 5).unwrap();
        assert_eq!(d.matrices()[3], again.matrices()[3]);
    }

    #[test]
    fn recovery_study_produces_one_row_per_cell() {
        let cfg = SimConfig {
            n: 5,
            t: 4,
            seed: 3,
            ..SimConfig::default()
        };
        let spec = FitSpec::new(
            crate::methods::Method::Mds {
                mds_type: crate::methods::MdsType::Ratio,
            },
            0.2,
            1,
            2,
        )
        .unwrap();
        let settings = OptimizerSettings {
            n_iter: 60,
            ..OptimizerSettings::default()
        };
        let rows = recovery_study(&[0.0, 0.1], &[0.0, 0.2], 2, &spec, &settings, &cfg).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert_eq!(row.failures, 0);
            assert!(row.stress.is_finite());
            assert!((0.0..=1.0).contains(&row.procrustes));
        }
    }

    #[test]
    fn benchmark_times_every_cell() {
        let (joint, indep) = runtime_benchmark(&[5], &[3], 10).unwrap();
        assert_eq!(joint.len(), 1);
        assert_eq!(indep.len(), 1);
        assert!(joint[0].seconds > 0.0);
        assert!(indep[0].seconds > 0.0);
    }

    #[test]
    fn temporal_gradient_cost_scales_roughly_linearly_in_n() {
        // Doubling n at fixed T must not quadruple the temporal gradient
        // time; the bound here is deliberately loose so scheduler noise
        // cannot trip it.
        fn best_time(n: usize) -> f64 {
            let maps: Vec<DMatrix<f64>> = (0..10)
                .map(|t| DMatrix::from_fn(n, 2, |i, c| ((i * 2 + c) as f64).sin() + t as f64))
                .collect();
            let x = ConfigurationSequence::new(maps).unwrap();
            let w = ObjectWeights::uniform(n);
            (0..5)
                .map(|_| {
                    let start = Instant::now();
                    let g = temporal_gradient(&x, 2, &w, None).unwrap();
                    std::hint::black_box(&g);
                    start.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min)
        }
        let small = best_time(400);
        let large = best_time(800);
        assert!(
            large < 8.0 * small.max(1e-7),
            "doubling n scaled temporal gradient time from {small}s to {large}s"
        );
    }

    #[test]
    fn standin_panel_has_the_documented_shape() {
        let (d, truth) = tech_firms_standin(42).unwrap();
        assert_eq!(d.n_objects(), 9);
        assert_eq!(d.n_periods(), 20);
        assert_eq!(d.labels()[0], "Acmetech");
        assert_eq!(d.periods()[0], "2001");
        assert_eq!(d.periods()[19], "2020");
        assert_eq!(truth.n_periods(), 20);
        // Smooth truth: the panel should show strong persistence.
        let rho = persistence_score(&truth, None, PersistenceMode::Pooled).unwrap();
        assert!(rho > 0.3, "stand-in truth persistence {rho}");
        let (d2, _) = tech_firms_standin(42).unwrap();
        assert_eq!(d.matrices()[7], d2.matrices()[7]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(SimConfig {
            n: 1,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            momentum: 1.0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            noise: -0.1,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
    }
}
