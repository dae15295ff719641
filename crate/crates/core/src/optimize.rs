//! Joint optimization of configuration sequences.
//!
//! MDS and Sammon fits run gradient descent with a backtracking-by-halving
//! line search; t-SNE runs gradient descent with momentum and
//! per-parameter gains. Both share the stopping rules: vanishing RMS
//! gradient, stagnating cost, or the iteration budget.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{FitSpec, OptimizerSettings};
use crate::cost::JointProblem;
use crate::error::{Error, Result};
use crate::methods::{Method, OptimizerKind};
use crate::seq::{ConfigurationSequence, DissimilaritySequence, InclusionMask};

/// Cost decreases smaller than this across a check interval stop the run.
const STAGNATION_TOL: f64 = 1e-10;

/// Scale of the random standard-normal starting coordinates. Unit scale
/// matters for the MDS flavors: their disparities are refit to the maps,
/// so the optimizer keeps whatever scale it starts at, and the temporal
/// penalty (which is quadratic in coordinates) only has its intended
/// strength when the maps live at roughly the scale of the data.
const INIT_SCALE: f64 = 1.0;

/// t-SNE's learning rate is the step size times this factor.
const TSNE_LR_FACTOR: f64 = 200.0;

/// Multiplier applied to a gain when the gradient keeps its direction.
const GAIN_UP: f64 = 1.2;

/// Multiplier applied to a gain when the gradient flips direction.
const GAIN_DOWN: f64 = 0.8;

/// Lower bound on per-parameter gains.
const GAIN_FLOOR: f64 = 0.01;

/// One sampled point of the optimization trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Iteration at which the sample was taken.
    pub iteration: usize,
    /// Total cost after that iteration's update.
    pub cost: f64,
    /// RMS gradient entry at the start of that iteration.
    pub grad_norm: f64,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// RMS gradient fell to or below `tol`.
    GradientVanished,
    /// Cost decreased by less than 1e-10 across a check interval.
    CostStagnated,
    /// The iteration budget ran out.
    MaxIterations,
}

impl StopReason {
    fn describe(&self) -> &'static str {
        match self {
            StopReason::GradientVanished => "gradient norm vanished",
            StopReason::CostStagnated => "cost decrease below threshold",
            StopReason::MaxIterations => "maximum iterations reached",
        }
    }
}

/// Outcome of a fit: the selected configuration sequence and its
/// diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Fitted coordinates, one n×d matrix per period.
    pub coords: ConfigurationSequence,
    /// Final value of the joint cost.
    pub cost_total_final: f64,
    /// Mean per-period static cost at the final coordinates.
    pub cost_static_avg: f64,
    /// Whether the RMS gradient was at or below `tol` at exit.
    pub converged: bool,
    /// Iterations consumed by the selected run.
    pub iterations_used: usize,
    /// Which restart produced the selected result (0-based; 0 when a
    /// fixed init was supplied).
    pub init_index_selected: usize,
    /// Why the selected run stopped.
    pub stop_reason: StopReason,
    /// Cost and gradient-norm samples of the selected run, one per
    /// completed check interval.
    pub trace: Vec<TracePoint>,
}

struct SingleRun {
    maps: Vec<DMatrix<f64>>,
    cost: f64,
    final_grad_rms: f64,
    iterations: usize,
    stop_reason: StopReason,
    trace: Vec<TracePoint>,
}

fn rms(grad: &[DMatrix<f64>]) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for g in grad {
        acc += g.iter().map(|v| v * v).sum::<f64>();
        count += g.len();
    }
    (acc / count as f64).sqrt()
}

fn format_banner(label: &str, kind: OptimizerKind) -> String {
    let name = match kind {
        OptimizerKind::BacktrackingHalving => "Gradient Descent with Backtracking via Halving",
        OptimizerKind::Momentum => "Gradient Descent with Momentum",
    };
    format!("[{label}] Running {name}")
}

fn format_check(label: &str, point: &TracePoint) -> String {
    format!(
        "[{label}] Iteration {} -- Cost: {:.2} -- Gradient Norm: {:.4}",
        point.iteration, point.cost, point.grad_norm
    )
}

fn format_terminal(label: &str, iteration: usize, reason: StopReason, cost: f64) -> String {
    format!(
        "[{label}] Iteration {iteration}: {}. Final cost: {cost:.2}",
        reason.describe()
    )
}

/// Renders the diagnostic lines for a completed fit at the given
/// verbosity: nothing at 0; the optimizer banner plus the terminal line
/// at 1; additionally one line per sampled trace point at 2. The lines
/// re-create the transcript of the selected run (restart banners printed
/// live during multi-start fits are not part of the canonical transcript).
pub fn describe_progress(method: &Method, result: &FitResult, verbose: u8) -> Vec<String> {
    let mut lines = Vec::new();
    if verbose == 0 {
        return lines;
    }
    let label = method.label();
    lines.push(format_banner(label, method.optimizer_kind()));
    if verbose >= 2 {
        for point in &result.trace {
            lines.push(format_check(label, point));
        }
    }
    lines.push(format_terminal(
        label,
        result.iterations_used,
        result.stop_reason,
        result.cost_total_final,
    ));
    lines
}

fn emit(line: String) {
    eprintln!("{line}");
}

// One random configuration is drawn per restart and replicated across all
// periods. Identical starts keep the per-period subproblems synchronized,
// so the single line-search step suits every period at once; independent
// draws per period let converged periods veto the step sizes that
// still-unsolved periods need, and joint fits then stall far from the
// optimum. A shared start also makes the temporal cost zero at iteration 0.
fn random_init(
    n_periods: usize,
    n_objects: usize,
    dims: usize,
    seed: u64,
) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n_objects, dims);
    for i in 0..n_objects {
        for k in 0..dims {
            let v: f64 = StandardNormal.sample(&mut rng);
            m[(i, k)] = v * INIT_SCALE;
        }
    }
    vec![m; n_periods]
}

/// Fits a configuration sequence to `d` under `spec`, starting from
/// `settings.init` when given, otherwise from `settings.n_inits` seeded
/// random starts (restart r uses seed + r). The lowest final cost wins;
/// ties go to the lowest restart index.
pub fn fit(
    d: &DissimilaritySequence,
    spec: &FitSpec,
    settings: &OptimizerSettings,
    mask: Option<&InclusionMask>,
) -> Result<FitResult> {
    settings.validate()?;
    let problem = JointProblem::new(d, spec, mask)?;
    let n = d.n_objects();
    let t_count = d.n_periods();

    if let Some(init) = &settings.init {
        if init.n_periods() != t_count || init.n_objects() != n || init.dims() != spec.dims {
            return Err(Error::Config(format!(
                "init shape is T={} n={} d={}, expected T={t_count} n={n} d={}",
                init.n_periods(),
                init.n_objects(),
                init.dims(),
                spec.dims
            )));
        }
    }

    let label = spec.method.label();
    let kind = spec.method.optimizer_kind();
    if settings.verbose >= 1 {
        emit(format_banner(label, kind));
    }

    let n_runs = if settings.init.is_some() {
        1
    } else {
        settings.n_inits
    };
    let mut best: Option<(usize, SingleRun)> = None;
    for r in 0..n_runs {
        let start = match &settings.init {
            Some(init) => init.maps().to_vec(),
            None => random_init(t_count, n, spec.dims, settings.seed.wrapping_add(r as u64)),
        };
        if settings.verbose >= 2 && n_runs > 1 {
            emit(format!("[{label}] Start {}/{n_runs}", r + 1));
        }
        let run = match kind {
            OptimizerKind::BacktrackingHalving => {
                run_backtracking(&problem, start, settings, label)?
            }
            OptimizerKind::Momentum => run_momentum(&problem, start, settings, label)?,
        };
        let better = match &best {
            None => true,
            Some((_, b)) => run.cost < b.cost,
        };
        if better {
            best = Some((r, run));
        }
    }
    let (init_index, run) = best.expect("n_inits >= 1 guarantees at least one run");

    if settings.verbose >= 1 {
        emit(format_terminal(
            label,
            run.iterations,
            run.stop_reason,
            run.cost,
        ));
    }

    let static_costs = problem.static_costs_raw(&run.maps)?;
    let cost_static_avg = static_costs.iter().sum::<f64>() / static_costs.len() as f64;
    Ok(FitResult {
        coords: ConfigurationSequence::new(run.maps)?,
        cost_total_final: run.cost,
        cost_static_avg,
        converged: run.final_grad_rms <= settings.tol,
        iterations_used: run.iterations,
        init_index_selected: init_index,
        stop_reason: run.stop_reason,
        trace: run.trace,
    })
}

fn run_backtracking(
    problem: &JointProblem,
    mut x: Vec<DMatrix<f64>>,
    settings: &OptimizerSettings,
    label: &str,
) -> Result<SingleRun> {
    // Alternating scheme: each iteration refreshes the inner
    // transformations (MDS disparities) at the current iterate, then takes
    // one descent step on the cost with those transformations frozen. The
    // line search also accepts against the frozen cost; at the refresh
    // point the frozen cost equals the refit cost, and refitting only
    // lowers it, so the true cost still decreases monotonically.
    let mut states = problem.freeze_raw(&x)?;
    let mut cost = problem.total_cost_frozen_raw(&x, &states)?;
    if !cost.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let mut candidate = x.clone();
    let mut trace = Vec::new();
    let mut last_check_cost = cost;
    let final_rms;

    let mut iteration = 0usize;
    let stop_reason = loop {
        iteration += 1;
        if iteration > settings.n_iter {
            iteration = settings.n_iter;
            final_rms = rms(&problem.total_gradient_frozen_raw(&x, &states)?);
            break StopReason::MaxIterations;
        }
        let grad = problem.total_gradient_frozen_raw(&x, &states)?;
        let grad_rms = rms(&grad);
        if grad_rms <= settings.tol {
            final_rms = grad_rms;
            break StopReason::GradientVanished;
        }

        let mut step = settings.step_size;
        let mut accepted = false;
        for _ in 0..=settings.max_halvings {
            for (c, (xt, gt)) in candidate.iter_mut().zip(x.iter().zip(&grad)) {
                for idx in 0..c.len() {
                    c[idx] = xt[idx] - step * gt[idx];
                }
            }
            let cand_cost = problem.total_cost_frozen_raw(&candidate, &states)?;
            if !cand_cost.is_finite() {
                return Err(Error::Divergence { iteration });
            }
            if cand_cost < cost {
                std::mem::swap(&mut x, &mut candidate);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if accepted {
            states = problem.freeze_raw(&x)?;
            cost = problem.total_cost_frozen_raw(&x, &states)?;
        }
        // A failed search leaves x (and its frozen state) in place; the
        // stagnation check below ends the run at the next check interval.

        if iteration % settings.n_iter_check == 0 {
            let point = TracePoint {
                iteration,
                cost,
                grad_norm: grad_rms,
            };
            if settings.verbose >= 2 {
                emit(format_check(label, &point));
            }
            trace.push(point);
            if last_check_cost - cost < STAGNATION_TOL {
                final_rms = rms(&problem.total_gradient_frozen_raw(&x, &states)?);
                break StopReason::CostStagnated;
            }
            last_check_cost = cost;
        }
    };

    Ok(SingleRun {
        maps: x,
        cost,
        final_grad_rms: final_rms,
        iterations: iteration,
        stop_reason,
        trace,
    })
}

fn run_momentum(
    problem: &JointProblem,
    mut x: Vec<DMatrix<f64>>,
    settings: &OptimizerSettings,
    label: &str,
) -> Result<SingleRun> {
    let mut cost = problem.total_cost_raw(&x)?;
    if !cost.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    let lr = settings.step_size * TSNE_LR_FACTOR;
    let shape: Vec<(usize, usize)> = x.iter().map(|m| (m.nrows(), m.ncols())).collect();
    let mut velocity: Vec<DMatrix<f64>> =
        shape.iter().map(|&(r, c)| DMatrix::zeros(r, c)).collect();
    let mut gains: Vec<DMatrix<f64>> = shape
        .iter()
        .map(|&(r, c)| DMatrix::from_element(r, c, 1.0))
        .collect();
    let mut trace = Vec::new();
    let mut last_check_cost = cost;
    let final_rms;

    let mut iteration = 0usize;
    let stop_reason = loop {
        iteration += 1;
        if iteration > settings.n_iter {
            iteration = settings.n_iter;
            final_rms = rms(&problem.total_gradient_raw(&x)?);
            break StopReason::MaxIterations;
        }
        let grad = problem.total_gradient_raw(&x)?;
        let grad_rms = rms(&grad);
        if grad_rms <= settings.tol {
            final_rms = grad_rms;
            break StopReason::GradientVanished;
        }

        for t in 0..x.len() {
            let g = &grad[t];
            let v = &mut velocity[t];
            let gain = &mut gains[t];
            let xt = &mut x[t];
            for idx in 0..g.len() {
                let ge = g[idx];
                let ve = v[idx];
                // The point is moving along -gradient when descending, so a
                // gradient that opposes the velocity confirms the direction.
                if ge * ve < 0.0 {
                    gain[idx] *= GAIN_UP;
                } else if ge * ve > 0.0 {
                    gain[idx] = (gain[idx] * GAIN_DOWN).max(GAIN_FLOOR);
                }
                let newv = settings.momentum * ve - lr * gain[idx] * ge;
                v[idx] = newv;
                xt[idx] += newv;
            }
        }
        cost = problem.total_cost_raw(&x)?;
        // A cost that skips vanishing-probability terms can stay finite
        // while the coordinates themselves overflow, so check both.
        if !cost.is_finite() || x.iter().any(|m| m.iter().any(|v| !v.is_finite())) {
            return Err(Error::Divergence { iteration });
        }

        if iteration % settings.n_iter_check == 0 {
            let point = TracePoint {
                iteration,
                cost,
                grad_norm: grad_rms,
            };
            if settings.verbose >= 2 {
                emit(format_check(label, &point));
            }
            trace.push(point);
            if last_check_cost - cost < STAGNATION_TOL {
                final_rms = rms(&problem.total_gradient_raw(&x)?);
                break StopReason::CostStagnated;
            }
            last_check_cost = cost;
        }
    };

    Ok(SingleRun {
        maps: x,
        cost,
        final_grad_rms: final_rms,
        iterations: iteration,
        stop_reason,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{map_distances, MdsType};

    fn equilateral_delta() -> DissimilaritySequence {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        DissimilaritySequence::from_matrices(vec![m]).unwrap()
    }

    fn ratio_spec(alpha: f64, p: usize) -> FitSpec {
        FitSpec::new(
            Method::Mds {
                mds_type: MdsType::Ratio,
            },
            alpha,
            p,
            2,
        )
        .unwrap()
    }

    #[test]
    fn all_equal_dissimilarities_give_equilateral_triangle() {
        let d = equilateral_delta();
        let settings = OptimizerSettings {
            seed: 7,
            n_inits: 3,
            ..OptimizerSettings::default()
        };
        let res = fit(&d, &ratio_spec(0.0, 1), &settings, None).unwrap();
        let dist = map_distances(&res.coords.maps()[0]);
        let sides = [dist[(0, 1)], dist[(0, 2)], dist[(1, 2)]];
        for a in &sides {
            for b in &sides {
                assert!((a - b).abs() < 1e-3, "sides {sides:?}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let d = equilateral_delta();
        let settings = OptimizerSettings {
            seed: 3,
            n_inits: 2,
            ..OptimizerSettings::default()
        };
        let a = fit(&d, &ratio_spec(0.0, 1), &settings, None).unwrap();
        let b = fit(&d, &ratio_spec(0.0, 1), &settings, None).unwrap();
        assert_eq!(a.coords.maps(), b.coords.maps());
        assert_eq!(a.cost_total_final.to_bits(), b.cost_total_final.to_bits());
        assert_eq!(a.iterations_used, b.iterations_used);
    }

    #[test]
    fn trace_costs_never_increase_under_backtracking() {
        let m1 = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 2.0, 1.4, 1.0, 0.0, 1.1, 0.9, 2.0, 1.1, 0.0, 1.7, 1.4, 0.9, 1.7, 0.0,
            ],
        );
        let m2 = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.2, 1.8, 1.5, 1.2, 0.0, 1.0, 1.1, 1.8, 1.0, 0.0, 1.6, 1.5, 1.1, 1.6, 0.0,
            ],
        );
        let d = DissimilaritySequence::from_matrices(vec![m1, m2]).unwrap();
        let settings = OptimizerSettings {
            seed: 11,
            n_iter_check: 10,
            ..OptimizerSettings::default()
        };
        let res = fit(&d, &ratio_spec(0.3, 1), &settings, None).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1].cost <= w[0].cost + 1e-15);
        }
    }

    #[test]
    fn multistart_selects_no_worse_than_single_runs() {
        let d = equilateral_delta();
        let spec = ratio_spec(0.0, 1);
        let multi = fit(
            &d,
            &spec,
            &OptimizerSettings {
                seed: 40,
                n_inits: 4,
                ..OptimizerSettings::default()
            },
            None,
        )
        .unwrap();
        for r in 0..4 {
            let single = fit(
                &d,
                &spec,
                &OptimizerSettings {
                    seed: 40 + r,
                    n_inits: 1,
                    ..OptimizerSettings::default()
                },
                None,
            )
            .unwrap();
            assert!(multi.cost_total_final <= single.cost_total_final + 1e-15);
        }
    }

    #[test]
    fn fixed_init_is_used_verbatim_for_a_single_run() {
        let d = equilateral_delta();
        let init = ConfigurationSequence::new(vec![DMatrix::from_row_slice(
            3,
            2,
            &[0.0, 0.0, 1.0, 0.0, 0.5, 0.9],
        )])
        .unwrap();
        let settings = OptimizerSettings {
            init: Some(init),
            n_inits: 5,
            ..OptimizerSettings::default()
        };
        let res = fit(&d, &ratio_spec(0.0, 1), &settings, None).unwrap();
        assert_eq!(res.init_index_selected, 0);
        // The near-equilateral start is a few line-search steps from the
        // exact fit.
        assert!(res.cost_total_final < 1e-4, "{}", res.cost_total_final);
    }

    #[test]
    fn init_shape_mismatch_is_a_config_error() {
        let d = equilateral_delta();
        let init =
            ConfigurationSequence::new(vec![DMatrix::zeros(4, 2), DMatrix::zeros(4, 2)]).unwrap();
        let settings = OptimizerSettings {
            init: Some(init),
            ..OptimizerSettings::default()
        };
        assert!(matches!(
            fit(&d, &ratio_spec(0.0, 1), &settings, None).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn progress_lines_match_verbosity() {
        let d = equilateral_delta();
        let settings = OptimizerSettings {
            seed: 1,
            ..OptimizerSettings::default()
        };
        let spec = ratio_spec(0.0, 1);
        let res = fit(&d, &spec, &settings, None).unwrap();
        assert!(describe_progress(&spec.method, &res, 0).is_empty());
        let v1 = describe_progress(&spec.method, &res, 1);
        assert_eq!(v1.len(), 2);
        assert!(v1[0].contains("Running Gradient Descent with Backtracking via Halving"));
        assert!(v1[1].contains("Final cost:"));
        let v2 = describe_progress(&spec.method, &res, 2);
        assert_eq!(v2.len(), 2 + res.trace.len());
        for (line, point) in v2[1..v2.len() - 1].iter().zip(&res.trace) {
            assert!(line.contains(&format!("Iteration {} -- Cost:", point.iteration)));
            assert!(line.contains("Gradient Norm:"));
        }
    }

    #[test]
    fn tsne_path_runs_and_reports() {
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.6, 1.4, 1.0, 0.6, 0.0, 0.8, 1.2, 1.4, 0.8, 0.0, 0.5, 1.0, 1.2, 0.5, 0.0,
            ],
        );
        let d = DissimilaritySequence::from_matrices(vec![m.clone(), m]).unwrap();
        let spec = FitSpec::new(Method::Tsne { perplexity: 2.0 }, 0.1, 1, 2).unwrap();
        let settings = OptimizerSettings {
            seed: 5,
            n_iter: 300,
            tol: 0.0,
            n_iter_check: 301,
            ..OptimizerSettings::default()
        };
        let res = fit(&d, &spec, &settings, None).unwrap();
        assert_eq!(res.iterations_used, 300);
        assert_eq!(res.stop_reason, StopReason::MaxIterations);
        assert!(res.cost_total_final.is_finite());
    }
}
