//! Implementations of the subcommands: each takes its parsed arguments,
//! orchestrates library calls and file I/O, and returns a classified
//! error on failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use dynamap_core::metrics::{self, MisalignAggregate, PersistenceMode};
use dynamap_core::preprocess::{
    edgelist_to_matrices, expand_matrices, matrices_to_edgelist, normalize_diss, sim_to_diss,
    DissNormalization, SimToDiss,
};
use dynamap_core::sim::{
    measure_distances, recovery_study, runtime_benchmark, simulate_paths, tech_firms_standin,
    SimConfig,
};
use dynamap_core::tune::{
    bayesian_search, grid_search, BayesConfig, EvalMetric, ParamRange, SearchSpace, TuneResult,
};
use dynamap_core::{
    align_maps, describe_progress, fit, AlignMode, ConfigurationSequence, DissimilaritySequence,
    Error, FitSpec, InclusionMask, JointProblem, MdsType, Method, OptimizerSettings,
    SimilaritySequence, StopReason,
};

use crate::cli::{
    AlignArgs, BenchArgs, ConvertArgs, EvalArgs, ExampleArgs, FitArgs, MethodOpts, OptimOpts,
    PlotArgs, SimulateArgs, TuneArgs,
};
use crate::errors::{CliError, Result};
use crate::io::{
    read_aesthetic_csv, read_coords_csv, read_edgelist_csv, read_mask_csv, read_matrix_csv,
    write_coords_csv, write_labels_csv, write_mask_csv, write_matrix_csv, CoordsFile, RunManifest,
};
use crate::svg::{render_svg, PlotOptions};

impl MethodOpts {
    /// Builds the validated fit spec these flags describe.
    pub fn to_spec(&self) -> Result<FitSpec> {
        let method = match self.method.as_str() {
            "mds" => Method::Mds {
                mds_type: self.mds_type.parse::<MdsType>()?,
            },
            "sammon" => Method::Sammon,
            "tsne" => Method::Tsne {
                perplexity: self.perplexity,
            },
            other => {
                return Err(CliError::Core(Error::Config(format!(
                    "unknown method {other:?}, expected mds, sammon, or tsne"
                ))))
            }
        };
        FitSpec::new(method, self.alpha, self.p, self.dims).map_err(CliError::Core)
    }
}

impl OptimOpts {
    /// Builds optimizer settings, resolving an `--init` file when given.
    pub fn to_settings(&self, d: &DissimilaritySequence) -> Result<OptimizerSettings> {
        let init = match &self.init {
            None => None,
            Some(path) => {
                let file = read_coords_csv(path)?;
                Some(conform_coords(file, d.labels(), d.periods())?)
            }
        };
        Ok(OptimizerSettings {
            n_iter: self.n_iter,
            tol: self.tol,
            step_size: self.step_size,
            n_inits: self.n_inits,
            init,
            n_iter_check: self.n_iter_check,
            verbose: self.verbose,
            seed: self.seed,
            ..OptimizerSettings::default()
        })
    }
}

/// Reconciles a coordinates file with an expected roster: periods must
/// match exactly, labels as a set; rows are permuted into roster order.
fn conform_coords(
    file: CoordsFile,
    labels: &[String],
    periods: &[String],
) -> Result<ConfigurationSequence> {
    if file.periods != periods {
        return Err(CliError::Core(Error::Data(format!(
            "period mismatch: coordinates list [{}], expected [{}]",
            file.periods.join(", "),
            periods.join(", ")
        ))));
    }
    if file.labels.len() != labels.len() {
        return Err(CliError::Core(Error::Data(format!(
            "label mismatch: coordinates list {} labels, expected {}",
            file.labels.len(),
            labels.len()
        ))));
    }
    let position: HashMap<&str, usize> = file
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let order: Vec<usize> = labels
        .iter()
        .map(|l| {
            position.get(l.as_str()).copied().ok_or_else(|| {
                CliError::Core(Error::Data(format!(
                    "label mismatch: coordinates have no label {l:?}"
                )))
            })
        })
        .collect::<Result<_>>()?;
    let maps = file
        .coords
        .maps()
        .iter()
        .map(|m| {
            DMatrix::from_fn(labels.len(), m.ncols(), |i, k| m[(order[i], k)])
        })
        .collect();
    ConfigurationSequence::new(maps).map_err(CliError::Core)
}

/// Picks a hit-rate k that is feasible in every period: the usual
/// min(5, m-1) with m the smallest included roster, pulled one lower when
/// the chance-adjusted rate must stay defined.
fn feasible_default_k(
    d: &DissimilaritySequence,
    mask: Option<&InclusionMask>,
    need_adjusted: bool,
) -> usize {
    let min_n = (0..d.n_periods())
        .map(|t| mask.map_or(d.n_objects(), |m| m.included_in(t).len()))
        .min()
        .unwrap_or(d.n_objects());
    let k = metrics::default_k(min_n);
    if need_adjusted {
        k.min(min_n.saturating_sub(2)).max(1)
    } else {
        k
    }
}

fn read_optional_mask(
    path: &Option<PathBuf>,
    periods: &[String],
    labels: &[String],
) -> Result<Option<InclusionMask>> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(read_mask_csv(p, periods, labels)?)),
    }
}

/// Derives a sibling output path by suffixing the file stem.
fn sibling(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("bad {what} value {tok:?}")))
        })
        .collect()
}

fn parse_usize_list(raw: &str, what: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Parse(format!("bad {what} value {tok:?}")))
        })
        .collect()
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let edges = read_edgelist_csv(
        &args.input,
        &args.period_col,
        &args.id_a_col,
        &args.id_b_col,
        &args.score_col,
    )?;
    let pm = edgelist_to_matrices(&edges)?;

    let (matrices, labels, mask) = if args.unbalanced {
        expand_matrices(&pm)?
    } else {
        for (t, roster) in pm.labels.iter().enumerate() {
            if roster != &pm.labels[0] {
                return Err(CliError::Core(Error::Data(format!(
                    "period {} covers a different object roster than period {}; pass --unbalanced for panels with entry and exit",
                    pm.periods[t], pm.periods[0]
                ))));
            }
        }
        let n = pm.labels[0].len();
        (
            pm.matrices.clone(),
            pm.labels[0].clone(),
            InclusionMask::all_included(pm.periods.len(), n),
        )
    };

    let d = match &args.transform {
        Some(raw) => {
            let transformation = raw.parse::<SimToDiss>()?;
            let s = SimilaritySequence::new(matrices, labels.clone(), pm.periods.clone())?;
            sim_to_diss(&s, transformation)?
        }
        None => DissimilaritySequence::new(matrices, labels.clone(), pm.periods.clone())?,
    };
    let d = match &args.normalize {
        Some(raw) => {
            let mode = match raw.as_str() {
                "max1" => DissNormalization::Max1,
                "zscore_offdiag" => DissNormalization::ZscoreOffdiag,
                other => {
                    return Err(CliError::Parse(format!(
                        "unknown normalization {other:?}, expected max1 or zscore_offdiag"
                    )))
                }
            };
            normalize_diss(&d, mode)?
        }
        None => d,
    };

    write_matrix_csv(&args.out_matrix, &d)?;
    let labels_path = args
        .out_labels
        .clone()
        .unwrap_or_else(|| sibling(&args.out_matrix, "labels"));
    write_labels_csv(&labels_path, d.labels())?;
    let mask_path = args
        .out_mask
        .clone()
        .unwrap_or_else(|| sibling(&args.out_matrix, "mask"));
    write_mask_csv(&mask_path, d.periods(), d.labels(), &mask)?;
    eprintln!(
        "converted {} edges into {} periods x {} objects",
        edges.rows().len(),
        d.n_periods(),
        d.n_objects()
    );
    Ok(())
}

fn stop_reason_name(reason: &StopReason) -> &'static str {
    match reason {
        StopReason::GradientVanished => "gradient_vanished",
        StopReason::CostStagnated => "cost_stagnated",
        StopReason::MaxIterations => "max_iterations",
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let d = read_matrix_csv(&args.input)?;
    let mask = read_optional_mask(&args.mask, d.periods(), d.labels())?;
    let spec = args.method.to_spec()?;
    let settings = args.optim.to_settings(&d)?;

    let result = fit(&d, &spec, &settings, mask.as_ref())?;
    for line in describe_progress(&spec.method, &result, settings.verbose) {
        eprintln!("{line}");
    }

    write_coords_csv(&args.out_coords, &result.coords, d.labels(), d.periods())?;

    let static_costs = JointProblem::new(&d, &spec, mask.as_ref())?.static_costs(&result.coords)?;
    let mut inputs = vec![args.input.display().to_string()];
    if let Some(m) = &args.mask {
        inputs.push(m.display().to_string());
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        inputs,
        method: args.method.method.clone(),
        mds_type: (args.method.method == "mds").then(|| args.method.mds_type.clone()),
        perplexity: (args.method.method == "tsne").then_some(args.method.perplexity),
        alpha: spec.alpha,
        p: spec.p,
        dims: spec.dims,
        n_iter: settings.n_iter,
        tol: settings.tol,
        step_size: settings.step_size,
        n_inits: settings.n_inits,
        n_iter_check: settings.n_iter_check,
        seed: settings.seed,
        cost_total_final: result.cost_total_final,
        cost_static_avg: result.cost_static_avg,
        converged: result.converged,
        iterations_used: result.iterations_used,
        init_index_selected: result.init_index_selected,
        stop_reason: stop_reason_name(&result.stop_reason).to_string(),
        static_costs,
    };
    let manifest_path = args.out_manifest.clone().unwrap_or_else(|| {
        let mut p = args.out_coords.clone().into_os_string();
        p.push(".manifest");
        PathBuf::from(p)
    });
    std::fs::write(&manifest_path, manifest.to_text())?;
    eprintln!(
        "fit finished: cost {:.6}, {} iterations, {}",
        result.cost_total_final,
        result.iterations_used,
        stop_reason_name(&result.stop_reason)
    );
    Ok(())
}

/// Writes metric rows to a file or, without one, to standard output.
fn write_rows_csv(
    out: &Option<PathBuf>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let emit = |w: &mut csv::Writer<Box<dyn std::io::Write>>| -> Result<()> {
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    };
    let sink: Box<dyn std::io::Write> = match out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    emit(&mut csv::Writer::from_writer(sink))
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let d = read_matrix_csv(&args.input)?;
    let file = read_coords_csv(&args.coords)?;
    let x = conform_coords(file, d.labels(), d.periods())?;
    let mask = read_optional_mask(&args.mask, d.periods(), d.labels())?;
    let k = args
        .k
        .unwrap_or_else(|| feasible_default_k(&d, mask.as_ref(), false));
    let aggregate = match args.aggregate.as_str() {
        "mean" => MisalignAggregate::Mean,
        "total" => MisalignAggregate::Total,
        other => {
            return Err(CliError::Parse(format!(
                "unknown aggregate {other:?}, expected mean or total"
            )))
        }
    };
    let persistence_mode = if args.per_object {
        PersistenceMode::PerObject
    } else {
        PersistenceMode::Pooled
    };

    let cost_static_avg = if args.with_cost {
        let spec = args.method.to_spec()?;
        let costs = JointProblem::new(&d, &spec, mask.as_ref())?.static_costs(&x)?;
        Some(costs.iter().sum::<f64>() / costs.len() as f64)
    } else {
        None
    };

    let mut rows: Vec<(String, f64)> = Vec::new();
    match &args.metrics {
        None => {
            let report = metrics::evaluate(&x, &d, k, mask.as_ref(), cost_static_avg)?;
            rows.extend(report.named_values(d.periods(), args.per_period));
        }
        Some(list) => {
            for name in list.split(',').map(str::trim) {
                match name {
                    "misalign" => {
                        rows.push((name.into(), metrics::misalign_score(&x, mask.as_ref(), aggregate)?))
                    }
                    "alignment" => rows.push((name.into(), metrics::align_score(&x, mask.as_ref())?)),
                    "persistence" => rows.push((
                        name.into(),
                        metrics::persistence_score(&x, mask.as_ref(), persistence_mode)?,
                    )),
                    "hitrate" => {
                        rows.push((
                            "avg_hitrate".into(),
                            metrics::avg_hitrate_score(&x, &d, k, mask.as_ref())?,
                        ));
                        if args.per_period {
                            let report = metrics::evaluate(&x, &d, k, mask.as_ref(), None)?;
                            for (t, v) in report.hitrate.iter().enumerate() {
                                rows.push((format!("hitrate_{}", d.periods()[t]), *v));
                            }
                        }
                    }
                    "adjusted_hitrate" => rows.push((
                        "avg_adjusted_hitrate".into(),
                        metrics::avg_adjusted_hitrate_score(&x, &d, k, mask.as_ref())?,
                    )),
                    other => {
                        return Err(CliError::Parse(format!(
                            "unknown metric {other:?}, expected misalign, alignment, persistence, hitrate, or adjusted_hitrate"
                        )))
                    }
                }
            }
            if let Some(c) = cost_static_avg {
                rows.push(("cost_static_avg".into(), c));
            }
        }
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, value)| vec![name.clone(), value.to_string()])
        .collect();
    write_rows_csv(&args.out, &["metric", "value"], &table)
}

/// Parses one `name=spec` grid token: either a comma list of values or an
/// inclusive `start:stop:count` progression.
fn parse_grid_token(token: &str) -> Result<(String, Vec<f64>)> {
    let (name, raw) = token.split_once('=').ok_or_else(|| {
        CliError::Parse(format!("grid token {token:?} is not name=values"))
    })?;
    let values = if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Parse(format!(
                "grid range {raw:?} is not start:stop:count"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::Parse(format!("bad range start {:?}", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::Parse(format!("bad range stop {:?}", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Parse(format!("bad range count {:?}", parts[2])))?;
        if count == 0 {
            return Err(CliError::Parse("range count must be >= 1".into()));
        }
        if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
    } else {
        parse_f64_list(raw, "grid")?
    };
    Ok((name.to_string(), values))
}

/// Parses one `name=lo..hi[:int]` space token for the Bayesian search.
fn parse_space_token(token: &str) -> Result<(String, ParamRange)> {
    let (name, raw) = token.split_once('=').ok_or_else(|| {
        CliError::Parse(format!("space token {token:?} is not name=lo..hi"))
    })?;
    let (range_part, integer) = match raw.strip_suffix(":int") {
        Some(rest) => (rest, true),
        None => (raw, false),
    };
    let (lo, hi) = range_part.split_once("..").ok_or_else(|| {
        CliError::Parse(format!("space range {raw:?} is not lo..hi"))
    })?;
    let range = if integer {
        ParamRange::Integer {
            lo: lo
                .parse()
                .map_err(|_| CliError::Parse(format!("bad integer bound {lo:?}")))?,
            hi: hi
                .parse()
                .map_err(|_| CliError::Parse(format!("bad integer bound {hi:?}")))?,
        }
    } else {
        ParamRange::Real {
            lo: lo
                .parse()
                .map_err(|_| CliError::Parse(format!("bad bound {lo:?}")))?,
            hi: hi
                .parse()
                .map_err(|_| CliError::Parse(format!("bad bound {hi:?}")))?,
        }
    };
    Ok((name.to_string(), range))
}

fn tune_metrics(
    d: &DissimilaritySequence,
    k: usize,
    mask: Option<&InclusionMask>,
) -> Vec<EvalMetric> {
    let d_mis = mask.cloned();
    let d_hr = d.clone();
    let mask_hr = mask.cloned();
    vec![
        EvalMetric::new("misalign", move |x: &ConfigurationSequence| {
            metrics::misalign_score(x, d_mis.as_ref(), MisalignAggregate::Mean)
        }),
        EvalMetric::new("hitrate_loss", move |x: &ConfigurationSequence| {
            Ok(1.0 - metrics::avg_adjusted_hitrate_score(x, &d_hr, k, mask_hr.as_ref())?)
        }),
    ]
}

fn tune_table(result: &TuneResult) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header: Vec<String> = result.param_names.clone();
    header.push("cost_static_avg".into());
    header.extend(result.metric_names.iter().cloned());
    header.push("combined_loss".into());
    header.push("error".into());

    let rows = result
        .rows
        .iter()
        .map(|row| {
            let mut record: Vec<String> = row.params.iter().map(|v| v.to_string()).collect();
            record.push(row.cost_static_avg.map(|v| v.to_string()).unwrap_or_default());
            if row.metrics.is_empty() {
                record.extend(std::iter::repeat(String::new()).take(result.metric_names.len()));
            } else {
                record.extend(row.metrics.iter().map(|v| v.to_string()));
            }
            record.push(row.combined_loss.map(|v| v.to_string()).unwrap_or_default());
            record.push(row.error.clone().unwrap_or_default());
            record
        })
        .collect();
    (header, rows)
}

fn tune_summary(result: &TuneResult) -> Option<String> {
    let best = result.best()?;
    let mut out = String::from("Best result found:\n");
    for (name, value) in result.param_names.iter().zip(&best.params) {
        out.push_str(&format!("  {name} = {value}\n"));
    }
    if let Some(c) = best.cost_static_avg {
        out.push_str(&format!("  cost_static_avg = {c:.4}\n"));
    }
    for (name, value) in result.metric_names.iter().zip(&best.metrics) {
        out.push_str(&format!("  {name} = {value:.4}\n"));
    }
    if let Some(loss) = best.combined_loss {
        out.push_str(&format!("  combined_loss = {loss:.4}\n"));
    }
    Some(out)
}

pub fn cmd_tune(args: &TuneArgs) -> Result<()> {
    let d = read_matrix_csv(&args.input)?;
    let mask = read_optional_mask(&args.mask, d.periods(), d.labels())?;
    let spec = args.method.to_spec()?;
    let settings = args.optim.to_settings(&d)?;
    let k = args
        .k
        .unwrap_or_else(|| feasible_default_k(&d, mask.as_ref(), true));
    let evals = tune_metrics(&d, k, mask.as_ref());
    let weights = args
        .weights
        .as_ref()
        .map(|raw| parse_f64_list(raw, "weight"))
        .transpose()?;

    let result = if args.bayes {
        let weights = weights.ok_or_else(|| {
            CliError::Core(Error::Config(
                "--bayes needs --weights to scalarize the objective".into(),
            ))
        })?;
        if args.space.is_empty() {
            return Err(CliError::Core(Error::Config(
                "--bayes needs at least one --space token".into(),
            )));
        }
        let space = SearchSpace::new(
            args.space
                .iter()
                .map(|token| parse_space_token(token))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let cfg = BayesConfig {
            n_calls: args.n_calls,
            n_initial_points: args.n_initial_points,
            seed: args.optim.seed,
            ..BayesConfig::default()
        };
        bayesian_search(&d, &spec, &settings, &space, &evals, &weights, &cfg, mask.as_ref())?
    } else {
        if args.grid.is_empty() {
            return Err(CliError::Core(Error::Config(
                "pass --grid tokens or --bayes with --space".into(),
            )));
        }
        let grid = args
            .grid
            .iter()
            .map(|token| parse_grid_token(token))
            .collect::<Result<Vec<_>>>()?;
        grid_search(
            &d,
            &spec,
            &settings,
            &grid,
            &evals,
            weights.as_deref(),
            mask.as_ref(),
        )?
    };

    let (header, rows) = tune_table(&result);
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_rows_csv(&args.out, &header_refs, &rows)?;
    if let Some(summary) = tune_summary(&result) {
        // The table owns standard output when no file was given; route the
        // summary to the error stream in that case so the CSV stays clean.
        if args.out.is_some() {
            print!("{summary}");
        } else {
            eprint!("{summary}");
        }
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    if args.recovery {
        let noise_levels = parse_f64_list(&args.noise, "noise")?;
        let alpha_levels = parse_f64_list(&args.alphas, "alpha")?;
        let cfg = SimConfig {
            n: args.n,
            t: args.t,
            scale: args.scale,
            momentum: args.momentum,
            seed: args.seed,
            ..SimConfig::default()
        };
        let spec = FitSpec::new(
            Method::Mds {
                mds_type: MdsType::Ratio,
            },
            0.0,
            1,
            2,
        )?;
        let settings = OptimizerSettings {
            n_iter: args.n_iter,
            seed: args.seed,
            ..OptimizerSettings::default()
        };
        let rows = recovery_study(&noise_levels, &alpha_levels, args.reps, &spec, &settings, &cfg)?;
        let mut failures = 0usize;
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                failures += r.failures;
                vec![
                    r.noise.to_string(),
                    r.alpha.to_string(),
                    r.stress.to_string(),
                    r.procrustes.to_string(),
                ]
            })
            .collect();
        write_rows_csv(&args.out, &["noise", "alpha", "stress", "procrustes"], &table)?;
        if failures > 0 {
            eprintln!("warning: {failures} replication fits failed and were excluded");
        }
        return Ok(());
    }

    let noise_values = parse_f64_list(&args.noise, "noise")?;
    if noise_values.len() != 1 {
        return Err(CliError::Parse(
            "plain simulation takes a single --noise value; lists are for --recovery".into(),
        ));
    }
    let cfg = SimConfig {
        n: args.n,
        t: args.t,
        scale: args.scale,
        noise: noise_values[0],
        momentum: args.momentum,
        seed: args.seed,
        ..SimConfig::default()
    };
    let truth = simulate_paths(&cfg)?;
    let labels: Vec<String> = (1..=cfg.n).map(|i| i.to_string()).collect();
    let periods: Vec<String> = (1..=cfg.t).map(|t| t.to_string()).collect();
    if let Some(out) = &args.out_coords {
        write_coords_csv(out, &truth, &labels, &periods)?;
    }
    if let Some(out) = &args.out_matrix {
        let d = measure_distances(&truth, args.measurement_noise, cfg.seed.wrapping_add(1))?;
        write_matrix_csv(out, &d)?;
    }
    if args.out_coords.is_none() && args.out_matrix.is_none() {
        return Err(CliError::Core(Error::Config(
            "pass --out-coords and/or --out-matrix".into(),
        )));
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let n_list = parse_usize_list(&args.n, "n")?;
    let t_list = parse_usize_list(&args.t, "t")?;
    let (joint, independent) = runtime_benchmark(&n_list, &t_list, args.iterations)?;
    let to_table = |rows: &[dynamap_core::sim::BenchRow]| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| vec![r.n.to_string(), r.t.to_string(), r.seconds.to_string()])
            .collect()
    };
    write_rows_csv(&Some(args.out_joint.clone()), &["n", "t", "seconds"], &to_table(&joint))?;
    write_rows_csv(
        &Some(args.out_independent.clone()),
        &["n", "t", "seconds"],
        &to_table(&independent),
    )?;
    Ok(())
}

pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let file = read_coords_csv(&args.coords)?;
    let mask = read_optional_mask(&args.mask, &file.periods, &file.labels)?;
    let read_table = |path: &Option<PathBuf>| -> Result<Option<HashMap<String, String>>> {
        match path {
            None => Ok(None),
            Some(p) => Ok(Some(read_aesthetic_csv(p)?)),
        }
    };
    let opts = PlotOptions {
        mode: args.mode.parse()?,
        period: args.period.clone(),
        show_arrows: args.show_arrows,
        transparency_start: args.transparency_start,
        transparency_end: args.transparency_end,
        colors: read_table(&args.color_file)?,
        sizes: read_table(&args.size_file)?,
        display_labels: read_table(&args.label_file)?,
    };
    let svg = render_svg(&file, mask.as_ref(), &opts)?;
    std::fs::write(&args.out, svg)?;
    Ok(())
}

pub fn cmd_align(args: &AlignArgs) -> Result<()> {
    let file = read_coords_csv(&args.coords)?;
    let reference_file = read_coords_csv(&args.reference)?;
    if reference_file.periods.len() != 1 {
        return Err(CliError::Core(Error::Data(format!(
            "the reference must contain exactly one period, got {}",
            reference_file.periods.len()
        ))));
    }
    // The reference's period name is irrelevant; only labels must agree.
    let reference = conform_labels_only(reference_file, &file.labels)?;
    let mode = match args.align.as_str() {
        "per_map" => AlignMode::PerMap,
        "fixed" => AlignMode::Fixed,
        other => {
            return Err(CliError::Parse(format!(
                "unknown alignment mode {other:?}, expected per_map or fixed"
            )))
        }
    };
    let aligned = align_maps(&file.coords, &reference.maps()[0], mode, args.allow_scaling)?;
    write_coords_csv(&args.out, &aligned, &file.labels, &file.periods)
}

fn conform_labels_only(file: CoordsFile, labels: &[String]) -> Result<ConfigurationSequence> {
    let periods = file.periods.clone();
    conform_coords(file, labels, &periods)
}

pub fn cmd_example(args: &ExampleArgs) -> Result<()> {
    let (d, truth) = tech_firms_standin(args.seed)?;
    // Publish the stand-in as a similarity edgelist: s = 1 - delta/max,
    // so `convert --transform mirror` recovers distances up to scale.
    let max = d
        .matrices()
        .iter()
        .flat_map(|m| m.iter())
        .fold(0.0f64, |acc, &v| acc.max(v));
    if max <= 0.0 {
        return Err(CliError::Core(Error::Degenerate(
            "stand-in distances are all zero".into(),
        )));
    }
    let sims: Vec<DMatrix<f64>> = d
        .matrices()
        .iter()
        .map(|m| m.map(|v| 1.0 - v / max))
        .collect();
    let s = SimilaritySequence::new(sims, d.labels().to_vec(), d.periods().to_vec())?;
    let edges = matrices_to_edgelist(&s)?;

    let mut w = csv::Writer::from_path(&args.out)?;
    w.write_record(["period", "id_a", "id_b", "score"])?;
    for row in edges.rows() {
        w.write_record([
            row.period.as_str(),
            row.id_a.as_str(),
            row.id_b.as_str(),
            &row.score.to_string(),
        ])?;
    }
    w.flush()?;

    if let Some(out) = &args.out_truth {
        write_coords_csv(out, &truth, d.labels(), d.periods())?;
    }
    eprintln!(
        "wrote {} similarity edges over {} periods of {} firms",
        edges.rows().len(),
        d.n_periods(),
        d.n_objects()
    );
    Ok(())
}
