//! On-disk formats: the long-form matrix CSV, mask CSV, coordinates CSV,
//! labels file, edgelist reader, and the key-value run manifest.
//!
//! All CSV files are UTF-8 with `.` decimals. Numbers are written with
//! Rust's shortest round-trip formatting, so every file re-reads to
//! bit-identical values.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use nalgebra::DMatrix;

use dynamap_core::preprocess::{EdgeList, EdgeRow};
use dynamap_core::{ConfigurationSequence, DissimilaritySequence, Error, InclusionMask};

use crate::errors::{CliError, Result};

fn line_of(record: &csv::StringRecord) -> String {
    record
        .position()
        .map(|p| format!(" (line {})", p.line()))
        .unwrap_or_default()
}

fn parse_value(raw: &str, record: &csv::StringRecord, column: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| {
        CliError::Parse(format!(
            "could not parse {column} value {raw:?}{}",
            line_of(record)
        ))
    })
}

fn check_header(headers: &csv::StringRecord, expected: &[&str], path: &Path) -> Result<()> {
    let got: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    if got != expected {
        return Err(CliError::Parse(format!(
            "{}: expected header {}, got {}",
            path.display(),
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Reads a long-form matrix CSV (`period,row_label,col_label,value`) into
/// a dissimilarity sequence. Either triangle (or both, consistently) may
/// be present; unlisted pairs default to zero. Labels are ordered
/// lexicographically, periods by first appearance.
pub fn read_matrix_csv(path: &Path) -> Result<DissimilaritySequence> {
    let mut reader = open_reader(path)?;
    check_header(
        reader.headers()?,
        &["period", "row_label", "col_label", "value"],
        path,
    )?;

    let mut rows: Vec<(String, String, String, f64)> = Vec::new();
    let mut label_set: BTreeSet<String> = BTreeSet::new();
    let mut periods: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(CliError::Parse(format!(
                "expected 4 columns, got {}{}",
                record.len(),
                line_of(&record)
            )));
        }
        let value = parse_value(&record[3], &record, "value")?;
        let period = record[0].to_string();
        if !periods.iter().any(|p| *p == period) {
            periods.push(period.clone());
        }
        label_set.insert(record[1].to_string());
        label_set.insert(record[2].to_string());
        rows.push((period, record[1].to_string(), record[2].to_string(), value));
    }
    if rows.is_empty() {
        return Err(CliError::Parse(format!(
            "{}: no data rows",
            path.display()
        )));
    }

    let labels: Vec<String> = label_set.into_iter().collect();
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let period_index: HashMap<&str, usize> = periods
        .iter()
        .enumerate()
        .map(|(t, p)| (p.as_str(), t))
        .collect();

    let n = labels.len();
    // -1 marks "not yet set"; real values are nonnegative.
    let mut matrices = vec![DMatrix::from_element(n, n, -1.0); periods.len()];
    for (period, a, b, value) in &rows {
        let t = period_index[period.as_str()];
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        let m = &mut matrices[t];
        let existing = m[(i, j)];
        if existing >= 0.0 && existing != *value {
            return Err(CliError::Core(Error::Data(format!(
                "conflicting values for pair ({a}, {b}) in period {period}: {existing} vs {value}"
            ))));
        }
        m[(i, j)] = *value;
        m[(j, i)] = *value;
    }
    for m in &mut matrices {
        for v in m.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    DissimilaritySequence::new(matrices, labels, periods).map_err(CliError::Core)
}

/// Writes a dissimilarity sequence as a long-form matrix CSV, emitting
/// every upper-triangle pair of every period.
pub fn write_matrix_csv(path: &Path, d: &DissimilaritySequence) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["period", "row_label", "col_label", "value"])?;
    for (t, m) in d.matrices().iter().enumerate() {
        for i in 0..d.n_objects() {
            for j in (i + 1)..d.n_objects() {
                w.write_record([
                    d.periods()[t].as_str(),
                    d.labels()[i].as_str(),
                    d.labels()[j].as_str(),
                    &m[(i, j)].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a mask CSV (`period,label,included`, included in {0,1}) against
/// known period and label rosters. Unlisted combinations default to
/// included.
pub fn read_mask_csv(path: &Path, periods: &[String], labels: &[String]) -> Result<InclusionMask> {
    let mut reader = open_reader(path)?;
    check_header(reader.headers()?, &["period", "label", "included"], path)?;
    let period_index: HashMap<&str, usize> = periods
        .iter()
        .enumerate()
        .map(|(t, p)| (p.as_str(), t))
        .collect();
    let label_index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let mut included = vec![vec![true; labels.len()]; periods.len()];
    for record in reader.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(CliError::Parse(format!(
                "expected 3 columns, got {}{}",
                record.len(),
                line_of(&record)
            )));
        }
        let t = *period_index.get(&record[0]).ok_or_else(|| {
            CliError::Core(Error::Data(format!(
                "mask names unknown period {:?}",
                &record[0]
            )))
        })?;
        let i = *label_index.get(&record[1]).ok_or_else(|| {
            CliError::Core(Error::Data(format!(
                "mask names unknown label {:?}",
                &record[1]
            )))
        })?;
        included[t][i] = match &record[2] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::Parse(format!(
                    "included must be 0 or 1, got {other:?}{}",
                    line_of(&record)
                )))
            }
        };
    }
    InclusionMask::new(included).map_err(CliError::Core)
}

/// Writes the full mask table (one row per period and label).
pub fn write_mask_csv(
    path: &Path,
    periods: &[String],
    labels: &[String],
    mask: &InclusionMask,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["period", "label", "included"])?;
    for (t, period) in periods.iter().enumerate() {
        for (i, label) in labels.iter().enumerate() {
            let flag = if mask.is_included(t, i) { "1" } else { "0" };
            w.write_record([period.as_str(), label.as_str(), flag])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the label roster, one label per row under a `label` header.
pub fn write_labels_csv(path: &Path, labels: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["label"])?;
    for label in labels {
        w.write_record([label.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// A coordinates file in memory: the maps plus their naming.
#[derive(Debug, Clone)]
pub struct CoordsFile {
    /// The fitted or simulated positions.
    pub coords: ConfigurationSequence,
    /// Object labels, in row order.
    pub labels: Vec<String>,
    /// Period labels, in map order.
    pub periods: Vec<String>,
}

/// Reads a coordinates CSV (`period,label,dim1[,dim2,...]`). Periods are
/// ordered by first appearance; every period must list exactly the same
/// labels (any order), which are normalized to the first period's order.
pub fn read_coords_csv(path: &Path) -> Result<CoordsFile> {
    let mut reader = open_reader(path)?;
    let headers = reader.headers()?.clone();
    let got: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    if got.len() < 3 || got[0] != "period" || got[1] != "label" {
        return Err(CliError::Parse(format!(
            "{}: expected header period,label,dim1[,...], got {}",
            path.display(),
            got.join(",")
        )));
    }
    let dims = got.len() - 2;

    let mut periods: Vec<String> = Vec::new();
    let mut by_period: HashMap<String, Vec<(String, Vec<f64>)>> = HashMap::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 2 + dims {
            return Err(CliError::Parse(format!(
                "expected {} columns, got {}{}",
                2 + dims,
                record.len(),
                line_of(&record)
            )));
        }
        let period = record[0].to_string();
        if !periods.iter().any(|p| *p == period) {
            periods.push(period.clone());
        }
        let mut row = Vec::with_capacity(dims);
        for k in 0..dims {
            row.push(parse_value(&record[2 + k], &record, got[2 + k])?);
        }
        by_period
            .entry(period)
            .or_default()
            .push((record[1].to_string(), row));
    }
    if periods.is_empty() {
        return Err(CliError::Parse(format!(
            "{}: no data rows",
            path.display()
        )));
    }

    let labels: Vec<String> = by_period[&periods[0]]
        .iter()
        .map(|(l, _)| l.clone())
        .collect();
    let mut maps = Vec::with_capacity(periods.len());
    for period in &periods {
        let rows = &by_period[period];
        let lookup: HashMap<&str, &Vec<f64>> =
            rows.iter().map(|(l, v)| (l.as_str(), v)).collect();
        if rows.len() != labels.len() || lookup.len() != rows.len() {
            return Err(CliError::Core(Error::Data(format!(
                "period {period} lists {} unique labels, expected {}",
                lookup.len(),
                labels.len()
            ))));
        }
        let mut m = DMatrix::zeros(labels.len(), dims);
        for (i, label) in labels.iter().enumerate() {
            let row = lookup.get(label.as_str()).ok_or_else(|| {
                CliError::Core(Error::Data(format!(
                    "period {period} is missing label {label:?}"
                )))
            })?;
            for k in 0..dims {
                m[(i, k)] = row[k];
            }
        }
        maps.push(m);
    }
    Ok(CoordsFile {
        coords: ConfigurationSequence::new(maps).map_err(CliError::Core)?,
        labels,
        periods,
    })
}

/// Writes a coordinates CSV with `dim1..dimd` columns.
pub fn write_coords_csv(
    path: &Path,
    coords: &ConfigurationSequence,
    labels: &[String],
    periods: &[String],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["period".to_string(), "label".to_string()];
    for k in 1..=coords.dims() {
        header.push(format!("dim{k}"));
    }
    w.write_record(&header)?;
    for (t, m) in coords.maps().iter().enumerate() {
        for (i, label) in labels.iter().enumerate() {
            let mut record = vec![periods[t].clone(), label.clone()];
            for k in 0..coords.dims() {
                record.push(m[(i, k)].to_string());
            }
            w.write_record(&record)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads an edgelist CSV under caller-declared column names.
pub fn read_edgelist_csv(
    path: &Path,
    period_col: &str,
    id_a_col: &str,
    id_b_col: &str,
    score_col: &str,
) -> Result<EdgeList> {
    let mut reader = open_reader(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| {
                CliError::Parse(format!(
                    "{}: no column named {name:?} (found: {})",
                    path.display(),
                    headers.iter().collect::<Vec<_>>().join(",")
                ))
            })
    };
    let (pc, ac, bc, sc) = (col(period_col)?, col(id_a_col)?, col(id_b_col)?, col(score_col)?);

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let width = record.len();
        let field = |c: usize| -> Result<&str> {
            record.get(c).ok_or_else(|| {
                CliError::Parse(format!(
                    "row has {width} columns, needed index {c}{}",
                    line_of(&record)
                ))
            })
        };
        rows.push(EdgeRow {
            period: field(pc)?.to_string(),
            id_a: field(ac)?.to_string(),
            id_b: field(bc)?.to_string(),
            score: parse_value(field(sc)?, &record, score_col)?,
        });
    }
    EdgeList::new(rows).map_err(CliError::Core)
}

/// Reads a two-column aesthetic CSV (`label,<anything>`) into a map.
pub fn read_aesthetic_csv(path: &Path) -> Result<HashMap<String, String>> {
    let mut reader = open_reader(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 2 || headers.get(0).map(|h| h.trim()) != Some("label") {
        return Err(CliError::Parse(format!(
            "{}: expected a two-column header starting with label",
            path.display()
        )));
    }
    let mut out = HashMap::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(CliError::Parse(format!(
                "expected 2 columns, got {}{}",
                record.len(),
                line_of(&record)
            )));
        }
        out.insert(record[0].to_string(), record[1].to_string());
    }
    Ok(out)
}

/// Everything a fit run records about itself. The on-disk form is a plain
/// `key = value` text file that round-trips losslessly.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// Version of the tool that produced the run.
    pub tool_version: String,
    /// Unix timestamp (seconds) at which the run finished.
    pub created_unix: u64,
    /// Input paths, in the order they were consumed.
    pub inputs: Vec<String>,
    /// Method name: mds, sammon, or tsne.
    pub method: String,
    /// Disparity flavor, present for MDS runs.
    pub mds_type: Option<String>,
    /// Perplexity, present for t-SNE runs.
    pub perplexity: Option<f64>,
    /// Temporal penalty weight.
    pub alpha: f64,
    /// Smoothing order.
    pub p: usize,
    /// Map dimensionality.
    pub dims: usize,
    /// Iteration cap.
    pub n_iter: usize,
    /// Gradient-norm tolerance.
    pub tol: f64,
    /// Initial step size.
    pub step_size: f64,
    /// Number of random starts.
    pub n_inits: usize,
    /// Check-and-report interval.
    pub n_iter_check: usize,
    /// RNG seed.
    pub seed: u64,
    /// Final total cost.
    pub cost_total_final: f64,
    /// Mean per-period static cost.
    pub cost_static_avg: f64,
    /// Whether the gradient-norm criterion was met.
    pub converged: bool,
    /// Iterations consumed by the selected start.
    pub iterations_used: usize,
    /// Which random start won.
    pub init_index_selected: usize,
    /// Why the optimizer stopped.
    pub stop_reason: String,
    /// Per-period static costs, in period order.
    pub static_costs: Vec<f64>,
}

impl RunManifest {
    /// Serializes to the `key = value` text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("tool_version", self.tool_version.clone());
        push("created_unix", self.created_unix.to_string());
        for input in &self.inputs {
            push("input", input.clone());
        }
        push("method", self.method.clone());
        if let Some(mt) = &self.mds_type {
            push("mds_type", mt.clone());
        }
        if let Some(px) = self.perplexity {
            push("perplexity", px.to_string());
        }
        push("alpha", self.alpha.to_string());
        push("p", self.p.to_string());
        push("dims", self.dims.to_string());
        push("n_iter", self.n_iter.to_string());
        push("tol", self.tol.to_string());
        push("step_size", self.step_size.to_string());
        push("n_inits", self.n_inits.to_string());
        push("n_iter_check", self.n_iter_check.to_string());
        push("seed", self.seed.to_string());
        push("cost_total_final", self.cost_total_final.to_string());
        push("cost_static_avg", self.cost_static_avg.to_string());
        push("converged", self.converged.to_string());
        push("iterations_used", self.iterations_used.to_string());
        push("init_index_selected", self.init_index_selected.to_string());
        push("stop_reason", self.stop_reason.clone());
        for c in &self.static_costs {
            push("static_cost", c.to_string());
        }
        out
    }

    /// Parses the `key = value` text form back.
    // No subcommand reads manifests yet; this is the reading half of the
    // lossless round-trip contract and is exercised by the tests.
    #[allow(dead_code)]
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: HashMap<&str, Vec<&str>> = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once(" = ").ok_or_else(|| {
                CliError::Parse(format!("manifest line {} is not key = value", idx + 1))
            })?;
            map.entry(key).or_default().push(value);
        }
        let one = |key: &str| -> Result<&str> {
            map.get(key)
                .and_then(|v| v.first())
                .copied()
                .ok_or_else(|| CliError::Parse(format!("manifest is missing key {key:?}")))
        };
        fn num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
            raw.parse::<T>()
                .map_err(|_| CliError::Parse(format!("manifest key {key:?} has bad value {raw:?}")))
        }
        Ok(RunManifest {
            tool_version: one("tool_version")?.to_string(),
            created_unix: num("created_unix", one("created_unix")?)?,
            inputs: map
                .get("input")
                .map(|v| v.iter().map(|s| s.to_string()).collect())
                .unwrap_or_default(),
            method: one("method")?.to_string(),
            mds_type: map
                .get("mds_type")
                .and_then(|v| v.first())
                .map(|s| s.to_string()),
            perplexity: match map.get("perplexity").and_then(|v| v.first()) {
                Some(raw) => Some(num("perplexity", raw)?),
                None => None,
            },
            alpha: num("alpha", one("alpha")?)?,
            p: num("p", one("p")?)?,
            dims: num("dims", one("dims")?)?,
            n_iter: num("n_iter", one("n_iter")?)?,
            tol: num("tol", one("tol")?)?,
            step_size: num("step_size", one("step_size")?)?,
            n_inits: num("n_inits", one("n_inits")?)?,
            n_iter_check: num("n_iter_check", one("n_iter_check")?)?,
            seed: num("seed", one("seed")?)?,
            cost_total_final: num("cost_total_final", one("cost_total_final")?)?,
            cost_static_avg: num("cost_static_avg", one("cost_static_avg")?)?,
            converged: num("converged", one("converged")?)?,
            iterations_used: num("iterations_used", one("iterations_used")?)?,
            init_index_selected: num("init_index_selected", one("init_index_selected")?)?,
            stop_reason: one("stop_reason")?.to_string(),
            static_costs: map
                .get("static_cost")
                .map(|v| {
                    v.iter()
                        .map(|raw| num("static_cost", raw))
                        .collect::<Result<Vec<f64>>>()
                })
                .transpose()?
                .unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynamap_core::sim::{measure_distances, simulate_paths, SimConfig};

    fn temp(name: &str) -> std::path::PathBuf {
        let dir = tempfile::tempdir().unwrap();
        // Leak the tempdir so the path stays alive for the test body.
        let path = dir.path().join(name);
        std::mem::forget(dir);
        path
    }

    #[test]
    fn matrix_csv_round_trips() {
        let truth = simulate_paths(&SimConfig {
            n: 4,
            t: 3,
            seed: 3,
            ..SimConfig::default()
        })
        .unwrap();
        let d = measure_distances(&truth, 0.0, 0).unwrap();
        let path = temp("m.csv");
        write_matrix_csv(&path, &d).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back.labels(), d.labels());
        assert_eq!(back.periods(), d.periods());
        for (a, b) in back.matrices().iter().zip(d.matrices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn conflicting_matrix_entries_are_a_validation_error() {
        let path = temp("bad.csv");
        std::fs::write(
            &path,
            "period,row_label,col_label,value\n1,a,b,1.0\n1,b,a,2.0\n",
        )
        .unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("period 1"));
    }

    #[test]
    fn malformed_value_reports_its_line() {
        let path = temp("bad2.csv");
        std::fs::write(
            &path,
            "period,row_label,col_label,value\n1,a,b,1.0\n1,a,c,oops\n",
        )
        .unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 3"), "got: {err}");
    }

    #[test]
    fn coords_csv_round_trips_and_normalizes_row_order() {
        let path = temp("x.csv");
        std::fs::write(
            &path,
            "period,label,dim1,dim2\n\
             t1,a,0.5,1.5\nt1,b,-1,0.25\n\
             t2,b,-1.125,0.375\nt2,a,0.625,1.625\n",
        )
        .unwrap();
        let file = read_coords_csv(&path).unwrap();
        assert_eq!(file.labels, vec!["a", "b"]);
        assert_eq!(file.periods, vec!["t1", "t2"]);
        assert_eq!(file.coords.maps()[1][(0, 0)], 0.625);
        assert_eq!(file.coords.maps()[1][(1, 1)], 0.375);

        let out = temp("y.csv");
        write_coords_csv(&out, &file.coords, &file.labels, &file.periods).unwrap();
        let again = read_coords_csv(&out).unwrap();
        assert_eq!(again.coords.maps(), file.coords.maps());
    }

    #[test]
    fn coords_with_inconsistent_rosters_are_rejected() {
        let path = temp("x2.csv");
        std::fs::write(
            &path,
            "period,label,dim1\nt1,a,0\nt1,b,1\nt2,a,0\nt2,c,1\n",
        )
        .unwrap();
        let err = read_coords_csv(&path).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn mask_csv_round_trips_with_defaults() {
        let periods = vec!["p1".to_string(), "p2".to_string()];
        let labels = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let mask = InclusionMask::new(vec![
            vec![true, false, true],
            vec![true, true, true],
        ])
        .unwrap();
        let path = temp("mask.csv");
        write_mask_csv(&path, &periods, &labels, &mask).unwrap();
        let back = read_mask_csv(&path, &periods, &labels).unwrap();
        assert_eq!(back.rows(), mask.rows());

        // A sparse file listing only the exclusions reads identically.
        let sparse = temp("sparse.csv");
        std::fs::write(&sparse, "period,label,included\np1,b,0\n").unwrap();
        let from_sparse = read_mask_csv(&sparse, &periods, &labels).unwrap();
        assert_eq!(from_sparse.rows(), mask.rows());
    }

    #[test]
    fn manifest_round_trips_losslessly() {
        let manifest = RunManifest {
            tool_version: "0.1.0".into(),
            created_unix: 1_755_600_000,
            inputs: vec!["data/m.csv".into(), "data/mask.csv".into()],
            method: "mds".into(),
            mds_type: Some("ordinal".into()),
            perplexity: None,
            alpha: 0.3,
            p: 2,
            dims: 2,
            n_iter: 2000,
            tol: 1e-4,
            step_size: 1.0,
            n_inits: 3,
            n_iter_check: 50,
            seed: 42,
            cost_total_final: 0.123456789012345,
            cost_static_avg: 0.1,
            converged: true,
            iterations_used: 531,
            init_index_selected: 2,
            stop_reason: "cost_stagnated".into(),
            static_costs: vec![0.09, 0.11, 1.0 / 3.0],
        };
        let parsed = RunManifest::parse(&manifest.to_text()).unwrap();
        assert_eq!(parsed, manifest);
    }

    #[test]
    fn edgelist_reader_honors_column_roles() {
        let path = temp("e.csv");
        std::fs::write(
            &path,
            "year,extra,firm1,firm2,sim\n2001,x,a,b,0.9\n2001,x,a,c,0.5\n2002,x,a,b,0.7\n2002,x,a,c,0.1\n",
        )
        .unwrap();
        let e = read_edgelist_csv(&path, "year", "firm1", "firm2", "sim").unwrap();
        assert_eq!(e.rows().len(), 4);
        assert_eq!(e.rows()[0].period, "2001");
        assert_eq!(e.rows()[3].score, 0.1);

        let missing = read_edgelist_csv(&path, "period", "firm1", "firm2", "sim");
        assert_eq!(missing.unwrap_err().exit_code(), 2);
    }
}
