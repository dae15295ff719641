//! Sequence types shared by every stage of the pipeline: dissimilarity
//! matrices over time, fitted coordinate sequences, and inclusion masks
//! for unbalanced panels.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Absolute slack allowed when checking symmetry and zero diagonals.
const SHAPE_TOL: f64 = 1e-9;

fn check_square_matrix(m: &DMatrix<f64>, what: &str, t: usize) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Data(format!(
            "{what} {t} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{what} {t} has a non-finite entry at ({i}, {j})"
                )));
            }
            if i == j && v.abs() > SHAPE_TOL {
                return Err(Error::Data(format!(
                    "{what} {t} has a nonzero diagonal entry at ({i}, {i}): {v}"
                )));
            }
            if i < j && (v - m[(j, i)]).abs() > SHAPE_TOL {
                return Err(Error::Data(format!(
                    "{what} {t} is not symmetric at ({i}, {j}): {v} vs {}",
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Checks a standalone dissimilarity matrix: square, finite, symmetric,
/// nonnegative, zero diagonal.
pub(crate) fn validate_dissimilarity_matrix(m: &DMatrix<f64>) -> Result<()> {
    check_square_matrix(m, "dissimilarity matrix", 0)?;
    if m.iter().any(|&v| v < 0.0) {
        return Err(Error::Data(
            "dissimilarity matrix has a negative entry".into(),
        ));
    }
    Ok(())
}

/// A sequence of T square dissimilarity matrices over a fixed set of n
/// objects, together with object labels and period labels.
#[derive(Debug, Clone)]
pub struct DissimilaritySequence {
    matrices: Vec<DMatrix<f64>>,
    labels: Vec<String>,
    periods: Vec<String>,
}

impl DissimilaritySequence {
    /// Validates and wraps a matrix sequence. Every matrix must be square
    /// of the same size n ≥ 2, symmetric, nonnegative, finite, with a zero
    /// diagonal; `labels` must have length n and `periods` length T ≥ 1.
    pub fn new(
        matrices: Vec<DMatrix<f64>>,
        labels: Vec<String>,
        periods: Vec<String>,
    ) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Data("dissimilarity sequence has no periods".into()));
        }
        let n = matrices[0].nrows();
        if n < 2 {
            return Err(Error::Data(format!(
                "dissimilarity matrices must cover at least 2 objects, got {n}"
            )));
        }
        for (t, m) in matrices.iter().enumerate() {
            check_square_matrix(m, "dissimilarity matrix", t)?;
            if m.nrows() != n {
                return Err(Error::Data(format!(
                    "dissimilarity matrix {t} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|&v| v < 0.0) {
                return Err(Error::Data(format!(
                    "dissimilarity matrix {t} has a negative entry"
                )));
            }
        }
        if labels.len() != n {
            return Err(Error::Data(format!(
                "expected {n} labels, got {}",
                labels.len()
            )));
        }
        if periods.len() != matrices.len() {
            return Err(Error::Data(format!(
                "expected {} period labels, got {}",
                matrices.len(),
                periods.len()
            )));
        }
        for (what, names) in [("label", &labels), ("period", &periods)] {
            let mut seen = std::collections::HashSet::new();
            for name in names.iter() {
                if !seen.insert(name) {
                    return Err(Error::Data(format!("duplicate {what} {name:?}")));
                }
            }
        }
        Ok(Self {
            matrices,
            labels,
            periods,
        })
    }

    /// Wraps matrices with default labels "1".."n" and periods "1".."T".
    pub fn from_matrices(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = matrices.first().map_or(0, |m| m.nrows());
        let t = matrices.len();
        Self::new(
            matrices,
            (1..=n).map(|i| i.to_string()).collect(),
            (1..=t).map(|i| i.to_string()).collect(),
        )
    }

    /// Number of periods T.
    pub fn n_periods(&self) -> usize {
        self.matrices.len()
    }

    /// Number of objects n.
    pub fn n_objects(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// The per-period matrices, in period order.
    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// Object labels, in row order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Period labels, in time order.
    pub fn periods(&self) -> &[String] {
        &self.periods
    }
}

/// A sequence of T similarity matrices with the same shape contract as
/// [`DissimilaritySequence`], except that entries only need to be finite,
/// symmetric, and nonnegative; the diagonal is unconstrained.
#[derive(Debug, Clone)]
pub struct SimilaritySequence {
    matrices: Vec<DMatrix<f64>>,
    labels: Vec<String>,
    periods: Vec<String>,
}

impl SimilaritySequence {
    /// Validates and wraps a similarity sequence.
    pub fn new(
        matrices: Vec<DMatrix<f64>>,
        labels: Vec<String>,
        periods: Vec<String>,
    ) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Data("similarity sequence has no periods".into()));
        }
        let n = matrices[0].nrows();
        if n < 2 {
            return Err(Error::Data(format!(
                "similarity matrices must cover at least 2 objects, got {n}"
            )));
        }
        for (t, m) in matrices.iter().enumerate() {
            if m.nrows() != m.ncols() || m.nrows() != n {
                return Err(Error::Data(format!(
                    "similarity matrix {t} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            for j in 0..n {
                for i in 0..n {
                    let v = m[(i, j)];
                    if !v.is_finite() {
                        return Err(Error::Data(format!(
                            "similarity matrix {t} has a non-finite entry at ({i}, {j})"
                        )));
                    }
                    if v < 0.0 {
                        return Err(Error::Data(format!(
                            "similarity matrix {t} has a negative entry at ({i}, {j})"
                        )));
                    }
                    if i < j && (v - m[(j, i)]).abs() > SHAPE_TOL {
                        return Err(Error::Data(format!(
                            "similarity matrix {t} is not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        if labels.len() != n {
            return Err(Error::Data(format!(
                "expected {n} labels, got {}",
                labels.len()
            )));
        }
        if periods.len() != matrices.len() {
            return Err(Error::Data(format!(
                "expected {} period labels, got {}",
                matrices.len(),
                periods.len()
            )));
        }
        Ok(Self {
            matrices,
            labels,
            periods,
        })
    }

    /// Wraps matrices with default labels "1".."n" and periods "1".."T".
    pub fn from_matrices(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = matrices.first().map_or(0, |m| m.nrows());
        let t = matrices.len();
        Self::new(
            matrices,
            (1..=n).map(|i| i.to_string()).collect(),
            (1..=t).map(|i| i.to_string()).collect(),
        )
    }

    /// Number of periods T.
    pub fn n_periods(&self) -> usize {
        self.matrices.len()
    }

    /// Number of objects n.
    pub fn n_objects(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// The per-period matrices, in period order.
    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// Object labels, in row order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Period labels, in time order.
    pub fn periods(&self) -> &[String] {
        &self.periods
    }
}

/// A sequence of T fitted n×d coordinate matrices (one row per object).
#[derive(Debug, Clone)]
pub struct ConfigurationSequence {
    maps: Vec<DMatrix<f64>>,
}

impl ConfigurationSequence {
    /// Validates and wraps a coordinate sequence: at least one period, all
    /// maps n×d with d ≥ 1 and n ≥ 1, every entry finite.
    pub fn new(maps: Vec<DMatrix<f64>>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Data("configuration sequence has no periods".into()));
        }
        let (n, d) = (maps[0].nrows(), maps[0].ncols());
        if n == 0 || d == 0 {
            return Err(Error::Data(format!(
                "configurations must be n>=1 by d>=1, got {n}x{d}"
            )));
        }
        for (t, m) in maps.iter().enumerate() {
            if m.nrows() != n || m.ncols() != d {
                return Err(Error::Data(format!(
                    "configuration {t} is {}x{}, expected {n}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "configuration {t} has a non-finite entry"
                )));
            }
        }
        Ok(Self { maps })
    }

    /// Number of periods T.
    pub fn n_periods(&self) -> usize {
        self.maps.len()
    }

    /// Number of objects n.
    pub fn n_objects(&self) -> usize {
        self.maps[0].nrows()
    }

    /// Embedding dimensionality d.
    pub fn dims(&self) -> usize {
        self.maps[0].ncols()
    }

    /// The per-period coordinate matrices, in time order.
    pub fn maps(&self) -> &[DMatrix<f64>] {
        &self.maps
    }

    /// Consumes the sequence, returning the raw matrices.
    pub fn into_maps(self) -> Vec<DMatrix<f64>> {
        self.maps
    }
}

/// Per-period inclusion flags for unbalanced panels: `included[t][i]` is
/// true when object i is observed in period t.
#[derive(Debug, Clone)]
pub struct InclusionMask {
    included: Vec<Vec<bool>>,
}

impl InclusionMask {
    /// Validates and wraps inclusion vectors: all rows the same length,
    /// and every object included in at least one period.
    pub fn new(included: Vec<Vec<bool>>) -> Result<Self> {
        if included.is_empty() || included[0].is_empty() {
            return Err(Error::Data("inclusion mask is empty".into()));
        }
        let n = included[0].len();
        for (t, row) in included.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Data(format!(
                    "inclusion row {t} has length {}, expected {n}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            if !included.iter().any(|row| row[i]) {
                return Err(Error::Data(format!(
                    "object {i} is excluded from every period"
                )));
            }
        }
        Ok(Self { included })
    }

    /// An all-included mask of shape T×n.
    pub fn all_included(n_periods: usize, n_objects: usize) -> Self {
        Self {
            included: vec![vec![true; n_objects]; n_periods],
        }
    }

    /// Number of periods T.
    pub fn n_periods(&self) -> usize {
        self.included.len()
    }

    /// Number of objects n.
    pub fn n_objects(&self) -> usize {
        self.included[0].len()
    }

    /// Whether object `i` is included in period `t`.
    pub fn is_included(&self, t: usize, i: usize) -> bool {
        self.included[t][i]
    }

    /// Indices of the objects included in period `t`, ascending.
    pub fn included_in(&self, t: usize) -> Vec<usize> {
        (0..self.n_objects())
            .filter(|&i| self.included[t][i])
            .collect()
    }

    /// Whether every object is included in period `t`.
    pub fn period_complete(&self, t: usize) -> bool {
        self.included[t].iter().all(|&b| b)
    }

    /// Whether object `i` is included in every period `lo..=hi`.
    pub fn included_through(&self, i: usize, lo: usize, hi: usize) -> bool {
        (lo..=hi).all(|t| self.included[t][i])
    }

    /// The raw inclusion rows.
    pub fn rows(&self) -> &[Vec<bool>] {
        &self.included
    }

    /// Checks that the mask covers `n_periods` periods of `n_objects`
    /// objects, for pairing with a specific sequence.
    pub fn check_shape(&self, n_periods: usize, n_objects: usize) -> Result<()> {
        if self.n_periods() != n_periods || self.n_objects() != n_objects {
            return Err(Error::Data(format!(
                "inclusion mask is {}x{}, expected {n_periods}x{n_objects}",
                self.n_periods(),
                self.n_objects()
            )));
        }
        Ok(())
    }
}
