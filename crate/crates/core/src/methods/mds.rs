//! Metric and nonmetric multidimensional scaling: classical scaling for
//! closed-form starts, disparity transformations (ratio, interval,
//! ordinal), normalized stress, and its analytic gradient.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::seq::validate_dissimilarity_matrix;

/// How disparities are fitted to the input dissimilarities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdsType {
    /// δ̂ = b̂·δ with a least-squares slope b̂ ≥ 0.
    Ratio,
    /// δ̂ = â + b̂·δ via least squares, clamped at zero.
    Interval,
    /// δ̂ = monotone regression of the map distances onto the rank order
    /// of δ (pool-adjacent-violators).
    Ordinal,
}

impl std::fmt::Display for MdsType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MdsType::Ratio => "ratio",
            MdsType::Interval => "interval",
            MdsType::Ordinal => "ordinal",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for MdsType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(MdsType::Ratio),
            "interval" => Ok(MdsType::Interval),
            "ordinal" => Ok(MdsType::Ordinal),
            other => Err(Error::Config(format!(
                "unknown mds_type {other:?}, expected ratio, interval, or ordinal"
            ))),
        }
    }
}

/// Result of classical scaling.
#[derive(Debug, Clone)]
pub struct Cmds {
    /// n×d coordinates.
    pub coords: DMatrix<f64>,
    /// All n eigenvalues of the double-centered matrix, sorted descending.
    pub eigenvalues: Vec<f64>,
    /// True when fewer than d eigenvalues were positive and the remaining
    /// coordinate columns were zero-padded.
    pub padded: bool,
}

/// Classical scaling (Torgerson): double-center the squared dissimilarities,
/// eigendecompose, and scale the top-d eigenvectors by the square roots of
/// their eigenvalues (negative eigenvalues clamped to zero).
///
/// The sign of each eigenvector is fixed by making its largest-magnitude
/// component positive, so the output is deterministic.
pub fn cmds(d: &DMatrix<f64>, dims: usize) -> Result<Cmds> {
    validate_dissimilarity_matrix(d)?;
    let n = d.nrows();
    if dims == 0 {
        return Err(Error::Config("dims must be >= 1".into()));
    }
    if dims > n.saturating_sub(1) {
        return Err(Error::Config(format!(
            "dims={dims} exceeds n-1={} for classical scaling",
            n - 1
        )));
    }

    // B = -1/2 J (D∘D) J with J = I - 11ᵀ/n.
    let mut sq = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            sq[(i, j)] = d[(i, j)] * d[(i, j)];
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand_mean = row_means.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] = -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand_mean);
        }
    }

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    // Eigenvalues within rounding noise of zero count as zero, so rank
    // deficiency (e.g. collinear input) is reported rather than masked by
    // 1e-16-scale numerical residue.
    let rank_tol = eigenvalues[0].max(0.0) * 1e-12;
    let n_positive = eigenvalues
        .iter()
        .take(dims)
        .filter(|&&v| v > rank_tol)
        .count();
    let padded = n_positive < dims;

    let mut coords = DMatrix::zeros(n, dims);
    for (col, &k) in order.iter().take(dims).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= rank_tol {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let mut peak = 0usize;
        for i in 1..n {
            if v[i].abs() > v[peak].abs() {
                peak = i;
            }
        }
        let sign = if v[peak] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * lambda.sqrt();
        for i in 0..n {
            coords[(i, col)] = v[i] * scale;
        }
    }

    Ok(Cmds {
        coords,
        eigenvalues,
        padded,
    })
}

/// Weighted least-squares projection of `y` onto the nondecreasing cone
/// (pool-adjacent-violators). Weights must be positive and the same length
/// as `y`.
pub fn pava(y: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(
        y.len(),
        weights.len(),
        "pava: y and weights must have the same length"
    );
    // Blocks of pooled values, each carrying its weighted mean, total
    // weight, and member count.
    let mut val: Vec<f64> = Vec::with_capacity(y.len());
    let mut wt: Vec<f64> = Vec::with_capacity(y.len());
    let mut len: Vec<usize> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(weights) {
        val.push(yi);
        wt.push(wi);
        len.push(1);
        while val.len() > 1 && val[val.len() - 2] > val[val.len() - 1] {
            let v2 = val.pop().unwrap();
            let w2 = wt.pop().unwrap();
            let l2 = len.pop().unwrap();
            let k = val.len() - 1;
            let merged = wt[k] + w2;
            val[k] = (val[k] * wt[k] + v2 * w2) / merged;
            wt[k] = merged;
            len[k] += l2;
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (v, l) in val.iter().zip(&len) {
        out.extend(std::iter::repeat(*v).take(*l));
    }
    out
}

/// Pairwise Euclidean distances between the rows of `x`.
pub fn map_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let d = x.ncols();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for k in 0..d {
                let diff = x[(i, k)] - x[(j, k)];
                acc += diff * diff;
            }
            let dist = acc.sqrt();
            out[(i, j)] = dist;
            out[(j, i)] = dist;
        }
    }
    out
}

/// Fits disparities δ̂ to the current map distances for one period.
/// `dist` are the map distances, `delta` the input dissimilarities; both
/// n×n symmetric. Returns a symmetric zero-diagonal disparity matrix.
pub fn fit_disparities(
    dist: &DMatrix<f64>,
    delta: &DMatrix<f64>,
    mds_type: MdsType,
) -> Result<DMatrix<f64>> {
    let n = delta.nrows();
    if dist.nrows() != n || dist.ncols() != n || delta.ncols() != n {
        return Err(Error::Config(format!(
            "distance matrix is {}x{}, dissimilarity matrix {}x{}",
            dist.nrows(),
            dist.ncols(),
            n,
            delta.ncols()
        )));
    }
    let mut dhat = DMatrix::zeros(n, n);
    match mds_type {
        MdsType::Ratio => {
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    num += delta[(i, j)] * dist[(i, j)];
                    den += delta[(i, j)] * delta[(i, j)];
                }
            }
            let slope = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = slope * delta[(i, j)];
                    dhat[(i, j)] = v;
                    dhat[(j, i)] = v;
                }
            }
        }
        MdsType::Interval => {
            let m = (n * (n - 1) / 2) as f64;
            let mut sum_d = 0.0;
            let mut sum_x = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    sum_x += delta[(i, j)];
                    sum_d += dist[(i, j)];
                }
            }
            let mean_x = sum_x / m;
            let mean_d = sum_d / m;
            let mut cov = 0.0;
            let mut var = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let dx = delta[(i, j)] - mean_x;
                    cov += dx * (dist[(i, j)] - mean_d);
                    var += dx * dx;
                }
            }
            let slope = if var > 0.0 { cov / var } else { 0.0 };
            let intercept = mean_d - slope * mean_x;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = (intercept + slope * delta[(i, j)]).max(0.0);
                    dhat[(i, j)] = v;
                    dhat[(j, i)] = v;
                }
            }
        }
        MdsType::Ordinal => {
            let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push((i, j));
                }
            }
            // Stable sort by dissimilarity, ties by current distance, so tied
            // deltas resolve deterministically.
            pairs.sort_by(|&(ai, aj), &(bi, bj)| {
                let ka = (delta[(ai, aj)], dist[(ai, aj)]);
                let kb = (delta[(bi, bj)], dist[(bi, bj)]);
                ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
            });
            let ordered: Vec<f64> = pairs.iter().map(|&(i, j)| dist[(i, j)]).collect();
            let fitted = pava(&ordered, &vec![1.0; ordered.len()]);
            for (&(i, j), &v) in pairs.iter().zip(&fitted) {
                let v = v.max(0.0);
                dhat[(i, j)] = v;
                dhat[(j, i)] = v;
            }
        }
    }
    Ok(dhat)
}

/// Normalized stress at fixed disparities:
/// sqrt(Σ_{i<j} (d_ij − δ̂_ij)² / Σ_{i<j} d_ij²).
pub fn stress_at_disparities(dist: &DMatrix<f64>, dhat: &DMatrix<f64>) -> Result<f64> {
    let n = dist.nrows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = dist[(i, j)] - dhat[(i, j)];
            num += diff * diff;
            den += dist[(i, j)] * dist[(i, j)];
        }
    }
    if den == 0.0 {
        return Err(Error::Degenerate(
            "all map distances are zero, stress is undefined".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Gradient of [`stress_at_disparities`] with respect to `x`, holding the
/// disparities fixed. `dist` must be the distances of `x`.
pub fn stress_gradient_at_disparities(
    x: &DMatrix<f64>,
    dist: &DMatrix<f64>,
    dhat: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let d = x.ncols();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = dist[(i, j)] - dhat[(i, j)];
            num += diff * diff;
            den += dist[(i, j)] * dist[(i, j)];
        }
    }
    if den == 0.0 {
        return Err(Error::Degenerate(
            "all map distances are zero, stress is undefined".into(),
        ));
    }
    let mut grad = DMatrix::zeros(n, d);
    if num == 0.0 {
        // Perfect fit; the stress is at its minimum and the (sub)gradient
        // is zero.
        return Ok(grad);
    }
    let stress = (num / den).sqrt();
    let ratio = num / den;
    // dS/dx_i = (1 / (S * den)) * Σ_j [ (d_ij - δ̂_ij)/d_ij - num/den ] (x_i - x_j)
    let scale = 1.0 / (stress * den);
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dist[(i, j)];
            let coeff = if dij > 0.0 {
                ((dij - dhat[(i, j)]) / dij - ratio) * scale
            } else {
                // Coincident points: the distance term has no direction;
                // only the denominator part would contribute, and its
                // factor (x_i - x_j) is zero anyway.
                0.0
            };
            for k in 0..d {
                let diff = x[(i, k)] - x[(j, k)];
                grad[(i, k)] += coeff * diff;
                grad[(j, k)] -= coeff * diff;
            }
        }
    }
    Ok(grad)
}

/// Normalized stress of configuration `x` against dissimilarities `delta`,
/// refitting disparities for the given MDS flavor. Returns the stress and
/// the fitted disparity matrix.
pub fn mds_stress(
    x: &DMatrix<f64>,
    delta: &DMatrix<f64>,
    mds_type: MdsType,
) -> Result<(f64, DMatrix<f64>)> {
    let dist = map_distances(x);
    let dhat = fit_disparities(&dist, delta, mds_type)?;
    let stress = stress_at_disparities(&dist, &dhat)?;
    Ok((stress, dhat))
}

/// Gradient of the normalized stress at `x`: disparities are refreshed
/// from the current distances, then treated as constants (the alternating
/// scheme used by the optimizer).
pub fn mds_gradient(
    x: &DMatrix<f64>,
    delta: &DMatrix<f64>,
    mds_type: MdsType,
) -> Result<DMatrix<f64>> {
    let dist = map_distances(x);
    let dhat = fit_disparities(&dist, delta, mds_type)?;
    stress_gradient_at_disparities(x, &dist, &dhat)
}
