//! Sammon mapping: a nonlinear stress that emphasizes small
//! dissimilarities by dividing each residual by its input dissimilarity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::methods::mds::map_distances;
use crate::seq::validate_dissimilarity_matrix;

pub(crate) fn check_positive_offdiag(delta: &DMatrix<f64>) -> Result<f64> {
    validate_dissimilarity_matrix(delta)?;
    let n = delta.nrows();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if delta[(i, j)] <= 0.0 {
                return Err(Error::Domain(format!(
                    "sammon requires positive off-diagonal dissimilarities, found {} at ({i}, {j})",
                    delta[(i, j)]
                )));
            }
            total += delta[(i, j)];
        }
    }
    Ok(total)
}

/// Sammon stress: (1/Σ_{i<j} δ_ij) Σ_{i<j} (d_ij − δ_ij)² / δ_ij.
pub fn sammon_cost(x: &DMatrix<f64>, delta: &DMatrix<f64>) -> Result<f64> {
    let total = check_positive_offdiag(delta)?;
    let n = x.nrows();
    if n != delta.nrows() {
        return Err(Error::Config(format!(
            "configuration has {n} rows, dissimilarity matrix {}",
            delta.nrows()
        )));
    }
    let dist = map_distances(x);
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = dist[(i, j)] - delta[(i, j)];
            acc += diff * diff / delta[(i, j)];
        }
    }
    Ok(acc / total)
}

/// Analytic gradient of [`sammon_cost`] with respect to `x`.
pub fn sammon_gradient(x: &DMatrix<f64>, delta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let total = check_positive_offdiag(delta)?;
    let n = x.nrows();
    let d = x.ncols();
    if n != delta.nrows() {
        return Err(Error::Config(format!(
            "configuration has {n} rows, dissimilarity matrix {}",
            delta.nrows()
        )));
    }
    let dist = map_distances(x);
    let mut grad = DMatrix::zeros(n, d);
    let scale = 2.0 / total;
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dist[(i, j)];
            if dij == 0.0 {
                // Coincident points sit at a kink of ‖·‖; use the zero
                // subgradient.
                continue;
            }
            let coeff = scale * (dij - delta[(i, j)]) / (delta[(i, j)] * dij);
            for k in 0..d {
                let diff = x[(i, k)] - x[(j, k)];
                grad[(i, k)] += coeff * diff;
                grad[(j, k)] -= coeff * diff;
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist_matrix_of(points: &[(f64, f64)]) -> DMatrix<f64> {
        let n = points.len();
        DMatrix::from_fn(n, n, |i, j| {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            (dx * dx + dy * dy).sqrt()
        })
    }

    #[test]
    fn perfect_embedding_costs_zero() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (3.0, 1.0)];
        let x = DMatrix::from_fn(4, 2, |i, k| if k == 0 { pts[i].0 } else { pts[i].1 });
        let delta = dist_matrix_of(&pts);
        assert!(sammon_cost(&x, &delta).unwrap() < 1e-15);
        let grad = sammon_gradient(&x, &delta).unwrap();
        assert!(grad.iter().all(|&g| g.abs() < 1e-15));
    }

    #[test]
    fn joint_scaling_leaves_cost_unchanged() {
        let pts = [(0.2, -0.5), (1.3, 0.4), (-0.9, 2.1), (2.4, 1.0)];
        let x = DMatrix::from_fn(4, 2, |i, k| if k == 0 { pts[i].0 } else { pts[i].1 });
        let delta = dist_matrix_of(&[(0.0, 0.0), (2.0, 1.0), (1.0, -1.0), (3.0, 2.0)]);
        let c1 = sammon_cost(&x, &delta).unwrap();
        let c2 = sammon_cost(&(&x * 3.5), &(&delta * 3.5)).unwrap();
        assert!((c1 - c2).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_offdiagonal_delta() {
        let x = DMatrix::zeros(3, 2);
        let delta = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            sammon_cost(&x, &delta).unwrap_err(),
            Error::Domain(_)
        ));
    }
}
