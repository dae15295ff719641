//! t-SNE on dissimilarity input: joint probability construction with
//! per-row bandwidth calibration, the KL cost against a Student-t map
//! distribution, and its analytic gradient.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::seq::validate_dissimilarity_matrix;

/// Probabilities below this floor are clamped to keep logs finite.
pub const P_FLOOR: f64 = 1e-12;

/// Entropy tolerance for the per-row bandwidth search.
const ENTROPY_TOL: f64 = 1e-5;

/// Maximum bisection steps per row.
const MAX_SEARCH_ITER: usize = 50;

/// Joint probability matrix for one period, plus a count of rows whose
/// bandwidth search did not converge (their precision was left at the
/// final bracket midpoint).
#[derive(Debug, Clone)]
pub struct PMatrix {
    /// Symmetric joint probabilities, zero diagonal, off-diagonal entries
    /// clamped to at least [`P_FLOOR`].
    pub p: DMatrix<f64>,
    /// Number of rows where the entropy target was not met.
    pub bandwidth_warnings: usize,
}

/// Builds the joint probability matrix from a dissimilarity matrix.
///
/// Each row's Gaussian precision β_i = 1/(2σ_i²) is found by bisection so
/// that the conditional distribution p_{·|i} has entropy log(perplexity),
/// within 1e-5 or 50 iterations. Conditionals are then symmetrized,
/// P = (P_{j|i} + P_{i|j}) / (2n), and clamped at 1e-12.
pub fn tsne_p_matrix(delta: &DMatrix<f64>, perplexity: f64) -> Result<PMatrix> {
    validate_dissimilarity_matrix(delta)?;
    let n = delta.nrows();
    if !perplexity.is_finite() || perplexity <= 0.0 {
        return Err(Error::Config(format!(
            "perplexity must be positive, got {perplexity}"
        )));
    }
    if perplexity >= n as f64 {
        return Err(Error::Config(format!(
            "perplexity {perplexity} must be below the number of objects {n}"
        )));
    }
    let target_entropy = perplexity.ln();

    let mut cond = DMatrix::zeros(n, n);
    let mut warnings = 0usize;
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Squared dissimilarities to every other object, shifted by their
        // minimum; the shift cancels in both the normalization and the
        // entropy, and keeps the exponentials from underflowing en masse.
        let mut sq = vec![0.0; n];
        let mut sq_min = f64::INFINITY;
        for j in 0..n {
            if j != i {
                sq[j] = delta[(i, j)] * delta[(i, j)];
                sq_min = sq_min.min(sq[j]);
            }
        }

        let mut beta = 1.0;
        let mut beta_lo = f64::NEG_INFINITY;
        let mut beta_hi = f64::INFINITY;
        let mut converged = false;
        for _ in 0..MAX_SEARCH_ITER {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                if j != i {
                    let w = (-(sq[j] - sq_min) * beta).exp();
                    weights[j] = w;
                    sum += w;
                    weighted += (sq[j] - sq_min) * w;
                }
            }
            let entropy = sum.ln() + beta * weighted / sum;
            let diff = entropy - target_entropy;
            if diff.abs() < ENTROPY_TOL {
                converged = true;
                break;
            }
            if diff > 0.0 {
                // Too spread out: sharpen the kernel.
                beta_lo = beta;
                beta = if beta_hi.is_finite() {
                    0.5 * (beta + beta_hi)
                } else {
                    beta * 2.0
                };
            } else {
                beta_hi = beta;
                beta = if beta_lo.is_finite() {
                    0.5 * (beta + beta_lo)
                } else {
                    beta * 0.5
                };
            }
        }
        if !converged {
            warnings += 1;
            // Recompute the weights at the final beta so the row reflects
            // the clamped bandwidth.
            for j in 0..n {
                if j != i {
                    weights[j] = (-(sq[j] - sq_min) * beta).exp();
                }
            }
        }
        let sum: f64 = (0..n).filter(|&j| j != i).map(|j| weights[j]).sum();
        for j in 0..n {
            if j != i {
                cond[(i, j)] = weights[j] / sum;
            }
        }
    }

    let mut p = DMatrix::zeros(n, n);
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[(i, j)] = ((cond[(i, j)] + cond[(j, i)]) / denom).max(P_FLOOR);
            }
        }
    }
    Ok(PMatrix {
        p,
        bandwidth_warnings: warnings,
    })
}

fn student_t_weights(x: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = x.nrows();
    let d = x.ncols();
    let mut w = DMatrix::zeros(n, n);
    let mut z = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sq = 0.0;
            for k in 0..d {
                let diff = x[(i, k)] - x[(j, k)];
                sq += diff * diff;
            }
            let v = 1.0 / (1.0 + sq);
            w[(i, j)] = v;
            w[(j, i)] = v;
            z += 2.0 * v;
        }
    }
    (w, z)
}

fn check_p_shape(x: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<()> {
    if p.nrows() != x.nrows() || p.ncols() != x.nrows() {
        return Err(Error::Config(format!(
            "probability matrix is {}x{}, expected {}x{}",
            p.nrows(),
            p.ncols(),
            x.nrows(),
            x.nrows()
        )));
    }
    Ok(())
}

/// KL divergence between `p` and the Student-t map distribution of `x`.
pub fn tsne_cost(x: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<f64> {
    check_p_shape(x, p)?;
    let n = x.nrows();
    let (w, z) = student_t_weights(x);
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && p[(i, j)] > 0.0 {
                let q = (w[(i, j)] / z).max(P_FLOOR);
                kl += p[(i, j)] * (p[(i, j)] / q).ln();
            }
        }
    }
    Ok(kl)
}

/// Analytic gradient of [`tsne_cost`] with respect to `x`:
/// 4 Σ_j (p_ij − q_ij) (1 + ‖x_i − x_j‖²)^{−1} (x_i − x_j).
pub fn tsne_gradient(x: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_p_shape(x, p)?;
    let n = x.nrows();
    let d = x.ncols();
    let (w, z) = student_t_weights(x);
    let mut grad = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in (i + 1)..n {
            let q = w[(i, j)] / z;
            let coeff = 4.0 * (p[(i, j)] - q) * w[(i, j)];
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

    fn equidistant_three() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn conditionals_normalize_and_symmetrize() {
        let delta = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.5, 1.0, 2.0, 0.5, 0.0, 0.7, 1.5, 1.0, 0.7, 0.0, 0.9, 2.0, 1.5, 0.9, 0.0,
            ],
        );
        let pm = tsne_p_matrix(&delta, 2.0).unwrap();
        let mass: f64 = pm.p.iter().sum();
        assert!((mass - 1.0).abs() < 1e-9);
        for i in 0..4 {
            assert_eq!(pm.p[(i, i)], 0.0);
            for j in 0..4 {
                assert!((pm.p[(i, j)] - pm.p[(j, i)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn equidistant_points_give_uniform_p() {
        let pm = tsne_p_matrix(&equidistant_three(), 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((pm.p[(i, j)] - 1.0 / 6.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_perplexity_at_or_above_n() {
        assert!(tsne_p_matrix(&equidistant_three(), 3.0).is_err());
        assert!(tsne_p_matrix(&equidistant_three(), 0.0).is_err());
    }

    #[test]
    fn kl_zero_when_q_matches_p() {
        // Three equidistant map points produce a uniform Q; pair it with the
        // uniform P from equidistant input.
        let x = DMatrix::from_row_slice(
            3,
            2,
            &[0.0, 0.0, 1.0, 0.0, 0.5, 0.75f64.sqrt()],
        );
        let pm = tsne_p_matrix(&equidistant_three(), 2.0).unwrap();
        let kl = tsne_cost(&x, &pm.p).unwrap();
        assert!(kl.abs() < 1e-12);
    }

    #[test]
    fn kl_nonnegative_on_random_instances() {
        let delta = DMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                0.0
            } else {
                let (a, b) = (i.min(j) as f64, i.max(j) as f64);
                (a * 1.3 + b * 0.7).sin().abs() + 0.2
            }
        });
        let pm = tsne_p_matrix(&delta, 3.0).unwrap();
        let x = DMatrix::from_fn(5, 2, |i, k| ((i * 2 + k) as f64 * 0.917).cos());
        assert!(tsne_cost(&x, &pm.p).unwrap() >= 0.0);
    }
}
