//! Object weights for the temporal penalty.
//!
//! Objects whose dissimilarity profile changes a lot over time get a
//! smaller weight, so the smoothness penalty restrains them less and the
//! map can follow genuine movers while pinning down stable objects.

use crate::error::{Error, Result};
use crate::seq::{DissimilaritySequence, InclusionMask};

/// Per-object temporal-penalty weights `w`, the underlying total change
/// scores `z`, and the normalizing decay rate `b`.
#[derive(Debug, Clone)]
pub struct ObjectWeights {
    /// Weight per object, `w_i = exp(-b * z_i)`, in (0, 1].
    pub w: Vec<f64>,
    /// Total squared change in object i's dissimilarity row across
    /// consecutive periods.
    pub z: Vec<f64>,
    /// Decay rate, `1 / max_i z_i`, or 0 when nothing changes.
    pub b: f64,
}

impl ObjectWeights {
    /// All-ones weights (z = 0, b = 0) for n objects.
    pub fn uniform(n: usize) -> Self {
        Self {
            w: vec![1.0; n],
            z: vec![0.0; n],
            b: 0.0,
        }
    }

    /// Number of objects covered.
    pub fn len(&self) -> usize {
        self.w.len()
    }

    /// True when no objects are covered.
    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Computes object weights from the change in each object's dissimilarity
/// row between consecutive periods:
///
/// z_i = Σ_t ‖D_{i,·,t} − D_{i,·,t−1}‖², b = 1/max_i z_i, w_i = exp(−b·z_i).
///
/// With a mask, a transition t−1→t contributes to z_i only when object i
/// is included in both periods, and the row difference runs only over
/// columns j included in both periods. When every z_i is zero the weights
/// degenerate to all ones with b = 0.
pub fn compute_object_weights(
    d: &DissimilaritySequence,
    mask: Option<&InclusionMask>,
) -> Result<ObjectWeights> {
    let t_count = d.n_periods();
    let n = d.n_objects();
    if t_count < 2 {
        return Err(Error::Data(
            "object weights require at least 2 periods".into(),
        ));
    }
    if let Some(m) = mask {
        m.check_shape(t_count, n)?;
    }

    let mut z = vec![0.0; n];
    for t in 1..t_count {
        let prev = &d.matrices()[t - 1];
        let cur = &d.matrices()[t];
        for i in 0..n {
            if let Some(m) = mask {
                if !(m.is_included(t - 1, i) && m.is_included(t, i)) {
                    continue;
                }
            }
            let mut acc = 0.0;
            for j in 0..n {
                if let Some(m) = mask {
                    if !(m.is_included(t - 1, j) && m.is_included(t, j)) {
                        continue;
                    }
                }
                let diff = cur[(i, j)] - prev[(i, j)];
                acc += diff * diff;
            }
            z[i] += acc;
        }
    }

    let z_max = z.iter().cloned().fold(0.0, f64::max);
    if z_max == 0.0 {
        return Ok(ObjectWeights {
            w: vec![1.0; n],
            z,
            b: 0.0,
        });
    }
    let b = 1.0 / z_max;
    let w = z.iter().map(|&zi| (-b * zi).exp()).collect();
    Ok(ObjectWeights { w, z, b })
}
