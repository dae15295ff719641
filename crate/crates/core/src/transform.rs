//! Procrustes alignment of configurations and configuration sequences.
//!
//! Fitted maps are only determined up to rotation, reflection, translation,
//! and (depending on the method) scale. This module recovers the optimal
//! similarity transform between two configurations, applies it to whole
//! sequences (either map-by-map or as one fixed transform), and measures the
//! shape difference that remains after the optimal alignment.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::seq::ConfigurationSequence;

/// How [`align_maps`] applies the alignment across a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignMode {
    /// Align every map independently to the reference.
    PerMap,
    /// Fit one transform from the first map to the reference and apply that
    /// same transform to every map, preserving inter-period geometry.
    Fixed,
}

/// A similarity transform `x ↦ scale · rotationᵀ x + translation` mapping a
/// source configuration onto a target (points stored as matrix rows).
#[derive(Debug, Clone)]
pub struct ProcrustesTransform {
    rotation: DMatrix<f64>,
    scale: f64,
    translation: DVector<f64>,
}

impl ProcrustesTransform {
    /// The d×d orthogonal rotation (or reflection, when its determinant is
    /// negative).
    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    /// The uniform scale factor (1 when scaling was not requested).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The translation applied after rotation and scaling.
    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    /// Applies the transform to each row of `x`.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x * &self.rotation;
        out *= self.scale;
        for i in 0..out.nrows() {
            for c in 0..out.ncols() {
                out[(i, c)] += self.translation[c];
            }
        }
        out
    }
}

fn center(x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = x.nrows() as f64;
    let mean = DVector::from_fn(x.ncols(), |c, _| x.column(c).sum() / n);
    let mut centered = x.clone();
    for i in 0..centered.nrows() {
        for c in 0..centered.ncols() {
            centered[(i, c)] -= mean[c];
        }
    }
    (centered, mean)
}

fn check_same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Data(format!(
            "configurations must share a shape, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Data("configurations must be non-empty".into()));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Data("configurations must be finite".into()));
    }
    Ok(())
}

/// Fits the similarity transform (orthogonal rotation/reflection, optional
/// uniform scale, translation) minimizing `‖transform(source) − target‖_F`
/// in the least-squares sense. Reflections are permitted: the rotation is
/// `U·Vᵀ` from the SVD of the centered cross-covariance without a
/// determinant correction.
pub fn procrustes_fit(
    source: &DMatrix<f64>,
    target: &DMatrix<f64>,
    allow_scaling: bool,
) -> Result<ProcrustesTransform> {
    check_same_shape(source, target)?;
    let d = source.ncols();
    let (xc, x_mean) = center(source);
    let (yc, y_mean) = center(target);
    if yc.norm() == 0.0 {
        return Err(Error::Domain(
            "target configuration is degenerate (all points identical)".into(),
        ));
    }

    let source_norm_sq = xc.iter().map(|v| v * v).sum::<f64>();
    if source_norm_sq == 0.0 {
        // A collapsed source carries no shape: the best any rotation or
        // scale can do is move its single location onto the target mean.
        return Ok(ProcrustesTransform {
            rotation: DMatrix::identity(d, d),
            scale: 1.0,
            translation: y_mean - x_mean,
        });
    }

    let cross = xc.transpose() * &yc;
    let svd = cross.svd(true, true);
    let u = svd.u.expect("SVD with vectors requested");
    let v_t = svd.v_t.expect("SVD with vectors requested");
    let rotation = u * v_t;
    let trace_sigma: f64 = svd.singular_values.iter().sum();

    let scale = if allow_scaling {
        let s = trace_sigma / source_norm_sq;
        if s <= 0.0 {
            return Err(Error::Degenerate(
                "optimal scale is not positive: the configurations share no aligned shape".into(),
            ));
        }
        s
    } else {
        1.0
    };

    let translation = y_mean - (rotation.transpose() * x_mean) * scale;
    Ok(ProcrustesTransform {
        rotation,
        scale,
        translation,
    })
}

/// Aligns a configuration sequence to a single reference map.
///
/// `PerMap` fits and applies a separate transform for every period;
/// `Fixed` fits one transform from the first map and applies it to every
/// period, so within-sequence geometry is preserved exactly up to the
/// common similarity transform. Scaling is part of the fitted transforms
/// only when `allow_scaling` is set; otherwise alignment is rigid
/// (rotation/reflection plus translation).
pub fn align_maps(
    x: &ConfigurationSequence,
    reference: &DMatrix<f64>,
    mode: AlignMode,
    allow_scaling: bool,
) -> Result<ConfigurationSequence> {
    if reference.nrows() != x.n_objects() || reference.ncols() != x.dims() {
        return Err(Error::Data(format!(
            "reference is {}x{}, expected {}x{}",
            reference.nrows(),
            reference.ncols(),
            x.n_objects(),
            x.dims()
        )));
    }
    let aligned = match mode {
        AlignMode::PerMap => x
            .maps()
            .iter()
            .map(|m| Ok(procrustes_fit(m, reference, allow_scaling)?.apply(m)))
            .collect::<Result<Vec<_>>>()?,
        AlignMode::Fixed => {
            let transform = procrustes_fit(&x.maps()[0], reference, allow_scaling)?;
            x.maps().iter().map(|m| transform.apply(m)).collect()
        }
    };
    ConfigurationSequence::new(aligned)
}

/// Shape distance between two configurations: both are centered and scaled
/// to unit Frobenius norm, then optimally rotated/reflected onto each other;
/// the returned residual sum of squares lies in [0, 1] and is zero exactly
/// when the configurations are similarity-equivalent.
pub fn procrustes_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(a, b)?;
    let (ac, _) = center(a);
    let (bc, _) = center(b);
    let an = ac.norm();
    let bn = bc.norm();
    if an == 0.0 || bn == 0.0 {
        return Err(Error::Domain(
            "degenerate configuration (all points identical) has no shape distance".into(),
        ));
    }
    let cross = (ac / an).transpose() * (bc / bn);
    let trace_sigma: f64 = cross.svd(false, false).singular_values.iter().sum();
    Ok((1.0 - trace_sigma * trace_sigma).max(0.0))
}
