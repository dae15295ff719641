//! Randomized cross-module invariants: finite-difference agreement of the
//! joint gradient on arbitrary instances, the stress range guarantee, and
//! the qualitative effect of the smoothing weight on fitted sequences.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dynamap_core::methods::mds::{map_distances, mds_stress};
use dynamap_core::metrics::{misalign_score, MisalignAggregate};
use dynamap_core::sim::tech_firms_standin;
use dynamap_core::{
    fit, total_cost, total_gradient, ConfigurationSequence, DissimilaritySequence, FitSpec,
    MdsType, Method, OptimizerSettings,
};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("o{i}")).collect()
}

fn periods(t: usize) -> Vec<String> {
    (0..t).map(|i| format!("t{i}")).collect()
}

fn random_diss(rng: &mut ChaCha8Rng, t: usize, n: usize) -> DissimilaritySequence {
    let mats: Vec<DMatrix<f64>> = (0..t)
        .map(|_| {
            let x = DMatrix::from_fn(n, 2, |_, _| 2.0 * (rng.random::<f64>() - 0.5));
            let mut d = map_distances(&x);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = (d[(i, j)] + 0.3 * rng.random::<f64>()).max(1e-3);
                    d[(i, j)] = v;
                    d[(j, i)] = v;
                }
            }
            d
        })
        .collect();
    DissimilaritySequence::new(mats, labels(n), periods(t)).unwrap()
}

fn random_config(rng: &mut ChaCha8Rng, t: usize, n: usize) -> ConfigurationSequence {
    let maps = (0..t)
        .map(|_| DMatrix::from_fn(n, 2, |_, _| 2.0 * (rng.random::<f64>() - 0.5)))
        .collect();
    ConfigurationSequence::new(maps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 16,
        ..ProptestConfig::default()
    })]

    /// The analytic joint gradient agrees with central finite differences
    /// (h = 1e-5) within 1e-5 relative error on arbitrary instances.
    #[test]
    fn total_gradient_matches_finite_differences(
        seed in 0u64..10_000,
        t in 2usize..5,
        n in 3usize..7,
        alpha in 0.0f64..1.5,
        p_raw in 1usize..4,
    ) {
        let p = p_raw.min(t - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_diss(&mut rng, t, n);
        let x = random_config(&mut rng, t, n);
        let spec = FitSpec::new(Method::Mds { mds_type: MdsType::Ratio }, alpha, p, 2).unwrap();

        let analytic: Vec<f64> = total_gradient(&x, &d, &spec, None)
            .unwrap()
            .iter()
            .flat_map(|m| m.iter().copied())
            .collect();

        let h = 1e-5;
        let mut fd = Vec::with_capacity(analytic.len());
        for t_idx in 0..t {
            for entry in 0..n * 2 {
                let mut plus = x.maps().to_vec();
                let mut minus = x.maps().to_vec();
                plus[t_idx].as_mut_slice()[entry] += h;
                minus[t_idx].as_mut_slice()[entry] -= h;
                let cp = total_cost(
                    &ConfigurationSequence::new(plus).unwrap(), &d, &spec, None,
                ).unwrap();
                let cm = total_cost(
                    &ConfigurationSequence::new(minus).unwrap(), &d, &spec, None,
                ).unwrap();
                fd.push((cp - cm) / (2.0 * h));
            }
        }

        let diff: f64 = analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = diff / norm.max(1e-12);
        prop_assert!(rel <= 1e-5, "relative gradient error {rel:.3e} exceeds 1e-5");
    }

    /// Normalized stress stays in [0, 1] for the ratio and ordinal flavors
    /// on arbitrary configurations and dissimilarities.
    #[test]
    fn normalized_stress_stays_in_unit_interval(
        seed in 0u64..10_000,
        n in 3usize..9,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_diss(&mut rng, 1, n);
        let x = random_config(&mut rng, 1, n);
        for mds_type in [MdsType::Ratio, MdsType::Ordinal] {
            let (stress, _) = mds_stress(&x.maps()[0], &d.matrices()[0], mds_type).unwrap();
            prop_assert!(
                (0.0..=1.0).contains(&stress),
                "{mds_type:?} stress {stress} left [0, 1]"
            );
        }
    }
}

/// Spearman rank correlation for strictly increasing x against y, no ties
/// expected in practice.
fn spearman(y: &[f64]) -> f64 {
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap());
    let mut rank = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos as f64;
    }
    let d_sq: f64 = rank
        .iter()
        .enumerate()
        .map(|(i, &r)| (r - i as f64) * (r - i as f64))
        .sum();
    1.0 - 6.0 * d_sq / (n as f64 * (n as f64 * n as f64 - 1.0))
}

/// Raising the smoothing weight on fixed-init panel data weakly reduces
/// the misalignment of the fitted sequence (negative rank correlation over
/// the alpha grid).
#[test]
fn misalignment_weakly_decreases_in_alpha() {
    let (d, _) = tech_firms_standin(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let init = random_config(&mut rng, d.n_periods(), d.n_objects());

    let alphas = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];
    let mut scores = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let spec = FitSpec::new(Method::Mds { mds_type: MdsType::Ratio }, alpha, 1, 2).unwrap();
        let settings = OptimizerSettings {
            n_iter: 1000,
            init: Some(init.clone()),
            ..OptimizerSettings::default()
        };
        let result = fit(&d, &spec, &settings, None).unwrap();
        scores.push(misalign_score(&result.coords, None, MisalignAggregate::Mean).unwrap());
    }

    let rho = spearman(&scores);
    assert!(
        rho < 0.0,
        "misalignment should trend down in alpha; scores {scores:?} give rho {rho:.3}"
    );
    assert!(
        scores[alphas.len() - 1] < scores[0],
        "misalign at alpha=4 ({:.4}) should be below alpha=0 ({:.4})",
        scores[alphas.len() - 1],
        scores[0]
    );
}
