//! Property suite for the POD + GP surrogate: SVD reconstruction and energy
//! identities, GP interpolation quality against dense linear-algebra oracles,
//! and invariance of predictions under snapshot reordering.

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rivuq::pgp::{
    gp_fit_mode, pod_decompose, sq_exp_kernel, GpConfig, PgpSurrogate, SnapshotSet,
};
use rivuq::sampling::{halton_design, InputSpace, Marginal};

fn toy_space() -> InputSpace {
    InputSpace::new(vec![
        Marginal::Uniform { lower: 3000.0, upper: 5000.0 },
        Marginal::Uniform { lower: 15.0, upper: 60.0 },
    ])
    .unwrap()
}

/// Smooth synthetic stand-in for the station response map, 14 outputs.
fn smooth_model(x: &[f64]) -> Vec<f64> {
    let q = (x[0] - 3000.0) / 2000.0;
    let k = (x[1] - 15.0) / 45.0;
    (0..14)
        .map(|a| {
            let s = a as f64 / 13.0;
            10.0 - 6.0 * s + 2.0 * q * (1.0 + 0.5 * s) - 1.5 * k * s
                + 0.8 * (2.0 * q - k).tanh() * (3.0 * s).sin()
        })
        .collect()
}

fn snapshot_set(n: usize) -> SnapshotSet {
    let space = toy_space();
    let design = halton_design(&space, n).unwrap();
    let inputs = DMatrix::from_fn(n, 2, |k, j| design[k][j]);
    let outputs = DMatrix::from_fn(n, 14, |k, a| smooth_model(&design[k])[a]);
    SnapshotSet::new(inputs, outputs).unwrap()
}

#[test]
fn svd_reconstruction_and_energy_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let inputs = DMatrix::from_fn(121, 2, |k, j| k as f64 + 0.1 * j as f64);
    let outputs = DMatrix::from_fn(121, 14, |_, _| rng.random_range(-2.0..2.0));
    let set = SnapshotSet::new(inputs, outputs).unwrap();
    let basis = pod_decompose(&set);

    let centred = set.centred_transposed();
    let rebuilt = basis.reconstruct();
    let err = (&centred - &rebuilt).norm() / centred.norm();
    assert!(err < 1e-12, "reconstruction error {err}");

    // Mode orthogonality U^T U = I.
    let u = basis.spatial_modes();
    let gram = u.transpose() * u;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((gram[(i, j)] - expected).abs() < 1e-10);
        }
    }

    // Energy identity: sum of squared singular values equals ||Y||_F^2.
    let energy: f64 = basis.singular_values().iter().map(|&s| s * s).sum();
    assert_relative_eq!(energy, centred.norm_squared(), max_relative = 1e-10);

    // Descending spectrum.
    let sv = basis.singular_values();
    for i in 1..sv.len() {
        assert!(sv[i] <= sv[i - 1] + 1e-12);
    }
}

#[test]
fn leave_one_out_error_on_sine_data_is_small() {
    // 12 points of sin(2 pi x) on [0, 1]; both the MLE fit and a fixed-grid
    // length-scale oracle must interpolate the held-out point well.
    let n = 12;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (2.0 * std::f64::consts::PI * x).sin()).collect();

    // Dense linear-algebra oracle: grid search over the length scale with
    // a fixed small nugget, solving the kernel system directly.
    let oracle_loo = |held: usize| -> f64 {
        let mut best = f64::INFINITY;
        for &ell in &[0.1, 0.15, 0.2, 0.3, 0.4] {
            let idx: Vec<usize> = (0..n).filter(|&i| i != held).collect();
            let m = idx.len();
            let mut k = DMatrix::zeros(m, m);
            for a in 0..m {
                for b in 0..m {
                    k[(a, b)] = sq_exp_kernel(&[xs[idx[a]]], &[xs[idx[b]]], ell);
                }
                k[(a, a)] += 1e-10;
            }
            let y = DVector::from_fn(m, |a, _| ys[idx[a]]);
            let alpha = k.lu().solve(&y).unwrap();
            let pred: f64 = (0..m)
                .map(|a| alpha[a] * sq_exp_kernel(&[xs[held]], &[xs[idx[a]]], ell))
                .sum();
            best = best.min((pred - ys[held]).abs());
        }
        best
    };

    let config = GpConfig::default();
    let mut worst_fit: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for held in 0..n {
        let idx: Vec<usize> = (0..n).filter(|&i| i != held).collect();
        let inputs = DMatrix::from_fn(idx.len(), 1, |a, _| xs[idx[a]]);
        let targets = DVector::from_fn(idx.len(), |a, _| ys[idx[a]]);
        let mode = gp_fit_mode(&inputs, &targets, &config).unwrap();
        let pred = mode.predict(&[xs[held]]);
        worst_fit = worst_fit.max((pred - ys[held]).abs());
        worst_oracle = worst_oracle.max(oracle_loo(held));
    }
    println!("LOO max abs error: fit {worst_fit:.4}, oracle {worst_oracle:.4}");
    assert!(worst_oracle < 0.05);
    assert!(worst_fit < 0.05, "leave-one-out error {worst_fit}");
}

#[test]
fn linear_model_is_reproduced_on_the_design_box() {
    // Model replaced by a linear map h = B x: the GP interpolates it closely
    // inside the box.
    let space = toy_space();
    let n = 121;
    let design = halton_design(&space, n).unwrap();
    let b = [
        [1.5e-3, -0.04],
        [0.7e-3, 0.02],
        [-0.4e-3, -0.05],
    ];
    let linear = |x: &[f64]| -> Vec<f64> {
        b.iter()
            .map(|row| 4.0 + row[0] * x[0] + row[1] * x[1])
            .collect()
    };
    let inputs = DMatrix::from_fn(n, 2, |k, j| design[k][j]);
    let outputs = DMatrix::from_fn(n, 3, |k, a| linear(&design[k])[a]);
    let set = SnapshotSet::new(inputs, outputs).unwrap();
    let surrogate =
        PgpSurrogate::fit(&set, space.design_bounds(), &GpConfig::default()).unwrap();

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..100 {
        let x = [
            rng.random_range(3000.0..5000.0),
            rng.random_range(15.0..60.0),
        ];
        let predicted = surrogate.eval(&x);
        let truth = linear(&x);
        for (p, t) in predicted.iter().zip(&truth) {
            assert!(
                (p - t).abs() <= 1e-2 * t.abs().max(1.0),
                "linear map not reproduced at {x:?}: {p} vs {t}"
            );
        }
    }
}

#[test]
fn training_points_are_reproduced_within_interpolation_tolerance() {
    let set = snapshot_set(121);
    let space = toy_space();
    let surrogate =
        PgpSurrogate::fit(&set, space.design_bounds(), &GpConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..set.len() {
        let x: Vec<f64> = set.inputs().row(k).iter().copied().collect();
        let predicted = surrogate.eval(&x);
        for a in 0..set.output_dimension() {
            worst = worst.max((predicted[a] - set.outputs()[(k, a)]).abs());
        }
    }
    println!("max training-point error: {worst:.3e}");
    assert!(worst < 1e-3, "training reproduction error {worst}");
}

#[test]
fn identical_snapshots_predict_the_mean_everywhere() {
    let inputs = DMatrix::from_fn(8, 2, |k, j| (k + j) as f64);
    let outputs = DMatrix::from_fn(8, 5, |_, a| 2.0 + a as f64);
    let set = SnapshotSet::new(inputs, outputs).unwrap();
    let surrogate = PgpSurrogate::fit(
        &set,
        &[(0.0, 9.0), (0.0, 9.0)],
        &GpConfig::default(),
    )
    .unwrap();
    let predicted = surrogate.eval(&[4.5, 4.5]);
    for (a, &p) in predicted.iter().enumerate() {
        assert_relative_eq!(p, 2.0 + a as f64, max_relative = 1e-12);
    }
}

#[test]
fn predictions_are_invariant_under_snapshot_permutation() {
    let set = snapshot_set(60);
    let space = toy_space();
    let config = GpConfig::default();
    let surrogate = PgpSurrogate::fit(&set, space.design_bounds(), &config).unwrap();

    // Reverse the snapshot order.
    let n = set.len();
    let inputs = DMatrix::from_fn(n, 2, |k, j| set.inputs()[(n - 1 - k, j)]);
    let outputs = DMatrix::from_fn(n, 14, |k, a| set.outputs()[(n - 1 - k, a)]);
    let permuted_set = SnapshotSet::new(inputs, outputs).unwrap();
    let permuted = PgpSurrogate::fit(&permuted_set, space.design_bounds(), &config).unwrap();

    let mut rng = ChaCha12Rng::seed_from_u64(31);
    for _ in 0..25 {
        let x = [
            rng.random_range(3000.0..5000.0),
            rng.random_range(15.0..60.0),
        ];
        let a = surrogate.eval(&x);
        let b = permuted.eval(&x);
        for (va, vb) in a.iter().zip(&b) {
            assert!(
                (va - vb).abs() < 1e-8,
                "permutation changed prediction at {x:?}: {va} vs {vb}"
            );
        }
    }
}

#[test]
fn surrogate_round_trips_through_json() {
    let set = snapshot_set(40);
    let space = toy_space();
    let surrogate =
        PgpSurrogate::fit(&set, space.design_bounds(), &GpConfig::default()).unwrap();
    let restored = PgpSurrogate::from_json(&surrogate.to_json()).unwrap();
    let x = [4100.0, 33.0];
    let a = surrogate.eval(&x);
    let b = restored.eval(&x);
    for (va, vb) in a.iter().zip(&b) {
        assert_relative_eq!(va, vb, max_relative = 1e-14);
    }
    let csv = surrogate.spectrum_csv();
    assert!(csv.starts_with("mode,singular_value\n"));
    assert_eq!(csv.lines().count(), 1 + surrogate.singular_values().len());
}
