//! POD-based Gaussian-process surrogate.
//!
//! Snapshots of the forward model are centred and decomposed with the
//! snapshot-POD (an SVD of the centred snapshot matrix); every mode amplitude
//! is then generalized to unseen inputs by an independent Gaussian-process
//! regressor with a squared-exponential kernel. Predictions recombine the
//! spatial modes with the GP mode amplitudes and re-add the snapshot mean.

mod gp;
mod pod;

pub use gp::{
    gp_fit_mode, log_marginal_likelihood, log_marginal_value, sq_exp_kernel, squared_distances,
    GpConfig, GpHyperParams, GpMode,
};
pub use pod::{pod_decompose, svd_descending, PodBasis, SnapshotSet};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgpError {
    #[error("snapshot set needs at least {need} rows, got {got}")]
    TooFewSnapshots { need: usize, got: usize },
    #[error("snapshot inputs contain duplicate rows ({0} and {1})")]
    DuplicateInputs(usize, usize),
    #[error("non-finite snapshot data")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("GP fit failed for mode(s) {modes:?}: {message}")]
    FitFailure { modes: Vec<usize>, message: String },
    #[error("Cholesky factorization failed even with jitter {jitter:.2e} (n = {size})")]
    CholeskyFailure { jitter: f64, size: usize },
    #[error("surrogate file is inconsistent: {0}")]
    InvalidFile(String),
}

/// Fitted POD + GP surrogate: spatial modes, per-mode GP regressors and the
/// affine map taking physical inputs to the unit box the kernels live on.
#[derive(Clone, Debug)]
pub struct PgpSurrogate {
    mean: DVector<f64>,
    singular_values: Vec<f64>,
    spatial_modes: DMatrix<f64>,
    modes: Vec<GpMode>,
    input_bounds: Vec<(f64, f64)>,
    design: Vec<Vec<f64>>,
}

impl PgpSurrogate {
    /// POD of the snapshots followed by one GP fit per retained mode (all
    /// `min(M, N)` modes are kept). Mode fits run in parallel; failures are
    /// aggregated per mode.
    pub fn fit(
        snapshots: &SnapshotSet,
        input_bounds: &[(f64, f64)],
        config: &GpConfig,
    ) -> Result<Self, PgpError> {
        if input_bounds.len() != snapshots.input_dimension() {
            return Err(PgpError::DimensionMismatch(format!(
                "{} input bounds for dimension {}",
                input_bounds.len(),
                snapshots.input_dimension()
            )));
        }
        let basis = pod_decompose(snapshots);
        let standardized = standardize_inputs(snapshots.inputs(), input_bounds);

        let rank = basis.rank();
        let fits: Vec<Result<GpMode, PgpError>> = (0..rank)
            .into_par_iter()
            .map(|mode| {
                let targets = DVector::from_fn(snapshots.len(), |k, _| basis.mode_samples()[(mode, k)]);
                gp::gp_fit_mode(&standardized, &targets, config)
            })
            .collect();

        let mut modes = Vec::with_capacity(rank);
        let mut failed = Vec::new();
        let mut message = String::new();
        for (i, fit) in fits.into_iter().enumerate() {
            match fit {
                Ok(mode) => modes.push(mode),
                Err(e) => {
                    failed.push(i);
                    if message.is_empty() {
                        message = e.to_string();
                    }
                }
            }
        }
        if !failed.is_empty() {
            return Err(PgpError::FitFailure {
                modes: failed,
                message,
            });
        }

        Ok(Self {
            mean: basis.mean().clone(),
            singular_values: basis.singular_values().iter().copied().collect(),
            spatial_modes: basis.spatial_modes().clone(),
            modes,
            input_bounds: input_bounds.to_vec(),
            design: (0..snapshots.len())
                .map(|k| snapshots.inputs().row(k).iter().copied().collect())
                .collect(),
        })
    }

    pub fn station_count(&self) -> usize {
        self.mean.len()
    }

    pub fn training_size(&self) -> usize {
        self.design.len()
    }

    pub fn design(&self) -> &[Vec<f64>] {
        &self.design
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn modes(&self) -> &[GpMode] {
        &self.modes
    }

    /// Surrogate water levels at a physical input point:
    /// `h(x) = mean + U psi_gp(x)`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let u = standardize_point(x, &self.input_bounds);
        let amplitudes = DVector::from_fn(self.modes.len(), |i, _| self.modes[i].predict(&u));
        let levels = &self.mean + &self.spatial_modes * amplitudes;
        levels.iter().copied().collect()
    }

    /// Singular-value spectrum as CSV (`mode,singular_value`).
    pub fn spectrum_csv(&self) -> String {
        let mut out = String::from("mode,singular_value\n");
        for (i, sv) in self.singular_values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, sv));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = PgpSurrogateFile {
            design: self.design.clone(),
            input_bounds: self.input_bounds.clone(),
            mean: self.mean.iter().copied().collect(),
            singular_values: self.singular_values.clone(),
            spatial_modes: (0..self.spatial_modes.nrows())
                .map(|a| self.spatial_modes.row(a).iter().copied().collect())
                .collect(),
            modes: self
                .modes
                .iter()
                .map(|m| GpModeFile {
                    length_scale: m.length_scale(),
                    signal_variance: m.signal_variance(),
                    nugget: m.nugget(),
                    beta: m.beta().iter().copied().collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("surrogate serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, PgpError> {
        let file: PgpSurrogateFile =
            serde_json::from_str(text).map_err(|e| PgpError::InvalidFile(e.to_string()))?;
        let n = file.design.len();
        let d = file.input_bounds.len();
        let m = file.mean.len();
        let rank = file.singular_values.len();
        if n == 0 || m == 0 || rank == 0 {
            return Err(PgpError::InvalidFile("empty surrogate".into()));
        }
        if file.design.iter().any(|row| row.len() != d)
            || file.spatial_modes.len() != m
            || file.spatial_modes.iter().any(|row| row.len() != rank)
            || file.modes.len() != rank
            || file.modes.iter().any(|mode| mode.beta.len() != n)
        {
            return Err(PgpError::InvalidFile("inconsistent array shapes".into()));
        }
        let inputs = DMatrix::from_fn(n, d, |k, j| file.design[k][j]);
        let standardized = standardize_inputs(&inputs, &file.input_bounds);
        let modes = file
            .modes
            .iter()
            .map(|mode| {
                GpMode::from_parts(
                    standardized.clone(),
                    mode.length_scale,
                    mode.signal_variance,
                    mode.nugget,
                    DVector::from_vec(mode.beta.clone()),
                )
            })
            .collect();
        Ok(Self {
            mean: DVector::from_vec(file.mean),
            singular_values: file.singular_values,
            spatial_modes: DMatrix::from_fn(m, rank, |a, i| file.spatial_modes[a][i]),
            modes,
            input_bounds: file.input_bounds,
            design: file.design,
        })
    }
}

fn standardize_inputs(inputs: &DMatrix<f64>, bounds: &[(f64, f64)]) -> DMatrix<f64> {
    DMatrix::from_fn(inputs.nrows(), inputs.ncols(), |k, j| {
        let (lo, hi) = bounds[j];
        (inputs[(k, j)] - lo) / (hi - lo)
    })
}

fn standardize_point(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| (v - lo) / (hi - lo))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct PgpSurrogateFile {
    design: Vec<Vec<f64>>,
    input_bounds: Vec<(f64, f64)>,
    mean: Vec<f64>,
    singular_values: Vec<f64>,
    spatial_modes: Vec<Vec<f64>>,
    modes: Vec<GpModeFile>,
}

#[derive(Serialize, Deserialize)]
struct GpModeFile {
    length_scale: f64,
    signal_variance: f64,
    nugget: f64,
    beta: Vec<f64>,
}
