//! Snapshot method: proper orthogonal decomposition of the centred snapshot
//! matrix via SVD, keeping all `min(M, N)` modes.

use nalgebra::{DMatrix, DVector};

use super::PgpError;

/// Training set of the surrogate: `N` input points and the matching `N x M`
/// matrix of station water levels.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    inputs: DMatrix<f64>,
    outputs: DMatrix<f64>,
}

impl SnapshotSet {
    pub fn new(inputs: DMatrix<f64>, outputs: DMatrix<f64>) -> Result<Self, PgpError> {
        let n = inputs.nrows();
        if n < 2 {
            return Err(PgpError::TooFewSnapshots { need: 2, got: n });
        }
        if outputs.nrows() != n {
            return Err(PgpError::DimensionMismatch(format!(
                "{} input rows but {} output rows",
                n,
                outputs.nrows()
            )));
        }
        if inputs.iter().any(|v| !v.is_finite()) || outputs.iter().any(|v| !v.is_finite()) {
            return Err(PgpError::NonFinite);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if inputs.row(i) == inputs.row(j) {
                    return Err(PgpError::DuplicateInputs(i, j));
                }
            }
        }
        Ok(Self { inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.nrows() == 0
    }

    pub fn input_dimension(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn output_dimension(&self) -> usize {
        self.outputs.ncols()
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn outputs(&self) -> &DMatrix<f64> {
        &self.outputs
    }

    /// Per-station sample mean of the outputs.
    pub fn mean(&self) -> DVector<f64> {
        let n = self.outputs.nrows() as f64;
        DVector::from_fn(self.outputs.ncols(), |a, _| self.outputs.column(a).sum() / n)
    }

    /// Centred snapshot matrix in the stations-by-snapshots layout, `M x N`.
    pub fn centred_transposed(&self) -> DMatrix<f64> {
        let mean = self.mean();
        DMatrix::from_fn(self.outputs.ncols(), self.outputs.nrows(), |a, k| {
            self.outputs[(k, a)] - mean[a]
        })
    }
}

/// Result of the snapshot POD: descending singular values, orthonormal
/// spatial modes (columns of `U`) and the mode amplitudes at the snapshots
/// (rows of `Lambda V^T`).
#[derive(Clone, Debug)]
pub struct PodBasis {
    mean: DVector<f64>,
    singular_values: DVector<f64>,
    spatial_modes: DMatrix<f64>,
    mode_samples: DMatrix<f64>,
}

impl PodBasis {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Singular values of the centred snapshot matrix, descending. They relate
    /// to the eigenvalues `e_k` of the snapshot covariance `C = N^-1 Y^T Y` by
    /// `lambda_k = sqrt(N e_k)`; the unscaled convention is used throughout.
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    /// `M x r` matrix whose columns are the orthonormal spatial modes.
    pub fn spatial_modes(&self) -> &DMatrix<f64> {
        &self.spatial_modes
    }

    /// `r x N` matrix of mode amplitudes at the training snapshots.
    pub fn mode_samples(&self) -> &DMatrix<f64> {
        &self.mode_samples
    }

    /// Retained mode count, `min(M, N)`.
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Modes carrying singular values above `rel_tol` times the largest one.
    /// Zero for a degenerate (all-identical) snapshot set.
    pub fn effective_rank(&self, rel_tol: f64) -> usize {
        let largest = self.singular_values.max();
        if largest <= 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .filter(|&&sv| sv > rel_tol * largest)
            .count()
    }

    /// Reconstruction `U Lambda V^T` of the centred snapshot matrix (`M x N`).
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let lambda = DMatrix::from_diagonal(&self.singular_values);
        &self.spatial_modes * lambda * reconstruct_vt(&self.singular_values, &self.mode_samples)
    }
}

fn reconstruct_vt(singular_values: &DVector<f64>, mode_samples: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(mode_samples.nrows(), mode_samples.ncols(), |i, k| {
        if singular_values[i] > 0.0 {
            mode_samples[(i, k)] / singular_values[i]
        } else {
            0.0
        }
    })
}

/// SVD with singular values sorted descending and the factors permuted to match.
pub fn svd_descending(matrix: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let svd = matrix.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let values = DVector::from_fn(order.len(), |i, _| svd.singular_values[order[i]]);
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt_sorted = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    (values, u_sorted, vt_sorted)
}

/// Snapshot POD: SVD of the centred `M x N` snapshot matrix. All modes are
/// kept; a degenerate set (identical snapshots) yields an all-zero spectrum.
pub fn pod_decompose(snapshots: &SnapshotSet) -> PodBasis {
    let centred = snapshots.centred_transposed();
    let (singular_values, spatial_modes, vt) = svd_descending(&centred);
    let lambda = DMatrix::from_diagonal(&singular_values);
    let mode_samples = lambda * vt;
    PodBasis {
        mean: snapshots.mean(),
        singular_values,
        spatial_modes,
        mode_samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_matrix_singular_values() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 2.0]);
        let (values, u, vt) = svd_descending(&m);
        assert_relative_eq!(values[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(values[1], 2.0, max_relative = 1e-12);
        let rebuilt = u * DMatrix::from_diagonal(&values) * vt;
        assert_relative_eq!(rebuilt[(0, 0)], 3.0, max_relative = 1e-12);
        assert_relative_eq!(rebuilt[(1, 1)], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_duplicate_inputs() {
        let inputs = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 1.0, 2.0]);
        let outputs = DMatrix::zeros(3, 4);
        match SnapshotSet::new(inputs, outputs) {
            Err(PgpError::DuplicateInputs(0, 2)) => {}
            other => panic!("expected duplicate-input error, got {other:?}"),
        }
    }

    #[test]
    fn identical_snapshots_have_zero_spectrum() {
        let inputs = DMatrix::from_fn(5, 2, |k, j| (k * 2 + j) as f64);
        let outputs = DMatrix::from_fn(5, 3, |_, a| 1.0 + a as f64);
        let set = SnapshotSet::new(inputs, outputs).unwrap();
        let basis = pod_decompose(&set);
        assert!(basis.singular_values().iter().all(|&sv| sv.abs() < 1e-12));
        assert_eq!(basis.effective_rank(1e-12), 0);
        assert_relative_eq!(basis.mean()[2], 3.0, max_relative = 1e-14);
    }
}
