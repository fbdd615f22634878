//! Ensemble statistics and comparison metrics: moments, covariance and
//! correlation matrices, the Martinez pick-freeze Sobol' estimator, kernel
//! density estimates, the two-sample Kolmogorov–Smirnov test, the Q2
//! predictive coefficient and RMSE.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::sampling::{draw, InputSpace};

/// Two-sided 95% Normal quantile, used by the Fisher-z confidence intervals.
const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value encountered")]
    NonFinite,
}

/// Matrix of station outputs from any evaluator, one row per realization,
/// tagged with its origin.
#[derive(Clone, Debug)]
pub struct EnsembleMatrix {
    pub values: DMatrix<f64>,
    pub provenance: String,
}

impl EnsembleMatrix {
    pub fn new(values: DMatrix<f64>, provenance: impl Into<String>) -> Result<Self, StatsError> {
        if values.nrows() < 2 {
            return Err(StatsError::TooFewSamples {
                need: 2,
                got: values.nrows(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Self {
            values,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn station_count(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, station: usize) -> Vec<f64> {
        self.values.column(station).iter().copied().collect()
    }
}

/// Per-station sample mean and standard deviation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Unbiased per-station moments (the std uses the `n - 1` divisor).
pub fn ensemble_moments(values: &DMatrix<f64>) -> Result<Moments, StatsError> {
    let n = values.nrows();
    if n < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: n });
    }
    let mean: Vec<f64> = (0..values.ncols())
        .map(|a| values.column(a).sum() / n as f64)
        .collect();
    let std: Vec<f64> = (0..values.ncols())
        .map(|a| {
            let m = mean[a];
            (values
                .column(a)
                .iter()
                .map(|&v| (v - m) * (v - m))
                .sum::<f64>()
                / (n - 1) as f64)
                .sqrt()
        })
        .collect();
    Ok(Moments { mean, std })
}

/// Unbiased sample covariance matrix (`n - 1` divisor), exactly symmetric.
pub fn ensemble_covariance(values: &DMatrix<f64>) -> Result<DMatrix<f64>, StatsError> {
    let n = values.nrows();
    if n < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: n });
    }
    let m = values.ncols();
    let mean: Vec<f64> = (0..m).map(|a| values.column(a).sum() / n as f64).collect();
    let centred = DMatrix::from_fn(n, m, |k, a| values[(k, a)] - mean[a]);
    let mut cov = centred.transpose() * &centred / (n - 1) as f64;
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Correlation matrix from a covariance matrix. Rows and columns of
/// zero-variance entries are set to NaN and their indices returned.
pub fn correlation_from_covariance(cov: &DMatrix<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let m = cov.nrows();
    let std: Vec<f64> = (0..m).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let degenerate: Vec<usize> = (0..m).filter(|&i| std[i] == 0.0).collect();
    let corr = DMatrix::from_fn(m, m, |i, j| {
        if std[i] == 0.0 || std[j] == 0.0 {
            f64::NAN
        } else if i == j {
            1.0
        } else {
            (cov[(i, j)] / (std[i] * std[j])).clamp(-1.0, 1.0)
        }
    });
    (corr, degenerate)
}

/// First-order and total Sobol' indices with Fisher-z 95% confidence
/// intervals, as produced by [`martinez_sobol`]. Arrays are indexed
/// `[input_dimension][station]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SobolEstimate {
    pub first: Vec<Vec<f64>>,
    pub total: Vec<Vec<f64>>,
    pub first_ci: Vec<Vec<(f64, f64)>>,
    pub total_ci: Vec<Vec<(f64, f64)>>,
    /// Pick-freeze base sample size n; the evaluator ran `n (d + 2)` times.
    pub sample_size: usize,
    /// Stations with vanishing output variance; their indices are NaN.
    pub degenerate_stations: Vec<usize>,
}

/// Martinez' correlation-based pick-freeze estimator of first-order and total
/// Sobol' indices.
///
/// Two independent `n x d` input samples `A` and `B` are drawn; for every
/// input dimension `i` the mixed matrix `C_i` equals `A` with column `i`
/// taken from `B`. Then
///
/// ```text
/// S_i  = corr(h(B), h(C_i))        (C_i and B share only column i)
/// S_Ti = 1 - corr(h(A), h(C_i))    (C_i and A share all but column i)
/// ```
///
/// with Fisher-z asymptotic 95% confidence intervals. Total evaluator cost is
/// `n (d + 2)`; evaluator calls are dispatched in parallel.
pub fn martinez_sobol<F>(
    evaluator: &F,
    space: &InputSpace,
    n: usize,
    seed: u64,
) -> Result<SobolEstimate, StatsError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if n < 100 {
        return Err(StatsError::TooFewSamples { need: 100, got: n });
    }
    let d = space.dimension();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let sample_a: Vec<Vec<f64>> = (0..n).map(|_| draw(space, &mut rng)).collect();
    let sample_b: Vec<Vec<f64>> = (0..n).map(|_| draw(space, &mut rng)).collect();

    let h_a = evaluate_rows(evaluator, &sample_a);
    let h_b = evaluate_rows(evaluator, &sample_b);
    let stations = h_a.first().map_or(0, Vec::len);

    let mut first = vec![vec![f64::NAN; stations]; d];
    let mut total = vec![vec![f64::NAN; stations]; d];
    let mut first_ci = vec![vec![(f64::NAN, f64::NAN); stations]; d];
    let mut total_ci = vec![vec![(f64::NAN, f64::NAN); stations]; d];
    let mut degenerate = Vec::new();

    for dim in 0..d {
        let mixed: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut row = sample_a[k].clone();
                row[dim] = sample_b[k][dim];
                row
            })
            .collect();
        let h_c = evaluate_rows(evaluator, &mixed);
        for station in 0..stations {
            let b_col: Vec<f64> = h_b.iter().map(|row| row[station]).collect();
            let a_col: Vec<f64> = h_a.iter().map(|row| row[station]).collect();
            let c_col: Vec<f64> = h_c.iter().map(|row| row[station]).collect();
            if sample_std(&b_col) == 0.0 || sample_std(&a_col) == 0.0 {
                if dim == 0 {
                    degenerate.push(station);
                }
                continue;
            }
            let r_first = pearson(&b_col, &c_col);
            let r_total = pearson(&a_col, &c_col);
            let (lo1, hi1) = fisher_interval(r_first, n);
            let (lo2, hi2) = fisher_interval(r_total, n);
            first[dim][station] = r_first;
            total[dim][station] = 1.0 - r_total;
            first_ci[dim][station] = (lo1, hi1);
            total_ci[dim][station] = (1.0 - hi2, 1.0 - lo2);
        }
    }

    Ok(SobolEstimate {
        first,
        total,
        first_ci,
        total_ci,
        sample_size: n,
        degenerate_stations: degenerate,
    })
}

fn evaluate_rows<F>(evaluator: &F, rows: &[Vec<f64>]) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    rows.par_iter().map(|row| evaluator(row)).collect()
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn fisher_interval(r: f64, n: usize) -> (f64, f64) {
    let clamped = r.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    let z = clamped.atanh();
    let half = Z_95 / ((n as f64) - 3.0).sqrt();
    ((z - half).tanh(), (z + half).tanh())
}

/// Kernel density estimate on a fixed grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
    /// True when the sample has zero spread; the density is then a spike at
    /// the common value and the curve carries zeros.
    pub degenerate: bool,
}

/// Gaussian-kernel density estimate with the Silverman bandwidth
/// `1.06 min(std, IQR / 1.34) n^(-1/5)` on a 512-point (configurable) grid
/// spanning `[min - 3 bw, max + 3 bw]`.
pub fn kde_pdf(samples: &[f64], grid_points: usize) -> Result<KdeCurve, StatsError> {
    let n = samples.len();
    if n < 30 {
        return Err(StatsError::TooFewSamples { need: 30, got: n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let std = sample_std(samples);
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    if std == 0.0 {
        let x0 = sorted[0];
        let grid = (0..grid_points)
            .map(|i| x0 - 1.0 + 2.0 * i as f64 / (grid_points - 1) as f64)
            .collect();
        return Ok(KdeCurve {
            grid,
            density: vec![0.0; grid_points],
            bandwidth: 0.0,
            degenerate: true,
        });
    }
    let spread = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    let bandwidth = 1.06 * spread * (n as f64).powf(-0.2);
    let lo = sorted[0] - 3.0 * bandwidth;
    let hi = sorted[n - 1] + 3.0 * bandwidth;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| lo + (hi - lo) * i as f64 / (grid_points - 1) as f64)
        .collect();
    let norm = 1.0 / (n as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let density: Vec<f64> = grid
        .par_iter()
        .map(|&g| {
            samples
                .iter()
                .map(|&x| {
                    let u = (g - x) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(KdeCurve {
        grid,
        density,
        bandwidth,
        degenerate: false,
    })
}

/// Linear-interpolated quantile of an already sorted slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Outcome of the two-sample Kolmogorov–Smirnov test.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
}

/// Tabulated two-sample Kolmogorov–Smirnov coefficients `c(alpha)` for the
/// rejection threshold `c(alpha) sqrt((n + m) / (n m))`.
const KS_TABLE: [(f64, f64); 6] = [
    (0.10, 1.22),
    (0.05, 1.36),
    (0.025, 1.48),
    (0.01, 1.63),
    (0.005, 1.73),
    (0.001, 1.95),
];

/// `c(alpha)` from the classical table, falling back to the asymptotic
/// inverse `sqrt(-ln(alpha / 2) / 2)` for non-tabulated levels.
pub fn ks_critical_value(alpha: f64) -> f64 {
    for (a, c) in KS_TABLE {
        if (alpha - a).abs() < 1e-12 {
            return c;
        }
    }
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Asymptotic Kolmogorov survival function `Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_p_value(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Exact two-sample Kolmogorov–Smirnov statistic
/// `D = sup |F_n - G_m|` over the merged samples, with the tabulated
/// rejection threshold at level `alpha` and the asymptotic p-value.
pub fn ks_two_sample(sample_a: &[f64], sample_b: &[f64], alpha: f64) -> Result<KsOutcome, StatsError> {
    let n = sample_a.len();
    let m = sample_b.len();
    if n == 0 || m == 0 {
        return Err(StatsError::TooFewSamples {
            need: 1,
            got: n.min(m),
        });
    }
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut i = 0;
    let mut j = 0;
    let mut statistic = 0.0_f64;
    while i < n || j < m {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        statistic = statistic.max(diff);
    }

    let ratio = ((n + m) as f64 / (n as f64 * m as f64)).sqrt();
    let threshold = ks_critical_value(alpha) * ratio;
    let lambda = statistic / ratio;
    Ok(KsOutcome {
        statistic,
        threshold,
        reject: statistic > threshold,
        p_value: kolmogorov_p_value(lambda),
        n,
        m,
        alpha,
    })
}

/// Q2 predictive coefficients of a surrogate ensemble against a reference
/// ensemble of the same shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Q2Scores {
    pub per_station: Vec<f64>,
    /// Mean over non-degenerate stations.
    pub mean: f64,
    pub degenerate_stations: Vec<usize>,
}

/// `Q2 = 1 - sum (h - h_hat)^2 / sum (h - mean(h))^2` per station.
pub fn q2(reference: &EnsembleMatrix, predicted: &EnsembleMatrix) -> Result<Q2Scores, StatsError> {
    let h = &reference.values;
    let p = &predicted.values;
    if h.shape() != p.shape() {
        return Err(StatsError::ShapeMismatch(format!(
            "reference {:?} vs predicted {:?}",
            h.shape(),
            p.shape()
        )));
    }
    let n = h.nrows();
    let mut per_station = Vec::with_capacity(h.ncols());
    let mut degenerate = Vec::new();
    for a in 0..h.ncols() {
        let mean = h.column(a).sum() / n as f64;
        let mut ss_res = 0.0;
        let mut ss_tot = 0.0;
        for k in 0..n {
            ss_res += (h[(k, a)] - p[(k, a)]).powi(2);
            ss_tot += (h[(k, a)] - mean).powi(2);
        }
        if ss_tot == 0.0 {
            degenerate.push(a);
            per_station.push(f64::NAN);
        } else {
            per_station.push(1.0 - ss_res / ss_tot);
        }
    }
    let finite: Vec<f64> = per_station.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(StatsError::ShapeMismatch(
            "all reference stations have zero variance".into(),
        ));
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    Ok(Q2Scores {
        per_station,
        mean,
        degenerate_stations: degenerate,
    })
}

/// Root-mean-square difference of two equally long vectors.
pub fn rmse(values: &[f64], reference: &[f64]) -> Result<f64, StatsError> {
    if values.len() != reference.len() || values.is_empty() {
        return Err(StatsError::ShapeMismatch(format!(
            "lengths {} vs {}",
            values.len(),
            reference.len()
        )));
    }
    let sum: f64 = values
        .iter()
        .zip(reference)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok((sum / values.len() as f64).sqrt())
}

/// RMSE over all entries of two equally shaped matrices.
pub fn rmse_matrix(values: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<f64, StatsError> {
    if values.shape() != reference.shape() {
        return Err(StatsError::ShapeMismatch(format!(
            "shapes {:?} vs {:?}",
            values.shape(),
            reference.shape()
        )));
    }
    let a: Vec<f64> = values.iter().copied().collect();
    let b: Vec<f64> = reference.iter().copied().collect();
    rmse(&a, &b)
}

/// Comparison metrics of one surrogate against the reference ensemble.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurrogateMetrics {
    pub q2_per_station: Vec<f64>,
    pub q2_mean: f64,
    /// KS test at the heterogeneous mid-reach station.
    pub ks_marmande: KsOutcome,
    /// RMSE over all correlation-matrix entries.
    pub correlation_rmse: f64,
    /// RMSE over stations of the first-order Sobol' indices, per input.
    pub sobol_first_rmse: Vec<f64>,
    /// RMSE over stations of the total Sobol' indices, per input.
    pub sobol_total_rmse: Vec<f64>,
    pub mean_rmse: f64,
    pub std_rmse: f64,
}

/// Full statistical description of one ensemble or surrogate, plus comparison
/// metrics when a reference exists.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsReport {
    pub provenance: String,
    /// Training budget for surrogates, reference size otherwise.
    pub sample_budget: usize,
    pub moments: Moments,
    pub covariance: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
    /// `[input][station]` first-order Sobol' indices.
    pub sobol_first: Vec<Vec<f64>>,
    pub sobol_total: Vec<Vec<f64>>,
    pub sobol_first_ci: Option<Vec<Vec<(f64, f64)>>>,
    pub sobol_total_ci: Option<Vec<Vec<(f64, f64)>>>,
    /// PDF curves keyed by zero-padded station label (`station_07`).
    pub pdfs: BTreeMap<String, KdeCurve>,
    pub metrics: Option<SurrogateMetrics>,
}

/// Nested-vector view of a matrix for serialization.
pub fn matrix_rows(matrix: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..matrix.nrows())
        .map(|i| matrix.row(i).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_rows_have_zero_spread() {
        let values = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let moments = ensemble_moments(&values).unwrap();
        assert_eq!(moments.std, vec![0.0, 0.0, 0.0]);
        let cov = ensemble_covariance(&values).unwrap();
        assert!(cov.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn moments_need_two_rows() {
        let values = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(ensemble_moments(&values).is_err());
        assert!(ensemble_covariance(&values).is_err());
    }

    #[test]
    fn ks_identical_samples_accepts_with_zero_statistic() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let out = ks_two_sample(&a, &a, 0.05).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.reject);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn ks_threshold_reproduces_published_value() {
        let ratio = (200_000.0_f64 / (100_000.0 * 100_000.0)).sqrt();
        let threshold = ks_critical_value(0.05) * ratio;
        assert!(
            (threshold - 6.082e-3).abs() < 5e-7,
            "threshold {threshold} does not round to 6.082e-3"
        );
    }

    #[test]
    fn ks_statistic_simple_case() {
        let a = [1.0, 1.0, 4.0, 4.0];
        let b = [1.0, 1.0, 1.0, 4.0];
        let out = ks_two_sample(&a, &b, 0.05).unwrap();
        assert_relative_eq!(out.statistic, 0.25, max_relative = 1e-14);
    }

    #[test]
    fn q2_trivial_values() {
        let h = EnsembleMatrix::new(
            DMatrix::from_row_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]),
            "reference",
        )
        .unwrap();
        let exact = q2(&h, &h).unwrap();
        assert_relative_eq!(exact.mean, 1.0, max_relative = 1e-14);
        let means = EnsembleMatrix::new(DMatrix::from_element(4, 1, 2.5), "mean").unwrap();
        let at_mean = q2(&h, &means).unwrap();
        assert_relative_eq!(at_mean.mean, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rmse_trivial_values() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = [2.0, 3.0, 4.0];
        assert_relative_eq!(rmse(&a, &b).unwrap(), 1.0, max_relative = 1e-14);
        assert!(rmse(&a, &[1.0]).is_err());
    }

    #[test]
    fn kde_translation_equivariance() {
        let samples: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
        let shifted: Vec<f64> = samples.iter().map(|&x| x + 5.0).collect();
        let base = kde_pdf(&samples, 256).unwrap();
        let moved = kde_pdf(&shifted, 256).unwrap();
        let argmax = |c: &KdeCurve| {
            let (i, _) = c
                .density
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            c.grid[i]
        };
        assert_relative_eq!(argmax(&moved) - argmax(&base), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn kde_flags_zero_variance() {
        let samples = vec![2.0; 64];
        let curve = kde_pdf(&samples, 128).unwrap();
        assert!(curve.degenerate);
        assert_eq!(curve.bandwidth, 0.0);
    }

    #[test]
    fn correlation_handles_zero_variance_station() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let (corr, degenerate) = correlation_from_covariance(&cov);
        assert_eq!(degenerate, vec![1]);
        assert!(corr[(0, 1)].is_nan());
        assert_eq!(corr[(0, 0)], 1.0);
    }
}
