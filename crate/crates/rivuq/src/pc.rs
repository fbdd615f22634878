//! Quadrature-based polynomial chaos surrogate.
//!
//! Water levels at the stations are expanded on a tensor basis of orthonormal
//! polynomials in standardized coordinates: probabilists' Hermite polynomials
//! (normalized by `sqrt(k!)`) for Normal inputs, Legendre polynomials
//! (normalized by `sqrt(2k+1)` against the uniform probability density on
//! `[-1, 1]`) for Uniform inputs. Coefficients come from spectral projection
//! with the tensor Gauss rule; the surrogate mean, standard deviation,
//! covariance and Sobol' indices then follow analytically from the
//! coefficients.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{InputSpace, Marginal, QuadratureRule};

#[derive(Debug, Error)]
pub enum PcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("input {value} outside the support of dimension {dim}")]
    OutOfSupport { dim: usize, value: f64 },
    #[error("quadrature rule order {rule} does not match basis order {basis}")]
    OrderMismatch { rule: usize, basis: usize },
    #[error("surrogate file is inconsistent: {0}")]
    InvalidFile(String),
}

/// Polynomial family attached to one standardized dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolyFamily {
    /// Probabilists' Hermite, orthonormal under N(0, 1).
    Hermite,
    /// Legendre, orthonormal under the uniform probability measure on [-1, 1].
    Legendre,
}

impl PolyFamily {
    pub fn for_marginal(marginal: &Marginal) -> Self {
        match marginal {
            Marginal::Normal { .. } => PolyFamily::Hermite,
            Marginal::Uniform { .. } => PolyFamily::Legendre,
        }
    }
}

/// Orthonormal 1-D polynomial of the given family and degree at `zeta`.
pub fn orthonormal_poly_1d(family: PolyFamily, degree: usize, zeta: f64) -> f64 {
    orthonormal_table(family, degree, zeta)[degree]
}

/// Values of the orthonormal polynomials of degree `0..=max_degree` at `zeta`,
/// by three-term recurrence on the orthonormal forms.
pub fn orthonormal_table(family: PolyFamily, max_degree: usize, zeta: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(max_degree + 1);
    values.push(1.0);
    if max_degree == 0 {
        return values;
    }
    match family {
        PolyFamily::Hermite => {
            // He~_{k+1} = (zeta He~_k - sqrt(k) He~_{k-1}) / sqrt(k+1)
            values.push(zeta);
            for k in 1..max_degree {
                let kf = k as f64;
                let next = (zeta * values[k] - kf.sqrt() * values[k - 1]) / (kf + 1.0).sqrt();
                values.push(next);
            }
        }
        PolyFamily::Legendre => {
            // Raw recurrence (k+1) P_{k+1} = (2k+1) zeta P_k - k P_{k-1}, scaled
            // to unit norm against the probability measure at the end.
            let mut raw = Vec::with_capacity(max_degree + 1);
            raw.push(1.0);
            raw.push(zeta);
            for k in 1..max_degree {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * zeta * raw[k] - kf * raw[k - 1]) / (kf + 1.0);
                raw.push(next);
            }
            values = raw
                .iter()
                .enumerate()
                .map(|(k, &p)| p * (2.0 * k as f64 + 1.0).sqrt())
                .collect();
        }
    }
    values
}

/// Total-degree truncated multi-index set with per-dimension polynomial
/// families, in graded-lexicographic order (constant term first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiIndexBasis {
    families: Vec<PolyFamily>,
    degree: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexBasis {
    pub fn new(space: &InputSpace, degree: usize) -> Self {
        let families = space
            .marginals()
            .iter()
            .map(PolyFamily::for_marginal)
            .collect::<Vec<_>>();
        let indices = graded_indices(families.len(), degree);
        Self {
            families,
            degree,
            indices,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dimension(&self) -> usize {
        self.families.len()
    }

    /// Number of retained terms, `(d + P)! / (d! P!)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn families(&self) -> &[PolyFamily] {
        &self.families
    }

    /// All basis functions evaluated at a standardized point.
    pub fn eval_all(&self, zeta: &[f64]) -> Vec<f64> {
        let tables: Vec<Vec<f64>> = self
            .families
            .iter()
            .zip(zeta)
            .map(|(&family, &z)| orthonormal_table(family, self.degree, z))
            .collect();
        self.indices
            .iter()
            .map(|idx| idx.iter().enumerate().map(|(j, &k)| tables[j][k]).product())
            .collect()
    }
}

/// Multi-indices of total degree `<= degree` in graded-lexicographic order:
/// ascending total degree, then lexicographic with the leading dimension
/// varying slowest.
fn graded_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    for total in 0..=degree {
        let mut current = vec![0usize; dim];
        fill_degree(dim, total, 0, &mut current, &mut all);
    }
    all
}

fn fill_degree(
    dim: usize,
    remaining: usize,
    pos: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if pos == dim - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        fill_degree(dim, remaining - k, pos + 1, current, out);
    }
}

/// Fitted polynomial chaos surrogate for all stations at once.
#[derive(Clone, Debug)]
pub struct PcSurrogate {
    basis: MultiIndexBasis,
    space: InputSpace,
    /// Coefficient matrix, stations x basis terms.
    coefficients: DMatrix<f64>,
    /// Forward-model evaluations spent to fit the surrogate.
    training_size: usize,
}

/// Analytic Sobol' decomposition carried by the PC coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PcSobol {
    /// First-order index per input dimension and station, `first[dim][station]`.
    pub first: Vec<Vec<f64>>,
    /// Total index per input dimension and station.
    pub total: Vec<Vec<f64>>,
    /// Variance share of interactions of two or more inputs, per station.
    pub interaction: Vec<f64>,
    /// Stations whose variance vanishes; their indices are undefined (NaN).
    pub degenerate_stations: Vec<usize>,
}

impl PcSurrogate {
    /// Spectral projection of the model outputs at the quadrature nodes:
    /// `gamma_{a,i} = sum_k h_a^(k) Psi_i(zeta^(k)) w^(k)`.
    ///
    /// `outputs` is N x M in the node order of the rule.
    pub fn fit(
        outputs: &DMatrix<f64>,
        rule: &QuadratureRule,
        basis: &MultiIndexBasis,
        space: &InputSpace,
    ) -> Result<Self, PcError> {
        if rule.order() != basis.degree() {
            return Err(PcError::OrderMismatch {
                rule: rule.order(),
                basis: basis.degree(),
            });
        }
        if outputs.nrows() != rule.len() {
            return Err(PcError::DimensionMismatch(format!(
                "{} output rows for {} quadrature nodes",
                outputs.nrows(),
                rule.len()
            )));
        }
        let n = rule.len();
        let r = basis.len();
        // Design matrix of weighted basis values at the nodes.
        let mut weighted_design = DMatrix::<f64>::zeros(n, r);
        for (k, (node, &w)) in rule
            .standardized_nodes()
            .iter()
            .zip(rule.weights())
            .enumerate()
        {
            let row = basis.eval_all(node);
            for (i, v) in row.into_iter().enumerate() {
                weighted_design[(k, i)] = v * w;
            }
        }
        let coefficients = outputs.transpose() * weighted_design;
        Ok(Self {
            basis: basis.clone(),
            space: space.clone(),
            coefficients,
            training_size: n,
        })
    }

    pub fn basis(&self) -> &MultiIndexBasis {
        &self.basis
    }

    pub fn input_space(&self) -> &InputSpace {
        &self.space
    }

    pub fn station_count(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn training_size(&self) -> usize {
        self.training_size
    }

    /// Coefficient of a station on one basis term.
    pub fn coefficient(&self, station: usize, term: usize) -> f64 {
        self.coefficients[(station, term)]
    }

    /// Surrogate water levels at a physical input point.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, PcError> {
        if x.len() != self.space.dimension() {
            return Err(PcError::DimensionMismatch(format!(
                "point has {} coordinates, space needs {}",
                x.len(),
                self.space.dimension()
            )));
        }
        for (dim, (marginal, &value)) in self.space.marginals().iter().zip(x).enumerate() {
            if !marginal.supports(value) {
                return Err(PcError::OutOfSupport { dim, value });
            }
        }
        let zeta = self.space.standardize(x);
        Ok(self.eval_standardized(&zeta))
    }

    /// Expansion value at a standardized point (no support check).
    pub fn eval_standardized(&self, zeta: &[f64]) -> Vec<f64> {
        let psi = self.basis.eval_all(zeta);
        (0..self.coefficients.nrows())
            .map(|a| {
                psi.iter()
                    .enumerate()
                    .map(|(i, &p)| self.coefficients[(a, i)] * p)
                    .sum()
            })
            .collect()
    }

    /// Analytic surrogate mean per station: the constant-term coefficient.
    pub fn mean(&self) -> Vec<f64> {
        (0..self.coefficients.nrows())
            .map(|a| self.coefficients[(a, 0)])
            .collect()
    }

    /// Analytic surrogate standard deviation per station:
    /// `sqrt(sum_{i != 0} gamma_{a,i}^2)`.
    pub fn std(&self) -> Vec<f64> {
        (0..self.coefficients.nrows())
            .map(|a| {
                (1..self.coefficients.ncols())
                    .map(|i| self.coefficients[(a, i)].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Analytic station-to-station covariance:
    /// `cov(a_m, a_n) = sum_{i != 0} gamma_{a_m,i} gamma_{a_n,i}`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let m = self.coefficients.nrows();
        let r = self.coefficients.ncols();
        let fluct = self.coefficients.columns(1, r - 1);
        let mut cov = &fluct * fluct.transpose();
        // Symmetrize exactly against rounding.
        for i in 0..m {
            for j in 0..i {
                let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        cov
    }

    /// Correlation matrix derived from [`PcSurrogate::covariance`]. Rows and
    /// columns of zero-variance stations are NaN and their indices reported.
    pub fn correlation(&self) -> (DMatrix<f64>, Vec<usize>) {
        crate::stats::correlation_from_covariance(&self.covariance())
    }

    /// First-order and total Sobol' indices straight from the coefficients.
    pub fn sobol(&self) -> PcSobol {
        let m = self.coefficients.nrows();
        let d = self.basis.dimension();
        let indices = self.basis.indices();
        let mut first = vec![vec![0.0; m]; d];
        let mut total = vec![vec![0.0; m]; d];
        let mut interaction = vec![0.0; m];
        let mut degenerate = Vec::new();
        for a in 0..m {
            let mut variance = 0.0;
            let mut first_var = vec![0.0; d];
            let mut total_var = vec![0.0; d];
            let mut inter_var = 0.0;
            for (i, idx) in indices.iter().enumerate().skip(1) {
                let gamma2 = self.coefficients[(a, i)].powi(2);
                variance += gamma2;
                let active: Vec<usize> = (0..d).filter(|&j| idx[j] > 0).collect();
                if active.len() == 1 {
                    first_var[active[0]] += gamma2;
                } else {
                    inter_var += gamma2;
                }
                for &j in &active {
                    total_var[j] += gamma2;
                }
            }
            // Quadrature rounding leaves O(1e-15) coefficients even for a
            // constant model; treat such stations as variance-free.
            let floor = 1e-13 * (1.0 + self.coefficients[(a, 0)].abs());
            if variance.sqrt() <= floor {
                degenerate.push(a);
                for j in 0..d {
                    first[j][a] = f64::NAN;
                    total[j][a] = f64::NAN;
                }
                interaction[a] = f64::NAN;
                continue;
            }
            for j in 0..d {
                first[j][a] = first_var[j] / variance;
                total[j][a] = total_var[j] / variance;
            }
            interaction[a] = inter_var / variance;
        }
        PcSobol {
            first,
            total,
            interaction,
            degenerate_stations: degenerate,
        }
    }

    /// Coefficient export with header `station,i1,i2,...,gamma` (1-based stations).
    pub fn coefficients_csv(&self) -> String {
        let d = self.basis.dimension();
        let mut out = String::from("station");
        for j in 1..=d {
            out.push_str(&format!(",i{j}"));
        }
        out.push_str(",gamma\n");
        for a in 0..self.coefficients.nrows() {
            for (i, idx) in self.basis.indices().iter().enumerate() {
                out.push_str(&format!("{}", a + 1));
                for &k in idx {
                    out.push_str(&format!(",{k}"));
                }
                out.push_str(&format!(",{}\n", self.coefficients[(a, i)]));
            }
        }
        out
    }

    /// Self-describing JSON document (basis, input space, coefficients).
    pub fn to_json(&self) -> String {
        let file = PcSurrogateFile {
            basis: self.basis.clone(),
            space: self.space.clone(),
            coefficients: (0..self.coefficients.nrows())
                .map(|a| {
                    (0..self.coefficients.ncols())
                        .map(|i| self.coefficients[(a, i)])
                        .collect()
                })
                .collect(),
            training_size: self.training_size,
        };
        serde_json::to_string_pretty(&file).expect("surrogate serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, PcError> {
        let file: PcSurrogateFile =
            serde_json::from_str(text).map_err(|e| PcError::InvalidFile(e.to_string()))?;
        let m = file.coefficients.len();
        let r = file.basis.len();
        if m == 0 || file.coefficients.iter().any(|row| row.len() != r) {
            return Err(PcError::InvalidFile(
                "coefficient rows do not match the basis size".into(),
            ));
        }
        let coefficients =
            DMatrix::from_fn(m, r, |a, i| file.coefficients[a][i]);
        Ok(Self {
            basis: file.basis,
            space: file.space,
            coefficients,
            training_size: file.training_size,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct PcSurrogateFile {
    basis: MultiIndexBasis,
    space: InputSpace,
    coefficients: Vec<Vec<f64>>,
    training_size: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_low_degree_values() {
        assert_eq!(orthonormal_poly_1d(PolyFamily::Hermite, 0, 3.7), 1.0);
        assert_relative_eq!(orthonormal_poly_1d(PolyFamily::Hermite, 1, 1.0), 1.0);
        // He_2 = z^2 - 1 with norm sqrt(2!).
        assert_relative_eq!(
            orthonormal_poly_1d(PolyFamily::Hermite, 2, 0.0),
            -1.0 / 2.0_f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn legendre_low_degree_values() {
        assert_eq!(orthonormal_poly_1d(PolyFamily::Legendre, 0, -0.3), 1.0);
        // L_2(1) = 1 scaled by sqrt(5).
        assert_relative_eq!(
            orthonormal_poly_1d(PolyFamily::Legendre, 2, 1.0),
            5.0_f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn basis_size_follows_binomial_count() {
        let space = InputSpace::new(vec![
            Marginal::Normal { mean: 0.0, std: 1.0 },
            Marginal::Uniform { lower: -1.0, upper: 1.0 },
        ])
        .unwrap();
        assert_eq!(MultiIndexBasis::new(&space, 6).len(), 28);
        assert_eq!(MultiIndexBasis::new(&space, 10).len(), 66);
        assert_eq!(MultiIndexBasis::new(&space, 15).len(), 136);
    }

    #[test]
    fn first_index_is_constant_term() {
        let space = InputSpace::new(vec![
            Marginal::Normal { mean: 0.0, std: 1.0 },
            Marginal::Uniform { lower: -1.0, upper: 1.0 },
        ])
        .unwrap();
        let basis = MultiIndexBasis::new(&space, 3);
        assert_eq!(basis.indices()[0], vec![0, 0]);
        // Graded ordering: all degree-1 terms precede degree-2 terms.
        let degrees: Vec<usize> = basis.indices().iter().map(|i| i.iter().sum()).collect();
        assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
    }
}
