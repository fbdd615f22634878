//! Random-input description, standardization and experimental designs.
//!
//! The uncertain inputs are independent with Normal or Uniform marginals.
//! Normal dimensions standardize with the z-score, Uniform dimensions map
//! affinely onto `[-1, 1]` (the natural domain of the Legendre family).
//! Designs available: seeded Monte Carlo, Halton low-discrepancy sequences
//! over a bounded design box, and tensorized Gauss–Hermite / Gauss–Legendre
//! quadrature.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prime bases reserved for Halton sequences, one per input dimension.
pub const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),
    #[error("dimension {0} exceeds the {1} reserved Halton prime bases")]
    TooManyDimensions(usize, usize),
    #[error("sample size must be at least 1")]
    EmptySample,
}

/// Independent one-dimensional marginal law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Marginal {
    Normal { mean: f64, std: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl Marginal {
    fn validate(&self) -> Result<(), SamplingError> {
        match *self {
            Marginal::Normal { std, .. } if std <= 0.0 => Err(SamplingError::InvalidMarginal(
                format!("Normal std must be positive, got {std}"),
            )),
            Marginal::Uniform { lower, upper } if lower >= upper => {
                Err(SamplingError::InvalidMarginal(format!(
                    "Uniform bounds must satisfy lower < upper, got [{lower}, {upper}]"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Physical value to standardized coordinate: z-score for Normal, affine
    /// map onto `[-1, 1]` for Uniform.
    pub fn standardize(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, std } => (x - mean) / std,
            Marginal::Uniform { lower, upper } => 2.0 * (x - lower) / (upper - lower) - 1.0,
        }
    }

    /// Inverse of [`Marginal::standardize`].
    pub fn unstandardize(&self, zeta: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, std } => mean + std * zeta,
            Marginal::Uniform { lower, upper } => lower + 0.5 * (zeta + 1.0) * (upper - lower),
        }
    }

    /// True if `x` lies in the support of the law.
    pub fn supports(&self, x: f64) -> bool {
        match *self {
            Marginal::Normal { .. } => x.is_finite(),
            Marginal::Uniform { lower, upper } => x >= lower && x <= upper,
        }
    }

    /// Default bounded interval used by space-filling designs: the support for
    /// Uniform laws, mean ± 2.5 std for Normal laws.
    pub fn default_design_interval(&self) -> (f64, f64) {
        match *self {
            Marginal::Normal { mean, std } => (mean - 2.5 * std, mean + 2.5 * std),
            Marginal::Uniform { lower, upper } => (lower, upper),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Normal { mean, .. } => mean,
            Marginal::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }
}

/// Product law of independent marginals plus the bounded design box used by
/// low-discrepancy designs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputSpace {
    marginals: Vec<Marginal>,
    design_bounds: Vec<(f64, f64)>,
}

impl InputSpace {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self, SamplingError> {
        for m in &marginals {
            m.validate()?;
        }
        let design_bounds = marginals.iter().map(|m| m.default_design_interval()).collect();
        Ok(Self {
            marginals,
            design_bounds,
        })
    }

    /// Override the design box of one dimension (used e.g. to bound an
    /// unbounded Normal input to a fixed interval).
    pub fn with_design_bounds(mut self, dim: usize, lower: f64, upper: f64) -> Self {
        self.design_bounds[dim] = (lower, upper);
        self
    }

    pub fn dimension(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn design_bounds(&self) -> &[(f64, f64)] {
        &self.design_bounds
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        self.marginals
            .iter()
            .zip(x)
            .map(|(m, &v)| m.standardize(v))
            .collect()
    }

    pub fn unstandardize(&self, zeta: &[f64]) -> Vec<f64> {
        self.marginals
            .iter()
            .zip(zeta)
            .map(|(m, &v)| m.unstandardize(v))
            .collect()
    }

    /// True if every coordinate lies in the support of its marginal.
    pub fn supports(&self, x: &[f64]) -> bool {
        self.marginals.iter().zip(x).all(|(m, &v)| m.supports(v))
    }
}

/// `n` i.i.d. draws from the product law, reproducible for a fixed 64-bit seed.
pub fn mc_sample(space: &InputSpace, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, SamplingError> {
    if n == 0 {
        return Err(SamplingError::EmptySample);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push(draw(space, &mut rng));
    }
    Ok(points)
}

/// One draw from the product law using the caller's generator.
pub fn draw<R: Rng>(space: &InputSpace, rng: &mut R) -> Vec<f64> {
    space
        .marginals
        .iter()
        .map(|m| match *m {
            Marginal::Normal { mean, std } => Normal::new(mean, std).unwrap().sample(rng),
            Marginal::Uniform { lower, upper } => {
                Uniform::new(lower, upper).unwrap().sample(rng)
            }
        })
        .collect()
}

/// Radical-inverse (van der Corput) value of `index >= 1` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    let b = base as f64;
    while index > 0 {
        denom *= b;
        inv += (index % base) as f64 / denom;
        index /= base;
    }
    inv
}

/// Halton points (indices `1..=n`) in the unit hypercube, bases 2, 3, 5, ...
pub fn halton_unit(n: usize, dim: usize) -> Result<Vec<Vec<f64>>, SamplingError> {
    if n == 0 {
        return Err(SamplingError::EmptySample);
    }
    if dim > HALTON_BASES.len() {
        return Err(SamplingError::TooManyDimensions(dim, HALTON_BASES.len()));
    }
    Ok((1..=n as u64)
        .map(|k| {
            (0..dim)
                .map(|j| radical_inverse(k, HALTON_BASES[j]))
                .collect()
        })
        .collect())
}

/// Halton design of `n` points mapped affinely onto the design box of the space.
pub fn halton_design(space: &InputSpace, n: usize) -> Result<Vec<Vec<f64>>, SamplingError> {
    let unit = halton_unit(n, space.dimension())?;
    Ok(unit
        .into_iter()
        .map(|u| {
            u.iter()
                .zip(space.design_bounds())
                .map(|(&v, &(lo, hi))| lo + v * (hi - lo))
                .collect()
        })
        .collect())
}

/// One-dimensional Gaussian quadrature rule in standardized coordinates.
/// Weights sum to one (probability-measure normalization).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Probabilists' Gauss–Hermite rule with `P + 1` nodes, exact for polynomials
/// of degree `<= 2P + 1` against the standard Normal measure.
pub fn gauss_hermite(order: usize) -> Quadrature1d {
    // Jacobi matrix of the probabilists' Hermite recurrence He_{k+1} = x He_k - k He_{k-1}.
    golub_welsch(order + 1, |k| (k as f64).sqrt())
}

/// Gauss–Legendre rule with `P + 1` nodes normalized to the uniform
/// probability measure on `[-1, 1]`, exact for degree `<= 2P + 1`.
pub fn gauss_legendre(order: usize) -> Quadrature1d {
    golub_welsch(order + 1, |k| {
        let kf = k as f64;
        kf / (4.0 * kf * kf - 1.0).sqrt()
    })
}

/// Golub–Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
/// matrix with zero diagonal and off-diagonal `beta(k)`, weights the squared
/// first eigenvector components. Symmetric rules are symmetrized exactly.
fn golub_welsch(n: usize, beta: impl Fn(usize) -> f64) -> Quadrature1d {
    if n == 1 {
        return Quadrature1d {
            nodes: vec![0.0],
            weights: vec![1.0],
        };
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = beta(k);
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eigen = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eigen.eigenvectors[(0, i)];
            (eigen.eigenvalues[i], v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Enforce the exact +/- symmetry of both weight functions.
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        weights[n / 2] = pairs[n / 2].1;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Quadrature1d { nodes, weights }
}

/// Tensorized quadrature rule over the input space: `(P+1)^d` nodes carrying
/// both standardized and physical coordinates plus product weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureRule {
    order: usize,
    standardized_nodes: Vec<Vec<f64>>,
    physical_nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn standardized_nodes(&self) -> &[Vec<f64>] {
        &self.standardized_nodes
    }

    /// Nodes mapped back to physical coordinates, in the order the forward
    /// model must be evaluated.
    pub fn physical_nodes(&self) -> &[Vec<f64>] {
        &self.physical_nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Cartesian product of the per-dimension Gauss rules matching each marginal.
pub fn tensor_quadrature(order: usize, space: &InputSpace) -> QuadratureRule {
    let rules: Vec<Quadrature1d> = space
        .marginals()
        .iter()
        .map(|m| match m {
            Marginal::Normal { .. } => gauss_hermite(order),
            Marginal::Uniform { .. } => gauss_legendre(order),
        })
        .collect();
    let d = space.dimension();
    let total = (order + 1).pow(d as u32);
    let mut standardized_nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut index = vec![0usize; d];
    loop {
        let node: Vec<f64> = (0..d).map(|j| rules[j].nodes[index[j]]).collect();
        let weight: f64 = (0..d).map(|j| rules[j].weights[index[j]]).product();
        standardized_nodes.push(node);
        weights.push(weight);
        // Odometer increment over the tensor grid.
        let mut j = d;
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            index[j] += 1;
            if index[j] <= order {
                break;
            }
            index[j] = 0;
        }
        if index.iter().all(|&i| i == 0) {
            break;
        }
    }
    let physical_nodes = standardized_nodes
        .iter()
        .map(|z| space.unstandardize(z))
        .collect();
    QuadratureRule {
        order,
        standardized_nodes,
        physical_nodes,
        weights,
    }
}

/// Star-discrepancy approximation of 2-D unit-square points, evaluated on the
/// corners of a `resolution x resolution` grid.
pub fn star_discrepancy_grid(points: &[Vec<f64>], resolution: usize) -> f64 {
    let n = points.len() as f64;
    let mut worst: f64 = 0.0;
    for i in 1..=resolution {
        let u = i as f64 / resolution as f64;
        for j in 1..=resolution {
            let v = j as f64 / resolution as f64;
            let count = points.iter().filter(|p| p[0] < u && p[1] < v).count() as f64;
            worst = worst.max((count / n - u * v).abs());
        }
    }
    worst
}
