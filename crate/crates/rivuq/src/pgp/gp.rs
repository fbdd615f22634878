//! Gaussian-process regression of one POD mode amplitude.
//!
//! Kernel: squared exponential on inputs standardized to the unit box,
//! `k(x, x') = sigma^2 exp(-|x - x'|^2 / (2 l^2))`, plus a nugget `tau^2` on
//! the diagonal. Hyperparameters maximize the Gaussian log marginal
//! likelihood over a bounded log-space box with a deterministic multi-start
//! scheme: candidates from a Halton set over the box, the best of which are
//! polished by projected gradient ascent with backtracking line search.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::PgpError;
use crate::sampling::halton_unit;

/// Diagonal ridge (relative to the signal variance) always added to the
/// correlation matrix so the likelihood stays smooth in the hyperparameters.
const CORRELATION_RIDGE: f64 = 1e-12;

/// Hyperparameters in log space: `[ln l, ln sigma^2, ln tau^2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpHyperParams {
    pub ln_length: f64,
    pub ln_signal: f64,
    pub ln_nugget: f64,
}

impl GpHyperParams {
    fn from_array(theta: [f64; 3]) -> Self {
        Self {
            ln_length: theta[0],
            ln_signal: theta[1],
            ln_nugget: theta[2],
        }
    }
}

/// Bounds and budget of the hyperparameter search. Defaults assume inputs in
/// the unit box and targets normalized to unit scale.
#[derive(Clone, Debug)]
pub struct GpConfig {
    /// Length-scale bounds (standardized units).
    pub length_bounds: (f64, f64),
    /// Signal-variance bounds.
    pub signal_bounds: (f64, f64),
    /// Nugget bounds; the lower bound acts as tau_min.
    pub nugget_bounds: (f64, f64),
    /// Halton candidates screened over the box.
    pub candidates: usize,
    /// Candidates polished by local ascent (the restart count).
    pub restarts: usize,
    /// Iteration cap per local ascent.
    pub max_iterations: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            length_bounds: (1e-2, 1e1),
            signal_bounds: (1e-8, 1e4),
            nugget_bounds: (1e-10, 1e-2),
            candidates: 24,
            restarts: 8,
            max_iterations: 60,
        }
    }
}

impl GpConfig {
    fn log_bounds(&self) -> [(f64, f64); 3] {
        [
            (self.length_bounds.0.ln(), self.length_bounds.1.ln()),
            (self.signal_bounds.0.ln(), self.signal_bounds.1.ln()),
            (self.nugget_bounds.0.ln(), self.nugget_bounds.1.ln()),
        ]
    }
}

/// Squared-exponential correlation between two points.
pub fn sq_exp_kernel(x: &[f64], y: &[f64], length_scale: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-0.5 * sq / (length_scale * length_scale)).exp()
}

/// Matrix of pairwise squared distances between the rows of `inputs`.
pub fn squared_distances(inputs: &DMatrix<f64>) -> DMatrix<f64> {
    let n = inputs.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let sq: f64 = (0..inputs.ncols())
                .map(|c| {
                    let d = inputs[(i, c)] - inputs[(j, c)];
                    d * d
                })
                .sum();
            out[(i, j)] = sq;
            out[(j, i)] = sq;
        }
    }
    out
}

fn correlation_matrix(sqdist: &DMatrix<f64>, length_scale: f64) -> DMatrix<f64> {
    let inv = -0.5 / (length_scale * length_scale);
    let mut k = sqdist.map(|d| (inv * d).exp());
    for i in 0..k.nrows() {
        k[(i, i)] += CORRELATION_RIDGE;
    }
    k
}

fn covariance_matrix(sqdist: &DMatrix<f64>, params: GpHyperParams) -> DMatrix<f64> {
    let signal = params.ln_signal.exp();
    let nugget = params.ln_nugget.exp();
    let mut k = correlation_matrix(sqdist, params.ln_length.exp());
    k *= signal;
    for i in 0..k.nrows() {
        k[(i, i)] += nugget;
    }
    k
}

fn log_det_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    chol.l_dirty()
        .diagonal()
        .iter()
        .map(|&l| l.ln())
        .sum::<f64>()
        * 2.0
}

/// Log marginal likelihood of the targets under the GP prior, without gradient.
/// `None` when the covariance is not numerically positive definite.
pub fn log_marginal_value(
    sqdist: &DMatrix<f64>,
    targets: &DVector<f64>,
    params: GpHyperParams,
) -> Option<f64> {
    let n = targets.len() as f64;
    let k = covariance_matrix(sqdist, params);
    let chol = Cholesky::new(k)?;
    let alpha = chol.solve(targets);
    Some(
        -0.5 * targets.dot(&alpha)
            - 0.5 * log_det_from_cholesky(&chol)
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln(),
    )
}

/// Log marginal likelihood and its gradient with respect to
/// `(ln l, ln sigma^2, ln tau^2)`.
pub fn log_marginal_likelihood(
    sqdist: &DMatrix<f64>,
    targets: &DVector<f64>,
    params: GpHyperParams,
) -> Option<(f64, [f64; 3])> {
    let n = targets.len();
    let length = params.ln_length.exp();
    let signal = params.ln_signal.exp();
    let k = covariance_matrix(sqdist, params);
    let chol = Cholesky::new(k)?;
    let alpha = chol.solve(targets);
    let value = -0.5 * targets.dot(&alpha)
        - 0.5 * log_det_from_cholesky(&chol)
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    let k_inv = chol.inverse();
    // G = alpha alpha^T - K^-1; d lml / d theta = 0.5 tr(G dK/d theta).
    let correlation = correlation_matrix(sqdist, length);
    let inv_l2 = 1.0 / (length * length);
    let mut grad_length = 0.0;
    let mut grad_signal = 0.0;
    let mut grad_nugget = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = alpha[i] * alpha[j] - k_inv[(i, j)];
            // dK/d ln l = sigma^2 * Pi .* D^2 / l^2 (the ridge does not move).
            let pi_smooth = if i == j {
                correlation[(i, j)] - CORRELATION_RIDGE
            } else {
                correlation[(i, j)]
            };
            grad_length += g * signal * pi_smooth * sqdist[(i, j)] * inv_l2;
            grad_signal += g * signal * correlation[(i, j)];
            if i == j {
                grad_nugget += g;
            }
        }
    }
    let nugget = params.ln_nugget.exp();
    Some((
        value,
        [0.5 * grad_length, 0.5 * grad_signal, 0.5 * nugget * grad_nugget],
    ))
}

/// Cholesky with jitter escalation: on failure, a diagonal of
/// `jitter * scale` is added, growing tenfold up to `1e-6 * scale`.
fn cholesky_with_jitter(
    matrix: &DMatrix<f64>,
    scale: f64,
) -> Result<(Cholesky<f64, Dyn>, f64), PgpError> {
    if let Some(chol) = Cholesky::new(matrix.clone()) {
        return Ok((chol, 0.0));
    }
    let mut jitter = 1e-12;
    while jitter <= 1e-6 {
        let mut k = matrix.clone();
        for i in 0..k.nrows() {
            k[(i, i)] += jitter * scale;
        }
        if let Some(chol) = Cholesky::new(k) {
            return Ok((chol, jitter * scale));
        }
        jitter *= 10.0;
    }
    Err(PgpError::CholeskyFailure {
        jitter: 1e-6 * scale,
        size: matrix.nrows(),
    })
}

/// One fitted GP mode. Prediction is the conditional mean
/// `psi(x*) = sum_k beta_k pi(x*, x_k)`; the target normalization and the
/// signal variance are folded into `beta`.
#[derive(Clone, Debug)]
pub struct GpMode {
    inputs: DMatrix<f64>,
    length_scale: f64,
    signal_variance: f64,
    nugget: f64,
    beta: DVector<f64>,
    log_marginal: f64,
}

impl GpMode {
    pub fn from_parts(
        inputs: DMatrix<f64>,
        length_scale: f64,
        signal_variance: f64,
        nugget: f64,
        beta: DVector<f64>,
    ) -> Self {
        Self {
            inputs,
            length_scale,
            signal_variance,
            nugget,
            beta,
            log_marginal: f64::NAN,
        }
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn log_marginal(&self) -> f64 {
        self.log_marginal
    }

    pub fn training_size(&self) -> usize {
        self.inputs.nrows()
    }

    /// Conditional-mean prediction at a standardized point.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let inv = -0.5 / (self.length_scale * self.length_scale);
        (0..self.inputs.nrows())
            .map(|k| {
                let sq: f64 = (0..self.inputs.ncols())
                    .map(|c| {
                        let d = x[c] - self.inputs[(k, c)];
                        d * d
                    })
                    .sum();
                self.beta[k] * (inv * sq).exp()
            })
            .sum()
    }
}

/// Concentrated log marginal likelihood over `phi = [ln l, ln eta]` with
/// `eta = tau^2 / sigma^2`: the signal variance has the closed-form maximizer
/// `sigma_hat^2 = y^T B^-1 y / n` for `B = Pi + eta I`, which removes the flat
/// signal/length ridge of the raw three-parameter surface. Returns the
/// likelihood value, its gradient and `sigma_hat^2`.
fn profiled_likelihood(
    sqdist: &DMatrix<f64>,
    targets: &DVector<f64>,
    phi: [f64; 2],
) -> Option<(f64, [f64; 2], f64)> {
    let n = targets.len();
    let length = phi[0].exp();
    let eta = phi[1].exp();
    let correlation = correlation_matrix(sqdist, length);
    let mut b = correlation.clone();
    for i in 0..n {
        b[(i, i)] += eta;
    }
    let chol = Cholesky::new(b)?;
    let alpha = chol.solve(targets);
    let sigma_hat2 = targets.dot(&alpha) / n as f64;
    if !(sigma_hat2 > 0.0) || !sigma_hat2.is_finite() {
        return None;
    }
    let value = -0.5 * n as f64 * sigma_hat2.ln()
        - 0.5 * log_det_from_cholesky(&chol)
        - 0.5 * n as f64 * (1.0 + (2.0 * std::f64::consts::PI).ln());

    let b_inv = chol.inverse();
    let inv_l2 = 1.0 / (length * length);
    let mut quad_length = 0.0;
    let mut trace_length = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pi_smooth = if i == j {
                correlation[(i, j)] - CORRELATION_RIDGE
            } else {
                correlation[(i, j)]
            };
            let db = pi_smooth * sqdist[(i, j)] * inv_l2;
            quad_length += alpha[i] * db * alpha[j];
            trace_length += b_inv[(i, j)] * db;
        }
    }
    let grad_length = 0.5 * quad_length / sigma_hat2 - 0.5 * trace_length;
    let grad_eta = eta * (0.5 * alpha.dot(&alpha) / sigma_hat2 - 0.5 * b_inv.trace());
    Some((value, [grad_length, grad_eta], sigma_hat2))
}

/// Fit one GP mode by maximum likelihood over the bounded log-space box.
///
/// Targets are normalized to unit RMS before the search so the bounds in
/// `config` stay meaningful across modes of very different energy; the scale
/// is folded back into the dual weights. The search screens Halton candidates
/// over the box, runs projected gradient ascent from the best `restarts` of
/// them on the concentrated likelihood, and finishes with a Newton polish so
/// refits of numerically perturbed data land on identical hyperparameters.
pub fn gp_fit_mode(
    inputs: &DMatrix<f64>,
    targets: &DVector<f64>,
    config: &GpConfig,
) -> Result<GpMode, PgpError> {
    let n = inputs.nrows();
    if n < 3 {
        return Err(PgpError::TooFewSnapshots { need: 3, got: n });
    }
    if targets.len() != n {
        return Err(PgpError::DimensionMismatch(format!(
            "{} targets for {} inputs",
            targets.len(),
            n
        )));
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(PgpError::NonFinite);
    }

    let scale = (targets.dot(targets) / n as f64).sqrt();
    if scale == 0.0 {
        // Degenerate mode: predict identically zero.
        return Ok(GpMode {
            inputs: inputs.clone(),
            length_scale: config.length_bounds.1,
            signal_variance: config.signal_bounds.0,
            nugget: config.nugget_bounds.0,
            beta: DVector::zeros(n),
            log_marginal: f64::NAN,
        });
    }
    let normalized = targets / scale;
    let sqdist = squared_distances(inputs);
    let log_bounds = config.log_bounds();
    // Relative-nugget box spanning the admissible tau^2 range at unit signal.
    let bounds = [log_bounds[0], log_bounds[2]];

    let objective = |phi: &[f64; 2]| {
        profiled_likelihood(&sqdist, &normalized, *phi).map(|(v, g, _)| (v, g))
    };

    // Screen Halton candidates over the box plus one moderate default start.
    let mut candidates: Vec<[f64; 2]> = halton_unit(config.candidates.max(1), 2)
        .expect("two dimensions are always available")
        .into_iter()
        .map(|u| {
            [
                bounds[0].0 + u[0] * (bounds[0].1 - bounds[0].0),
                bounds[1].0 + u[1] * (bounds[1].1 - bounds[1].0),
            ]
        })
        .collect();
    candidates.push([clamp(0.3_f64.ln(), bounds[0]), clamp(1e-8_f64.ln(), bounds[1])]);
    let mut scored: Vec<([f64; 2], f64)> = candidates
        .into_iter()
        .filter_map(|phi| objective(&phi).map(|(value, _)| (phi, value)))
        .collect();
    if scored.is_empty() {
        return Err(PgpError::FitFailure {
            modes: vec![],
            message: "no positive-definite hyperparameter candidate".into(),
        });
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    scored.truncate(config.restarts.max(1));

    let mut best: Option<([f64; 2], f64)> = None;
    for (start, start_value) in scored {
        let (phi, value) = ascend(&objective, start, start_value, &bounds, config.max_iterations);
        if best.map_or(true, |(_, bv)| value > bv) {
            best = Some((phi, value));
        }
    }
    let (rough, rough_value) = best.expect("at least one restart ran");
    let (phi, log_marginal) = newton_polish(&objective, rough, rough_value, &bounds);

    let (_, _, sigma_hat2) = profiled_likelihood(&sqdist, &normalized, phi)
        .expect("polished point must stay factorizable");
    let eta = phi[1].exp();
    let signal = sigma_hat2.clamp(config.signal_bounds.0, config.signal_bounds.1);
    let nugget = (eta * signal).clamp(config.nugget_bounds.0, config.nugget_bounds.1);
    let params = GpHyperParams {
        ln_length: phi[0],
        ln_signal: signal.ln(),
        ln_nugget: nugget.ln(),
    };

    let k = covariance_matrix(&sqdist, params);
    let (chol, _) = cholesky_with_jitter(&k, signal)?;
    let alpha = chol.solve(&normalized);
    let beta = alpha * (signal * scale);

    Ok(GpMode {
        inputs: inputs.clone(),
        length_scale: params.ln_length.exp(),
        signal_variance: signal,
        nugget,
        beta,
        log_marginal,
    })
}

fn clamp(v: f64, (lo, hi): (f64, f64)) -> f64 {
    v.max(lo).min(hi)
}

/// Projected gradient ascent with backtracking line search inside the box.
fn ascend(
    sqdist: &DMatrix<f64>,
    targets: &DVector<f64>,
    start: [f64; 3],
    start_value: f64,
    bounds: &[(f64, f64); 3],
    max_iterations: usize,
) -> ([f64; 3], f64) {
    let mut theta = start;
    let mut value = start_value;
    let mut step = 0.25;
    let Some((v, mut grad)) =
        log_marginal_likelihood(sqdist, targets, GpHyperParams::from_array(theta))
    else {
        return (theta, value);
    };
    value = v;
    for _ in 0..max_iterations {
        let scale = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if scale < 1e-10 * (1.0 + value.abs()) {
            break;
        }
        let dir = [grad[0] / scale, grad[1] / scale, grad[2] / scale];
        let mut accepted = false;
        for _ in 0..25 {
            let cand = [
                clamp(theta[0] + step * dir[0], bounds[0]),
                clamp(theta[1] + step * dir[1], bounds[1]),
                clamp(theta[2] + step * dir[2], bounds[2]),
            ];
            let moved = cand
                .iter()
                .zip(&theta)
                .any(|(a, b)| (a - b).abs() > 1e-12);
            if !moved {
                step *= 0.5;
                continue;
            }
            match log_marginal_value(sqdist, targets, GpHyperParams::from_array(cand)) {
                Some(cand_value) if cand_value > value => {
                    theta = cand;
                    value = cand_value;
                    accepted = true;
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !accepted || step < 1e-8 {
            break;
        }
        step = (step * 1.8).min(1.0);
        match log_marginal_likelihood(sqdist, targets, GpHyperParams::from_array(theta)) {
            Some((v, g)) => {
                value = v;
                grad = g;
            }
            None => break,
        }
    }
    (theta, value)
}

/// Active-set Newton refinement of the likelihood maximum. The Hessian comes
/// from central differences of the analytic gradient; coordinates pinned at a
/// bound with an outward gradient are frozen.
fn newton_polish(
    sqdist: &DMatrix<f64>,
    targets: &DVector<f64>,
    start: [f64; 3],
    start_value: f64,
    bounds: &[(f64, f64); 3],
) -> ([f64; 3], f64) {
    let mut theta = start;
    let mut value = start_value;
    let h = 1e-4;
    for _ in 0..10 {
        let Some((f, g)) = log_marginal_likelihood(sqdist, targets, GpHyperParams::from_array(theta))
        else {
            break;
        };
        value = f;
        let free: Vec<usize> = (0..3)
            .filter(|&i| {
                let at_lower = theta[i] <= bounds[i].0 + 1e-10 && g[i] < 0.0;
                let at_upper = theta[i] >= bounds[i].1 - 1e-10 && g[i] > 0.0;
                !(at_lower || at_upper)
            })
            .collect();
        if free.is_empty() {
            break;
        }
        let gmax = free.iter().map(|&i| g[i].abs()).fold(0.0_f64, f64::max);
        if gmax < 1e-10 * (1.0 + f.abs()) {
            break;
        }
        let m = free.len();
        let mut hess = DMatrix::<f64>::zeros(m, m);
        let mut ok = true;
        for (col, &j) in free.iter().enumerate() {
            let mut plus = theta;
            plus[j] += h;
            let mut minus = theta;
            minus[j] -= h;
            match (
                log_marginal_likelihood(sqdist, targets, GpHyperParams::from_array(plus)),
                log_marginal_likelihood(sqdist, targets, GpHyperParams::from_array(minus)),
            ) {
                (Some((_, gp)), Some((_, gm))) => {
                    for (row, &i) in free.iter().enumerate() {
                        hess[(row, col)] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        for i in 0..m {
            for j in 0..i {
                let v = 0.5 * (hess[(i, j)] + hess[(j, i)]);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let rhs = DVector::from_fn(m, |r, _| -g[free[r]]);
        let Some(delta) = hess.lu().solve(&rhs) else {
            break;
        };
        if delta.iter().any(|d| !d.is_finite()) || delta.amax() > 0.5 {
            break;
        }
        let mut candidate = theta;
        for (r, &i) in free.iter().enumerate() {
            candidate[i] = clamp(candidate[i] + delta[r], bounds[i]);
        }
        match log_marginal_value(sqdist, targets, GpHyperParams::from_array(candidate)) {
            Some(cand_value) if cand_value >= f - 1e-9 * (1.0 + f.abs()) => {
                theta = candidate;
                value = cand_value;
                if delta.amax() < 1e-12 {
                    break;
                }
            }
            _ => break,
        }
    }
    (theta, value)
}
