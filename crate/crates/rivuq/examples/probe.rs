// Temporary development probe for tuning the synthetic channel.
use nalgebra::DMatrix;
use rivuq::channel::SyntheticChannelSpec;
use rivuq::pc::{MultiIndexBasis, PcSurrogate};
use rivuq::sampling::{mc_sample, tensor_quadrature, InputSpace, Marginal};
use rivuq::stats::{ensemble_moments, kde_pdf, q2, EnsembleMatrix};

fn main() {
    let amplitude: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let mut spec = SyntheticChannelSpec::default();
    spec.bed_features = vec![(34.2, 0.9, -amplitude), (36.8, 0.9, amplitude)];
    let model = spec.build().unwrap();
    println!("amplitude = {amplitude}");
    println!(
        "rating curve: c = {:.6}, e = {:.6}, RC(4031) = {:.4}",
        model.boundary_conditions().rating_curve.coefficient,
        model.boundary_conditions().rating_curve.exponent,
        model.boundary_conditions().rating_curve.level(4031.0)
    );

    // 1) Feasibility over the extreme quadrature envelope.
    let mut max_fr2: f64 = 0.0;
    let mut failures = 0;
    let mut worst: Option<(f64, f64, String)> = None;
    for iq in 0..=40 {
        let q = 1300.0 + (6700.0 - 1300.0) * iq as f64 / 40.0;
        for ik in 0..=30 {
            let ks = 15.0 + 45.0 * ik as f64 / 30.0;
            match model.solve(q, ks) {
                Ok(sol) => {
                    for (i, &a) in sol.abscissas.iter().enumerate() {
                        let w = model.bed().width(a);
                        let fr2 = rivuq::channel::froude_squared(q, sol.depths[i], w, 9.81).unwrap();
                        if fr2 > max_fr2 {
                            max_fr2 = fr2;
                        }
                    }
                }
                Err(e) => {
                    failures += 1;
                    if worst.is_none() {
                        worst = Some((q, ks, e.to_string()));
                    }
                }
            }
        }
    }
    println!("envelope solves: failures = {failures}, max Fr^2 = {max_fr2:.4}");
    if let Some((q, ks, e)) = worst {
        println!("  first failure at Q={q:.0}, Ks={ks:.1}: {e}");
    }

    // 2) Quadrature nodes at P = 6, 10, 15.
    let space = InputSpace::new(vec![
        Marginal::Normal { mean: 4031.0, std: 400.0 },
        Marginal::Uniform { lower: 15.0, upper: 60.0 },
    ])
    .unwrap()
    .with_design_bounds(0, 3000.0, 5000.0);
    for p in [6usize, 10, 15] {
        let rule = tensor_quadrature(p, &space);
        let mut fails = 0;
        let mut fr_max: f64 = 0.0;
        for node in rule.physical_nodes() {
            match model.solve(node[0], node[1]) {
                Ok(sol) => {
                    for (i, &a) in sol.abscissas.iter().enumerate() {
                        let w = model.bed().width(a);
                        let fr2 =
                            rivuq::channel::froude_squared(node[0], sol.depths[i], w, 9.81).unwrap();
                        fr_max = fr_max.max(fr2);
                    }
                }
                Err(_) => fails += 1,
            }
        }
        println!("P={p}: {} nodes, failures = {fails}, max Fr^2 = {fr_max:.4}", rule.len());
    }

    // 3) Monotonicity over a 20x20 grid of the MC box.
    let mut mono_q_ok = true;
    let mut mono_k_ok = true;
    let mut min_dq: f64 = f64::INFINITY;
    let mut min_dk: f64 = f64::INFINITY;
    let grid = 20;
    let mut levels = vec![vec![Vec::new(); grid]; grid];
    for iq in 0..grid {
        let q = 2431.0 + (5631.0 - 2431.0) * iq as f64 / (grid - 1) as f64;
        for ik in 0..grid {
            let ks = 15.0 + 45.0 * ik as f64 / (grid - 1) as f64;
            levels[iq][ik] = model.solve_levels(q, ks).unwrap();
        }
    }
    for ik in 0..grid {
        for iq in 1..grid {
            for s in 0..14 {
                let d = levels[iq][ik][s] - levels[iq - 1][ik][s];
                min_dq = min_dq.min(d);
                if d <= 0.0 {
                    mono_q_ok = false;
                }
            }
        }
    }
    for iq in 0..grid {
        for ik in 1..grid {
            for s in 0..14 {
                let d = levels[iq][ik - 1][s] - levels[iq][ik][s];
                min_dk = min_dk.min(d);
                if d <= 0.0 {
                    mono_k_ok = false;
                }
            }
        }
    }
    println!("monotone in Q: {mono_q_ok} (min step {min_dq:.3e}); monotone in Ks3: {mono_k_ok} (min step {min_dk:.3e})");

    // 4) Reference-style ensemble: mean profile monotone, Marmande PDF shape.
    let n = 4000;
    let sample = mc_sample(&space, n, 20260810).unwrap();
    let rows: Vec<Vec<f64>> = sample
        .iter()
        .map(|x| model.solve_levels(x[0], x[1]).unwrap())
        .collect();
    let h = DMatrix::from_fn(n, 14, |k, a| rows[k][a]);
    let moments = ensemble_moments(&h).unwrap();
    let decreasing = moments.mean.windows(2).all(|w| w[1] < w[0]);
    println!("mean elevation decreasing downstream: {decreasing}");
    println!(
        "mean: {:?}",
        moments.mean.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
    println!(
        "std:  {:?}",
        moments.std.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );

    let marmande = model.station_nearest(36_000.0);
    for station in [0usize, 1, 4, 5, marmande, 7, 8] {
        let col: Vec<f64> = (0..n).map(|k| h[(k, station)]).collect();
        let curve = kde_pdf(&col, 512).unwrap();
        let modes = count_modes(&curve.density);
        println!(
            "station {station} (a = {:.2} km): modes = {modes}, skew = {:+.3}, ex-kurt = {:+.3}, normal-KS = {:.4}",
            model.stations()[station] / 1000.0,
            skewness(&col),
            excess_kurtosis(&col),
            normal_ks_distance(&col),
        );
    }

    // 5) Quick PC accuracy check at N = 49 and 121.
    let reference = EnsembleMatrix::new(h.clone(), "reference").unwrap();
    for p in [6usize, 10, 15] {
        let rule = tensor_quadrature(p, &space);
        let outputs = DMatrix::from_fn(rule.len(), 14, |k, a| {
            model.solve_levels(rule.physical_nodes()[k][0], rule.physical_nodes()[k][1]).unwrap()[a]
        });
        let basis = MultiIndexBasis::new(&space, p);
        let surrogate = PcSurrogate::fit(&outputs, &rule, &basis, &space).unwrap();
        let predicted = DMatrix::from_fn(n, 14, |k, a| {
            surrogate.eval(&sample[k]).unwrap()[a]
        });
        let predicted = EnsembleMatrix::new(predicted, "pc").unwrap();
        let scores = q2(&reference, &predicted).unwrap();
        let min = scores
            .per_station
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        println!(
            "PC P={p} (N={}): mean Q2 = {:.6}, min station Q2 = {:.6}",
            rule.len(),
            scores.mean,
            min
        );
    }
}

fn count_modes(density: &[f64]) -> usize {
    let peak = density.iter().cloned().fold(0.0_f64, f64::max);
    let mut modes = 0;
    for i in 1..density.len() - 1 {
        if density[i] > density[i - 1]
            && density[i] >= density[i + 1]
            && density[i] > 0.05 * peak
        {
            modes += 1;
        }
    }
    modes
}

fn excess_kurtosis(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|&v| (v - mean).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

fn skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|&v| (v - mean).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// KS distance between the standardized sample and the standard normal CDF.
fn normal_ks_distance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut z: Vec<f64> = values.iter().map(|&v| (v - mean) / std).collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let phi = |x: f64| 0.5 * (1.0 + erf(x / 2.0_f64.sqrt()));
    z.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi(x);
            let hi = ((i + 1) as f64 / n - f).abs();
            let lo = (f - i as f64 / n).abs();
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

fn erf(x: f64) -> f64 {
    // Abramowitz-Stegun 7.1.26 approximation, plenty for a diagnostic.
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    sign * y
}
