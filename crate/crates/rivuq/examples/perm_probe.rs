use nalgebra::DMatrix;
use rivuq::pgp::{GpConfig, PgpSurrogate, SnapshotSet};
use rivuq::sampling::{halton_design, InputSpace, Marginal};

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

fn main() {
    let space = InputSpace::new(vec![
        Marginal::Uniform { lower: 3000.0, upper: 5000.0 },
        Marginal::Uniform { lower: 15.0, upper: 60.0 },
    ]).unwrap();
    let n = 60;
    let design = halton_design(&space, n).unwrap();
    let inputs = DMatrix::from_fn(n, 2, |k, j| design[k][j]);
    let outputs = DMatrix::from_fn(n, 14, |k, a| smooth_model(&design[k])[a]);
    let set = SnapshotSet::new(inputs.clone(), outputs.clone()).unwrap();
    let cfg = GpConfig::default();
    let s1 = PgpSurrogate::fit(&set, space.design_bounds(), &cfg).unwrap();

    let rinputs = DMatrix::from_fn(n, 2, |k, j| inputs[(n - 1 - k, j)]);
    let routputs = DMatrix::from_fn(n, 14, |k, a| outputs[(n - 1 - k, a)]);
    let rset = SnapshotSet::new(rinputs, routputs).unwrap();
    let s2 = PgpSurrogate::fit(&rset, space.design_bounds(), &cfg).unwrap();

    println!("{:>4} {:>14} {:>12} {:>12} {:>12} {:>12}", "mode", "sigma_val", "ell1", "ell2", "s2_1", "s2_2");
    for i in 0..s1.singular_values().len() {
        println!(
            "{:>4} {:>14.6e} {:>12.6} {:>12.6} {:>12.4e} {:>12.4e}",
            i,
            s1.singular_values()[i],
            s1.modes()[i].length_scale(),
            s2.modes()[i].length_scale(),
            s1.modes()[i].signal_variance(),
            s2.modes()[i].signal_variance(),
        );
    }
    let x = [4738.267113307811, 28.335072372119278];
    println!("eval diff: {:e}", (s1.eval(&x)[13 - 4] - s2.eval(&x)[13 - 4]).abs());
    // per-mode contribution difference at that point
    let u = |xx: &[f64]| -> Vec<f64> {
        xx.iter().zip(space.design_bounds()).map(|(&v, &(lo, hi))| (v - lo) / (hi - lo)).collect()
    };
    let ux = u(&x);
    for i in 0..s1.modes().len() {
        let p1 = s1.modes()[i].predict(&ux);
        let p2 = s2.modes()[i].predict(&ux);
        if (p1 - p2).abs() > 1e-12 {
            println!("mode {i}: psi1 = {p1:.6e}, psi2 = {p2:.6e}, diff = {:.3e}", (p1 - p2).abs());
        }
    }
}
