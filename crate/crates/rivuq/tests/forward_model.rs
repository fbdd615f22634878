//! Oracle checks for the backwater solver: uniform-flow equilibrium, classical
//! M1 profile behaviour, grid convergence and monotone responses.

use approx::assert_relative_eq;
use rivuq::channel::{
    froude_squared, normal_depth, BedProfile, BoundaryConditions, ChannelModel, FrictionZones,
    RatingCurve, SyntheticChannelSpec, GRAVITY,
};

/// Independent normal-depth oracle: bisection on the uniform-flow balance
/// `Q = Ks W h R(h)^(2/3) sqrt(S0)`, no shared code with the solver.
fn normal_depth_bisection(q: f64, ks: f64, w: f64, s0: f64) -> f64 {
    let flow = |h: f64| {
        let r = w * h / (w + 2.0 * h);
        ks * w * h * r.powf(2.0 / 3.0) * s0.sqrt()
    };
    let mut lo = 1e-6;
    let mut hi = 1.0;
    while flow(hi) < q {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if flow(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Uniform channel helper: constant slope and width, one friction zone, and a
/// rating curve passing exactly through the normal depth at `q`.
fn uniform_channel(q: f64, ks: f64, w: f64, s0: f64, depth_at_outlet: f64) -> ChannelModel {
    let length = 20_000.0;
    let bed = BedProfile::Synthetic {
        downstream_abscissa: length,
        datum: 0.0,
        mean_slope: s0,
        width: w,
        features: vec![],
    };
    let friction = FrictionZones::new(vec![0.0, length], vec![ks], 0).unwrap();
    // Power-law curve through (q, depth_at_outlet) with a generic exponent.
    let exponent = 0.6;
    let rating_curve = RatingCurve {
        coefficient: depth_at_outlet / q.powf(exponent),
        exponent,
    };
    ChannelModel::new(
        0.0,
        length,
        bed,
        friction,
        BoundaryConditions {
            nominal_discharge: q,
            rating_curve,
        },
        GRAVITY,
        50.0,
        14,
    )
    .unwrap()
}

#[test]
fn normal_depth_matches_bisection_oracle() {
    for (q, ks, w, s0) in [
        (4031.0, 38.0, 250.0, 3.3e-4),
        (500.0, 25.0, 80.0, 1e-3),
        (1379.0, 60.0, 250.0, 3.3e-4),
        (6683.0, 15.0, 250.0, 3.3e-4),
    ] {
        let newton = normal_depth(q, ks, w, s0).unwrap();
        let oracle = normal_depth_bisection(q, ks, w, s0);
        assert_relative_eq!(newton, oracle, max_relative = 1e-10);
    }
}

#[test]
fn uniform_channel_stays_at_normal_depth() {
    let (q, ks, w, s0) = (900.0, 32.0, 120.0, 5e-4);
    let hn = normal_depth(q, ks, w, s0).unwrap();
    let model = uniform_channel(q, ks, w, s0, hn);
    let sol = model.solve(q, ks).unwrap();
    for (&a, &h) in sol.abscissas.iter().zip(&sol.depths) {
        assert!(
            (h - hn).abs() < 1e-8,
            "depth {h} deviates from normal depth {hn} at {a} m"
        );
    }
}

#[test]
fn backwater_above_normal_depth_decays_monotonically_upstream() {
    let (q, ks, w, s0) = (900.0, 32.0, 120.0, 5e-4);
    let hn = normal_depth(q, ks, w, s0).unwrap();
    // Downstream depth 40% above normal depth: classical M1 curve.
    let model = uniform_channel(q, ks, w, s0, 1.4 * hn);
    let sol = model.solve(q, ks).unwrap();
    // Depth decreases monotonically toward hn moving upstream.
    for pair in sol.depths.windows(2) {
        assert!(pair[1] > pair[0] - 1e-12, "profile not monotone");
    }
    assert!(sol.depths.iter().all(|&h| h > hn - 1e-9));
    assert!((sol.depths[0] - hn).abs() < 0.05 * hn);

    // Same march on a 10x finer grid: fixed-step RK4 is already converged.
    let fine = model.with_grid_step(5.0).unwrap();
    let fine_sol = fine.solve(q, ks).unwrap();
    for (coarse, fine) in sol.station_depths.iter().zip(&fine_sol.station_depths) {
        assert!((coarse - fine).abs() < 1e-9);
    }
}

#[test]
fn grid_halving_changes_station_levels_below_tolerance() {
    let model = SyntheticChannelSpec::default().build().unwrap();
    let halved = model.with_grid_step(25.0).unwrap();
    for (q, ks) in [(4031.0, 37.5), (3000.0, 58.0), (5400.0, 16.0), (2500.0, 55.0)] {
        let coarse = model.solve_levels(q, ks).unwrap();
        let fine = halved.solve_levels(q, ks).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!(
                (a - b).abs() < 1e-5,
                "station level moved by {} for (Q, Ks) = ({q}, {ks})",
                (a - b).abs()
            );
        }
    }
}

#[test]
fn responses_are_monotone_over_the_input_box() {
    let model = SyntheticChannelSpec::default().build().unwrap();
    let grid = 8;
    let mut levels = vec![vec![Vec::new(); grid]; grid];
    for iq in 0..grid {
        let q = 2431.0 + (5631.0 - 2431.0) * iq as f64 / (grid - 1) as f64;
        for ik in 0..grid {
            let ks = 15.0 + 45.0 * ik as f64 / (grid - 1) as f64;
            levels[iq][ik] = model.solve_levels(q, ks).unwrap();
        }
    }
    for station in 0..model.station_count() {
        for ik in 0..grid {
            for iq in 1..grid {
                assert!(
                    levels[iq][ik][station] > levels[iq - 1][ik][station],
                    "level not increasing in Q at station {station}"
                );
            }
        }
        for iq in 0..grid {
            for ik in 1..grid {
                assert!(
                    levels[iq][ik][station] < levels[iq][ik - 1][station],
                    "level not decreasing in Ks at station {station}"
                );
            }
        }
    }
}

#[test]
fn profile_stays_subcritical_and_transcritical_flow_is_reported() {
    let model = SyntheticChannelSpec::default().build().unwrap();
    let sol = model.solve(5000.0, 60.0).unwrap();
    for (i, &a) in sol.abscissas.iter().enumerate() {
        let fr2 = froude_squared(sol.discharge, sol.depths[i], model.bed().width(a), GRAVITY)
            .unwrap();
        assert!(fr2 < 0.99);
    }

    // A steep narrow channel with a shallow boundary depth chokes.
    let steep = {
        let bed = BedProfile::Synthetic {
            downstream_abscissa: 10_000.0,
            datum: 0.0,
            mean_slope: 5e-3,
            width: 50.0,
            features: vec![],
        };
        ChannelModel::new(
            0.0,
            10_000.0,
            bed,
            FrictionZones::new(vec![0.0, 10_000.0], vec![60.0], 0).unwrap(),
            BoundaryConditions {
                nominal_discharge: 500.0,
                rating_curve: RatingCurve {
                    coefficient: 2.3 / 500.0_f64.powf(0.6),
                    exponent: 0.6,
                },
            },
            GRAVITY,
            50.0,
            4,
        )
        .unwrap()
    };
    match steep.solve(500.0, 60.0) {
        Err(rivuq::ChannelError::Transcritical { froude_sq, .. }) => {
            assert!(froude_sq >= 0.99);
        }
        other => panic!("expected transcritical error, got {other:?}"),
    }
}

#[test]
fn discharge_is_conserved_along_the_reach() {
    let model = SyntheticChannelSpec::default().build().unwrap();
    let sol = model.solve(3456.0, 44.0).unwrap();
    assert_eq!(sol.discharge, 3456.0);
}
