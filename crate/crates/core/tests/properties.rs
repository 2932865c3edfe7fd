use proptest::prelude::*;

use relaxns::io::{read_snapshot, write_snapshot, RunConfig};
use relaxns::lab::{log_log_slope, well_prepared_deviation};
use relaxns::model::{
    equilibrium_stress, make_initial_data, pressure, pressure_prime, taylor_potential, FluidParams,
    InitConfig, RadialGrid, State,
};
use relaxns::reduction::reduction_residual;
use relaxns::solver::{OuterBc, Splitting};
use relaxns::stencil::cubic_interp;
use relaxns::structure::{
    assemble_a0, assemble_a1, boundary_char_det, char_speeds, max_nonneg_check,
};

fn params(gamma: f64) -> FluidParams<f64> {
    FluidParams {
        gamma,
        ..FluidParams::default()
    }
}

fn rotate(q: [f64; 4], x: [f64; 3]) -> [f64; 3] {
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    let [w, a, b, c] = q.map(|c| c / n);
    let m = [
        [
            1.0 - 2.0 * (b * b + c * c),
            2.0 * (a * b - w * c),
            2.0 * (a * c + w * b),
        ],
        [
            2.0 * (a * b + w * c),
            1.0 - 2.0 * (a * a + c * c),
            2.0 * (b * c - w * a),
        ],
        [
            2.0 * (a * c - w * b),
            2.0 * (b * c + w * a),
            1.0 - 2.0 * (a * a + b * b),
        ],
    ];
    [0, 1, 2].map(|i| m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2])
}

fn bumpy_state(grid: &RadialGrid<f64>) -> State<f64> {
    let mut s = State::equilibrium(grid);
    for (i, &r) in grid.centers.iter().enumerate() {
        let g = (-(r - 4.5) * (r - 4.5) / 1.5).exp();
        s.rho[i] = 1.0 + 0.04 * g;
        s.v[i] = 0.02 * (r - 1.0) * g;
        s.s1[i] = 0.03 * g;
        s.s2[i] = -0.02 * g;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pressure_prime_matches_central_differences(rho in 0.5f64..2.0, gamma in 1.05f64..3.0) {
        let p = params(gamma);
        let h = 1e-6;
        let fd = (pressure(rho + h, &p).unwrap() - pressure(rho - h, &p).unwrap()) / (2.0 * h);
        let exact = pressure_prime(rho, &p).unwrap();
        prop_assert!(exact > 0.0);
        prop_assert!((fd - exact).abs() <= 1e-8 * exact, "{fd} vs {exact}");
    }

    #[test]
    fn taylor_potential_is_positive_away_from_one(rho in 0.5f64..2.0, gamma in 1.05f64..3.0) {
        let p = params(gamma);
        let phi = taylor_potential(rho, &p).unwrap();
        prop_assert!(phi >= 0.0);
        if (rho - 1.0).abs() > 1e-4 {
            prop_assert!(phi > 0.0);
        }
        prop_assert_eq!(taylor_potential(1.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn equilibrium_stress_is_linear(
        v1 in proptest::collection::vec(-1.0f64..1.0, 24),
        v2 in proptest::collection::vec(-1.0f64..1.0, 24),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let grid = RadialGrid::new(4.0, 24).unwrap();
        let p = FluidParams { mu: 0.7, lambda: 1.3, ..FluidParams::default() };
        let mix: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| alpha * a + beta * b).collect();
        let (a1, a2) = equilibrium_stress(&v1, &grid, &p).unwrap();
        let (b1, b2) = equilibrium_stress(&v2, &grid, &p).unwrap();
        let (m1, m2) = equilibrium_stress(&mix, &grid, &p).unwrap();
        let scale = (alpha.abs() + beta.abs()).max(1.0) * 200.0;
        for i in 0..24 {
            prop_assert!((m1[i] - (alpha * a1[i] + beta * b1[i])).abs() <= 1e-12 * scale);
            prop_assert!((m2[i] - (alpha * a2[i] + beta * b2[i])).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn initial_velocity_vanishes_at_the_wall(
        vel_amp in -0.5f64..0.5,
        center in 7.0f64..9.0,
        n in 200usize..600,
    ) {
        let grid = RadialGrid::new(16.0, n).unwrap();
        let cfg = InitConfig { vel_amp, bump_center: center, ..InitConfig::default() };
        let s = make_initial_data(&cfg, &grid, &FluidParams::default()).unwrap();
        let v_wall = cubic_interp(grid.centers[0], grid.dr, &s.v, 1.0);
        prop_assert!(v_wall.abs() <= 1e-12);
    }

    #[test]
    fn stress_deviation_scales_with_root_tau(amp in 0.1f64..2.0, vel_amp in -0.2f64..0.2) {
        let grid = RadialGrid::new(16.0, 300).unwrap();
        let cfg = InitConfig { stress_perturb_amp: amp, vel_amp, ..InitConfig::default() };
        let dev = |tau: f64| {
            let p = FluidParams::default().with_tau(tau);
            let s = make_initial_data(&cfg, &grid, &p).unwrap();
            well_prepared_deviation(&s, &grid, &p).unwrap()
        };
        let base = dev(1e-2);
        for tau in [1e-3, 1e-4] {
            let d = dev(tau);
            prop_assert!((d.0 - base.0).abs() <= 1e-10 * base.0);
            prop_assert!((d.1 - base.1).abs() <= 1e-10 * base.1);
        }
    }

    #[test]
    fn reduction_residual_is_rotation_invariant(
        q in proptest::array::uniform4(-1.0f64..1.0),
        dir in proptest::array::uniform3(-1.0f64..1.0),
        radius in 3.0f64..6.0,
    ) {
        let n = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        let qn = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3 && qn > 1e-3);
        let x = dir.map(|c| radius * c / n);
        let y = rotate(q, x);
        let grid = RadialGrid::new(10.0, 120).unwrap();
        let s = bumpy_state(&grid);
        let res = reduction_residual(&s, &grid, &FluidParams::default(), &[x, y]).unwrap();
        let mag = |r: &[f64; 4]| (r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
        prop_assert!((res[0][0] - res[1][0]).abs() <= 1e-10);
        prop_assert!((mag(&res[0]) - mag(&res[1])).abs() <= 1e-10);
        // the momentum residual rotates with the point
        let rotated = rotate(q, [res[0][1], res[0][2], res[0][3]]);
        for k in 0..3 {
            prop_assert!((rotated[k] - res[1][k + 1]).abs() <= 1e-10);
        }
    }

    #[test]
    fn admissible_states_are_symmetric_hyperbolic(
        rho in 0.75f64..1.25,
        v in -0.3f64..0.3,
        log_tau in -4.0f64..0.0,
        mu in 0.1f64..2.0,
        lambda in 0.1f64..2.0,
        eps in 0.0f64..0.5,
    ) {
        let p = FluidParams { tau: 10f64.powf(log_tau), mu, lambda, eps, ..FluidParams::default() };
        let a0 = assemble_a0(rho, &p).unwrap();
        prop_assert!(a0.cholesky().is_ok());
        prop_assert!(assemble_a1(rho, v, &p).unwrap().asymmetry() <= 1e-12);
        let speeds = char_speeds(rho, v, &p).unwrap();
        prop_assert!(speeds.iter().all(|s| s.is_finite()));
        prop_assert!(speeds[3] > v.abs());
    }

    #[test]
    fn wall_determinant_scales_as_eps_squared(
        rho in 0.75f64..1.25,
        log_tau in -4.0f64..0.0,
        mu in 0.1f64..2.0,
        lambda in 0.1f64..2.0,
    ) {
        let base = FluidParams { tau: 10f64.powf(log_tau), mu, lambda, ..FluidParams::default() };
        let ratio = |eps: f64| boundary_char_det(rho, &base.with_eps(eps)).unwrap() / (eps * eps);
        let r0 = ratio(1e-1);
        for eps in [1e-2, 1e-3] {
            prop_assert!((ratio(eps) - r0).abs() <= 1e-10 * r0.abs());
        }
    }

    #[test]
    fn wall_condition_is_maximal_nonnegative(
        rho in 0.75f64..1.25,
        log_tau in -4.0f64..0.0,
        mu in 0.1f64..2.0,
        lambda in 0.1f64..2.0,
        eps in 0.0f64..0.5,
        seed in any::<u64>(),
    ) {
        let p = FluidParams { tau: 10f64.powf(log_tau), mu, lambda, eps, ..FluidParams::default() };
        prop_assert!(max_nonneg_check(rho, &p, 16, seed).unwrap().pass);
    }

    #[test]
    fn power_laws_give_their_exponent(k in -2.0f64..3.0, c in 0.01f64..100.0) {
        let pairs: Vec<(f64, f64)> = [1e-1f64, 1e-2, 1e-3, 1e-4].iter().map(|&t| (t, c * t.powf(k))).collect();
        let slope = log_log_slope(&pairs).unwrap();
        prop_assert!((slope - k).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn snapshots_round_trip_bit_exactly(
        rho in proptest::collection::vec(0.5f64..2.0, 12),
        v in proptest::collection::vec(-1e3f64..1e3, 12),
        s1 in proptest::collection::vec(-1e-300f64..1e-300, 12),
        s2 in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 12),
    ) {
        let grid = RadialGrid::new(2.3, 12).unwrap();
        let state = State { t: 0.0, rho, v, s1, s2 };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&state, &grid, &path).unwrap();
        let back = read_snapshot::<f64>(&path).unwrap();
        let bits = |a: &[f64]| a.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.r), bits(&grid.centers));
        prop_assert_eq!(bits(&back.rho), bits(&state.rho));
        prop_assert_eq!(bits(&back.v), bits(&state.v));
        prop_assert_eq!(bits(&back.s1), bits(&state.s1));
        prop_assert_eq!(bits(&back.s2), bits(&state.s2));
    }

    #[test]
    fn config_text_round_trips(
        gamma in 1.05f64..3.0,
        tau in 1e-6f64..1.0,
        eps in 0.0f64..0.5,
        n_cells in 8usize..5000,
        bump_amp in -0.2f64..0.2,
        cfl in 0.05f64..1.0,
        lie in any::<bool>(),
        reflect in any::<bool>(),
        interval in proptest::option::of(1e-3f64..1.0),
    ) {
        let mut cfg = RunConfig::<f64>::default();
        cfg.params.gamma = gamma;
        cfg.params.tau = tau;
        cfg.params.eps = eps;
        cfg.grid.n_cells = n_cells;
        cfg.init.bump_amp = bump_amp;
        cfg.solver.cfl = cfl;
        cfg.solver.splitting = if lie { Splitting::Lie } else { Splitting::Strang };
        cfg.solver.outer_bc = if reflect { OuterBc::Reflect } else { OuterBc::Extrapolate };
        cfg.solver.output_interval = interval;
        let back = RunConfig::<f64>::parse_str(&cfg.to_config_string(), "echo").unwrap();
        prop_assert_eq!(back, cfg);
    }
}
