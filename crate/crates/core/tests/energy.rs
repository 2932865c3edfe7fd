use relaxns::energy::{
    apriori_report, energy_identity_residual, energy_series, mass_balance_residual, weighted_norms,
};
use relaxns::model::{
    make_initial_data, pressure_prime, FluidParams, InitConfig, RadialGrid, Rates, State,
};
use relaxns::solver::{rhs_full, run, OuterBc, SolverConfig, Stencil};
use relaxns::stencil::weighted_h_sq;

fn phi(r: f64) -> [f64; 3] {
    let z = r - 6.0;
    let g = (-z * z).exp();
    [g, -2.0 * z * g, (4.0 * z * z - 2.0) * g]
}

#[test]
fn equilibrium_diagnostics_vanish() {
    let grid = RadialGrid::new(21.0, 200).unwrap();
    let params = FluidParams::default();
    let s = State::equilibrium(&grid);
    let snap = weighted_norms(&s, &Rates::zeros(200), None, &grid, &params).unwrap();
    assert_eq!(snap.e_inst, 0.0);
    assert_eq!(snap.d_inst, 0.0);
    assert_eq!(snap.taylor_energy, 0.0);
    assert_eq!(snap.stress_l2, 0.0);
    assert!(!snap.second_derivatives);

    let cfg = SolverConfig {
        t_end: 0.2,
        output_every: 5,
        ..SolverConfig::default()
    };
    let traj = run(s, &grid, &params, &cfg).unwrap();
    let res = energy_identity_residual(&traj, &grid, &params).unwrap();
    assert!(res.first().unwrap().is_none() && res.last().unwrap().is_none());
    assert!(res.iter().flatten().all(|&x| x == 0.0));
    assert!(mass_balance_residual(&traj, &grid)
        .iter()
        .all(|&x| x == 0.0));
    let rep = apriori_report(&traj, &grid, &params).unwrap();
    assert!(rep.degenerate && rep.pass());
}

#[test]
fn frozen_density_bump_matches_quadrature_oracle() {
    let params = FluidParams::default();
    let delta = 1e-3;
    let grid = RadialGrid::new(21.0, 1600).unwrap();
    let mut s = State::equilibrium(&grid);
    for (i, &r) in grid.centers.iter().enumerate() {
        s.rho[i] = 1.0 + delta * phi(r)[0];
    }
    let rates = rhs_full(&s, &grid, &params, OuterBc::Extrapolate, Stencil::Upwind).unwrap();
    let snap = weighted_norms(&s, &rates, None, &grid, &params).unwrap();

    // rho_t = 0, stresses stay 0, v_t = -P'(rho) rho_r / rho
    let mut oracle = 0.0;
    for &r in &grid.centers {
        let [f, df, ddf] = phi(r);
        let rho = 1.0 + delta * f;
        let p1 = pressure_prime(rho, &params).unwrap();
        let p2 = (params.gamma - 1.0) * p1 / rho;
        let vt = -p1 * delta * df / rho;
        // d/dr of v_t
        let dvt = -(p2 * delta * df * delta * df + p1 * delta * ddf) / rho
            + p1 * delta * df * delta * df / (rho * rho);
        oracle += r * r * (delta * delta * (f * f + df * df + ddf * ddf) + vt * vt + dvt * dvt);
    }
    oracle *= grid.dr;
    assert!(
        ((snap.e_inst - oracle) / oracle).abs() < 1e-3,
        "{} vs {oracle}",
        snap.e_inst
    );
}

#[test]
fn energy_is_quadratic_in_the_amplitude() {
    let params = FluidParams::default();
    let grid = RadialGrid::new(21.0, 400).unwrap();
    for (a, b, c) in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)] {
        let e = |delta: f64| {
            let init = InitConfig {
                bump_amp: a * delta,
                vel_amp: b * delta,
                stress_perturb_amp: c * delta,
                ..InitConfig::default()
            };
            let s = make_initial_data(&init, &grid, &params).unwrap();
            let rates =
                rhs_full(&s, &grid, &params, OuterBc::Extrapolate, Stencil::Upwind).unwrap();
            weighted_norms(&s, &rates, None, &grid, &params)
                .unwrap()
                .e_inst
        };
        let ratio = e(1e-2) / e(1e-3);
        assert!(
            (ratio / 100.0 - 1.0).abs() < 0.01,
            "({a}, {b}, {c}): {ratio}"
        );
    }
}

#[test]
fn quadrature_consistency_under_refinement() {
    let value = |n: usize| {
        let grid = RadialGrid::new(21.0, n).unwrap();
        let f: Vec<f64> = grid.centers.iter().map(|&r| phi(r)[0]).collect();
        (grid.dr, weighted_h_sq(&grid.centers, grid.dr, &f, 2))
    };
    let (dr, a) = value(400);
    let (_, b) = value(800);
    assert!((a - b).abs() <= 10.0 * dr * dr * a, "{a} {b}");
}

fn bump_traj(
    n: usize,
    eps: f64,
) -> (
    RadialGrid<f64>,
    FluidParams<f64>,
    relaxns::solver::Trajectory<f64>,
) {
    let grid = RadialGrid::new(21.0, n).unwrap();
    let params = FluidParams::default().with_eps(eps);
    let init = InitConfig {
        bump_amp: 0.01,
        vel_amp: 0.005,
        ..InitConfig::default()
    };
    let s0 = make_initial_data(&init, &grid, &params).unwrap();
    let cfg = SolverConfig {
        t_end: 1.0,
        output_every: 10,
        ..SolverConfig::default()
    };
    let traj = run(s0, &grid, &params, &cfg).unwrap();
    (grid, params, traj)
}

#[test]
fn series_invariants() {
    let (grid, params, traj) = bump_traj(200, 0.0);
    let series = energy_series(&traj, &grid, &params).unwrap();
    assert!(series.windows(2).all(|w| w[1].e_running >= w[0].e_running));
    assert!(series
        .iter()
        .all(|s| s.taylor_energy >= 0.0 && s.stress_l2 >= 0.0));
    assert!(series.iter().all(|s| s.e_inst >= 0.0 && s.d_inst >= 0.0));
    assert!(!series[0].second_derivatives && !series.last().unwrap().second_derivatives);
    assert!(series[1].second_derivatives);
}

#[test]
fn identity_residual_converges() {
    let max = |n| {
        let (grid, params, traj) = bump_traj(n, 0.0);
        energy_identity_residual(&traj, &grid, &params)
            .unwrap()
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    };
    let (a, b) = (max(100), max(200));
    assert!(a / b >= 2.0, "{a:e} {b:e}");
}

#[test]
fn eps_terms_shift_the_residual_linearly() {
    let series = |eps| {
        let (grid, params, traj) = bump_traj(200, eps);
        energy_identity_residual(&traj, &grid, &params).unwrap()
    };
    let base = series(0.0);
    let shift = |eps| {
        series(eps)
            .iter()
            .zip(&base)
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
            .fold(0.0, f64::max)
    };
    let (a, b) = (shift(1e-3), shift(2e-3));
    assert!(a < 1e-5, "{a:e}");
    let slope = (b / a).log2();
    assert!((slope - 1.0).abs() < 0.2, "{slope}");
}

#[test]
fn apriori_ratio_is_monotone_in_amplitude() {
    let grid = RadialGrid::<f64>::new(41.0, 400).unwrap();
    let params = FluidParams::default();
    let ratios: Vec<f64> = [0.005, 0.05, 0.1]
        .iter()
        .map(|&amp| {
            let init = InitConfig {
                bump_amp: amp,
                bump_center: 10.0,
                ..InitConfig::default()
            };
            let s0 = make_initial_data(&init, &grid, &params).unwrap();
            let cfg = SolverConfig {
                t_end: 4.0,
                output_interval: Some(0.25),
                ..SolverConfig::default()
            };
            let traj = run(s0, &grid, &params, &cfg).unwrap();
            let rep = apriori_report(&traj, &grid, &params).unwrap();
            assert!(rep.pinch_ok && rep.max_ratio.is_finite());
            rep.max_ratio
        })
        .collect();
    let up = ratios.windows(2).all(|w| w[1] > w[0]);
    let down = ratios.windows(2).all(|w| w[1] < w[0]);
    assert!(up || down, "{ratios:?}");
}
