//! Relaxation-limit experiments: distance of relaxed runs from the classical
//! baseline, stress limit relations, and the well-prepared data scaling.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    equilibrium_stress, make_initial_data, FluidParams, InitConfig, RadialGrid, State,
};
use crate::scalar::Real;
use crate::solver::{run, run_classical, SolverConfig, Trajectory};
use crate::stencil::{weighted_h_sq, weighted_l2_sq};

fn stress_deviation<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    state.check_shape(grid)?;
    let (eq1, eq2) = equilibrium_stress(&state.v, grid, params)?;
    let d1 = state.s1.iter().zip(&eq1).map(|(&s, &e)| s - e).collect();
    let d2 = state.s2.iter().zip(&eq2).map(|(&s, &e)| s - e).collect();
    Ok((d1, d2))
}

/// `(‖r(S̃₁ - eq₁(v))‖, ‖r(S̃₂ - eq₂(v))‖)` in weighted L².
pub fn limit_relation_error<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<(T, T)> {
    let (d1, d2) = stress_deviation(state, grid, params)?;
    Ok((
        weighted_l2_sq(&grid.centers, grid.dr, &d1).sqrt(),
        weighted_l2_sq(&grid.centers, grid.dr, &d2).sqrt(),
    ))
}

/// Weighted H¹ distance of the stresses from equilibrium, divided by `√τ`.
pub fn well_prepared_deviation<T: Real>(
    initial: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<(T, T)> {
    if !(params.tau > T::zero()) {
        return Err(Error::Invalid(
            "well-prepared deviation is undefined for tau = 0".into(),
        ));
    }
    let (d1, d2) = stress_deviation(initial, grid, params)?;
    let root = params.tau.sqrt();
    Ok((
        weighted_h_sq(&grid.centers, grid.dr, &d1, 1).sqrt() / root,
        weighted_h_sq(&grid.centers, grid.dr, &d2, 1).sqrt() / root,
    ))
}

/// Field error, stress errors and wall time of one sweep member.
type Member<T> = (Result<(T, (T, T))>, f64);

/// Fitted `d log(error) / d log(τ)`; `None` with fewer than two usable points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Slopes<T> {
    pub field: Option<T>,
    pub s1: Option<T>,
    pub s2: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    /// Strictly decreasing.
    pub taus: Vec<T>,
    /// Sup over shared snapshot times of `‖r(ρ - ρ⁰)‖ + ‖r(v - v⁰)‖`.
    pub field_errors: Vec<Option<T>>,
    /// `limit_relation_error` at `t_end`.
    pub stress_errors: Vec<Option<(T, T)>>,
    pub slopes: Slopes<T>,
    /// Wall-clock seconds per member run.
    pub runtimes: Vec<f64>,
    pub baseline_runtime: f64,
    /// Abort message of each failed member run.
    pub failures: Vec<Option<String>>,
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn log_log_slope<T: Real>(pairs: &[(T, T)]) -> Option<T> {
    let pts: Vec<(T, T)> = pairs
        .iter()
        .filter(|(x, y)| *x > T::zero() && *y > T::zero())
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    if sxx > T::zero() {
        Some(sxy / sxx)
    } else {
        None
    }
}

fn field_distance<T: Real>(
    relaxed: &Trajectory<T>,
    baseline: &Trajectory<T>,
    grid: &RadialGrid<T>,
) -> Result<T> {
    if relaxed.snapshots.len() != baseline.snapshots.len() {
        return Err(Error::Numeric(format!(
            "snapshot counts differ: {} relaxed vs {} baseline",
            relaxed.snapshots.len(),
            baseline.snapshots.len()
        )));
    }
    let mut worst = T::zero();
    for (a, b) in relaxed.snapshots.iter().zip(&baseline.snapshots) {
        let scale = T::one().max(a.t.abs());
        if (a.t - b.t).abs() > T::lit(1e-12) * scale {
            return Err(Error::Numeric(format!(
                "snapshot times differ: {} vs {}",
                a.t, b.t
            )));
        }
        let drho: Vec<T> = a.rho.iter().zip(&b.rho).map(|(&x, &y)| x - y).collect();
        let dv: Vec<T> = a.v.iter().zip(&b.v).map(|(&x, &y)| x - y).collect();
        let e = weighted_l2_sq(&grid.centers, grid.dr, &drho).sqrt()
            + weighted_l2_sq(&grid.centers, grid.dr, &dv).sqrt();
        worst = worst.max(e);
    }
    Ok(worst)
}

/// Runs the relaxed system for each `τ` (in parallel, `ε = 0`) against one
/// classical baseline from the same `(ρ₀, v₀)`.
///
/// Snapshots are shared through `cfg.output_interval`, which defaults to
/// `t_end / 20`. A failed member run is recorded and left out of the fits.
pub fn tau_sweep<T: Real>(
    cfg: &SolverConfig<T>,
    grid: &RadialGrid<T>,
    template: &FluidParams<T>,
    init: &InitConfig<T>,
    taus: &[T],
) -> Result<SweepResult<T>> {
    if taus.is_empty() {
        return Err(Error::Invalid("tau list is empty".into()));
    }
    if let Some(t) = taus.iter().find(|&&t| !(t > T::zero() && t.is_finite())) {
        return Err(Error::Invalid(format!(
            "sweep taus must be positive, got {t}"
        )));
    }
    let mut taus = taus.to_vec();
    taus.sort_by(|a, b| b.partial_cmp(a).expect("finite taus"));
    taus.dedup();

    let mut cfg = *cfg;
    if cfg.output_interval.is_none() && cfg.t_end > T::zero() {
        cfg.output_interval = Some(cfg.t_end / T::lit(20.0));
    }
    cfg.validate()?;

    let classical = template.with_tau(T::zero()).with_eps(T::zero());
    classical.validate(true)?;
    let start = Instant::now();
    let seed = make_initial_data(init, grid, &classical)?;
    let baseline = run_classical(&seed.rho, &seed.v, grid, &classical, &cfg)?;
    let baseline_runtime = start.elapsed().as_secs_f64();

    let members: Vec<Member<T>> = taus
        .par_iter()
        .map(|&tau| {
            let start = Instant::now();
            let params = template.with_tau(tau).with_eps(T::zero());
            let outcome = make_initial_data(init, grid, &params)
                .and_then(|s0| run(s0, grid, &params, &cfg))
                .and_then(|traj| {
                    let field = field_distance(&traj, &baseline, grid)?;
                    let stress = limit_relation_error(traj.last(), grid, &params)?;
                    Ok((field, stress))
                });
            (outcome, start.elapsed().as_secs_f64())
        })
        .collect();

    let mut result = SweepResult {
        taus: taus.clone(),
        field_errors: Vec::with_capacity(taus.len()),
        stress_errors: Vec::with_capacity(taus.len()),
        slopes: Slopes::default(),
        runtimes: Vec::with_capacity(taus.len()),
        baseline_runtime,
        failures: Vec::with_capacity(taus.len()),
    };
    for (outcome, secs) in members {
        result.runtimes.push(secs);
        match outcome {
            Ok((field, stress)) => {
                result.field_errors.push(Some(field));
                result.stress_errors.push(Some(stress));
                result.failures.push(None);
            }
            Err(e) => {
                result.field_errors.push(None);
                result.stress_errors.push(None);
                result.failures.push(Some(e.to_string()));
            }
        }
    }
    let pairs = |pick: &dyn Fn(usize) -> Option<T>| -> Vec<(T, T)> {
        (0..taus.len())
            .filter_map(|i| pick(i).map(|e| (taus[i], e)))
            .collect()
    };
    result.slopes = Slopes {
        field: log_log_slope(&pairs(&|i| result.field_errors[i])),
        s1: log_log_slope(&pairs(&|i| result.stress_errors[i].map(|s| s.0))),
        s2: log_log_slope(&pairs(&|i| result.stress_errors[i].map(|s| s.1))),
    };
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_stresses_have_no_error() {
        let grid = RadialGrid::new(21.0, 200).unwrap();
        let params = FluidParams::default();
        let init = InitConfig {
            vel_amp: 0.02,
            ..InitConfig::default()
        };
        let s = make_initial_data(&init, &grid, &params).unwrap();
        assert_eq!(
            limit_relation_error(&s, &grid, &params).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            well_prepared_deviation(&s, &grid, &params).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn constant_offset_on_an_interval() {
        let grid = RadialGrid::new(5.0, 400).unwrap();
        let params = FluidParams::default();
        let mut s = State::equilibrium(&grid);
        let c = 0.3;
        let (a, b) = (2.0, 3.0);
        for (i, &r) in grid.centers.iter().enumerate() {
            if r > a && r < b {
                s.s1[i] = c;
            }
        }
        // midpoint rule integrates r² on whole cells exactly up to dr²/12 per cell
        let exact = c * ((b * b * b - a * a * a) / 3.0f64).sqrt();
        let (e1, e2) = limit_relation_error(&s, &grid, &params).unwrap();
        assert!((e1 - exact).abs() < 1e-4 * exact, "{e1} vs {exact}");
        assert_eq!(e2, 0.0);
    }

    #[test]
    fn deviation_scales_with_root_tau_and_amplitude() {
        let grid = RadialGrid::new(21.0, 400).unwrap();
        let init = InitConfig {
            vel_amp: 0.01,
            stress_perturb_amp: 1.0,
            ..InitConfig::default()
        };
        let dev = |tau: f64, amp: f64| {
            let params = FluidParams::default().with_tau(tau);
            let cfg = InitConfig {
                stress_perturb_amp: amp,
                ..init
            };
            let s = make_initial_data(&cfg, &grid, &params).unwrap();
            well_prepared_deviation(&s, &grid, &params).unwrap()
        };
        let a = dev(1e-2, 1.0);
        let b = dev(1e-4, 1.0);
        assert!(((a.0 - b.0) / a.0).abs() < 1e-10);
        assert!(((a.1 - b.1) / a.1).abs() < 1e-10);
        let c = dev(1e-2, 2.0);
        assert!((c.0 / a.0 - 2.0).abs() < 1e-10);
        assert!((c.1 / a.1 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn deviation_needs_positive_tau() {
        let grid = RadialGrid::new(21.0, 100).unwrap();
        let params = FluidParams::default().with_tau(0.0);
        let s = State::equilibrium(&grid);
        assert!(well_prepared_deviation(&s, &grid, &params).is_err());
    }

    #[test]
    fn slope_fit() {
        let pairs: Vec<(f64, f64)> = [1e-2f64, 1e-3, 1e-4]
            .iter()
            .map(|&t| (t, 3.0 * t.powf(0.75)))
            .collect();
        assert!((log_log_slope(&pairs).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(log_log_slope(&pairs[..1]), None);
    }

    #[test]
    fn single_tau_sweep_has_no_slope() {
        let grid = RadialGrid::new(21.0, 200).unwrap();
        let cfg = SolverConfig {
            t_end: 0.2,
            ..SolverConfig::default()
        };
        let init = InitConfig {
            stress_perturb_amp: 0.01,
            ..InitConfig::default()
        };
        let res = tau_sweep(&cfg, &grid, &FluidParams::default(), &init, &[1e-2]).unwrap();
        assert_eq!(res.slopes, Slopes::default());
        assert!(res.field_errors[0].unwrap() > 0.0);
        assert!(res.failures[0].is_none());
    }

    #[test]
    fn sweep_errors_decrease_with_tau() {
        let grid = RadialGrid::new(21.0, 200).unwrap();
        let cfg = SolverConfig {
            t_end: 0.5,
            ..SolverConfig::default()
        };
        let init = InitConfig {
            stress_perturb_amp: 0.01,
            ..InitConfig::default()
        };
        let res = tau_sweep(
            &cfg,
            &grid,
            &FluidParams::default(),
            &init,
            &[1e-3, 1.0, 1e-2],
        )
        .unwrap();
        assert_eq!(res.taus, vec![1.0, 1e-2, 1e-3]);
        let f: Vec<f64> = res.field_errors.iter().map(|e| e.unwrap()).collect();
        assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");
        assert!(res.slopes.s1.unwrap() >= 0.5);
    }
}
