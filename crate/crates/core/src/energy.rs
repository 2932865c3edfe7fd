//! Weighted energy and dissipation functionals, the lower-order energy
//! balance, mass accounting and the a priori boundedness report.
//!
//! All spatial integrals use the cell-midpoint rule with weight `r²`, i.e.
//! `‖r f‖²_{L²} = Σ r_i² f_i² dr`; `H^m` norms add the weighted L² norms of the
//! first `m` radial derivatives.

use crate::error::{Error, Result};
use crate::model::{taylor_potential, FluidParams, RadialGrid, Rates, State};
use crate::scalar::Real;
use crate::solver::Trajectory;
use crate::stencil::{d1, d2, integrate_r2, weighted_h_sq, weighted_l2_sq};

/// Diagnostics at one snapshot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySnapshot<T> {
    pub t: T,
    /// Instantaneous energy (the quantity under the sup in `E(t)`).
    pub e_inst: T,
    /// Running maximum of `e_inst`, i.e. `E(t)`.
    pub e_running: T,
    /// Dissipation `D(t)`.
    pub d_inst: T,
    /// `∫ r²ρ dr`.
    pub mass: T,
    /// `∫ [r²Φ(ρ) + r²ρv²/2 + τr²ρS̃₁²/(6μ) + τr²ρS̃₂²/(2λ)] dr`.
    pub taylor_energy: T,
    /// `∫ [r²S̃₁²/(3μ) + r²S̃₂²/λ] dr`.
    pub stress_l2: T,
    /// `τε S̃₁(t,1)²/(8μ)`, the wall trace generated by the ε-shift.
    pub wall_trace: T,
    /// False when `∂ₜₜ` fields were not available and the `τ²` terms are omitted.
    pub second_derivatives: bool,
}

fn scaled<T: Real>(f: &[T], s: T) -> Vec<T> {
    f.iter().map(|&x| x * s).collect()
}

/// `∫ r²Φ(ρ) + ...` lower-order energy of a single state.
pub fn taylor_energy<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<T> {
    let half = T::lit(0.5);
    let c1 = params.tau / (T::lit(6.0) * params.mu);
    let c2 = params.tau / (T::lit(2.0) * params.lambda);
    let density = (0..grid.n_cells)
        .map(|i| {
            let rho = state.rho[i];
            Ok(taylor_potential(rho, params)?
                + half * rho * state.v[i] * state.v[i]
                + c1 * rho * state.s1[i] * state.s1[i]
                + c2 * rho * state.s2[i] * state.s2[i])
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(integrate_r2(&grid.centers, grid.dr, &density))
}

/// `∫ [r²S̃₁²/(3μ) + r²S̃₂²/λ] dr`.
pub fn stress_l2<T: Real>(state: &State<T>, grid: &RadialGrid<T>, params: &FluidParams<T>) -> T {
    let (r, dr) = (&grid.centers, grid.dr);
    weighted_l2_sq(r, dr, &state.s1) / (T::lit(3.0) * params.mu)
        + weighted_l2_sq(r, dr, &state.s2) / params.lambda
}

/// Evaluates `E`, `D` and the lower-order quantities at one snapshot.
///
/// `rates` are the first time derivatives; `rates_t` the second ones, when
/// available.
pub fn weighted_norms<T: Real>(
    state: &State<T>,
    rates: &Rates<T>,
    rates_t: Option<&Rates<T>>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<EnergySnapshot<T>> {
    state.check_shape(grid)?;
    let (r, dr) = (&grid.centers, grid.dr);
    let sqrt_tau = params.tau.sqrt();
    let tau2 = params.tau * params.tau;
    let rho_dev: Vec<T> = state.rho.iter().map(|&x| x - T::one()).collect();

    // k = 0 in H², k = 1 in H¹
    let mut e_inst = weighted_h_sq(r, dr, &rho_dev, 2)
        + weighted_h_sq(r, dr, &state.v, 2)
        + weighted_h_sq(r, dr, &scaled(&state.s1, sqrt_tau), 2)
        + weighted_h_sq(r, dr, &scaled(&state.s2, sqrt_tau), 2)
        + weighted_h_sq(r, dr, &rates.rho, 1)
        + weighted_h_sq(r, dr, &rates.v, 1)
        + weighted_h_sq(r, dr, &scaled(&rates.s1, sqrt_tau), 1)
        + weighted_h_sq(r, dr, &scaled(&rates.s2, sqrt_tau), 1);

    // |α| = 1, 2 derivatives of (ρ, v): ∂r, ∂t, ∂rr, ∂tr, ∂tt
    let mut d_inst = T::zero();
    for (f, ft) in [(&state.rho, &rates.rho), (&state.v, &rates.v)] {
        d_inst = d_inst
            + weighted_l2_sq(r, dr, &d1(f, dr))
            + weighted_l2_sq(r, dr, &d2(f, dr))
            + weighted_l2_sq(r, dr, ft)
            + weighted_l2_sq(r, dr, &d1(ft, dr));
    }
    d_inst = d_inst
        + weighted_h_sq(r, dr, &state.s1, 2)
        + weighted_h_sq(r, dr, &state.s2, 2)
        + weighted_h_sq(r, dr, &rates.s1, 1)
        + weighted_h_sq(r, dr, &rates.s2, 1);

    if let Some(tt) = rates_t {
        e_inst = e_inst
            + tau2
                * (weighted_l2_sq(r, dr, &tt.rho)
                    + weighted_l2_sq(r, dr, &tt.v)
                    + weighted_l2_sq(r, dr, &scaled(&tt.s1, sqrt_tau))
                    + weighted_l2_sq(r, dr, &scaled(&tt.s2, sqrt_tau)));
        d_inst = d_inst
            + weighted_l2_sq(r, dr, &tt.rho)
            + weighted_l2_sq(r, dr, &tt.v)
            + tau2 * (weighted_l2_sq(r, dr, &tt.s1) + weighted_l2_sq(r, dr, &tt.s2));
    }

    // S̃₁ at the wall by quadratic extrapolation
    let s1_wall = (T::lit(15.0) * state.s1[0] - T::lit(10.0) * state.s1[1]
        + T::lit(3.0) * state.s1[2])
        / T::lit(8.0);
    Ok(EnergySnapshot {
        t: state.t,
        e_inst,
        e_running: e_inst,
        d_inst,
        mass: integrate_r2(r, dr, &state.rho),
        taylor_energy: taylor_energy(state, grid, params)?,
        stress_l2: stress_l2(state, grid, params),
        wall_trace: params.tau * params.eps * s1_wall * s1_wall / (T::lit(8.0) * params.mu),
        second_derivatives: rates_t.is_some(),
    })
}

/// Three-point derivative weights at the middle of nonuniform nodes
/// `t0 < t1 < t2`; second-order accurate.
fn centered_weights<T: Real>(t0: T, t1: T, t2: T) -> [T; 3] {
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    [
        -h2 / (h1 * (h1 + h2)),
        (h2 - h1) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ]
}

fn combine<T: Real>(w: [T; 3], a: &[T], b: &[T], c: &[T]) -> Vec<T> {
    (0..a.len())
        .map(|i| w[0] * a[i] + w[1] * b[i] + w[2] * c[i])
        .collect()
}

/// `∂ₜₜ` fields at interior snapshots by centred differences of the cached
/// first derivatives; `None` at the two ends.
pub fn second_time_derivatives<T: Real>(traj: &Trajectory<T>) -> Vec<Option<Rates<T>>> {
    let n = traj.snapshots.len();
    (0..n)
        .map(|k| {
            if k == 0 || k + 1 >= n {
                return None;
            }
            let t = |j: usize| traj.snapshots[j].t;
            let w = centered_weights(t(k - 1), t(k), t(k + 1));
            let (a, b, c) = (
                &traj.rhs_cache[k - 1],
                &traj.rhs_cache[k],
                &traj.rhs_cache[k + 1],
            );
            Some(Rates {
                rho: combine(w, &a.rho, &b.rho, &c.rho),
                v: combine(w, &a.v, &b.v, &c.v),
                s1: combine(w, &a.s1, &b.s1, &c.s1),
                s2: combine(w, &a.s2, &b.s2, &c.s2),
            })
        })
        .collect()
}

/// Energy diagnostics for every snapshot, with the running sup filled in.
pub fn energy_series<T: Real>(
    traj: &Trajectory<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<Vec<EnergySnapshot<T>>> {
    let tt = second_time_derivatives(traj);
    let mut out = Vec::with_capacity(traj.snapshots.len());
    let mut running = T::zero();
    for ((s, rates), tt) in traj.snapshots.iter().zip(&traj.rhs_cache).zip(&tt) {
        let mut snap = weighted_norms(s, rates, tt.as_ref(), grid, params)?;
        running = running.max(snap.e_inst);
        snap.e_running = running;
        out.push(snap);
    }
    Ok(out)
}

/// `ε∫ τr²ρ(S̃₁²/2)ᵣ/(3μ) dr + ε∫ τr²ρ(S̃₂²/2)ᵣ/λ dr`.
fn eps_flux_terms<T: Real>(state: &State<T>, grid: &RadialGrid<T>, params: &FluidParams<T>) -> T {
    if params.eps == T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let sq = |f: &[T]| f.iter().map(|&x| half * x * x).collect::<Vec<T>>();
    let g1 = d1(&sq(&state.s1), grid.dr);
    let g2 = d1(&sq(&state.s2), grid.dr);
    let c1 = params.tau / (T::lit(3.0) * params.mu);
    let c2 = params.tau / params.lambda;
    let integrand: Vec<T> = (0..grid.n_cells)
        .map(|i| state.rho[i] * (c1 * g1[i] + c2 * g2[i]))
        .collect();
    params.eps * integrate_r2(&grid.centers, grid.dr, &integrand)
}

/// Normalisation floor for the energy identity residual.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Residual of the lower-order energy balance
/// `d/dt taylor_energy - ε-terms + stress_l2 = 0` at interior snapshots,
/// normalised by `max(stress_l2, e_inst, 1e-30)`. Entries at the first and
/// last snapshot are `None`.
pub fn energy_identity_residual<T: Real>(
    traj: &Trajectory<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<Vec<Option<T>>> {
    let n = traj.snapshots.len();
    if n < 3 {
        return Err(Error::Invalid(
            "energy identity residual needs at least 3 snapshots".into(),
        ));
    }
    let series = energy_series(traj, grid, params)?;
    identity_residual_from_series(traj, &series, grid, params)
}

pub(crate) fn identity_residual_from_series<T: Real>(
    traj: &Trajectory<T>,
    series: &[EnergySnapshot<T>],
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<Vec<Option<T>>> {
    let n = series.len();
    let mut out = vec![None; n];
    for k in 1..n.saturating_sub(1) {
        let w = centered_weights(series[k - 1].t, series[k].t, series[k + 1].t);
        let de = w[0] * series[k - 1].taylor_energy
            + w[1] * series[k].taylor_energy
            + w[2] * series[k + 1].taylor_energy;
        let eps_terms = eps_flux_terms(&traj.snapshots[k], grid, params);
        let raw = (de - eps_terms + series[k].stress_l2).abs();
        let norm = series[k]
            .stress_l2
            .max(series[k].e_inst)
            .max(T::lit(RESIDUAL_FLOOR));
        out[k] = Some(raw / norm);
    }
    Ok(out)
}

/// `|M(t) - M(0) + outflow(t)| / M(0)` per snapshot, `M = ∫r²ρ dr`, where
/// `outflow` is the mass that left through the outer face.
pub fn mass_balance_residual<T: Real>(traj: &Trajectory<T>, grid: &RadialGrid<T>) -> Vec<T> {
    let mass = |s: &State<T>| integrate_r2(&grid.centers, grid.dr, &s.rho);
    let m0 = mass(&traj.snapshots[0]);
    traj.snapshots
        .iter()
        .zip(&traj.outer_outflow)
        .map(|(s, &out)| (mass(s) - m0 + out).abs() / m0)
        .collect()
}

/// Density pinch band assumed by the a priori estimates.
pub const PINCH_LOW: f64 = 0.75;
pub const PINCH_HIGH: f64 = 1.25;
/// Largest admissible relative growth rate of the energy ratio over the final
/// quarter of a run, per unit time.
pub const GROWTH_RATE_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriReport<T> {
    /// `(t, [E(t) + ∫₀ᵗ D ds] / E(0))`.
    pub ratio: Vec<(T, T)>,
    pub max_ratio: T,
    /// Relative growth of the ratio over the final quarter, per unit time.
    pub final_quarter_growth: T,
    pub rho_min: T,
    pub rho_max: T,
    pub pinch_ok: bool,
    /// `E(0) = 0`: nothing to bound.
    pub degenerate: bool,
    pub bounded: bool,
}

impl<T: Real> AprioriReport<T> {
    pub fn pass(&self) -> bool {
        self.pinch_ok && (self.degenerate || self.bounded)
    }
}

/// Empirical check of the a priori estimate: the normalised energy ratio stays
/// finite and stops growing, and the density stays in `[3/4, 5/4]`.
pub fn apriori_report<T: Real>(
    traj: &Trajectory<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<AprioriReport<T>> {
    let series = energy_series(traj, grid, params)?;
    Ok(apriori_from_series(traj, &series))
}

pub(crate) fn apriori_from_series<T: Real>(
    traj: &Trajectory<T>,
    series: &[EnergySnapshot<T>],
) -> AprioriReport<T> {
    let rho_min = traj
        .snapshots
        .iter()
        .map(State::min_rho)
        .fold(T::infinity(), T::min);
    let rho_max = traj
        .snapshots
        .iter()
        .map(State::max_rho)
        .fold(T::neg_infinity(), T::max);
    let pinch_ok = rho_min >= T::lit(PINCH_LOW) && rho_max <= T::lit(PINCH_HIGH);
    let e0 = series[0].e_running;
    let degenerate = !(e0 > T::zero());

    let mut ratio = Vec::with_capacity(series.len());
    let mut integral = T::zero();
    for (k, s) in series.iter().enumerate() {
        if k > 0 {
            let prev = &series[k - 1];
            integral = integral + T::lit(0.5) * (s.t - prev.t) * (s.d_inst + prev.d_inst);
        }
        let value = if degenerate {
            T::zero()
        } else {
            (s.e_running + integral) / e0
        };
        ratio.push((s.t, value));
    }
    let max_ratio = ratio.iter().map(|x| x.1).fold(T::zero(), T::max);
    let (t_end, r_end) = *ratio.last().expect("non-empty series");
    let t_q = t_end * T::lit(0.75);
    let (t_start, r_start) = *ratio
        .iter()
        .find(|(t, _)| *t >= t_q)
        .unwrap_or(ratio.last().unwrap());
    let final_quarter_growth = if degenerate || t_end <= t_start || r_end == T::zero() {
        T::zero()
    } else {
        (r_end - r_start) / (r_end * (t_end - t_start))
    };
    let bounded =
        degenerate || (max_ratio.is_finite() && final_quarter_growth < T::lit(GROWTH_RATE_LIMIT));
    AprioriReport {
        ratio,
        max_ratio,
        final_quarter_growth,
        rho_min,
        rho_max,
        pinch_ok,
        degenerate,
        bounded,
    }
}
