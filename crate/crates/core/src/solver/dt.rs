use crate::error::{Error, Result};
use crate::model::{pressure_prime, FluidParams, RadialGrid, State};
use crate::scalar::Real;
use crate::structure::max_char_speed;

/// Largest characteristic speed over all cells.
pub fn max_speed<T: Real>(state: &State<T>, params: &FluidParams<T>) -> Result<T> {
    state
        .rho
        .iter()
        .zip(&state.v)
        .try_fold(T::zero(), |m, (&rho, &v)| {
            Ok(m.max(max_char_speed(rho, v, params)?))
        })
}

/// Hyperbolic CFL step `cfl·dr / max speed` for the relaxed system.
pub fn compute_dt<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    cfl: T,
) -> Result<T> {
    let s = max_speed(state, params)?;
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::Numeric(format!(
            "invalid maximum characteristic speed {s}"
        )));
    }
    Ok(cfl * grid.dr / s)
}

/// `cfl·min(dr/(max|v| + c), dr²ρ_min/(2(4μ/3 + λ)))` for the classical
/// baseline, whose viscous terms are integrated explicitly.
pub fn compute_dt_classical<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    cfl: T,
) -> Result<T> {
    let mut vmax = T::zero();
    let mut cmax = T::zero();
    for (&rho, &v) in state.rho.iter().zip(&state.v) {
        vmax = vmax.max(v.abs());
        cmax = cmax.max(pressure_prime(rho, params)?.sqrt());
    }
    let hyperbolic = grid.dr / (vmax + cmax);
    let parabolic =
        grid.dr * grid.dr * state.min_rho() / (T::lit(2.0) * params.longitudinal_viscosity());
    Ok(cfl * hyperbolic.min(parabolic))
}
