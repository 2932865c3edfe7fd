use crate::error::{Error, Result};
use crate::model::{equilibrium_stress, FluidParams, RadialGrid, State};
use crate::scalar::Real;

/// Exact solution of `∂ₜS̃ᵢ = (eqᵢ - S̃ᵢ)/(τρ)` over `dt` with `ρ` and `v`
/// frozen: `S̃ᵢ ← eqᵢ + (S̃ᵢ - eqᵢ) exp(-dt/(τρ))`. Stable for any `dt/τ`.
pub fn relax_substep<T: Real>(
    state: &State<T>,
    dt: T,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<State<T>> {
    if !(params.tau > T::zero()) {
        return Err(Error::Structure("relaxation substep needs tau > 0".into()));
    }
    let (eq1, eq2) = equilibrium_stress(&state.v, grid, params)?;
    let mut out = state.clone();
    for i in 0..grid.n_cells {
        let decay = (-dt / (params.tau * state.rho[i])).exp();
        out.s1[i] = eq1[i] + (state.s1[i] - eq1[i]) * decay;
        out.s2[i] = eq2[i] + (state.s2[i] - eq2[i]) * decay;
    }
    Ok(out)
}
