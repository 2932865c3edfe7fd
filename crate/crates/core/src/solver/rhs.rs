//! Semi-discrete right-hand sides of the radial system.
//!
//! Mass is updated in flux form `r² ρₜ = -∂ᵣ(r² ρ v)` with face fluxes, so the
//! cell sum `Σ r_i² ρ_i dr` changes only through the outer face. Convective
//! terms use first-order upwind differences on the sign of the local transport
//! speed; pressure and stress gradients use second-order central differences.

use crate::error::{Error, Result};
use crate::model::{equilibrium_stress, pressure, FluidParams, RadialGrid, Rates, State};
use crate::scalar::Real;

use super::bc::{apply_bc, Ghosted, OuterBc};

/// Discretisation of the transport terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// First-order upwind convection (the solver's scheme).
    #[default]
    Upwind,
    /// Second-order central differences everywhere (reference evaluations).
    Central,
}

/// Right-hand side plus the mass flux `r² ρ v` through the outer face.
#[derive(Debug, Clone)]
pub(crate) struct Evaluated<T> {
    pub rates: Rates<T>,
    pub outer_flux: T,
}

#[inline]
fn upwind<T: Real>(f: &[T], i: usize, speed: T, dr: T) -> T {
    if speed > T::zero() {
        (Ghosted::at(f, i, 0) - Ghosted::at(f, i, -1)) / dr
    } else {
        (Ghosted::at(f, i, 1) - Ghosted::at(f, i, 0)) / dr
    }
}

#[inline]
fn central<T: Real>(f: &[T], i: usize, dr: T) -> T {
    (Ghosted::at(f, i, 1) - Ghosted::at(f, i, -1)) / (T::lit(2.0) * dr)
}

pub(crate) fn evaluate_nonstiff<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
    stencil: Stencil,
) -> Result<Evaluated<T>> {
    state.check_shape(grid)?;
    let n = grid.n_cells;
    let dr = grid.dr;
    let g = apply_bc(state, grid, params, outer);
    let p: Vec<T> = g
        .rho
        .iter()
        .map(|&x| pressure(x, params))
        .collect::<Result<_>>()?;

    let two = T::lit(2.0);
    let two_thirds = two / T::lit(3.0);

    // r_{i+1/2}² (ρ v)_{i+1/2} for faces -1 ..= n-1
    let face_flux = |i: isize| {
        let rf = grid.face(i);
        let vf = g.face_velocity(i);
        let j = (i + super::bc::GHOSTS as isize) as usize;
        let rho_up = if vf > T::zero() {
            g.rho[j]
        } else {
            g.rho[j + 1]
        };
        rf * rf * vf * rho_up
    };

    let mut out = Rates::zeros(n);
    let mut left = face_flux(-1);
    for i in 0..n {
        let r = grid.centers[i];
        let rho = state.rho[i];
        let v = state.v[i];
        let right = face_flux(i as isize);

        out.rho[i] = match stencil {
            Stencil::Upwind => -(right - left) / (r * r * dr),
            Stencil::Central => {
                let m = |k: isize| Ghosted::at(&g.rho, i, k) * Ghosted::at(&g.v, i, k);
                -(m(1) - m(-1)) / (two * dr) - two * rho * v / r
            }
        };
        left = right;

        let dv = match stencil {
            Stencil::Upwind => upwind(&g.v, i, v, dr),
            Stencil::Central => central(&g.v, i, dr),
        };
        out.v[i] = (-rho * v * dv - central(&p, i, dr)
            + two_thirds * central(&g.s1, i, dr)
            + two * state.s1[i] / r
            + central(&g.s2, i, dr))
            / rho;

        let drift = v - params.eps;
        let (ds1, ds2) = match stencil {
            Stencil::Upwind => (upwind(&g.s1, i, drift, dr), upwind(&g.s2, i, drift, dr)),
            Stencil::Central => (central(&g.s1, i, dr), central(&g.s2, i, dr)),
        };
        out.s1[i] = -drift * ds1;
        out.s2[i] = -drift * ds2;
    }
    let outer_flux = face_flux(n as isize - 1);

    if let Some((field, cell)) = out.first_non_finite() {
        return Err(Error::NonFinite {
            field,
            cell,
            step: 0,
            t: state.t.as_f64(),
        });
    }
    Ok(Evaluated {
        rates: out,
        outer_flux,
    })
}

/// Transport part of the relaxed system: everything except the relaxation
/// source `(eq - S̃)/(τρ)`, which the stiff substep integrates exactly.
pub fn rhs_nonstiff<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
) -> Result<Rates<T>> {
    Ok(evaluate_nonstiff(state, grid, params, outer, Stencil::Upwind)?.rates)
}

/// Full time derivative `∂ₜ(ρ, v, S̃₁, S̃₂)`: transport plus relaxation source.
pub fn rhs_full<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
    stencil: Stencil,
) -> Result<Rates<T>> {
    if !(params.tau > T::zero()) {
        return Err(Error::Structure(
            "relaxed right-hand side needs tau > 0".into(),
        ));
    }
    let mut rates = evaluate_nonstiff(state, grid, params, outer, stencil)?.rates;
    let (eq1, eq2) = equilibrium_stress(&state.v, grid, params)?;
    for i in 0..grid.n_cells {
        let k = params.tau * state.rho[i];
        rates.s1[i] = rates.s1[i] + (eq1[i] - state.s1[i]) / k;
        rates.s2[i] = rates.s2[i] + (eq2[i] - state.s2[i]) / k;
    }
    Ok(rates)
}

/// Classical Navier-Stokes right-hand side: the stresses are replaced by their
/// Newtonian values before evaluating the momentum equation. Returns the state
/// with those stresses filled in alongside the rates; the stress rates are the
/// equilibrium stresses of `∂ₜv`.
pub(crate) fn evaluate_classical<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
) -> Result<Evaluated<T>> {
    let (s1, s2) = equilibrium_stress(&state.v, grid, params)?;
    let closed = State {
        s1,
        s2,
        ..state.clone()
    };
    let mut ev = evaluate_nonstiff(&closed, grid, params, outer, Stencil::Upwind)?;
    let (t1, t2) = equilibrium_stress(&ev.rates.v, grid, params)?;
    ev.rates.s1 = t1;
    ev.rates.s2 = t2;
    Ok(ev)
}

pub fn rhs_classical<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
) -> Result<Rates<T>> {
    Ok(evaluate_classical(state, grid, params, outer)?.rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pressure_prime;

    fn grid(n: usize) -> RadialGrid<f64> {
        RadialGrid::new(9.0, n).unwrap()
    }

    #[test]
    fn equilibrium_is_steady() {
        let g = grid(64);
        let s = State::equilibrium(&g);
        let p = FluidParams::default();
        for stencil in [Stencil::Upwind, Stencil::Central] {
            let r = rhs_full(&s, &g, &p, OuterBc::Extrapolate, stencil).unwrap();
            for f in r.fields() {
                assert!(f.iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn constant_deviatoric_stress_drives_geometric_source() {
        let g = grid(64);
        let mut s = State::equilibrium(&g);
        let c = 0.7;
        s.s1 = vec![c; 64];
        // the closed outer end continues constants exactly
        let r = rhs_nonstiff(&s, &g, &FluidParams::default(), OuterBc::Reflect).unwrap();
        for (i, &ri) in g.centers.iter().enumerate() {
            assert!((r.v[i] - 2.0 * c / ri).abs() < 1e-13, "cell {i}");
            assert_eq!(r.rho[i], 0.0);
            assert_eq!(r.s1[i], 0.0);
        }
    }

    struct Manufactured;

    impl Manufactured {
        fn g(r: f64) -> (f64, f64) {
            let z = r - 5.0;
            let g = (-z * z).exp();
            (g, -2.0 * z * g)
        }
        fn fields(r: f64) -> [(f64, f64); 4] {
            let (g, dg) = Self::g(r);
            [
                (1.0 + 0.1 * g, 0.1 * dg),
                (0.05 * (r - 1.0) * g, 0.05 * (g + (r - 1.0) * dg)),
                (0.02 * g, 0.02 * dg),
                (-0.03 * g, -0.03 * dg),
            ]
        }
        fn nonstiff(r: f64, p: &FluidParams<f64>) -> [f64; 4] {
            let [(rho, drho), (v, dv), (s1, ds1), (_, ds2)] = Self::fields(r);
            let dp = pressure_prime(rho, p).unwrap() * drho;
            [
                -(drho * v + rho * dv) - 2.0 * rho * v / r,
                (-rho * v * dv - dp + 2.0 / 3.0 * ds1 + 2.0 * s1 / r + ds2) / rho,
                -(v - p.eps) * ds1,
                -(v - p.eps) * ds2,
            ]
        }
    }

    fn max_error(n: usize, stencil: Stencil, p: &FluidParams<f64>) -> f64 {
        let g = grid(n);
        let mut s = State::equilibrium(&g);
        for (i, &r) in g.centers.iter().enumerate() {
            let f = Manufactured::fields(r);
            s.rho[i] = f[0].0;
            s.v[i] = f[1].0;
            s.s1[i] = f[2].0;
            s.s2[i] = f[3].0;
        }
        let ev = evaluate_nonstiff(&s, &g, p, OuterBc::Extrapolate, stencil).unwrap();
        let mut worst = 0.0f64;
        for (i, &r) in g.centers.iter().enumerate() {
            let exact = Manufactured::nonstiff(r, p);
            for (k, f) in ev.rates.fields().iter().enumerate() {
                worst = worst.max((f[i] - exact[k]).abs());
            }
        }
        worst
    }

    #[test]
    fn manufactured_convergence() {
        let p = FluidParams::default().with_eps(0.1);
        for (stencil, order) in [(Stencil::Upwind, 0.9), (Stencil::Central, 1.9)] {
            let e: Vec<f64> = [100, 200, 400]
                .iter()
                .map(|&n| max_error(n, stencil, &p))
                .collect();
            for w in e.windows(2) {
                let observed = (w[0] / w[1]).log2();
                assert!(observed >= order, "{stencil:?}: {e:?}");
            }
        }
    }

    #[test]
    fn full_rhs_adds_relaxation_source() {
        let g = grid(64);
        let p = FluidParams::default();
        let mut s = State::equilibrium(&g);
        s.s2 = vec![0.3; 64];
        let r = rhs_full(&s, &g, &p, OuterBc::Extrapolate, Stencil::Upwind).unwrap();
        for &x in &r.s2 {
            assert!((x + 0.3 / p.tau).abs() < 1e-12);
        }
        let classical = p.with_tau(0.0);
        assert!(rhs_full(&s, &g, &classical, OuterBc::Extrapolate, Stencil::Upwind).is_err());
    }

    #[test]
    fn classical_linear_velocity_has_no_viscous_force() {
        // v = c r: eq1 = 0, eq2 = 3λc, both constant
        let g = grid(64);
        let p = FluidParams::default();
        let mut s = State::equilibrium(&g);
        let c = 0.01;
        s.v = g.centers.iter().map(|&r| c * r).collect();
        let (s1, s2) = equilibrium_stress(&s.v, &g, &p).unwrap();
        for i in 0..64 {
            assert!(s1[i].abs() < 1e-14);
            assert!((s2[i] - 3.0 * p.lambda * c).abs() < 1e-14);
        }
        let r = rhs_classical(&s, &g, &p, OuterBc::Extrapolate).unwrap();
        // interior cells: only convection -v v_r = -c² r remains
        for i in 2..62 {
            let ri = g.centers[i];
            assert!((r.v[i] + c * c * ri).abs() < 1e-12, "cell {i}: {}", r.v[i]);
        }
    }

    #[test]
    fn non_finite_input_is_reported() {
        let g = grid(16);
        let mut s = State::equilibrium(&g);
        s.s1[5] = f64::NAN;
        let err = rhs_nonstiff(&s, &g, &FluidParams::default(), OuterBc::Extrapolate).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err}");
    }
}
