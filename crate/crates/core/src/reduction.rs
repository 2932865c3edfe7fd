//! Check that a radial state solves the three-dimensional equations under the
//! spherically symmetric ansatz `u = v x/r`,
//! `S = S̃₁ (x xᵀ/r² - I/3) + S̃₂ I`.
//!
//! Radial profiles and their time derivatives are interpolated with cubic
//! Lagrange stencils; spatial derivatives are central differences with step
//! `h = dr` along an orthonormal frame aligned with the sample point.

use crate::error::{Error, Result};
use crate::model::{pressure, FluidParams, RadialGrid, State};
use crate::scalar::Real;
use crate::solver::{OuterBc, Stencil};
use crate::stencil::cubic_interp;

struct Profiles<'a, T> {
    state: &'a State<T>,
    rho_t: &'a [T],
    v_t: &'a [T],
    r0: T,
    dr: T,
}

struct Point<T> {
    rho: T,
    u: [T; 3],
    s: [[T; 3]; 3],
    p: T,
}

impl<T: Real> Profiles<'_, T> {
    fn interp(&self, f: &[T], r: T) -> T {
        cubic_interp(self.r0, self.dr, f, r)
    }

    fn at(&self, x: [T; 3], params: &FluidParams<T>) -> Result<Point<T>> {
        let r = norm(x);
        let rho = self.interp(&self.state.rho, r);
        let v = self.interp(&self.state.v, r);
        let s1 = self.interp(&self.state.s1, r);
        let s2 = self.interp(&self.state.s2, r);
        let third = T::one() / T::lit(3.0);
        let mut s = [[T::zero(); 3]; 3];
        for (i, row) in s.iter_mut().enumerate() {
            for (j, sij) in row.iter_mut().enumerate() {
                let delta = if i == j { T::one() } else { T::zero() };
                *sij = s1 * (x[i] * x[j] / (r * r) - delta * third) + s2 * delta;
            }
        }
        Ok(Point {
            rho,
            u: x.map(|xi| v * xi / r),
            s,
            p: pressure(rho, params)?,
        })
    }
}

fn norm<T: Real>(x: [T; 3]) -> T {
    dot(x, x).sqrt()
}

fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal frame whose first axis is `x/|x|`. Differencing along it makes
/// the residual rotate with the sample point.
fn local_frame<T: Real>(x: [T; 3]) -> [[T; 3]; 3] {
    let r = norm(x);
    let e1 = x.map(|c| c / r);
    let k = (0..3)
        .min_by(|&i, &j| e1[i].abs().partial_cmp(&e1[j].abs()).expect("finite point"))
        .unwrap_or(0);
    let mut axis = [T::zero(); 3];
    axis[k] = T::one();
    let t = cross(e1, axis);
    let n = norm(t);
    let e2 = t.map(|c| c / n);
    [e1, e2, cross(e1, e2)]
}

/// Residuals `[mass, momentum_x, momentum_y, momentum_z]` of the 3D system at
/// each sample point, with `∂ₜ` taken from the radial right-hand side.
pub fn reduction_residual<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    points: &[[T; 3]],
) -> Result<Vec<[T; 4]>> {
    state.check_shape(grid)?;
    let dr = grid.dr;
    let two = T::lit(2.0);
    let lo = grid.r_min + two * dr;
    let hi = grid.r_max - two * dr;
    for x in points {
        let r = norm(*x);
        if !(r > lo && r < hi) {
            return Err(Error::Domain(format!(
                "sample point at |x| = {r} outside ({lo}, {hi})"
            )));
        }
    }
    let rates = crate::solver::evaluate_nonstiff(
        state,
        grid,
        params,
        OuterBc::Extrapolate,
        Stencil::Central,
    )?
    .rates;
    let prof = Profiles {
        state,
        rho_t: &rates.rho,
        v_t: &rates.v,
        r0: grid.centers[0],
        dr,
    };
    let h = dr;
    points
        .iter()
        .map(|&x| {
            let r = norm(x);
            let rho = prof.interp(&state.rho, r);
            let v = prof.interp(&state.v, r);
            let rho_t = prof.interp(prof.rho_t, r);
            let v_t = prof.interp(prof.v_t, r);
            // d/dt (rho u) along x/r
            let mom_t = rho_t * v + rho * v_t;
            let mut mass = rho_t;
            let mut mom = x.map(|xi| mom_t * xi / r);
            for e in local_frame(x) {
                let xp = [x[0] + h * e[0], x[1] + h * e[1], x[2] + h * e[2]];
                let xm = [x[0] - h * e[0], x[1] - h * e[1], x[2] - h * e[2]];
                let a = prof.at(xp, params)?;
                let b = prof.at(xm, params)?;
                let diff = |fa: T, fb: T| (fa - fb) / (two * h);
                mass = mass + diff(a.rho * dot(a.u, e), b.rho * dot(b.u, e));
                // column T e of the momentum flux ρ u⊗u + P I - S
                let column = |q: &Point<T>| {
                    let ue = dot(q.u, e);
                    let mut c = [T::zero(); 3];
                    for (i, ci) in c.iter_mut().enumerate() {
                        *ci = q.rho * q.u[i] * ue + q.p * e[i] - dot(q.s[i], e);
                    }
                    c
                };
                let (ca, cb) = (column(&a), column(&b));
                for i in 0..3 {
                    mom[i] = mom[i] + diff(ca[i], cb[i]);
                }
            }
            Ok([mass, mom[0], mom[1], mom[2]])
        })
        .collect()
}
