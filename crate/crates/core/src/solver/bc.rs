//! Ghost-cell boundary conditions.
//!
//! At the wall `r = 1` velocity is mirrored with odd parity so the face value is
//! exactly zero; density and stresses are linearly extrapolated from the first
//! two cells, which keeps their wall gradients free. The outer boundary is
//! either open and non-reflecting (`Extrapolate`: outgoing characteristics are
//! extrapolated, the incoming one is set to rest) or a second wall (`Reflect`,
//! which closes the domain for exact mass accounting).

use crate::model::{FluidParams, RadialGrid, State};
use crate::scalar::Real;

/// Number of ghost cells on each side.
pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterBc {
    #[default]
    Extrapolate,
    Reflect,
}

/// Fields padded with `GHOSTS` cells per side; interior cell `i` lives at
/// index `i + GHOSTS`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ghosted<T> {
    pub rho: Vec<T>,
    pub v: Vec<T>,
    pub s1: Vec<T>,
    pub s2: Vec<T>,
}

impl<T: Real> Ghosted<T> {
    /// Value of `field` at interior index `i` offset by `k` cells.
    #[inline]
    pub fn at(field: &[T], i: usize, k: isize) -> T {
        field[(i as isize + GHOSTS as isize + k) as usize]
    }

    /// Velocity on the face between interior cells `i` and `i + 1`
    /// (`i = -1` is the wall, `i = n - 1` the outer face).
    #[inline]
    pub fn face_velocity(&self, i: isize) -> T {
        let j = (i + GHOSTS as isize) as usize;
        (self.v[j] + self.v[j + 1]) * T::lit(0.5)
    }
}

#[derive(Clone, Copy)]
enum Ghost {
    /// Mirror with a sign flip: the face value is exactly zero.
    Odd,
    /// Continue the slope of the two nearest cells: exact for linear profiles.
    Linear,
}

fn pad<T: Real>(f: &[T], wall: Ghost, outer: Ghost) -> Vec<T> {
    let n = f.len();
    let mut out = Vec::with_capacity(n + 2 * GHOSTS);
    match wall {
        Ghost::Odd => out.extend((0..GHOSTS).rev().map(|k| -f[k])),
        Ghost::Linear => {
            let slope = f[0] - f[1];
            out.extend((1..=GHOSTS).rev().map(|k| f[0] + slope * T::count(k)));
        }
    }
    out.extend_from_slice(f);
    match outer {
        Ghost::Odd => out.extend((0..GHOSTS).map(|k| -f[n - 1 - k])),
        Ghost::Linear => {
            let slope = f[n - 1] - f[n - 2];
            out.extend((1..=GHOSTS).map(|k| f[n - 1] + slope * T::count(k)));
        }
    }
    out
}

/// Continues `f` linearly past its last cell.
fn outer_linear<T: Real>(f: &[T], k: usize) -> T {
    let n = f.len();
    f[n - 1] + (f[n - 1] - f[n - 2]) * T::count(k)
}

/// Non-reflecting outer ghosts from the system linearised at rest.
///
/// With `Σ = 2S̃₁/3 + S̃₂` and `q = c²(ρ - 1) - Σ`, the pair `(v, q)` carries
/// waves of speed `±√k`, `k = c² + ν/τ`. The outgoing invariant `q + √k v`
/// and the two stationary combinations `kρ - q`, `λS̃₁ - 2μS̃₂` are
/// extrapolated; the incoming invariant `q - √k v` is held at its rest value 0.
/// With `τ = 0` the stresses are slaved to `v`, so only `q = c²(ρ - 1)` with
/// `k = c²` is characteristic and the stresses are extrapolated.
fn characteristic_outer<T: Real>(state: &State<T>, params: &FluidParams<T>) -> [[T; GHOSTS]; 4] {
    let one = T::one();
    let c2 = params.a_coef * params.gamma;
    let nu = params.longitudinal_viscosity();
    let relaxed = params.tau > T::zero();
    let k = if relaxed { c2 + nu / params.tau } else { c2 };
    let speed = k.sqrt();
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    let n = state.len();
    let sigma = |i: usize| {
        if relaxed {
            two_thirds * state.s1[i] + state.s2[i]
        } else {
            T::zero()
        }
    };
    let q = |i: usize| c2 * (state.rho[i] - one) - sigma(i);
    let tail = |f: &dyn Fn(usize) -> T| [f(n - 2), f(n - 1)];
    let outgoing = tail(&|i| q(i) + speed * state.v[i]);
    let stationary = tail(&|i| k * (state.rho[i] - one) - q(i));
    let shear = tail(&|i| params.lambda * state.s1[i] - T::lit(2.0) * params.mu * state.s2[i]);

    let mut ghosts = [[T::zero(); GHOSTS]; 4];
    for g in 0..GHOSTS {
        let q_g = outer_linear(&outgoing, g + 1) * T::lit(0.5);
        ghosts[1][g] = q_g / speed;
        let rho_dev = (outer_linear(&stationary, g + 1) + q_g) / k;
        ghosts[0][g] = one + rho_dev;
        if relaxed {
            let sigma_g = c2 * rho_dev - q_g;
            let s1 = (outer_linear(&shear, g + 1) + T::lit(2.0) * params.mu * sigma_g) / nu;
            ghosts[2][g] = s1;
            ghosts[3][g] = sigma_g - two_thirds * s1;
        } else {
            ghosts[2][g] = outer_linear(&state.s1, g + 1);
            ghosts[3][g] = outer_linear(&state.s2, g + 1);
        }
    }
    ghosts
}

/// Fills ghost cells for the wall condition `v(t, 1) = 0` and the chosen
/// outer condition.
pub fn apply_bc<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
) -> Ghosted<T> {
    debug_assert_eq!(state.len(), grid.n_cells);
    let fields = state.fields();
    let padded: Vec<Vec<T>> = match outer {
        OuterBc::Reflect => fields
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let parity = if j == 1 { Ghost::Odd } else { Ghost::Linear };
                pad(f, parity, parity)
            })
            .collect(),
        OuterBc::Extrapolate => {
            let ghosts = characteristic_outer(state, params);
            fields
                .iter()
                .zip(ghosts)
                .enumerate()
                .map(|(j, (f, outer))| {
                    let wall = if j == 1 { Ghost::Odd } else { Ghost::Linear };
                    let mut p = pad(f, wall, Ghost::Linear);
                    p.truncate(f.len() + GHOSTS);
                    p.extend(outer);
                    p
                })
                .collect()
        }
    };
    let [rho, v, s1, s2]: [Vec<T>; 4] = padded.try_into().expect("four fields");
    Ghosted { rho, v, s1, s2 }
}
