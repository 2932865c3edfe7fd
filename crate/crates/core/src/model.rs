//! Physical model: parameters, radial mesh, state, the γ-law pressure, the
//! Newtonian equilibrium stresses and the well-prepared initial data family.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stencil;

/// Model constants.
///
/// `tau` is the common relaxation time of both stress components; `eps` is the
/// speed shift applied to stress transport that turns the wall `r = 1` into a
/// non-characteristic boundary (`eps = 0` is the target system).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams<T> {
    pub gamma: T,
    pub mu: T,
    pub lambda: T,
    pub tau: T,
    pub eps: T,
    pub a_coef: T,
}

impl<T: Real> Default for FluidParams<T> {
    fn default() -> Self {
        Self {
            gamma: T::lit(1.4),
            mu: T::one(),
            lambda: T::one(),
            tau: T::lit(0.01),
            eps: T::zero(),
            a_coef: T::one(),
        }
    }
}

impl<T: Real> FluidParams<T> {
    /// Checks the parameter invariants. `tau == 0` passes only when
    /// `allow_classical` is set (the Navier-Stokes baseline path).
    pub fn validate(&self, allow_classical: bool) -> Result<()> {
        let bad = |msg: &str| Err(Error::Invalid(msg.to_string()));
        if !(self.gamma > T::one()) {
            return bad("gamma > 1 required");
        }
        if !(self.mu > T::zero()) {
            return bad("mu > 0 required");
        }
        if !(self.lambda > T::zero()) {
            return bad("lambda > 0 required");
        }
        if !(self.a_coef > T::zero()) {
            return bad("a_coef > 0 required");
        }
        if !(self.eps >= T::zero()) {
            return bad("eps >= 0 required");
        }
        if !(self.tau >= T::zero()) {
            return bad("tau >= 0 required");
        }
        if self.tau == T::zero() && !allow_classical {
            return bad("tau = 0 is only valid for the classical solver (use run-classical)");
        }
        Ok(())
    }

    /// `4μ/3 + λ`, the longitudinal viscosity.
    pub fn longitudinal_viscosity(&self) -> T {
        T::lit(4.0) * self.mu / T::lit(3.0) + self.lambda
    }

    pub fn with_tau(mut self, tau: T) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_eps(mut self, eps: T) -> Self {
        self.eps = eps;
        self
    }
}

/// Uniform cell-centred mesh on `[1, r_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    pub r_min: T,
    pub r_max: T,
    pub n_cells: usize,
    pub dr: T,
    pub centers: Vec<T>,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(r_max: T, n_cells: usize) -> Result<Self> {
        let r_min = T::one();
        if !(r_max > r_min) {
            return Err(Error::Invalid(format!("r_max = {r_max} must exceed 1")));
        }
        if n_cells < 8 {
            return Err(Error::Invalid(format!("n_cells = {n_cells} must be >= 8")));
        }
        let dr = (r_max - r_min) / T::count(n_cells);
        let half = T::lit(0.5);
        let centers = (0..n_cells)
            .map(|i| r_min + (T::count(i) + half) * dr)
            .collect();
        Ok(Self {
            r_min,
            r_max,
            n_cells,
            dr,
            centers,
        })
    }

    /// Radius of the face to the right of cell `i` (`face(-1)` is the wall).
    #[inline]
    pub fn face(&self, i: isize) -> T {
        self.r_min + T::from_isize(i + 1).expect("face index") * self.dr
    }

    /// Same extent, twice the cells.
    pub fn refined(&self) -> Self {
        Self::new(self.r_max, self.n_cells * 2).expect("refinement of a valid grid")
    }
}

/// Primitive fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub t: T,
    pub rho: Vec<T>,
    pub v: Vec<T>,
    pub s1: Vec<T>,
    pub s2: Vec<T>,
}

impl<T: Real> State<T> {
    /// The constant rest state `(1, 0, 0, 0)`.
    pub fn equilibrium(grid: &RadialGrid<T>) -> Self {
        let n = grid.n_cells;
        Self {
            t: T::zero(),
            rho: vec![T::one(); n],
            v: vec![T::zero(); n],
            s1: vec![T::zero(); n],
            s2: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn fields(&self) -> [&[T]; 4] {
        [&self.rho, &self.v, &self.s1, &self.s2]
    }

    pub fn check_shape(&self, grid: &RadialGrid<T>) -> Result<()> {
        let n = grid.n_cells;
        if self.fields().iter().any(|f| f.len() != n) {
            return Err(Error::Invalid(format!(
                "state arrays must all have length {n}"
            )));
        }
        Ok(())
    }

    pub fn min_rho(&self) -> T {
        self.rho.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_rho(&self) -> T {
        self.rho.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Time derivatives of the four fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates<T> {
    pub rho: Vec<T>,
    pub v: Vec<T>,
    pub s1: Vec<T>,
    pub s2: Vec<T>,
}

impl<T: Real> Rates<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            rho: vec![T::zero(); n],
            v: vec![T::zero(); n],
            s1: vec![T::zero(); n],
            s2: vec![T::zero(); n],
        }
    }

    pub fn fields(&self) -> [&[T]; 4] {
        [&self.rho, &self.v, &self.s1, &self.s2]
    }

    /// First non-finite entry as `(field, cell)`.
    pub fn first_non_finite(&self) -> Option<(&'static str, usize)> {
        const NAMES: [&str; 4] = ["rho_t", "v_t", "s1_t", "s2_t"];
        for (name, f) in NAMES.iter().zip(self.fields()) {
            if let Some(i) = f.iter().position(|x| !x.is_finite()) {
                return Some((name, i));
            }
        }
        None
    }
}

/// Gaussian bump family for the initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig<T> {
    pub bump_amp: T,
    pub bump_center: T,
    pub bump_width: T,
    pub vel_amp: T,
    pub stress_perturb_amp: T,
}

impl<T: Real> Default for InitConfig<T> {
    fn default() -> Self {
        Self {
            bump_amp: T::lit(0.01),
            bump_center: T::lit(8.0),
            bump_width: T::one(),
            vel_amp: T::zero(),
            stress_perturb_amp: T::zero(),
        }
    }
}

/// Largest admissible Gaussian profile value at either end of the domain.
pub const TAIL_TOLERANCE: f64 = 1e-12;

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if rho > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "density must be positive, got {rho}"
        )))
    }
}

/// γ-law pressure `A ρ^γ`.
pub fn pressure<T: Real>(rho: T, params: &FluidParams<T>) -> Result<T> {
    check_rho(rho)?;
    Ok(params.a_coef * rho.powf(params.gamma))
}

/// `P'(ρ) = A γ ρ^(γ-1)`, the squared sound speed.
pub fn pressure_prime<T: Real>(rho: T, params: &FluidParams<T>) -> Result<T> {
    check_rho(rho)?;
    Ok(params.a_coef * params.gamma * rho.powf(params.gamma - T::one()))
}

/// Pressure potential `A(ρ^γ - 1 - γ(ρ-1))/(γ-1)`, the relative internal
/// energy around `ρ = 1`. Non-negative, zero only at `ρ = 1`.
pub fn taylor_potential<T: Real>(rho: T, params: &FluidParams<T>) -> Result<T> {
    check_rho(rho)?;
    let g = params.gamma;
    let one = T::one();
    let raw = rho.powf(g) - one - g * (rho - one);
    Ok((params.a_coef * raw / (g - one)).max(T::zero()))
}

/// Newtonian stress targets `(2μ(v_r - v/r), λ(v_r + 2v/r))` per cell.
pub fn equilibrium_stress<T: Real>(
    v: &[T],
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    if v.len() != grid.n_cells {
        return Err(Error::Invalid(format!(
            "velocity has {} entries, grid has {}",
            v.len(),
            grid.n_cells
        )));
    }
    let dv = stencil::d1(v, grid.dr);
    let two = T::lit(2.0);
    let mut s1 = Vec::with_capacity(v.len());
    let mut s2 = Vec::with_capacity(v.len());
    for ((&vi, &dvi), &r) in v.iter().zip(&dv).zip(&grid.centers) {
        s1.push(two * params.mu * (dvi - vi / r));
        s2.push(params.lambda * (dvi + two * vi / r));
    }
    Ok((s1, s2))
}

/// Builds the Gaussian-bump initial state with a velocity that vanishes at the
/// wall and stresses within `stress_perturb_amp·√τ` of equilibrium.
pub fn make_initial_data<T: Real>(
    cfg: &InitConfig<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<State<T>> {
    if !(cfg.bump_width > T::zero()) {
        return Err(Error::Invalid("bump_width must be positive".into()));
    }
    if !(cfg.bump_center > T::one()) {
        return Err(Error::Invalid("bump_center must exceed 1".into()));
    }
    let profile = |r: T| {
        let z = (r - cfg.bump_center) / cfg.bump_width;
        (-z * z).exp()
    };
    let tail = T::lit(TAIL_TOLERANCE);
    for (end, r) in [("inner", grid.r_min), ("outer", grid.r_max)] {
        let g = profile(r);
        if g >= tail {
            return Err(Error::Invalid(format!(
                "initial bump tail {g:e} at the {end} boundary r = {r} exceeds {TAIL_TOLERANCE:e}; \
                 move bump_center or shrink bump_width"
            )));
        }
    }

    let g: Vec<T> = grid.centers.iter().map(|&r| profile(r)).collect();
    let rho: Vec<T> = g.iter().map(|&gi| T::one() + cfg.bump_amp * gi).collect();
    if let Some(i) = rho.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::Invalid(format!(
            "initial density non-positive at cell {i}"
        )));
    }
    let v: Vec<T> = grid
        .centers
        .iter()
        .zip(&g)
        .map(|(&r, &gi)| cfg.vel_amp * (r - T::one()) * gi)
        .collect();
    let (mut s1, mut s2) = equilibrium_stress(&v, grid, params)?;
    let shift = cfg.stress_perturb_amp * params.tau.sqrt();
    if shift != T::zero() {
        for ((a, b), &gi) in s1.iter_mut().zip(s2.iter_mut()).zip(&g) {
            *a = *a + shift * gi;
            *b = *b + shift * gi;
        }
    }
    let state = State {
        t: T::zero(),
        rho,
        v,
        s1,
        s2,
    };

    let defect = compatibility_defect(&state, grid, params)?;
    if defect.abs() > grid.dr * grid.dr {
        return Err(Error::Invalid(format!(
            "initial data violates the first-order compatibility condition: \
             v_t(0, 1) = {defect:e} > dr² = {:e}",
            grid.dr * grid.dr
        )));
    }
    Ok(state)
}

/// Momentum right-hand side extrapolated to the wall, i.e. `∂ₜv(0, 1)`.
///
/// The velocity terms drop out at `r = 1` because `v` vanishes there; the
/// remaining pressure and stress terms are evaluated with second-order
/// stencils and extrapolated quadratically to the face.
pub fn compatibility_defect<T: Real>(
    state: &State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<T> {
    state.check_shape(grid)?;
    let dr = grid.dr;
    let p = state
        .rho
        .iter()
        .map(|&x| pressure(x, params))
        .collect::<Result<Vec<_>>>()?;
    let dp = stencil::d1(&p, dr);
    let ds1 = stencil::d1(&state.s1, dr);
    let ds2 = stencil::d1(&state.s2, dr);
    let dv = stencil::d1(&state.v, dr);
    let two = T::lit(2.0);
    let vt = |i: usize| {
        let r = grid.centers[i];
        let v = state.v[i];
        let rho = state.rho[i];
        (-rho * v * dv[i] - dp[i] + two / T::lit(3.0) * ds1[i] + two * state.s1[i] / r + ds2[i])
            / rho
    };
    // Quadratic extrapolation from the first three centres to the wall.
    Ok((T::lit(15.0) * vt(0) - T::lit(10.0) * vt(1) + T::lit(3.0) * vt(2)) / T::lit(8.0))
}
