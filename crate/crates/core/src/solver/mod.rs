//! Method-of-lines integrator for the relaxed radial system and its classical
//! (`τ = 0`) limit.
//!
//! One relaxed step is the Strang composition
//! `relax(dt/2) ∘ SSP-RK2(transport, dt) ∘ relax(dt/2)`; the stiff relaxation
//! source is always integrated exactly, so the scheme stays stable as `τ → 0`.

mod bc;
mod dt;
mod relax;
mod rhs;

pub use bc::{apply_bc, Ghosted, OuterBc, GHOSTS};
pub use dt::{compute_dt, compute_dt_classical, max_speed};
pub use relax::relax_substep;
pub use rhs::{rhs_classical, rhs_full, rhs_nonstiff, Stencil};

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{equilibrium_stress, FluidParams, RadialGrid, Rates, State};
use crate::scalar::Real;

pub(crate) use rhs::{evaluate_nonstiff, Evaluated};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    #[default]
    Strang,
    Lie,
}

impl FromStr for Splitting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strang" => Ok(Self::Strang),
            "lie" => Ok(Self::Lie),
            other => Err(format!(
                "unknown splitting '{other}' (expected strang or lie)"
            )),
        }
    }
}

impl FromStr for OuterBc {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "extrapolate" => Ok(Self::Extrapolate),
            "reflect" => Ok(Self::Reflect),
            other => Err(format!(
                "unknown outer_bc '{other}' (expected extrapolate or reflect)"
            )),
        }
    }
}

impl Splitting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Strang => "strang",
            Self::Lie => "lie",
        }
    }
}

impl OuterBc {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Extrapolate => "extrapolate",
            Self::Reflect => "reflect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub cfl: T,
    pub t_end: T,
    pub splitting: Splitting,
    pub outer_bc: OuterBc,
    /// Snapshot cadence in steps.
    pub output_every: usize,
    /// When set, snapshots are taken at multiples of this time instead, and
    /// steps are shortened to land on them exactly.
    pub output_interval: Option<T>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            cfl: T::lit(0.4),
            t_end: T::one(),
            splitting: Splitting::Strang,
            outer_bc: OuterBc::Extrapolate,
            output_every: 10,
            output_interval: None,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::Invalid(format!(
                "cfl = {} must lie in (0, 1]",
                self.cfl
            )));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Invalid(format!(
                "t_end = {} must be >= 0",
                self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(Error::Invalid("output_every must be >= 1".into()));
        }
        if let Some(h) = self.output_interval {
            if !(h > T::zero()) {
                return Err(Error::Invalid("output_interval must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Snapshots of one run with the time derivatives evaluated on each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub snapshots: Vec<State<T>>,
    /// `∂ₜ(ρ, v, S̃₁, S̃₂)` from the semi-discrete equations, one per snapshot.
    pub rhs_cache: Vec<Rates<T>>,
    pub dt_history: Vec<T>,
    /// Cumulative mass `∫ r²ρv dt` that left through the outer face, per snapshot.
    pub outer_outflow: Vec<T>,
    pub outer_bc: OuterBc,
    pub classical: bool,
    /// Set when a disturbance above `WAVE_FRONT_THRESHOLD` reached the last
    /// two cells while the outer boundary was open.
    pub wave_front_contaminated: bool,
    pub warnings: Vec<String>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &State<T> {
        self.snapshots
            .last()
            .expect("trajectory holds at least one snapshot")
    }

    pub fn steps(&self) -> usize {
        self.dt_history.len()
    }
}

/// Deviation from the far field `(1, 0, 0, 0)` that counts as a wave reaching
/// the outer boundary.
pub const WAVE_FRONT_THRESHOLD: f64 = 1e-8;

fn touches_outer_boundary<T: Real>(s: &State<T>) -> bool {
    let n = s.len();
    let tol = T::lit(WAVE_FRONT_THRESHOLD);
    (n.saturating_sub(2)..n).any(|i| {
        (s.rho[i] - T::one()).abs() > tol
            || s.v[i].abs() > tol
            || s.s1[i].abs() > tol
            || s.s2[i].abs() > tol
    })
}

fn check_state<T: Real>(s: &State<T>, step: usize) -> Result<()> {
    for (name, f) in [("rho", &s.rho), ("v", &s.v), ("s1", &s.s1), ("s2", &s.s2)] {
        if let Some(cell) = f.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                field: name,
                cell,
                step,
                t: s.t.as_f64(),
            });
        }
    }
    if let Some(cell) = s.rho.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::Positivity {
            cell,
            step,
            t: s.t.as_f64(),
            value: s.rho[cell].as_f64(),
        });
    }
    Ok(())
}

fn with_step<T>(r: Result<T>, step: usize) -> Result<T> {
    r.map_err(|e| match e {
        Error::NonFinite { field, cell, t, .. } => Error::NonFinite {
            field,
            cell,
            step,
            t,
        },
        other => other,
    })
}

fn axpy<T: Real>(base: &State<T>, dt: T, rates: &Rates<T>) -> State<T> {
    let add = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x + dt * y).collect();
    State {
        t: base.t + dt,
        rho: add(&base.rho, &rates.rho),
        v: add(&base.v, &rates.v),
        s1: add(&base.s1, &rates.s1),
        s2: add(&base.s2, &rates.s2),
    }
}

fn average<T: Real>(a: &State<T>, b: &State<T>) -> State<T> {
    let half = T::lit(0.5);
    let avg = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| half * (p + q)).collect();
    State {
        t: b.t,
        rho: avg(&a.rho, &b.rho),
        v: avg(&a.v, &b.v),
        s1: avg(&a.s1, &b.s1),
        s2: avg(&a.s2, &b.s2),
    }
}

/// Heun / SSP-RK2 on an arbitrary evaluator. Returns the new state and the
/// mass that crossed the outer face during the step.
fn ssp_rk2<T: Real>(
    state: &State<T>,
    dt: T,
    step: usize,
    eval: impl Fn(&State<T>) -> Result<Evaluated<T>>,
) -> Result<(State<T>, T)> {
    let k1 = with_step(eval(state), step)?;
    let u1 = axpy(state, dt, &k1.rates);
    check_state(&u1, step)?;
    let k2 = with_step(eval(&u1), step)?;
    let u2 = axpy(&u1, dt, &k2.rates);
    let mut out = average(state, &u2);
    out.t = state.t + dt;
    check_state(&out, step)?;
    let outflow = T::lit(0.5) * dt * (k1.outer_flux + k2.outer_flux);
    Ok((out, outflow))
}

/// One relaxed step of size `dt`. Returns the advanced state and the outer
/// mass outflow accumulated over the step.
pub fn step_with_outflow<T: Real>(
    state: &State<T>,
    dt: T,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    cfg: &SolverConfig<T>,
    step: usize,
) -> Result<(State<T>, T)> {
    let transport =
        |s: &State<T>| rhs::evaluate_nonstiff(s, grid, params, cfg.outer_bc, Stencil::Upwind);
    match cfg.splitting {
        Splitting::Strang => {
            let half = dt * T::lit(0.5);
            let a = relax_substep(state, half, grid, params)?;
            let (b, outflow) = ssp_rk2(&a, dt, step, transport)?;
            let c = relax_substep(&b, half, grid, params)?;
            check_state(&c, step)?;
            Ok((c, outflow))
        }
        Splitting::Lie => {
            let (b, outflow) = ssp_rk2(state, dt, step, transport)?;
            let c = relax_substep(&b, dt, grid, params)?;
            check_state(&c, step)?;
            Ok((c, outflow))
        }
    }
}

/// One relaxed step of size `dt`.
pub fn step<T: Real>(
    state: &State<T>,
    dt: T,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<State<T>> {
    Ok(step_with_outflow(state, dt, grid, params, cfg, 0)?.0)
}

/// One classical Navier-Stokes step (SSP-RK2 with Newtonian stresses).
pub fn step_classical<T: Real>(
    state: &State<T>,
    dt: T,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    outer: OuterBc,
) -> Result<State<T>> {
    let (s, _) = ssp_rk2(state, dt, 0, |s| {
        rhs::evaluate_classical(s, grid, params, outer)
    })?;
    close_stresses(s, grid, params)
}

fn close_stresses<T: Real>(
    mut s: State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
) -> Result<State<T>> {
    let (s1, s2) = equilibrium_stress(&s.v, grid, params)?;
    s.s1 = s1;
    s.s2 = s2;
    Ok(s)
}

/// Shared time loop. `advance(state, dt, step)` returns the new state and the
/// outer outflow; `cfl_dt(state)` the stable step; `rates(state)` the
/// derivatives cached with each snapshot.
fn integrate<T: Real>(
    initial: State<T>,
    cfg: &SolverConfig<T>,
    classical: bool,
    cfl_dt: impl Fn(&State<T>) -> Result<T>,
    advance: impl Fn(&State<T>, T, usize) -> Result<(State<T>, T)>,
    rates: impl Fn(&State<T>) -> Result<Rates<T>>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let mut traj = Trajectory {
        snapshots: Vec::new(),
        rhs_cache: Vec::new(),
        dt_history: Vec::new(),
        outer_outflow: Vec::new(),
        outer_bc: cfg.outer_bc,
        classical,
        wave_front_contaminated: false,
        warnings: Vec::new(),
    };
    let monitor_open = cfg.outer_bc == OuterBc::Extrapolate;
    let record = |traj: &mut Trajectory<T>, s: &State<T>, outflow: T| -> Result<()> {
        traj.rhs_cache.push(rates(s)?);
        traj.outer_outflow.push(outflow);
        if monitor_open && !traj.wave_front_contaminated && touches_outer_boundary(s) {
            traj.wave_front_contaminated = true;
            traj.warnings.push(format!(
                "wave front reached the outer boundary by t = {}; results past this time \
                 include truncation effects",
                s.t
            ));
        }
        traj.snapshots.push(s.clone());
        Ok(())
    };

    check_state(&initial, 0)?;
    let mut state = initial;
    let mut outflow = T::zero();
    record(&mut traj, &state, outflow)?;
    let t_end = cfg.t_end;
    let mut next_output = cfg.output_interval.map(|h| (1usize, h));
    let mut step = 0usize;
    while state.t < t_end {
        step += 1;
        let mut dt = cfl_dt(&state)?;
        let mut target = t_end;
        if let Some((k, h)) = next_output {
            target = target.min(T::count(k) * h);
        }
        let remaining = target - state.t;
        let lands = dt >= remaining * (T::one() - T::lit(1e-10));
        if lands {
            dt = remaining;
        }
        let (mut next, out) = advance(&state, dt, step)?;
        if lands {
            next.t = target;
        }
        outflow = outflow + out;
        traj.dt_history.push(dt);
        state = next;

        let at_end = state.t >= t_end;
        let snap = match next_output.as_mut() {
            Some((k, h)) => {
                if lands && state.t >= T::count(*k) * *h {
                    *k += 1;
                    true
                } else {
                    false
                }
            }
            None => step.is_multiple_of(cfg.output_every),
        };
        if snap || at_end {
            record(&mut traj, &state, outflow)?;
        }
    }
    Ok(traj)
}

/// Integrates the relaxed system to `cfg.t_end`.
pub fn run<T: Real>(
    initial: State<T>,
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    params.validate(false)?;
    initial.check_shape(grid)?;
    integrate(
        initial,
        cfg,
        false,
        |s| compute_dt(s, grid, params, cfg.cfl),
        |s, dt, k| step_with_outflow(s, dt, grid, params, cfg, k),
        |s| rhs_full(s, grid, params, cfg.outer_bc, Stencil::Upwind),
    )
}

/// Integrates classical compressible Navier-Stokes from `(ρ₀, v₀)`; the stored
/// snapshots carry the Newtonian stresses of each velocity field.
pub fn run_classical<T: Real>(
    rho0: &[T],
    v0: &[T],
    grid: &RadialGrid<T>,
    params: &FluidParams<T>,
    cfg: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    params.validate(true)?;
    let n = grid.n_cells;
    if rho0.len() != n || v0.len() != n {
        return Err(Error::Invalid(format!(
            "initial fields must have length {n}"
        )));
    }
    let initial = close_stresses(
        State {
            t: T::zero(),
            rho: rho0.to_vec(),
            v: v0.to_vec(),
            s1: vec![T::zero(); n],
            s2: vec![T::zero(); n],
        },
        grid,
        params,
    )?;
    let outer = cfg.outer_bc;
    integrate(
        initial,
        cfg,
        true,
        |s| compute_dt_classical(s, grid, params, cfg.cfl),
        |s, dt, k| {
            let (next, out) = ssp_rk2(s, dt, k, |x| {
                rhs::evaluate_classical(x, grid, params, outer)
            })?;
            Ok((close_stresses(next, grid, params)?, out))
        },
        |s| rhs_classical(s, grid, params, outer),
    )
}
