//! Symmetric-hyperbolic form `A⁰ ∂ₜV + A¹ ∂ᵣV + B V = 0` of the relaxed
//! system for `V = (ρ, v, S̃₁, S̃₂)`, characteristic speeds, and the audit of
//! the wall boundary condition `M V = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Mat4;
use crate::model::{pressure_prime, FluidParams};
use crate::scalar::Real;

/// Point in state space at which the matrices are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint<T> {
    pub rho: T,
    pub v: T,
    pub s1: T,
    pub s2: T,
    pub r: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasilinearMatrices<T> {
    pub a0: Mat4<T>,
    pub a1: Mat4<T>,
    pub b: Mat4<T>,
    pub evaluated_at: StatePoint<T>,
}

impl<T: Real> QuasilinearMatrices<T> {
    pub fn assemble(at: StatePoint<T>, params: &FluidParams<T>) -> Result<Self> {
        Ok(Self {
            a0: assemble_a0(at.rho, params)?,
            a1: assemble_a1(at.rho, at.v, params)?,
            b: assemble_b(at.rho, at.r, params)?,
            evaluated_at: at,
        })
    }
}

/// Wall condition `v(t, 1) = 0` written as `M V = 0`, with outward normal -1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryMatrix<T> {
    pub m: Mat4<T>,
    pub nu: T,
}

impl<T: Real> BoundaryMatrix<T> {
    pub fn wall() -> Self {
        let mut m = Mat4::zeros();
        m[(1, 1)] = T::one();
        Self { m, nu: -T::one() }
    }

    /// Basis `{e₁, e₃, e₄}` of `ker M`.
    pub fn kernel_basis() -> [[T; 4]; 3] {
        let (o, z) = (T::one(), T::zero());
        [[o, z, z, z], [z, z, o, z], [z, z, z, o]]
    }
}

fn require_tau<T: Real>(params: &FluidParams<T>) -> Result<()> {
    if params.tau > T::zero() {
        Ok(())
    } else {
        Err(Error::Structure(
            "A0 is singular for tau = 0; the relaxed system needs tau > 0".into(),
        ))
    }
}

/// `diag(P'(ρ)/ρ, ρ, τρ/(3μ), τρ/λ)`.
pub fn assemble_a0<T: Real>(rho: T, params: &FluidParams<T>) -> Result<Mat4<T>> {
    require_tau(params)?;
    let pp = pressure_prime(rho, params)?;
    let three = T::lit(3.0);
    Ok(Mat4::diag([
        pp / rho,
        rho,
        params.tau * rho / (three * params.mu),
        params.tau * rho / params.lambda,
    ]))
}

pub fn assemble_a1<T: Real>(rho: T, v: T, params: &FluidParams<T>) -> Result<Mat4<T>> {
    let pp = pressure_prime(rho, params)?;
    let (z, one) = (T::zero(), T::one());
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    let drift = params.tau * rho * (v - params.eps);
    Ok(Mat4([
        [pp * v / rho, pp, z, z],
        [pp, rho * v, -two_thirds, -one],
        [z, -two_thirds, drift / (T::lit(3.0) * params.mu), z],
        [z, -one, z, drift / params.lambda],
    ]))
}

pub fn assemble_b<T: Real>(rho: T, r: T, params: &FluidParams<T>) -> Result<Mat4<T>> {
    let pp = pressure_prime(rho, params)?;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let mut b = Mat4::zeros();
    b[(0, 1)] = two * pp / r;
    b[(1, 2)] = -two / r;
    b[(2, 1)] = two / (three * r);
    b[(2, 2)] = T::one() / (three * params.mu);
    b[(3, 1)] = -two / r;
    b[(3, 3)] = T::one() / params.lambda;
    Ok(b)
}

/// Eigenvalues of `(A⁰)⁻¹A¹`, ascending, computed on the symmetrised pencil
/// `L⁻¹ A¹ L⁻ᵀ` with `A⁰ = L Lᵀ`.
pub fn char_speeds<T: Real>(rho: T, v: T, params: &FluidParams<T>) -> Result<[T; 4]> {
    let a0 = assemble_a0(rho, params)?;
    let a1 = assemble_a1(rho, v, params)?;
    let l = a0.cholesky()?;
    let c = a1.congruence_by_inverse(&l);
    // Round-off can leave c marginally asymmetric; average it out.
    let sym = Mat4({
        let mut m = c.0;
        for i in 0..4 {
            for j in 0..i {
                let avg = (c.0[i][j] + c.0[j][i]) * T::lit(0.5);
                m[i][j] = avg;
                m[j][i] = avg;
            }
        }
        m
    });
    sym.symmetric_eigenvalues()
}

/// `max |s|` over the characteristic speeds, from the closed-form factorisation
/// of `det(A¹ - s A⁰)`: one root `s = v - ε` and three roots `s = v - w` with
/// `(w - ε)(w² - P') - ν w/(τρ²) = 0`, `ν = 4μ/3 + λ`.
pub fn max_char_speed<T: Real>(rho: T, v: T, params: &FluidParams<T>) -> Result<T> {
    require_tau(params)?;
    let c2 = pressure_prime(rho, params)?;
    let eps = params.eps;
    let k = c2 + params.longitudinal_viscosity() / (params.tau * rho * rho);
    // w³ + b w² + c w + d with b = -ε, c = -k, d = ε c²
    let (b, c, d) = (-eps, -k, eps * c2);
    let three = T::lit(3.0);
    let p = c - b * b / three;
    let q = T::lit(2.0) * b * b * b / T::lit(27.0) - b * c / three + d;
    let shift = -b / three;
    let mut best = (v - eps).abs();
    if p < T::zero() {
        let m = T::lit(2.0) * (-p / three).sqrt();
        let arg = (three * q / (p * m)).max(-T::one()).min(T::one());
        let phi = arg.acos() / three;
        let two_pi_3 = T::lit(2.0) * T::PI() / three;
        for j in 0..3 {
            let w = m * (phi - two_pi_3 * T::count(j)).cos() + shift;
            best = best.max((v - w).abs());
        }
    } else {
        // p >= 0 cannot occur for admissible input (k > 0); fall back to the pencil.
        let s = char_speeds(rho, v, params)?;
        best = s[0].abs().max(s[3].abs());
    }
    Ok(best)
}

/// `(A⁰)⁻¹A¹` at the wall state `v = 0`.
fn wall_normal_matrix<T: Real>(rho: T, params: &FluidParams<T>) -> Result<Mat4<T>> {
    let a0 = assemble_a0(rho, params)?;
    let a1 = assemble_a1(rho, T::zero(), params)?;
    let mut m = a1;
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = a1[(i, j)] / a0[(i, i)];
        }
    }
    Ok(m)
}

/// `det (A⁰)⁻¹A¹` at the wall, by LU elimination.
pub fn boundary_char_det<T: Real>(rho: T, params: &FluidParams<T>) -> Result<T> {
    Ok(wall_normal_matrix(rho, params)?.det_lu())
}

/// Cross-checked wall determinant against both candidate closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDetAudit<T> {
    pub rho: T,
    pub eps: T,
    pub det_lu: T,
    pub det_cofactor: T,
    /// `-P'(ρ) ε²`
    pub stated_form: T,
    /// `-P'(ρ) ε² / ρ`
    pub rho_scaled_form: T,
    pub lu_matches_cofactor: bool,
    pub matches_stated_form: bool,
    pub matches_rho_scaled_form: bool,
}

const STRUCT_TOL: f64 = 1e-12;

fn rel_close<T: Real>(a: T, b: T, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= T::lit(tol) * scale.max(T::min_positive_value())
        || (a.abs() <= T::lit(tol) && b.abs() <= T::lit(tol))
}

pub fn boundary_det_audit<T: Real>(rho: T, params: &FluidParams<T>) -> Result<BoundaryDetAudit<T>> {
    let m = wall_normal_matrix(rho, params)?;
    let det_lu = m.det_lu();
    let det_cofactor = m.det_cofactor();
    let pp = pressure_prime(rho, params)?;
    let e2 = params.eps * params.eps;
    let stated_form = -pp * e2;
    let rho_scaled_form = stated_form / rho;
    Ok(BoundaryDetAudit {
        rho,
        eps: params.eps,
        det_lu,
        det_cofactor,
        stated_form,
        rho_scaled_form,
        lu_matches_cofactor: rel_close(det_lu, det_cofactor, STRUCT_TOL),
        matches_stated_form: rel_close(det_cofactor, stated_form, STRUCT_TOL),
        matches_rho_scaled_form: rel_close(det_cofactor, rho_scaled_form, STRUCT_TOL),
    })
}

/// Outcome of the maximal-nonnegativity audit at the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxNonnegReport<T> {
    /// Smallest `ξᵀ(A¹ν)ξ` over the kernel basis and the random kernel samples.
    pub kernel_min_form: T,
    /// Largest deviation from `τρε/(3μ)ξ₂² + τρε/λ ξ₃²`.
    pub kernel_closed_form_err: T,
    /// `qᵀ(A¹ν)q` for `q = (1, 1, 0, 0)`.
    pub q_form: T,
    /// `-2P'(ρ)`.
    pub q_expected: T,
    pub pass: bool,
}

/// Checks that `A¹ν` is nonnegative on `ker M` and negative on `q ∉ ker M`.
pub fn max_nonneg_check<T: Real>(
    rho: T,
    params: &FluidParams<T>,
    n_samples: usize,
    seed: u64,
) -> Result<MaxNonnegReport<T>> {
    let wall = BoundaryMatrix::<T>::wall();
    let an = assemble_a1(rho, T::zero(), params)?.scale(wall.nu);
    let three = T::lit(3.0);
    let c3 = params.tau * rho * params.eps / (three * params.mu);
    let c4 = params.tau * rho * params.eps / params.lambda;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<[T; 4]> = BoundaryMatrix::<T>::kernel_basis().to_vec();
    for _ in 0..n_samples {
        let mut xi = [T::zero(); 4];
        for k in [0, 2, 3] {
            xi[k] = T::lit(rng.gen_range(-1.0..1.0));
        }
        vectors.push(xi);
    }
    let mut kernel_min_form = T::infinity();
    let mut kernel_closed_form_err = T::zero();
    for xi in &vectors {
        let form = an.bilinear(xi, xi);
        let closed = c3 * xi[2] * xi[2] + c4 * xi[3] * xi[3];
        kernel_min_form = kernel_min_form.min(form);
        kernel_closed_form_err = kernel_closed_form_err.max((form - closed).abs());
    }
    let q = [T::one(), T::one(), T::zero(), T::zero()];
    let q_form = an.bilinear(&q, &q);
    let q_expected = -T::lit(2.0) * pressure_prime(rho, params)?;
    let tol = T::lit(STRUCT_TOL);
    let pass = kernel_min_form >= -tol
        && kernel_closed_form_err <= tol
        && (q_form - q_expected).abs() <= tol
        && q_form < T::zero();
    Ok(MaxNonnegReport {
        kernel_min_form,
        kernel_closed_form_err,
        q_form,
        q_expected,
        pass,
    })
}

/// One line of the structure audit table.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub check: String,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl AuditRow {
    fn new(check: impl Into<String>, worst: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            check: check.into(),
            worst,
            tolerance,
            pass,
        }
    }
}

/// Randomised audit of the symmetric-hyperbolic structure.
///
/// Samples `n_states` states with `ρ ∈ [3/4, 5/4]`, `|v| ≤ 0.3`,
/// `τ ∈ [1e-4, 1]` (log-uniform), `μ, λ ∈ [0.1, 2]`, `ε ∈ [0, 0.5]`, keeping
/// `γ` and `A` from `base`, then checks positivity of `A⁰`, symmetry of `A¹`,
/// reality of the characteristic speeds and the wall quadratic forms.
pub fn structure_audit(
    base: &FluidParams<f64>,
    n_states: usize,
    seed: u64,
) -> Result<Vec<AuditRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a0_min_pivot = f64::INFINITY;
    let mut a1_asym = 0.0f64;
    let mut speed_imag = 0.0f64;
    let mut convective_gap = f64::INFINITY;
    let mut fast_speed_err = 0.0f64;
    let mut kernel_min = f64::INFINITY;
    let mut kernel_err = 0.0f64;
    let mut q_err = 0.0f64;
    let mut q_negative = true;
    for k in 0..n_states {
        let params = FluidParams {
            tau: 10f64.powf(rng.gen_range(-4.0..=0.0)),
            mu: rng.gen_range(0.1..=2.0),
            lambda: rng.gen_range(0.1..=2.0),
            eps: rng.gen_range(0.0..=0.5),
            ..*base
        };
        let rho = rng.gen_range(0.75..=1.25);
        let v = rng.gen_range(-0.3..=0.3);

        let a0 = assemble_a0(rho, &params)?;
        let l = a0.cholesky()?;
        a0_min_pivot = a0_min_pivot.min((0..4).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min));
        let a1 = assemble_a1(rho, v, &params)?;
        a1_asym = a1_asym.max(a1.asymmetry());

        // Real spectrum: the symmetrised pencil must be symmetric, and its
        // eigenvalues must reproduce trace and determinant of (A0)^-1 A1.
        let pencil = a1.congruence_by_inverse(&l);
        let speeds = char_speeds(rho, v, &params)?;
        let trace: f64 = (0..4).map(|i| a1[(i, i)] / a0[(i, i)]).sum();
        let det = a1.det_lu() / a0.det_lu();
        let sum: f64 = speeds.iter().sum();
        let prod: f64 = speeds.iter().product();
        let scale = speeds.iter().fold(1.0f64, |m, s| m.max(s.abs()));
        speed_imag = speed_imag
            .max(pencil.asymmetry() / scale)
            .max((sum - trace).abs() / scale)
            .max((prod - det).abs() / scale.powi(4));
        let smax = speeds[0].abs().max(speeds[3].abs());
        convective_gap = convective_gap.min(smax - v.abs());
        let fast = max_char_speed(rho, v, &params)?;
        fast_speed_err = fast_speed_err.max((fast - smax).abs() / smax);

        let rep = max_nonneg_check(rho, &params, 4, seed.wrapping_add(k as u64))?;
        kernel_min = kernel_min.min(rep.kernel_min_form);
        kernel_err = kernel_err.max(rep.kernel_closed_form_err);
        q_err = q_err.max((rep.q_form - rep.q_expected).abs());
        q_negative &= rep.q_form < 0.0;
    }
    Ok(vec![
        AuditRow::new(
            "A0 positive definite (min Cholesky pivot)",
            a0_min_pivot,
            0.0,
            a0_min_pivot > 0.0,
        ),
        AuditRow::new(
            "A1 symmetric (max |a_ij - a_ji|)",
            a1_asym,
            1e-14,
            a1_asym <= 1e-14,
        ),
        AuditRow::new(
            "characteristic speeds real (pencil asymmetry, trace/det)",
            speed_imag,
            1e-12,
            speed_imag <= 1e-12,
        ),
        AuditRow::new(
            "max speed exceeds |v| (min gap)",
            convective_gap,
            0.0,
            convective_gap > 0.0,
        ),
        AuditRow::new(
            "closed-form max speed vs pencil (rel)",
            fast_speed_err,
            1e-10,
            fast_speed_err <= 1e-10,
        ),
        AuditRow::new(
            "kernel form nonnegative (min)",
            kernel_min,
            -1e-12,
            kernel_min >= -1e-12,
        ),
        AuditRow::new(
            "kernel form closed form (max err)",
            kernel_err,
            1e-12,
            kernel_err <= 1e-12,
        ),
        AuditRow::new(
            "q form = -2P' (max err)",
            q_err,
            1e-12,
            q_err <= 1e-12 && q_negative,
        ),
    ])
}
