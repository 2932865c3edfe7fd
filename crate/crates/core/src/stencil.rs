//! Finite-difference stencils, radial quadrature and interpolation on a
//! uniform cell-centred mesh.
//!
//! Interior points use second-order central differences; the first and last
//! cells use second-order one-sided stencils so every derivative is formally
//! second-order accurate up to the array ends.

use crate::scalar::Real;

/// First derivative, second order everywhere. Requires `f.len() >= 3`.
pub fn d1<T: Real>(f: &[T], dr: T) -> Vec<T> {
    let n = f.len();
    assert!(n >= 3, "d1 needs at least 3 samples");
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let inv = T::one() / (two * dr);
    let mut out = vec![T::zero(); n];
    out[0] = (-three * f[0] + four * f[1] - f[2]) * inv;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * inv;
    }
    out[n - 1] = (three * f[n - 1] - four * f[n - 2] + f[n - 3]) * inv;
    out
}

/// Second derivative, second order everywhere. Requires `f.len() >= 4`.
pub fn d2<T: Real>(f: &[T], dr: T) -> Vec<T> {
    let n = f.len();
    assert!(n >= 4, "d2 needs at least 4 samples");
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let five = T::lit(5.0);
    let inv = T::one() / (dr * dr);
    let mut out = vec![T::zero(); n];
    out[0] = (two * f[0] - five * f[1] + four * f[2] - f[3]) * inv;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - two * f[i] + f[i - 1]) * inv;
    }
    out[n - 1] = (two * f[n - 1] - five * f[n - 2] + four * f[n - 3] - f[n - 4]) * inv;
    out
}

/// `∫ r² f dr` over `[1, r_max]` by the cell-midpoint rule.
pub fn integrate_r2<T: Real>(centers: &[T], dr: T, f: &[T]) -> T {
    debug_assert_eq!(centers.len(), f.len());
    centers.iter().zip(f).map(|(&r, &x)| r * r * x).sum::<T>() * dr
}

/// `‖r f‖²_{L²} = ∫ r² f² dr`.
pub fn weighted_l2_sq<T: Real>(centers: &[T], dr: T, f: &[T]) -> T {
    centers
        .iter()
        .zip(f)
        .map(|(&r, &x)| r * r * x * x)
        .sum::<T>()
        * dr
}

/// `‖r f‖²_{H^m}` realised as the sum of weighted L² norms of `f` and its
/// first `m` radial derivatives (`m <= 2`).
pub fn weighted_h_sq<T: Real>(centers: &[T], dr: T, f: &[T], m: usize) -> T {
    assert!(m <= 2, "only H^0..H^2 are supported");
    let mut acc = weighted_l2_sq(centers, dr, f);
    if m >= 1 {
        acc = acc + weighted_l2_sq(centers, dr, &d1(f, dr));
    }
    if m >= 2 {
        acc = acc + weighted_l2_sq(centers, dr, &d2(f, dr));
    }
    acc
}

/// Four-point Lagrange (cubic) interpolation of cell data at radius `r`.
///
/// The stencil is clamped to the array, so points within half a cell of either
/// end are extrapolated from the nearest four centres.
pub fn cubic_interp<T: Real>(r_first: T, dr: T, f: &[T], r: T) -> T {
    let n = f.len();
    assert!(n >= 4, "cubic interpolation needs at least 4 samples");
    let s = (r - r_first) / dr;
    let base = s.floor().to_isize().unwrap_or(0) - 1;
    let base = base.clamp(0, n as isize - 4) as usize;
    let x = s - T::count(base);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    // nodes at 0, 1, 2, 3
    let w0 = -(x - one) * (x - two) * (x - three) / six;
    let w1 = x * (x - two) * (x - three) / two;
    let w2 = -x * (x - one) * (x - three) / two;
    let w3 = x * (x - one) * (x - two) / six;
    w0 * f[base] + w1 * f[base + 1] + w2 * f[base + 2] + w3 * f[base + 3]
}
