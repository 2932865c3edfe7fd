//! Dense 4×4 linear algebra for the quasilinear system: two independent
//! determinant routes, Cholesky, and a cyclic Jacobi symmetric eigensolver.

use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4<T>(pub [[T; 4]; 4]);

impl<T: Real> Mat4<T> {
    pub fn zeros() -> Self {
        Mat4([[T::zero(); 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diag([T::one(); 4])
    }

    pub fn diag(d: [T; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, &x) in d.iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[j][i] = self.0[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|x| *x = *x * s);
        m
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..i {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[T; 4], y: &[T; 4]) -> T {
        let mut acc = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                acc = acc + x[i] * self.0[i][j] * y[j];
            }
        }
        acc
    }

    pub fn mul_vec(&self, x: &[T; 4]) -> [T; 4] {
        let mut out = [T::zero(); 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det_lu(&self) -> T {
        let mut a = self.0;
        let mut det = T::one();
        for k in 0..4 {
            let p = (k..4)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            if a[p][k] == T::zero() {
                return T::zero();
            }
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det = det * a[k][k];
            for i in k + 1..4 {
                let f = a[i][k] / a[k][k];
                for j in k..4 {
                    a[i][j] = a[i][j] - f * a[k][j];
                }
            }
        }
        det
    }

    /// Determinant by Laplace expansion along the first row.
    pub fn det_cofactor(&self) -> T {
        let a = &self.0;
        let minor3 = |skip: usize| {
            let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
            let m = |r: usize, c: usize| a[r][cols[c]];
            m(1, 0) * (m(2, 1) * m(3, 2) - m(2, 2) * m(3, 1))
                - m(1, 1) * (m(2, 0) * m(3, 2) - m(2, 2) * m(3, 0))
                + m(1, 2) * (m(2, 0) * m(3, 1) - m(2, 1) * m(3, 0))
        };
        (0..4)
            .map(|j| {
                let sign = if j % 2 == 0 { T::one() } else { -T::one() };
                sign * a[0][j] * minor3(j)
            })
            .sum()
    }

    /// Lower-triangular `L` with `L Lᵀ = self`; fails unless SPD.
    pub fn cholesky(&self) -> Result<Self> {
        let a = &self.0;
        let mut l = Self::zeros();
        for j in 0..4 {
            let mut d = a[j][j];
            for k in 0..j {
                d = d - l.0[j][k] * l.0[j][k];
            }
            if !(d > T::zero()) {
                return Err(Error::Structure(format!(
                    "matrix is not positive definite (pivot {j} = {d})"
                )));
            }
            let d = d.sqrt();
            l.0[j][j] = d;
            for i in j + 1..4 {
                let mut s = a[i][j];
                for k in 0..j {
                    s = s - l.0[i][k] * l.0[j][k];
                }
                l.0[i][j] = s / d;
            }
        }
        Ok(l)
    }

    /// `L⁻¹ self L⁻ᵀ` for lower-triangular `l`.
    pub fn congruence_by_inverse(&self, l: &Self) -> Self {
        // Solve L X = self, then L Yᵀ = Xᵀ.
        let solve_lower = |b: &Self| {
            let mut x = Self::zeros();
            for c in 0..4 {
                for i in 0..4 {
                    let mut s = b.0[i][c];
                    for k in 0..i {
                        s = s - l.0[i][k] * x.0[k][c];
                    }
                    x.0[i][c] = s / l.0[i][i];
                }
            }
            x
        };
        let x = solve_lower(self);
        let y = solve_lower(&x.transpose());
        y.transpose()
    }

    /// Eigenvalues of a symmetric matrix, ascending (cyclic Jacobi).
    pub fn symmetric_eigenvalues(&self) -> Result<[T; 4]> {
        let mut a = self.0;
        let tol = T::epsilon();
        let scale = a.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()));
        if scale == T::zero() {
            return Ok([T::zero(); 4]);
        }
        let mut converged = false;
        for _sweep in 0..64 {
            let off: T = (0..4)
                .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off.sqrt() <= tol * scale {
                converged = true;
                break;
            }
            for p in 0..4 {
                for q in p + 1..4 {
                    if a[p][q] == T::zero() {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                    a[p][q] = T::zero();
                    a[q][p] = T::zero();
                }
            }
        }
        if !converged {
            return Err(Error::Numeric("Jacobi eigensolver did not converge".into()));
        }
        let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(ev)
    }
}

impl<T: Real> Mul for Mat4<T> {
    type Output = Mat4<T>;

    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

impl<T> Index<(usize, usize)> for Mat4<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat4<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}
