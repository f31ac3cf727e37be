//! Small dense complex linear algebra: LU with partial pivoting.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Systems with a condition estimate above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Row-major square matrix of size `N`.
pub type Mat<const N: usize> = [[Complex64; N]; N];

pub fn real_to_complex<const N: usize>(a: &[[f64; N]; N]) -> Mat<N> {
    std::array::from_fn(|i| std::array::from_fn(|j| Complex64::new(a[i][j], 0.0)))
}

pub struct Lu<const N: usize> {
    lu: Mat<N>,
    perm: [usize; N],
    norm_inf: f64,
}

fn norm_inf<const N: usize>(a: &Mat<N>) -> f64 {
    a.iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl<const N: usize> Lu<N> {
    /// Factorizes `a`; fails on an exactly zero pivot.
    pub fn new(a: &Mat<N>) -> Result<Self> {
        let mut lu = *a;
        let mut perm: [usize; N] = std::array::from_fn(|i| i);
        for k in 0..N {
            let p = (k..N)
                .max_by(|&i, &j| lu[i][k].norm().total_cmp(&lu[j][k].norm()))
                .unwrap();
            if lu[p][k].norm() == 0.0 {
                return Err(Error::Singular(f64::INFINITY));
            }
            lu.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..N {
                let factor = lu[i][k] / lu[k][k];
                lu[i][k] = factor;
                for j in k + 1..N {
                    let t = lu[k][j];
                    lu[i][j] -= factor * t;
                }
            }
        }
        Ok(Lu { lu, perm, norm_inf: norm_inf(a) })
    }

    pub fn solve(&self, b: &[Complex64; N]) -> [Complex64; N] {
        let mut x: [Complex64; N] = std::array::from_fn(|i| b[self.perm[i]]);
        for i in 0..N {
            for j in 0..i {
                let t = x[j];
                x[i] -= self.lu[i][j] * t;
            }
        }
        for i in (0..N).rev() {
            for j in i + 1..N {
                let t = x[j];
                x[i] -= self.lu[i][j] * t;
            }
            x[i] /= self.lu[i][i];
        }
        x
    }

    pub fn inverse(&self) -> Mat<N> {
        let mut inv = [[Complex64::default(); N]; N];
        for j in 0..N {
            let mut e = [Complex64::default(); N];
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..N {
                inv[i][j] = col[i];
            }
        }
        inv
    }

    /// Infinity-norm condition number.
    pub fn condition(&self) -> f64 {
        self.norm_inf * norm_inf(&self.inverse())
    }

    pub fn determinant(&self) -> Complex64 {
        let mut det = Complex64::new(1.0, 0.0);
        for i in 0..N {
            det *= self.lu[i][i];
        }
        let mut seen = [false; N];
        let mut sign = 1.0;
        for start in 0..N {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        det * sign
    }
}

/// Solves `a x = b`, rejecting ill-conditioned systems.
pub fn solve_checked<const N: usize>(a: &Mat<N>, b: &[Complex64; N]) -> Result<[Complex64; N]> {
    let lu = Lu::new(a)?;
    let cond = lu.condition();
    if !(cond < SINGULAR_CONDITION) {
        return Err(Error::Singular(cond));
    }
    Ok(lu.solve(b))
}

/// Conjugate-linear inner product `conj(a) . b`.
pub fn inner<const N: usize>(a: &[Complex64; N], b: &[Complex64; N]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn mat_vec<const N: usize>(a: &Mat<N>, x: &[Complex64; N]) -> [Complex64; N] {
    std::array::from_fn(|i| (0..N).map(|j| a[i][j] * x[j]).sum())
}
