//! Dense complex matrices and a Hermitian eigensolver.
//!
//! The oracle only ever needs desk-scale matrices (a few hundred rows), so
//! the solver is a cyclic Jacobi iteration with complex rotations: slow in
//! the asymptotic sense, but simple, dependency-free, and accurate to
//! near machine precision for well-conditioned Hermitian input.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![C64::new(0.0, 0.0); n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.n_cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.n_rows];
        for i in 0..self.n_rows {
            let row = &self.data[i * self.n_cols..(i + 1) * self.n_cols];
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Largest absolute entry of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n_cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `vectors[(i, k)]` is component `i` of eigenvector `k`.
    pub vectors: CMat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    NotHermitian,
    NoConvergence,
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::NotHermitian => write!(f, "matrix is not Hermitian"),
            LinalgError::NoConvergence => write!(f, "Jacobi sweep limit exceeded"),
        }
    }
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Off-diagonal entries are annihilated pairwise with complex Givens
/// rotations until the off-diagonal Frobenius norm falls below
/// `1e-14 * scale`.
pub fn hermitian_eigen(h: &CMat) -> Result<HermitianEigen, LinalgError> {
    let n = h.n_rows;
    assert_eq!(n, h.n_cols);
    let scale = h.data.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if h.hermiticity_defect() > 1e-10 * scale.max(1.0) {
        return Err(LinalgError::NotHermitian);
    }

    let mut a = h.clone();
    // Symmetrize exactly so rounding in the input cannot bias sweeps.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
        let d = a[(i, i)].re;
        a[(i, i)] = C64::new(d, 0.0);
    }
    let mut v = CMat::identity(n);
    let tol = 1e-14 * scale.max(1.0);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].norm_sqr();
            }
        }
        if libm::sqrt(off) <= tol * (n as f64) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= tol * 1e-2 {
                    continue;
                }
                // Unitary 2x2 that zeroes the (p, q) entry.
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let abs_apq = apq.norm();
                let phase = apq / abs_apq;
                let theta = 0.5 * libm::atan2(2.0 * abs_apq, app - aqq);
                let c = libm::cos(theta);
                let s = libm::sin(theta);
                let s_ph = phase * s;

                // Column update: A <- R† A R with
                // R = [[c, -s e^{i phi}], [s e^{-i phi}, c]] acting on (p, q).
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * s_ph.conj();
                    a[(k, q)] = -akp * s_ph + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * s_ph;
                    a[(q, k)] = -apk * s_ph.conj() + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * s_ph.conj();
                    v[(k, q)] = -vkp * s_ph + vkq * c;
                }
            }
        }
    }

    let mut off = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            off += a[(i, j)].norm_sqr();
        }
    }
    if libm::sqrt(off) > 1e-10 * scale.max(1.0) * (n as f64) {
        return Err(LinalgError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut values = Vec::with_capacity(n);
    let mut vectors = CMat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        values.push(a[(src, src)].re);
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    fn random_hermitian(n: usize, rng: &mut SplitMix64) -> CMat {
        let mut h = CMat::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = C64::new(rng.uniform(-2.0, 2.0), 0.0);
            for j in (i + 1)..n {
                let z = C64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        h
    }

    #[test]
    fn eigen_residuals_are_small() {
        let mut rng = SplitMix64::new(7);
        for n in [2usize, 5, 17] {
            let h = random_hermitian(n, &mut rng);
            let eig = hermitian_eigen(&h).unwrap();
            for k in 0..n {
                let v: Vec<C64> = (0..n).map(|i| eig.vectors[(i, k)]).collect();
                let hv = h.mul_vec(&v);
                let mut worst = 0.0f64;
                for i in 0..n {
                    worst = worst.max((hv[i] - v[i] * eig.values[k]).norm());
                }
                assert!(worst < 1e-10, "residual {worst:e} at n={n}");
            }
            for k in 1..n {
                assert!(eig.values[k] >= eig.values[k - 1]);
            }
        }
    }

    #[test]
    fn known_two_level_splitting() {
        // [[d, g], [g, -d]] has eigenvalues ±sqrt(d² + g²).
        let mut h = CMat::zeros(2, 2);
        h[(0, 0)] = C64::new(0.3, 0.0);
        h[(1, 1)] = C64::new(-0.3, 0.0);
        h[(0, 1)] = C64::new(0.02, 0.0);
        h[(1, 0)] = C64::new(0.02, 0.0);
        let eig = hermitian_eigen(&h).unwrap();
        let r = libm::sqrt(0.3f64 * 0.3 + 0.02 * 0.02);
        assert!((eig.values[0] + r).abs() < 1e-14);
        assert!((eig.values[1] - r).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = CMat::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert_eq!(hermitian_eigen(&h).unwrap_err(), LinalgError::NotHermitian);
    }
}
