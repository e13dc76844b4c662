//! Square complex matrix with row-major storage and the handful of
//! operations the rest of the crate leans on.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<C64>,
}

impl core::fmt::Debug for CMat {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be >= 1");
        CMat {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix unit e_{ij} = |i><j|.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMat::zeros(dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = CMat::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_re(entries: &[f64]) -> Self {
        let mut m = CMat::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut m = CMat::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row length must equal dimension");
            for (j, &z) in row.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_same_dim(&self, other: &CMat) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> CMat {
        let d = self.dim;
        CMat::from_fn(d, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        let d = self.dim;
        CMat::from_fn(d, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        let d = self.dim;
        CMat::from_fn(d, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, z: C64) -> CMat {
        let mut out = self.clone();
        for w in out.data.iter_mut() {
            *w *= z;
        }
        out
    }

    pub fn scale_re(&self, x: f64) -> CMat {
        self.scale(C64::new(x, 0.0))
    }

    pub fn add(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (w, z) in out.data.iter_mut().zip(other.data.iter()) {
            *w += z;
        }
        out
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (w, z) in out.data.iter_mut().zip(other.data.iter()) {
            *w -= z;
        }
        out
    }

    pub fn axpy(&mut self, a: C64, x: &CMat) {
        debug_assert_eq!(self.dim, x.dim);
        for (w, z) in self.data.iter_mut().zip(x.data.iter()) {
            *w += a * z;
        }
    }

    /// Matrix product, ikj loop order for contiguous inner accesses.
    pub fn matmul(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = CMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * d..(k + 1) * d];
                let orow = &mut out.data[i * d..(i + 1) * d];
                for j in 0..d {
                    orow[j] += a * brow[j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.dim {
            t += self.data[i * self.dim + i];
        }
        t
    }

    /// Normalized trace tr/d.
    pub fn ntrace(&self) -> C64 {
        self.trace() / self.dim as f64
    }

    pub fn frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to another matrix.
    pub fn dist(&self, other: &CMat) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        libm::sqrt(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum(),
        )
    }

    pub fn hermitian_residual(&self) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                let r = self[(i, j)] - self[(j, i)].conj();
                s += r.norm_sqr();
            }
        }
        libm::sqrt(s)
    }

    /// (A + A^dag)/2.
    pub fn symmetrize(&self) -> CMat {
        let d = self.dim;
        CMat::from_fn(d, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Kronecker product; index convention (i1*d2+i2, j1*d2+j2).
    pub fn kron(&self, other: &CMat) -> CMat {
        let d1 = self.dim;
        let d2 = other.dim;
        let mut out = CMat::zeros(d1 * d2);
        for i1 in 0..d1 {
            for j1 in 0..d1 {
                let a = self[(i1, j1)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for i2 in 0..d2 {
                    for j2 in 0..d2 {
                        out[(i1 * d2 + i2, j1 * d2 + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// Row-major vectorization, x[(i,j)] -> v[i*d+j].
    pub fn vec(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn unvec(dim: usize, v: &[C64]) -> CMat {
        assert_eq!(v.len(), dim * dim);
        CMat {
            dim,
            data: v.to_vec(),
        }
    }

    /// Matrix-vector product for superoperator application.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.dim);
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); d];
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += row[j] * v[j];
            }
            out[i] = acc;
        }
        out
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Pauli matrices, the workhorse 2x2 test fixtures.
pub mod pauli {
    use super::{CMat, C64};

    pub fn sigma_x() -> CMat {
        CMat::from_rows(&[
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
    }

    pub fn sigma_y() -> CMat {
        CMat::from_rows(&[
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            &[C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
    }

    pub fn sigma_z() -> CMat {
        CMat::from_rows(&[
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            &[C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        ])
    }
}
