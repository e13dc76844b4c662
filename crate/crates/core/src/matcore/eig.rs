//! Hermitian eigendecomposition by cyclic Jacobi with threshold skipping.
//!
//! Deterministic by construction: fixed sweep order (rows, then columns),
//! ascending eigenvalue sort with stable tie-break, and a fixed phase
//! convention (first nonzero component of each eigenvector real positive).
//! Near-diagonal inputs (typical for detailed-balanced superoperators in
//! their weighted frame) converge in very few effective rotations because
//! sub-threshold pivots are skipped.

use alloc::vec::Vec;

use super::mat::{CMat, C64};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance; inputs within it are symmetrized.
pub const HERM_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius threshold for Jacobi convergence, relative to ||A||_F.
const JACOBI_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 40;
/// Components below this are treated as zero when fixing eigenvector phases.
const PHASE_TOL: f64 = 1e-12;
/// Consecutive eigenvalues closer than this (relative) form a degenerate cluster.
const CLUSTER_TOL: f64 = 1e-10;

/// A matrix certified Hermitian: construction symmetrizes (A+A^dag)/2 after
/// checking ||A - A^dag||_F <= 1e-12 (1 + ||A||_F).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    mat: CMat,
}

impl HermitianMatrix {
    pub fn new(a: CMat) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidParam("matrix entries must be finite"));
        }
        let res = a.hermitian_residual();
        let scale = 1.0 + a.frobenius();
        if res > HERM_TOL * scale {
            return Err(Error::NotHermitian {
                residual: res / scale,
            });
        }
        Ok(HermitianMatrix {
            mat: a.symmetrize(),
        })
    }

    /// For matrices Hermitian by construction (diagonal real, symmetrized, ...).
    pub fn new_unchecked(a: CMat) -> Self {
        debug_assert!(a.hermitian_residual() <= 1e-9 * (1.0 + a.frobenius()));
        HermitianMatrix {
            mat: a.symmetrize(),
        }
    }

    #[inline]
    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }
}

/// Result of `herm_eig`: A = U diag(eigenvalues) U^dag with U unitary and
/// eigenvalues ascending. Columns of `u` are the eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub u: CMat,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// U f(Lambda) U^dag for a real function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let d = self.dim();
        let mut scaled = self.u.clone();
        // scale column k by f(lambda_k), then multiply by U^dag
        let fvals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        for i in 0..d {
            for k in 0..d {
                scaled[(i, k)] *= fvals[k];
            }
        }
        scaled.matmul(&self.u.adjoint())
    }

    /// U g(Lambda) U^dag for a complex function of the eigenvalues.
    pub fn apply_complex(&self, g: impl Fn(f64) -> C64) -> CMat {
        let d = self.dim();
        let mut scaled = self.u.clone();
        let gvals: Vec<C64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        for i in 0..d {
            for k in 0..d {
                scaled[(i, k)] *= gvals[k];
            }
        }
        scaled.matmul(&self.u.adjoint())
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|l| l)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Cyclic-by-row Jacobi; pivots with |a_pq| below threshold/n are skipped,
/// sweeps stop once the off-diagonal Frobenius mass is under
/// 1e-13 ||A||_F (at most 40 sweeps).
pub fn herm_eig(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let mut m = a.mat().clone();
    let mut u = CMat::identity(n);

    let fro = m.frobenius();
    let threshold = JACOBI_TOL * fro;
    let skip_tol = if n > 0 {
        threshold / n as f64
    } else {
        threshold
    };

    let mut converged = off_diagonal_fro(&m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::EigNoConvergence {
                off_diagonal: off_diagonal_fro(&m),
            });
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].norm() <= skip_tol {
                    continue;
                }
                rotate(&mut m, &mut u, p, q);
                rotated = true;
            }
        }
        sweeps += 1;
        converged = !rotated || off_diagonal_fro(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    // stable ascending sort; ties keep Jacobi output order
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = CMat::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, k)] = u[(i, src)];
        }
    }

    orthonormalize_clusters(&eigenvalues, &mut vecs);
    fix_phases(&mut vecs);

    Ok(SpectralDecomposition {
        eigenvalues,
        u: vecs,
    })
}

fn off_diagonal_fro(m: &CMat) -> f64 {
    let n = m.dim();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += 2.0 * m[(p, q)].norm_sqr();
        }
    }
    libm::sqrt(s)
}

/// One Jacobi rotation annihilating the (p,q) entry.
///
/// With z = a_pq = |z| u, the unitary acts on the (p,q) plane as
/// R = [[c, s u], [-s conj(u), c]]; t = s/c solves t^2 + 2 tau t - 1 = 0,
/// tau = (a_qq - a_pp) / (2|z|), taking the smaller root for stability.
fn rotate(m: &mut CMat, vecs: &mut CMat, p: usize, q: usize) {
    let n = m.dim();
    let z = m[(p, q)];
    let abs_z = z.norm();
    let phase = z / abs_z;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (2.0 * abs_z);
    let t = if tau >= 0.0 {
        1.0 / (tau + libm::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / libm::sqrt(1.0 + t * t);
    let s = t * c;
    let su = phase * s; // s*u
    let su_c = su.conj();

    // columns: A <- A R
    for i in 0..n {
        let aip = m[(i, p)];
        let aiq = m[(i, q)];
        m[(i, p)] = aip * c - aiq * su_c;
        m[(i, q)] = aip * su + aiq * c;
    }
    // rows: A <- R^dag A
    for j in 0..n {
        let apj = m[(p, j)];
        let aqj = m[(q, j)];
        m[(p, j)] = apj * c - aqj * su;
        m[(q, j)] = apj * su_c + aqj * c;
    }
    // exact zeros and real diagonal on the pivot pair
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    // accumulate eigenvectors: U <- U R
    for i in 0..n {
        let uip = vecs[(i, p)];
        let uiq = vecs[(i, q)];
        vecs[(i, p)] = uip * c - uiq * su_c;
        vecs[(i, q)] = uip * su + uiq * c;
    }
}

/// Gram-Schmidt in index order inside each degenerate cluster. Jacobi already
/// returns orthonormal vectors; this pins the in-cluster basis choice.
fn orthonormalize_clusters(eigenvalues: &[f64], vecs: &mut CMat) {
    let n = eigenvalues.len();
    let scale = eigenvalues
        .iter()
        .fold(0.0f64, |a, &l| a.max(libm::fabs(l)));
    let tol = CLUSTER_TOL * (1.0 + scale);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            gram_schmidt_columns(vecs, start, end);
        }
        start = end;
    }
}

fn gram_schmidt_columns(vecs: &mut CMat, from: usize, to: usize) {
    let n = vecs.dim();
    for k in from..to {
        for prev in from..k {
            let mut ip = C64::new(0.0, 0.0);
            for i in 0..n {
                ip += vecs[(i, prev)].conj() * vecs[(i, k)];
            }
            for i in 0..n {
                let sub = ip * vecs[(i, prev)];
                vecs[(i, k)] -= sub;
            }
        }
        let mut norm = 0.0;
        for i in 0..n {
            norm += vecs[(i, k)].norm_sqr();
        }
        let norm = libm::sqrt(norm);
        if norm > 0.0 {
            for i in 0..n {
                vecs[(i, k)] /= norm;
            }
        }
    }
}

/// Multiply each column by a unit phase making its first component with
/// modulus above PHASE_TOL real positive.
fn fix_phases(vecs: &mut CMat) {
    let n = vecs.dim();
    for k in 0..n {
        let mut phase = None;
        for i in 0..n {
            let z = vecs[(i, k)];
            if z.norm() > PHASE_TOL {
                phase = Some(z / z.norm());
                break;
            }
        }
        if let Some(ph) = phase {
            let corr = ph.conj();
            for i in 0..n {
                vecs[(i, k)] *= corr;
            }
        }
    }
}
