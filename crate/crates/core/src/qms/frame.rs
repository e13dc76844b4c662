//! GNS-frame machinery for superoperators.
//!
//! A generator acts on vec(x) through its d^2 x d^2 superoperator S. To
//! diagnose detailed balance and read off spectral data, S is rewritten in
//! an orthonormal basis of the GNS(D) inner product: with D = U Lam U^dag,
//! the matrices B_ij = U e_ij U^dag / sqrt(lam_j) are GNS-orthonormal and
//! the frame matrix is M = W ((U^dag (x) U^T) S (U (x) conj(U))) W^{-1},
//! W = diag(sqrt(lam_j)) over vec index (i,j). Detailed balance makes M
//! Hermitian; its symmetrized eigendecomposition carries the kernel
//! (fixed-point algebra), the spectral gap, and the functional calculus
//! used for regularization.

use alloc::vec::Vec;

use crate::algebra::{ConditionalExpectation, DensityState, SubalgebraBasis, KERNEL_CUTOFF_REL};
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, CMat, HermitianMatrix, SpectralDecomposition, C64};

use super::Generator;

/// Frame asymmetry above this is treated as "not detailed balanced".
pub const DB_ASYM_TOL: f64 = 1e-9;
/// Kernel/non-kernel separation required before projecting onto the kernel.
pub const KERNEL_SEPARATION: f64 = 1e-8;

/// (A (x) B) M, computed column-by-column as vec(A m B^T) in O(d^5).
pub fn kron_apply_left(a: &CMat, b: &CMat, m: &CMat) -> CMat {
    let d = a.dim();
    debug_assert_eq!(m.dim(), d * d);
    let mut out = CMat::zeros(d * d);
    let bt = b.transpose();
    for col in 0..d * d {
        let mut x = CMat::zeros(d);
        for row in 0..d * d {
            x.data_mut()[row] = m[(row, col)];
        }
        let y = a.matmul(&x).matmul(&bt);
        for row in 0..d * d {
            out[(row, col)] = y.data()[row];
        }
    }
    out
}

/// M (A (x) B) via the transpose trick: (M K)^T = K^T M^T.
pub fn kron_apply_right(m: &CMat, a: &CMat, b: &CMat) -> CMat {
    kron_apply_left(&a.transpose(), &b.transpose(), &m.transpose()).transpose()
}

/// out += coeff * (A (x) B), skipping zero entries of A.
pub fn kron_axpy(out: &mut CMat, coeff: C64, a: &CMat, b: &CMat) {
    let d1 = a.dim();
    let d2 = b.dim();
    debug_assert_eq!(out.dim(), d1 * d2);
    for i1 in 0..d1 {
        for j1 in 0..d1 {
            let av = a[(i1, j1)];
            if av.re == 0.0 && av.im == 0.0 {
                continue;
            }
            let c = coeff * av;
            for i2 in 0..d2 {
                for j2 in 0..d2 {
                    let bv = b[(i2, j2)];
                    if bv.re == 0.0 && bv.im == 0.0 {
                        continue;
                    }
                    out[(i1 * d2 + i2, j1 * d2 + j2)] += c * bv;
                }
            }
        }
    }
}

/// Predual superoperator w.r.t. the trace pairing Tr(rho L(x)) = Tr(L_*(rho) x):
/// S_* = P S^T P with P the transpose permutation, done by index remapping.
pub fn predual_superop(s: &CMat, dim: usize) -> CMat {
    let n = dim * dim;
    debug_assert_eq!(s.dim(), n);
    CMat::from_fn(n, |r, c| {
        let (a1, a2) = (r / dim, r % dim);
        let (b1, b2) = (c / dim, c % dim);
        s[(b2 * dim + b1, a2 * dim + a1)]
    })
}

/// Superoperator of the modular conjugation x -> A x A^dag (A = D^{it}):
/// acts on vec(x) as (A (x) conj(A)).
pub fn conjugation_superop(a: &CMat) -> CMat {
    a.kron(&a.conj())
}

/// The generator rewritten in a GNS(D)-orthonormal frame, plus the
/// asymmetry that detailed balance would force to vanish.
pub struct GnsFrame {
    /// Eigenvectors of D (columns).
    pub u: CMat,
    /// Eigenvalues of D, ascending.
    pub lam: Vec<f64>,
    /// Frame matrix M.
    pub m: CMat,
    /// max-entry |M - M^dag|.
    pub asym: f64,
}

impl GnsFrame {
    pub fn new(gen: &Generator, state: &DensityState) -> Result<Self> {
        if gen.dim() != state.dim() {
            return Err(Error::DimMismatch {
                left: gen.dim(),
                right: state.dim(),
            });
        }
        let u = state.eig().u.clone();
        let lam = state.eig().eigenvalues.clone();
        // S~ = (U^dag (x) U^T) S (U (x) conj(U))
        let right = kron_apply_right(gen.superop(), &u, &u.conj());
        let mut m = kron_apply_left(&u.adjoint(), &u.transpose(), &right);
        // M = W S~ W^{-1}, W = diag(sqrt(lam_j)) on vec index (i,j)
        let d = gen.dim();
        let sq: Vec<f64> = lam.iter().map(|&l| libm::sqrt(l)).collect();
        for r in 0..d * d {
            let wr = sq[r % d];
            for c in 0..d * d {
                let wc = sq[c % d];
                m[(r, c)] *= wr / wc;
            }
        }
        let mut asym = 0.0f64;
        for r in 0..d * d {
            for c in r..d * d {
                asym = asym.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        Ok(GnsFrame { u, lam, m, asym })
    }

    /// Map a frame coordinate vector back to the matrix it represents.
    pub fn vector_to_matrix(&self, v: &[C64]) -> CMat {
        let d = self.u.dim();
        let mut xt = CMat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                xt[(i, j)] = v[i * d + j] / libm::sqrt(self.lam[j]);
            }
        }
        self.u.matmul(&xt).matmul(&self.u.adjoint())
    }

    /// Frame coordinates of a matrix.
    pub fn matrix_to_vector(&self, x: &CMat) -> Vec<C64> {
        let d = self.u.dim();
        let xt = self.u.adjoint().matmul(x).matmul(&self.u);
        let mut v = alloc::vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] = xt[(i, j)] * libm::sqrt(self.lam[j]);
            }
        }
        v
    }

    /// Rebuild a raw superoperator from a frame matrix F:
    /// S = (U (x) conj(U)) W^{-1} F W (U^dag (x) U^T).
    pub fn frame_to_superop(&self, f: &CMat) -> CMat {
        let d = self.u.dim();
        let sq: Vec<f64> = self.lam.iter().map(|&l| libm::sqrt(l)).collect();
        let mut g = f.clone();
        for r in 0..d * d {
            let wr = sq[r % d];
            for c in 0..d * d {
                let wc = sq[c % d];
                g[(r, c)] *= wc / wr;
            }
        }
        let left = kron_apply_left(&self.u, &self.u.conj(), &g);
        kron_apply_right(&left, &self.u.adjoint(), &self.u.transpose())
    }
}

/// Eigendecomposition of the symmetrized frame matrix, with kernel
/// bookkeeping shared by the spectral gap, the fixed-point projection and
/// the resolvent regularization.
pub struct SymmetrizedSpectrum {
    pub frame: GnsFrame,
    pub eig: SpectralDecomposition,
    pub state: DensityState,
    pub cutoff: f64,
    pub kernel_dim: usize,
    /// Smallest eigenvalue above the kernel cutoff (0 when none).
    pub alpha: f64,
}

impl SymmetrizedSpectrum {
    /// Requires the frame asymmetry to be under `DB_ASYM_TOL`; aborts rather
    /// than silently symmetrizing a non-detailed-balanced generator.
    pub fn new(gen: &Generator, state: &DensityState) -> Result<Self> {
        let frame = GnsFrame::new(gen, state)?;
        let scale = 1.0 + frame.m.max_abs();
        if frame.asym > DB_ASYM_TOL * scale {
            return Err(Error::NotDetailedBalanced {
                residual: frame.asym / scale,
            });
        }
        let sym = HermitianMatrix::new_unchecked(frame.m.symmetrize());
        let eig = herm_eig(&sym)?;
        let max_abs = eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, &l| a.max(libm::fabs(l)));
        let cutoff = KERNEL_CUTOFF_REL * max_abs;
        let kernel_dim = eig
            .eigenvalues
            .iter()
            .filter(|&&l| libm::fabs(l) <= cutoff)
            .count();
        let alpha = eig
            .eigenvalues
            .iter()
            .copied()
            .filter(|&l| libm::fabs(l) > cutoff)
            .fold(f64::INFINITY, f64::min);
        let alpha = if alpha.is_finite() { alpha } else { 0.0 };
        Ok(SymmetrizedSpectrum {
            frame,
            eig,
            state: state.clone(),
            cutoff,
            kernel_dim,
            alpha,
        })
    }

    /// Kernel band width (largest |eigenvalue| classified as zero).
    pub fn zero_band(&self) -> f64 {
        self.eig
            .eigenvalues
            .iter()
            .copied()
            .filter(|&l| libm::fabs(l) <= self.cutoff)
            .fold(0.0f64, |a, l| a.max(libm::fabs(l)))
    }

    /// Indices (in the eigen ordering) of kernel modes.
    pub fn kernel_indices(&self) -> Vec<usize> {
        self.eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| libm::fabs(l) <= self.cutoff)
            .map(|(k, _)| k)
            .collect()
    }

    /// Eigen-matrix for the frame eigenvector at index k.
    pub fn eigen_matrix(&self, k: usize) -> CMat {
        let n = self.eig.dim();
        let mut v = alloc::vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            v[i] = self.eig.u[(i, k)];
        }
        self.frame.vector_to_matrix(&v)
    }

    /// First eigen-matrix realizing the spectral gap (eigenvalue alpha).
    pub fn gap_witness(&self) -> Option<CMat> {
        let idx = self
            .eig
            .eigenvalues
            .iter()
            .position(|&l| libm::fabs(l) > self.cutoff)?;
        Some(self.eigen_matrix(idx))
    }

    /// GNS-orthogonal projection onto the kernel, packaged as a conditional
    /// expectation. Fails when the kernel is not separated from the first
    /// nonzero eigenvalue by at least `KERNEL_SEPARATION`.
    pub fn fixed_point_projection(&self) -> Result<ConditionalExpectation> {
        let zero_band = self.zero_band();
        if self.alpha > 0.0 && self.alpha - zero_band < KERNEL_SEPARATION {
            return Err(Error::KernelIllSeparated {
                zero_band,
                first_nonzero: self.alpha,
            });
        }
        let d = self.state.dim();
        let kernel: Vec<CMat> = self
            .kernel_indices()
            .iter()
            .map(|&k| self.eigen_matrix(k))
            .collect();
        // basis listed with the identity direction first for readability
        let range = SubalgebraBasis::from_span(kernel, self.state.gns_form())?;

        // projector superoperator: P(x) = sum_k B_k <B_k, x>_GNS
        let mut proj = CMat::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                let col = range.project(&CMat::unit(d, i, j))?;
                for r in 0..d * d {
                    proj[(r, i * d + j)] = col.data()[r];
                }
            }
        }
        Ok(ConditionalExpectation::from_parts(
            proj,
            range,
            self.state.clone(),
        ))
    }
}
