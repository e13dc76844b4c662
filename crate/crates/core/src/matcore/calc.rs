//! Functional calculus, complex matrix powers, Schatten norms and the three
//! inner products (Hilbert-Schmidt, GNS, KMS) used throughout.

use super::eig::{herm_eig, HermitianMatrix, SpectralDecomposition};
use super::mat::{CMat, C64};
use crate::error::{Error, Result};

/// Eigenvalues at or below this are rejected for matrix powers of states.
pub const EPS_POS: f64 = 1e-12;
/// Natural-log double-precision exponent bound for the overflow guard.
pub const EXP_GUARD: f64 = 700.0;

/// Trace convention tag. The two conventions never mix silently: every norm
/// carries one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    /// tau = tr/d (tracial-state convention).
    Normalized,
    /// Plain matrix trace (Schatten convention).
    Unnormalized,
}

/// Exponent for L^p norms; infinity is a distinguished value, never a float
/// sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidExponent { p });
        }
        Ok(PNorm::Finite(p))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            PNorm::Finite(p) => Some(*p),
            PNorm::Infinity => None,
        }
    }

    /// Exponent p/2 (used by gradient forms); requires p >= 2 so the result
    /// stays a norm.
    pub fn half(&self) -> Result<PNorm> {
        match self {
            PNorm::Finite(p) => {
                if *p < 2.0 {
                    return Err(Error::InvalidExponent { p: *p / 2.0 });
                }
                Ok(PNorm::Finite(*p / 2.0))
            }
            PNorm::Infinity => Ok(PNorm::Infinity),
        }
    }
}

/// Borel functional calculus: U f(Lambda) U^dag.
///
/// `f` returning a non-finite value at some eigenvalue is reported as a
/// domain error naming that eigenvalue.
pub fn func_calc(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let e = herm_eig(a)?;
    func_calc_eig(&e, f)
}

/// Same as `func_calc` when the decomposition is already at hand.
pub fn func_calc_eig(e: &SpectralDecomposition, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    for &l in &e.eigenvalues {
        if !f(l).is_finite() {
            return Err(Error::FunctionUndefinedAt { eigenvalue: l });
        }
    }
    Ok(HermitianMatrix::new_unchecked(e.apply(&f)))
}

/// Complex matrix power D^z of a positive-definite Hermitian matrix,
/// principal branch: D^z = U exp(z ln Lambda) U^dag.
pub fn mpow(d: &HermitianMatrix, z: C64) -> Result<CMat> {
    let e = herm_eig(d)?;
    mpow_eig(&e, z)
}

pub fn mpow_eig(e: &SpectralDecomposition, z: C64) -> Result<CMat> {
    let min = e.min_eigenvalue();
    if min <= EPS_POS {
        return Err(Error::SingularState {
            min_eigenvalue: min,
        });
    }
    // guard the exponent range before exponentiating
    let mut worst = 0.0f64;
    for &l in &e.eigenvalues {
        let w = z * libm::log(l);
        worst = worst.max(libm::fabs(w.re));
    }
    if worst > EXP_GUARD {
        return Err(Error::OverflowGuard { exponent: worst });
    }
    Ok(e.apply_complex(|l| (z * libm::log(l)).exp()))
}

/// Singular values of A (ascending): eigenvalues of (A^dag A)^(1/2).
pub fn singular_values(a: &CMat) -> Result<alloc::vec::Vec<f64>> {
    let gram = HermitianMatrix::new_unchecked(a.adjoint().matmul(a));
    let e = herm_eig(&gram)?;
    Ok(e.eigenvalues
        .iter()
        .map(|&l| libm::sqrt(l.max(0.0)))
        .collect())
}

/// Schatten p-norm from singular values; `Normalized` replaces the sum by the
/// average (tracial convention), p = infinity returns the largest singular
/// value in either mode.
pub fn schatten_norm(a: &CMat, p: PNorm, mode: TraceMode) -> Result<f64> {
    let sv = singular_values(a)?;
    Ok(schatten_from_sv(&sv, p, mode))
}

pub fn schatten_from_sv(sv: &[f64], p: PNorm, mode: TraceMode) -> f64 {
    match p {
        PNorm::Infinity => sv.iter().fold(0.0f64, |m, &s| m.max(s)),
        PNorm::Finite(p) => {
            let sum: f64 = sv.iter().map(|&s| libm::pow(s, p)).sum();
            let sum = match mode {
                TraceMode::Normalized => sum / sv.len() as f64,
                TraceMode::Unnormalized => sum,
            };
            libm::pow(sum, 1.0 / p)
        }
    }
}

/// Inner-product form on matrices. GNS and KMS hold the reference density;
/// the KMS form precomputes D^(1/2) at construction.
#[derive(Clone, Debug)]
pub enum InnerProduct {
    HilbertSchmidt,
    /// <x,y> = Tr(D x^dag y)
    Gns {
        density: CMat,
    },
    /// <x,y> = Tr(D^(1/2) x^dag D^(1/2) y)
    Kms {
        sqrt_density: CMat,
    },
}

impl InnerProduct {
    pub fn hs() -> Self {
        InnerProduct::HilbertSchmidt
    }

    pub fn gns(density: &HermitianMatrix) -> Result<Self> {
        check_positive(density)?;
        Ok(InnerProduct::Gns {
            density: density.mat().clone(),
        })
    }

    pub fn kms(density: &HermitianMatrix) -> Result<Self> {
        check_positive(density)?;
        let half = mpow(density, C64::new(0.5, 0.0))?;
        Ok(InnerProduct::Kms { sqrt_density: half })
    }
}

fn check_positive(d: &HermitianMatrix) -> Result<()> {
    let e = herm_eig(d)?;
    let min = e.min_eigenvalue();
    if min <= EPS_POS {
        return Err(Error::SingularState {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Sesquilinear inner product of two matrices under the given form
/// (antilinear in the first argument).
pub fn inner_product(x: &CMat, y: &CMat, form: &InnerProduct) -> Result<C64> {
    x.check_same_dim(y)?;
    let v = match form {
        InnerProduct::HilbertSchmidt => x.adjoint().matmul(y).trace(),
        InnerProduct::Gns { density } => {
            x.check_same_dim(density)?;
            density.matmul(&x.adjoint()).matmul(y).trace()
        }
        InnerProduct::Kms { sqrt_density } => {
            x.check_same_dim(sqrt_density)?;
            sqrt_density
                .matmul(&x.adjoint())
                .matmul(sqrt_density)
                .matmul(y)
                .trace()
        }
    };
    Ok(v)
}
