//! Dense complex-matrix kernel: square matrices over `Complex<f64>`,
//! Hermitian eigendecomposition (cyclic Jacobi), functional calculus,
//! complex matrix powers, Schatten norms and weighted inner products.
//!
//! Everything downstream (generators, superoperators, L^p machinery) is
//! built on these primitives. Dimensions stay small (< ~64 for operators,
//! the square of that for superoperators), so dense row-major storage with
//! straightforward loops is the right trade-off.

mod calc;
mod eig;
mod mat;

pub use calc::{
    func_calc, func_calc_eig, inner_product, mpow, mpow_eig, schatten_from_sv, schatten_norm,
    singular_values, InnerProduct, PNorm, TraceMode, EPS_POS, EXP_GUARD,
};
pub use eig::{herm_eig, HermitianMatrix, SpectralDecomposition};
pub use mat::{pauli, CMat, C64};
