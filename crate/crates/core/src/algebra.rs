//! States, modular flow, subalgebra bases and state-preserving conditional
//! expectations on matrix algebras.
//!
//! A `DensityState` is a faithful unit-trace density (unnormalized trace
//! convention) with its eigendecomposition cached, so modular flows
//! sigma_t(x) = D^{it} x D^{-it} and density powers are one functional
//! calculus away. Conditional expectations are stored as superoperators
//! together with an orthonormal basis of their range.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matcore::{
    herm_eig, inner_product, mpow_eig, CMat, HermitianMatrix, InnerProduct, SpectralDecomposition,
    C64, EPS_POS, EXP_GUARD,
};
use crate::qms::Generator;

/// Trace tolerance for states (unnormalized trace = 1).
const TRACE_TOL: f64 = 1e-12;
/// Shared kernel cutoff, relative to the largest superoperator eigenvalue.
pub const KERNEL_CUTOFF_REL: f64 = 1e-9;

/// Faithful state: positive-definite density with unit (unnormalized) trace.
/// The spectral decomposition is computed once at construction.
#[derive(Clone, Debug)]
pub struct DensityState {
    matrix: HermitianMatrix,
    eig: SpectralDecomposition,
    lambda_min: f64,
}

impl DensityState {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.mat().trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState { value: tr.re });
        }
        let eig = herm_eig(&matrix)?;
        let lambda_min = eig.min_eigenvalue();
        if lambda_min <= EPS_POS {
            return Err(Error::SingularState {
                min_eigenvalue: lambda_min,
            });
        }
        Ok(DensityState {
            matrix,
            eig,
            lambda_min,
        })
    }

    /// Tracial state I/d.
    pub fn tracial(dim: usize) -> Self {
        let m = HermitianMatrix::new_unchecked(CMat::identity(dim).scale_re(1.0 / dim as f64));
        DensityState::new(m).expect("tracial state is always valid")
    }

    /// Diagonal state from positive weights (normalized to unit trace).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 || weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidState { value: total });
        }
        let normalized: Vec<f64> = weights.iter().map(|&w| w / total).collect();
        DensityState::new(HermitianMatrix::new_unchecked(CMat::diag_re(&normalized)))
    }

    /// Thermal weights e^{-beta k}, k = 1..n.
    pub fn thermal(n: usize, beta: f64) -> Result<Self> {
        let weights: Vec<f64> = (1..=n).map(|k| libm::exp(-beta * k as f64)).collect();
        DensityState::from_weights(&weights)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMat {
        self.matrix.mat()
    }

    #[inline]
    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    #[inline]
    pub fn eig(&self) -> &SpectralDecomposition {
        &self.eig
    }

    #[inline]
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// phi(x) = Tr(D x).
    pub fn expectation(&self, x: &CMat) -> C64 {
        self.matrix().matmul(x).trace()
    }

    /// D^z, principal branch, overflow-guarded.
    pub fn power(&self, z: C64) -> Result<CMat> {
        mpow_eig(&self.eig, z)
    }

    pub fn sqrt(&self) -> CMat {
        self.eig.apply(libm::sqrt)
    }

    /// GNS inner product form for this state.
    pub fn gns_form(&self) -> InnerProduct {
        InnerProduct::Gns {
            density: self.matrix().clone(),
        }
    }

    /// KMS inner product form for this state.
    pub fn kms_form(&self) -> InnerProduct {
        InnerProduct::Kms {
            sqrt_density: self.sqrt(),
        }
    }

    pub fn is_tracial(&self, tol: f64) -> bool {
        let d = self.dim() as f64;
        self.matrix()
            .dist(&CMat::identity(self.dim()).scale_re(1.0 / d))
            <= tol
    }

    /// Tensor product state D1 (x) D2.
    pub fn tensor(&self, other: &DensityState) -> Result<DensityState> {
        DensityState::new(HermitianMatrix::new_unchecked(
            self.matrix().kron(other.matrix()),
        ))
    }

    /// Block direct sum (D1 (+) D2)/2.
    pub fn direct_sum_half(&self, other: &DensityState) -> Result<DensityState> {
        let d1 = self.dim();
        let d2 = other.dim();
        let mut m = CMat::zeros(d1 + d2);
        for i in 0..d1 {
            for j in 0..d1 {
                m[(i, j)] = self.matrix()[(i, j)] * 0.5;
            }
        }
        for i in 0..d2 {
            for j in 0..d2 {
                m[(d1 + i, d1 + j)] = other.matrix()[(i, j)] * 0.5;
            }
        }
        DensityState::new(HermitianMatrix::new_unchecked(m))
    }
}

/// Modular flow sigma_t(x) = D^{it} x D^{-it} at complex time t.
///
/// Real t is the modular group; t = -i eta/p inserts the density powers
/// D^{eta/p} x D^{-eta/p} used by weighted norms. Guarded against exponent
/// overflow: |Im t| log(1/lambda_min) must stay below 700.
pub fn modular_flow(state: &DensityState, x: &CMat, t: C64) -> Result<CMat> {
    if x.dim() != state.dim() {
        return Err(Error::DimMismatch {
            left: x.dim(),
            right: state.dim(),
        });
    }
    let log_span = libm::log(1.0 / state.lambda_min());
    let worst = t.im.abs() * log_span;
    if worst > EXP_GUARD {
        return Err(Error::OverflowGuard { exponent: worst });
    }
    let it = C64::new(0.0, 1.0) * t;
    let left = state.power(it)?;
    let right = state.power(-it)?;
    Ok(left.matmul(x).matmul(&right))
}

/// Span of matrices, orthonormalized w.r.t. a declared inner product.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    generators: Vec<CMat>,
    orthonormal_basis: Vec<CMat>,
    form: InnerProduct,
}

/// Vectors with squared norm below this fraction of the running scale are
/// treated as linearly dependent during Gram-Schmidt.
const RANK_TOL: f64 = 1e-20;

impl SubalgebraBasis {
    /// Orthonormalize the given span (Gram-Schmidt in index order).
    pub fn from_span(generators: Vec<CMat>, form: InnerProduct) -> Result<Self> {
        let mut basis: Vec<CMat> = Vec::new();
        for g in &generators {
            let mut v = g.clone();
            for b in &basis {
                let c = inner_product(b, &v, &form)?;
                v = v.sub(&b.scale(c));
            }
            let n2 = inner_product(&v, &v, &form)?.re;
            let scale = inner_product(g, g, &form)?.re.max(1.0);
            if n2 > RANK_TOL * scale {
                basis.push(v.scale_re(1.0 / libm::sqrt(n2)));
            }
        }
        Ok(SubalgebraBasis {
            generators,
            orthonormal_basis: basis,
            form,
        })
    }

    #[inline]
    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    #[inline]
    pub fn orthonormal_basis(&self) -> &[CMat] {
        &self.orthonormal_basis
    }

    #[inline]
    pub fn form(&self) -> &InnerProduct {
        &self.form
    }

    pub fn len(&self) -> usize {
        self.orthonormal_basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orthonormal_basis.is_empty()
    }

    /// Orthogonal projection onto the span, w.r.t. the declared form.
    pub fn project(&self, x: &CMat) -> Result<CMat> {
        let mut out = CMat::zeros(x.dim());
        for b in &self.orthonormal_basis {
            let c = inner_product(b, x, &self.form)?;
            out.axpy(c, b);
        }
        Ok(out)
    }

    /// Residual of identity containment: ||(1-P)(I)|| / ||I||.
    pub fn identity_residual(&self) -> Result<f64> {
        let dim = self.orthonormal_basis.first().map(|b| b.dim()).unwrap_or(1);
        let one = CMat::identity(dim);
        let p = self.project(&one)?;
        Ok(p.sub(&one).frobenius() / one.frobenius())
    }

    /// Closure residuals: adjoints and pairwise products must stay in span.
    pub fn closure_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for b in &self.orthonormal_basis {
            let adj = b.adjoint();
            let r = adj.sub(&self.project(&adj)?).frobenius();
            worst = worst.max(r);
        }
        for a in &self.orthonormal_basis {
            for b in &self.orthonormal_basis {
                let ab = a.matmul(b);
                let r = ab.sub(&self.project(&ab)?).frobenius();
                let scale = 1.0 + ab.frobenius();
                worst = worst.max(r / scale);
            }
        }
        Ok(worst)
    }
}

/// State-preserving conditional expectation onto a subalgebra, stored as a
/// d^2 x d^2 superoperator together with its range.
#[derive(Clone, Debug)]
pub struct ConditionalExpectation {
    projector: CMat,
    range: SubalgebraBasis,
    state: DensityState,
}

impl ConditionalExpectation {
    pub fn from_parts(projector: CMat, range: SubalgebraBasis, state: DensityState) -> Self {
        ConditionalExpectation {
            projector,
            range,
            state,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    #[inline]
    pub fn projector(&self) -> &CMat {
        &self.projector
    }

    #[inline]
    pub fn range(&self) -> &SubalgebraBasis {
        &self.range
    }

    #[inline]
    pub fn state(&self) -> &DensityState {
        &self.state
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        CMat::unvec(self.dim(), &self.projector.matvec(&x.vec()))
    }

    pub fn idempotence_residual(&self) -> f64 {
        let p2 = self.projector.matmul(&self.projector);
        p2.dist(&self.projector)
    }

    pub fn unitality_residual(&self) -> f64 {
        let one = CMat::identity(self.dim());
        self.apply(&one).dist(&one)
    }

    /// Minimal eigenvalue of the Choi matrix; complete positivity needs it
    /// above -1e-9. The Choi matrix is a pure reindexing of the projector:
    /// Choi[(i,a),(j,b)] = P[(a,b),(i,j)].
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let d = self.dim();
        let choi = CMat::from_fn(d * d, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (c / d, c % d);
            self.projector[(a * d + b, i * d + j)]
        });
        let h = HermitianMatrix::new(choi)?;
        Ok(herm_eig(&h)?.min_eigenvalue())
    }

    /// max_i |phi(E(b_i)) - phi(b_i)| over the range basis.
    pub fn state_preservation_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in self.range.orthonormal_basis() {
            let lhs = self.state.expectation(&self.apply(b));
            let rhs = self.state.expectation(b);
            worst = worst.max((lhs - rhs).norm());
        }
        worst
    }
}

/// Residual report for the Takesaki conditional-expectation axioms.
#[derive(Clone, Debug)]
pub struct ExpectationAxiomReport {
    pub idempotence: f64,
    pub unitality: f64,
    pub bimodularity: f64,
    pub state_preservation: f64,
    pub choi_min_eigenvalue: f64,
    pub pass: bool,
}

/// Check idempotence, bimodularity over range elements, and state
/// preservation on `samples` random inputs. Report-only: never fails.
pub fn check_expectation_axioms(
    e: &ConditionalExpectation,
    samples: usize,
    seed: u64,
) -> Result<ExpectationAxiomReport> {
    let d = e.dim();
    let mut rng = crate::sampling::stream(seed, 0x45);
    let idempotence = e.idempotence_residual();
    let unitality = e.unitality_residual();
    // a non-Hermitian Choi matrix (non-*-preserving map) is recorded as a
    // negative floor instead of aborting the report
    let choi_min = match e.choi_min_eigenvalue() {
        Ok(v) => v,
        Err(Error::NotHermitian { residual }) => -residual,
        Err(other) => return Err(other),
    };

    let mut bimod = 0.0f64;
    let mut state_res = 0.0f64;
    for _ in 0..samples {
        let x = crate::sampling::random_matrix(&mut rng, d);
        let ex = e.apply(&x);
        state_res = state_res.max((e.state().expectation(&ex) - e.state().expectation(&x)).norm());
        for y1 in e.range().orthonormal_basis() {
            for y2 in e.range().orthonormal_basis() {
                let lhs = e.apply(&y1.matmul(&x).matmul(y2));
                let rhs = y1.matmul(&ex).matmul(y2);
                let scale = 1.0 + rhs.frobenius();
                bimod = bimod.max(lhs.dist(&rhs) / scale);
            }
        }
    }

    let pass = idempotence < 1e-9
        && unitality < 1e-9
        && bimod < 1e-9
        && state_res < 1e-9
        && choi_min > -1e-9;
    Ok(ExpectationAxiomReport {
        idempotence,
        unitality,
        bimodularity: bimod,
        state_preservation: state_res,
        choi_min_eigenvalue: choi_min,
        pass,
    })
}

/// Spectral projection of the symmetrized generator onto its kernel,
/// orthogonal w.r.t. GNS(D). The range spans ker L; for a detailed-balanced
/// generator this is the phi-preserving conditional expectation onto the
/// fixed-point algebra.
///
/// Fails if L is not GNS(D)-symmetric, or if the kernel is numerically
/// ill-separated from the first nonzero eigenvalue.
pub fn fixed_point_projection(
    generator: &Generator,
    state: &DensityState,
) -> Result<ConditionalExpectation> {
    let spectrum = crate::qms::frame::SymmetrizedSpectrum::new(generator, state)?;
    spectrum.fixed_point_projection()
}
