//! Lindblad generators in the Heisenberg picture, semigroup evaluation,
//! detailed-balance diagnostics, spectral gaps, gradient and Dirichlet forms.
//!
//! Generators are stored as jump/weight data plus the cached d^2 x d^2
//! superoperator acting on vec(x). The jump form is
//!
//!   L(x) = sum_j w_j (c_j^dag c_j x + x c_j^dag c_j - 2 c_j^dag x c_j),
//!
//! so T_t = e^{-tL} is unital and completely positive; note the factor-2
//! convention on the hopping term (no global 1/2).

pub mod frame;

use alloc::vec::Vec;

use crate::algebra::{ConditionalExpectation, DensityState};
use crate::error::{Error, Result};
use crate::matcore::{CMat, C64};

use frame::{kron_axpy, predual_superop, GnsFrame, SymmetrizedSpectrum};

/// One jump operator with its positive weight.
#[derive(Clone, Debug)]
pub struct JumpTerm {
    pub operator: CMat,
    pub weight: f64,
}

impl JumpTerm {
    pub fn new(operator: CMat, weight: f64) -> Result<Self> {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::InvalidParam("jump weight must be positive"));
        }
        Ok(JumpTerm { operator, weight })
    }
}

/// Which symmetry the generator has been certified (or declared) to satisfy.
#[derive(Clone, Debug)]
pub enum SymmetryTag {
    TauSymmetric,
    GnsDb(DensityState),
    KmsDb(DensityState),
    None,
}

impl SymmetryTag {
    /// Reference state carried by the tag (tracial fallback for
    /// tau-symmetric generators).
    pub fn state(&self, dim: usize) -> Option<DensityState> {
        match self {
            SymmetryTag::TauSymmetric => Some(DensityState::tracial(dim)),
            SymmetryTag::GnsDb(d) | SymmetryTag::KmsDb(d) => Some(d.clone()),
            SymmetryTag::None => None,
        }
    }
}

/// Tolerances for the structural generator invariants.
const UNITAL_TOL: f64 = 1e-10;
const STAR_TOL: f64 = 1e-10;

/// Heisenberg-picture Lindbladian: immutable after construction.
#[derive(Clone, Debug)]
pub struct Generator {
    dim: usize,
    jumps: Vec<JumpTerm>,
    superop: CMat,
    tag: SymmetryTag,
}

impl Generator {
    pub fn zero(dim: usize) -> Generator {
        Generator {
            dim,
            jumps: Vec::new(),
            superop: CMat::zeros(dim * dim),
            tag: SymmetryTag::TauSymmetric,
        }
    }

    /// Wrap a raw superoperator. Verifies unitality L(I) = 0 and
    /// *-preservation L(x^dag) = L(x)^dag on matrix units.
    pub fn from_superop(dim: usize, superop: CMat, tag: SymmetryTag) -> Result<Generator> {
        if superop.dim() != dim * dim {
            return Err(Error::DimMismatch {
                left: superop.dim(),
                right: dim * dim,
            });
        }
        let gen = Generator {
            dim,
            jumps: Vec::new(),
            superop,
            tag,
        };
        gen.check_structure()?;
        Ok(gen)
    }

    fn check_structure(&self) -> Result<()> {
        let scale = 1.0 + self.superop.max_abs();
        let li = self.apply(&CMat::identity(self.dim));
        if li.frobenius() > UNITAL_TOL * scale {
            return Err(Error::InvalidParam(
                "generator does not annihilate the identity",
            ));
        }
        if self.star_residual() > STAR_TOL * scale {
            return Err(Error::InvalidParam("generator does not preserve adjoints"));
        }
        Ok(())
    }

    /// max over matrix units of || L(e^dag) - L(e)^dag ||_F.
    pub fn star_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let le = self.apply_unit(i, j).adjoint();
                let led = self.apply_unit(j, i);
                worst = worst.max(le.dist(&led));
            }
        }
        worst
    }

    fn apply_unit(&self, i: usize, j: usize) -> CMat {
        let d = self.dim;
        let mut col = alloc::vec![C64::new(0.0, 0.0); d * d];
        let idx = i * d + j;
        for r in 0..d * d {
            col[r] = self.superop[(r, idx)];
        }
        CMat::unvec(d, &col)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    #[inline]
    pub fn superop(&self) -> &CMat {
        &self.superop
    }

    #[inline]
    pub fn tag(&self) -> &SymmetryTag {
        &self.tag
    }

    pub fn with_tag(mut self, tag: SymmetryTag) -> Generator {
        self.tag = tag;
        self
    }

    /// L(x) through the cached superoperator.
    pub fn apply(&self, x: &CMat) -> CMat {
        CMat::unvec(self.dim, &self.superop.matvec(&x.vec()))
    }
}

/// Build the GKSL generator from jump terms:
/// L(x) = sum_j w_j (K_j x + x K_j - 2 c_j^dag x c_j), K_j = c_j^dag c_j.
pub fn gksl_generator(jumps: Vec<JumpTerm>, dim: usize) -> Result<Generator> {
    for j in &jumps {
        if j.operator.dim() != dim {
            return Err(Error::DimMismatch {
                left: j.operator.dim(),
                right: dim,
            });
        }
    }
    let one = CMat::identity(dim);
    let mut superop = CMat::zeros(dim * dim);
    for j in &jumps {
        let c = &j.operator;
        let cd = c.adjoint();
        let k = cd.matmul(c);
        let w = C64::new(j.weight, 0.0);
        kron_axpy(&mut superop, w, &k, &one);
        kron_axpy(&mut superop, w, &one, &k.transpose());
        kron_axpy(&mut superop, w * -2.0, &cd, &c.transpose());
    }
    let gen = Generator {
        dim,
        jumps,
        superop,
        tag: SymmetryTag::None,
    };
    gen.check_structure()?;
    Ok(gen)
}

/// L = Id - E for a conditional expectation E; a projection as a
/// superoperator (L^2 = L).
pub fn projection_generator(e: &ConditionalExpectation) -> Result<Generator> {
    let d = e.dim();
    let mut superop = CMat::identity(d * d);
    superop = superop.sub(e.projector());
    let l2 = superop.matmul(&superop);
    if l2.dist(&superop) > 1e-10 * (1.0 + superop.max_abs()) {
        return Err(Error::InvalidParam(
            "expectation projector is not idempotent",
        ));
    }
    Generator::from_superop(d, superop, SymmetryTag::None)
}

/// T_t(x) = exp(-t L)(x), evaluated by scaled Taylor application on vec(x).
pub fn apply_semigroup(gen: &Generator, x: &CMat, t: f64) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::InvalidParam("semigroup time must be nonnegative"));
    }
    if x.dim() != gen.dim() {
        return Err(Error::DimMismatch {
            left: x.dim(),
            right: gen.dim(),
        });
    }
    let n = gen.dim() * gen.dim();
    // infinity norm of -t S for step scaling
    let mut row_max = 0.0f64;
    for r in 0..n {
        let mut s = 0.0;
        for c in 0..n {
            s += gen.superop[(r, c)].norm();
        }
        row_max = row_max.max(s);
    }
    let total = row_max * t;
    let steps = if total <= 1.0 {
        1
    } else {
        libm::ceil(total) as usize
    };
    let dt = -t / steps as f64;

    let mut v = x.vec();
    for _ in 0..steps {
        // Taylor exp(dt S) v, terms until negligible
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..=40u32 {
            let sv = gen.superop.matvec(&term);
            let coeff = C64::new(dt / k as f64, 0.0);
            for (ti, si) in term.iter_mut().zip(sv.iter()) {
                *ti = coeff * si;
            }
            let mut tnorm = 0.0;
            let mut anorm = 0.0;
            for (a, b) in acc.iter_mut().zip(term.iter()) {
                *a += b;
                tnorm += b.norm_sqr();
                anorm += a.norm_sqr();
            }
            if tnorm <= 1e-32 * (1.0 + anorm) {
                break;
            }
        }
        v = acc;
    }
    Ok(CMat::unvec(gen.dim(), &v))
}

/// Trace-symmetry residual: max over matrix-unit pairs of
/// |tau(x^dag L(y)) - tau(L(x)^dag y)| with tau = tr/d.
pub fn check_tau_symmetry(gen: &Generator) -> f64 {
    let n = gen.dim() * gen.dim();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in a..n {
            let r = (gen.superop[(a, b)] - gen.superop[(b, a)].conj()).norm();
            worst = worst.max(r);
        }
    }
    worst / gen.dim() as f64
}

/// KMS detailed-balance residual in generator form:
/// max over matrix units of || L_*(D^{1/2} e D^{1/2}) - D^{1/2} L(e) D^{1/2} ||_F.
pub fn check_kms_db(gen: &Generator, state: &DensityState) -> Result<f64> {
    if gen.dim() != state.dim() {
        return Err(Error::DimMismatch {
            left: gen.dim(),
            right: state.dim(),
        });
    }
    let d = gen.dim();
    let half = state.sqrt();
    let sstar = predual_superop(&gen.superop, d);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let e = CMat::unit(d, i, j);
            let lhs = CMat::unvec(d, &sstar.matvec(&half.matmul(&e).matmul(&half).vec()));
            let rhs = half.matmul(&gen.apply(&e)).matmul(&half);
            worst = worst.max(lhs.dist(&rhs));
        }
    }
    Ok(worst)
}

/// GNS detailed-balance residual: the larger of
///  - the GNS-symmetry residual (frame asymmetry over the GNS-orthonormal basis),
///  - the modular commutation residual at t in {0.5, 1}.
pub fn check_gns_db(gen: &Generator, state: &DensityState) -> Result<f64> {
    let frame = GnsFrame::new(gen, state)?;
    let mut worst = frame.asym;
    for &t in &[0.5f64, 1.0] {
        // sigma_t . L . sigma_{-t} - L via the kron structure of conjugations
        let a = state.power(C64::new(0.0, t))?;
        let ls = frame::kron_apply_right(&gen.superop, &a.adjoint(), &a.transpose());
        let sls = frame::kron_apply_left(&a, &a.conj(), &ls);
        worst = worst.max(sls.sub(&gen.superop).max_abs());
    }
    Ok(worst)
}

/// Which inner product a gap report was computed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameForm {
    TracialHs,
    Gns,
}

/// Spectral data of the symmetrized generator in its GNS frame.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub alpha: f64,
    pub kernel_dim: usize,
    pub spectrum: Vec<f64>,
    pub inner_product: FrameForm,
}

/// Spectral gap of a detailed-balanced generator w.r.t. GNS(D): smallest
/// nonzero eigenvalue of the symmetrized frame matrix. Asymmetry above
/// 1e-9 aborts with a not-detailed-balanced error.
pub fn spectral_gap(gen: &Generator, state: &DensityState) -> Result<GapReport> {
    let spec = SymmetrizedSpectrum::new(gen, state)?;
    Ok(gap_report_from(&spec))
}

pub fn gap_report_from(spec: &SymmetrizedSpectrum) -> GapReport {
    let form = if spec.state.is_tracial(1e-12) {
        FrameForm::TracialHs
    } else {
        FrameForm::Gns
    };
    GapReport {
        alpha: spec.alpha,
        kernel_dim: spec.kernel_dim,
        spectrum: spec.eig.eigenvalues.clone(),
        inner_product: form,
    }
}

/// Carre du champ Gamma(x,y) = (L(x^dag) y + x^dag L(y) - L(x^dag y)) / 2.
pub fn gradient_form(gen: &Generator, x: &CMat, y: &CMat) -> CMat {
    let xd = x.adjoint();
    let a = gen.apply(&xd).matmul(y);
    let b = xd.matmul(&gen.apply(y));
    let c = gen.apply(&xd.matmul(y));
    a.add(&b).sub(&c).scale_re(0.5)
}

/// Dirichlet form E(x) = tau(x^dag L(x)), normalized trace.
pub fn dirichlet_form(gen: &Generator, x: &CMat) -> f64 {
    x.adjoint().matmul(&gen.apply(x)).ntrace().re
}

/// Resolvent regularization L_eps = L (1 + eps L)^{-1} by spectral calculus
/// on the symmetrized frame matrix; the detailed-balance tag survives.
pub fn regularize(gen: &Generator, eps: f64) -> Result<Generator> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParam(
            "regularization parameter must be positive",
        ));
    }
    let state = gen.tag().state(gen.dim()).ok_or(Error::InvalidParam(
        "regularization needs a detailed-balance tag",
    ))?;
    let spec = SymmetrizedSpectrum::new(gen, &state)?;
    let n = gen.dim() * gen.dim();
    let mut f = CMat::zeros(n);
    // V g(Lam) V^dag with g = l / (1 + eps l)
    let g: Vec<f64> = spec
        .eig
        .eigenvalues
        .iter()
        .map(|&l| l / (1.0 + eps * l))
        .collect();
    for r in 0..n {
        for c in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += spec.eig.u[(r, k)] * C64::new(g[k], 0.0) * spec.eig.u[(c, k)].conj();
            }
            f[(r, c)] = acc;
        }
    }
    let superop = spec.frame.frame_to_superop(&f);
    Generator::from_superop(gen.dim(), superop, gen.tag().clone())
}

/// Tensor generator L = L1 (x) Id + Id (x) L2 (the generator of T1_t (x) T2_t),
/// with composite reference state D1 (x) D2 in the tag when both inputs are
/// detailed-balanced.
pub fn tensor_generator(g1: &Generator, g2: &Generator) -> Result<Generator> {
    let (d1, d2) = (g1.dim(), g2.dim());
    let d = d1 * d2;
    let n = d * d;
    let mut superop = CMat::zeros(n);
    // index convention: row ((i1,i2),(j1,j2)) = (i1*d2+i2)*d + (j1*d2+j2)
    let vec_idx = |i1: usize, i2: usize, j1: usize, j2: usize| (i1 * d2 + i2) * d + (j1 * d2 + j2);
    let n1 = d1 * d1;
    let n2 = d2 * d2;
    // L1 (x) Id
    for r1 in 0..n1 {
        for c1 in 0..n1 {
            let v = g1.superop[(r1, c1)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let (i1, j1) = (r1 / d1, r1 % d1);
            let (k1, l1) = (c1 / d1, c1 % d1);
            for i2 in 0..d2 {
                for j2 in 0..d2 {
                    superop[(vec_idx(i1, i2, j1, j2), vec_idx(k1, i2, l1, j2))] += v;
                }
            }
        }
    }
    // Id (x) L2
    for r2 in 0..n2 {
        for c2 in 0..n2 {
            let v = g2.superop[(r2, c2)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let (i2, j2) = (r2 / d2, r2 % d2);
            let (k2, l2) = (c2 / d2, c2 % d2);
            for i1 in 0..d1 {
                for j1 in 0..d1 {
                    superop[(vec_idx(i1, i2, j1, j2), vec_idx(i1, k2, j1, l2))] += v;
                }
            }
        }
    }
    // lift jumps only when the jump data describes both factors completely
    let jumps_cover_both = (!g1.jumps.is_empty() || g1.superop.max_abs() == 0.0)
        && (!g2.jumps.is_empty() || g2.superop.max_abs() == 0.0);
    let mut jumps = Vec::new();
    if jumps_cover_both {
        let one1 = CMat::identity(d1);
        let one2 = CMat::identity(d2);
        for j in &g1.jumps {
            jumps.push(JumpTerm::new(j.operator.kron(&one2), j.weight)?);
        }
        for j in &g2.jumps {
            jumps.push(JumpTerm::new(one1.kron(&j.operator), j.weight)?);
        }
    }
    let tag = match (g1.tag(), g2.tag()) {
        (SymmetryTag::TauSymmetric, SymmetryTag::TauSymmetric) => SymmetryTag::TauSymmetric,
        (SymmetryTag::None, _) | (_, SymmetryTag::None) => SymmetryTag::None,
        (t1 @ SymmetryTag::KmsDb(_), t2) | (t1, t2 @ SymmetryTag::KmsDb(_)) => {
            match (t1.state(d1), t2.state(d2)) {
                (Some(s1), Some(s2)) => SymmetryTag::KmsDb(s1.tensor(&s2)?),
                _ => SymmetryTag::None,
            }
        }
        (t1, t2) => match (t1.state(d1), t2.state(d2)) {
            (Some(s1), Some(s2)) => SymmetryTag::GnsDb(s1.tensor(&s2)?),
            _ => SymmetryTag::None,
        },
    };
    let gen = Generator {
        dim: d,
        jumps,
        superop,
        tag,
    };
    gen.check_structure()?;
    Ok(gen)
}

/// Direct-sum generator on M_{d1+d2}: the lifted jumps act as the exact
/// direct sum on the block-diagonal algebra M_{d1} (+) M_{d2}; an added
/// block-decoherence jump (P1 - P2 with weight (a1+a2)/4) kills the
/// off-diagonal corners faster than min(a1, a2), so the spectral gap of
/// the embedding equals the direct-sum gap min(a1, a2). Composite state
/// (D1 (+) D2)/2.
pub fn direct_sum_generator(g1: &Generator, g2: &Generator) -> Result<Generator> {
    if g1.jumps.is_empty() && g1.superop.max_abs() > 0.0
        || g2.jumps.is_empty() && g2.superop.max_abs() > 0.0
    {
        return Err(Error::InvalidParam("direct sum needs jump-form generators"));
    }
    let s1 = g1.tag().state(g1.dim()).ok_or(Error::InvalidParam(
        "direct sum needs detailed-balanced inputs",
    ))?;
    let s2 = g2.tag().state(g2.dim()).ok_or(Error::InvalidParam(
        "direct sum needs detailed-balanced inputs",
    ))?;
    let a1 = spectral_gap(g1, &s1)?.alpha;
    let a2 = spectral_gap(g2, &s2)?.alpha;

    let (d1, d2) = (g1.dim(), g2.dim());
    let d = d1 + d2;
    let embed1 = |c: &CMat| {
        let mut m = CMat::zeros(d);
        for i in 0..d1 {
            for j in 0..d1 {
                m[(i, j)] = c[(i, j)];
            }
        }
        m
    };
    let embed2 = |c: &CMat| {
        let mut m = CMat::zeros(d);
        for i in 0..d2 {
            for j in 0..d2 {
                m[(d1 + i, d1 + j)] = c[(i, j)];
            }
        }
        m
    };
    let mut jumps = Vec::new();
    for j in &g1.jumps {
        jumps.push(JumpTerm::new(embed1(&j.operator), j.weight)?);
    }
    for j in &g2.jumps {
        jumps.push(JumpTerm::new(embed2(&j.operator), j.weight)?);
    }
    // block decoherence: c0 = P1 - P2, Hermitian unitary commuting with D
    let mut c0 = CMat::zeros(d);
    for i in 0..d1 {
        c0[(i, i)] = C64::new(1.0, 0.0);
    }
    for i in 0..d2 {
        c0[(d1 + i, d1 + i)] = C64::new(-1.0, 0.0);
    }
    let w0 = (a1 + a2).max(1.0) / 4.0;
    jumps.push(JumpTerm::new(c0, w0)?);

    let state = s1.direct_sum_half(&s2)?;
    Ok(gksl_generator(jumps, d)?.with_tag(SymmetryTag::GnsDb(state)))
}
