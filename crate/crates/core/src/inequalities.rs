//! Numeric certificates for the functional inequalities: Poincare PI(p,q)
//! in tracial, Haagerup and Lipschitz forms, the generalized Klein
//! inequality, the convex-chain estimate, sub-exponential concentration,
//! the semigroup diameter bound, the Talagrand lower-bound probe, the
//! Khintchine bound, and the composite (tensor / direct-sum) gap laws.
//!
//! Every certificate records LHS, RHS, the constant used, the ratio and a
//! pass flag at multiplicative tolerance (default 1e-9), plus the sample
//! provenance so batch runs stay reproducible line by line.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lpspaces::{gamma_p, kosaki_norm, lipschitz_seminorm, KosakiIndex};
use crate::matcore::{
    herm_eig, schatten_from_sv, schatten_norm, CMat, HermitianMatrix, PNorm, TraceMode,
};
use crate::models::{self, Model};
use crate::qms::frame::SymmetrizedSpectrum;
use crate::qms::{
    apply_semigroup, check_tau_symmetry, direct_sum_generator, dirichlet_form, gradient_form,
    spectral_gap, tensor_generator, Generator,
};

/// Default multiplicative tolerance for certificates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Sample provenance: which seed and which index within the batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleId {
    pub seed: u64,
    pub index: u64,
}

impl SampleId {
    pub fn new(seed: u64, index: u64) -> Self {
        SampleId { seed, index }
    }
}

/// One inequality instance: lhs <= rhs with rhs = constant * core.
#[derive(Clone, Debug)]
pub struct InequalityCertificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub ratio: f64,
    pub pass: bool,
    pub tol: f64,
    pub sample: SampleId,
}

impl InequalityCertificate {
    pub fn new(
        name: String,
        lhs: f64,
        rhs: f64,
        constant: f64,
        tol: f64,
        sample: SampleId,
    ) -> Result<Self> {
        if !lhs.is_finite() || !rhs.is_finite() || !constant.is_finite() {
            return Err(Error::InvalidParam("certificate fields must be finite"));
        }
        let (ratio, pass) = if rhs == 0.0 {
            if lhs == 0.0 {
                (0.0, true)
            } else {
                (f64::MAX, false)
            }
        } else {
            (lhs / rhs, lhs <= rhs * (1.0 + tol))
        };
        Ok(InequalityCertificate {
            name,
            lhs,
            rhs,
            constant,
            ratio,
            pass,
            tol,
            sample,
        })
    }
}

/// Which form of the Poincare inequality to certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiMode {
    /// || x - E(x) ||_p <= c || Gamma(x,x)^{1/2} ||_p, normalized trace,
    /// self-adjoint x on a trace-symmetric model.
    TracialSa,
    /// Haagerup form on embedded self-adjoint elements.
    HaagerupSa,
    /// Haagerup form for general elements (two gradient terms).
    HaagerupGeneral,
    /// || a - E_p(a) ||_p <= c ||x||_Lip.
    LipInfinity,
}

impl PiMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PiMode::TracialSa => "pi_tracial_sa",
            PiMode::HaagerupSa => "pi_haagerup_sa",
            PiMode::HaagerupGeneral => "pi_haagerup_general",
            PiMode::LipInfinity => "pi_lip_infinity",
        }
    }
}

/// Exponent gate shared by the Poincare certificates: p = 2 or p >= 3;
/// p in (2,3) only with the strict-mode flag, which costs an extra sqrt(2).
fn pi_constant(p: f64, alpha: f64, allow_intermediate: bool) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::InvalidExponent { p });
    }
    let base = p / libm::sqrt(2.0 * alpha);
    if p == 2.0 || p >= 3.0 {
        Ok(base)
    } else if allow_intermediate {
        Ok(base * libm::sqrt(2.0))
    } else {
        Err(Error::InvalidExponent { p })
    }
}

const SA_TOL: f64 = 1e-10;

fn require_self_adjoint(x: &CMat) -> Result<()> {
    let res = x.hermitian_residual();
    if res > SA_TOL * (1.0 + x.frobenius()) {
        return Err(Error::NotHermitian { residual: res });
    }
    Ok(())
}

/// Eigenvalues of a numerically Hermitian PSD matrix, clamped at zero;
/// rejects genuinely indefinite input.
fn psd_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    let scale = 1.0 + m.frobenius();
    if m.hermitian_residual() > 1e-8 * scale {
        return Err(Error::NotHermitian {
            residual: m.hermitian_residual() / scale,
        });
    }
    let eig = herm_eig(&HermitianMatrix::new_unchecked(m.symmetrize()))?;
    if eig.min_eigenvalue() < -1e-8 * scale {
        return Err(Error::InvalidState {
            value: eig.min_eigenvalue(),
        });
    }
    Ok(eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect())
}

/// || m^{1/2} ||_p from the clamped eigenvalues of a PSD matrix.
fn psd_sqrt_norm(m: &CMat, p: PNorm, mode: TraceMode) -> Result<f64> {
    let sv: Vec<f64> = psd_eigenvalues(m)?.iter().map(|&l| libm::sqrt(l)).collect();
    Ok(schatten_from_sv(&sv, p, mode))
}

/// Certify the Poincare inequality for one element.
pub fn verify_pi(
    model: &Model,
    x: &CMat,
    p: PNorm,
    mode: PiMode,
    allow_intermediate: bool,
    sample: SampleId,
) -> Result<InequalityCertificate> {
    let pv = match p {
        PNorm::Finite(v) => v,
        PNorm::Infinity => return Err(Error::InvalidParam("PI(p,p) needs finite p")),
    };
    let alpha = model.alpha()?;
    let constant = pi_constant(pv, alpha, allow_intermediate)?;
    let e = model.expectation()?;
    let centered = x.sub(&e.apply(x));
    let name = format!("{}(p={pv})", mode.as_str());

    let (lhs, core) = match mode {
        PiMode::TracialSa => {
            require_self_adjoint(x)?;
            if !model.state.is_tracial(1e-12) {
                return Err(Error::InvalidParam(
                    "tracial PI mode needs the tracial state",
                ));
            }
            let lhs = schatten_norm(&centered, p, TraceMode::Normalized)?;
            let gamma = gradient_form(&model.generator, x, x);
            let core = psd_sqrt_norm(&gamma, p, TraceMode::Normalized)?;
            (lhs, core)
        }
        PiMode::HaagerupSa => {
            require_self_adjoint(x)?;
            let idx = KosakiIndex::symmetric(p, &model.state)?;
            let lhs = kosaki_norm(&centered, &idx)?;
            let a = crate::lpspaces::kosaki_embed(x, &idx)?;
            let g = gamma_p(&model.generator, &a, &a, &idx)?;
            let core = psd_sqrt_norm(&g, p, TraceMode::Unnormalized)?;
            (lhs, core)
        }
        PiMode::HaagerupGeneral => {
            let idx = KosakiIndex::symmetric(p, &model.state)?;
            let lhs = kosaki_norm(&centered, &idx)?;
            let a = crate::lpspaces::kosaki_embed(x, &idx)?;
            let ad = a.adjoint();
            let g1 = gamma_p(&model.generator, &a, &a, &idx)?;
            let g2 = gamma_p(&model.generator, &ad, &ad, &idx)?;
            let core = psd_sqrt_norm(&g1, p, TraceMode::Unnormalized)?
                + psd_sqrt_norm(&g2, p, TraceMode::Unnormalized)?;
            (lhs, core)
        }
        PiMode::LipInfinity => {
            let idx = KosakiIndex::symmetric(p, &model.state)?;
            let lhs = kosaki_norm(&centered, &idx)?;
            let core = lipschitz_seminorm(&model.generator, x)?;
            (lhs, core)
        }
    };
    // snap float noise to exact zero so kernel elements certify as 0 <= 0
    let floor = 1e-12 * (1.0 + x.frobenius());
    let lhs = if lhs < floor { 0.0 } else { lhs };
    let core = if core < floor { 0.0 } else { core };
    InequalityCertificate::new(name, lhs, constant * core, constant, DEFAULT_TOL, sample)
}

/// phi(s) = sgn(s) |s|^{p/2} and psi = (phi')^2 = (p/2)^2 |s|^{p-2}.
fn klein_phi(p: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| libm::copysign(libm::pow(libm::fabs(s), p / 2.0), s)
}

fn klein_psi(p: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| (p / 2.0) * (p / 2.0) * libm::pow(libm::fabs(s), p - 2.0)
}

/// Exponents for which psi is convex.
fn klein_gate(p: f64) -> Result<()> {
    if p == 2.0 || p >= 3.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent { p })
    }
}

/// Generalized Klein inequality:
/// tau[(phi(x)-phi(y))^2] <= tau[(x-y)^2 (psi(x)+psi(y))] / 2.
pub fn klein_check(x: &CMat, y: &CMat, p: f64, sample: SampleId) -> Result<InequalityCertificate> {
    require_self_adjoint(x)?;
    require_self_adjoint(y)?;
    x.check_same_dim(y)?;
    klein_gate(p)?;
    let hx = HermitianMatrix::new_unchecked(x.symmetrize());
    let hy = HermitianMatrix::new_unchecked(y.symmetrize());
    let ex = herm_eig(&hx)?;
    let ey = herm_eig(&hy)?;
    let phix = ex.apply(klein_phi(p));
    let phiy = ey.apply(klein_phi(p));
    let psix = ex.apply(klein_psi(p));
    let psiy = ey.apply(klein_psi(p));

    let dphi = phix.sub(&phiy);
    let lhs = dphi.matmul(&dphi).ntrace().re;
    let dxy = hx.mat().sub(hy.mat());
    let rhs = 0.5 * dxy.matmul(&dxy).matmul(&psix.add(&psiy)).ntrace().re;
    InequalityCertificate::new(format!("klein(p={p})"), lhs, rhs, 0.5, DEFAULT_TOL, sample)
}

/// Convex-chain estimate: E(phi(x)) <= tau(Gamma(x,x) psi(x)) for
/// trace-symmetric generators.
pub fn convex_chain_check(
    gen: &Generator,
    x: &CMat,
    p: f64,
    sample: SampleId,
) -> Result<InequalityCertificate> {
    require_self_adjoint(x)?;
    klein_gate(p)?;
    if check_tau_symmetry(gen) > 1e-8 {
        return Err(Error::NotDetailedBalanced {
            residual: check_tau_symmetry(gen),
        });
    }
    let hx = HermitianMatrix::new_unchecked(x.symmetrize());
    let ex = herm_eig(&hx)?;
    let phix = ex.apply(klein_phi(p));
    let psix = ex.apply(klein_psi(p));
    let lhs = dirichlet_form(gen, &phix);
    let gamma = gradient_form(gen, hx.mat(), hx.mat());
    let rhs = gamma.matmul(&psix).ntrace().re;
    InequalityCertificate::new(
        format!("convex_chain(p={p})"),
        lhs,
        rhs,
        1.0,
        DEFAULT_TOL,
        sample,
    )
}

/// Sub-exponential concentration report for one (x, t).
#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub t: f64,
    /// phi(1 - e) for the spectral projection e = 1_{[-t,t]}(x - E x).
    pub tail_mass: f64,
    /// || e (x - E x) e ||_infinity; at most t by construction.
    pub witness_norm: f64,
    /// 2 exp(-sqrt(alpha) t / (2 sqrt(2) e ||x||_Lip)).
    pub subexp_bound: f64,
    /// Optimal exponent sqrt(2 alpha) t / (4 e ||x||_Lip).
    pub p_star: f64,
    /// (p, 2 (t/4)^{-p} ||x - Ex||_{L^p}^p) rows of the Chebyshev bound.
    pub chebyshev: Vec<(f64, f64)>,
    pub lip: f64,
    /// Fixed-point input: tail is trivially zero, bound vacuous.
    pub lip_zero: bool,
    /// tail <= subexponential bound whenever p_star >= 3 (vacuous below).
    pub pass: bool,
}

pub fn concentration_certificate(
    model: &Model,
    x: &CMat,
    t: f64,
    chebyshev_ps: &[f64],
) -> Result<ConcentrationReport> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidParam(
            "concentration threshold t must be positive",
        ));
    }
    require_self_adjoint(x)?;
    let alpha = model.alpha()?;
    let e = model.expectation()?;
    let centered = x.sub(&e.apply(x));
    let lip = lipschitz_seminorm(&model.generator, x)?;

    let hy = HermitianMatrix::new_unchecked(centered.symmetrize());
    let ey = herm_eig(&hy)?;
    // spectral projection onto [-t, t]: commutes with its argument, and
    // ||e y e||_inf <= t holds exactly
    let proj = ey.apply(|s| if libm::fabs(s) <= t { 1.0 } else { 0.0 });
    let cut = ey.apply(|s| if libm::fabs(s) <= t { s } else { 0.0 });
    let tail_mass = model
        .state
        .expectation(&CMat::identity(model.dim()).sub(&proj))
        .re;
    let witness_norm = schatten_norm(&cut, PNorm::Infinity, TraceMode::Unnormalized)?;

    // square roots amplify float noise: Gamma of an exact fixed point sits
    // at ~1e-16, so its Lipschitz seminorm shows up around 1e-8
    if lip <= 1e-7 * (1.0 + x.frobenius()) {
        return Ok(ConcentrationReport {
            t,
            tail_mass,
            witness_norm,
            subexp_bound: 0.0,
            p_star: f64::MAX,
            chebyshev: Vec::new(),
            lip,
            lip_zero: true,
            pass: tail_mass <= DEFAULT_TOL,
        });
    }

    let euler = libm::exp(1.0);
    let p_star = libm::sqrt(2.0 * alpha) * t / (4.0 * euler * lip);
    let subexp_bound =
        2.0 * libm::exp(-libm::sqrt(alpha) * t / (2.0 * libm::sqrt(2.0) * euler * lip));
    let mut chebyshev = Vec::with_capacity(chebyshev_ps.len());
    for &pv in chebyshev_ps {
        let idx = KosakiIndex::symmetric(PNorm::finite(pv)?, &model.state)?;
        let norm = kosaki_norm(&centered, &idx)?;
        chebyshev.push((pv, 2.0 * libm::pow(t / 4.0, -pv) * libm::pow(norm, pv)));
    }
    let pass = p_star < 3.0 || tail_mass <= subexp_bound * (1.0 + DEFAULT_TOL);
    Ok(ConcentrationReport {
        t,
        tail_mass,
        witness_norm,
        subexp_bound,
        p_star,
        chebyshev,
        lip,
        lip_zero: false,
        pass,
    })
}

/// Semigroup diameter report: || x - E(x) ||_inf <= diam * ||x||_Lip with
/// diam = e log(1/lambda_min) / sqrt(2 alpha).
#[derive(Clone, Debug)]
pub struct DiameterReport {
    pub log_inv_lambda_min: f64,
    /// log(1/lambda_min) <= 3: the bound is reported but not asserted.
    pub advisory: bool,
    pub diam: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub pass: bool,
}

pub fn diameter_check(model: &Model, sample_count: usize, seed: u64) -> Result<DiameterReport> {
    let alpha = model.alpha()?;
    let e = model.expectation()?;
    let log_inv = libm::log(1.0 / model.state.lambda_min());
    let advisory = log_inv <= 3.0;
    let diam = libm::exp(1.0) * log_inv / libm::sqrt(2.0 * alpha);
    let mut rng = crate::sampling::stream(seed, 0x6469616d);
    let mut max_ratio = 0.0f64;
    for _ in 0..sample_count {
        let x = crate::sampling::random_self_adjoint(&mut rng, model.dim());
        let lip = lipschitz_seminorm(&model.generator, &x)?;
        if lip < 1e-12 {
            continue;
        }
        let centered = x.sub(&e.apply(&x));
        let sup = schatten_norm(&centered, PNorm::Infinity, TraceMode::Unnormalized)?;
        max_ratio = max_ratio.max(sup / (diam * lip));
    }
    Ok(DiameterReport {
        log_inv_lambda_min: log_inv,
        advisory,
        diam,
        max_ratio,
        samples: sample_count,
        pass: advisory || max_ratio <= 1.0 + DEFAULT_TOL,
    })
}

/// Talagrand probe on the birth-death chain: lower bound for the
/// Gamma*-distance between the two endpoint states against the
/// entropy budget, and the minimal constant the inequality would need.
#[derive(Clone, Debug)]
pub struct TalagrandReport {
    pub n: usize,
    pub beta: f64,
    /// |mu_A(f) - mu_B(f)| with A = {1}, B = {n}.
    pub lower_bound: f64,
    pub f_lip: f64,
    /// sqrt(-ln mu(A)) + sqrt(-ln mu(B)).
    pub entropy_budget: f64,
    /// lower_bound / entropy_budget.
    pub c_min: f64,
}

pub fn talagrand_probe(n: usize, beta: f64) -> Result<TalagrandReport> {
    if n < 2 || !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParam(
            "talagrand probe needs n >= 2 and beta > 0",
        ));
    }
    let (gen, state) = models::birth_death_parts(n, beta)?;
    let f = models::birth_death_f(n, beta);
    let f_lip = lipschitz_seminorm(&gen, &f)?;
    // endpoint states are pure: mu_A(f) = f_11, mu_B(f) = f_nn
    let lower_bound = libm::fabs(f[(0, 0)].re - f[(n - 1, n - 1)].re);
    let mu_a = state.matrix()[(0, 0)].re;
    let mu_b = state.matrix()[(n - 1, n - 1)].re;
    let entropy_budget = libm::sqrt(-libm::log(mu_a)) + libm::sqrt(-libm::log(mu_b));
    Ok(TalagrandReport {
        n,
        beta,
        lower_bound,
        f_lip,
        entropy_budget,
        c_min: lower_bound / entropy_budget,
    })
}

/// Composite gap report: tensor and direct-sum gaps against min(a1, a2),
/// with the decay rate of the witness x1 (x) 1.
#[derive(Clone, Debug)]
pub struct CompositeGapReport {
    pub alpha1: f64,
    pub alpha2: f64,
    pub tensor_alpha: f64,
    pub direct_sum_alpha: f64,
    pub expected: f64,
    pub witness_rate_dev: f64,
    pub pass: bool,
}

pub fn composite_gap_check(m1: &Model, m2: &Model) -> Result<CompositeGapReport> {
    let alpha1 = m1.alpha()?;
    let alpha2 = m2.alpha()?;
    let expected = alpha1.min(alpha2);

    let tensor = tensor_generator(&m1.generator, &m2.generator)?;
    let tstate = m1.state.tensor(&m2.state)?;
    let tensor_alpha = spectral_gap(&tensor, &tstate)?.alpha;

    let ds = direct_sum_generator(&m1.generator, &m2.generator)?;
    let dstate = m1.state.direct_sum_half(&m2.state)?;
    let direct_sum_alpha = spectral_gap(&ds, &dstate)?.alpha;

    // witness x1 (x) 1 decays at exactly alpha1
    let spec1 = SymmetrizedSpectrum::new(&m1.generator, &m1.state)?;
    let x1 = spec1
        .gap_witness()
        .ok_or(Error::InvalidParam("first model has no spectral gap"))?;
    let w = x1.kron(&CMat::identity(m2.dim()));
    let form = tstate.gns_form();
    let n0 = libm::sqrt(crate::matcore::inner_product(&w, &w, &form)?.re);
    let mut witness_rate_dev = 0.0f64;
    for &t in &[0.3f64, 1.0] {
        let wt = apply_semigroup(&tensor, &w, t)?;
        let nt = libm::sqrt(crate::matcore::inner_product(&wt, &wt, &form)?.re);
        let rate = -libm::log(nt / n0) / t;
        witness_rate_dev = witness_rate_dev.max(libm::fabs(rate - alpha1));
    }

    let pass = libm::fabs(tensor_alpha - expected) <= 1e-9 * (1.0 + expected)
        && libm::fabs(direct_sum_alpha - expected) <= 1e-9 * (1.0 + expected)
        && witness_rate_dev <= 1e-8 * (1.0 + alpha1);
    Ok(CompositeGapReport {
        alpha1,
        alpha2,
        tensor_alpha,
        direct_sum_alpha,
        expected,
        witness_rate_dev,
        pass,
    })
}

/// Khintchine bound for Rademacher sums:
/// || sum_i eps_i a_i ||_p <= (p/sqrt(2)) (||(sum a_i^dag a_i)^{1/2}||_p
///                                        + ||(sum a_i a_i^dag)^{1/2}||_p),
/// normalized traces on both sides.
pub fn khintchine_certificate(
    coefficients: &[CMat],
    p: f64,
    sample: SampleId,
) -> Result<InequalityCertificate> {
    if coefficients.is_empty() {
        return Err(Error::InvalidParam(
            "khintchine needs at least one coefficient",
        ));
    }
    if !p.is_finite() || p < 2.0 {
        return Err(Error::InvalidExponent { p });
    }
    let n = coefficients.len();
    let d = coefficients[0].dim();
    let x = models::rademacher_degree_one(n, d, coefficients)?;
    let lhs = schatten_norm(&x, PNorm::Finite(p), TraceMode::Normalized)?;
    let mut row = CMat::zeros(d);
    let mut col = CMat::zeros(d);
    for a in coefficients {
        row = row.add(&a.adjoint().matmul(a));
        col = col.add(&a.matmul(&a.adjoint()));
    }
    let core = psd_sqrt_norm(&row, PNorm::Finite(p), TraceMode::Normalized)?
        + psd_sqrt_norm(&col, PNorm::Finite(p), TraceMode::Normalized)?;
    let constant = p / libm::sqrt(2.0);
    InequalityCertificate::new(
        format!("khintchine(p={p})"),
        lhs,
        constant * core,
        constant,
        DEFAULT_TOL,
        sample,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn pf(v: f64) -> PNorm {
        PNorm::finite(v).unwrap()
    }

    fn sid(i: u64) -> SampleId {
        SampleId::new(0, i)
    }

    #[test]
    fn certificate_edge_cases() {
        let c = InequalityCertificate::new(String::from("z"), 0.0, 0.0, 1.0, 1e-9, sid(0)).unwrap();
        assert!(c.pass && c.ratio == 0.0);
        let c = InequalityCertificate::new(String::from("z"), 1.0, 0.0, 1.0, 1e-9, sid(0)).unwrap();
        assert!(!c.pass);
        assert!(
            InequalityCertificate::new(String::from("z"), f64::NAN, 1.0, 1.0, 1e-9, sid(0))
                .is_err()
        );
    }

    #[test]
    fn pi_kernel_element_passes_trivially() {
        let m = models::depolarizing(3).unwrap();
        let x = CMat::identity(3).scale_re(0.7);
        let c = verify_pi(&m, &x, pf(4.0), PiMode::TracialSa, false, sid(0)).unwrap();
        assert!(c.pass && c.lhs < 1e-12 && c.rhs < 1e-6);
    }

    #[test]
    fn pi_eigen_element_ratio_is_inverse_sqrt_two() {
        // depolarizing at p = 2: every centered sa x is an eigen-element,
        // LHS / core = 1/sqrt(alpha), so ratio = 1/sqrt(2) of the budget
        let m = models::depolarizing(4).unwrap();
        let mut rng = sampling::stream(3, 0);
        let x = sampling::random_self_adjoint(&mut rng, 4);
        let x = x.sub(&CMat::identity(4).scale(x.ntrace()));
        let c = verify_pi(&m, &x, pf(2.0), PiMode::TracialSa, false, sid(0)).unwrap();
        assert!(c.pass);
        assert!((c.ratio - 1.0 / libm::sqrt(2.0)).abs() < 1e-10);
    }

    #[test]
    fn pi_exponent_gate() {
        let m = models::depolarizing(3).unwrap();
        let mut rng = sampling::stream(4, 0);
        let x = sampling::random_self_adjoint(&mut rng, 3);
        assert!(matches!(
            verify_pi(&m, &x, pf(2.5), PiMode::TracialSa, false, sid(0)),
            Err(Error::InvalidExponent { .. })
        ));
        // strict mode admits (2,3) with the extra sqrt(2)
        let c = verify_pi(&m, &x, pf(2.5), PiMode::TracialSa, true, sid(0)).unwrap();
        assert!((c.constant - 2.5 / libm::sqrt(2.0) * libm::sqrt(2.0)).abs() < 1e-14);
        assert!(c.pass);
        // non-self-adjoint input rejected in sa modes
        let y = sampling::random_matrix(&mut rng, 3);
        assert!(matches!(
            verify_pi(&m, &y, pf(4.0), PiMode::TracialSa, false, sid(0)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn pi_tracial_random_grid() {
        let m = models::birth_death(4, 0.0).unwrap();
        let mut rng = sampling::stream(5, 0);
        for (i, &pv) in [2.0, 3.0, 4.0, 6.0].iter().enumerate() {
            for j in 0..25 {
                let x = sampling::random_self_adjoint(&mut rng, 4);
                let c = verify_pi(
                    &m,
                    &x,
                    pf(pv),
                    PiMode::TracialSa,
                    false,
                    sid((i * 100 + j) as u64),
                )
                .unwrap();
                assert!(c.pass, "tracial PI failed: {c:?}");
            }
        }
    }

    #[test]
    fn pi_haagerup_modes_on_thermal_chain() {
        let m = models::birth_death(3, 1.0).unwrap();
        let mut rng = sampling::stream(6, 0);
        for &pv in &[2.0, 3.0, 4.0, 6.0] {
            for j in 0..15 {
                let xs = sampling::random_self_adjoint(&mut rng, 3);
                let c = verify_pi(&m, &xs, pf(pv), PiMode::HaagerupSa, false, sid(j)).unwrap();
                assert!(c.pass, "haagerup_sa failed: {c:?}");
                let xg = sampling::random_matrix(&mut rng, 3);
                let c = verify_pi(&m, &xg, pf(pv), PiMode::HaagerupGeneral, false, sid(j)).unwrap();
                assert!(c.pass, "haagerup_general failed: {c:?}");
                let c = verify_pi(&m, &xs, pf(pv), PiMode::LipInfinity, false, sid(j)).unwrap();
                assert!(c.pass, "lip_infinity failed: {c:?}");
            }
        }
    }

    #[test]
    fn pi_budget_never_contradicts_sharp_gap_constant() {
        // at p = 2 the budget is sqrt(2/alpha) = sqrt(2) times the sharp 1/sqrt(alpha);
        // the sharp PI(2,2) itself must hold on samples
        let m = models::birth_death(4, 0.0).unwrap();
        let alpha = m.alpha().unwrap();
        let c0 = pi_constant(2.0, alpha, false).unwrap();
        assert!((c0 / (1.0 / libm::sqrt(alpha)) - libm::sqrt(2.0)).abs() < 1e-14);
        let mut rng = sampling::stream(7, 0);
        for _ in 0..20 {
            let x = sampling::random_self_adjoint(&mut rng, 4);
            let c = verify_pi(&m, &x, pf(2.0), PiMode::TracialSa, false, sid(0)).unwrap();
            assert!(
                c.ratio <= 1.0 / libm::sqrt(2.0) + 1e-9,
                "sharp gap constant violated"
            );
        }
    }

    #[test]
    fn klein_scalar_case() {
        // x = 2, y = 0, p = 6: phi = s^3, LHS 64, RHS 4 * (9*16)/2 = 288
        let x = CMat::diag_re(&[2.0]);
        let y = CMat::diag_re(&[0.0]);
        let c = klein_check(&x, &y, 6.0, sid(0)).unwrap();
        assert!((c.lhs - 64.0).abs() < 1e-10);
        assert!((c.rhs - 288.0).abs() < 1e-9);
        assert!(c.pass);
    }

    #[test]
    fn klein_equal_arguments_and_gate() {
        let mut rng = sampling::stream(8, 0);
        let x = sampling::random_self_adjoint(&mut rng, 4);
        let c = klein_check(&x, &x, 4.0, sid(0)).unwrap();
        assert!(c.lhs.abs() < 1e-12 && c.pass);
        assert!(matches!(
            klein_check(&x, &x, 2.5, sid(0)),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn klein_commuting_pairs_oracle() {
        // commuting pair: simultaneous diagonalization makes both sides
        // scalar sums, evaluated independently here
        let mut rng = sampling::stream(9, 0);
        for &pv in &[3.0f64, 4.0, 6.0] {
            for _ in 0..20 {
                let base = sampling::random_hermitian(&mut rng, 8);
                let e = herm_eig(&base).unwrap();
                let dx: Vec<f64> = (0..8).map(|_| sampling::normal(&mut rng)).collect();
                let dy: Vec<f64> = (0..8).map(|_| sampling::normal(&mut rng)).collect();
                let x = e.u.matmul(&CMat::diag_re(&dx)).matmul(&e.u.adjoint());
                let y = e.u.matmul(&CMat::diag_re(&dy)).matmul(&e.u.adjoint());
                let c = klein_check(&x, &y, pv, sid(0)).unwrap();
                // scalar oracle
                let phi = klein_phi(pv);
                let psi = klein_psi(pv);
                let lhs: f64 = dx
                    .iter()
                    .zip(dy.iter())
                    .map(|(&a, &b)| (phi(a) - phi(b)) * (phi(a) - phi(b)))
                    .sum::<f64>()
                    / 8.0;
                let rhs: f64 = dx
                    .iter()
                    .zip(dy.iter())
                    .map(|(&a, &b)| 0.5 * (a - b) * (a - b) * (psi(a) + psi(b)))
                    .sum::<f64>()
                    / 8.0;
                assert!((c.lhs - lhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
                assert!((c.rhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
                assert!(c.pass);
            }
        }
    }

    #[test]
    fn klein_random_pairs_pass() {
        let mut rng = sampling::stream(10, 0);
        for &pv in &[2.0f64, 3.0, 4.0, 6.0] {
            for _ in 0..50 {
                let x = sampling::random_self_adjoint(&mut rng, 8);
                let y = sampling::random_self_adjoint(&mut rng, 8);
                let c = klein_check(&x, &y, pv, sid(0)).unwrap();
                assert!(c.pass, "klein failed at p={pv}: {c:?}");
            }
        }
    }

    #[test]
    fn convex_chain_depolarizing_sigma_z() {
        // hand expansion at p = 4: phi(s) = s^3 on +-1 spectrum keeps sigma_z,
        // LHS = E(sigma_z) = 1; Gamma = I, psi(sigma_z) = 4 I, RHS = 4
        let m = models::depolarizing(2).unwrap();
        let z = crate::matcore::pauli::sigma_z();
        let c = convex_chain_check(&m.generator, &z, 4.0, sid(0)).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-12, "lhs {}", c.lhs);
        assert!((c.rhs - 4.0).abs() < 1e-12, "rhs {}", c.rhs);
        assert!(c.pass);
    }

    #[test]
    fn convex_chain_batch_and_gate() {
        let m = models::birth_death(4, 0.0).unwrap();
        let mut rng = sampling::stream(11, 0);
        for &pv in &[3.0f64, 4.0, 6.0] {
            for _ in 0..30 {
                let x = sampling::random_self_adjoint(&mut rng, 4);
                let c = convex_chain_check(&m.generator, &x, pv, sid(0)).unwrap();
                assert!(c.pass, "convex chain failed at p={pv}: {c:?}");
            }
        }
        // non-tau-symmetric generator rejected
        let m1 = models::birth_death(3, 1.0).unwrap();
        let x = sampling::random_self_adjoint(&mut rng, 3);
        assert!(matches!(
            convex_chain_check(&m1.generator, &x, 4.0, sid(0)),
            Err(Error::NotDetailedBalanced { .. })
        ));
    }

    #[test]
    fn concentration_inside_spectrum_trivial() {
        let m = models::birth_death(4, 1.0).unwrap();
        let f = m.observable("f").unwrap().clone();
        // t beyond the spectral radius: empty tail
        let r = concentration_certificate(&m, &f, 100.0, &[3.0]).unwrap();
        assert!(r.tail_mass.abs() < 1e-12);
        assert!(r.witness_norm <= 100.0);
        assert!(r.pass);
    }

    #[test]
    fn concentration_bound_value_at_p_star_three() {
        // alpha = 1, Lip = 1: at t = 12 e / sqrt(2), p* = 3 and bound = 2 e^{-3}
        let m = models::depolarizing(2).unwrap();
        let z = crate::matcore::pauli::sigma_z();
        let lip = lipschitz_seminorm(&m.generator, &z).unwrap();
        let t = 12.0 * libm::exp(1.0) / libm::sqrt(2.0) * lip;
        let r = concentration_certificate(&m, &z, t, &[]).unwrap();
        assert!((r.p_star - 3.0).abs() < 1e-12);
        assert!((r.subexp_bound - 2.0 * libm::exp(-3.0)).abs() < 1e-12);
    }

    #[test]
    fn concentration_fixed_point_reports_zero_tail() {
        let m = models::depolarizing(3).unwrap();
        let one = CMat::identity(3);
        let r = concentration_certificate(&m, &one, 0.5, &[]).unwrap();
        assert!(r.lip_zero && r.pass && r.tail_mass.abs() < 1e-12);
    }

    #[test]
    fn concentration_grid_on_chain() {
        let m = models::birth_death(8, 1.0).unwrap();
        let f = m.observable("f").unwrap().clone();
        let lip = lipschitz_seminorm(&m.generator, &f).unwrap();
        let alpha = m.alpha().unwrap();
        for &pstar in &[3.0f64, 4.0, 6.0, 9.0] {
            let t = 4.0 * libm::exp(1.0) * lip * pstar / libm::sqrt(2.0 * alpha);
            let r = concentration_certificate(&m, &f, t, &[3.0, 4.0, 6.0]).unwrap();
            assert!(
                r.pass,
                "tail {} vs bound {} at p*={}",
                r.tail_mass, r.subexp_bound, r.p_star
            );
            for &(pv, cheb) in &r.chebyshev {
                assert!(
                    r.tail_mass <= cheb * (1.0 + 1e-9),
                    "chebyshev p={pv} dominated: tail {} vs {}",
                    r.tail_mass,
                    cheb
                );
            }
        }
    }

    #[test]
    fn diameter_fixed_points_and_chain() {
        let m = models::birth_death(8, 0.8).unwrap();
        let r = diameter_check(&m, 25, 99).unwrap();
        assert!(
            r.log_inv_lambda_min > 3.0,
            "chain state must be spread enough"
        );
        assert!(!r.advisory);
        assert!(r.pass, "diameter bound violated: {r:?}");
        assert!(r.max_ratio <= 1.0 + 1e-9);
        // shallow state: advisory, never a failure
        let m2 = models::birth_death(2, 0.1).unwrap();
        let r2 = diameter_check(&m2, 5, 1).unwrap();
        assert!(r2.advisory && r2.pass);
    }

    #[test]
    fn talagrand_probe_values() {
        // n = 2: lower bound = 1/sqrt(4 cosh(beta/2)) by direct evaluation
        for &beta in &[0.5f64, 1.0] {
            let r = talagrand_probe(2, beta).unwrap();
            let expected = 1.0 / libm::sqrt(4.0 * libm::cosh(beta / 2.0));
            assert!((r.lower_bound - expected).abs() < 1e-12);
            assert!(r.f_lip <= 1.0 + 1e-12);
        }
        // c_min strictly increasing over the sweep at beta = 1
        let mut last = 0.0;
        for &n in &[4usize, 8, 12, 16, 20] {
            let r = talagrand_probe(n, 1.0).unwrap();
            assert!(r.c_min > last, "c_min must grow: {} after {last}", r.c_min);
            last = r.c_min;
        }
    }

    #[test]
    fn composite_gap_identical_copies() {
        let m = models::birth_death(2, 1.0).unwrap();
        let r = composite_gap_check(&m, &m).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.expected - 2.0 * libm::cosh(0.5)).abs() < 1e-9);
    }

    #[test]
    fn composite_gap_mixed_pair() {
        let dep = models::depolarizing(2).unwrap();
        let bd = models::birth_death(2, 2.0).unwrap();
        let r = composite_gap_check(&dep, &bd).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.expected - 1.0).abs() < 1e-12, "min(1, 2cosh(1)) = 1");
        assert!(r.witness_rate_dev <= 1e-8 * 2.0);
    }

    #[test]
    fn khintchine_random_tuples() {
        let mut rng = sampling::stream(12, 0);
        for &pv in &[2.0f64, 4.0, 6.0] {
            for j in 0..20 {
                let coeffs: Vec<CMat> = (0..3)
                    .map(|_| sampling::random_matrix(&mut rng, 2))
                    .collect();
                let c = khintchine_certificate(&coeffs, pv, sid(j)).unwrap();
                assert!(c.pass, "khintchine failed at p={pv}: {c:?}");
            }
        }
    }
}
