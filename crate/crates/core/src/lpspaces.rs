//! Weighted noncommutative L^p machinery: Kosaki embeddings and norms,
//! L^p Lindbladians and conditional expectations, and the two gradient
//! forms with their identification.
//!
//! The (p, eta) embedding of x against a faithful state D is
//! iota(x) = D^{eta/p} x D^{(1-eta)/p}; its norm is the plain Schatten-p
//! norm of the embedded matrix (eta = 0, 1, 1/2 are the left, right and
//! symmetric spaces). The L^p Lindbladian conjugates L by the embedding,
//! which is eta-independent exactly when L is GNS-detailed-balanced; the
//! failure of that independence is itself a diagnostic this module exposes.

use alloc::vec::Vec;

use crate::algebra::{modular_flow, ConditionalExpectation, DensityState};
use crate::error::{Error, Result};
use crate::matcore::{schatten_norm, CMat, PNorm, TraceMode, C64};
use crate::qms::{gradient_form, Generator};

/// Index (p, eta, state) of a Kosaki space.
#[derive(Clone, Debug)]
pub struct KosakiIndex<'a> {
    pub p: PNorm,
    pub eta: f64,
    pub state: &'a DensityState,
}

impl<'a> KosakiIndex<'a> {
    pub fn new(p: PNorm, eta: f64, state: &'a DensityState) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParam("Kosaki eta must lie in [0, 1]"));
        }
        Ok(KosakiIndex { p, eta, state })
    }

    pub fn symmetric(p: PNorm, state: &'a DensityState) -> Result<Self> {
        KosakiIndex::new(p, 0.5, state)
    }

    /// Density exponents (eta/p, (1-eta)/p); both zero at p = infinity.
    pub fn exponents(&self) -> (f64, f64) {
        match self.p {
            PNorm::Finite(p) => (self.eta / p, (1.0 - self.eta) / p),
            PNorm::Infinity => (0.0, 0.0),
        }
    }

    /// Same state and eta at exponent p/2 (needs p >= 2).
    pub fn half(&self) -> Result<KosakiIndex<'a>> {
        Ok(KosakiIndex {
            p: self.p.half()?,
            eta: self.eta,
            state: self.state,
        })
    }
}

/// An element of M together with the index of the space it is viewed in.
#[derive(Clone, Debug)]
pub struct KosakiVector<'a> {
    pub raw: CMat,
    pub index: KosakiIndex<'a>,
}

impl<'a> KosakiVector<'a> {
    pub fn embed(&self) -> Result<CMat> {
        kosaki_embed(&self.raw, &self.index)
    }

    pub fn norm(&self) -> Result<f64> {
        kosaki_norm(&self.raw, &self.index)
    }
}

/// iota_eta(x) = D^{eta/p} x D^{(1-eta)/p}.
pub fn kosaki_embed(x: &CMat, idx: &KosakiIndex) -> Result<CMat> {
    let (l, r) = idx.exponents();
    weight(x, idx.state, l, r)
}

/// Inverse of `kosaki_embed` on faithful states.
pub fn kosaki_unembed(a: &CMat, idx: &KosakiIndex) -> Result<CMat> {
    let (l, r) = idx.exponents();
    weight(a, idx.state, -l, -r)
}

fn weight(x: &CMat, state: &DensityState, left: f64, right: f64) -> Result<CMat> {
    if x.dim() != state.dim() {
        return Err(Error::DimMismatch {
            left: x.dim(),
            right: state.dim(),
        });
    }
    let mut out = x.clone();
    if left != 0.0 {
        out = state.power(C64::new(left, 0.0))?.matmul(&out);
    }
    if right != 0.0 {
        out = out.matmul(&state.power(C64::new(right, 0.0))?);
    }
    Ok(out)
}

/// Kosaki norm: Schatten-p norm (unnormalized trace) of the embedded
/// matrix; at p = infinity this is the operator norm of x itself.
pub fn kosaki_norm(x: &CMat, idx: &KosakiIndex) -> Result<f64> {
    let embedded = kosaki_embed(x, idx)?;
    schatten_norm(&embedded, idx.p, TraceMode::Unnormalized)
}

/// L^p Lindbladian on embedded elements:
/// a = D^{eta/p} x D^{(1-eta)/p} maps to D^{eta/p} L(x) D^{(1-eta)/p}.
///
/// The result is eta-independent precisely when L is GNS-detailed-balanced
/// w.r.t. the index state; see `lp_lindbladian_eta_residual`.
pub fn lp_lindbladian(gen: &Generator, a: &CMat, idx: &KosakiIndex) -> Result<CMat> {
    let x = kosaki_unembed(a, idx)?;
    kosaki_embed(&gen.apply(&x), idx)
}

/// Largest pairwise deviation of the L^p Lindbladian across eta values,
/// applied to the same element a of L^p.
pub fn lp_lindbladian_eta_residual(
    gen: &Generator,
    a: &CMat,
    p: PNorm,
    state: &DensityState,
    etas: &[f64],
) -> Result<f64> {
    let mut results: Vec<CMat> = Vec::with_capacity(etas.len());
    for &eta in etas {
        let idx = KosakiIndex::new(p, eta, state)?;
        results.push(lp_lindbladian(gen, a, &idx)?);
    }
    let mut worst = 0.0f64;
    for i in 0..results.len() {
        for j in (i + 1)..results.len() {
            let scale = 1.0 + results[i].frobenius();
            worst = worst.max(results[i].dist(&results[j]) / scale);
        }
    }
    Ok(worst)
}

/// Modular-invariance tolerance for the range of an expectation used in L^p.
const RANGE_INVARIANCE_TOL: f64 = 1e-8;

/// L^p conditional expectation on embedded elements:
/// E_p(D^{eta/p} x D^{(1-eta)/p}) = D^{eta/p} E(x) D^{(1-eta)/p}.
///
/// (The weights are those of the full state: this is the image of the
/// restricted-density formula under the canonical isometry of L^p(N) into
/// L^p(M), and the only choice that fixes embedded range elements.)
/// Requires the range of E to be invariant under the modular flow.
pub fn lp_conditional(a: &CMat, idx: &KosakiIndex, e: &ConditionalExpectation) -> Result<CMat> {
    for b in e.range().orthonormal_basis() {
        let fb = modular_flow(idx.state, b, C64::new(0.7, 0.0))?;
        let residual = fb.sub(&e.range().project(&fb)?).frobenius();
        if residual > RANGE_INVARIANCE_TOL {
            return Err(Error::NonInvariantRange { residual });
        }
    }
    let x = kosaki_unembed(a, idx)?;
    kosaki_embed(&e.apply(&x), idx)
}

/// Gradient form on Haagerup elements:
/// Gamma_p(a, b) = (L_p(a^dag) b + a^dag L_p(b) - L_{p/2}(a^dag b)) / 2.
/// Needs p >= 2 so that a^dag b lives in a genuine L^{p/2}.
pub fn gamma_p(gen: &Generator, a: &CMat, b: &CMat, idx: &KosakiIndex) -> Result<CMat> {
    let half = idx.half()?;
    let ad = a.adjoint();
    let t1 = lp_lindbladian(gen, &ad, idx)?.matmul(b);
    let t2 = ad.matmul(&lp_lindbladian(gen, b, idx)?);
    let t3 = lp_lindbladian(gen, &ad.matmul(b), &half)?;
    Ok(t1.add(&t2).sub(&t3).scale_re(0.5))
}

/// Kosaki-side gradient form at complex modular time:
/// Gamma^(p)_eta(x, y) = Gamma(sigma_{-i eta/p}(x), sigma_{-i eta/p}(y)).
pub fn gamma_eta_p(gen: &Generator, x: &CMat, y: &CMat, idx: &KosakiIndex) -> Result<CMat> {
    let (l, _) = idx.exponents();
    let t = C64::new(0.0, -l);
    let fx = modular_flow(idx.state, x, t)?;
    let fy = modular_flow(idx.state, y, t)?;
    Ok(gradient_form(gen, &fx, &fy))
}

/// Frobenius residual of the gradient-form identification
/// Gamma_p(iota(x), iota(y)) = D^{1/p} Gamma^(p)_eta(x, y) D^{1/p}.
pub fn check_gf_identification(
    gen: &Generator,
    x: &CMat,
    y: &CMat,
    idx: &KosakiIndex,
) -> Result<f64> {
    let a = kosaki_embed(x, idx)?;
    let b = kosaki_embed(y, idx)?;
    let lhs = gamma_p(gen, &a, &b, idx)?;
    let inner = gamma_eta_p(gen, x, y, idx)?;
    let inv_p = match idx.p {
        PNorm::Finite(p) => 1.0 / p,
        PNorm::Infinity => 0.0,
    };
    let dp = idx.state.power(C64::new(inv_p, 0.0))?;
    let rhs = dp.matmul(&inner).matmul(&dp);
    let scale = 1.0 + rhs.frobenius();
    Ok(lhs.dist(&rhs) / scale)
}

/// Lipschitz seminorm induced by the gradient form:
/// ||x||_Lip = max(||Gamma(x,x)||^1/2, ||Gamma(x*,x*)||^1/2), operator norms.
pub fn lipschitz_seminorm(gen: &Generator, x: &CMat) -> Result<f64> {
    let g1 = gradient_form(gen, x, x);
    let xa = x.adjoint();
    let g2 = gradient_form(gen, &xa, &xa);
    let n1 = schatten_norm(&g1, PNorm::Infinity, TraceMode::Unnormalized)?;
    let n2 = schatten_norm(&g2, PNorm::Infinity, TraceMode::Unnormalized)?;
    Ok(libm::sqrt(n1.max(n2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::pauli;
    use crate::models;
    use crate::qms::check_gns_db;
    use crate::sampling;

    fn p(v: f64) -> PNorm {
        PNorm::finite(v).unwrap()
    }

    #[test]
    fn embed_tracial_is_scalar_weight() {
        let state = DensityState::tracial(3);
        let mut rng = sampling::stream(1, 0);
        let x = sampling::random_matrix(&mut rng, 3);
        for pv in [1.0, 2.0, 4.0] {
            let idx = KosakiIndex::new(p(pv), 0.3, &state).unwrap();
            let a = kosaki_embed(&x, &idx).unwrap();
            let expected = x.scale_re(libm::pow(3.0, -1.0 / pv));
            assert!(a.dist(&expected) < 1e-12 * (1.0 + x.frobenius()));
        }
    }

    #[test]
    fn embed_eta0_pinf_is_identity() {
        let state = models::seeded_state(3, 2).unwrap();
        let mut rng = sampling::stream(2, 0);
        let x = sampling::random_matrix(&mut rng, 3);
        let idx = KosakiIndex::new(PNorm::Infinity, 0.0, &state).unwrap();
        assert!(kosaki_embed(&x, &idx).unwrap().dist(&x) < 1e-13);
    }

    #[test]
    fn embed_oracle_2x2() {
        // D = diag(3/4, 1/4), eta = 1/2, p = 2: off-diagonal entries are
        // (3/4)^(1/4) (1/4)^(1/4) = (3/16)^(1/4), by direct scalar product
        let state = DensityState::from_weights(&[0.75, 0.25]).unwrap();
        let idx = KosakiIndex::new(p(2.0), 0.5, &state).unwrap();
        let a = kosaki_embed(&pauli::sigma_x(), &idx).unwrap();
        let v = libm::pow(3.0 / 16.0, 0.25);
        assert!((a[(0, 1)].re - v).abs() < 1e-13);
        assert!((a[(1, 0)].re - v).abs() < 1e-13);
        assert!(a[(0, 0)].norm() < 1e-14 && a[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn norm_of_identity_is_one() {
        let state = models::seeded_state(4, 3).unwrap();
        for pv in [1.0, 2.0, 3.0, 6.0] {
            for &eta in &[0.0, 0.5, 1.0] {
                let idx = KosakiIndex::new(p(pv), eta, &state).unwrap();
                let n = kosaki_norm(&CMat::identity(4), &idx).unwrap();
                assert!((n - 1.0).abs() < 1e-12, "p={pv}, eta={eta}: {n}");
            }
        }
    }

    #[test]
    fn norm_eta_independent_for_commuting() {
        // diagonal x with diagonal D: left/right/symmetric norms coincide
        let state = DensityState::from_weights(&[0.5, 0.3, 0.2]).unwrap();
        let x = CMat::diag_re(&[1.0, -2.0, 0.7]);
        for pv in [1.5, 2.0, 4.0] {
            let norms: Vec<f64> = [0.0, 0.5, 1.0]
                .iter()
                .map(|&eta| {
                    kosaki_norm(&x, &KosakiIndex::new(p(pv), eta, &state).unwrap()).unwrap()
                })
                .collect();
            assert!((norms[0] - norms[1]).abs() < 1e-10 * (1.0 + norms[0]));
            assert!((norms[0] - norms[2]).abs() < 1e-10 * (1.0 + norms[0]));
        }
    }

    #[test]
    fn symmetric_two_norm_squared_is_kms() {
        let state = models::seeded_state(3, 5).unwrap();
        let mut rng = sampling::stream(5, 1);
        let x = sampling::random_matrix(&mut rng, 3);
        let idx = KosakiIndex::symmetric(p(2.0), &state).unwrap();
        let n = kosaki_norm(&x, &idx).unwrap();
        let kms = crate::matcore::inner_product(&x, &x, &state.kms_form())
            .unwrap()
            .re;
        assert!((n * n - kms).abs() < 1e-11 * (1.0 + kms));
    }

    #[test]
    fn trace_pairing_is_cyclic() {
        let mut rng = sampling::stream(7, 2);
        let a = sampling::random_matrix(&mut rng, 4);
        let b = sampling::random_matrix(&mut rng, 4);
        let lhs = a.matmul(&b).trace();
        let rhs = b.matmul(&a).trace();
        assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn weighted_hoelder_on_embedded_elements() {
        let state = models::seeded_state(4, 11).unwrap();
        let mut rng = sampling::stream(11, 3);
        for &(pv, sv) in &[(2.0, 2.0), (3.0, 6.0), (4.0, 4.0)] {
            let rv = 1.0 / (1.0 / pv + 1.0 / sv);
            for _ in 0..10 {
                let a = kosaki_embed(
                    &sampling::random_matrix(&mut rng, 4),
                    &KosakiIndex::new(p(pv), 0.5, &state).unwrap(),
                )
                .unwrap();
                let b = kosaki_embed(
                    &sampling::random_matrix(&mut rng, 4),
                    &KosakiIndex::new(p(sv), 0.5, &state).unwrap(),
                )
                .unwrap();
                let lhs = schatten_norm(&a.matmul(&b), p(rv), TraceMode::Unnormalized).unwrap();
                let rhs = schatten_norm(&a, p(pv), TraceMode::Unnormalized).unwrap()
                    * schatten_norm(&b, p(sv), TraceMode::Unnormalized).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn lp_lindbladian_kills_embedded_fixed_points() {
        let m = models::birth_death(3, 1.0).unwrap();
        let idx = KosakiIndex::new(p(4.0), 0.5, &m.state).unwrap();
        let a = kosaki_embed(&CMat::identity(3), &idx).unwrap();
        let la = lp_lindbladian(&m.generator, &a, &idx).unwrap();
        assert!(la.frobenius() < 1e-12);
    }

    #[test]
    fn lp_lindbladian_tracial_collapse() {
        let m = models::depolarizing(3).unwrap();
        let idx = KosakiIndex::new(p(2.0), 0.25, &m.state).unwrap();
        let mut rng = sampling::stream(13, 1);
        let a = sampling::random_matrix(&mut rng, 3);
        let la = lp_lindbladian(&m.generator, &a, &idx).unwrap();
        assert!(la.dist(&m.generator.apply(&a)) < 1e-11 * (1.0 + a.frobenius()));
    }

    #[test]
    fn eta_independence_iff_gns_db() {
        let etas = [0.0, 0.5, 1.0];
        let mut rng = sampling::stream(17, 4);
        // GNS-DB model: residual at machine precision
        let m = models::birth_death(3, 1.0).unwrap();
        assert!(check_gns_db(&m.generator, &m.state).unwrap() < 1e-10);
        for _ in 0..5 {
            let a = sampling::random_matrix(&mut rng, 3);
            let r = lp_lindbladian_eta_residual(&m.generator, &a, p(4.0), &m.state, &etas).unwrap();
            assert!(r < 1e-9, "GNS-DB model must be eta-independent: {r}");
        }
        // KMS-only counterexample: genuinely eta-dependent
        let cm = models::kms_only(3, 1).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let a = sampling::random_matrix(&mut rng, 3);
            let r =
                lp_lindbladian_eta_residual(&cm.generator, &a, p(4.0), &cm.state, &etas).unwrap();
            worst = worst.max(r);
        }
        assert!(
            worst > 1e-4,
            "KMS-only model must show eta dependence: {worst}"
        );
    }

    #[test]
    fn lp_conditional_fixes_embedded_range_and_contracts() {
        let m = models::birth_death(4, 0.7).unwrap();
        let e = m.expectation().unwrap();
        let idx = KosakiIndex::new(p(3.0), 0.5, &m.state).unwrap();
        // embedded range element: iota(y) for y in the fixed-point algebra
        let y = CMat::identity(4).scale_re(0.6);
        let a = kosaki_embed(&y, &idx).unwrap();
        let ea = lp_conditional(&a, &idx, e).unwrap();
        assert!(ea.dist(&a) < 1e-11 * (1.0 + a.frobenius()));
        // contractivity on random elements
        let mut rng = sampling::stream(19, 5);
        for _ in 0..50 {
            let x = sampling::random_matrix(&mut rng, 4);
            let a = kosaki_embed(&x, &idx).unwrap();
            let ea = lp_conditional(&a, &idx, e).unwrap();
            let na = schatten_norm(&a, idx.p, TraceMode::Unnormalized).unwrap();
            let nea = schatten_norm(&ea, idx.p, TraceMode::Unnormalized).unwrap();
            assert!(
                nea <= na * (1.0 + 1e-10),
                "contractivity violated: {nea} > {na}"
            );
        }
    }

    #[test]
    fn lp_conditional_rejects_non_invariant_range() {
        // span{I, sigma_x} is not invariant under the modular flow of a
        // nondegenerate diagonal state
        let state = DensityState::from_weights(&[0.7, 0.3]).unwrap();
        let gens = alloc::vec![CMat::identity(2), crate::matcore::pauli::sigma_x()];
        let range = crate::algebra::SubalgebraBasis::from_span(gens, state.gns_form()).unwrap();
        let mut proj = CMat::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                let col = range.project(&CMat::unit(2, i, j)).unwrap();
                for r in 0..4 {
                    proj[(r, i * 2 + j)] = col.data()[r];
                }
            }
        }
        let e = crate::algebra::ConditionalExpectation::from_parts(proj, range, state.clone());
        let idx = KosakiIndex::new(p(3.0), 0.5, &state).unwrap();
        let a = CMat::identity(2);
        assert!(matches!(
            lp_conditional(&a, &idx, &e),
            Err(Error::NonInvariantRange { .. })
        ));
    }

    #[test]
    fn lp_conditional_kills_rademacher_degree_one() {
        let mut rng = sampling::stream(23, 6);
        let coeffs: Vec<CMat> = (0..2)
            .map(|_| sampling::random_matrix(&mut rng, 2))
            .collect();
        let m = models::rademacher(2, 2, &coeffs).unwrap();
        let idx = KosakiIndex::new(p(4.0), 0.5, &m.state).unwrap();
        let x = m.observable("degree_one").unwrap();
        let a = kosaki_embed(x, &idx).unwrap();
        let ea = lp_conditional(&a, &idx, m.expectation().unwrap()).unwrap();
        assert!(ea.frobenius() < 1e-11 * (1.0 + a.frobenius()));
    }

    #[test]
    fn gamma_p_fixed_point_and_tracial_collapse() {
        let m = models::birth_death(3, 0.5).unwrap();
        let idx = KosakiIndex::new(p(4.0), 0.5, &m.state).unwrap();
        let a = kosaki_embed(&CMat::identity(3), &idx).unwrap();
        let g = gamma_p(&m.generator, &a, &a, &idx).unwrap();
        assert!(g.frobenius() < 1e-12);

        // tracial state: Gamma_p(iota x, iota x) = d^{-2/p} Gamma(x, x)
        let dep = models::depolarizing(3).unwrap();
        let idx = KosakiIndex::new(p(4.0), 0.5, &dep.state).unwrap();
        let mut rng = sampling::stream(29, 7);
        let x = sampling::random_matrix(&mut rng, 3);
        let a = kosaki_embed(&x, &idx).unwrap();
        let lhs = gamma_p(&dep.generator, &a, &a, &idx).unwrap();
        let rhs = gradient_form(&dep.generator, &x, &x).scale_re(libm::pow(3.0, -0.5));
        assert!(lhs.dist(&rhs) < 1e-10 * (1.0 + rhs.frobenius()));
        // p < 2 rejected
        let bad = KosakiIndex::new(p(1.5), 0.5, &dep.state).unwrap();
        assert!(matches!(
            gamma_p(&dep.generator, &a, &a, &bad),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn gamma_eta_p_trivial_cases_and_hermiticity() {
        let m = models::birth_death(3, 1.0).unwrap();
        let mut rng = sampling::stream(31, 8);
        let x = sampling::random_self_adjoint(&mut rng, 3);
        // eta = 0 reduces to Gamma
        let idx0 = KosakiIndex::new(p(4.0), 0.0, &m.state).unwrap();
        let g0 = gamma_eta_p(&m.generator, &x, &x, &idx0).unwrap();
        assert!(g0.dist(&gradient_form(&m.generator, &x, &x)) < 1e-12);
        // tracial state reduces to Gamma for any eta
        let dep = models::depolarizing(3).unwrap();
        let idxt = KosakiIndex::new(p(4.0), 0.5, &dep.state).unwrap();
        let gt = gamma_eta_p(&dep.generator, &x, &x, &idxt).unwrap();
        assert!(gt.dist(&gradient_form(&dep.generator, &x, &x)) < 1e-11);
        // hermiticity for self-adjoint arguments
        let idx = KosakiIndex::new(p(4.0), 0.5, &m.state).unwrap();
        let g = gamma_eta_p(&m.generator, &x, &x, &idx).unwrap();
        assert!(g.hermitian_residual() < 1e-10 * (1.0 + g.frobenius()));
    }

    #[test]
    fn gf_identification_holds_for_gns_db() {
        let m = models::birth_death(3, 1.0).unwrap();
        let mut rng = sampling::stream(37, 9);
        for &eta in &[0.0, 0.5, 1.0] {
            let idx = KosakiIndex::new(p(4.0), eta, &m.state).unwrap();
            for _ in 0..5 {
                let x = sampling::random_matrix(&mut rng, 3);
                let y = sampling::random_matrix(&mut rng, 3);
                let r = check_gf_identification(&m.generator, &x, &y, &idx).unwrap();
                assert!(r < 1e-9, "identification residual {r} at eta={eta}");
            }
        }
    }

    #[test]
    fn gf_identification_fails_for_kms_only() {
        let cm = models::kms_only(3, 1).unwrap();
        let mut rng = sampling::stream(41, 10);
        let mut worst = 0.0f64;
        for &eta in &[0.0, 1.0] {
            let idx = KosakiIndex::new(p(4.0), eta, &cm.state).unwrap();
            for _ in 0..5 {
                let x = sampling::random_matrix(&mut rng, 3);
                let y = sampling::random_matrix(&mut rng, 3);
                worst = worst.max(check_gf_identification(&cm.generator, &x, &y, &idx).unwrap());
            }
        }
        assert!(worst > 1e-4, "KMS-only identification residual {worst}");
    }

    #[test]
    fn lipschitz_seminorm_closed_forms() {
        // fixed points have zero seminorm
        let m = models::birth_death(4, 1.0).unwrap();
        assert!(lipschitz_seminorm(&m.generator, &CMat::identity(4)).unwrap() < 1e-7);
        // chain test function: interior sites carry Gamma weight exactly 1/n,
        // so ||f||_Lip = 1/sqrt(n) once n >= 3; n = 2 has only endpoints
        for &(n, beta) in &[(2usize, 0.5f64), (4, 1.0), (8, 1.0)] {
            let m = models::birth_death(n, beta).unwrap();
            let f = m.observable("f").unwrap();
            let lip = lipschitz_seminorm(&m.generator, f).unwrap();
            assert!(lip <= 1.0 + 1e-12, "||f||_Lip = {lip} must stay under 1");
            let expected = if n >= 3 {
                1.0 / libm::sqrt(n as f64)
            } else {
                libm::sqrt(libm::exp(beta / 2.0) / (4.0 * libm::cosh(beta / 2.0)))
            };
            assert!((lip - expected).abs() < 1e-10, "n={n}: {lip} vs {expected}");
        }
        // rademacher degree one: max(||sum x_i^dag x_i||^1/2, ||sum x_i x_i^dag||^1/2)
        let mut rng = sampling::stream(43, 11);
        let coeffs: Vec<CMat> = (0..2)
            .map(|_| sampling::random_matrix(&mut rng, 2))
            .collect();
        let m = models::rademacher(2, 2, &coeffs).unwrap();
        let x = m.observable("degree_one").unwrap();
        let lip = lipschitz_seminorm(&m.generator, x).unwrap();
        let mut s1 = CMat::zeros(2);
        let mut s2 = CMat::zeros(2);
        for xi in &coeffs {
            s1 = s1.add(&xi.adjoint().matmul(xi));
            s2 = s2.add(&xi.matmul(&xi.adjoint()));
        }
        let n1 = schatten_norm(&s1, PNorm::Infinity, TraceMode::Unnormalized).unwrap();
        let n2 = schatten_norm(&s2, PNorm::Infinity, TraceMode::Unnormalized).unwrap();
        assert!((lip - libm::sqrt(n1.max(n2))).abs() < 1e-10 * (1.0 + lip));
    }

    #[test]
    fn lipschitz_modular_invariance_for_gns_db() {
        let m = models::birth_death(4, 1.0).unwrap();
        let mut rng = sampling::stream(47, 12);
        let x = sampling::random_matrix(&mut rng, 4);
        let lip = lipschitz_seminorm(&m.generator, &x).unwrap();
        for &t in &[0.4f64, -1.1] {
            let fx = modular_flow(&m.state, &x, C64::new(t, 0.0)).unwrap();
            let flip = lipschitz_seminorm(&m.generator, &fx).unwrap();
            assert!((lip - flip).abs() < 1e-9 * (1.0 + lip));
        }
    }
}
