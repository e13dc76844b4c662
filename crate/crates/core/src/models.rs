//! Canonical model constructors: birth-death chains with thermal states,
//! the Rademacher semicommutative model, the depolarizing semigroup,
//! seeded random GNS-detailed-balanced generators, and a KMS-but-not-GNS
//! counterexample for the negative tests.
//!
//! A realized `Model` bundles the generator with its reference state, the
//! fixed-point conditional expectation and the gap report, all derived from
//! one symmetrized frame decomposition so the triple is consistent by
//! construction.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::algebra::{ConditionalExpectation, DensityState};
use crate::error::{Error, Result};
use crate::matcore::{CMat, C64};
use crate::qms::frame::SymmetrizedSpectrum;
use crate::qms::{gap_report_from, gksl_generator, GapReport, Generator, JumpTerm, SymmetryTag};
use crate::sampling;

/// Rademacher size budget: 2^n * d must stay under this.
pub const RADEMACHER_BUDGET: usize = 128;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    BirthDeath {
        n: usize,
        beta: f64,
    },
    Rademacher {
        n: usize,
        d: usize,
    },
    Depolarizing {
        d: usize,
    },
    RandomGnsDb {
        dim: usize,
        k_jumps: usize,
        seed: u64,
    },
    KmsOnly {
        dim: usize,
        seed: u64,
    },
    Custom {
        dim: usize,
    },
}

/// A model with its realization. Detailed-balanced models carry the
/// fixed-point expectation and gap; the KMS-only counterexample does not
/// (its frame matrix is genuinely asymmetric).
#[derive(Clone, Debug)]
pub struct Model {
    pub kind: ModelKind,
    pub name: String,
    pub generator: Generator,
    pub state: DensityState,
    /// Named observables the model exposes (test functions from the
    /// construction, e.g. the Lipschitz chain function or the degree-one
    /// Rademacher element).
    pub observables: Vec<(String, CMat)>,
    /// Resampled draws before the jump graph came out connected.
    pub resamples: usize,
    expectation: Option<ConditionalExpectation>,
    gap: Option<GapReport>,
}

impl Model {
    /// Realize a detailed-balanced model: one frame decomposition yields
    /// both the gap report and the fixed-point expectation.
    fn realize(
        kind: ModelKind,
        name: String,
        generator: Generator,
        state: DensityState,
        observables: Vec<(String, CMat)>,
        resamples: usize,
    ) -> Result<Model> {
        let spectrum = SymmetrizedSpectrum::new(&generator, &state)?;
        let gap = gap_report_from(&spectrum);
        let expectation = spectrum.fixed_point_projection()?;
        Ok(Model {
            kind,
            name,
            generator,
            state,
            observables,
            resamples,
            expectation: Some(expectation),
            gap: Some(gap),
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn expectation(&self) -> Result<&ConditionalExpectation> {
        self.expectation
            .as_ref()
            .ok_or(Error::NotDetailedBalanced { residual: f64::NAN })
    }

    pub fn gap(&self) -> Result<&GapReport> {
        self.gap
            .as_ref()
            .ok_or(Error::NotDetailedBalanced { residual: f64::NAN })
    }

    pub fn alpha(&self) -> Result<f64> {
        Ok(self.gap()?.alpha)
    }

    pub fn observable(&self, name: &str) -> Option<&CMat> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }

    /// x - E(x).
    pub fn center(&self, x: &CMat) -> Result<CMat> {
        Ok(x.sub(&self.expectation()?.apply(x)))
    }
}

/// Wrap an externally supplied generator/state pair. Generators whose tag
/// declares trace or GNS detailed balance are realized (gap + fixed-point
/// expectation); KMS-only or untagged generators stay unrealized and their
/// gap accessors report the missing detailed balance.
pub fn custom(name: String, generator: Generator, state: DensityState) -> Result<Model> {
    let kind = ModelKind::Custom {
        dim: generator.dim(),
    };
    match generator.tag() {
        SymmetryTag::TauSymmetric | SymmetryTag::GnsDb(_) => {
            Model::realize(kind, name, generator, state, Vec::new(), 0)
        }
        _ => Ok(Model {
            kind,
            name,
            generator,
            state,
            observables: Vec::new(),
            resamples: 0,
            expectation: None,
            gap: None,
        }),
    }
}

/// Jump list of the n-site birth-death chain:
/// (e_{j,j+1}, e^{beta/2}) and (e_{j+1,j}, e^{-beta/2}) for each edge.
pub fn birth_death_jumps(n: usize, beta: f64) -> Result<Vec<JumpTerm>> {
    if n < 2 {
        return Err(Error::InvalidParam("birth-death chain needs n >= 2"));
    }
    let mut jumps = Vec::with_capacity(2 * (n - 1));
    for j in 0..n - 1 {
        jumps.push(JumpTerm::new(
            CMat::unit(n, j, j + 1),
            libm::exp(beta / 2.0),
        )?);
        jumps.push(JumpTerm::new(
            CMat::unit(n, j + 1, j),
            libm::exp(-beta / 2.0),
        )?);
    }
    Ok(jumps)
}

/// Generator and thermal state of the birth-death chain, without the
/// (more expensive) spectral realization.
pub fn birth_death_parts(n: usize, beta: f64) -> Result<(Generator, DensityState)> {
    let state = DensityState::thermal(n, beta)?;
    let mut tag = SymmetryTag::GnsDb(state.clone());
    if beta == 0.0 {
        tag = SymmetryTag::TauSymmetric;
    }
    let gen = gksl_generator(birth_death_jumps(n, beta)?, n)?.with_tag(tag);
    Ok((gen, state))
}

/// The chain test function f = sum_j j |j><j| / sqrt(2 n cosh(beta/2)),
/// which has Lipschitz seminorm at most one.
pub fn birth_death_f(n: usize, beta: f64) -> CMat {
    let scale = 1.0 / libm::sqrt(2.0 * n as f64 * libm::cosh(beta / 2.0));
    let entries: Vec<f64> = (1..=n).map(|j| j as f64 * scale).collect();
    CMat::diag_re(&entries)
}

/// Birth-death chain model with thermal reference state.
pub fn birth_death(n: usize, beta: f64) -> Result<Model> {
    let (gen, state) = birth_death_parts(n, beta)?;
    let observables = alloc::vec![(String::from("f"), birth_death_f(n, beta))];
    Model::realize(
        ModelKind::BirthDeath { n, beta },
        format!("birth_death(n={n},beta={beta})"),
        gen,
        state,
        observables,
        0,
    )
}

/// Classical (diagonal-sector) gap of the birth-death chain: the smallest
/// nonzero eigenvalue of the generator restricted to diagonal matrices,
/// symmetrized in the mu-weighted inner product.
pub fn birth_death_diagonal_gap(n: usize, beta: f64) -> Result<f64> {
    let (gen, state) = birth_death_parts(n, beta)?;
    // rate matrix on diagonal units, symmetrized by sqrt(mu) scaling
    let mu: Vec<f64> = (0..n).map(|k| state.matrix()[(k, k)].re).collect();
    let mut m = CMat::zeros(n);
    for j in 0..n {
        let lj = gen.apply(&CMat::unit(n, j, j));
        for i in 0..n {
            m[(i, j)] = lj[(i, i)] * libm::sqrt(mu[i] / mu[j]);
        }
    }
    let h = crate::matcore::HermitianMatrix::new(m)?;
    let eig = crate::matcore::herm_eig(&h)?;
    let max = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, &l| a.max(libm::fabs(l)));
    let cutoff = crate::algebra::KERNEL_CUTOFF_REL * max;
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .filter(|&l| libm::fabs(l) > cutoff)
        .fold(f64::INFINITY, f64::min))
}

/// Pauli X on tensor factor i of (C^2)^(x)n, tensored with I_d.
fn rademacher_flip(n: usize, d: usize, i: usize) -> CMat {
    let mut op = CMat::identity(1);
    for k in 0..n {
        let factor = if k == i {
            crate::matcore::pauli::sigma_x()
        } else {
            CMat::identity(2)
        };
        op = op.kron(&factor);
    }
    op.kron(&CMat::identity(d))
}

/// Rademacher coordinate epsilon_i as a diagonal matrix (Pauli Z on factor i).
fn rademacher_sign(n: usize, d: usize, i: usize) -> CMat {
    let mut op = CMat::identity(1);
    for k in 0..n {
        let factor = if k == i {
            crate::matcore::pauli::sigma_z()
        } else {
            CMat::identity(2)
        };
        op = op.kron(&factor);
    }
    op.kron(&CMat::identity(d))
}

/// Degree-one element sum_i eps_i (x) x_i on the 2^n d-dimensional carrier.
pub fn rademacher_degree_one(n: usize, d: usize, coefficients: &[CMat]) -> Result<CMat> {
    if coefficients.len() != n {
        return Err(Error::InvalidParam(
            "need one coefficient per Rademacher coordinate",
        ));
    }
    let dim = (1usize << n) * d;
    let mut x = CMat::zeros(dim);
    for (i, xi) in coefficients.iter().enumerate() {
        if xi.dim() != d {
            return Err(Error::DimMismatch {
                left: xi.dim(),
                right: d,
            });
        }
        let sign = rademacher_sign(n, d, i);
        let block = CMat::identity(1 << n).kron(xi);
        x = x.add(&sign.matmul(&block));
    }
    Ok(x)
}

/// Rademacher model: n classical +-1 coordinates tensored with M_d,
/// L = sum_i (Id - E_i) where E_i averages out coordinate i.
///
/// Realized densely on M_{2^n d} with jump operators (X_i (x) I_d, 1/4):
/// E_i(x) = (x + X_i x X_i)/2 restricts to the coordinate average on the
/// function algebra, the gap is exactly 1, and the degree-one gradient
/// identity Gamma_i(x,x) = x_i^* x_i holds verbatim.
pub fn rademacher(n: usize, d: usize, coefficients: &[CMat]) -> Result<Model> {
    if n < 1 || d < 1 {
        return Err(Error::InvalidParam("rademacher model needs n >= 1, d >= 1"));
    }
    let carrier = (1usize << n) * d;
    if carrier > RADEMACHER_BUDGET {
        return Err(Error::BudgetExceeded {
            requested: carrier,
            budget: RADEMACHER_BUDGET,
        });
    }
    let mut jumps = Vec::with_capacity(n);
    for i in 0..n {
        jumps.push(JumpTerm::new(rademacher_flip(n, d, i), 0.25)?);
    }
    let gen = gksl_generator(jumps, carrier)?.with_tag(SymmetryTag::TauSymmetric);
    let state = DensityState::tracial(carrier);
    let degree_one = rademacher_degree_one(n, d, coefficients)?;
    let observables = alloc::vec![(String::from("degree_one"), degree_one)];
    Model::realize(
        ModelKind::Rademacher { n, d },
        format!("rademacher(n={n},d={d})"),
        gen,
        state,
        observables,
        0,
    )
}

/// Depolarizing semigroup L = Id - tau(.) I, in jump form: all matrix units
/// at weight 1/(2d).
pub fn depolarizing(d: usize) -> Result<Model> {
    if d < 2 {
        return Err(Error::InvalidParam("depolarizing model needs d >= 2"));
    }
    let mut jumps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            jumps.push(JumpTerm::new(CMat::unit(d, i, j), 1.0 / (2.0 * d as f64))?);
        }
    }
    let gen = gksl_generator(jumps, d)?.with_tag(SymmetryTag::TauSymmetric);
    let state = DensityState::tracial(d);
    Model::realize(
        ModelKind::Depolarizing { d },
        format!("depolarizing(d={d})"),
        gen,
        state,
        Vec::new(),
        0,
    )
}

fn connected(dim: usize, edges: &[(usize, usize)]) -> bool {
    let mut root: Vec<usize> = (0..dim).collect();
    fn find(root: &mut [usize], mut a: usize) -> usize {
        while root[a] != a {
            root[a] = root[root[a]];
            a = root[a];
        }
        a
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut root, a), find(&mut root, b));
        root[ra] = rb;
    }
    let r0 = find(&mut root, 0);
    (1..dim).all(|i| find(&mut root, i) == r0)
}

/// Random GNS-detailed-balanced generator: k jump pairs built from matrix
/// units in the eigenbasis of D (each a modular eigenvector), with weights
/// paired as (w e^{omega/2}, w e^{-omega/2}), omega = log(lambda_i/lambda_j).
/// Disconnected jump graphs are resampled so the kernel stays trivial.
pub fn random_gns_db(state: &DensityState, k_jumps: usize, seed: u64) -> Result<Model> {
    let d = state.dim();
    let max_pairs = d * (d - 1) / 2;
    if k_jumps > max_pairs {
        return Err(Error::InvalidParam(
            "more jump pairs requested than matrix units available",
        ));
    }
    let u = &state.eig().u;
    let lam = &state.eig().eigenvalues;
    let mut rng = sampling::stream(seed, 0x6d6f64);

    let mut resamples = 0usize;
    let edges: Vec<(usize, usize)> = loop {
        // draw k distinct unordered pairs
        let mut pool: Vec<(usize, usize)> = (0..d)
            .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
            .collect();
        let mut chosen = Vec::with_capacity(k_jumps);
        for _ in 0..k_jumps {
            let idx = rng.gen_range(0..pool.len());
            chosen.push(pool.swap_remove(idx));
        }
        if k_jumps == 0 || connected(d, &chosen) {
            break chosen;
        }
        resamples += 1;
        if resamples > 64 {
            return Err(Error::InvalidParam(
                "jump graph failed to connect after 64 resamples",
            ));
        }
    };

    let mut jumps = Vec::with_capacity(2 * k_jumps);
    for &(i, j) in &edges {
        // c = u_i u_j^dag satisfies D c D^{-1} = (lambda_i/lambda_j) c
        let mut c = CMat::zeros(d);
        for a in 0..d {
            for b in 0..d {
                c[(a, b)] = u[(a, i)] * u[(b, j)].conj();
            }
        }
        let omega = libm::log(lam[i] / lam[j]);
        let w: f64 = rng.gen_range(0.5..1.5);
        jumps.push(JumpTerm::new(c.clone(), w * libm::exp(omega / 2.0))?);
        jumps.push(JumpTerm::new(c.adjoint(), w * libm::exp(-omega / 2.0))?);
    }
    let gen = gksl_generator(jumps, d)?.with_tag(SymmetryTag::GnsDb(state.clone()));
    Model::realize(
        ModelKind::RandomGnsDb {
            dim: d,
            k_jumps,
            seed,
        },
        format!("random_gns_db(d={d},k={k_jumps},seed={seed})"),
        gen,
        state.clone(),
        Vec::new(),
        resamples,
    )
}

/// Seeded faithful state with well-spread diagonal spectrum, the default
/// reference for `random_gns_db`.
pub fn seeded_state(dim: usize, seed: u64) -> Result<DensityState> {
    let mut rng = sampling::stream(seed, 0x7374);
    let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.2..1.0)).collect();
    DensityState::from_weights(&weights)
}

/// KMS-detailed-balanced generator that is NOT GNS-detailed-balanced.
///
/// Jump operators are density-twisted Hermitian, D^{-1/2} c D^{1/2} = c^dag
/// with c^dag c commuting with D, which makes the GKSL generator exactly
/// KMS-symmetric. The jumps mix modular weights (they are not modular
/// eigenvectors), so commutation with sigma_t fails and GNS detailed
/// balance does not hold.
pub fn kms_only(dim: usize, seed: u64) -> Result<Model> {
    if dim < 2 {
        return Err(Error::InvalidParam(
            "the KMS-only counterexample needs dim >= 2",
        ));
    }
    let state = seeded_state(dim, seed)?;
    let diag: Vec<f64> = (0..dim).map(|k| state.matrix()[(k, k)].re).collect();
    let mut rng = sampling::stream(seed, 0x6b6d73);
    // one twisted-Hermitian jump per chain edge, embedded on rows/cols (k, k+1):
    //   c = [[-sqrt(rho), z], [conj(z) sqrt(rho), 1]],  rho = d_{k+1}/d_k,
    // whose Gram c^dag c is diagonal by the choice of the (1,1) entry
    let mut jumps = Vec::with_capacity(dim - 1);
    for k in 0..dim - 1 {
        let rho = libm::sqrt(diag[k + 1] / diag[k]);
        let z = C64::new(sampling::normal(&mut rng), sampling::normal(&mut rng));
        let mut c = CMat::zeros(dim);
        c[(k, k)] = C64::new(-rho, 0.0);
        c[(k, k + 1)] = z;
        c[(k + 1, k)] = z.conj() * rho;
        c[(k + 1, k + 1)] = C64::new(1.0, 0.0);
        let w: f64 = rng.gen_range(0.5..1.5);
        jumps.push(JumpTerm::new(c, w)?);
    }
    let gen = gksl_generator(jumps, dim)?.with_tag(SymmetryTag::KmsDb(state.clone()));
    Ok(Model {
        kind: ModelKind::KmsOnly { dim, seed },
        name: format!("kms_only(d={dim},seed={seed})"),
        generator: gen,
        state,
        observables: Vec::new(),
        resamples: 0,
        expectation: None,
        gap: None,
    })
}
