//! Seeded random fixtures: GUE-style Hermitian matrices, Ginibre matrices,
//! faithful density states. Deterministic per seed (ChaCha8 streams), which
//! keeps every certificate reproducible byte for byte.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{CMat, HermitianMatrix, C64};

/// Derive the per-sample stream used by batch runners: one independent
/// ChaCha8 stream per (seed, index) pair.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Ginibre matrix: independent complex Gaussian entries.
pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> CMat {
    CMat::from_fn(dim, |_, _| C64::new(normal(rng), normal(rng)))
}

/// GUE-style Hermitian matrix (X + X^dag)/2.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianMatrix {
    let x = random_matrix(rng, dim);
    HermitianMatrix::new_unchecked(x.symmetrize())
}

/// Random self-adjoint element, plain matrix form.
pub fn random_self_adjoint(rng: &mut impl Rng, dim: usize) -> CMat {
    random_hermitian(rng, dim).into_mat()
}

/// Faithful unit-trace density: W W^dag + eps, normalized. Eigenvalues stay
/// well away from zero so modular flows are safe.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> HermitianMatrix {
    let w = random_matrix(rng, dim);
    let mut g = w.matmul(&w.adjoint());
    let floor = 0.05 * (1.0 + g.trace().re / dim as f64);
    for i in 0..dim {
        g[(i, i)] += C64::new(floor, 0.0);
    }
    let t = g.trace().re;
    HermitianMatrix::new_unchecked(g.scale_re(1.0 / t))
}

pub fn random_complex_in_box(rng: &mut impl Rng, half_width: f64) -> C64 {
    let re: f64 = rng.gen_range(-half_width..half_width);
    let im: f64 = rng.gen_range(-half_width..half_width);
    C64::new(re, im)
}

/// Random positive weights in [0.5, 1.5).
pub fn random_weights(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.5..1.5)).collect()
}
