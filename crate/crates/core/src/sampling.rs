//! Seeded random inputs for numerical checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum pairwise distance of sampled nodes.
pub const NODE_GAP: f64 = 0.5;
pub const NODE_LO: f64 = -3.0;
pub const NODE_HI: f64 = 3.0;

/// `k` real nodes in `[-3, 3]`, pairwise at least `0.5` apart, in random order.
///
/// Uses the gap transform: sorted uniforms on a shortened interval, spread by
/// `i · gap`, so the sample is uniform over admissible configurations.
pub fn separated_nodes<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    assert!(
        (k.saturating_sub(1)) as f64 * NODE_GAP <= NODE_HI - NODE_LO,
        "cannot place {k} nodes"
    );
    let span = NODE_HI - NODE_LO - (k.saturating_sub(1)) as f64 * NODE_GAP;
    let mut u: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * span).collect();
    u.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = u
        .iter()
        .enumerate()
        .map(|(i, v)| NODE_LO + v + i as f64 * NODE_GAP)
        .collect();
    out.shuffle(rng);
    out
}

pub fn separated_points<R: Rng>(rng: &mut R, k: usize) -> Vec<Complex64> {
    separated_nodes(rng, k)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect()
}

/// Hermitian matrix from the Gaussian unitary ensemble, scaled by `1/√d`
/// so the spectrum stays of order one.
pub fn gue<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (d as f64).sqrt();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 0..d {
        let x: f64 = rng.sample(StandardNormal);
        m[(i, i)] = Complex64::new(x * scale, 0.0);
        for j in i + 1..d {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(a, b) * (scale / std::f64::consts::SQRT_2);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn ginibre<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (d as f64).sqrt();
    DMatrix::from_fn(d, d, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(a, b) * (scale / std::f64::consts::SQRT_2)
    })
}
