//! Seeded randomness. Every random quantity in the crate is drawn from
//! ChaCha8 seeded through `seed_from_u64`, with reals uniform on `[-1, 1]`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measure::MeasureSpace;
use crate::operator::MatrixOperator;

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for trial `index` of a run seeded with `seed`.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step keeps neighbouring trials decorrelated
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform_sym(rng: &mut LabRng) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

pub fn uniform_vec(rng: &mut LabRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| uniform_sym(rng)).collect()
}

/// Dense matrix with i.i.d. entries uniform on `[-1, 1]`.
pub fn random_matrix(rng: &mut LabRng, space: Arc<MeasureSpace>) -> MatrixOperator {
    let n = space.dimension();
    let entries = uniform_vec(rng, n * n);
    MatrixOperator::from_flat(space, entries).expect("n * n entries")
}

/// Masses uniform on `[lo, hi]`.
pub fn random_masses(rng: &mut LabRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Uniform random index in `0..n`.
pub fn index(rng: &mut LabRng, n: usize) -> usize {
    rng.gen_range(0..n)
}

pub fn coin(rng: &mut LabRng) -> bool {
    rng.gen_bool(0.5)
}
