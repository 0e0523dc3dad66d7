//! Seeded sampling. Each trial gets its own ChaCha stream, so results do
//! not depend on evaluation order or thread count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ring::{Mat, RingRef};

pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_mat<R: Rng + ?Sized>(ring: &RingRef, rng: &mut R, rows: usize, cols: usize, bound: u64) -> Mat {
    let data = (0..rows * cols).map(|_| ring.random(rng, bound)).collect();
    Mat::from_vec(ring.clone(), rows, cols, data).expect("sampled entries lie in the ring")
}

/// A matrix with dimensions drawn from `1..=max_rows` and `1..=max_cols`.
pub fn random_shape_mat<R: Rng + ?Sized>(
    ring: &RingRef,
    rng: &mut R,
    max_rows: usize,
    max_cols: usize,
    bound: u64,
) -> Mat {
    let rows = rng.gen_range(1..=max_rows.max(1));
    let cols = rng.gen_range(1..=max_cols.max(1));
    random_mat(ring, rng, rows, cols, bound)
}
