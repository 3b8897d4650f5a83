//! The pinned generator behind every split, shuffle and resample.
//!
//! xoshiro256** seeded by expanding the 64-bit seed with SplitMix64. A
//! bounded draw in `[0, n)` is the high half of the 128-bit product
//! `next_u64() * n`. Shuffles are Fisher-Yates from the last index down to
//! 1, swapping `i` with `below(i + 1)`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

pub struct SplitRng(Xoshiro256StarStar);

impl SplitRng {
    pub fn new(seed: u64) -> Self {
        SplitRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

/// Independent seed for a numbered sub-stream of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
