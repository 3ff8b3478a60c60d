//! Counter-based randomness keyed by `(seed, tag, pair)`.
//!
//! Every random decision about an unordered node pair is a pure function of
//! the trial seed, a purpose tag and the sorted index pair, so the same pair
//! sees the same draw no matter which frame, traversal order or thread asks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags separating independent streams under one seed.
pub mod tag {
    pub const POINTS: u64 = 0x5054;
    pub const EDGE: u64 = 0x4544;
    pub const COUPLING: u64 = 0x4350;
    pub const LEVEL: u64 = 0x4c56;
    pub const COMPONENTS: u64 = 0x584b;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// The splitmix64 output function.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub fn key(seed: u64, tag: u64) -> u64 {
    mix(seed.wrapping_add(GOLDEN.wrapping_mul(tag.wrapping_add(1))))
}

/// 64 random bits for the unordered pair `{i, j}`.
#[inline]
pub fn pair_bits(seed: u64, tag: u64, i: usize, j: usize) -> u64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let h = mix(key(seed, tag) ^ (a as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    mix(h.wrapping_add(GOLDEN) ^ (b as u64).wrapping_mul(0xa076_1d64_78bd_642f))
}

/// Map 64 bits to `[0, 1)` using the top 53.
#[inline]
pub fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn pair_uniform(seed: u64, tag: u64, i: usize, j: usize) -> f64 {
    unit(pair_bits(seed, tag, i, j))
}

/// A stream generator for `(seed, tag, sub)`.
pub fn stream(seed: u64, tag: u64, sub: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(key(seed, tag) ^ mix(sub.wrapping_add(GOLDEN))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_draws_are_symmetric() {
        for (i, j) in [(0, 1), (5, 3), (100, 7)] {
            assert_eq!(pair_bits(9, tag::EDGE, i, j), pair_bits(9, tag::EDGE, j, i));
        }
        assert_ne!(pair_bits(9, tag::EDGE, 1, 2), pair_bits(9, tag::COUPLING, 1, 2));
        assert_ne!(pair_bits(9, tag::EDGE, 1, 2), pair_bits(10, tag::EDGE, 1, 2));
    }

    #[test]
    fn pair_uniforms_look_uniform() {
        let n = 200_000;
        let mut sum = 0.0;
        let mut bins = [0usize; 10];
        for k in 0..n {
            let u = pair_uniform(42, tag::EDGE, k, k + 1 + k % 17);
            assert!((0.0..1.0).contains(&u));
            sum += u;
            bins[(u * 10.0) as usize] += 1;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 3.0 * (1.0 / 12.0 / n as f64).sqrt() * 2.0);
        let chi2: f64 = bins
            .iter()
            .map(|&c| {
                let e = n as f64 / 10.0;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi2 < 30.0, "chi2 = {chi2}");
    }
}
