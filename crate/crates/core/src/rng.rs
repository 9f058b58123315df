//! Seed derivation. Every random stream in the crate is a `ChaCha8Rng`
//! seeded from a master seed mixed with stream coordinates, so results do
//! not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combine a seed with one coordinate.
#[inline]
pub fn mix(seed: u64, coordinate: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ coordinate.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed derived from a master seed and a path of coordinates.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &c| mix(s, c))
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_are_order_sensitive() {
        assert_ne!(derive(7, &[1, 2]), derive(7, &[2, 1]));
        assert_ne!(derive(7, &[0]), derive(8, &[0]));
        assert_eq!(derive(7, &[3, 4]), derive(7, &[3, 4]));
    }
}
