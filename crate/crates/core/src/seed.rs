//! Seed derivation, so per-item randomness never depends on processing order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator's RNG.
pub type Rng = ChaCha8Rng;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with an item index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// FNV-1a, for deriving seeds from string keys such as image ids.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub fn rng_for(master: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(master, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a: alloc::vec::Vec<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        let set: std::collections::BTreeSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len());
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
        assert_eq!(hash_str(""), 0xcbf2_9ce4_8422_2325);
    }
}
