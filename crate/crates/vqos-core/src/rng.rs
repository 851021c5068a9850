//! Deterministic seed derivation.
//!
//! Every stochastic component in the workbench draws from a [`ChaCha8Rng`]
//! whose seed is derived from a master seed plus a stream label, so that
//! independent pieces of work (runs, grid cells, trees) get decorrelated
//! but fully reproducible streams regardless of execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the splitmix64 sequence; good avalanche, cheap, stable.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut s = master ^ 0x6c62_272e_07bb_0142;
    let a = splitmix64(&mut s);
    let mut s2 = a ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    splitmix64(&mut s2)
}

/// Construct the RNG for a (master seed, stream) pair.
pub fn rng_for(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream))
}

/// FNV-1a hash of a label string, for deriving seeds from structured
/// coordinates (e.g. experiment-grid cells) in a stable way.
pub fn hash_label(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for a labelled sub-task under a master seed.
pub fn seed_for_label(master: u64, label: &str) -> u64 {
    derive_seed(master, hash_label(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_seed_is_deterministic_and_stream_sensitive() {
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn rng_streams_are_reproducible() {
        let mut a = rng_for(42, 3);
        let mut b = rng_for(42, 3);
        for _ in 0..16 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }

    #[test]
    fn hash_label_distinguishes_labels() {
        assert_ne!(hash_label("cell/a"), hash_label("cell/b"));
        assert_eq!(hash_label("x"), hash_label("x"));
    }
}
