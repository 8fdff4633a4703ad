//! Counter-based seed derivation for reproducible parallel runs.
//!
//! Every random draw in a simulation comes from a [`ChaCha8Rng`] whose seed is
//! a pure function of a key: the master seed followed by any number of
//! 64-bit words (config hash, run index, period, agent, stream label). No
//! generator is ever shared between runs, so results do not depend on
//! scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream labels. Distinct labels guarantee distinct substreams for the same key.
pub mod label {
    pub const LANDSCAPE: u64 = 0x4c41_4e44;
    pub const INIT_VECTOR: u64 = 0x494e_4954;
    pub const ALLOCATION: u64 = 0x414c_4c4f;
    pub const PAIRING: u64 = 0x5041_4952;
    pub const SEARCH: u64 = 0x5345_4152;
    pub const REALLOC: u64 = 0x5245_414c;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
}

/// A position in the seed tree. Cheap to copy; deriving a child never mutates the parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedKey(u64);

impl SeedKey {
    pub fn new(master_seed: u64) -> Self {
        SeedKey(mix64(master_seed ^ 0x6a09_e667_f3bc_c908))
    }

    pub fn child(self, word: u64) -> Self {
        SeedKey(mix64(
            self.0 ^ mix64(word.wrapping_add(0x9e37_79b9_7f4a_7c15)),
        ))
    }

    pub fn children(self, words: &[u64]) -> Self {
        words.iter().fold(self, |key, &w| key.child(w))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a, used to turn stable text descriptions into key words.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
