//! Deterministic seed derivation.
//!
//! Every random draw in a campaign is keyed by a tuple such as
//! `(campaign, stream, level, sample, attempt, field)`. The tuple is folded
//! through SplitMix64 so that neighbouring keys give unrelated ChaCha streams.

use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold `parts` into `campaign`.
pub fn derive_seed(campaign: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(campaign), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// FNV-1a of a label, used to turn stream names into key components.
pub const fn label(name: &str) -> u64 {
    let bytes = name.as_bytes();
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    let mut i = 0;
    while i < bytes.len() {
        hash ^= bytes[i] as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
        i += 1;
    }
    hash
}

pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Key of one stochastic event `ω`: which estimator, level, sample and retry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleKey {
    pub stream: u64,
    pub level: u64,
    pub index: u64,
    pub attempt: u64,
}

impl SampleKey {
    pub fn new(stream: &str, level: usize, index: usize) -> Self {
        Self {
            stream: label(stream),
            level: level as u64,
            index: index as u64,
            attempt: 0,
        }
    }

    pub fn with_attempt(self, attempt: usize) -> Self {
        Self {
            attempt: attempt as u64,
            ..self
        }
    }

    /// Seed for the white noise behind one named random field.
    pub fn field_seed(&self, campaign: u64, field: &str) -> u64 {
        derive_seed(
            campaign,
            &[self.stream, self.level, self.index, self.attempt, label(field)],
        )
    }
}
