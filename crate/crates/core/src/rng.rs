//! Seed-derived random streams.
//!
//! Every drop owns a ChaCha stream selected by its index; inside a drop each
//! consumer (deployment, pairing order, traffic, scheduling, per-receiver
//! fading) reads from its own disjoint word range. Changing one consumer's
//! draw count never shifts another's, so schemes and pairing algorithms can
//! be compared on matched randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Width of each word range, in 32-bit words.
const PURPOSE_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Deployment,
    PairingOrder,
    Traffic,
    Schedule,
    /// Fading gains seen by one receiver node.
    Fading(usize),
}

impl Purpose {
    fn slot(self) -> u128 {
        match self {
            Purpose::Deployment => 0,
            Purpose::PairingOrder => 1,
            Purpose::Traffic => 2,
            Purpose::Schedule => 3,
            Purpose::Fading(rx) => 16 + rx as u128,
        }
    }
}

/// Returns the stream for `purpose` within drop `drop` of a run seeded by `seed`.
pub fn stream(seed: u64, drop: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop);
    rng.set_word_pos(purpose.slot() << PURPOSE_SHIFT);
    rng
}
