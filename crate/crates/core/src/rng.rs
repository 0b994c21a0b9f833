//! Deterministic, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by
//! `(master seed, block index, stream tag)`. ChaCha is counter based, so a
//! stream is a pure function of its key and parallel blocks reproduce exactly
//! regardless of how they are scheduled.
//!
//! Gaussian variates use the ziggurat sampler of `rand_distr::StandardNormal`
//! on top of that stream; the sequence is fixed by the key alone.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Purpose of a random stream. Part of the key so that, e.g., the message bits
/// and the channel noise of one block never share randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum StreamTag {
    /// Bob's message bits `u`.
    Message = 1,
    /// Shared LT graph seed.
    LtGraph = 2,
    /// Correlated Gaussian channel samples.
    Channel = 3,
    /// Binary-input AWGN noise.
    BiawgnNoise = 4,
    /// Precode construction.
    Precode = 5,
    /// Test and harness use.
    Aux = 6,
}

/// Key of one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master: u64,
    pub block: u64,
    pub tag: StreamTag,
}

impl StreamKey {
    pub const fn new(master: u64, block: u64, tag: StreamTag) -> Self {
        Self { master, block, tag }
    }

    /// Opens the stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&splitmix64(self.master ^ 0x5851_f42d_4c95_7f2d).to_le_bytes());
        seed[16..24].copy_from_slice(&splitmix64(self.block).to_le_bytes());
        seed[24] = self.tag as u8;
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_stream(self.block);
        rng
    }

    /// A 64-bit value derived from the key, used where a seed has to travel
    /// in a message (e.g. the LT graph seed Bob announces).
    pub fn derive_u64(&self) -> u64 {
        use rand::RngCore;
        self.rng().next_u64()
    }
}

/// One round of SplitMix64; also used to spread per-symbol seeds.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
