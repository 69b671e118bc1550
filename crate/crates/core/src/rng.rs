//! Counter-based random substreams.
//!
//! Every Monte Carlo sample owns a generator seeded from a hash of the
//! master seed and a small tuple of labels (boost velocity, sample index,
//! redraw attempt). A sample's random numbers therefore never depend on how
//! the work was split across threads, or on which other samples ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed to every sampling routine.
pub type SampleRng = ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    master: u64,
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Folds `labels` into the master seed. Order matters: `[a, b]` and
    /// `[b, a]` give unrelated keys.
    pub fn key(&self, labels: &[u64]) -> u64 {
        let mut h = mix64(self.master ^ 0x9e37_79b9_7f4a_7c15);
        for &label in labels {
            h = mix64(h.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix64(label));
        }
        h
    }

    pub fn substream(&self, labels: &[u64]) -> SampleRng {
        SampleRng::seed_from_u64(self.key(labels))
    }

    /// Child stream, e.g. one per boost of a curve.
    pub fn child(&self, labels: &[u64]) -> SeedStream {
        SeedStream::new(self.key(labels))
    }
}
