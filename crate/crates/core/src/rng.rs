//! Seeded randomness.
//!
//! Every random draw in the simulator comes from a [`SimRng`] built from an
//! explicit [`RngSeed`]. Child seeds are derived with [`RngSeed::split`], a
//! pure function of `(parent, index)`, so parallel repetitions never share
//! a stream and results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator family used throughout. ChaCha8 output is specified
/// bit-for-bit, so trajectories agree across platforms.
pub type SimRng = ChaCha8Rng;

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

/// Stream indices for the sub-generators of a single run.
pub(crate) const GRAPH_STREAM: u64 = 0x0067_7261_7068; // "graph"
pub(crate) const DYNAMICS_STREAM: u64 = 0x0064_796e_616d; // "dynam"

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    /// Derive the `index`-th child seed:
    /// `mix64(parent + GOLDEN * (index + 1)) ^ mix64(index)`.
    pub fn split(self, index: u64) -> RngSeed {
        let a = mix64(
            self.0
                .wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))),
        );
        RngSeed(a ^ mix64(index))
    }

    pub fn rng(self) -> SimRng {
        SimRng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(value: u64) -> Self {
        RngSeed(value)
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn same_seed_same_stream() {
        let mut r1 = RngSeed(42).rng();
        let mut r2 = RngSeed(42).rng();
        let a: Vec<u64> = (0..16).map(|_| r1.gen()).collect();
        let b: Vec<u64> = (0..16).map(|_| r2.gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn split_is_pure_and_distinct() {
        let master = RngSeed(7);
        assert_eq!(master.split(3), master.split(3));
        let children: HashSet<_> = (0..1000).map(|i| master.split(i)).collect();
        assert_eq!(children.len(), 1000);
        assert_ne!(master.split(0), RngSeed(8).split(0));
    }

    #[test]
    fn split_values_are_frozen() {
        // Seed derivation is part of the reproducibility contract; changing
        // it silently would invalidate recorded manifests.
        let s = RngSeed(0).split(0);
        assert_eq!(s, RngSeed(0).split(0));
        let expected = mix64(GOLDEN_GAMMA) ^ mix64(0);
        assert_eq!(s.0, expected);
        assert_eq!(mix64(0), 0);
    }
}
