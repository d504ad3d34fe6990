//! Seed derivation and random streams.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`] seeded by
//! a 64-bit sub-seed. Sub-seeds are derived from a master seed with the
//! SplitMix64 finalizer:
//!
//! ```text
//! mix(z)            = splitmix64 finalizer of (z + 0x9E3779B97F4A7C15)
//! derive(m, i)      = mix(m ^ mix(i))
//! stream(m, d, i)   = derive(derive(m, d), i)
//! ```
//!
//! `d` is a domain tag (see the constants below) so that graph attempts,
//! replica fields and auxiliary probes never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tag for configuration-model attempts.
pub const DOMAIN_GRAPH_ATTEMPT: u64 = 0x0067_7261_7068; // "graph"
/// Domain tag for per-replica field samples.
pub const DOMAIN_REPLICA: u64 = 0x7265_706c_6963; // "replic"
/// Domain tag for randomized structural probes.
pub const DOMAIN_PROBE: u64 = 0x0070_726f_6265; // "probe"
/// Domain tag for Monte Carlo estimates inside checks.
pub const DOMAIN_MONTE_CARLO: u64 = 0x6d63; // "mc"
/// Domain tag for graph seeds inside multi-graph studies.
pub const DOMAIN_GRAPH_SEED: u64 = 0x0067_7365_6564; // "gseed"

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `z + GOLDEN_GAMMA`.
#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for `index` under `master`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Sub-seed for `index` inside `domain` under `master`.
#[inline]
pub fn stream_seed(master: u64, domain: u64, index: u64) -> u64 {
    derive_seed(derive_seed(master, domain), index)
}

/// Generator for `index` inside `domain`.
pub fn stream(master: u64, domain: u64, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(stream_seed(master, domain, index))
}

/// Generator seeded directly by a sub-seed.
pub fn from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0:
        // state advances by GOLDEN_GAMMA before mixing.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(GOLDEN_GAMMA), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = || {
            let mut rng = stream(7, DOMAIN_REPLICA, 3);
            (0..4).map(|_| rng.random()).collect::<Vec<u64>>()
        };
        let (a, b) = (draw(), draw());
        assert_eq!(a, b);
        assert_ne!(
            stream_seed(7, DOMAIN_REPLICA, 3),
            stream_seed(7, DOMAIN_REPLICA, 4)
        );
        assert_ne!(
            stream_seed(7, DOMAIN_REPLICA, 3),
            stream_seed(7, DOMAIN_GRAPH_ATTEMPT, 3)
        );
    }
}
