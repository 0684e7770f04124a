//! Counter-based random streams. Every draw is keyed by `(seed, stream,
//! slot, id)`, so runs that differ only in policy see the same mobility and
//! request randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    RegionKinds = 1,
    InitialAges = 2,
    Placement = 3,
    Requests = 4,
    CachingPolicy = 5,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_rng(seed: u64, stream: Stream, slot: u64, id: u64) -> ChaCha8Rng {
    let mut key = splitmix(seed);
    for part in [stream as u64, slot, id] {
        key = splitmix(key ^ part);
    }
    ChaCha8Rng::seed_from_u64(key)
}
