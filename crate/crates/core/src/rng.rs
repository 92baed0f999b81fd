//! Counter-based random streams.
//!
//! Every random draw in the laboratory comes from a stream keyed by
//! `(master seed, counter, purpose tag)`, so the draws for cycle `m` do not
//! depend on how many draws earlier cycles consumed or on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags separating independent streams that share a seed and counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    IndexSet = 1,
    MasterSlave = 2,
    LocalComm = 3,
    Schedule = 4,
    FaultCount = 5,
    Lanczos = 6,
    Test = 7,
    Trajectory = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns the generator for `(seed, counter, purpose)`.
pub fn stream(seed: u64, counter: u64, purpose: Purpose) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed ^ splitmix64(purpose as u64)) ^ counter);
    let mut bytes = [0u8; 32];
    let mut k = key;
    for chunk in bytes.chunks_mut(8) {
        k = splitmix64(k);
        chunk.copy_from_slice(&k.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 3, Purpose::IndexSet).random();
        let b: u64 = stream(7, 3, Purpose::IndexSet).random();
        let c: u64 = stream(7, 4, Purpose::IndexSet).random();
        let d: u64 = stream(7, 3, Purpose::LocalComm).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
