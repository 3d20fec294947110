//! Deterministic random streams derived from one master seed.
//!
//! A stream is identified by the master seed, a purpose tag and a list of
//! indices (sample number, SNR point, epoch, ...). The key words are mixed
//! with SplitMix64 into a ChaCha seed, so every sample can own its own
//! generator and parallel evaluation stays reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type used for every stream in the crate.
pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    TrainSplit = 1,
    ValidationSplit = 2,
    TestSplit = 3,
    Secondary = 4,
    WeightInit = 5,
    Shuffle = 6,
    FlowNoise = 7,
    Calibration = 8,
    PfaTest = 9,
    Sweep = 10,
    Bench = 11,
    Misc = 12,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the stream for `(master, purpose, indices)`.
pub fn stream(master: u64, purpose: Purpose, indices: &[u64]) -> StreamRng {
    let mut state = master;
    let mut acc = splitmix64(&mut state) ^ (purpose as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    for &ix in indices {
        state ^= acc;
        acc = splitmix64(&mut state) ^ ix.wrapping_mul(0xA076_1D64_78BD_642F);
    }
    state ^= acc;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Stable index for a real-valued key such as an SNR in dB or a Doppler bin.
pub fn real_key(x: f64) -> u64 {
    x.to_bits()
}
