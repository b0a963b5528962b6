//! Seedable, splittable random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a hash of `(seed, tags…)`, so
//! the draws for one `(frame, view)` pair never depend on iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type AugRng = ChaCha8Rng;

const SCENE_TAG: u64 = 0x5343_454e_4521;
const VIEW_TAG: u64 = 0x5649_4557_2121;
const SYNTH_TAG: u64 = 0x5359_4e54_4821;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream for `seed` and an arbitrary tag path.
pub fn stream(seed: u64, tags: &[u64]) -> AugRng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t));
    }
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Scene-level augmentation stream of one frame.
pub fn scene_stream(seed: u64, frame: u64) -> AugRng {
    stream(seed, &[SCENE_TAG, frame])
}

/// View-level augmentation stream of one `(frame, view)` pair.
pub fn view_stream(seed: u64, frame: u64, view: u64) -> AugRng {
    stream(seed, &[VIEW_TAG, frame, view])
}

/// Stream used by the synthetic scene generator for one frame.
pub fn synth_stream(seed: u64, frame: u64) -> AugRng {
    stream(seed, &[SYNTH_TAG, frame])
}
