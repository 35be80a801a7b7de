//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator whose 32-byte key is produced by
//! SplitMix64 from a 64-bit stream seed. Stream seeds are derived from a
//! master seed and a path of indices with [`derive_seed`], so any problem,
//! replicate or map can be regenerated in isolation and in any order.
//!
//! Sampling is done here on raw `u64` draws rather than through `rand`
//! distributions so the bit stream is fully pinned by this file:
//! - `unit_f64`: top 53 bits of a draw scaled by 2^-53.
//! - `below(n)`: Lemire's widening-multiply method with rejection.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of the SplitMix64 finalizer applied to `x + golden gamma`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `derive_seed(s, [i, j]) = mix(mix(s, i), j)` with `mix(s, i) = splitmix64(splitmix64(s) ^ i)`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(master, |acc, &i| splitmix64(splitmix64(acc) ^ i))
}

/// Domain-separation tags for sub-streams of a single problem.
pub mod salt {
    pub const OPTION_ORDER: u64 = 0x6f70_7469_6f6e;
    pub const CORPUS_PROBLEM: u64 = 0x636f_7270;
    pub const SEGMENTATION: u64 = 0x7365_676d;
    pub const CLASSIFIER: u64 = 0x636c_7366;
    pub const SOLVER: u64 = 0x736f_6c76;
    pub const CALIBRATION: u64 = 0x6361_6c69;
}

#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            let word = splitmix64(state);
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn derived(master: u64, path: &[u64]) -> Self {
        Self::new(derive_seed(master, path))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) has no valid outcome");
        let threshold = n.wrapping_neg() % n;
        loop {
            let wide = u128::from(self.next_u64()) * u128::from(n);
            if (wide as u64) >= threshold {
                return (wide >> 64) as u64;
            }
        }
    }

    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// True with probability `p` (clamped to [0, 1]).
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.unit_f64() < p
    }

    /// Fisher-Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct positions from `0..n`, in draw order (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot sample {k} of {n} without replacement");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}
