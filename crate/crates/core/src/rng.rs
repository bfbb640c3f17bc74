//! Seedable generation of the exponential jump times driving the algorithm.
//!
//! All randomness in the crate flows from a [`Seed`]. Independent streams for
//! parallel trials are derived with [`spawn_stream`], never by sharing a
//! generator.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// 64-bit seed. Identical seeds and identical request sequences give
/// bit-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn value(self) -> u64 {
        self.0
    }

    /// The generator every sampler in the crate is built on.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

// SplitMix64 finalizer; a bijection on u64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `stream_index` of `seed`.
///
/// For a fixed parent the map is injective in `stream_index`: the pre-image
/// `seed + GOLDEN_GAMMA * (index + 1)` is injective modulo 2^64 because the
/// multiplier is odd, and the finalizer is a bijection.
pub fn spawn_stream(seed: Seed, stream_index: u64) -> Seed {
    let pre = seed.0.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream_index.wrapping_add(1)));
    Seed(mix64(pre))
}

/// Map a uniform draw on `(0, 1]` to a unit-rate exponential increment.
///
/// Returns `None` for `u = 1`, which would give a zero increment; callers
/// redraw in that case so that jump times are strictly increasing.
pub fn increment_from_uniform(u: f64) -> Option<f64> {
    debug_assert!(u > 0.0 && u <= 1.0);
    if u >= 1.0 {
        None
    } else {
        Some(-u.ln())
    }
}

/// Streaming sampler of unit-rate exponential increments by inverse CDF.
#[derive(Debug, Clone)]
pub struct ExpSampler<R = ChaCha8Rng> {
    rng: R,
}

impl ExpSampler<ChaCha8Rng> {
    pub fn from_seed(seed: Seed) -> Self {
        Self { rng: seed.rng() }
    }
}

impl<R: RngCore> ExpSampler<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }

    /// Next increment, strictly positive.
    pub fn next_increment(&mut self) -> f64 {
        loop {
            // `random::<f64>()` is uniform on [0, 1); flip it onto (0, 1].
            let u = 1.0 - self.rng.random::<f64>();
            if let Some(tau) = increment_from_uniform(u) {
                return tau;
            }
        }
    }
}

/// Realized jump schedule: increments `tau_k` and cumulative times `T_k`,
/// `k = 1..=n`, with `T_0 = 0` implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSchedule {
    increments: Vec<f64>,
    times: Vec<f64>,
}

impl JumpSchedule {
    /// Build a schedule from given increments. Every increment must be
    /// finite and strictly positive.
    pub fn from_increments(increments: Vec<f64>) -> Result<Self> {
        if increments.is_empty() {
            return Err(CoreError::EmptySchedule);
        }
        if let Some(bad) = increments.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(CoreError::Domain(format!("jump increments must be finite and positive, got {bad}")));
        }
        let mut acc = 0.0;
        let times = increments
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect();
        Ok(Self { increments, times })
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
}

/// Draw `n` i.i.d. Exp(1) increments from `seed` and their running sums.
pub fn sample_increments(seed: Seed, n: usize) -> Result<JumpSchedule> {
    if n == 0 {
        return Err(CoreError::EmptySchedule);
    }
    let mut sampler = ExpSampler::from_seed(seed);
    let increments = (0..n).map(|_| sampler.next_increment()).collect();
    JumpSchedule::from_increments(increments)
}
