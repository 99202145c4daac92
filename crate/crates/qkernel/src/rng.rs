//! Deterministic randomness: SplitMix64 streams, seed mixing, and
//! integer-threshold binomial sampling.
//!
//! Everything stochastic in this crate flows through this module so that
//! results are reproducible bit-for-bit from a master seed, on any platform,
//! at any thread count. Streams are derived by [`mix`]ing the master seed
//! with explicit context words (a domain tag plus entry indices), never by
//! drawing from a shared generator, so parallel schedules cannot reorder
//! draws. The Bernoulli path compares raw `u64` draws against an integer
//! threshold: probabilities are quantized to multiples of 2^-64 and no
//! floating-point operation happens after stream derivation.

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
#[inline]
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Golden-ratio increment used by SplitMix64.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derive a stream seed from context words (master seed, domain tag,
/// indices, ...). Chained bijective mixing: for a fixed prefix, distinct
/// final words give distinct outputs.
#[must_use]
pub fn mix(words: &[u64]) -> u64 {
    let mut h: u64 = GOLDEN;
    for &w in words {
        h = finalize(h ^ w);
    }
    h
}

/// Minimal counter-based generator (SplitMix64): the state advances by a
/// fixed increment and each output is a finalizer of the counter, so the
/// k-th draw is a pure function of (seed, k).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    #[must_use]
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next raw 64-bit draw.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        finalize(self.state)
    }

    /// Uniform f64 in [0, 1) with 53 random bits. Used only where a float is
    /// genuinely wanted (test data); decision draws stay on the integer path.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform f64 in [lo, hi).
    #[inline]
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Unbiased uniform integer in [0, n) via Lemire's widening-multiply
    /// rejection method. Integer-only. Panics if `n == 0`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below requires n > 0");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            let m = u128::from(x) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// In-place Fisher-Yates shuffle (descending form), integer-only.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// One Bernoulli draw at the quantized probability `threshold/2^64`
    /// (threshold `u64::MAX` means "always true"; see [`bernoulli_threshold`]).
    #[inline]
    pub fn bernoulli_raw(&mut self, threshold: u64) -> bool {
        threshold == u64::MAX || self.next_u64() < threshold
    }
}

/// Quantize a probability to an integer Bernoulli threshold.
///
/// `p <= 0` maps to 0 (never), `p >= 1` — including values whose product
/// `p * 2^64` rounds up to 2^64 — maps to `u64::MAX` (always). Everything in
/// between is `p * 2^64` truncated, i.e. probabilities are resolved in steps
/// of 2^-64.
#[must_use]
pub fn bernoulli_threshold(p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    let scaled = p * (2.0f64).powi(64);
    if scaled >= u64::MAX as f64 {
        // Covers p >= 1 and p so close to 1 that the f64 product rounds to
        // 2^64: at that resolution the draw always succeeds.
        u64::MAX
    } else {
        scaled as u64
    }
}

/// Deterministic Binomial(trials, p) draw from the stream keyed by `seed`.
///
/// Implemented as `trials` integer-threshold Bernoulli draws: exact (no
/// approximation for any trial count), platform-stable, and a pure function
/// of `(seed, trials, p)`. `p <= 0` returns 0 and `p >= 1` (after 2^-64
/// quantization) returns `trials` without consuming draws.
#[must_use]
pub fn binomial(seed: u64, trials: u64, p: f64) -> u64 {
    let threshold = bernoulli_threshold(p);
    if threshold == 0 {
        return 0;
    }
    if threshold == u64::MAX {
        return trials;
    }
    let mut rng = SplitMix64::new(seed);
    let mut count = 0u64;
    for _ in 0..trials {
        if rng.next_u64() < threshold {
            count += 1;
        }
    }
    count
}
