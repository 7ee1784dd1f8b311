//! Stateless counter-based random words.
//!
//! The word for item `i` of a stream is `mix64(seed ^ counter(i))` where
//! `counter(i) = (i + 1) * GOLDEN_GAMMA ^ domain`. `mix64` is the SplitMix64
//! output finalizer. Each item depends only on `(seed, domain, i)`, so items
//! can be generated in any order and the same seed drives a monotone
//! coupling across probabilities.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain tags keeping independent streams apart under one seed.
pub const DOMAIN_BOND: u64 = 0;
pub const DOMAIN_SITE: u64 = 0x5349_5445_0000_0000;
pub const DOMAIN_SAMPLER: u64 = 0x5341_4D50_0000_0000;

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn counter(domain: u64, index: u64) -> u64 {
    index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA) ^ domain
}

#[inline]
pub fn word(seed: u64, domain: u64, index: u64) -> u64 {
    mix64(seed ^ counter(domain, index))
}

/// Integer threshold for a Bernoulli(p) trial on a uniform 64-bit word:
/// the trial succeeds iff `word < threshold`. `None` means always succeed
/// (p = 1).
pub fn threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        // p * 2^64, floored; saturates for p within 2^-64 of one
        Some((p * 18_446_744_073_709_551_616.0) as u64)
    }
}

#[inline]
pub fn bernoulli(word: u64, threshold: Option<u64>) -> bool {
    threshold.is_none_or(|t| word < t)
}

/// Sequential sampler over a counter stream; used for auxiliary sampling
/// (pair selection and the like) so that it shares the same reproducibility
/// guarantees as the configurations.
#[derive(Debug, Clone)]
pub struct StreamSampler {
    seed: u64,
    domain: u64,
    next: u64,
}

impl StreamSampler {
    pub fn new(seed: u64, domain: u64) -> Self {
        StreamSampler {
            seed,
            domain: DOMAIN_SAMPLER ^ domain,
            next: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = word(self.seed, self.domain, self.next);
        self.next += 1;
        w
    }

    /// Uniform in `[0, bound)` by rejection, `bound > 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let w = self.next_u64();
            if w < zone {
                return w % bound;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
