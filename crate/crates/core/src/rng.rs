//! Seeded, splittable random number streams.
//!
//! Every stochastic operation in this crate takes an [`RngSeed`] and derives
//! independent child streams from it by hashing the seed together with
//! structural indices (replication, row, measurement slot, resample id).
//! Results are therefore reproducible and independent of evaluation order,
//! which is what makes the parallel simulation harness deterministic.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; a cheap bijective mixer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible stream identity: a base seed plus a stream id.
///
/// Identical `(seed, stream_id)` pairs always produce identical draws;
/// distinct stream ids give statistically independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Derive a child stream for the given salt. Children of distinct salts
    /// (and of distinct parents) are independent for all practical purposes.
    #[inline]
    pub fn child(&self, salt: u64) -> RngSeed {
        RngSeed {
            seed: mix64(self.seed ^ mix64(salt.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))),
            stream_id: self.stream_id,
        }
    }

    /// Two-index convenience: `child2(r, j)` is `child(r).child(j)` with the
    /// indices kept in separate mixing rounds so (0,1) and (1,0) differ.
    #[inline]
    pub fn child2(&self, a: u64, b: u64) -> RngSeed {
        self.child(a).child(b)
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut s = mix64(self.seed ^ mix64(self.stream_id ^ GOLDEN));
        for chunk in key.chunks_exact_mut(8) {
            s = mix64(s.wrapping_add(GOLDEN));
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Alias table for O(1) categorical sampling.
///
/// Built once per weight vector; sampling costs one uniform draw. The draw
/// splits a single uniform into cell index and coin, so each sample consumes
/// exactly one stream value.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {w} at index {i} is not a finite nonnegative number"
                )));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }

        // Vose's method: partition scaled weights into under- and over-full
        // cells, then pair them up.
        let mut prob = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut small: Vec<u32> = Vec::with_capacity(n);
        let mut large: Vec<u32> = Vec::with_capacity(n);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s as usize] = scaled[s as usize];
            alias[s as usize] = l;
            scaled[l as usize] -= 1.0 - scaled[s as usize];
            if scaled[l as usize] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are exactly full up to rounding.
        for &i in small.iter().chain(large.iter()) {
            prob[i as usize] = 1.0;
            alias[i as usize] = i;
        }
        Ok(Self { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let n = self.prob.len();
        let u: f64 = rng.random::<f64>() * n as f64;
        let cell = (u as usize).min(n - 1);
        let coin = u - cell as f64;
        if coin < self.prob[cell] {
            cell
        } else {
            self.alias[cell] as usize
        }
    }
}
