//! Deterministic sampling of domain points.
//!
//! All randomness comes from a ChaCha stream keyed by `(seed, stream)`, so
//! identical inputs always see identical points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::Domain;

pub const STREAM_ZERO_TEST: u64 = 1;
pub const STREAM_PROBE: u64 = 2;
pub const STREAM_RANK: u64 = 3;
pub const STREAM_STARTS: u64 = 4;
pub const STREAM_CATALOG: u64 = 5;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub struct Sampler<'a> {
    domain: &'a Domain,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(domain: &'a Domain, seed: u64, stream: u64) -> Self {
        Sampler {
            domain,
            rng: rng(seed, stream),
        }
    }

    /// Uniform point in the box, ignoring exclusions.
    pub fn draw(&mut self) -> Vec<f64> {
        self.domain
            .bounds
            .iter()
            .map(|&(lo, hi)| {
                if hi > lo {
                    lo + (hi - lo) * self.rng.random::<f64>()
                } else {
                    lo
                }
            })
            .collect()
    }

    /// Up to `count` points outside the excluded zero sets, drawing at most
    /// `max_attempts` candidates.
    pub fn draw_valid(&mut self, count: usize, max_attempts: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < max_attempts {
            attempts += 1;
            let p = self.draw();
            if !self.domain.is_excluded(&p) {
                out.push(p);
            }
        }
        out
    }
}
