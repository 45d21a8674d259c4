// SPDX-License-Identifier: Apache-2.0

//! Deterministic chunked Monte Carlo.
//!
//! Samples are split into fixed-size chunks. Chunk `c` draws from the ChaCha8
//! stream `c` of the run seed, reduces to `(count, mean, M2)`, and chunk
//! results are merged in index order. The bytes of the result therefore do
//! not depend on how many threads ran the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per chunk.
pub const CHUNK: u64 = 4096;

/// Running count, mean and centered sum of squares.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Sample variance (`n - 1` denominator); zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Independent seed for a tagged sub-task of a run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    crate::geometry::splitmix(seed ^ crate::geometry::splitmix(tag))
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `samples` draws of `draw` and returns their moments. `draw` gets the
/// chunk generator and returns one sample value.
///
/// `workers == 0` uses rayon's global pool.
pub fn run<F>(samples: u64, seed: u64, workers: usize, draw: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let job = || -> Vec<Moments> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(seed, c);
                let len = CHUNK.min(samples - c * CHUNK);
                let mut m = Moments::default();
                for _ in 0..len {
                    m.push(draw(&mut rng));
                }
                m
            })
            .collect()
    };
    let parts = in_pool(workers, job);
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Runs `job` on a pool of `workers` threads (rayon's global pool for 0).
pub fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return job();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(job),
        Err(_) => job(),
    }
}
