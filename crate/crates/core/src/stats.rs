//! Deterministic Monte Carlo plumbing.
//!
//! Every sample owns an independent ChaCha stream selected by its index, and
//! samples are reduced in fixed-size chunks merged in index order, so results
//! are bitwise identical whatever the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per reduction chunk.
pub const CHUNK: usize = 256;

/// Generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Running mean and second central moment per coordinate (Welford), with
/// Chan's pairwise merge.
#[derive(Clone, Debug)]
pub struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    pub fn new(len: usize) -> Self {
        Self { count: 0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Standard error of the mean, using the unbiased sample variance.
    pub fn standard_error(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|&s| (s.max(0.0) / (n - 1.0) / n).sqrt()).collect()
    }
}

/// Runs `samples` independent samples of `sample` (which receives the sample
/// index and accumulates into the chunk's [`Moments`]) and reduces them in a
/// fixed order.
pub fn reduce_samples<F>(samples: usize, len: usize, sample: F) -> Moments
where
    F: Fn(u64, &mut Moments) + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let run_chunk = |c: usize| {
        let mut acc = Moments::new(len);
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(samples);
        for i in lo..hi {
            sample(i as u64, &mut acc);
        }
        acc
    };

    #[cfg(feature = "parallel")]
    let partials: Vec<Moments> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Moments> = (0..chunks).map(run_chunk).collect();

    let mut total = Moments::new(len);
    for p in &partials {
        total.merge(p);
    }
    total
}
