//! Monte Carlo estimates and the chunked, deterministically reduced sampler.

use serde::{Deserialize, Serialize};

use crate::sampling::{LabRng, RandomSource};

/// Samples per work item. Chunk `c` always draws from `source.derive(c)`,
/// so the result does not depend on how chunks are scheduled.
pub const CHUNK_SIZE: u64 = 4096;

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    /// A value known without sampling error.
    pub fn exact(value: f64, seed: u64) -> Self {
        Self {
            value,
            std_error: 0.0,
            samples: 1,
            seed,
        }
    }

    /// `|self − other| ≤ k·SE`, with SE taken from `self`.
    pub fn within(&self, other: f64, k: f64) -> bool {
        (self.value - other).abs() <= k * self.std_error
    }
}

/// Running count, mean and centred second moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
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

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2.max(0.0) / (n - 1.0) / n).sqrt()
    }

    pub fn estimate(&self, seed: u64) -> Estimate {
        Estimate {
            value: self.mean,
            std_error: self.std_error(),
            samples: self.count.max(1),
            seed,
        }
    }
}

fn run_chunk<F>(chunk: u64, samples: u64, source: &RandomSource, width: usize, f: &F) -> Vec<Moments>
where
    F: Fn(u64, &mut LabRng, &mut [f64]),
{
    let start = chunk * CHUNK_SIZE;
    let end = (start + CHUNK_SIZE).min(samples);
    let mut rng = source.derive(chunk).rng();
    let mut buf = vec![0.0; width];
    let mut acc = vec![Moments::default(); width];
    for index in start..end {
        f(index, &mut rng, &mut buf);
        for (m, &x) in acc.iter_mut().zip(&buf) {
            m.push(x);
        }
    }
    acc
}

#[cfg(feature = "parallel")]
fn map_chunks<F>(samples: u64, source: &RandomSource, width: usize, f: &F) -> Vec<Vec<Moments>>
where
    F: Fn(u64, &mut LabRng, &mut [f64]) + Sync,
{
    use rayon::prelude::*;
    let chunks = samples.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(c, samples, source, width, f))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn map_chunks<F>(samples: u64, source: &RandomSource, width: usize, f: &F) -> Vec<Vec<Moments>>
where
    F: Fn(u64, &mut LabRng, &mut [f64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    (0..chunks).map(|c| run_chunk(c, samples, source, width, f)).collect()
}

/// Draws `samples` vector-valued observations and returns per-component
/// moments. `f(index, rng, out)` must fill all `width` slots of `out`.
pub fn accumulate<F>(samples: u64, source: &RandomSource, width: usize, f: F) -> Vec<Moments>
where
    F: Fn(u64, &mut LabRng, &mut [f64]) + Sync,
{
    let mut total = vec![Moments::default(); width];
    for chunk in map_chunks(samples, source, width, &f) {
        for (t, c) in total.iter_mut().zip(&chunk) {
            t.merge(c);
        }
    }
    total
}

/// Scalar Monte Carlo mean.
pub fn mean_estimate<F>(samples: u64, source: &RandomSource, f: F) -> Estimate
where
    F: Fn(u64, &mut LabRng) -> f64 + Sync,
{
    let m = accumulate(samples, source, 1, |i, rng, out| out[0] = f(i, rng));
    m[0].estimate(source.seed)
}

/// Applies `f` to every item, in parallel when enabled, keeping order.
pub fn map_items<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

/// Average of the intersection density versus the product of densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub average: Estimate,
    pub product: f64,
    pub difference: Estimate,
}

/// `|Î(A) − Î(blurred A)|` at one blur radius, with the paired standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub delta: f64,
    pub deviation: f64,
    pub std_error: f64,
}
