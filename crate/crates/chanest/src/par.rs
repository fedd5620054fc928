//! Chunked fan-out with worker-count-independent results.
//!
//! Work is split into chunks whose boundaries depend only on the item count,
//! each chunk owns its derived RNG stream, and partial results are combined
//! in chunk order. Running with one thread, eight threads, or with the
//! `parallel` feature disabled therefore produces bit-identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use std::ops::Range;

/// Default number of Monte Carlo trials per chunk.
pub const DEFAULT_CHUNK: usize = 4096;

/// Splits `0..n` into `ceil(n/chunk)` ranges and maps each through `f`,
/// returning results in chunk order. `f` receives `(chunk_index, range)`.
pub fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync,
{
    assert!(chunk > 0, "chunk size must be positive");
    let ranges: Vec<(usize, Range<usize>)> = (0..n.div_ceil(chunk))
        .map(|i| (i, i * chunk..((i + 1) * chunk).min(n)))
        .collect();

    #[cfg(feature = "parallel")]
    {
        ranges.into_par_iter().map(|(i, r)| f(i, r)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ranges.into_iter().map(|(i, r)| f(i, r)).collect()
    }
}

/// Online mean/variance accumulator with a combine rule, so per-chunk
/// statistics can be merged in fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combine; exact for disjoint sample sets.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let d = other.mean - self.mean;
        let n = n1 + n2;
        self.mean += d * n2 / n;
        self.m2 += other.m2 + d * d * n1 * n2 / n;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n as f64 - 1.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}
