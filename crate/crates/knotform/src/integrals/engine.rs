//! Deterministic block-parallel Monte-Carlo runner.
//!
//! The sample budget is split into fixed-size blocks; block b draws from
//! an independent ChaCha8 stream derived from (seed, b), and block partials
//! are combined by index-ordered pairwise summation. Results are therefore
//! bit-identical for a fixed (budget, seed) regardless of how many rayon
//! workers execute the blocks.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per block. Fixed: changing it changes the stream layout and
/// therefore the bit-exact results.
pub const BLOCK: u64 = 4096;

/// One evaluated sample.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    /// Importance-weighted integrand value (0 for rejected samples).
    pub value: f64,
    /// Whether the configuration passed the acceptance indicator.
    pub accepted: bool,
    /// Scan bin this sample belongs to, if any.
    pub bin: Option<usize>,
}

impl Sample {
    pub fn rejected() -> Self {
        Sample { value: 0.0, accepted: false, bin: None }
    }
}

/// Accumulated totals for a run (whole budget or one block).
#[derive(Debug, Clone)]
pub struct Totals {
    pub count: u64,
    pub accepted: u64,
    pub sum: f64,
    pub sum_sq: f64,
    /// Per-bin (sum, sum of squares, hits).
    pub bins: Vec<(f64, f64, u64)>,
}

impl Totals {
    fn new(bins: usize) -> Self {
        Totals { count: 0, accepted: 0, sum: 0.0, sum_sq: 0.0, bins: vec![(0.0, 0.0, 0); bins] }
    }

    fn add(&mut self, s: Sample) {
        self.count += 1;
        if s.accepted {
            self.accepted += 1;
        }
        self.sum += s.value;
        self.sum_sq += s.value * s.value;
        if let Some(b) = s.bin {
            let slot = &mut self.bins[b];
            slot.0 += s.value;
            slot.1 += s.value * s.value;
            slot.2 += 1;
        }
    }

    fn merge(a: Totals, b: Totals) -> Totals {
        Totals {
            count: a.count + b.count,
            accepted: a.accepted + b.accepted,
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            bins: a
                .bins
                .into_iter()
                .zip(b.bins)
                .map(|(x, y)| (x.0 + y.0, x.1 + y.1, x.2 + y.2))
                .collect(),
        }
    }

    /// Mean and its standard error over the full sample count.
    pub fn mean_and_se(&self) -> (f64, f64) {
        mean_se(self.sum, self.sum_sq, self.count)
    }

    /// Mean and standard error of bin `i` (zeros outside the bin included,
    /// as the bin value is a restriction of the integrand).
    pub fn bin_mean_and_se(&self, i: usize) -> (f64, f64) {
        mean_se(self.bins[i].0, self.bins[i].1, self.count)
    }
}

fn mean_se(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Index-ordered pairwise reduction; the tree shape depends only on the
/// number of blocks.
fn pairwise_merge(mut parts: Vec<Totals>, bins: usize) -> Totals {
    if parts.is_empty() {
        return Totals::new(bins);
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(Totals::merge(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// Run `budget` samples of `sample` with `bins` scan bins.
///
/// The closure must be pure given the RNG stream: it is called once per
/// sample with a block-local generator.
pub fn run<F>(budget: u64, seed: u64, bins: usize, sample: F) -> Totals
where
    F: Fn(&mut ChaCha8Rng) -> Sample + Sync,
{
    let budget = budget.max(1);
    let nblocks = budget.div_ceil(BLOCK);
    let parts: Vec<Totals> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            let count = if b + 1 == nblocks { budget - b * BLOCK } else { BLOCK };
            let mut t = Totals::new(bins);
            for _ in 0..count {
                t.add(sample(&mut rng));
            }
            t
        })
        .collect();
    pairwise_merge(parts, bins)
}
