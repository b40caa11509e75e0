//! Counter-addressed random streams.
//!
//! Every draw is a pure function of `(master_seed, chain_index, counter)`.
//! The generator is ChaCha8 keyed by the master seed, with the chain index as
//! the ChaCha stream id and the counter selecting a block of `2^20` words
//! inside that stream. One call to [`RngStream::gaussian_draw`] or
//! [`RngStream::uniform`] consumes exactly one block.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::point::Point;

const BLOCK_WORDS_LOG2: u32 = 20;

/// Largest counter that still maps to a distinct block (word position is 68 bits).
pub const MAX_COUNTER: u64 = (1 << (68 - BLOCK_WORDS_LOG2)) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
    chain_index: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, chain_index: u64) -> Self {
        Self::at(master_seed, chain_index, 0)
    }

    pub fn at(master_seed: u64, chain_index: u64, counter: u64) -> Self {
        RngStream {
            master_seed,
            chain_index,
            counter,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn chain_index(&self) -> u64 {
        self.chain_index
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Same chain, positioned at `counter`.
    pub fn with_counter(&self, counter: u64) -> Self {
        Self::at(self.master_seed, self.chain_index, counter)
    }

    /// Generator positioned at the current block; advances the counter by one.
    pub fn next_block(&mut self) -> ChaCha8Rng {
        assert!(self.counter <= MAX_COUNTER, "rng counter exhausted");
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.chain_index);
        rng.set_word_pos(u128::from(self.counter) << BLOCK_WORDS_LOG2);
        self.counter += 1;
        rng
    }

    /// Standard Gaussian vector in R^d from one block.
    pub fn gaussian_draw(&mut self, d: usize) -> Point {
        let mut out = vec![0.0; d];
        self.fill_gaussian(&mut out);
        Point::from_vec_unchecked(out)
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        let mut rng = self.next_block();
        for v in out.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
    }

    /// Uniform on [0, 1) from one block.
    pub fn uniform(&mut self) -> f64 {
        self.next_block().random::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_the_address() {
        let a = RngStream::at(42, 0, 0).gaussian_draw(3);
        let b = RngStream::at(42, 0, 0).gaussian_draw(3);
        assert_eq!(a, b);
        let mut s = RngStream::new(42, 0);
        let first = s.gaussian_draw(3);
        assert_eq!(s.counter(), 1);
        let second = s.gaussian_draw(3);
        assert_eq!(first, a);
        assert_ne!(first, second);
        assert_eq!(second, RngStream::at(42, 0, 1).gaussian_draw(3));
        assert_ne!(a, RngStream::at(43, 0, 0).gaussian_draw(3));
        assert_ne!(a, RngStream::at(42, 1, 0).gaussian_draw(3));
    }

    #[test]
    fn distinct_chains_are_uncorrelated() {
        let n = 100_000;
        let mut s0 = RngStream::new(42, 0);
        let mut s1 = RngStream::new(42, 1);
        let (mut sxy, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = s0.gaussian_draw(1)[0];
            let y = s1.gaussian_draw(1)[0];
            sxy += x * y;
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
        }
        let nf = n as f64;
        let cov = sxy / nf - sx / nf * sy / nf;
        let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
        assert!(corr.abs() < 0.01, "corr = {corr}");
    }

    #[test]
    fn standard_gaussian_moments() {
        let n = 1_000_000;
        let mut s = RngStream::new(7, 3);
        let (mut m, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = s.gaussian_draw(1)[0];
            m += x;
            m2 += x * x;
        }
        let nf = n as f64;
        let mean = m / nf;
        let var = m2 / nf - mean * mean;
        assert!(mean.abs() < 0.004, "mean = {mean}");
        assert!((0.995..1.005).contains(&var), "var = {var}");
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = RngStream::new(1, 1);
        for _ in 0..1000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
