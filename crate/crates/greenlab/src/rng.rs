//! Deterministic pseudo-randomness.
//!
//! Every stochastic routine in the crate draws from [`SplitMix64`], a 64-bit
//! counter-based generator pinned here by algorithm so that results are
//! reproducible bit-for-bit across platforms and worker counts.  Parallel
//! loops never share a stream: sample `i` of a batch uses
//! `SplitMix64::substream(seed, i)`, so the values drawn are independent of
//! how the loop is scheduled.

use num_complex::Complex64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based splitmix64 generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derive the `stream`-th substream of `seed`.  Distinct `(seed, stream)`
    /// pairs give statistically independent sequences; the derivation is pure
    /// arithmetic, so workers can open substreams without coordination.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let s = mix64(seed ^ mix64(stream.wrapping_mul(GOLDEN_GAMMA).wrapping_add(1)));
        SplitMix64 { state: s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in [0, 1), 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1], safe as a `ln` argument.
    #[inline]
    fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal pair (Box-Muller; consumes exactly two draws).
    #[inline]
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Standard complex Gaussian: real and imaginary parts N(0, 1).
    #[inline]
    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        let (re, im) = self.next_gaussian_pair();
        Complex64::new(re, im)
    }

    /// Uniform on the unit circle.
    #[inline]
    pub fn next_unit_complex(&mut self) -> Complex64 {
        let theta = std::f64::consts::TAU * self.next_f64();
        Complex64::new(theta.cos(), theta.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = SplitMix64::substream(7, 3);
        let mut b = SplitMix64::substream(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = SplitMix64::substream(7, 3);
        let mut b = SplitMix64::substream(7, 4);
        let same = (0..32).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn uniform_mean_and_range() {
        let mut g = SplitMix64::new(11);
        let mut sum = 0.0;
        for _ in 0..100_000 {
            let x = g.next_f64();
            assert!((0.0..1.0).contains(&x));
            sum += x;
        }
        let mean = sum / 100_000.0;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn gaussian_moments() {
        let mut g = SplitMix64::new(5);
        let (mut sum, mut sum2) = (0.0, 0.0);
        let n = 200_000;
        for _ in 0..n {
            let (a, b) = g.next_gaussian_pair();
            sum += a + b;
            sum2 += a * a + b * b;
        }
        let mean = sum / (2 * n) as f64;
        let var = sum2 / (2 * n) as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }
}
