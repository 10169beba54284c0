//! Seeded randomness that other implementations can reproduce exactly.
//!
//! The generator is ChaCha20 (RFC 8439 block function, 20 rounds) keyed with
//! the seed as 8 little-endian bytes followed by 24 zero bytes, zero nonce and
//! block counter starting at 0. Each 64-bit draw is two consecutive
//! little-endian 32-bit keystream words, low word first. Everything else is
//! derived from those draws with explicit formulas:
//!
//! * uniform on `[0, 1)`: `(x >> 11) · 2⁻⁵³`;
//! * uniform on `(0, 1]`: `((x >> 11) + 1) · 2⁻⁵³`;
//! * standard normal: Box–Muller cosine branch,
//!   `√(−2 ln u₁) · cos(2π u₂)` with `u₁` from `(0, 1]` and `u₂` from `[0, 1)`;
//! * integer below `n`: high 64 bits of the 128-bit product `x · n`;
//! * shuffles: Fisher–Yates from the last index down.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha20Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        SeededRng(ChaCha20Rng::from_seed(key))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_MINUS_53
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * TWO_POW_MINUS_53
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `count` distinct indices from `0..n` in draw order (partial
    /// Fisher–Yates over `0..n`).
    pub fn sample_indices(&mut self, n: usize, count: usize) -> Vec<usize> {
        debug_assert!(count <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        pool
    }
}
