//! The 64-bit linear congruential generator behind every seeded routine.
//!
//! `state ← state · 6364136223846793005 + 1442695040888963407 (mod 2⁶⁴)`,
//! output = the high 31 bits (`state >> 33`). The seed is the initial state
//! after one warm-up step. Any implementation of these three lines
//! reproduces the random corpus bit for bit.

use crate::field::Scalar;

#[derive(Clone, Debug)]
pub struct Lcg {
    state: u64,
}

const MUL: u64 = 6364136223846793005;
const INC: u64 = 1442695040888963407;

impl Lcg {
    pub fn new(seed: u64) -> Self {
        let mut g = Lcg { state: seed };
        g.next_u32();
        g
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self.state.wrapping_mul(MUL).wrapping_add(INC);
        (self.state >> 33) as u32
    }

    /// Uniform-ish integer in `0..n` (modulo reduction; bias is irrelevant here).
    pub fn below(&mut self, n: u32) -> u32 {
        assert!(n > 0);
        self.next_u32() % n
    }

    /// Integer in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u32) as i64
    }

    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        self.below(den) < num
    }

    /// Rational `a/b` with `a ∈ lo..=hi`, `b ∈ 1..=den_max`.
    pub fn rational(&mut self, lo: i64, hi: i64, den_max: i64) -> Scalar {
        let a = self.range(lo, hi);
        let b = self.range(1, den_max);
        Scalar::ratio(a, b)
    }
}
