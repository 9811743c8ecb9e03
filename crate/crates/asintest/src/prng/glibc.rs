//! glibc random() in its default TYPE_3 configuration: a 31-word additive
//! feedback generator x_i = (x_{i-3} + x_{i-31}) mod 2^32 over a table
//! seeded by a Lehmer recurrence, with the first 310 post-table outputs
//! discarded and each emitted value right-shifted by one (31 bits).
//!
//! Output k (1-based) equals x_{k+343}: indices 0..=33 are the seeded
//! table, 34..=343 the warm-up discard. Verified word-exact against
//! glibc's random() for several seeds.

use super::{BitSource, Word};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct GlibcRandom {
    /// Ring slot j holds x_i for the most recent i with i mod 31 == j.
    ring: [u32; 31],
    /// Index of the next value to produce.
    next_i: u64,
}

impl GlibcRandom {
    /// # Errors
    ///
    /// `Config` if `seed >= 2^31`; glibc seeds are 31-bit (0 maps to 1, as
    /// in glibc itself).
    pub fn new(seed: u64) -> Result<Self> {
        if seed >= 1 << 31 {
            return Err(Error::Config(format!(
                "glibc seeds are 31-bit, got {seed}"
            )));
        }
        let seed = if seed == 0 { 1 } else { seed as u32 };

        // Lehmer table seed via Schrage's method (exact 16807 x mod 2^31-1
        // without overflow), then x_{31..33} replicate x_{0..2}.
        let mut table = [0u32; 34];
        table[0] = seed;
        for i in 1..31 {
            let x = table[i - 1] as i64;
            let hi = x / 127773;
            let lo = x % 127773;
            let mut word = 16807 * lo - 2836 * hi;
            if word < 0 {
                word += 2147483647;
            }
            table[i] = word as u32;
        }
        table[31] = table[0];
        table[32] = table[1];
        table[33] = table[2];

        let mut gen = GlibcRandom {
            ring: [0; 31],
            next_i: 34,
        };
        for (i, &x) in table.iter().enumerate() {
            gen.ring[i % 31] = x;
        }
        // Warm-up: glibc discards the first 310 generated words.
        for _ in 34..344 {
            gen.step();
        }
        Ok(gen)
    }

    /// Computes x_{next_i}, stores it, returns it.
    #[inline]
    fn step(&mut self) -> u32 {
        let i = self.next_i as usize;
        let x = self.ring[i % 31].wrapping_add(self.ring[(i - 3) % 31]);
        self.ring[i % 31] = x;
        self.next_i += 1;
        x
    }
}

impl BitSource for GlibcRandom {
    fn next_word(&mut self) -> Result<Word> {
        let x = self.step();
        Ok(Word {
            value: (x >> 1) as u64,
            nbits: 31,
        })
    }
}
