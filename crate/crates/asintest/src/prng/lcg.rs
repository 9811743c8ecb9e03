//! Congruential generators: x' = (a x + c) mod M with per-family output
//! bit selection. Arithmetic runs in u128 so any modulus up to 2^64 is
//! overflow-free.

use super::{extract_bits_value, BitSource, Word};
use crate::{Error, Result};

/// How a stepped state value becomes output bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputBits {
    /// Power-of-two modulus 2^width: the full state, `width` bits.
    All { width: u32 },
    /// Non-power-of-two modulus: first `d` bits of value/modulus,
    /// i.e. floor(value * 2^d / modulus).
    FirstBits { d: u32 },
    /// Bits `hi..=lo` of the state (inclusive, hi > lo), as used by
    /// harnesses that discard low-order congruential bits.
    Window { hi: u32, lo: u32 },
}

/// Parameters of a congruential generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcgParams {
    pub modulus: u128,
    pub mult: u64,
    pub add: u64,
    pub output: OutputBits,
}

impl LcgParams {
    /// RANDU: a = 65539, M = 2^31, multiplicative.
    pub fn randu() -> Self {
        LcgParams {
            modulus: 1 << 31,
            mult: 65539,
            add: 0,
            output: OutputBits::All { width: 31 },
        }
    }

    /// minstd: a = 16807, M = 2^31 - 1, multiplicative.
    pub fn minstd() -> Self {
        LcgParams {
            modulus: (1 << 31) - 1,
            mult: 16807,
            add: 0,
            output: OutputBits::FirstBits { d: 31 },
        }
    }

    /// minstd variant: a = 48271, M = 2^31 - 1.
    pub fn minstd48271() -> Self {
        LcgParams {
            mult: 48271,
            ..LcgParams::minstd()
        }
    }

    /// MSVC rand(): a = 214013, c = 2531011, M = 2^32, state bits 30..=23.
    pub fn msvc() -> Self {
        LcgParams {
            modulus: 1 << 32,
            mult: 214013,
            add: 2531011,
            output: OutputBits::Window { hi: 30, lo: 23 },
        }
    }

    /// BSD rand(): a = 1103515245, c = 12345, M = 2^31.
    pub fn bsd() -> Self {
        LcgParams {
            modulus: 1 << 31,
            mult: 1103515245,
            add: 12345,
            output: OutputBits::All { width: 31 },
        }
    }
}

/// One modular step.
#[inline]
pub(crate) fn congruential_step(state: u64, params: &LcgParams) -> u64 {
    let next =
        (params.mult as u128 * state as u128 + params.add as u128) % params.modulus;
    next as u64
}

/// A running congruential generator.
#[derive(Debug, Clone)]
pub struct LcgGenerator {
    params: LcgParams,
    state: u64,
}

impl LcgGenerator {
    /// # Errors
    ///
    /// `Config` if the parameters are degenerate (modulus < 2, multiplier
    /// zero, output selection inconsistent with the modulus), the seed is
    /// outside `[0, modulus)`, or the seed is zero for a multiplicative
    /// generator (the all-zero fixed point).
    pub fn new(params: LcgParams, seed: u64) -> Result<Self> {
        if params.modulus < 2 {
            return Err(Error::Config(format!(
                "modulus must be >= 2, got {}",
                params.modulus
            )));
        }
        if params.mult == 0 {
            return Err(Error::Config("multiplier must be nonzero".into()));
        }
        match params.output {
            OutputBits::All { width } => {
                if params.modulus != 1u128 << width {
                    return Err(Error::Config(format!(
                        "All{{width: {width}}} requires modulus 2^{width}"
                    )));
                }
            }
            OutputBits::FirstBits { d } => {
                if d == 0 || d > 64 || params.modulus.is_power_of_two() {
                    return Err(Error::Config(
                        "FirstBits requires 1 <= d <= 64 and a non-power-of-two modulus"
                            .into(),
                    ));
                }
            }
            OutputBits::Window { hi, lo } => {
                if hi <= lo || hi >= 64 || 1u128 << (hi + 1) > params.modulus {
                    return Err(Error::Config(format!(
                        "Window{{hi: {hi}, lo: {lo}}} out of range for modulus {}",
                        params.modulus
                    )));
                }
            }
        }
        if seed as u128 >= params.modulus {
            return Err(Error::Config(format!(
                "seed {seed} outside [0, {})",
                params.modulus
            )));
        }
        if params.add == 0 && seed == 0 {
            return Err(Error::Config(
                "seed 0 is a fixed point of a multiplicative congruence".into(),
            ));
        }
        Ok(LcgGenerator { params, state: seed })
    }

    /// Current state (after the most recent step).
    pub fn state(&self) -> u64 {
        self.state
    }

    /// Steps once and returns the new state.
    #[inline]
    pub fn step(&mut self) -> u64 {
        self.state = congruential_step(self.state, &self.params);
        self.state
    }
}

impl BitSource for LcgGenerator {
    fn next_word(&mut self) -> Result<Word> {
        let x = self.step();
        let word = match self.params.output {
            OutputBits::All { width } => Word {
                value: x,
                nbits: width,
            },
            OutputBits::FirstBits { d } => Word {
                // Parameters were validated in `new`; the call cannot fail.
                value: extract_bits_value(x, self.params.modulus, d)?,
                nbits: d,
            },
            OutputBits::Window { hi, lo } => Word {
                value: (x >> lo) & ((1u64 << (hi - lo + 1)) - 1),
                nbits: hi - lo + 1,
            },
        };
        Ok(word)
    }
}
