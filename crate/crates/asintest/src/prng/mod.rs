//! Bit generators under test and the word/bit stream plumbing.
//!
//! Every generator yields words of up to 64 bits; bits are consumed
//! MSB-first within each word, so a generator emitting d-bit values
//! produces the bit sequence b_1 b_2 ... b_d per value with b_1 the most
//! significant extracted bit. [`BitStream`] adapts word sources to bit
//! granularity and keeps a running bit count for error reporting.

mod bitfile;
mod glibc;
mod lcg;
mod mt64;

pub use bitfile::{pack_msb, write_bit_file, BitFileSource};
pub use glibc::GlibcRandom;
pub use lcg::{LcgGenerator, LcgParams, OutputBits};
pub use mt64::Mt19937_64;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dyck::{self, FlawedParams};
use crate::{Error, Result};

/// One generator output: the low `nbits` of `value` are valid and are
/// consumed MSB-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Word {
    pub value: u64,
    pub nbits: u32,
}

/// A deterministic source of output words.
pub trait BitSource: Send {
    /// Produces the next word, or `Error::Exhausted` for finite sources.
    fn next_word(&mut self) -> Result<Word>;
}

/// Bit-granular adapter over a [`BitSource`].
pub struct BitStream {
    src: Box<dyn BitSource>,
    buf: u64,
    buf_len: u32,
    consumed: u64,
}

impl BitStream {
    pub fn new(src: Box<dyn BitSource>) -> Self {
        BitStream {
            src,
            buf: 0,
            buf_len: 0,
            consumed: 0,
        }
    }

    /// Number of bits handed out so far.
    #[inline]
    pub fn bits_consumed(&self) -> u64 {
        self.consumed
    }

    /// Next single bit (0 or 1), MSB-first within the underlying words.
    #[inline]
    pub fn next_bit(&mut self) -> Result<u8> {
        if self.buf_len == 0 {
            let w = self.src.next_word()?;
            debug_assert!((1..=64).contains(&w.nbits));
            self.buf = w.value;
            self.buf_len = w.nbits;
        }
        self.buf_len -= 1;
        self.consumed += 1;
        Ok(((self.buf >> self.buf_len) & 1) as u8)
    }

    /// Next word: drains any partially consumed word first, otherwise
    /// forwards a full word from the source.
    #[inline]
    pub fn next_word(&mut self) -> Result<Word> {
        if self.buf_len > 0 {
            let nbits = self.buf_len;
            let value = self.buf & mask(nbits);
            self.buf_len = 0;
            self.consumed += nbits as u64;
            return Ok(Word { value, nbits });
        }
        let w = self.src.next_word()?;
        self.consumed += w.nbits as u64;
        Ok(w)
    }

    /// Collects exactly `n` bits into a 0/1 byte vector.
    pub fn take_bits(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.next_bit()?);
        }
        Ok(out)
    }
}

#[inline]
fn mask(nbits: u32) -> u64 {
    if nbits >= 64 {
        u64::MAX
    } else {
        (1u64 << nbits) - 1
    }
}

/// Uniform integer in `[0, bound)` by rejection sampling on
/// `ceil(log2(bound))`-bit chunks; `bound = 1` consumes no bits.
///
/// # Errors
///
/// `Domain` if `bound = 0`; stream errors propagate.
pub fn uniform_int(stream: &mut BitStream, bound: u64) -> Result<u64> {
    if bound == 0 {
        return Err(Error::Domain("uniform_int requires bound >= 1".into()));
    }
    if bound == 1 {
        return Ok(0);
    }
    let nbits = 64 - (bound - 1).leading_zeros();
    loop {
        let mut v: u64 = 0;
        for _ in 0..nbits {
            v = (v << 1) | stream.next_bit()? as u64;
        }
        if v < bound {
            return Ok(v);
        }
    }
}

/// Uniform permutation of `{0, ..., n-1}` by a Fisher-Yates shuffle
/// running from the top index down, drawing each swap target with
/// [`uniform_int`].
///
/// # Errors
///
/// `Domain` if `n = 0`; stream errors propagate.
pub fn random_permutation(stream: &mut BitStream, n: usize) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::Domain("random_permutation requires n >= 1".into()));
    }
    if n > u32::MAX as usize {
        return Err(Error::Unsupported(format!(
            "random_permutation supports n <= {}, got {n}",
            u32::MAX
        )));
    }
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = uniform_int(stream, i as u64 + 1)? as usize;
        perm.swap(i, j);
    }
    Ok(perm)
}

/// Maps a generator value in `[0, modulus)` to its output bits.
///
/// Power-of-two modulus `2^k`: the value's k bits verbatim, and `d` must
/// equal `k` (anything else is a configuration error, not a silent
/// truncation). Other moduli: the first `d` bits of the binary expansion
/// of `value / modulus`, i.e. `floor(value * 2^d / modulus)`.
///
/// # Errors
///
/// `Domain` if `value >= modulus` or `modulus < 2`; `Unsupported` for
/// `d = 0` or `d > 64`; `Config` when `d != k` for a power-of-two modulus.
pub fn extract_bits_value(value: u64, modulus: u128, d: u32) -> Result<u64> {
    if modulus < 2 {
        return Err(Error::Domain(format!(
            "extract_bits requires modulus >= 2, got {modulus}"
        )));
    }
    if (value as u128) >= modulus {
        return Err(Error::Domain(format!(
            "extract_bits requires value < modulus, got {value} >= {modulus}"
        )));
    }
    if d == 0 || d > 64 {
        return Err(Error::Unsupported(format!(
            "extract_bits supports 1 <= d <= 64, got {d}"
        )));
    }
    if modulus.is_power_of_two() {
        let k = modulus.trailing_zeros();
        if d != k {
            return Err(Error::Config(format!(
                "modulus 2^{k} emits exactly {k} bits, requested d = {d}"
            )));
        }
        return Ok(value);
    }
    // floor(value * 2^d / modulus); value < modulus <= 2^64 and d <= 64
    // keep the product within u128.
    Ok(((value as u128) << d).checked_div(modulus).unwrap() as u64)
}

/// [`extract_bits_value`] expanded into a 0/1 vector, MSB-first.
pub fn extract_bits(value: u64, modulus: u128, d: u32) -> Result<Vec<u8>> {
    let v = extract_bits_value(value, modulus, d)?;
    Ok((0..d).rev().map(|i| ((v >> i) & 1) as u8).collect())
}

/// A generator configuration: enough to spawn any number of deterministic
/// streams from seeds. Serializable so campaign configs round-trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    /// RANDU: x' = 65539 x mod 2^31, all 31 state bits per step.
    Randu,
    /// Lehmer/minstd with multiplier 16807 modulo 2^31 - 1, 31 bits per
    /// step by the first-bits rule.
    Minstd,
    /// minstd variant with multiplier 48271.
    Minstd48271,
    /// MSVC rand(): x' = 214013 x + 2531011 mod 2^32, emitting state bits
    /// 30..=23 (8 bits) per step.
    MsvcRand,
    /// BSD rand(): x' = 1103515245 x + 12345 mod 2^31, all 31 bits.
    BsdRand,
    /// glibc random() default (TYPE_3 additive feedback), 31 bits per step.
    GlibcRandom,
    /// MT19937-64, 64 bits per step.
    Mt19937_64,
    /// Dyck-path adversarial wrapper around an inner generator.
    Flawed(FlawedParams),
    /// Raw bit file, bytes streamed MSB-first; the seed is ignored.
    BitFile(PathBuf),
}

impl GeneratorSpec {
    /// Stable human-readable name used in reports and file names.
    pub fn name(&self) -> String {
        match self {
            GeneratorSpec::Randu => "randu".into(),
            GeneratorSpec::Minstd => "minstd".into(),
            GeneratorSpec::Minstd48271 => "minstd48271".into(),
            GeneratorSpec::MsvcRand => "msvc".into(),
            GeneratorSpec::BsdRand => "bsd".into(),
            GeneratorSpec::GlibcRandom => "glibc".into(),
            GeneratorSpec::Mt19937_64 => "mt19937-64".into(),
            GeneratorSpec::Flawed(p) => format!(
                "flawed-N{}-p{}-{}",
                p.block_log2,
                p.period,
                p.inner.name()
            ),
            GeneratorSpec::BitFile(path) => format!("bitfile:{}", path.display()),
        }
    }

    /// Spawns a bit stream seeded with `seed`.
    ///
    /// # Errors
    ///
    /// `Config` if the seed is outside the family's domain (zero for
    /// multiplicative-only congruences, `>= 2^31` for glibc) or the
    /// generator parameters are unusable; `Io` for bit files.
    pub fn stream(&self, seed: u64) -> Result<BitStream> {
        Ok(BitStream::new(self.source(seed)?))
    }

    pub(crate) fn source(&self, seed: u64) -> Result<Box<dyn BitSource>> {
        match self {
            GeneratorSpec::Randu => {
                Ok(Box::new(LcgGenerator::new(LcgParams::randu(), seed)?))
            }
            GeneratorSpec::Minstd => {
                Ok(Box::new(LcgGenerator::new(LcgParams::minstd(), seed)?))
            }
            GeneratorSpec::Minstd48271 => Ok(Box::new(LcgGenerator::new(
                LcgParams::minstd48271(),
                seed,
            )?)),
            GeneratorSpec::MsvcRand => {
                Ok(Box::new(LcgGenerator::new(LcgParams::msvc(), seed)?))
            }
            GeneratorSpec::BsdRand => {
                Ok(Box::new(LcgGenerator::new(LcgParams::bsd(), seed)?))
            }
            GeneratorSpec::GlibcRandom => Ok(Box::new(GlibcRandom::new(seed)?)),
            GeneratorSpec::Mt19937_64 => Ok(Box::new(Mt19937_64::new(seed))),
            GeneratorSpec::Flawed(params) => dyck::flawed_source(params, seed),
            GeneratorSpec::BitFile(path) => Ok(Box::new(BitFileSource::open(path)?)),
        }
    }

    /// Spawns a stream from a 64-bit hash, folding the hash into the
    /// family's seed domain (used by the flawed generator's internal
    /// subsidiary streams, which must accept any 64-bit value).
    pub(crate) fn stream_from_hash(&self, hash: u64) -> Result<BitStream> {
        let seed = match self {
            GeneratorSpec::Randu | GeneratorSpec::Minstd | GeneratorSpec::Minstd48271 => {
                let m = match self {
                    GeneratorSpec::Randu => 1u64 << 31,
                    _ => (1u64 << 31) - 1,
                };
                let s = hash % m;
                if s == 0 {
                    1
                } else {
                    s
                }
            }
            GeneratorSpec::MsvcRand => hash & 0xFFFF_FFFF,
            GeneratorSpec::BsdRand => hash & 0x7FFF_FFFF,
            GeneratorSpec::GlibcRandom => {
                let s = hash & 0x7FFF_FFFF;
                if s == 0 {
                    1
                } else {
                    s
                }
            }
            _ => hash,
        };
        self.stream(seed)
    }
}
