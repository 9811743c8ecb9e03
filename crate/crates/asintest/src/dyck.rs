//! Uniform Dyck-path sampling through the cycle lemma, and the `Flawed`
//! adversarial generator family built on it.
//!
//! A Dyck path of length 2n is a balanced bit vector whose walk never
//! drops below zero. Rotating any (2n+1)-bit vector that ends at -1
//! around the first minimum of its walk yields a Dyck path, and every
//! Dyck path arises from exactly 2n+1 such vectors, so permuting n+1
//! zeros and n ones uniformly and rotating samples Dyck paths uniformly.
//!
//! `Flawed` wraps an inner generator: most seeds pass the inner stream
//! through untouched, but every `period`-th seed emits a doctored
//! 2^N-bit block. The block's first half comes from the inner generator
//! (first quarter raw, second quarter the negated permutation of the
//! first, so the half is balanced); the second half replaces each
//! maximal same-sign excursion run of the first half with a fresh Dyck
//! path of the same length reflected to the opposite side of the axis,
//! in shuffled order. The block therefore spends exactly half its steps
//! above the axis while remaining locally random, which first-level
//! statistics miss and the second-level arcsine test catches.

use serde::{Deserialize, Serialize};

use crate::prng::{random_permutation, BitSource, BitStream, GeneratorSpec, Word};
use crate::{Error, Result};

/// Catalan number C_n = binom(2n, n) / (n + 1), the number of Dyck paths
/// of length 2n.
///
/// # Errors
///
/// `Domain` when the result exceeds `u64::MAX` (first at n = 37).
pub fn catalan(half_n: u32) -> Result<u64> {
    let mut c: u128 = 1;
    for i in 0..half_n as u128 {
        // C_{i+1} = C_i * 2(2i+1) / (i+2); exact at every step.
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    u64::try_from(c)
        .map_err(|_| Error::Domain(format!("catalan({half_n}) exceeds 64 bits")))
}

/// A balanced bit vector whose walk never drops below zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyckPath {
    bits: Vec<u8>,
}

impl DyckPath {
    /// Validates the prefix condition: every prefix has at least as many
    /// ones as zeros, and the total counts match.
    ///
    /// # Errors
    ///
    /// `Domain` on odd length, non-bit entries, a prefix with more zeros
    /// than ones, or an unbalanced total.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "Dyck path length must be even, got {}",
                bits.len()
            )));
        }
        let mut height: i64 = 0;
        for (k, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::Domain(format!("non-bit value {b} at index {k}")));
            }
            height += 2 * b as i64 - 1;
            if height < 0 {
                return Err(Error::Domain(format!(
                    "prefix of length {} drops below zero",
                    k + 1
                )));
            }
        }
        if height != 0 {
            return Err(Error::Domain(format!(
                "unbalanced bit counts (walk ends at {height})"
            )));
        }
        Ok(DyckPath { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    /// Half the path length (the n of C_n).
    pub fn half_len(&self) -> usize {
        self.bits.len() / 2
    }
}

/// The cycle-lemma rotation: takes a (2n+1)-bit vector with n+1 zeros
/// and n ones (walk ends at -1), finds the first index t at which the
/// walk attains its minimum, drops bit t and rotates the remainder to
/// start right after it.
///
/// # Errors
///
/// `Domain` on even length, non-bit entries, or wrong composition.
pub fn rotate_to_dyck(input: &[u8]) -> Result<DyckPath> {
    if input.len().is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "rotation input length must be odd, got {}",
            input.len()
        )));
    }
    let ones = input.iter().try_fold(0usize, |acc, &b| match b {
        0 => Ok(acc),
        1 => Ok(acc + 1),
        other => Err(Error::Domain(format!("non-bit value {other}"))),
    })?;
    if 2 * ones + 1 != input.len() {
        return Err(Error::Domain(format!(
            "rotation input needs {} ones in {} bits, got {ones}",
            input.len() / 2,
            input.len()
        )));
    }
    let mut height: i64 = 0;
    let mut min_height = i64::MAX;
    let mut min_at = 0;
    for (k, &b) in input.iter().enumerate() {
        height += 2 * b as i64 - 1;
        // Strict comparison keeps the first index attaining the minimum.
        if height < min_height {
            min_height = height;
            min_at = k;
        }
    }
    let mut bits = Vec::with_capacity(input.len() - 1);
    bits.extend_from_slice(&input[min_at + 1..]);
    bits.extend_from_slice(&input[..min_at]);
    DyckPath::new(bits)
}

/// Samples a uniform Dyck path of length `2 * half_n` by permuting
/// half_n + 1 zeros and half_n ones with stream randomness and rotating;
/// with `reflect` set, every bit is flipped, mirroring the path below
/// the axis.
///
/// # Errors
///
/// Stream errors propagate.
pub fn sample_dyck_path(
    half_n: usize,
    stream: &mut BitStream,
    reflect: bool,
) -> Result<Vec<u8>> {
    let len = 2 * half_n + 1;
    let perm = random_permutation(stream, len)?;
    let arranged: Vec<u8> = perm
        .iter()
        .map(|&src| u8::from(src as usize > half_n))
        .collect();
    let mut bits = rotate_to_dyck(&arranged)?.into_bits();
    if reflect {
        for b in &mut bits {
            *b ^= 1;
        }
    }
    Ok(bits)
}

/// Maximal runs of constant excursion sign D_k over a bit vector, where
/// D_k is 1 when the walk segment between steps k-1 and k lies above the
/// axis (ties inherit the previous sign).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignSegments {
    /// Right endpoints r_1 < ... < r_w (1-based, inclusive); the last is
    /// always the input length.
    pub ends: Vec<usize>,
    /// Per-segment sign D_{r_i}: true when the segment lies above.
    pub above: Vec<bool>,
}

impl SignSegments {
    /// Number of segments w.
    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    /// 0-based half-open index range of segment `i` for slicing.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        let start = if i == 0 { 0 } else { self.ends[i - 1] };
        start..self.ends[i]
    }
}

/// Splits a bit vector into maximal constant-D runs.
///
/// # Errors
///
/// `Domain` on non-bit entries.
pub fn sign_segments(bits: &[u8]) -> Result<SignSegments> {
    let mut ends = Vec::new();
    let mut above = Vec::new();
    let mut height: i64 = 0;
    let mut prev_d: Option<bool> = None;
    for (k, &b) in bits.iter().enumerate() {
        if b > 1 {
            return Err(Error::Domain(format!("non-bit value {b} at index {k}")));
        }
        let prev_height = height;
        height += 2 * b as i64 - 1;
        let d = height > 0 || prev_height > 0;
        if prev_d.is_some_and(|p| p != d) {
            ends.push(k);
            above.push(prev_d.unwrap());
        }
        prev_d = Some(d);
    }
    if let Some(d) = prev_d {
        ends.push(bits.len());
        above.push(d);
    }
    Ok(SignSegments { ends, above })
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sentinel segment index for the two permutation call sites, far above
/// any real segment index (segments are 1-based up to 2^{N-1}).
const PERM_SITE: u64 = u64::MAX;

/// Derives the subsidiary-stream seed for one call site of the block
/// construction. Each (bit, index) pair names a distinct site, so inner
/// streams never alias each other or the raw seed.
fn subsidiary_hash(seed: u64, bit: bool, index: u64) -> u64 {
    let tagged = mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    mix64(tagged ^ ((index << 1) | u64::from(bit)))
}

/// Rebuilds the second half of a block from a balanced first half: each
/// maximal same-sign run becomes a freshly sampled Dyck path of equal
/// length reflected to the opposite side, and the rebuilt segments are
/// concatenated in shuffled order. The returned half spends exactly as
/// many steps above the axis as the input spent below, and vice versa.
///
/// # Errors
///
/// `Config` on a length/balance violation or unusable inner generator.
pub fn dyck_paths_fill(
    block_log2: u32,
    first_half: &[u8],
    inner: &GeneratorSpec,
    seed: u64,
) -> Result<Vec<u8>> {
    if !(3..=30).contains(&block_log2) {
        return Err(Error::Config(format!(
            "block log-length must be in 3..=30, got {block_log2}"
        )));
    }
    let half_len = 1usize << (block_log2 - 1);
    if first_half.len() != half_len {
        return Err(Error::Config(format!(
            "first half must hold 2^{} = {half_len} bits, got {}",
            block_log2 - 1,
            first_half.len()
        )));
    }
    let ones: usize = first_half.iter().map(|&b| b as usize).sum();
    if 2 * ones != first_half.len() {
        return Err(Error::Config(format!(
            "first half must be balanced, got {ones} ones in {} bits",
            first_half.len()
        )));
    }
    let segments = sign_segments(first_half)?;
    let mut rebuilt = Vec::with_capacity(segments.len());
    for i in 0..segments.len() {
        let seg_len = segments.range(i).len();
        // Sign flips happen only at even walk indices, so every run of a
        // balanced vector has even length.
        debug_assert!(seg_len % 2 == 0);
        let sign = segments.above[i];
        let mut stream =
            inner.stream_from_hash(subsidiary_hash(seed, sign, i as u64 + 1))?;
        rebuilt.push(sample_dyck_path(seg_len / 2, &mut stream, sign)?);
    }
    let mut shuffle_stream =
        inner.stream_from_hash(subsidiary_hash(seed, true, PERM_SITE))?;
    let order = random_permutation(&mut shuffle_stream, segments.len())?;
    Ok(assemble(&rebuilt, &order))
}

/// Concatenates segment vectors in the given order.
fn assemble(parts: &[Vec<u8>], order: &[u32]) -> Vec<u8> {
    let total = parts.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(total);
    for &i in order {
        out.extend_from_slice(&parts[i as usize]);
    }
    out
}

/// Emits the negated permutation of a quarter block: out[i] = 1 -
/// quarter[perm[i]], guaranteeing the quarter pair is balanced overall.
fn negate_permute(quarter: &[u8], perm: &[u32]) -> Vec<u8> {
    debug_assert_eq!(quarter.len(), perm.len());
    perm.iter().map(|&j| 1 - quarter[j as usize]).collect()
}

/// Parameters of the `Flawed` adversarial family: an inner generator, a
/// block log-length N, and the flawed-seed period ceil(1/tau).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlawedParams {
    pub inner: Box<GeneratorSpec>,
    /// N: every seed yields one 2^N-bit block.
    pub block_log2: u32,
    /// Seeds divisible by this take the flawed branch; the flawed
    /// fraction tau is its reciprocal.
    pub period: u64,
}

impl FlawedParams {
    /// # Errors
    ///
    /// `Config` unless 3 <= block_log2 <= 30, period >= 1, and the inner
    /// generator is a plain seedable family.
    pub fn new(inner: GeneratorSpec, block_log2: u32, period: u64) -> Result<Self> {
        let params = FlawedParams {
            inner: Box::new(inner),
            block_log2,
            period,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds params from a target flawed fraction tau in (0, 1]; the
    /// period is ceil(1/tau), except that reciprocals within 1e-6 of an
    /// integer snap to it so that tau = 1/66 does not round up to 67
    /// through the float division.
    ///
    /// # Errors
    ///
    /// `Config` on tau outside (0, 1] or invalid remaining params.
    pub fn from_tau(inner: GeneratorSpec, block_log2: u32, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Config(format!(
                "flawed fraction tau must be in (0, 1], got {tau}"
            )));
        }
        let recip = 1.0 / tau;
        let nearest = recip.round();
        let period = if (recip - nearest).abs() < 1e-6 {
            nearest
        } else {
            recip.ceil()
        };
        FlawedParams::new(inner, block_log2, period as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=30).contains(&self.block_log2) {
            return Err(Error::Config(format!(
                "block log-length must be in 3..=30, got {}",
                self.block_log2
            )));
        }
        if self.period == 0 {
            return Err(Error::Config("flawed period must be >= 1".into()));
        }
        match *self.inner {
            GeneratorSpec::Flawed(_) => {
                Err(Error::Config("flawed generators do not nest".into()))
            }
            GeneratorSpec::BitFile(_) => Err(Error::Config(
                "bit files cannot back the flawed family (no reseeding)".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Block size 2^N in bits.
    pub fn block_bits(&self) -> u64 {
        1u64 << self.block_log2
    }

    /// Effective flawed fraction 1/period.
    pub fn tau(&self) -> f64 {
        1.0 / self.period as f64
    }

    /// Whether this seed takes the flawed branch.
    pub fn is_flawed_seed(&self, seed: u64) -> bool {
        seed.is_multiple_of(self.period)
    }
}

/// Generates one full 2^N-bit block for `seed`: the inner stream's
/// prefix for pass-through seeds, the doctored construction otherwise.
///
/// # Errors
///
/// `Config` on invalid params or a seed outside the inner family's
/// domain; stream errors propagate.
pub fn flawed_block(params: &FlawedParams, seed: u64) -> Result<Vec<u8>> {
    params.validate()?;
    let block = params.block_bits() as usize;
    if !params.is_flawed_seed(seed) {
        return params.inner.stream(seed)?.take_bits(block);
    }
    let quarter = block / 4;
    let mut bits = params.inner.stream(seed)?.take_bits(quarter)?;
    let mut perm_stream = params
        .inner
        .stream_from_hash(subsidiary_hash(seed, false, PERM_SITE))?;
    let perm = random_permutation(&mut perm_stream, quarter)?;
    let negated = negate_permute(&bits, &perm);
    bits.extend_from_slice(&negated);
    let second_half = dyck_paths_fill(params.block_log2, &bits, &params.inner, seed)?;
    bits.extend_from_slice(&second_half);
    Ok(bits)
}

/// Finite source over one pre-generated block, bits packed MSB-first
/// into 64-bit words.
struct BlockSource {
    words: Vec<u64>,
    total_bits: u64,
    emitted: u64,
}

impl BlockSource {
    fn from_bits(bits: &[u8]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            words[i / 64] |= (b as u64) << (63 - (i % 64));
        }
        BlockSource {
            words,
            total_bits: bits.len() as u64,
            emitted: 0,
        }
    }
}

impl BitSource for BlockSource {
    fn next_word(&mut self) -> Result<Word> {
        let remaining = self.total_bits - self.emitted;
        if remaining == 0 {
            return Err(Error::Exhausted {
                position: self.total_bits,
            });
        }
        let nbits = remaining.min(64) as u32;
        let word = self.words[(self.emitted / 64) as usize];
        self.emitted += nbits as u64;
        Ok(Word {
            value: word >> (64 - nbits),
            nbits,
        })
    }
}

/// Pass-through wrapper that stops after the 2^N-bit block budget, so
/// both branches of the family expose identical exhaustion behavior.
struct TruncatedSource {
    inner: Box<dyn BitSource>,
    remaining: u64,
    total_bits: u64,
}

impl BitSource for TruncatedSource {
    fn next_word(&mut self) -> Result<Word> {
        if self.remaining == 0 {
            return Err(Error::Exhausted {
                position: self.total_bits,
            });
        }
        let w = self.inner.next_word()?;
        if w.nbits as u64 <= self.remaining {
            self.remaining -= w.nbits as u64;
            return Ok(w);
        }
        // Keep only the leading bits of the final word.
        let keep = self.remaining as u32;
        self.remaining = 0;
        Ok(Word {
            value: w.value >> (w.nbits - keep),
            nbits: keep,
        })
    }
}

/// Spawns the bit source for one seed of the family: a truncated inner
/// stream for pass-through seeds, the doctored block otherwise. Either
/// way the source delivers exactly 2^N bits.
///
/// # Errors
///
/// `Config` on invalid params or out-of-domain seed.
pub(crate) fn flawed_source(
    params: &FlawedParams,
    seed: u64,
) -> Result<Box<dyn BitSource>> {
    params.validate()?;
    if params.is_flawed_seed(seed) {
        let bits = flawed_block(params, seed)?;
        return Ok(Box::new(BlockSource::from_bits(&bits)));
    }
    Ok(Box::new(TruncatedSource {
        inner: params.inner.source(seed)?,
        remaining: params.block_bits(),
        total_bits: params.block_bits(),
    }))
}
