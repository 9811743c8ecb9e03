//! Random-walk accumulation of bit streams and the arcsine statistic.
//!
//! A bit b becomes the step 2b - 1; the walk position after k steps is
//! S_k. Step k counts as "above the axis" when S_k > 0 or S_{k-1} > 0,
//! so a step that touches zero inherits the side it came from: down-steps
//! landing on zero from above still count, up-steps arriving from below
//! do not. The arcsine statistic is the counted fraction, kept as an
//! exact reduced fraction so downstream equality claims (the flawed
//! generator's exact 1/2) are decidable.

use std::io::Write;

use num_rational::Ratio;

use crate::prng::BitStream;
use crate::scalar::{int, lit, Float};
use crate::{Error, Real, Result};

/// Streaming walk accumulator: position, step count, above-axis count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Walk {
    position: i64,
    steps: u64,
    above: u64,
}

impl Walk {
    pub fn new() -> Self {
        Walk::default()
    }

    /// Applies one bit (0 or 1).
    #[inline]
    pub fn feed(&mut self, bit: u8) {
        debug_assert!(bit <= 1, "bits must be 0 or 1");
        let prev = self.position;
        self.position += 2 * bit as i64 - 1;
        self.above += (self.position > 0 || prev > 0) as u64;
        self.steps += 1;
    }

    /// Applies the low `nbits` of `value`, MSB-first.
    #[inline]
    pub fn feed_word(&mut self, value: u64, nbits: u32) {
        debug_assert!(nbits <= 64);
        for i in (0..nbits).rev() {
            self.feed(((value >> i) & 1) as u8);
        }
    }

    /// Pulls exactly `nbits` bits from the stream. Surplus bits in the
    /// final word are discarded, which is fine because every sequence
    /// owns its stream.
    pub fn feed_stream(&mut self, stream: &mut BitStream, nbits: u64) -> Result<()> {
        let mut remaining = nbits;
        while remaining > 0 {
            let w = stream.next_word()?;
            if (w.nbits as u64) <= remaining {
                self.feed_word(w.value, w.nbits);
                remaining -= w.nbits as u64;
            } else {
                let take = remaining as u32;
                self.feed_word(w.value >> (w.nbits - take), take);
                remaining = 0;
            }
        }
        Ok(())
    }

    /// Current position S_k.
    pub fn position(&self) -> i64 {
        self.position
    }

    /// Number of steps applied so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Number of steps counted above the axis.
    pub fn above_steps(&self) -> u64 {
        self.above
    }

    /// The arcsine statistic as an exact reduced fraction.
    ///
    /// # Errors
    ///
    /// `Domain` when no steps have been applied.
    pub fn above_fraction(&self) -> Result<Ratio<u64>> {
        if self.steps == 0 {
            return Err(Error::Domain(
                "arcsine statistic undefined for an empty walk".into(),
            ));
        }
        Ok(Ratio::new(self.above, self.steps))
    }

    /// The arcsine statistic as a float.
    pub fn above_fraction_real(&self) -> Result<Real> {
        self.above_fraction()
            .map(|r| *r.numer() as Real / *r.denom() as Real)
    }
}

/// Law-of-the-iterated-logarithm envelope sqrt(2 k ln ln k), defined for
/// k >= 3 (ln ln k must be positive).
///
/// # Errors
///
/// `Domain` for `k < 3`.
pub fn lil_envelope<T: Float>(k: u64) -> Result<T> {
    if k < 3 {
        return Err(Error::Domain(format!(
            "lil_envelope requires k >= 3, got {k}"
        )));
    }
    let kf: T = int(k);
    Ok((lit::<T>(2.0) * kf * kf.ln().ln()).sqrt())
}

/// Decimation and labeling options for [`dump_trajectory`].
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    /// Maximum number of emitted rows (>= 1); the stride is
    /// ceil(n / max_points) and the final step is always emitted.
    pub max_points: u64,
    /// Optional sequence id column.
    pub seq: Option<u64>,
    /// Emit the CSV header line.
    pub header: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            max_points: 4096,
            seq: None,
            header: true,
        }
    }
}

/// Streams `n` bits into a walk, writing decimated CSV rows
/// `step,s,lil_upper,lil_lower` (prefixed with `seq` when configured).
/// The LIL columns are empty for steps below 3 where the envelope is
/// undefined. Returns the finished walk so callers can cross-check the
/// final position against the last emitted row.
///
/// # Errors
///
/// `Domain` for `n = 0` or `max_points = 0`; stream and I/O errors
/// propagate.
pub fn dump_trajectory<W: Write>(
    stream: &mut BitStream,
    n: u64,
    opts: &TrajectoryOptions,
    out: &mut W,
) -> Result<Walk> {
    if n == 0 {
        return Err(Error::Domain("trajectory length must be >= 1".into()));
    }
    if opts.max_points == 0 {
        return Err(Error::Domain("max_points must be >= 1".into()));
    }
    let stride = n.div_ceil(opts.max_points).max(1);
    if opts.header {
        if opts.seq.is_some() {
            writeln!(out, "seq,step,s,lil_upper,lil_lower")?;
        } else {
            writeln!(out, "step,s,lil_upper,lil_lower")?;
        }
    }
    let mut walk = Walk::new();
    for step in 1..=n {
        walk.feed(stream.next_bit()?);
        if step % stride == 0 || step == n {
            let (hi, lo) = if step >= 3 {
                let e: Real = lil_envelope(step)?;
                (format!("{e:.6e}"), format!("{:.6e}", -e))
            } else {
                (String::new(), String::new())
            };
            match opts.seq {
                Some(seq) => {
                    writeln!(out, "{seq},{step},{},{hi},{lo}", walk.position())?
                }
                None => writeln!(out, "{step},{},{hi},{lo}", walk.position())?,
            }
        }
    }
    Ok(walk)
}
