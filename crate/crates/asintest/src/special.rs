//! Log-gamma and the regularized incomplete gamma function.
//!
//! `reg_gamma_q(a, x)` is the survival function of the Gamma(a, 1)
//! distribution; with `a = dof/2`, `x = t/2` it is the chi-square p-value
//! used by the second-level test. Two evaluation routes are used depending
//! on the argument region:
//!
//! * `x < a + 1`: power series for the lower function P(a, x), then
//!   Q = 1 - P (the series converges fast and P is the small quantity's
//!   complement in this region);
//! * `x >= a + 1`: modified Lentz continued fraction for Q directly, which
//!   is the numerically stable route in the upper tail where Q is tiny.
//!
//! Iterations run until the relative change drops below 1e-12; end-to-end
//! absolute error of the composed p-value is below 1e-10 across the tested
//! range (verified against a 50-digit oracle).

// Reference constants keep every published digit, even past f64 precision.
#![allow(clippy::excessive_precision)]

use crate::scalar::{lit, Float};
use crate::{Error, Result};

/// Lanczos approximation, g = 7, 9 coefficients.
/// Relative error below 1e-13 over the positive reals.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
///
/// # Errors
///
/// `Domain` if `x` is NaN, infinite, or not strictly positive.
pub fn ln_gamma<T: Float>(x: T) -> Result<T> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::Domain(format!(
            "ln_gamma requires finite x > 0, got {x:?}"
        )));
    }
    // Reflection keeps the Lanczos sum on x >= 0.5 where it is accurate.
    if x < lit(0.5) {
        let pi = T::PI();
        let reflected = ln_gamma(T::one() - x)?;
        return Ok((pi / (pi * x).sin()).ln() - reflected);
    }
    let z = x - T::one();
    let mut acc: T = lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += lit::<T>(c) / (z + lit(i as f64));
    }
    let t = z + lit(LANCZOS_G + 0.5);
    let half_ln_two_pi = lit::<T>(0.918_938_533_204_672_74); // ln(2*pi)/2
    Ok(half_ln_two_pi + (z + lit(0.5)) * t.ln() - t + acc.ln())
}

/// Regularized upper incomplete gamma function Q(a, x).
///
/// Q(a, 0) = 1 and Q(a, x) decreases to 0 as x grows. Requires `a > 0`
/// and `x >= 0`.
///
/// # Errors
///
/// `Domain` on arguments outside that region; `Unsupported` if the
/// iteration fails to converge (not observed for any finite input).
pub fn reg_gamma_q<T: Float>(a: T, x: T) -> Result<T> {
    if !a.is_finite() || a <= T::zero() {
        return Err(Error::Domain(format!(
            "reg_gamma_q requires finite a > 0, got a = {a:?}"
        )));
    }
    if !x.is_finite() || x < T::zero() {
        return Err(Error::Domain(format!(
            "reg_gamma_q requires finite x >= 0, got x = {x:?}"
        )));
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    if x < a + T::one() {
        Ok(T::one() - gamma_p_series(a, x)?)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

/// Relative-change stopping tolerance; floored at machine epsilon so the
/// same kernel terminates for f32.
#[inline]
fn tol<T: Float>() -> T {
    lit::<T>(1e-12).max(T::epsilon())
}

const MAX_ITER: usize = 10_000;

/// Prefactor x^a e^{-x} / Gamma(a), evaluated in log space.
#[inline]
fn gamma_prefactor<T: Float>(a: T, x: T) -> Result<T> {
    Ok((a * x.ln() - x - ln_gamma(a)?).exp())
}

/// Series expansion of the lower function P(a, x), valid for x < a + 1.
fn gamma_p_series<T: Float>(a: T, x: T) -> Result<T> {
    let mut term = T::one() / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..MAX_ITER {
        denom += T::one();
        term = term * x / denom;
        sum += term;
        if term.abs() < sum.abs() * tol() {
            return Ok(sum * gamma_prefactor(a, x)?);
        }
    }
    Err(Error::Unsupported(format!(
        "gamma series failed to converge for a = {a:?}, x = {x:?}"
    )))
}

/// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
fn gamma_q_continued_fraction<T: Float>(a: T, x: T) -> Result<T> {
    // Smallest number safe to divide by without overflow in the updates.
    let floor = T::min_positive_value() / T::epsilon();
    let mut b = x + T::one() - a;
    let mut c = T::one() / floor;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -lit::<T>(i as f64) * (lit::<T>(i as f64) - a);
        b += lit(2.0);
        d = an * d + b;
        if d.abs() < floor {
            d = floor;
        }
        c = b + an / c;
        if c.abs() < floor {
            c = floor;
        }
        d = T::one() / d;
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < tol() {
            return Ok(gamma_prefactor(a, x)? * h);
        }
    }
    Err(Error::Unsupported(format!(
        "gamma continued fraction failed to converge for a = {a:?}, x = {x:?}"
    )))
}
