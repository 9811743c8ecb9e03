//! The arcsine law, its exact finite-n counterpart, and the error bound
//! separating them.
//!
//! For a simple random walk of n = 2*half_n steps, the fraction of steps
//! spent above the axis has the exact distribution
//! `P(L = 2k) = binom(2k, k) * binom(2(half_n-k), half_n-k) * 2^{-2 half_n}`
//! and converges in law to the arcsine distribution with cdf
//! `F(t) = (2/pi) asin(sqrt(t))`. The sup-distance between the two at the
//! binning partition's endpoints is bounded by `C(s) / n` with
//! `C(s) = (4/(3 pi)) (2 - 3/(2s)) (4 s^2 / (2s - 1))^{3/2}`,
//! which is what makes a second-level test at finite n honest: the bound
//! must be small against the binomial noise of the bin frequencies.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::scalar::{int, lit, Float};
use crate::special::ln_gamma;
use crate::{Error, Result};

/// Largest `half_n` accepted by the log-space sojourn routines.
pub const MAX_HALF_N: u64 = 1 << 20;

/// Largest `half_n` accepted by the exact rational sojourn routine.
pub const MAX_EXACT_HALF_N: u64 = 32;

/// Arcsine cdf `F(x) = (2/pi) asin(sqrt(x))` on `[0, 1]`.
///
/// # Errors
///
/// `Domain` if `x` is NaN or outside `[0, 1]` (no clamping).
pub fn cdf<T: Float>(x: T) -> Result<T> {
    check_unit_interval(x, "cdf")?;
    Ok(lit::<T>(2.0) / T::PI() * x.sqrt().asin())
}

/// Arcsine density `1 / (pi sqrt(x (1 - x)))` on the open interval (0, 1).
///
/// # Errors
///
/// `Domain` if `x` is NaN or outside the open interval; the density
/// diverges at the endpoints, so they are rejected rather than returned
/// as infinities.
pub fn pdf<T: Float>(x: T) -> Result<T> {
    if !(x > T::zero() && x < T::one()) {
        return Err(Error::Domain(format!(
            "pdf requires 0 < x < 1, got {x:?}"
        )));
    }
    Ok(T::one() / (T::PI() * (x * (T::one() - x)).sqrt()))
}

/// Upper-tail p-value `1 - F(s)` of an observed arcsine statistic.
///
/// # Errors
///
/// `Domain` if `s` is NaN or outside `[0, 1]`.
pub fn p_value<T: Float>(s: T) -> Result<T> {
    check_unit_interval(s, "p_value")?;
    Ok(T::one() - cdf(s)?)
}

/// Berry-Esseen style constant `C(s)` for a partition with `s` interior
/// cells: the sup-gap between the exact and limiting cdf at the partition
/// endpoints is at most `C(s) / n`.
///
/// # Errors
///
/// `Domain` if `s < 2` (the partition itself requires `s >= 2`).
pub fn berry_esseen_constant<T: Float>(s: u32) -> Result<T> {
    if s < 2 {
        return Err(Error::Domain(format!(
            "berry_esseen_constant requires s >= 2, got {s}"
        )));
    }
    let s_t: T = int(s as u64);
    let two = lit::<T>(2.0);
    let lead = lit::<T>(4.0) / (lit::<T>(3.0) * T::PI());
    let mid = two - lit::<T>(3.0) / (two * s_t);
    let tail = (lit::<T>(4.0) * s_t * s_t / (two * s_t - T::one())).powf(lit(1.5));
    Ok(lead * mid * tail)
}

/// The cdf approximation-error certificate for a given walk length and
/// partition size: `bound = c / n` with `c = C(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfErrorBound<T> {
    /// Number of interior partition cells.
    pub s: u32,
    /// The constant `C(s)`.
    pub c: T,
    /// Walk length (steps), even.
    pub n: u64,
    /// The sup-gap bound `c / n` at the partition endpoints.
    pub bound: T,
}

/// Computes the [`CdfErrorBound`] certificate.
///
/// # Errors
///
/// `Domain` if `s < 2` or `n` is odd or zero; the exact distribution is
/// only defined for even walk lengths.
pub fn cdf_error_bound<T: Float>(s: u32, n: u64) -> Result<CdfErrorBound<T>> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "cdf_error_bound requires even n >= 2, got {n}"
        )));
    }
    let c = berry_esseen_constant::<T>(s)?;
    let bound = c / int(n);
    Ok(CdfErrorBound { s, c, n, bound })
}

/// Probability that a 2*half_n-step walk spends exactly `2k` steps above
/// the axis, in log-space via `ln_gamma` (accurate for half_n up to 2^20).
///
/// # Errors
///
/// `Domain` if `k > half_n` or `half_n = 0`; `Unsupported` past
/// [`MAX_HALF_N`].
pub fn sojourn_prob<T: Float>(k: u64, half_n: u64) -> Result<T> {
    check_sojourn_args(k, half_n, MAX_HALF_N, "sojourn_prob")?;
    // ln binom(2j, j) = lnGamma(2j+1) - 2 lnGamma(j+1)
    let ln_central = |j: u64| -> Result<T> {
        Ok(ln_gamma(int::<T>(2 * j + 1))? - lit::<T>(2.0) * ln_gamma(int::<T>(j + 1))?)
    };
    let ln2 = lit::<T>(std::f64::consts::LN_2);
    let expo =
        ln_central(k)? + ln_central(half_n - k)? - lit::<T>(2.0) * int::<T>(half_n) * ln2;
    Ok(expo.exp())
}

/// Exact rational version of [`sojourn_prob`], for `half_n <= 32`.
///
/// # Errors
///
/// `Domain` on invalid `k`/`half_n`; `Unsupported` past
/// [`MAX_EXACT_HALF_N`].
pub fn sojourn_prob_exact(k: u64, half_n: u64) -> Result<BigRational> {
    check_sojourn_args(k, half_n, MAX_EXACT_HALF_N, "sojourn_prob_exact")?;
    let numer = central_binomial(k) * central_binomial(half_n - k);
    let denom: BigInt = BigInt::one() << (2 * half_n as usize);
    Ok(BigRational::new(numer, denom))
}

/// Full sojourn pmf `[p_0, ..., p_half_n]` for a 2*half_n-step walk.
///
/// # Errors
///
/// Same domain rules as [`sojourn_prob`].
pub fn sojourn_pmf<T: Float>(half_n: u64) -> Result<Vec<T>> {
    (0..=half_n).map(|k| sojourn_prob(k, half_n)).collect()
}

/// Exact finite-n cdf `F_n(x) = sum_{2k <= x n} P(L = 2k)` evaluated at the
/// rational point `x = num/den`, with the boundary `2k <= x n` decided in
/// integer arithmetic so partition endpoints are classified exactly.
///
/// # Errors
///
/// `Domain` if `den = 0` or `num/den > 1`; sojourn domain rules otherwise.
pub fn finite_cdf_fraction<T: Float>(num: u64, den: u64, half_n: u64) -> Result<T> {
    if den == 0 || num > den {
        return Err(Error::Domain(format!(
            "finite_cdf_fraction requires num/den in [0, 1], got {num}/{den}"
        )));
    }
    // 2k <= (num/den) * 2 half_n  <=>  k <= num * half_n / den
    let k_max = ((num as u128 * half_n as u128) / den as u128) as u64;
    sum_sojourn_prefix(k_max.min(half_n), half_n)
}

/// Exact finite-n cdf at a floating-point `x`; the cut index is
/// `floor(x * half_n)`, so points within rounding slop of a jump may land
/// on either side. Use [`finite_cdf_fraction`] when `x` is a known rational
/// boundary.
///
/// # Errors
///
/// `Domain` if `x` is NaN or outside `[0, 1]`; sojourn domain rules
/// otherwise.
pub fn finite_cdf<T: Float>(x: T, half_n: u64) -> Result<T> {
    check_unit_interval(x, "finite_cdf")?;
    let k_max = (x * int::<T>(half_n))
        .floor()
        .to_u64()
        .unwrap_or(half_n)
        .min(half_n);
    sum_sojourn_prefix(k_max, half_n)
}

/// Kahan-compensated prefix sum of the sojourn pmf up to `k_max`.
fn sum_sojourn_prefix<T: Float>(k_max: u64, half_n: u64) -> Result<T> {
    check_sojourn_args(0, half_n, MAX_HALF_N, "finite_cdf")?;
    let mut sum = T::zero();
    let mut comp = T::zero();
    for k in 0..=k_max {
        let y = sojourn_prob::<T>(k, half_n)? - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

fn check_unit_interval<T: Float>(x: T, what: &str) -> Result<()> {
    if x.is_nan() || x < T::zero() || x > T::one() {
        return Err(Error::Domain(format!(
            "{what} requires x in [0, 1], got {x:?}"
        )));
    }
    Ok(())
}

fn check_sojourn_args(k: u64, half_n: u64, max: u64, what: &str) -> Result<()> {
    if half_n == 0 {
        return Err(Error::Domain(format!("{what} requires half_n >= 1")));
    }
    if k > half_n {
        return Err(Error::Domain(format!(
            "{what} requires k <= half_n, got k = {k}, half_n = {half_n}"
        )));
    }
    if half_n > max {
        return Err(Error::Unsupported(format!(
            "{what} supports half_n <= {max}, got {half_n}"
        )));
    }
    Ok(())
}

/// Central binomial coefficient binom(2k, k), exact.
fn central_binomial(k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * BigInt::from(k + i) / BigInt::from(i);
    }
    acc
}

// Frozen oracle values keep every digit, even past f64 precision.
#[allow(clippy::excessive_precision)]
#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got:.17e}, want {want:.17e} (tol {tol:.1e})"
        );
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(cdf(0.0f64).unwrap(), 0.0);
        assert_close(cdf(1.0f64).unwrap(), 1.0, 1e-15);
        // F(1/4) = 1/3 exactly (asin(1/2) = pi/6).
        assert_close(cdf(0.25f64).unwrap(), 1.0 / 3.0, 1e-15);
        assert_close(cdf(0.5f64).unwrap(), 0.5, 1e-15);
        assert_close(cdf(0.9f64).unwrap(), 0.795_167_235_300_866_5, 1e-15);
        assert_close(cdf(0.0125f64).unwrap(), 0.071_325_378_561_022_51, 1e-15);
    }

    #[test]
    fn pdf_reference_points() {
        assert_close(pdf(0.25f64).unwrap(), 0.735_105_193_895_722_7, 1e-15);
        assert_close(pdf(0.5f64).unwrap(), std::f64::consts::FRAC_2_PI, 1e-15);
        assert!(pdf(0.0f64).is_err());
        assert!(pdf(1.0f64).is_err());
        assert!(pdf(f64::NAN).is_err());
    }

    #[test]
    fn p_value_complements_cdf() {
        assert_close(p_value(0.9f64).unwrap(), 0.204_832_764_699_133_45, 1e-15);
        assert_eq!(p_value(0.0f64).unwrap(), 1.0);
        assert_close(p_value(1.0f64).unwrap(), 0.0, 1e-15);
        assert!(p_value(1.5f64).is_err());
        assert!(p_value(-0.1f64).is_err());
        assert!(p_value(f64::NAN).is_err());
    }

    #[test]
    fn cdf_rejects_out_of_range() {
        assert!(cdf(-1e-12f64).is_err());
        assert!(cdf(1.0f64 + 1e-12).is_err());
        assert!(cdf(f64::NAN).is_err());
    }

    #[test]
    fn berry_esseen_reference_values() {
        // 50-digit oracle values of (4/(3pi))(2 - 3/(2s))(4s^2/(2s-1))^1.5.
        let c2: f64 = berry_esseen_constant(2).unwrap();
        let c10: f64 = berry_esseen_constant(10).unwrap();
        let c40: f64 = berry_esseen_constant(40).unwrap();
        assert_close(c2, 6.534_268_390_184_202, 1e-12);
        assert_close(c10, 75.843_816_338_892_49, 1e-11);
        assert_close(c40, 607.334_361_820_484_6, 1e-10);
        assert!(berry_esseen_constant::<f64>(1).is_err());
        assert!(berry_esseen_constant::<f64>(0).is_err());
    }

    #[test]
    fn cdf_error_bound_composes() {
        let b: CdfErrorBound<f64> = cdf_error_bound(40, 1 << 26).unwrap();
        assert_eq!(b.s, 40);
        assert_eq!(b.n, 1 << 26);
        assert_close(b.bound, b.c / (1u64 << 26) as f64, 0.0);
        assert_close(b.bound, 9.049_987_225e-6, 1e-12);
        assert!(cdf_error_bound::<f64>(40, 101).is_err());
        assert!(cdf_error_bound::<f64>(40, 0).is_err());
    }

    #[test]
    fn sojourn_half_n_2_exact_values() {
        // 4-step walk: (3/8, 1/4, 3/8).
        let p0 = sojourn_prob_exact(0, 2).unwrap();
        let p1 = sojourn_prob_exact(1, 2).unwrap();
        let p2 = sojourn_prob_exact(2, 2).unwrap();
        assert_eq!(p0, BigRational::new(3.into(), 8.into()));
        assert_eq!(p1, BigRational::new(1.into(), 4.into()));
        assert_eq!(p2, BigRational::new(3.into(), 8.into()));
    }

    #[test]
    fn sojourn_log_path_matches_exact_path() {
        for half_n in [1u64, 2, 5, 17, 32] {
            for k in 0..=half_n {
                let exact = sojourn_prob_exact(k, half_n).unwrap().to_f64().unwrap();
                let logp: f64 = sojourn_prob(k, half_n).unwrap();
                assert_close(logp, exact, 1e-13 * exact.max(1e-300));
            }
        }
    }

    #[test]
    fn sojourn_pmf_sums_to_one() {
        for half_n in [1u64, 10, 100, 1000, 4096] {
            let pmf: Vec<f64> = sojourn_pmf(half_n).unwrap();
            let mut sum = 0.0;
            let mut comp = 0.0;
            for p in pmf {
                let y = p - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            assert_close(sum, 1.0, 1e-10);
        }
    }

    #[test]
    fn sojourn_pmf_is_symmetric() {
        let pmf: Vec<f64> = sojourn_pmf(25).unwrap();
        for k in 0..=25usize {
            let a = pmf[k];
            let b = pmf[25 - k];
            assert_close(a, b, 1e-15 * a.abs());
        }
    }

    #[test]
    fn sojourn_rejects_bad_args() {
        assert!(sojourn_prob::<f64>(3, 2).is_err());
        assert!(sojourn_prob::<f64>(0, 0).is_err());
        assert!(sojourn_prob::<f64>(0, MAX_HALF_N + 1).is_err());
        assert!(sojourn_prob_exact(0, MAX_EXACT_HALF_N + 1).is_err());
    }

    #[test]
    fn finite_cdf_fraction_boundary_is_integer_exact() {
        // At x = 1/2 with half_n = 2 the cut includes k <= 1: 3/8 + 1/4.
        let f: f64 = finite_cdf_fraction(1, 2, 2).unwrap();
        assert_close(f, 0.625, 5e-15);
        // Full interval sums to 1; log-space pmf terms each carry about
        // 1e-15 relative error, so the sum is close but not exact.
        let f1: f64 = finite_cdf_fraction(1, 1, 2).unwrap();
        assert_close(f1, 1.0, 5e-15);
        // x = 0 keeps only k = 0.
        let f0: f64 = finite_cdf_fraction(0, 1, 2).unwrap();
        assert_close(f0, 0.375, 5e-15);
        assert!(finite_cdf_fraction::<f64>(3, 2, 2).is_err());
        assert!(finite_cdf_fraction::<f64>(1, 0, 2).is_err());
    }

    #[test]
    fn finite_cdf_float_agrees_with_fraction_off_boundary() {
        for half_n in [8u64, 64, 512] {
            for &(num, den) in &[(1u64, 7u64), (2, 5), (3, 4), (9, 11)] {
                let x = num as f64 / den as f64;
                let a: f64 = finite_cdf(x, half_n).unwrap();
                let b: f64 = finite_cdf_fraction(num, den, half_n).unwrap();
                assert_close(a, b, 1e-12);
            }
        }
    }

    #[test]
    fn finite_cdf_converges_to_arcsine_cdf() {
        // Sup distance over jump points in the interior window
        // [1/80, 79/80] shrinks roughly like 1/n. (Near 0 and 1 the
        // staircase steps are of order 1/sqrt(n), which is why the
        // error bound is only claimed at partition endpoints.)
        let interior_sup = |half_n: u64| -> f64 {
            let pmf: Vec<f64> = sojourn_pmf(half_n).unwrap();
            let mut acc = 0.0f64;
            let mut worst = 0.0f64;
            for (k, p) in pmf.iter().enumerate() {
                acc += p;
                let x = k as f64 / half_n as f64;
                if (0.0125..=0.9875).contains(&x) {
                    worst = worst.max((acc - cdf(x).unwrap()).abs());
                }
            }
            worst
        };
        let d32 = interior_sup(32);
        let d2048 = interior_sup(2048);
        assert!(
            d2048 < d32 / 10.0,
            "sup distance did not shrink: {d32} -> {d2048}"
        );
    }
}
