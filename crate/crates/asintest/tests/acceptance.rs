//! End-to-end acceptance checks for the whole pipeline.
//!
//! Each check prints a single PASS line with the measured figures (visible
//! with `--nocapture`); a failed assertion marks that check FAILED in the
//! harness output. The first three checks pin reference arithmetic, the
//! middle ones cross-validate against exact enumeration, and the last
//! three exercise desk-scale statistical discrimination end to end.

// Frozen oracle values keep every digit, even past f64 precision.
#![allow(clippy::excessive_precision)]

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};

use asintest::arcsine::{
    berry_esseen_constant, cdf, finite_cdf_fraction, sojourn_prob_exact,
};
use asintest::campaign::{run_with_seeds, CampaignConfig, SeedSource};
use asintest::dyck::{
    catalan, flawed_block, rotate_to_dyck, sample_dyck_path, FlawedParams,
};
use asintest::prng::{BitStream, GeneratorSpec};
use asintest::secondlevel::{
    chi_square_pvalue, devroye_threshold, flawed_expected_t, reliability_check,
    run_second_level, MeasureMode, TestConfig, Verdict,
};
use asintest::walk::Walk;

/// Asserts agreement with a printed reference figure at its own precision.
fn assert_close(actual: f64, reference: f64, rel_tol: f64, label: &str) {
    let rel = ((actual - reference) / reference).abs();
    assert!(
        rel <= rel_tol,
        "{label}: got {actual:.6e}, reference {reference:.6e}, rel err {rel:.2e}"
    );
}

#[test]
fn a01_reliability_certificate_reproduces_reference_figures() {
    let r34 = reliability_check(1 << 34, 10_000, 40).unwrap();
    assert_close(r34.delta, 7.0703e-8, 5e-5, "delta at n=2^34");
    assert_close(r34.max_reliable_m as f64, 4.8760e12, 5e-5, "m_max at n=2^34");

    let r30 = reliability_check(1 << 30, 10_000, 40).unwrap();
    assert_close(r30.delta, 1.13e-6, 5e-3, "delta at n=2^30");
    assert_close(r30.max_reliable_m as f64, 1.9047e10, 5e-5, "m_max at n=2^30");

    let r26 = reliability_check(1 << 26, 10_000, 40).unwrap();
    assert_close(r26.delta, 1.8e-5, 6e-3, "delta at n=2^26");
    assert_eq!(r26.max_reliable_m, 74_402_700);

    // The reference quotes the noise floor truncated to two figures.
    assert!((0.0015..0.0016).contains(&r34.sigma_lb), "{}", r34.sigma_lb);
    // m = 10000 sits below max_reliable_m at every one of these lengths.
    assert!(r34.reliable && r30.reliable && r26.reliable);

    println!(
        "PASS a01 reliability: delta 2^34/2^30/2^26 = {:.4e}/{:.4e}/{:.4e}, \
         m_max = {}/{}/{}, sigma_lb = {:.4e}",
        r34.delta,
        r30.delta,
        r26.delta,
        r34.max_reliable_m,
        r30.max_reliable_m,
        r26.max_reliable_m,
        r34.sigma_lb
    );
}

#[test]
fn a02_devroye_threshold_reproduces_reference_figures() {
    let d = devroye_threshold(10_000, 40, 1e-4).unwrap();
    assert!((d.threshold - 0.08026889442930358).abs() < 1e-15);
    assert!((d.validity_bound - 0.28635642126552706).abs() < 1e-15);
    // The reference figures truncate (0.0802) and round low in the last
    // digit (0.2862, where the closed form gives 0.28636); match them at
    // the precision they actually carry.
    assert!((d.threshold - 0.0802).abs() < 1e-4, "{}", d.threshold);
    assert!(
        (d.validity_bound - 0.2862).abs() < 2e-4,
        "{}",
        d.validity_bound
    );
    println!(
        "PASS a02 devroye: threshold = {:.6}, validity bound = {:.6}",
        d.threshold, d.validity_bound
    );
}

#[test]
fn a03_flawed_analytic_prediction() {
    let t = flawed_expected_t(10_000, 1.0 / 66.0, 40).unwrap();
    assert!((t - 89.5316).abs() < 1e-3, "{t}");
    let p = chi_square_pvalue(89.5316_f64, 40).unwrap();
    assert!(p < 1.18e-5, "{p}");
    println!("PASS a03 flawed prediction: T = {t:.4}, p(T) = {p:.4e}");
}

/// Histogram of sojourn times over every length-2n walk, by direct
/// enumeration with the tie rule D_k = [S_k > 0 or S_{k-1} > 0].
fn brute_force_sojourn(half_n: u32) -> Vec<u64> {
    let n = 2 * half_n;
    let mut hist = vec![0u64; half_n as usize + 1];
    for mask in 0u64..(1u64 << n) {
        let mut pos: i64 = 0;
        let mut above = 0u32;
        for step in 0..n {
            let prev = pos;
            pos += if (mask >> step) & 1 == 1 { 1 } else { -1 };
            if pos > 0 || prev > 0 {
                above += 1;
            }
        }
        assert_eq!(above % 2, 0, "sojourn time must be even");
        hist[(above / 2) as usize] += 1;
    }
    hist
}

#[test]
fn a04_exact_sojourn_distribution_matches_brute_force() {
    for half_n in 1..=8u32 {
        let hist = brute_force_sojourn(half_n);
        let total = BigInt::from(1u64) << (2 * half_n);
        for (k, &count) in hist.iter().enumerate() {
            let expected = sojourn_prob_exact(k as u64, u64::from(half_n)).unwrap();
            let observed = BigRational::new(BigInt::from(count), total.clone());
            assert_eq!(observed, expected, "k={k}, half_n={half_n}");
        }
    }
    println!("PASS a04 exact sojourn law matches enumeration of all walks up to 16 steps");
}

#[test]
fn a05_finite_cdf_error_stays_within_the_berry_esseen_bound() {
    let mut reported: Vec<String> = Vec::new();
    for &s in &[2u32, 10, 40] {
        let c: f64 = berry_esseen_constant(s).unwrap();
        let mut worst_ratio = 0.0f64;
        for pow in 8..=14u32 {
            let n = 1u64 << pow;
            let bound = c / n as f64;
            let mut sup = 0.0f64;
            for i in 1..=u64::from(s) {
                let (num, den) = (2 * i - 1, 2 * u64::from(s));
                let f_n: f64 = finite_cdf_fraction(num, den, n / 2).unwrap();
                let f = cdf(num as f64 / den as f64).unwrap();
                sup = sup.max((f_n - f).abs());
            }
            assert!(
                sup <= bound,
                "s={s} n={n}: sup |F_n - F| = {sup:.4e} exceeds C/n = {bound:.4e}"
            );
            worst_ratio = worst_ratio.max(sup / bound);
        }
        reported.push(format!("s={s} worst sup/(C/n)={worst_ratio:.3}"));
    }
    println!(
        "PASS a05 finite cdf within C(s)/n at all partition endpoints: {}",
        reported.join(", ")
    );
}

#[test]
fn a06_cycle_lemma_preimage_counts_by_full_enumeration() {
    for half_n in 1..=6u32 {
        let len = 2 * half_n + 1;
        let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
        for mask in 0u32..(1u32 << len) {
            if mask.count_ones() != half_n {
                continue;
            }
            let bits: Vec<u8> = (0..len).map(|i| ((mask >> i) & 1) as u8).collect();
            let path = rotate_to_dyck(&bits).unwrap();
            *counts.entry(path.into_bits()).or_insert(0) += 1;
        }
        let c = catalan(half_n).unwrap();
        assert_eq!(counts.len() as u64, c, "path count at half_n={half_n}");
        for (path, &count) in &counts {
            assert_eq!(
                count,
                u64::from(len),
                "preimages of {path:?} at half_n={half_n}"
            );
        }
    }
    println!(
        "PASS a06 cycle lemma: every Dyck path up to half-length 6 has exactly 2n+1 preimages"
    );
}

#[test]
fn a07_flawed_blocks_are_exactly_balanced_and_pass_through_is_bit_exact() {
    for block_log2 in 5..=18u32 {
        let params =
            FlawedParams::from_tau(GeneratorSpec::Mt19937_64, block_log2, 1.0 / 66.0).unwrap();
        for j in 1..=50u64 {
            let seed = 66 * j;
            assert!(params.is_flawed_seed(seed));
            let block = flawed_block(&params, seed).unwrap();
            assert_eq!(block.len() as u64, params.block_bits());
            let mut walk = Walk::new();
            for &b in &block {
                walk.feed(b);
            }
            assert_eq!(
                walk.above_fraction().unwrap(),
                Ratio::new(1, 2),
                "N={block_log2} seed={seed}"
            );
        }
        for seed in [1u64, 5, 67] {
            assert!(!params.is_flawed_seed(seed));
            let block = flawed_block(&params, seed).unwrap();
            let mut inner = GeneratorSpec::Mt19937_64.stream(seed).unwrap();
            let reference = inner.take_bits(block.len()).unwrap();
            assert_eq!(block, reference, "N={block_log2} seed={seed}");
        }
    }
    println!(
        "PASS a07 flawed family: S^asin = 1/2 exactly on 50 flawed seeds for N in 5..=18, \
         pass-through bit-exact"
    );
}

#[test]
fn a08_desk_scale_discrimination() {
    // (a) A sound generator passes at alpha = 1e-4 in a reliable regime.
    let mut mt_passes = 0;
    let mut mt_lines: Vec<String> = Vec::new();
    for rep in 0..3u64 {
        let config = CampaignConfig {
            generator: GeneratorSpec::Mt19937_64,
            n: 1 << 20,
            m: 1000,
            s: 40,
            alpha: 1e-4,
            mode: MeasureMode::DirectArcsine,
            seed_source: SeedSource::OsEntropy,
            workers: 0,
        };
        let seeds: Vec<u64> = (1..=1000).map(|k| rep * 1_000_000 + k).collect();
        let out = run_with_seeds(&config, &seeds).unwrap();
        assert!(out.report.reliable, "n=2^20 m=1000 must be reliable");
        if out.report.overall() == Verdict::Pass {
            mt_passes += 1;
        }
        mt_lines.push(format!("rep{rep} p={:.3e}", out.report.p_chi2));
    }
    assert!(mt_passes >= 2, "mt19937-64 passed only {mt_passes}/3");

    // (b) RANDU fails on both criteria.
    let config = CampaignConfig {
        generator: GeneratorSpec::Randu,
        n: 1 << 21,
        m: 1000,
        s: 40,
        alpha: 1e-4,
        mode: MeasureMode::DirectArcsine,
        seed_source: SeedSource::OsEntropy,
        workers: 0,
    };
    let seeds: Vec<u64> = (0..1000).map(|k| 2 * k + 1).collect();
    let randu = run_with_seeds(&config, &seeds).unwrap().report;
    assert!(randu.p_chi2 < 1e-4, "randu p = {}", randu.p_chi2);
    assert!(
        randu.d_tv > randu.tv_threshold,
        "randu d_tv = {} <= {}",
        randu.d_tv,
        randu.tv_threshold
    );

    // (c) The flawed family fails at one block per sequence.
    let params = FlawedParams::from_tau(GeneratorSpec::Mt19937_64, 18, 1.0 / 66.0).unwrap();
    let config = CampaignConfig {
        generator: GeneratorSpec::Flawed(params),
        n: 1 << 18,
        m: 10_000,
        s: 40,
        alpha: 1e-4,
        mode: MeasureMode::DirectArcsine,
        seed_source: SeedSource::OsEntropy,
        workers: 0,
    };
    let seeds: Vec<u64> = (1..=10_000).collect();
    let flawed = run_with_seeds(&config, &seeds).unwrap().report;
    assert_eq!(flawed.verdict_chi2, Verdict::Fail, "p = {}", flawed.p_chi2);

    println!(
        "PASS a08 discrimination: mt {mt_passes}/3 ({}), randu p={:.3e} d_tv={:.4}, \
         flawed p={:.3e}",
        mt_lines.join(" "),
        randu.p_chi2,
        randu.d_tv,
        flawed.p_chi2
    );
}

/// A uniform variate built from 53 generator bits.
fn unit_uniform(stream: &mut BitStream) -> f64 {
    let bits = stream.take_bits(53).unwrap();
    let v = bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
    v as f64 / (1u64 << 53) as f64
}

#[test]
fn a09_type_one_error_is_calibrated_on_exact_arcsine_samples() {
    // Basic statistics drawn from the exact limit law via the inverse cdf
    // sin^2(pi u / 2), so every rejection is a type-I error.
    let mut stream = GeneratorSpec::Mt19937_64.stream(20260817).unwrap();
    let config = TestConfig {
        n: 1 << 20,
        m: 1000,
        s: 40,
        alpha: 0.01,
        mode: MeasureMode::DirectArcsine,
    };
    let reps = 1000;
    let mut fails = 0;
    for _ in 0..reps {
        let stats: Vec<f64> = (0..config.m)
            .map(|_| {
                let u = unit_uniform(&mut stream);
                (std::f64::consts::PI * u / 2.0).sin().powi(2)
            })
            .collect();
        let report = run_second_level(&config, &stats).unwrap();
        if report.overall() == Verdict::Fail {
            fails += 1;
        }
    }
    let rate = f64::from(fails) / f64::from(reps);
    assert!(
        (0.003..=0.025).contains(&rate),
        "fail rate {rate} outside [0.003, 0.025]"
    );
    println!("PASS a09 type-I calibration: {fails}/{reps} rejections at alpha = 0.01");
}

#[test]
fn a10_dyck_sampler_is_uniform_over_the_14_paths_of_half_length_4() {
    let mut stream = GeneratorSpec::Mt19937_64.stream(4242).unwrap();
    let samples = 14_000u64;
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    for _ in 0..samples {
        let bits = sample_dyck_path(4, &mut stream, false).unwrap();
        *counts.entry(bits).or_insert(0) += 1;
    }
    assert_eq!(counts.len() as u64, catalan(4).unwrap());
    let expected = samples as f64 / 14.0;
    let t: f64 = counts
        .values()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum();
    let p = chi_square_pvalue(t, 13).unwrap();
    assert!(p > 0.001, "T = {t:.3}, p = {p:.4e}");
    println!("PASS a10 dyck sampler uniformity: T = {t:.3}, p = {p:.4}");
}
