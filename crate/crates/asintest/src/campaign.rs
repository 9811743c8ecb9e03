//! Campaign orchestration: seed management, the parallel basic-test
//! pipeline (one generator stream + walk per sequence), and the adaptive
//! retest loop.
//!
//! Seeds are assigned to sequences in file order and results are
//! gathered by sequence index, so parallel and serial runs of the same
//! campaign produce bit-identical reports.

use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcsine;
use crate::prng::GeneratorSpec;
use crate::secondlevel::{run_second_level, MeasureMode, TestConfig, TestReport};
use crate::walk::Walk;
use crate::{Error, Real, Result};

/// Gray-zone bounds of the adaptive scheme: below the lower bound the
/// generator fails outright, above the upper it passes, and in between
/// the sequence length is doubled and the test repeated on fresh output.
pub const ADAPTIVE_FAIL_P: Real = 1e-4;
pub const ADAPTIVE_PASS_P: Real = 1e-2;

/// Where campaign seeds come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedSource {
    /// Text file, one decimal seed per line (blank lines ignored).
    File(PathBuf),
    /// The operating system's entropy pool.
    OsEntropy,
}

impl SeedSource {
    /// Seeds for retest round `round` of a campaign consuming `m` seeds
    /// per round: file sources hand out consecutive disjoint slices in
    /// file order, entropy sources draw fresh values.
    ///
    /// # Errors
    ///
    /// `Config` when the file holds too few seeds for the requested
    /// round; `Io` on read failures.
    pub fn seeds_for_round(&self, m: usize, round: u32) -> Result<Vec<u64>> {
        match self {
            SeedSource::File(path) => {
                let all = parse_seed_file(path)?;
                let start = m * round as usize;
                let end = start + m;
                if all.len() < end {
                    return Err(Error::Config(format!(
                        "{}: round {round} needs seeds {start}..{end}, file holds {}",
                        path.display(),
                        all.len()
                    )));
                }
                Ok(all[start..end].to_vec())
            }
            SeedSource::OsEntropy => os_seeds(m),
        }
    }
}

/// Parses a seed file: one decimal u64 per line, surrounding whitespace
/// allowed, blank lines skipped.
///
/// # Errors
///
/// `Config` with the offending line number on anything unparsable.
pub fn parse_seed_file(path: &Path) -> Result<Vec<u64>> {
    let text = std::fs::read_to_string(path)?;
    let mut seeds = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = t.parse::<u64>().map_err(|e| {
            Error::Config(format!(
                "{}:{}: invalid seed {t:?}: {e}",
                path.display(),
                idx + 1
            ))
        })?;
        seeds.push(v);
    }
    Ok(seeds)
}

fn os_seeds(count: usize) -> Result<Vec<u64>> {
    let mut f = std::fs::File::open("/dev/urandom")?;
    let mut buf = vec![0u8; count * 8];
    f.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Full campaign description; round-trips losslessly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub generator: GeneratorSpec,
    pub n: u64,
    pub m: u64,
    pub s: u32,
    pub alpha: Real,
    pub mode: MeasureMode,
    pub seed_source: SeedSource,
    /// Worker threads; 0 uses the process-default pool.
    pub workers: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let t = TestConfig::default();
        CampaignConfig {
            generator: GeneratorSpec::Mt19937_64,
            n: t.n,
            m: t.m,
            s: t.s,
            alpha: t.alpha,
            mode: t.mode,
            seed_source: SeedSource::OsEntropy,
            workers: 0,
        }
    }
}

impl CampaignConfig {
    /// The statistical part of the configuration.
    pub fn test_config(&self) -> TestConfig {
        TestConfig {
            n: self.n,
            m: self.m,
            s: self.s,
            alpha: self.alpha,
            mode: self.mode,
        }
    }

    /// # Errors
    ///
    /// `Config` on any invalid statistical parameter, or when a flawed
    /// generator's block 2^N cannot cover the sequence length.
    pub fn validate(&self) -> Result<()> {
        self.test_config().validate()?;
        if let GeneratorSpec::Flawed(params) = &self.generator {
            params.validate()?;
            if self.n > params.block_bits() {
                return Err(Error::Config(format!(
                    "sequence length {} exceeds the flawed block of 2^{} bits",
                    self.n, params.block_log2
                )));
            }
        }
        Ok(())
    }
}

/// One basic test: a single sequence's statistic and p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicResult {
    /// Sequence index in campaign order.
    pub seq: u64,
    pub seed: u64,
    pub s_asin: Real,
    pub p_value: Real,
}

/// A finished campaign: the second-level report plus every basic result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub report: TestReport,
    pub basic: Vec<BasicResult>,
}

fn basic_result(spec: &GeneratorSpec, n: u64, seq: u64, seed: u64) -> Result<BasicResult> {
    let mut stream = spec.stream(seed)?;
    let mut walk = Walk::new();
    walk.feed_stream(&mut stream, n)?;
    let s_asin = walk.above_fraction_real()?;
    let p_value = arcsine::p_value(s_asin)?;
    Ok(BasicResult {
        seq,
        seed,
        s_asin,
        p_value,
    })
}

/// Runs one campaign round over an explicit seed list (one seed per
/// sequence, in order).
///
/// # Errors
///
/// `Config` on validation failure or a seed-count mismatch; generator
/// and stream errors propagate with their sequence context intact.
pub fn run_with_seeds(config: &CampaignConfig, seeds: &[u64]) -> Result<CampaignOutcome> {
    config.validate()?;
    if seeds.len() as u64 != config.m {
        return Err(Error::Config(format!(
            "campaign needs m = {} seeds, got {}",
            config.m,
            seeds.len()
        )));
    }
    let compute = || -> Result<Vec<BasicResult>> {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| basic_result(&config.generator, config.n, i as u64, seed))
            .collect()
    };
    let basic = if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        pool.install(compute)?
    } else {
        compute()?
    };
    let values: Vec<Real> = basic.iter().map(|b| b.s_asin).collect();
    let mut report = run_second_level(&config.test_config(), &values)?;
    report.generator = config.generator.name();
    Ok(CampaignOutcome { report, basic })
}

/// Runs one campaign, drawing round-0 seeds from the configured source.
///
/// # Errors
///
/// As [`run_with_seeds`], plus seed-source failures.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome> {
    config.validate()?;
    let seeds = config.seed_source.seeds_for_round(config.m as usize, 0)?;
    run_with_seeds(config, &seeds)
}

/// Final state of an adaptive retest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdaptiveVerdict {
    Pass,
    Fail,
    /// The doubling budget ran out with every p-value in the gray zone.
    Inconclusive,
}

impl std::fmt::Display for AdaptiveVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdaptiveVerdict::Pass => write!(f, "PASS"),
            AdaptiveVerdict::Fail => write!(f, "FAIL"),
            AdaptiveVerdict::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

/// Adaptive outcome: the verdict plus one report per round run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOutcome {
    pub verdict: AdaptiveVerdict,
    pub history: Vec<TestReport>,
}

/// The adaptive retest loop: run the campaign; a chi-square p-value
/// below 1e-4 fails, above 1e-2 passes, and anything between doubles the
/// sequence length and repeats on fresh seeds. With a budget of k
/// doublings, at most k+1 rounds run; exhausting the budget inside the
/// gray zone is inconclusive.
///
/// # Errors
///
/// Campaign errors propagate; a doubled length can also outgrow a flawed
/// generator's block and surface as `Config`.
pub fn adaptive_retest(config: &CampaignConfig, max_doublings: u32) -> Result<AdaptiveOutcome> {
    let mut round_config = config.clone();
    let mut history = Vec::new();
    for round in 0..=max_doublings {
        let seeds = config
            .seed_source
            .seeds_for_round(round_config.m as usize, round)?;
        let outcome = run_with_seeds(&round_config, &seeds)?;
        let p = outcome.report.p_chi2;
        history.push(outcome.report);
        if p < ADAPTIVE_FAIL_P {
            return Ok(AdaptiveOutcome {
                verdict: AdaptiveVerdict::Fail,
                history,
            });
        }
        if p > ADAPTIVE_PASS_P {
            return Ok(AdaptiveOutcome {
                verdict: AdaptiveVerdict::Pass,
                history,
            });
        }
        round_config.n = round_config.n.checked_mul(2).ok_or_else(|| {
            Error::Config("sequence length overflow while doubling".into())
        })?;
    }
    Ok(AdaptiveOutcome {
        verdict: AdaptiveVerdict::Inconclusive,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyck::FlawedParams;
    use std::io::Write;

    fn write_seeds(dir: &Path, name: &str, seeds: &[u64]) -> PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        for s in seeds {
            writeln!(f, "{s}").unwrap();
        }
        path
    }

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("asintest-campaign-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn small_config(seed_source: SeedSource) -> CampaignConfig {
        CampaignConfig {
            generator: GeneratorSpec::Mt19937_64,
            n: 1 << 10,
            m: 40,
            s: 2,
            alpha: 1e-4,
            mode: MeasureMode::DirectArcsine,
            seed_source,
            workers: 0,
        }
    }

    #[test]
    fn seed_file_parsing() {
        let dir = tmp_dir("parse");
        let path = dir.join("seeds.txt");
        std::fs::write(&path, "12\n\n  34 \n5\n").unwrap();
        assert_eq!(parse_seed_file(&path).unwrap(), vec![12, 34, 5]);

        std::fs::write(&path, "12\nnope\n").unwrap();
        let err = parse_seed_file(&path).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        assert!(err.contains("nope"), "{err}");

        std::fs::write(&path, "-3\n").unwrap();
        assert!(parse_seed_file(&path).is_err());

        assert!(parse_seed_file(&dir.join("missing.txt")).is_err());
    }

    #[test]
    fn seed_rounds_slice_the_file_in_order() {
        let dir = tmp_dir("rounds");
        let path = write_seeds(&dir, "r.txt", &[1, 2, 3, 4, 5, 6, 7]);
        let src = SeedSource::File(path);
        assert_eq!(src.seeds_for_round(3, 0).unwrap(), vec![1, 2, 3]);
        assert_eq!(src.seeds_for_round(3, 1).unwrap(), vec![4, 5, 6]);
        let err = src.seeds_for_round(3, 2).unwrap_err().to_string();
        assert!(err.contains("round 2"), "{err}");
        assert!(err.contains("holds 7"), "{err}");
    }

    #[test]
    fn os_entropy_draws_fresh_seeds() {
        let a = os_seeds(16).unwrap();
        let b = os_seeds(16).unwrap();
        assert_eq!(a.len(), 16);
        // 128 random bytes colliding would mean the entropy pool is broken.
        assert_ne!(a, b);
    }

    #[test]
    fn config_round_trips_through_json() {
        let dir = tmp_dir("json");
        let cfg = CampaignConfig {
            generator: GeneratorSpec::Flawed(
                FlawedParams::new(GeneratorSpec::Mt19937_64, 18, 66).unwrap(),
            ),
            n: 1 << 18,
            m: 10_000,
            s: 40,
            alpha: 1e-4,
            mode: MeasureMode::PValueUniform,
            seed_source: SeedSource::File(dir.join("seeds.txt")),
            workers: 8,
        };
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back: CampaignConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn validation_catches_flawed_block_overrun() {
        let mut cfg = small_config(SeedSource::OsEntropy);
        cfg.generator = GeneratorSpec::Flawed(
            FlawedParams::new(GeneratorSpec::Mt19937_64, 10, 66).unwrap(),
        );
        cfg.n = 1 << 10;
        assert!(cfg.validate().is_ok());
        cfg.n = 1 << 11;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("exceeds the flawed block"), "{err}");
    }

    #[test]
    fn campaign_results_follow_seed_order_and_are_deterministic() {
        let dir = tmp_dir("order");
        let seeds: Vec<u64> = (1..=40).collect();
        let path = write_seeds(&dir, "s.txt", &seeds);
        let cfg = small_config(SeedSource::File(path));

        let a = run_campaign(&cfg).unwrap();
        let b = run_campaign(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.basic.len(), 40);
        for (i, basic) in a.basic.iter().enumerate() {
            assert_eq!(basic.seq, i as u64);
            assert_eq!(basic.seed, seeds[i]);
            assert!((0.0..=1.0).contains(&basic.s_asin));
            assert!((0.0..=1.0).contains(&basic.p_value));
        }
        assert_eq!(a.report.generator, "mt19937-64");
        assert_eq!(a.report.m, 40);
    }

    #[test]
    fn parallel_and_serial_runs_agree() {
        let dir = tmp_dir("par");
        let path = write_seeds(&dir, "s.txt", &(100..140).collect::<Vec<_>>());
        let mut cfg = small_config(SeedSource::File(path));
        cfg.workers = 1;
        let serial = run_campaign(&cfg).unwrap();
        cfg.workers = 4;
        let parallel = run_campaign(&cfg).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn seed_count_mismatch_is_rejected() {
        let cfg = small_config(SeedSource::OsEntropy);
        assert!(run_with_seeds(&cfg, &[1, 2, 3]).is_err());
    }

    #[test]
    fn bad_seed_for_family_surfaces_the_config_error() {
        let dir = tmp_dir("badseed");
        let mut seeds: Vec<u64> = (1..=40).collect();
        seeds[7] = 0;
        let path = write_seeds(&dir, "s.txt", &seeds);
        let mut cfg = small_config(SeedSource::File(path));
        cfg.generator = GeneratorSpec::Randu;
        cfg.n = 1 << 8;
        assert!(run_campaign(&cfg).is_err());
    }

    #[test]
    fn adaptive_fail_is_immediate_for_a_broken_generator() {
        // RANDU at these scales fails overwhelmingly (its p-value
        // underflows the gray zone on the first round).
        let dir = tmp_dir("afail");
        let path = write_seeds(&dir, "s.txt", &(1..=200).map(|i| 2 * i + 1).collect::<Vec<_>>());
        let cfg = CampaignConfig {
            generator: GeneratorSpec::Randu,
            n: 1 << 14,
            m: 200,
            s: 10,
            alpha: 1e-4,
            mode: MeasureMode::DirectArcsine,
            seed_source: SeedSource::File(path),
            workers: 0,
        };
        let outcome = adaptive_retest(&cfg, 3).unwrap();
        assert_eq!(outcome.verdict, AdaptiveVerdict::Fail);
        assert_eq!(outcome.history.len(), 1);
        assert!(outcome.history[0].p_chi2 < ADAPTIVE_FAIL_P);
    }

    #[test]
    fn adaptive_pass_keeps_a_single_entry() {
        // Frozen seed set for which the first-round p-value clears the
        // gray zone (deterministic, so never flaky).
        let dir = tmp_dir("apass");
        let path = write_seeds(&dir, "s.txt", &(1..=40).collect::<Vec<_>>());
        let cfg = small_config(SeedSource::File(path));
        let outcome = adaptive_retest(&cfg, 3).unwrap();
        assert_eq!(outcome.verdict, AdaptiveVerdict::Pass);
        assert_eq!(outcome.history.len(), 1);
        assert!(outcome.history[0].p_chi2 > ADAPTIVE_PASS_P);
    }

    #[test]
    fn adaptive_gray_zone_with_no_budget_is_inconclusive() {
        // Seed block found by sweeping: the first-round p-value lands
        // strictly inside the gray zone (p ~ 5.1e-3), so a zero doubling
        // budget must stop with INCONCLUSIVE after exactly one round.
        let dir = tmp_dir("agray");
        let path = write_seeds(&dir, "s.txt", &(3881..=3920).collect::<Vec<_>>());
        let cfg = small_config(SeedSource::File(path));
        let outcome = adaptive_retest(&cfg, 0).unwrap();
        assert_eq!(outcome.verdict, AdaptiveVerdict::Inconclusive);
        assert_eq!(outcome.history.len(), 1);
        let p = outcome.history[0].p_chi2;
        assert!(p > ADAPTIVE_FAIL_P && p < ADAPTIVE_PASS_P, "{p}");
    }

    #[test]
    fn adaptive_gray_zone_doubles_n_on_fresh_seeds() {
        // Same gray-zone first round, but with budget and a second seed
        // block on file: round 1 reruns at doubled length and clears the
        // zone (p ~ 0.975 on these seeds).
        let dir = tmp_dir("agray2");
        let path = write_seeds(&dir, "s.txt", &(3881..=3960).collect::<Vec<_>>());
        let cfg = small_config(SeedSource::File(path));
        let outcome = adaptive_retest(&cfg, 1).unwrap();
        assert_eq!(outcome.verdict, AdaptiveVerdict::Pass);
        assert_eq!(outcome.history.len(), 2);
        assert_eq!(outcome.history[0].n, 1 << 10);
        assert_eq!(outcome.history[1].n, 1 << 11);
        assert!(outcome.history[1].p_chi2 > ADAPTIVE_PASS_P);
    }

    #[test]
    fn adaptive_requires_fresh_seeds_per_round() {
        // A file holding exactly m seeds cannot serve a second round;
        // with a forced gray zone that would surface as the Config
        // error, checked here through the round-slicing helper.
        let dir = tmp_dir("afresh");
        let path = write_seeds(&dir, "s.txt", &(1..=40).collect::<Vec<_>>());
        let src = SeedSource::File(path);
        assert!(src.seeds_for_round(40, 0).is_ok());
        assert!(src.seeds_for_round(40, 1).is_err());
    }
}
