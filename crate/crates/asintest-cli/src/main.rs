//! Command-line front end for the arcsine second-level test.
//!
//! Exit codes: 0 the campaign PASSed in a reliable regime, 1 it FAILed,
//! 2 the outcome is inconclusive (adaptive budget exhausted, or a PASS
//! in a regime where the approximation error exceeds the binomial noise
//! floor), 3 usage, configuration, or I/O errors. A FAIL always exits 1:
//! rejection evidence only grows with the overwhelming signals this tool
//! is built to catch, while a PASS without reliability headroom proves
//! nothing.
//!
//! Standard output carries machine-readable results exclusively;
//! progress notes go to standard error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use asintest::campaign::{
    adaptive_retest, run_campaign, AdaptiveVerdict, CampaignConfig, CampaignOutcome,
    SeedSource,
};
use asintest::dyck::{sample_dyck_path, FlawedParams};
use asintest::prng::{write_bit_file, GeneratorSpec};
use asintest::report::{write_basic_csv, write_csv, write_json};
use asintest::secondlevel::{reliability_check, MeasureMode};
use asintest::walk::{dump_trajectory, TrajectoryOptions};

const EXIT_PASS: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_INCONCLUSIVE: i32 = 2;
const EXIT_ERROR: i32 = 3;

#[derive(Parser)]
#[command(
    name = "asintest",
    version,
    about = "Second-level arcsine-law test for pseudorandom bit generators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test campaign and emit the report table.
    AsinTest(AsinTestArgs),
    /// Print the reliability certificate for a parameter choice.
    Reliability(ReliabilityArgs),
    /// Write one raw block per seed of a flawed generator.
    FlawedDump(FlawedDumpArgs),
    /// Dump decimated walk trajectories with the iterated-logarithm
    /// envelope.
    TrajectoryDump(TrajectoryDumpArgs),
    /// Sample uniform Dyck paths.
    DyckSample(DyckSampleArgs),
    /// Run the adaptive retest loop (double n while the p-value stays in
    /// the gray zone).
    Adaptive(AdaptiveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Bin the statistics against the arcsine law.
    Direct,
    /// Bin the p-values against the uniform law.
    Pvalue,
}

impl From<ModeArg> for MeasureMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => MeasureMode::DirectArcsine,
            ModeArg::Pvalue => MeasureMode::PValueUniform,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Generator selection shared by the campaign-style subcommands.
#[derive(Args)]
struct GeneratorArgs {
    /// Generator family: randu, minstd, minstd48271, msvc, bsd, glibc,
    /// mt19937-64 (alias mt), flawed, bitfile.
    #[arg(long = "gen")]
    gen: String,
    /// Inner generator for --gen flawed.
    #[arg(long)]
    rng: Option<String>,
    /// Block log-length N for --gen flawed (the block is 2^N bits).
    #[arg(long = "N")]
    block_log2: Option<u32>,
    /// Flawed-seed fraction for --gen flawed; accepts a decimal or a
    /// fraction such as 1/66.
    #[arg(long)]
    tau: Option<String>,
    /// Bit file path for --gen bitfile.
    #[arg(long)]
    bitfile: Option<PathBuf>,
}

impl GeneratorArgs {
    fn parse(&self) -> anyhow::Result<GeneratorSpec> {
        if let Some(spec) = plain_generator(&self.gen) {
            return Ok(spec);
        }
        match self.gen.as_str() {
            "flawed" => self.parse_flawed(),
            "bitfile" => self
                .bitfile
                .clone()
                .map(GeneratorSpec::BitFile)
                .ok_or_else(|| anyhow!("--gen bitfile requires --bitfile <path>")),
            other => Err(anyhow!("unknown generator {other:?}")),
        }
    }

    fn parse_flawed(&self) -> anyhow::Result<GeneratorSpec> {
        let rng = self
            .rng
            .as_deref()
            .ok_or_else(|| anyhow!("--gen flawed requires --rng <name>"))?;
        let inner =
            plain_generator(rng).ok_or_else(|| anyhow!("unknown inner generator {rng:?}"))?;
        let block_log2 = self
            .block_log2
            .ok_or_else(|| anyhow!("--gen flawed requires --N <block log-length>"))?;
        let tau = parse_tau(
            self.tau
                .as_deref()
                .ok_or_else(|| anyhow!("--gen flawed requires --tau <fraction>"))?,
        )?;
        Ok(GeneratorSpec::Flawed(FlawedParams::from_tau(
            inner, block_log2, tau,
        )?))
    }
}

fn plain_generator(name: &str) -> Option<GeneratorSpec> {
    let spec = match name {
        "randu" => GeneratorSpec::Randu,
        "minstd" => GeneratorSpec::Minstd,
        "minstd48271" => GeneratorSpec::Minstd48271,
        "msvc" => GeneratorSpec::MsvcRand,
        "bsd" => GeneratorSpec::BsdRand,
        "glibc" => GeneratorSpec::GlibcRandom,
        "mt19937-64" | "mt" => GeneratorSpec::Mt19937_64,
        _ => return None,
    };
    Some(spec)
}

fn parse_tau(text: &str) -> anyhow::Result<f64> {
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().context("tau numerator")?;
        let den: f64 = den.trim().parse().context("tau denominator")?;
        if den == 0.0 {
            bail!("tau denominator is zero");
        }
        return Ok(num / den);
    }
    text.trim().parse::<f64>().context("tau")
}

/// Statistical parameters shared by asin-test and adaptive.
#[derive(Args)]
struct CampaignArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Sequence length in bits (even).
    #[arg(long)]
    n: u64,
    /// Number of sequences.
    #[arg(long, default_value_t = 10_000)]
    m: u64,
    /// Partition parameter (s + 1 cells).
    #[arg(long, default_value_t = 40)]
    s: u32,
    /// Significance level.
    #[arg(long, default_value_t = 1e-4)]
    alpha: f64,
    /// Binning mode.
    #[arg(long, value_enum, default_value = "direct")]
    mode: ModeArg,
    /// Seed file (one decimal seed per line); OS entropy when absent.
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl CampaignArgs {
    fn config(&self) -> anyhow::Result<CampaignConfig> {
        Ok(CampaignConfig {
            generator: self.generator.parse()?,
            n: self.n,
            m: self.m,
            s: self.s,
            alpha: self.alpha,
            mode: self.mode.into(),
            seed_source: match &self.seeds {
                Some(path) => SeedSource::File(path.clone()),
                None => SeedSource::OsEntropy,
            },
            workers: self.threads,
        })
    }
}

#[derive(Args)]
struct AsinTestArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Optional CSV destination for every per-sequence basic result.
    #[arg(long)]
    basic_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReliabilityArgs {
    /// Sequence length in bits (even).
    #[arg(long)]
    n: u64,
    /// Number of sequences.
    #[arg(long)]
    m: u64,
    /// Partition parameter.
    #[arg(long, default_value_t = 40)]
    s: u32,
}

#[derive(Args)]
struct FlawedDumpArgs {
    /// Inner generator name.
    #[arg(long)]
    rng: String,
    /// Block log-length N (the block is 2^N bits).
    #[arg(long = "N")]
    block_log2: u32,
    /// Flawed-seed fraction; accepts a decimal or a fraction like 1/66.
    #[arg(long)]
    tau: String,
    /// Seed file (one decimal seed per line).
    #[arg(long)]
    seeds: PathBuf,
    /// Output directory for the raw block files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrajectoryDumpArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Walk length in bits per sequence.
    #[arg(long)]
    n: u64,
    /// Number of sequences.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Seed file; OS entropy when absent.
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Decimation budget: at most this many rows per sequence.
    #[arg(long, default_value_t = 4096)]
    max_points: u64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DyckSampleArgs {
    /// Path length in bits (even).
    #[arg(long)]
    len: u64,
    /// Number of paths.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Randomness seed for the internal generator; OS entropy when
    /// absent.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AdaptiveArgs {
    #[command(flatten)]
    campaign: CampaignArgs,
    /// How many times the sequence length may double.
    #[arg(long, default_value_t = 4)]
    max_doublings: u32,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format: json carries the verdict and full history, csv the
    /// history table only (the verdict is the exit code).
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("asintest: {err:#}");
            EXIT_ERROR
        }
    };
    std::process::exit(code);
}

fn run(cmd: Command) -> anyhow::Result<i32> {
    match cmd {
        Command::AsinTest(args) => cmd_asin_test(args),
        Command::Reliability(args) => cmd_reliability(args),
        Command::FlawedDump(args) => cmd_flawed_dump(args),
        Command::TrajectoryDump(args) => cmd_trajectory_dump(args),
        Command::DyckSample(args) => cmd_dyck_sample(args),
        Command::Adaptive(args) => cmd_adaptive(args),
    }
}

/// Opens `--out` or falls back to standard output.
fn open_out(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn campaign_exit_code(outcome: &CampaignOutcome) -> i32 {
    use asintest::secondlevel::Verdict;
    if outcome.report.overall() == Verdict::Fail {
        EXIT_FAIL
    } else if !outcome.report.reliable {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_PASS
    }
}

fn cmd_asin_test(args: AsinTestArgs) -> anyhow::Result<i32> {
    let config = args.campaign.config()?;
    eprintln!(
        "asintest: {} n={} m={} s={} alpha={} mode={}",
        config.generator.name(),
        config.n,
        config.m,
        config.s,
        config.alpha,
        config.mode
    );
    let outcome = run_campaign(&config)?;
    let reports = std::slice::from_ref(&outcome.report);
    let mut out = open_out(&args.out)?;
    match args.format {
        FormatArg::Csv => write_csv(&mut out, reports)?,
        FormatArg::Json => write_json(&mut out, reports)?,
    }
    out.flush()?;
    if let Some(path) = &args.basic_out {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_basic_csv(BufWriter::new(f), &outcome.basic)?;
    }
    eprintln!(
        "asintest: T={:.6e} p={:.6e} d_tv={:.6e} chi2={} tv={} reliable={}",
        outcome.report.t_asin,
        outcome.report.p_chi2,
        outcome.report.d_tv,
        outcome.report.verdict_chi2,
        outcome.report.verdict_tv,
        outcome.report.reliable,
    );
    Ok(campaign_exit_code(&outcome))
}

fn cmd_reliability(args: ReliabilityArgs) -> anyhow::Result<i32> {
    let r = reliability_check(args.n, args.m, args.s)?;
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &r)?;
    writeln!(out)?;
    Ok(EXIT_PASS)
}

fn cmd_flawed_dump(args: FlawedDumpArgs) -> anyhow::Result<i32> {
    let inner = plain_generator(&args.rng)
        .ok_or_else(|| anyhow!("unknown inner generator {:?}", args.rng))?;
    let params = FlawedParams::from_tau(inner, args.block_log2, parse_tau(&args.tau)?)?;
    let seeds = asintest::campaign::parse_seed_file(&args.seeds)?;
    if seeds.is_empty() {
        bail!("{}: no seeds", args.seeds.display());
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "seed,flawed,bits,path")?;
    for seed in seeds {
        let bits = asintest::dyck::flawed_block(&params, seed)?;
        let path = args.out.join(format!("block-{seed}.bin"));
        write_bit_file(&path, &bits)?;
        writeln!(
            out,
            "{seed},{},{},{}",
            params.is_flawed_seed(seed),
            bits.len(),
            path.display()
        )?;
        eprintln!("asintest: wrote {}", path.display());
    }
    Ok(EXIT_PASS)
}

fn cmd_trajectory_dump(args: TrajectoryDumpArgs) -> anyhow::Result<i32> {
    let spec = args.generator.parse()?;
    let seeds = match &args.seeds {
        Some(path) => SeedSource::File(path.clone()),
        None => SeedSource::OsEntropy,
    }
    .seeds_for_round(args.count as usize, 0)?;
    let mut out = open_out(&args.out)?;
    for (i, &seed) in seeds.iter().enumerate() {
        let mut stream = spec.stream(seed)?;
        let opts = TrajectoryOptions {
            max_points: args.max_points,
            seq: Some(i as u64),
            header: i == 0,
        };
        let walk = dump_trajectory(&mut stream, args.n, &opts, &mut out)?;
        eprintln!(
            "asintest: seq {i} seed {seed} final position {} above {}",
            walk.position(),
            walk.above_steps()
        );
    }
    out.flush()?;
    Ok(EXIT_PASS)
}

fn cmd_dyck_sample(args: DyckSampleArgs) -> anyhow::Result<i32> {
    if !args.len.is_multiple_of(2) {
        bail!("--len must be even, got {}", args.len);
    }
    let seed = match args.seed {
        Some(s) => s,
        None => SeedSource::OsEntropy.seeds_for_round(1, 0)?[0],
    };
    let mut stream = GeneratorSpec::Mt19937_64.stream(seed)?;
    let mut out = io::stdout().lock();
    let half_n = (args.len / 2) as usize;
    for _ in 0..args.count {
        let bits = sample_dyck_path(half_n, &mut stream, false)?;
        let line: String = bits.iter().map(|&b| char::from(b'0' + b)).collect();
        writeln!(out, "{line}")?;
    }
    Ok(EXIT_PASS)
}

fn cmd_adaptive(args: AdaptiveArgs) -> anyhow::Result<i32> {
    let config = args.campaign.config()?;
    eprintln!(
        "asintest: adaptive {} n={} m={} budget={}",
        config.generator.name(),
        config.n,
        config.m,
        args.max_doublings
    );
    let outcome = adaptive_retest(&config, args.max_doublings)?;
    let mut out = open_out(&args.out)?;
    match args.format {
        FormatArg::Json => {
            serde_json::to_writer_pretty(&mut out, &outcome)?;
            writeln!(out)?;
        }
        FormatArg::Csv => write_csv(&mut out, &outcome.history)?,
    }
    out.flush()?;
    eprintln!(
        "asintest: verdict {} after {} round(s)",
        outcome.verdict,
        outcome.history.len()
    );
    Ok(match outcome.verdict {
        AdaptiveVerdict::Pass => EXIT_PASS,
        AdaptiveVerdict::Fail => EXIT_FAIL,
        AdaptiveVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}
