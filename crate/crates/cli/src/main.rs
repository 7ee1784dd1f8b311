//! `percmix`: sample percolation boxes and measure random walks on their
//! largest cluster.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use percmix::error::Error;
use percmix::experiments::{
    analyze_instance, emit_report, instance_profile, run_scaling, write_rows_to, Certification, ExperimentConfig, Quantity,
    RunOptions,
    ScalingReport,
};
use percmix::geometry::{fpp_regression, good_density_curve, write_density_csv, FppOptions};
use percmix::lattice::BoxSpec;
use percmix::percolation::{BondConfig, SiteConfig};
use percmix::walk::MixingMode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "percmix", version, about = "Random walks on supercritical percolation clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a configuration and write it in binary or text form.
    Generate(GenerateArgs),
    /// Evaluate quantities on one instance and print result rows.
    Analyze(AnalyzeArgs),
    /// Conductance profile of one instance as CSV.
    Profile(ProfileArgs),
    /// Sweep box sizes and seeds, fit exponents and write a report.
    Scaling(ScalingArgs),
    /// Good-site densities of the renormalised lattice.
    Renorm(RenormArgs),
    /// Dual first-passage regression on a planar box.
    Fpp(FppArgs),
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0.7)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Bond,
    Site,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Binary,
    Text,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = Kind::Bond)]
    kind: Kind,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output file; text goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    PairwiseSup,
    FromStationarity,
}

impl From<ModeArg> for MixingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PairwiseSup => MixingMode::PairwiseSup,
            ModeArg::FromStationarity => MixingMode::FromStationarity,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated; all quantities when omitted.
    #[arg(long, value_delimiter = ',')]
    quantities: Option<Vec<Quantity>>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Write the rows to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    /// TOML file with `ExperimentConfig` keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Box radii, comma-separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    /// `a..b` (half-open) or a comma-separated list.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    #[arg(long, value_delimiter = ',')]
    quantities: Option<Vec<Quantity>>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    workers: Option<usize>,
    /// Report directory; also holds the journal `journal.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep instances already in the journal.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct RenormArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Box radius.
    #[arg(long, default_value_t = 60)]
    n: u32,
    #[arg(long, default_value_t = 0.7)]
    p: f64,
    /// Block scales `N`, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [8u32, 16, 24])]
    blocks: Vec<u32>,
    #[arg(long, value_parser = parse_seeds, default_value = "0..20")]
    seeds: SeedList,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FppArgs {
    #[arg(long, default_value_t = 32)]
    n: u32,
    #[arg(long, default_value_t = 0.7)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    pairs: usize,
    /// Write the sampled pairs as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
struct SeedList(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let bad = |e: std::num::ParseIntError| format!("bad seed list {s:?}: {e}");
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        return Ok(SeedList((a..b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(bad))
        .collect::<Result<_, _>>()
        .map(SeedList)
}

/// Failure of a subcommand with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) | Error::Domain(_) | Error::UnsupportedDimension { .. } => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Profile(a) => profile(a),
        Command::Scaling(a) => scaling(a),
        Command::Renorm(a) => renorm(a),
        Command::Fpp(a) => fpp(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("percmix: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(path)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn generate(a: GenerateArgs) -> Outcome {
    let spec = BoxSpec::new(a.instance.d, a.instance.n);
    let (p, seed) = (a.instance.p, a.instance.seed);
    let (bytes, text) = match a.kind {
        Kind::Bond => {
            let c = BondConfig::sample(spec, p, seed)?;
            (c.to_bytes(), c.to_text())
        }
        Kind::Site => {
            let c = SiteConfig::sample(spec, p, seed)?;
            (c.to_bytes(), c.to_text())
        }
    };
    match (a.format, &a.out) {
        (Format::Binary, None) => {
            return Err(Error::Validation("binary output needs --out".into()).into());
        }
        (Format::Binary, Some(path)) => sink(Some(path))?.write_all(&bytes)?,
        (Format::Text, out) => sink(out.as_deref())?.write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn analyze(a: AnalyzeArgs) -> Outcome {
    let mut config = ExperimentConfig {
        d: a.instance.d,
        p: a.instance.p,
        n_list: vec![a.instance.n],
        seeds: vec![a.instance.seed],
        quantities: a.quantities.unwrap_or_else(|| Quantity::ALL.to_vec()),
        ..ExperimentConfig::preset()
    };
    if let Some(m) = a.mode {
        config.mode = m.into();
    }
    config.validate()?;
    let rows = analyze_instance(&config, a.instance.n, a.instance.seed);
    let mut w = sink(a.out.as_deref())?;
    write_rows_to(&mut w, &rows)?;
    w.flush()?;
    let errors = rows.iter().filter(|r| r.certification == Certification::Error).count();
    Ok(partial_if(errors))
}

fn profile(a: ProfileArgs) -> Outcome {
    let i = &a.instance;
    let p = instance_profile(i.d, i.n, i.p, i.seed)?;
    eprintln!(
        "|V| = {}, pi_min = {}, {} profile points ({})",
        p.states,
        p.pi_min,
        p.profile.len(),
        if p.profile.is_exact() { "exact" } else { "upper envelope" }
    );
    let mut w = sink(a.out.as_deref())?;
    p.profile.write_csv(&mut w)?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn scaling(a: ScalingArgs) -> Outcome {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(),
    };
    if let Some(d) = a.d {
        config.d = d;
    }
    if let Some(p) = a.p {
        config.p = p;
    }
    if let Some(n) = a.n {
        config.n_list = n;
    }
    if let Some(s) = a.seeds {
        config.seeds = s.0;
    }
    if let Some(q) = a.quantities {
        config.quantities = q;
    }
    if let Some(m) = a.mode {
        config.mode = m.into();
    }
    if let Some(w) = a.workers {
        config.workers = w;
    }
    if let Some(out) = a.out {
        config.out = out;
    }
    config.validate()?;
    let opts = RunOptions {
        journal: Some(config.out.join("journal.csv")),
        resume: a.resume,
        max_instances: None,
    };
    let report = run_scaling(&config, &opts)?;
    let files = emit_report(&report, &config.out)?;
    print_summary(&report);
    eprintln!("wrote {} and {}", files.results.display(), files.summary.display());
    Ok(partial_if(report.error_rows()))
}

fn print_summary(report: &ScalingReport) {
    let mut out = io::stdout().lock();
    for (q, fit) in &report.fits {
        let _ = match report.fit(q) {
            Some(f) => writeln!(
                out,
                "{q:<24} slope {:+.4}  R2 {:.4}  n {}..{}  ({} points, {})",
                f.slope,
                f.r2,
                f.n_min,
                f.n_max,
                f.points,
                f.certification.as_str()
            ),
            None => writeln!(out, "{q:<24} no fit: {fit:?}"),
        };
    }
    for (name, c) in &report.checks {
        let _ = writeln!(out, "{name:<24} pass {}  fail {}", c.pass, c.fail);
    }
    let _ = writeln!(out, "error rows: {}", report.error_rows());
}

fn renorm(a: RenormArgs) -> Outcome {
    let spec = BoxSpec::new(a.d, a.n);
    let rows = good_density_curve(spec, a.p, &a.blocks, &a.seeds.0)?;
    let mut w = sink(a.out.as_deref())?;
    write_density_csv(&rows, &mut w)?;
    w.flush()?;
    for &block in &a.blocks {
        let ds: Vec<f64> = rows.iter().filter(|r| r.block == block).map(|r| r.density).collect();
        eprintln!(
            "N = {block}: mean good density {:.4} over {} seeds",
            ds.iter().sum::<f64>() / ds.len() as f64,
            ds.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn fpp(a: FppArgs) -> Outcome {
    let config = BondConfig::sample(BoxSpec::new(2, a.n), a.p, a.seed)?;
    let opts = FppOptions {
        pairs: a.pairs,
        seed: a.seed,
        ..Default::default()
    };
    let probe = fpp_regression(&config, &opts)?;
    if let Some(path) = &a.out {
        let mut w = sink(Some(path))?;
        writeln!(w, "a,b,l1,distance")?;
        for q in &probe.pairs {
            writeln!(w, "{},{},{},{}", q.a, q.b, q.l1, q.distance)?;
        }
        w.flush()?;
    }
    println!(
        "pairs {}  slope {:.4}  intercept {:.4}  R2 {:.4}",
        probe.pairs.len(),
        probe.fit.slope,
        probe.fit.intercept,
        probe.fit.r2
    );
    Ok(ExitCode::SUCCESS)
}

fn partial_if(errors: usize) -> ExitCode {
    if errors > 0 {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    }
}
