use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use koopman_core::benchmarks::{
    appendix_check, double_well_convergence, double_well_fd_oracle, double_well_generate, duffing_generate,
    lti_generate, swiss_roll_generate,
};
use koopman_core::edmd::dmd;
use koopman_core::io::{
    bundled_config, compare_to_oracle, comparison_csv, eval_grid, fmt_f64, read_snapshots, run_experiment,
    snapshots_to_csv, DecompositionArchive, DictionaryConfig, EdmdConfig, ExperimentConfig, GridSpec,
    OracleSpec, OutputConfig, SystemConfig, ENV_WORKERS,
};
use koopman_core::numerics::DEFAULT_RTOL;
use koopman_core::{Error, Result};

#[derive(Parser)]
#[command(name = "koopman", version, about = "Extended dynamic mode decomposition toolkit")]
struct Cli {
    /// Worker threads for Gram accumulation and data generation
    /// (overrides KOOPMAN_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark snapshot pairs (or the double-well FD spectrum).
    Gen(GenArgs),
    /// Run EDMD from a config file, a bundled config or flags.
    Fit(FitArgs),
    /// Exact DMD of a snapshot CSV.
    Dmd(DmdArgs),
    /// Evaluate sup-normalized eigenfunctions of an archive on a grid.
    Eval(EvalArgs),
    /// Export the Koopman modes of an archive.
    Modes(ModesArgs),
    /// Compare an archive against a reference spectrum.
    Compare(CompareArgs),
    /// Double-well Monte-Carlo convergence study.
    Converge(ConvergeArgs),
    /// Rank and spectrum of the Fourier-pair fixture.
    AppendixCheck(AppendixArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenSystem {
    Lti,
    Duffing,
    DoubleWell,
    SwissRoll,
    DoubleWellFd,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    system: GenSystem,
    /// Number of snapshot pairs
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Swiss roll anisotropy; isotropic when omitted
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    n_traj: usize,
    #[arg(long, default_value_t = 11)]
    samples_per_traj: usize,
    #[arg(long, default_value_t = 0.25)]
    delta_t: f64,
    /// Grid points of the FD oracle
    #[arg(long, default_value_t = 1024)]
    fd_points: usize,
    /// Eigenpairs of the FD oracle to export
    #[arg(long, default_value_t = 5)]
    count: usize,
    /// For swiss-roll, write the intrinsic coordinates instead of the embedding
    #[arg(long)]
    intrinsic: bool,
    /// Output file; stdout when omitted
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Hermite,
    ThinPlate,
    SpectralElement,
    State,
    FourierPair,
}

#[derive(Args)]
struct FitArgs {
    /// Experiment config (TOML)
    #[arg(long, conflicts_with = "bundled")]
    config: Option<PathBuf>,
    /// Name of a shipped config: lti, duffing, double-well, swiss-roll
    #[arg(long)]
    bundled: Option<String>,
    /// Snapshot CSV; replaces the configured system
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    delta_t: Option<f64>,
    /// Dictionary family when no config is given
    #[arg(long, value_enum)]
    dictionary: Option<Family>,
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    #[arg(long, default_value_t = 100)]
    centers: usize,
    #[arg(long, default_value_t = 5)]
    order: usize,
    #[arg(long, default_value_t = 100)]
    max_points: usize,
    #[arg(long, default_value_t = 6)]
    max_depth: u32,
    /// Subdivide spectral-element boxes uniformly to max_depth
    #[arg(long)]
    uniform: bool,
    #[arg(long, default_value_t = 8)]
    k_param: usize,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of snapshot pairs for generated systems
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    no_modes: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct DmdArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RTOL)]
    rtol: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Lower grid corner, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lo: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    hi: Vec<f64>,
    /// Points per axis
    #[arg(long, value_delimiter = ',')]
    counts: Vec<usize>,
    /// Eigenfunction indices in sorted order
    #[arg(long, value_delimiter = ',', default_value = "0")]
    indices: Vec<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModesArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Lti,
    DoubleWellFd,
    SwissRoll,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, value_enum)]
    oracle: OracleKind,
    /// Index pairs `i:j`, comma separated (LTI and swiss roll)
    #[arg(long, value_delimiter = ',', default_value = "0:0,1:0,0:1")]
    pairs: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1024)]
    fd_points: usize,
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Intrinsic probe grid for the swiss roll
    #[arg(long, value_delimiter = ',', default_value = "61,41")]
    grid: Vec<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    m: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1024)]
    fd_points: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AppendixArgs {
    #[arg(long, default_value_t = 8)]
    k_param: usize,
    #[arg(long, default_value_t = DEFAULT_RTOL)]
    rtol: f64,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let s = match a.system {
        GenSystem::Lti => lti_generate(a.m, a.seed)?,
        GenSystem::Duffing => duffing_generate(a.n_traj, a.samples_per_traj, a.delta_t, a.seed)?,
        GenSystem::DoubleWell => double_well_generate(a.sigma, a.m, a.seed)?,
        GenSystem::SwissRoll => {
            let (embedded, intrinsic) = swiss_roll_generate(a.epsilon, a.m, a.seed)?;
            if a.intrinsic {
                intrinsic
            } else {
                embedded
            }
        }
        GenSystem::DoubleWellFd => {
            let fd = double_well_fd_oracle(a.sigma, a.fd_points)?;
            let count = a.count.min(fd.grid.len());
            let mut text = String::from("x");
            for k in 0..count {
                let _ = write!(text, ",v{k}");
            }
            text.push('\n');
            let _ = write!(text, "lambda");
            for k in 0..count {
                let _ = write!(text, ",{}", fmt_f64(fd.eigenvalues[k]));
            }
            text.push('\n');
            for (i, x) in fd.grid.iter().enumerate() {
                text.push_str(&fmt_f64(*x));
                for k in 0..count {
                    let _ = write!(text, ",{}", fmt_f64(fd.eigenvectors[(i, k)]));
                }
                text.push('\n');
            }
            return emit(a.out.as_deref(), &text);
        }
    };
    emit(a.out.as_deref(), &snapshots_to_csv(&s))
}

fn fit_config(a: &FitArgs) -> Result<ExperimentConfig> {
    let mut cfg = if let Some(path) = &a.config {
        ExperimentConfig::load(path)?
    } else if let Some(name) = &a.bundled {
        let text = bundled_config(name).ok_or_else(|| Error::input(format!("no bundled config named {name:?}")))?;
        ExperimentConfig::from_toml(text)?
    } else {
        let data = a.data.clone().ok_or_else(|| Error::input("fit needs --config, --bundled or --data"))?;
        let family = a.dictionary.ok_or_else(|| Error::input("--data without a config needs --dictionary"))?;
        let dictionary = match family {
            Family::Hermite => DictionaryConfig::Hermite { max_order: a.max_order, extra_terms: Vec::new() },
            Family::ThinPlate => {
                DictionaryConfig::ThinPlate { centers: a.centers, include_constant: true, kmeans_seed: None }
            }
            Family::SpectralElement => DictionaryConfig::SpectralElement {
                order: a.order,
                max_points: Some(a.max_points),
                max_depth: a.max_depth,
                uniform: a.uniform,
                lo: None,
                hi: None,
                tensor: None,
            },
            Family::State => DictionaryConfig::State,
            Family::FourierPair => DictionaryConfig::FourierPair { k_param: a.k_param },
        };
        ExperimentConfig {
            system: SystemConfig::ExternalFile { path: data, delta_t: a.delta_t },
            dictionary,
            edmd: EdmdConfig::default(),
            output: OutputConfig::default(),
        }
    };
    if let Some(path) = &a.data {
        cfg.system = SystemConfig::ExternalFile { path: path.clone(), delta_t: a.delta_t };
    }
    if let Some(seed) = a.seed {
        match &mut cfg.system {
            SystemConfig::Lti { seed: s, .. }
            | SystemConfig::Duffing { seed: s, .. }
            | SystemConfig::DoubleWell { seed: s, .. }
            | SystemConfig::SwissRoll { seed: s, .. } => *s = seed,
            SystemConfig::ExternalFile { .. } => {}
        }
    }
    if let Some(m) = a.m {
        match &mut cfg.system {
            SystemConfig::Lti { m: c, .. }
            | SystemConfig::DoubleWell { m: c, .. }
            | SystemConfig::SwissRoll { m: c, .. } => *c = m,
            _ => return Err(Error::input("--m applies to lti, double-well and swiss-roll systems")),
        }
    }
    if let Some(rtol) = a.rtol {
        cfg.edmd.rtol = rtol;
    }
    if a.no_modes {
        cfg.edmd.modes = false;
    }
    cfg.apply_env();
    if let Some(dir) = &a.output_dir {
        cfg.output.dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fit(a: FitArgs) -> Result<()> {
    let cfg = fit_config(&a)?;
    let out = run_experiment(&cfg)?;
    eprintln!(
        "{} eigenvalues; archive {}, report {}",
        out.archive.eigenvalues.len(),
        out.archive_path.display(),
        out.report_path.display()
    );
    Ok(())
}

fn run_dmd(a: DmdArgs) -> Result<()> {
    let s = read_snapshots(&a.data)?;
    let r = dmd(&s, a.rtol)?;
    let n = r.modes.nrows();
    let mut text = String::from("index,mu_re,mu_im");
    for i in 1..=n {
        let _ = write!(text, ",v{i}_re,v{i}_im");
    }
    text.push('\n');
    for (j, mu) in r.values.iter().enumerate() {
        let _ = write!(text, "{j},{},{}", fmt_f64(mu.re), fmt_f64(mu.im));
        for i in 0..n {
            let v = r.modes[(i, j)];
            let _ = write!(text, ",{},{}", fmt_f64(v.re), fmt_f64(v.im));
        }
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)
}

fn eval(a: EvalArgs) -> Result<()> {
    let archive = DecompositionArchive::load(&a.archive)?;
    let grid = GridSpec { lo: a.lo, hi: a.hi, counts: a.counts };
    emit(a.out.as_deref(), &eval_grid(&archive, &grid, &a.indices)?)
}

fn modes(a: ModesArgs) -> Result<()> {
    let archive = DecompositionArchive::load(&a.archive)?;
    let dec = archive.to_decomposition()?;
    let n = dec.state_dim().ok_or_else(|| Error::input("archive has no modes"))?;
    let mut text = String::from("index,mu_re,mu_im,paired");
    for i in 1..=n {
        let _ = write!(text, ",v{i}_re,v{i}_im");
    }
    text.push('\n');
    for j in 0..dec.len() {
        let _ = write!(text, "{j},{},{},{}", fmt_f64(dec.mu[j].re), fmt_f64(dec.mu[j].im), dec.paired[j]);
        match dec.mode(j) {
            Some(v) => {
                for z in v {
                    let _ = write!(text, ",{},{}", fmt_f64(z.re), fmt_f64(z.im));
                }
            }
            None => text.push_str(&",".repeat(2 * n)),
        }
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)
}

fn parse_pairs(raw: &[String]) -> Result<Vec<(u32, u32)>> {
    raw.iter()
        .map(|p| {
            let (i, j) = p.split_once(':').ok_or_else(|| Error::input(format!("pair {p:?} is not of the form i:j")))?;
            let parse = |v: &str| v.trim().parse::<u32>().map_err(|_| Error::input(format!("bad index in pair {p:?}")));
            Ok((parse(i)?, parse(j)?))
        })
        .collect()
}

fn compare(a: CompareArgs) -> Result<()> {
    let archive = DecompositionArchive::load(&a.archive)?;
    let oracle = match a.oracle {
        OracleKind::Lti => OracleSpec::Lti { pairs: parse_pairs(&a.pairs)? },
        OracleKind::DoubleWellFd => OracleSpec::DoubleWellFd { sigma: a.sigma, n: a.fd_points, count: a.count },
        OracleKind::SwissRoll => {
            let grid: [usize; 2] =
                a.grid.as_slice().try_into().map_err(|_| Error::input("--grid needs two counts"))?;
            OracleSpec::SwissRoll { epsilon: a.epsilon, pairs: parse_pairs(&a.pairs)?, grid }
        }
    };
    let rows = compare_to_oracle(&archive, &oracle)?;
    emit(a.out.as_deref(), &comparison_csv(&rows))
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let r = double_well_convergence(a.sigma, &a.m, a.replicates, a.seed, a.fd_points)?;
    let mut text = String::from("m,eigenvalue_error,eigenfunction_error\n");
    for k in 0..r.m_values.len() {
        let _ = writeln!(text, "{},{},{}", r.m_values[k], fmt_f64(r.eigenvalue_errors[k]), fmt_f64(r.eigenfunction_errors[k]));
    }
    eprintln!("log-log slope {:.4}{}", r.slope, if r.floor_limited { " (round-off floor)" } else { "" });
    emit(a.out.as_deref(), &text)
}

fn appendix(a: AppendixArgs) -> Result<()> {
    let r = appendix_check(a.k_param, a.rtol)?;
    println!("size {} rank {} nullity {}", r.size, r.rank, r.nullity);
    let mut k = 0;
    while k * k <= 2 * a.k_param * a.k_param {
        let target = -((k * k) as i64);
        let mult = r.multiplicity(target as f64, 1e-8);
        if mult > 0 {
            println!("eigenvalue {target} multiplicity {mult}");
        }
        k += 1;
    }
    Ok(())
}

fn configure_workers(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(ENV_WORKERS) {
            Ok(v) if !v.is_empty() => {
                Some(v.parse().map_err(|_| Error::input(format!("{ENV_WORKERS} must be a positive integer, got {v:?}")))?)
            }
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::input("worker count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_workers(cli.workers)?;
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Fit(a) => fit(a),
        Command::Dmd(a) => run_dmd(a),
        Command::Eval(a) => eval(a),
        Command::Modes(a) => modes(a),
        Command::Compare(a) => compare(a),
        Command::Converge(a) => converge(a),
        Command::AppendixCheck(a) => appendix(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
