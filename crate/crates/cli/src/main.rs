use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seplab::formula::{p_alpha, DEFAULT_TOL};
use seplab::stats::{AxisLabel, DEFAULT_FLATNESS_MIN_TOTAL};
use seplab_cli::analyze::analyze_dir;
use seplab_cli::checkpoint::{checkpoint_path, CHECKPOINT_FILE};
use seplab_cli::config::{read_config_file, ConfigPairs, DEFAULT_FIT_MIN_TOTAL};
use seplab_cli::report::export;
use seplab_cli::runner::report_from_checkpoint;
use seplab_cli::{resume, run_from, CliError, CliResult, ExperimentConfig, FitSpec, RunControl, RunOutcome};

/// Monte Carlo estimates of PPT probabilities for random bipartite states.
#[derive(Parser)]
#[command(name = "seplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample states, bin their invariants and export a report.
    Sample(SampleArgs),
    /// Flatness tests and radial fits on exported CSVs.
    Analyze(AnalyzeArgs),
    /// Evaluate the closed-form series P(alpha).
    Formula(FormulaArgs),
    /// Re-emit the report stored in a checkpoint.
    Report(ReportArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Flat JSON config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subsystem dimensions, e.g. 2x3.
    #[arg(long)]
    shape: Option<String>,
    /// `hs` or `induced:K`.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pool the two radii through the symmetrized joint histogram.
    #[arg(long)]
    symmetrize: bool,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    /// `cholesky` or `eigenvalues`.
    #[arg(long)]
    ppt_method: Option<String>,
    #[arg(long)]
    ci_level: Option<f64>,
    /// `wilson` or `wald`.
    #[arg(long)]
    ci_method: Option<String>,
    #[arg(long)]
    flatness_min_total: Option<u64>,
    #[arg(long)]
    fit_min_total: Option<u64>,
    /// `[AXIS:]a,b,lo,hi`; repeatable.
    #[arg(long)]
    fit: Vec<String>,
    /// Continue from the checkpoint in the output directory.
    #[arg(long)]
    resume: bool,
    /// Stop after this many checkpoint chunks (resume later).
    #[arg(long)]
    max_chunks: Option<usize>,
    /// No progress lines.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FLATNESS_MIN_TOTAL)]
    flatness_min_total: u64,
    /// `[AXIS:]a,b,lo,hi`; repeatable.
    #[arg(long)]
    fit: Vec<String>,
    /// Axis for fits given without a prefix.
    #[arg(long, default_value = "r_A")]
    fit_axis: String,
    #[arg(long, default_value_t = DEFAULT_FIT_MIN_TOTAL)]
    fit_min_total: u64,
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct ReportArgs {
    /// Checkpoint file, or a directory holding one.
    #[arg(long = "in")]
    input: PathBuf,
    /// Export directory; defaults to the checkpoint's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sample_pairs(a: &SampleArgs) -> CliResult<ConfigPairs> {
    let mut pairs = match &a.config {
        Some(path) => read_config_file(path)?,
        None => ConfigPairs::new(),
    };
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    };
    set("shape", a.shape.clone());
    set("measure", a.measure.clone());
    set("samples", a.samples.map(|v| v.to_string()));
    set("seed", a.seed.map(|v| v.to_string()));
    set("workers", a.workers.map(|v| v.to_string()));
    set("bins", a.bins.map(|v| v.to_string()));
    set("out", a.out.as_ref().map(|p| p.display().to_string()));
    set("symmetrize", a.symmetrize.then(|| "true".to_string()));
    set("checkpoint_every", a.checkpoint_every.map(|v| v.to_string()));
    set("ppt_method", a.ppt_method.clone());
    set("ci_level", a.ci_level.map(|v| v.to_string()));
    set("ci_method", a.ci_method.clone());
    set("flatness_min_total", a.flatness_min_total.map(|v| v.to_string()));
    set("fit_min_total", a.fit_min_total.map(|v| v.to_string()));
    set("fit", (!a.fit.is_empty()).then(|| a.fit.join(";")));
    Ok(pairs)
}

fn sample(a: SampleArgs) -> CliResult<()> {
    let cfg = ExperimentConfig::from_pairs(&sample_pairs(&a)?)?;
    let control = RunControl {
        max_chunks: a.max_chunks,
        progress: !a.quiet,
    };
    let outcome = if a.resume {
        let dir = cfg
            .out_dir
            .as_ref()
            .ok_or_else(|| CliError::Validation("--resume needs an output directory".into()))?;
        resume(&cfg, &checkpoint_path(dir), control)?
    } else {
        run_from(&cfg, None, control)?
    };
    match outcome {
        RunOutcome::Completed(report) => {
            print!("{}", report.summary());
            if let Some(dir) = &cfg.out_dir {
                let files = export(&report, dir)?;
                println!("wrote {} files to {}", files.len(), dir.display());
            }
        }
        RunOutcome::Stopped { next_index } => {
            println!(
                "stopped at sample {next_index} of {}; continue with --resume",
                cfg.samples
            );
        }
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let axis: AxisLabel = a.fit_axis.parse()?;
    let fits = a
        .fit
        .iter()
        .map(|s| FitSpec::parse_with_axis(s, axis))
        .collect::<CliResult<Vec<_>>>()?;
    let analysis = analyze_dir(&a.input, a.flatness_min_total, &fits, a.fit_min_total)?;
    println!("{}", serde_json::to_string_pretty(&analysis).expect("analysis serializes"));
    Ok(())
}

fn formula(a: FormulaArgs) -> CliResult<()> {
    let s = p_alpha(a.alpha, a.tol)?;
    println!("P({}) = {:.17}", a.alpha, s.value);
    println!("terms = {}", s.terms);
    Ok(())
}

fn report(a: ReportArgs) -> CliResult<()> {
    let path = if a.input.is_dir() {
        a.input.join(CHECKPOINT_FILE)
    } else {
        a.input.clone()
    };
    let (_, report) = report_from_checkpoint(&path)?;
    print!("{}", report.summary());
    let dir = a
        .out
        .or_else(|| path.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let files = export(&report, &dir)?;
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Analyze(a) => analyze(a),
        Command::Formula(a) => formula(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
