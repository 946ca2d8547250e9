//! Command-line front end: envelope tests on user data, scenario simulation,
//! the power study and its summaries.
//!
//! Exit codes: 0 = curve 1 not extreme (or success), 1 = error, 2 = curve 1 extreme.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use globenv::formats::{
    read_curves_csv, read_study_csv, render_summary_text, summarize, write_curves_csv,
    write_envelope_csv, write_study_csv, EnvelopeSummary, SummaryFilter,
};
use globenv::measures::DEFAULT_QDIR_BETA;
use globenv::sim::simulate_extract;
use globenv::study::{run_study_with_progress, PoolMode, DEFAULT_ALPHA};
use globenv::{
    build_envelope, central_curve, classify, compute_measure, Error, GpConfig, MeasureKind,
    OutlierKind, Result, ScenarioGrid,
};

#[derive(Parser)]
#[command(name = "globenv", version, about = "Global envelopes and measure power studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a global envelope for a curves CSV and test curve 1.
    Envelope(EnvelopeArgs),
    /// Simulate one scenario and write it as a curves CSV.
    Simulate(SimulateArgs),
    /// Run the factorial power study and write a study CSV.
    Study(StudyArgs),
    /// Pivot a study CSV into power-by-s blocks.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct EnvelopeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "erl")]
    measure: MeasureKind,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Tail probability of the qdir quantiles.
    #[arg(long, default_value_t = DEFAULT_QDIR_BETA)]
    beta: f64,
    /// Envelope CSV destination.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON summary destination; printed to stdout when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    s: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.0)]
    scale: f64,
    #[arg(long, default_value = "none")]
    outlier: OutlierKind,
    /// RNG seed; derived from the clock and reported on stderr when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Destination file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// The full published design.
    Paper,
    /// 500 reps, s <= 640, d <= 500.
    Desk,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, value_enum, default_value = "paper")]
    profile: Profile,
    #[arg(long, value_delimiter = ',')]
    s_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    scale_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    outliers: Option<Vec<OutlierKind>>,
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<MeasureKind>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed; required so every study is reproducible.
    #[arg(long)]
    seed: u64,
    /// Worker threads; the output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Draw a separate pool for every (s, d) cell.
    #[arg(long)]
    independent_cells: bool,
    /// Largest shared pool in MiB before regenerating per cell.
    #[arg(long)]
    memory_budget_mb: Option<usize>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    outlier: Option<OutlierKind>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    measure: Option<MeasureKind>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomically(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn cmd_envelope(args: EnvelopeArgs) -> Result<ExitCode> {
    let curves = read_curves_csv(open(&args.input)?)?;
    let (measures, params) = compute_measure(&curves, args.measure, args.beta)?;
    let envelope = build_envelope(&curves, &measures, args.alpha, params.as_ref())?;
    let extreme = classify(&measures, envelope.crit);
    let central = central_curve(&curves, &envelope, args.measure, params.as_ref())?;

    if let Some(path) = &args.output {
        write_atomically(path, |w| write_envelope_csv(w, curves.grid(), &envelope, &central))?;
    }
    let summary = EnvelopeSummary {
        measure: args.measure,
        alpha: args.alpha,
        crit: envelope.crit,
        extreme_indices: (0..extreme.len()).filter(|&i| extreme[i]).map(|i| i + 1).collect(),
        s: curves.num_curves(),
        d: curves.num_points(),
    };
    match &args.summary {
        Some(path) => write_atomically(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &summary)?;
            writeln!(w)?;
            Ok(())
        })?,
        None => println!("{}", serde_json::to_string_pretty(&summary)?),
    }
    Ok(if extreme[0] { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let seed = args.seed.unwrap_or_else(|| {
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        eprintln!("seed: {nanos}");
        nanos
    });
    let curves = simulate_extract(&GpConfig::new(args.scale, seed), args.outlier, args.s, args.d)?;
    match &args.output {
        Some(path) => write_atomically(path, |w| write_curves_csv(w, &curves))?,
        None => write_curves_csv(io::stdout().lock(), &curves)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn study_grid(args: &StudyArgs) -> ScenarioGrid {
    let mut grid = match args.profile {
        Profile::Paper => ScenarioGrid::paper(args.seed),
        Profile::Desk => ScenarioGrid::desk(args.seed),
    };
    if let Some(v) = &args.s_list {
        grid.s_list = v.clone();
    }
    if let Some(v) = &args.d_list {
        grid.d_list = v.clone();
    }
    if let Some(v) = &args.scale_list {
        grid.scale_list = v.clone();
    }
    if let Some(v) = &args.outliers {
        grid.outliers = v.clone();
    }
    if let Some(v) = &args.measures {
        grid.measures = v.clone();
    }
    if let Some(a) = args.alpha {
        grid.alpha = a;
    }
    if let Some(r) = args.reps {
        grid.reps = r;
    }
    if args.independent_cells {
        grid.pool_mode = PoolMode::IndependentCells;
    }
    if let Some(mb) = args.memory_budget_mb {
        grid.memory_budget = mb.saturating_mul(1024 * 1024);
    }
    grid
}

fn cmd_study(args: StudyArgs) -> Result<ExitCode> {
    let grid = study_grid(&args);
    grid.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::InvalidInput("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    eprintln!(
        "study: {} rows, {} replications of {} (scale, outlier) pairs",
        grid.cardinality(),
        grid.reps,
        grid.scale_list.len() * grid.outliers.len()
    );
    let table = pool.install(|| {
        run_study_with_progress(&grid, |done, total| {
            let step = (total / 20).max(1);
            if done % step == 0 || done == total {
                eprintln!("progress: {done}/{total} replications");
            }
        })
    })?;
    write_atomically(&args.output, |w| write_study_csv(w, &table))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_summarize(args: SummarizeArgs) -> Result<ExitCode> {
    let table = read_study_csv(open(&args.input)?)?;
    let filter = SummaryFilter {
        outlier: args.outlier,
        d: args.d,
        scale: args.scale,
        measure: args.measure,
    };
    let blocks = summarize(&table, &filter);
    match args.format {
        Format::Text => print!("{}", render_summary_text(&blocks)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&blocks)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Envelope(a) => cmd_envelope(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Study(a) => cmd_study(a),
        Command::Summarize(a) => cmd_summarize(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
