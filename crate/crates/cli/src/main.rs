use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use litcat::catalog::CorpusStats;
use litcat::evaluation::{evaluate, Benchmark, EvalInputs, SystemResults, EVAL_REPORT_FORMAT};
use litcat::pipeline::{eval_records, open_catalog, Pipeline, RunOptions, Stage};
use litcat::providers::config::{Profile, ProviderConfig, ProviderSet};
use litcat::records::write_record;
use litcat_server::Cors;

/// Published expanded L1 recall on the 54-paper benchmark, for live runs.
const REFERENCE_L1_EXPANDED: f64 = 92.64;
const REFERENCE_TOLERANCE: f64 = 5.0;

#[derive(Parser)]
#[command(name = "litcat", version, about = "Turn research articles into a searchable dataset catalog")]
struct Cli {
    /// Article directory with a manifest.jsonl (ingest and pipeline).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Run directory holding stage outputs and the catalog.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Provider configuration (TOML). Without it only unseeded reference
    /// providers are used and nothing touches the network.
    #[arg(long, global = true)]
    providers: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Offline)]
    profile: ProfileArg,
    /// Worker threads per stage.
    #[arg(long, global = true, default_value_t = 4)]
    jobs: usize,
    /// Reuse stage outputs recorded in the run manifest.
    #[arg(long, global = true)]
    resume: bool,
    /// More logging (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Offline,
    Live,
}

#[derive(Subcommand)]
enum Command {
    /// Parse articles and record them in the run manifest.
    Ingest,
    /// Keep urban-science articles.
    Gate,
    /// Extract dataset cards.
    Extract,
    /// Check cards against their evidence.
    Verify,
    /// Normalize coverage and labels, drop derived datasets.
    Refine,
    /// Probe URLs and search for replacements.
    Link,
    /// Load refined entries into the catalog.
    Index,
    /// Run every stage in order.
    Pipeline,
    /// Serve the catalog over HTTP.
    Serve {
        #[arg(long, env = "LITCAT_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        /// Allowed browser origin; repeatable. Any origin when absent.
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
    },
    /// Print catalog statistics as JSON.
    Stats,
    /// Score the run against an annotated benchmark.
    Eval {
        #[arg(long)]
        benchmark: PathBuf,
        /// Recorded search results of a comparison system; repeatable.
        #[arg(long = "system")]
        systems: Vec<PathBuf>,
        /// Where to write the JSON report. Defaults to <out>/eval/report.json.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the bundled synthetic corpus to --out.
    Synth {
        /// Only check that --out holds the current corpus.
        #[arg(long)]
        check: bool,
    },
}

fn providers(cli: &Cli) -> Result<ProviderSet> {
    let profile = match cli.profile {
        ProfileArg::Offline => Profile::Offline,
        ProfileArg::Live => Profile::Live,
    };
    match &cli.providers {
        Some(path) => {
            let config = ProviderConfig::load(path).with_context(|| format!("loading providers from {}", path.display()))?;
            Ok(config.build(profile)?)
        }
        None if matches!(cli.profile, ProfileArg::Live) => bail!("--profile live needs --providers <config>"),
        None => Ok(ProviderSet::offline()),
    }
}

fn pipeline(cli: &Cli) -> Result<Pipeline> {
    let mut opts = RunOptions::new(&cli.out);
    opts.input = cli.input.clone();
    opts.jobs = cli.jobs.max(1);
    opts.resume = cli.resume;
    if let Some(path) = &cli.providers {
        opts.retry = ProviderConfig::load(path)?.retry();
    }
    Ok(Pipeline::new(opts, providers(cli)?)?)
}

fn run_stage(cli: &Cli, stage: Stage) -> Result<()> {
    let report = pipeline(cli)?.run_stage(stage).with_context(|| format!("stage {stage}"))?;
    println!("{report}");
    Ok(())
}

fn eval(cli: &Cli, benchmark: &Path, systems: &[PathBuf], report_path: Option<&Path>) -> Result<()> {
    let p = providers(cli)?;
    let bench = Benchmark::load(benchmark)?;
    let (extracted, refined) = eval_records(&cli.out, litcat::harmonization::Gazetteer::bundled())?;
    let systems: Vec<SystemResults> = systems.iter().map(|s| SystemResults::load(s)).collect::<Result<_, _>>()?;
    let inputs = EvalInputs { benchmark: &bench, extracted: &extracted, refined: Some(&refined), systems: &systems };
    let report = evaluate(&inputs, p.embedding.as_ref(), p.judge.as_ref())?;
    print!("{}", report.to_text());
    let path = report_path.map(Path::to_path_buf).unwrap_or_else(|| cli.out.join("eval/report.json"));
    write_record(&path, EVAL_REPORT_FORMAT, &report).with_context(|| format!("writing {}", path.display()))?;
    println!("\nreport written to {}", path.display());
    if matches!(cli.profile, ProfileArg::Live) {
        let got = report.recall.l1_expanded.percent().unwrap_or(0.0);
        let verdict = if (got - REFERENCE_L1_EXPANDED).abs() <= REFERENCE_TOLERANCE { "within" } else { "outside" };
        println!(
            "live: expanded L1 recall {got:.2} vs published {REFERENCE_L1_EXPANDED:.2}, {verdict} ±{REFERENCE_TOLERANCE} (informational)"
        );
    }
    Ok(())
}

fn serve(cli: &Cli, bind: &str, origins: &[String]) -> Result<()> {
    let p = providers(cli)?;
    let catalog = Arc::new(open_catalog(&cli.out, p.embedding.clone())?);
    let cors = if origins.is_empty() { Cors::Any } else { Cors::Origins(origins.to_vec()) };
    let app = litcat_server::router(catalog.clone(), &cors);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind).await.with_context(|| format!("binding {bind}"))?;
        // first stdout line, so scripts binding port 0 can find us
        println!("listening on http://{}", listener.local_addr()?);
        tracing::info!(entries = catalog.len(), "serving catalog");
        litcat_server::serve(listener, app).await?;
        Ok(())
    })
}

fn synth(out: &Path, check: bool) -> Result<()> {
    if check {
        let stale = litcat::synthetic::stale_files(out);
        if !stale.is_empty() {
            let names: Vec<String> = stale.iter().map(|p| p.display().to_string()).collect();
            bail!("{} is out of date: {}", out.display(), names.join(", "));
        }
        println!("{} is current", out.display());
        return Ok(());
    }
    let n = litcat::synthetic::write_corpus(out).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {n} files to {}", out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest => run_stage(cli, Stage::Ingest),
        Command::Gate => run_stage(cli, Stage::Gate),
        Command::Extract => run_stage(cli, Stage::Extract),
        Command::Verify => run_stage(cli, Stage::Verify),
        Command::Refine => run_stage(cli, Stage::Refine),
        Command::Link => run_stage(cli, Stage::Link),
        Command::Index => run_stage(cli, Stage::Index),
        Command::Pipeline => {
            for report in pipeline(cli)?.run_all()? {
                println!("{report}");
            }
            Ok(())
        }
        Command::Serve { bind, cors_origins } => serve(cli, bind, cors_origins),
        Command::Stats => {
            let p = providers(cli)?;
            let stats: Arc<CorpusStats> = open_catalog(&cli.out, p.embedding)?.stats();
            println!("{}", serde_json::to_string_pretty(stats.as_ref())?);
            Ok(())
        }
        Command::Eval { benchmark, systems, report } => eval(cli, benchmark, systems, report.as_deref()),
        Command::Synth { check } => synth(&cli.out, *check),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
