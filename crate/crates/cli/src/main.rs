use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use cvalue::{
    aggregate_by_developer, analyze_repository, emit_report, spearman, AnalysisRun, AnalyzeOptions, Config,
    ReportFormat,
};

#[derive(Parser, Debug)]
#[command(name = "cvalue", version, about = "Score code contributions in a git repository")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze a repository and write the run file.
    Analyze {
        repo: PathBuf,
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Where to write the run.
        #[arg(long, default_value = "cvalue-run.json")]
        out: PathBuf,
        /// Print per-stage timings to stderr.
        #[arg(long)]
        timing: bool,
    },
    /// Render a report from a run file.
    Report {
        run: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Only list developers flagged for inflated commits.
        #[arg(long)]
        inflated: bool,
    },
    /// Rank-correlate commit scores with labels (CSV of commit-id,score).
    Eval {
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Json,
    Csv,
}

/// Error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const USAGE: u8 = 1;
const REPOSITORY: u8 = 2;
const EVAL_INPUT: u8 = 3;

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            repo,
            branch,
            config,
            cache,
            out,
            timing,
        } => {
            let config = match config {
                Some(p) => Config::load(&p).exit_with(USAGE)?,
                None => Config::default(),
            };
            let run = analyze_repository(&repo, &config, &AnalyzeOptions { branch, cache }).exit_with(REPOSITORY)?;
            let text = serde_json::to_string_pretty(&run).exit_with(USAGE)?;
            std::fs::write(&out, text + "\n")
                .with_context(|| format!("writing {}", out.display()))
                .exit_with(USAGE)?;
            if timing {
                for (stage, d) in run.timing.stages() {
                    eprintln!("{stage:>6}: {:.3}s", d.as_secs_f64());
                }
                eprintln!(" total: {:.3}s", run.timing.total.as_secs_f64());
            }
            println!("analyzed {} commits -> {}", run.commits.len(), out.display());
            Ok(())
        }
        Command::Report { run, format, inflated } => {
            let run = load_run(&run).exit_with(USAGE)?;
            let mut devs = aggregate_by_developer(&run);
            if inflated {
                devs.retain(|d| d.inflated);
            }
            let format = match format {
                Format::Json => ReportFormat::Json,
                Format::Csv => ReportFormat::Csv,
            };
            print!("{}", emit_report(&run, &devs, format));
            Ok(())
        }
        Command::Eval { labels, run } => {
            let run = load_run(&run).exit_with(EVAL_INPUT)?;
            let labels = read_labels(&labels).exit_with(EVAL_INPUT)?;
            let (xs, ys) = pair_up(&run, &labels).exit_with(EVAL_INPUT)?;
            let r = spearman(&xs, &ys).exit_with(EVAL_INPUT)?;
            println!("n = {}", xs.len());
            println!("r_s = {r:.6}");
            Ok(())
        }
    }
}

fn load_run(path: &Path) -> anyhow::Result<AnalysisRun> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading run {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing run {}", path.display()))
}

/// `commit-id,score` lines; a first line whose score is not a number is a header.
fn read_labels(path: &Path) -> anyhow::Result<Vec<(String, f64)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading labels {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, score) = line
            .split_once(',')
            .ok_or_else(|| anyhow!("{}:{}: expected `commit-id,score`", path.display(), i + 1))?;
        match score.trim().parse::<f64>() {
            Ok(s) if s.is_finite() => out.push((id.trim().to_string(), s)),
            _ if i == 0 && out.is_empty() => continue,
            _ => bail!("{}:{}: score `{}` is not a number", path.display(), i + 1, score.trim()),
        }
    }
    Ok(out)
}

/// Match labels to run commits by full id or unique prefix.
fn pair_up(run: &AnalysisRun, labels: &[(String, f64)]) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::with_capacity(labels.len());
    let mut ys = Vec::with_capacity(labels.len());
    for (id, score) in labels {
        let hits: Vec<_> = run.commits.iter().filter(|c| c.commit.starts_with(id.as_str())).collect();
        match hits.as_slice() {
            [c] => {
                xs.push(*score);
                ys.push(c.score.cvalue);
            }
            [] => bail!("commit {id} is not in the run"),
            _ => bail!("commit prefix {id} is ambiguous"),
        }
    }
    Ok((xs, ys))
}
