use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use loopforge::harness::experiment::{
    class_rows, holonomy_rows, run_experiment, run_to_dir, ExperimentConfig, Summary, CLASS_HEADER, HOLONOMY_HEADER,
};
use loopforge::harness::output::{fmt_f64, word_json};
use loopforge::harness::{for_each_loop, tail_bound, with_thread_limit};
use loopforge::WeightedGraph;

#[derive(Parser)]
#[command(name = "loopforge", version, about = "Random walk loop soups on weighted graphs")]
#[command(after_help = "Set LOOPFORGE_THREADS to cap the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw Wilson samples and write summary.json, classes.csv, trees.csv,
    /// fits.csv and ensemble.jsonl.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated Wilson vertex order.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<String>>,
        /// Geodesic classes up to this length are reported.
        #[arg(long, default_value_t = 6)]
        class_len: usize,
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long)]
        group: Option<String>,
    },
    /// List every unbased loop up to a length cutoff as CSV on stdout.
    Enumerate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Exact Poisson means per geodesic class, or per holonomy class when an
    /// assignment is given, as CSV on stdout.
    Classes {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Overrides the group named in the assignment file.
        #[arg(long, requires = "assignment")]
        group: Option<String>,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Add Monte Carlo estimates from this many samples.
        #[arg(long, default_value_t = 0)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an experiment config; exits 0 iff every check and test passes.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `out/` next to the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_summary(s: &Summary) {
    for c in &s.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        println!("{verdict}  {}  observed={} expected={} tol={}", c.name, c.observed, c.expected, c.tolerance);
    }
    for t in &s.tests {
        let verdict = if t.pass { "pass" } else { "FAIL" };
        println!("{verdict}  {}  p={:.4e} (threshold {:.4e})", t.test.name, t.test.p_value, s.bonferroni_threshold);
    }
    println!("{}", if s.all_pass { "ALL PASS" } else { "SOME CHECKS FAILED" });
}

fn enumerate(graph: &Path, max_len: usize) -> Result<()> {
    let g = WeightedGraph::load(graph)?;
    let stdout = std::io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    w.write_record(["loop", "length", "mult", "mass", "geodesic_class"])?;
    let mut total = 0.0;
    let mut count = 0u64;
    let mut failure = None;
    for_each_loop(&g, max_len, |v| {
        total += v.mass;
        count += 1;
        let class = loopforge::loops::reduce_closed_walk(v.word);
        let row = [
            word_json(&g, v.word),
            v.word.len().to_string(),
            v.mult.to_string(),
            fmt_f64(v.mass),
            word_json(&g, class.word()),
        ];
        match w.write_record(&row) {
            Ok(()) => true,
            Err(e) => {
                failure = Some(e);
                false
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    w.flush()?;
    eprintln!(
        "{count} loops, enumerated mass {}, tail bound {}, total mass {}",
        fmt_f64(total),
        fmt_f64(tail_bound(&g, max_len)),
        fmt_f64(g.total_loop_mass()?)
    );
    Ok(())
}

fn classes(cfg: &ExperimentConfig) -> Result<()> {
    let report = run_experiment(cfg)?;
    let csv = if cfg.assignment.is_some() {
        loopforge::harness::output::csv_string(&HOLONOMY_HEADER, &holonomy_rows(&report.holonomy))?
    } else {
        loopforge::harness::output::csv_string(&CLASS_HEADER, &class_rows(&report.classes))?
    };
    std::io::stdout().write_all(csv.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample { graph, replicas, seed, out, order, class_len, assignment, group } => {
            if group.is_some() && assignment.is_none() {
                bail!("--group requires --assignment");
            }
            let mut cfg = ExperimentConfig::for_graph(graph);
            cfg.replicas = replicas;
            cfg.seed = seed;
            cfg.order = order;
            cfg.max_len = 0;
            cfg.geodesic_max_len = class_len;
            cfg.assignment = assignment;
            cfg.group = group;
            cfg.dump_ensemble = true;
            let s = run_to_dir(&cfg, &out)?;
            print_summary(&s);
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { graph, max_len } => {
            enumerate(&graph, max_len)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classes { graph, assignment, group, max_len, replicas, seed } => {
            let mut cfg = ExperimentConfig::for_graph(graph);
            cfg.assignment = assignment;
            cfg.group = group;
            cfg.geodesic_max_len = max_len;
            cfg.max_len = 0;
            cfg.replicas = replicas;
            cfg.seed = seed;
            classes(&cfg)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.parent().unwrap_or(Path::new(".")).join("out"));
            let s = run_to_dir(&cfg, &out).with_context(|| format!("running {}", config.display()))?;
            print_summary(&s);
            Ok(if s.all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_thread_limit(|| run(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
