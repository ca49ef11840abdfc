use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l2gtx::cli::{self, Failure, Settings};
use l2gtx::selftest::Faults;

#[derive(Parser)]
#[command(name = "l2gtx", version, about = "Event-primitive explanations for time-series classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class-wise global explanations over sampled local ones.
    ExplainGlobal(Common),
    /// Local explanation of one instance.
    ExplainLocal {
        #[command(flatten)]
        common: Common,
        /// Zero-based row of the instance in the data file.
        #[arg(long)]
        index: usize,
    },
    /// Checks the numeric core against reference implementations.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt_percentile: bool,
    },
}

#[derive(Args)]
struct Common {
    /// key=value file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// centroid | uniform | external:<command line>
    #[arg(long)]
    predictor: Option<String>,
    #[arg(long)]
    n_inst: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated merge percentiles.
    #[arg(long)]
    percentiles: Option<String>,
    /// Falls back to $L2GTX_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    top_n: Option<usize>,
    /// Any other setting, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings, Failure> {
        let mut o: Vec<(String, String)> = Vec::new();
        for kv in &self.set {
            let Some((k, v)) = kv.split_once('=') else {
                return Err(usage(format!("--set expects KEY=VALUE, got {kv:?}")));
            };
            o.push((k.trim().into(), v.trim().into()));
        }
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.into(), v));
            }
        };
        put("data", self.data.as_ref().map(|p| p.display().to_string()));
        put("predictor", self.predictor.clone());
        put("n-inst", self.n_inst.map(|v| v.to_string()));
        put("budget", self.budget.map(|v| v.to_string()));
        put("percentiles", self.percentiles.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("jobs", self.jobs.map(|v| v.to_string()));
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("samples", self.samples.map(|v| v.to_string()));
        put("top-n", self.top_n.map(|v| v.to_string()));
        let env_seed = std::env::var("L2GTX_SEED").ok();
        Settings::resolve(self.config.as_deref(), &o, env_seed.as_deref()).map_err(|error| Failure {
            code: cli::EXIT_USAGE,
            error,
        })
    }
}

fn usage(msg: String) -> Failure {
    Failure {
        code: cli::EXIT_USAGE,
        error: l2gtx::Error::Config(msg),
    }
}

fn run(command: Command) -> Result<i32, Failure> {
    match command {
        Command::ExplainGlobal(common) => {
            let settings = common.settings()?;
            let out = cli::explain_global(&settings)?;
            for run in &out.report.runs {
                println!(
                    "p={} macro_gf={:.4} global_clusters={}",
                    run.percentile, run.macro_gf, run.total_global_clusters
                );
                for s in &run.summaries {
                    println!(
                        "  class {}: gf={:.4} clusters={} selected={}",
                        s.class_name,
                        s.gf,
                        s.clusters.len(),
                        s.selected_instances.len()
                    );
                }
            }
            println!("wrote {}", out.dir.display());
            Ok(cli::EXIT_OK)
        }
        Command::ExplainLocal { common, index } => {
            let settings = common.settings()?;
            let (path, report) = cli::explain_local(&settings, index)?;
            let e = &report.explanation;
            match e.fidelity {
                Some(f) => println!("instance {index}: class {} fidelity {f:.4}", e.predicted_class),
                None => println!("instance {index}: class {} fidelity undefined", e.predicted_class),
            }
            for c in &e.clusters {
                println!("  {:>3} {:<10} {:+.4}", c.cluster_id, c.kind, c.importance);
            }
            println!("wrote {}", path.display());
            Ok(cli::EXIT_OK)
        }
        Command::Selftest { seed, corrupt_percentile } => {
            let (checks, code) = cli::run_selftest(seed, Faults { corrupt_percentile });
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {}", f.error);
            ExitCode::from(f.code as u8)
        }
    }
}
