use clap::{Args, Parser, Subcommand};
use ffg_core::error::Error;
use ffg_core::harness::{self, ExperimentConfig, Overrides, ResolvedConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ffg", version, about = "Floquet phase-space drive synthesis and diagnostics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write <prefix>.csv and <prefix>.meta.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        ov: OverrideArgs,
    },
    /// Print the smallest root of tan(a^2) = -tanh(a^2) in [lo, hi].
    SweetSpot {
        #[arg(long, default_value_t = 1.0)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        /// Print every root in the bracket, not just the smallest.
        #[arg(long)]
        all: bool,
    },
    /// Check a config and print it fully resolved.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        ov: OverrideArgs,
    },
}

#[derive(Args)]
struct OverrideArgs {
    /// Worker threads for the parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Directory for the output files; keeps the config's file prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_fock: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
}

impl OverrideArgs {
    fn resolve(&self, path: &Path) -> Result<ResolvedConfig, Error> {
        if let Some(k) = self.threads {
            if k == 0 {
                return Err(Error::Config {
                    field: "--threads".into(),
                    msg: "must be >= 1".into(),
                });
            }
            // fails only if a pool already exists, which is harmless here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
        let ov = Overrides {
            n_fock: self.n_fock,
            m_max: self.m_max,
            l_max: self.l_max,
            out_dir: self.out.clone(),
        };
        ExperimentConfig::load(path)?.resolve(&ov)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match exec(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::Json(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn exec(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Run { config, ov } => {
            let cfg = ov.resolve(&config)?;
            log::info!("running {} -> {}", cfg.experiment.name(), cfg.output);
            let t = harness::run_and_save(&cfg)?;
            println!("wrote {}.csv ({} rows) and {}.meta.json", cfg.output, t.rows(), cfg.output);
            for (k, v) in &t.metadata.summary {
                println!("{k} = {v}");
            }
        }
        Cmd::SweetSpot { lo, hi, all } => {
            if all {
                for r in harness::sweet_spot_roots(lo, hi)? {
                    println!("{r:.10}");
                }
            } else {
                let a = harness::sweet_spot_solve(lo, hi)?;
                println!("{a:.10}");
            }
        }
        Cmd::Validate { config, ov } => {
            let cfg = ov.resolve(&config)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
        }
    }
    Ok(())
}
