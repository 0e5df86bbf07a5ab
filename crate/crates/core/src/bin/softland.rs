use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use softland::campaign::{self, CampaignConfig};
use softland::trajectory::{make_reference, BoundarySpec, Direction};

#[derive(Parser)]
#[command(name = "softland", version, about = "Relay soft-landing workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Campaign configuration (TOML); defaults are used when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override the campaign seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory (overrides `output_dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Exit successfully even if some trials were aborted.
    #[arg(long)]
    allow_partial: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Standard 24 V operations on every virtual relay.
    Baseline(Common),
    /// A single trial of the configured controller.
    Trial {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        relay: usize,
        #[arg(long, default_value_t = 0)]
        repetition: usize,
    },
    /// Baseline plus every trial, with per-index statistics.
    Campaign {
        #[command(flatten)]
        common: Common,
        /// 10 relays x 10 repetitions instead of the desk-scale default.
        #[arg(long)]
        full: bool,
    },
    /// Flux-tracking and voltage-feedforward campaigns on the same seeds.
    Compare(Common),
    /// Sample the reference trajectory to CSV.
    TrajectoryDump {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Dir::Making)]
        direction: Dir,
        /// Sampling step (s).
        #[arg(long, default_value_t = 1e-5)]
        dt: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Making,
    Breaking,
}

fn load(common: &Common, full: bool) -> softland::Result<CampaignConfig> {
    let mut cfg = match &common.config {
        Some(path) => CampaignConfig::load(path)?,
        None if full => CampaignConfig::full_protocol(),
        None => CampaignConfig::default(),
    };
    if full && common.config.is_some() {
        cfg.n_relays = 10;
        cfg.n_repetitions = 10;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(aborted: &[&str], allow_partial: bool) -> ExitCode {
    for a in aborted {
        eprintln!("aborted: {a}");
    }
    if aborted.is_empty() || allow_partial {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run(cli: Cli) -> softland::Result<ExitCode> {
    match cli.command {
        Command::Baseline(common) => {
            let cfg = load(&common, false)?;
            let baseline = campaign::with_workers(common.workers, || campaign::run_baseline(&cfg))??;
            fs::create_dir_all(&cfg.output_dir)?;
            campaign::write_baseline_csv(&baseline, &cfg.output_dir.join("baseline.csv"))?;
            println!("baseline median cost {:.6e} over {} operations", baseline.median, baseline.entries.len());
            for f in &baseline.failures {
                eprintln!("failed: {f}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Trial { common, relay, repetition } => {
            let cfg = load(&common, false)?;
            if relay >= cfg.n_relays || repetition >= cfg.n_repetitions {
                return Err(softland::Error::Config(format!(
                    "trial ({relay}, {repetition}) outside {} relays x {} repetitions",
                    cfg.n_relays, cfg.n_repetitions
                )));
            }
            let (baseline, trial) = campaign::with_workers(common.workers, || {
                let b = campaign::run_baseline(&cfg)?;
                let t = campaign::run_trial(&cfg, &b, relay, repetition)?;
                Ok::<_, softland::Error>((b, t))
            })??;
            fs::create_dir_all(&cfg.output_dir)?;
            let path = cfg.output_dir.join(campaign::trial_file_name(relay, repetition));
            campaign::write_trial_csv(&trial, &path)?;
            if let (Some(first), Some(last)) = (trial.operations.first(), trial.operations.last()) {
                println!(
                    "relay {relay} repetition {repetition}: {} operations, normalized cost {:.3} -> {:.3} (baseline {:.3e})",
                    trial.operations.len(),
                    first.cost_norm,
                    last.cost_norm,
                    baseline.median
                );
            }
            Ok(finish(&trial.aborted.iter().map(String::as_str).collect::<Vec<_>>(), common.allow_partial))
        }
        Command::Campaign { common, full } => {
            let cfg = load(&common, full)?;
            let result = campaign::with_workers(common.workers, || campaign::run_campaign(&cfg))??;
            campaign::write_campaign(&cfg, "campaign", &result, &cfg.output_dir, "")?;
            for s in result.stats.per_index.iter().filter(|s| s.operation == 1 || s.operation % 50 == 0) {
                println!(
                    "operation {:4}: cost p10 {:.3} p50 {:.3} p90 {:.3}",
                    s.operation, s.cost_norm.p10, s.cost_norm.p50, s.cost_norm.p90
                );
            }
            Ok(finish(&result.aborted(), common.allow_partial))
        }
        Command::Compare(common) => {
            let cfg = load(&common, false)?;
            let cmp = campaign::with_workers(common.workers, || campaign::compare(&cfg))??;
            campaign::write_comparison(&cfg, &cmp, &cfg.output_dir)?;
            for (n, f, v) in cmp.median_curves().into_iter().filter(|(n, _, _)| *n == 1 || n % 50 == 0) {
                println!("operation {n:4}: median cost flux {f:.3} voltage {v:.3}");
            }
            let mut aborted = cmp.flux.aborted();
            aborted.extend(cmp.voltage.aborted());
            Ok(finish(&aborted, common.allow_partial))
        }
        Command::TrajectoryDump { common, direction, dt } => {
            let cfg = load(&common, false)?;
            let direction = match direction {
                Dir::Making => Direction::Making,
                Dir::Breaking => Direction::Breaking,
            };
            let t = cfg.timing;
            let traj = make_reference(BoundarySpec::new(direction, &cfg.nominal.geometry, t.t0, t.tc, t.tf)?)?;
            fs::create_dir_all(&cfg.output_dir)?;
            let name = match direction {
                Direction::Making => "trajectory_making.csv",
                Direction::Breaking => "trajectory_breaking.csv",
            };
            let path = cfg.output_dir.join(name);
            traj.write_csv(fs::File::create(&path)?, t.t0, t.tf, dt)?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
