//! Experimental campaigns: standard-operation baselines, controlled trials on
//! perturbed relay units with a series-resistance step, percentile
//! statistics per operation index and the flux/voltage comparison.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{PiGains, VoltageLimits};
use crate::operation::{run_operation, ControlMode, ControlStack, Timing};
use crate::plant::{perturb_params, probe_resistance, SimConfig, Spread};
use crate::r2r::{self, nm_init, nm_next_candidate, nm_update, CostConfig, NelderMeadConfig};
use crate::relay::{ParamVector, RelayParams};
use crate::trajectory::Direction;

/// Series resistance added from a given operation on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResistanceStep {
    pub ohms: f64,
    /// 1-based index of the first operation with the extra resistance.
    pub at_operation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub n_relays: usize,
    pub n_repetitions: usize,
    pub n_operations: usize,
    /// Standard operations per relay and resistance condition in the baseline.
    pub n_baseline: usize,
    pub resistance_step: Option<ResistanceStep>,
    /// Relative standard deviation of the resistance from one operation to
    /// the next (temperature fluctuation).
    pub resistance_jitter: f64,
    pub controller_mode: ControlMode,
    pub nominal: RelayParams,
    pub spreads: Spread,
    pub timing: Timing,
    pub gains: PiGains,
    pub limits: VoltageLimits,
    pub sim: SimConfig,
    pub cost: CostConfig,
    pub optimizer: NelderMeadConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for CampaignConfig {
    /// Desk-scale campaign: 20 virtual relays, one repetition each.
    fn default() -> Self {
        Self {
            n_relays: 20,
            n_repetitions: 1,
            n_operations: 300,
            n_baseline: 5,
            resistance_step: Some(ResistanceStep { ohms: 150.0, at_operation: 251 }),
            resistance_jitter: 0.002,
            controller_mode: ControlMode::FluxTracking,
            nominal: RelayParams::default(),
            spreads: default_spreads(),
            timing: Timing::default(),
            gains: PiGains::default(),
            limits: VoltageLimits::default(),
            sim: SimConfig::default(),
            cost: CostConfig::default(),
            optimizer: NelderMeadConfig::default(),
            seed: 2024,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Unit-to-unit variability of the nominal relay.
pub fn default_spreads() -> Spread {
    Spread { resistance: 0.03, ..Spread::uniform(0.1) }
}

impl CampaignConfig {
    /// The full protocol: 10 relays with 10 repetitions each.
    pub fn full_protocol() -> Self {
        Self { n_relays: 10, n_repetitions: 10, ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_relays == 0 || self.n_repetitions == 0 || self.n_operations == 0 {
            return Err(Error::Config("n_relays, n_repetitions and n_operations must be at least 1".into()));
        }
        if self.n_baseline == 0 {
            return Err(Error::Config("n_baseline must be at least 1".into()));
        }
        if let Some(step) = self.resistance_step {
            if !(1..=self.n_operations).contains(&step.at_operation) {
                return Err(Error::Config(format!(
                    "resistance_step.at_operation = {} outside [1, {}]",
                    step.at_operation, self.n_operations
                )));
            }
            if !step.ohms.is_finite() {
                return Err(Error::Config("resistance_step.ohms must be finite".into()));
            }
        }
        if !(self.resistance_jitter >= 0.0) {
            return Err(Error::Config("resistance_jitter must be non-negative".into()));
        }
        if self.controller_mode == ControlMode::IdealTracking {
            return Err(Error::Config("IdealTracking is an analysis mode, not a campaign controller".into()));
        }
        self.nominal.validate()?;
        self.gains.validate()?;
        self.sim.validate()
    }

    fn step_ohms(&self, operation: usize) -> f64 {
        match self.resistance_step {
            Some(s) if operation >= s.at_operation => s.ohms,
            _ => 0.0,
        }
    }
}

/// splitmix64 finalizer, used to derive independent stream seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(base), |acc, t| mix(acc ^ mix(*t)))
}

const TAG_RELAY: u64 = 1;
const TAG_TRIAL: u64 = 2;
const TAG_BASELINE: u64 = 3;

/// Physical unit of virtual relay `relay`.
pub fn relay_unit(cfg: &CampaignConfig, relay: usize) -> Result<RelayParams> {
    perturb_params(&cfg.nominal, &cfg.spreads, derive_seed(cfg.seed, &[TAG_RELAY, relay as u64]))
}

/// Nearest-rank percentiles: the value of rank `⌈q·n/100⌉` (at least 1) of
/// the sorted input, for each level `q` in percent.
pub fn percentiles(values: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(levels
        .iter()
        .map(|q| {
            let rank = ((q / 100.0) * n as f64).ceil().max(1.0) as usize;
            v[rank.min(n) - 1]
        })
        .collect())
}

pub const LEVELS: [f64; 5] = [10.0, 25.0, 50.0, 75.0, 90.0];

pub fn median(values: &[f64]) -> Result<f64> {
    Ok(percentiles(values, &[50.0])?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p10: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p90: f64,
}

impl Percentiles {
    pub fn of(values: &[f64]) -> Result<Self> {
        let p = percentiles(values, &LEVELS)?;
        Ok(Self { p10: p[0], p25: p[1], p50: p[2], p75: p[3], p90: p[4] })
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.p10, self.p25, self.p50, self.p75, self.p90]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub relay: usize,
    /// Whether the series resistance was connected.
    pub stepped: bool,
    pub index: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub entries: Vec<BaselineEntry>,
    /// Median cost of the standard operations at nominal resistance.
    pub median: f64,
    /// Operations that failed, with their diagnostics.
    pub failures: Vec<String>,
}

impl Baseline {
    pub fn costs(&self, stepped: bool) -> Vec<f64> {
        self.entries.iter().filter(|e| e.stepped == stepped).map(|e| e.cost).collect()
    }

    pub fn cost_config(&self, cfg: &CostConfig) -> CostConfig {
        CostConfig { baseline_median: Some(self.median), ..*cfg }
    }
}

fn standard_stack(cfg: &CampaignConfig, unit: &RelayParams) -> Result<ControlStack> {
    ControlStack::new(
        ControlMode::Standard,
        Direction::Making,
        &cfg.nominal,
        cfg.nominal.param_vector(),
        unit.resistance,
        cfg.timing,
    )
}

/// Standard 24 V operations on every virtual relay, with and without the
/// series resistance.
pub fn run_baseline(cfg: &CampaignConfig) -> Result<Baseline> {
    cfg.validate()?;
    let step = cfg.resistance_step.map(|s| s.ohms).unwrap_or(0.0);
    let per_relay: Vec<Result<(Vec<BaselineEntry>, Vec<String>)>> = (0..cfg.n_relays)
        .into_par_iter()
        .map(|relay| {
            let unit = relay_unit(cfg, relay)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_BASELINE, relay as u64]));
            let mut entries = Vec::new();
            let mut failures = Vec::new();
            let conditions: &[bool] = if cfg.resistance_step.is_some() { &[false, true] } else { &[false] };
            for &stepped in conditions {
                for index in 1..=cfg.n_baseline {
                    let plant = RelayParams {
                        resistance: unit.resistance + if stepped { step } else { 0.0 },
                        ..unit
                    };
                    let stack = standard_stack(cfg, &plant)?;
                    match run_operation(&stack, &plant, &cfg.sim, &cfg.cost, index, &mut rng) {
                        Ok(rec) => entries.push(BaselineEntry { relay, stepped, index, cost: rec.cost }),
                        Err(f) => failures.push(format!("relay {relay} stepped {stepped}: {f}")),
                    }
                }
            }
            Ok((entries, failures))
        })
        .collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for r in per_relay {
        let (e, f) = r?;
        entries.extend(e);
        failures.extend(f);
    }
    let nominal: Vec<f64> = entries.iter().filter(|e| !e.stepped).map(|e| e.cost).collect();
    let median = median(&nominal).map_err(|_| Error::MissingBaseline)?;
    if !(median > 0.0) {
        return Err(Error::MissingBaseline);
    }
    Ok(Baseline { entries, median, failures })
}

/// Scalars kept for every operation of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationSummary {
    pub operation: usize,
    pub resistance_true: f64,
    pub r_hat: f64,
    pub cost: f64,
    pub cost_norm: f64,
    pub landing_speed: Option<f64>,
    pub impacts: usize,
    pub saturated_samples: usize,
    pub clamped_samples: usize,
    /// Optimizer phase that produced the candidate.
    pub phase: String,
    pub candidate: ParamVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub relay: usize,
    pub repetition: usize,
    pub mode: ControlMode,
    pub operations: Vec<OperationSummary>,
    /// Diagnostic of the failure that ended the trial early, if any.
    pub aborted: Option<String>,
}

/// One trial: a perturbed unit operated `n_operations` times while the
/// optimizer adapts the feedforward parameters.
pub fn run_trial(cfg: &CampaignConfig, baseline: &Baseline, relay: usize, repetition: usize) -> Result<TrialResult> {
    cfg.validate()?;
    let unit = relay_unit(cfg, relay)?;
    let cost_cfg = baseline.cost_config(&cfg.cost);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_TRIAL, relay as u64, repetition as u64]));
    let nominal_p = cfg.nominal.param_vector();
    let adapt = cfg.controller_mode.is_controlled();
    let mut simplex = nm_init(&nominal_p, cfg.optimizer)?;
    let mut result =
        TrialResult { relay, repetition, mode: cfg.controller_mode, operations: Vec::new(), aborted: None };

    for n in 1..=cfg.n_operations {
        let jitter: f64 = StandardNormal.sample(&mut rng);
        let plant = RelayParams {
            resistance: (unit.resistance + cfg.step_ohms(n)) * (cfg.resistance_jitter * jitter).exp(),
            ..unit
        };
        let outcome = (|| -> Result<OperationSummary> {
            let r_hat = probe_resistance(&plant, cfg.sim.probe_voltage, &cfg.sim, &mut rng)?;
            let (p, phase) = if adapt {
                let p = nm_next_candidate(&mut simplex)?;
                (p, simplex.pending_label().to_string())
            } else {
                (nominal_p, "none".to_string())
            };
            let mut stack =
                ControlStack::new(cfg.controller_mode, Direction::Making, &cfg.nominal, p, r_hat, cfg.timing)?;
            stack.gains = cfg.gains;
            stack.limits = cfg.limits;
            let rec = run_operation(&stack, &plant, &cfg.sim, &cost_cfg, n, &mut rng).map_err(|f| {
                Error::Simulation { time: f.partial.samples.last().map_or(0.0, |s| s.t), source: Box::new(f.error) }
            })?;
            let cost_norm = r2r::normalize_cost(rec.cost, &cost_cfg)?;
            if adapt {
                nm_update(&mut simplex, cost_norm)?;
            }
            Ok(OperationSummary {
                operation: n,
                resistance_true: plant.resistance,
                r_hat,
                cost: rec.cost,
                cost_norm,
                landing_speed: rec.landing_speed(),
                impacts: rec.events.iter().filter(|e| e.kind.is_armature_stop()).count(),
                saturated_samples: rec.saturated_samples,
                clamped_samples: rec.clamped_samples,
                phase,
                candidate: p,
            })
        })();
        match outcome {
            Ok(s) => result.operations.push(s),
            Err(e) => {
                result.aborted = Some(format!("relay {relay} repetition {repetition} operation {n}: {e}"));
                break;
            }
        }
    }
    Ok(result)
}

/// Per-operation-index distribution across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub operation: usize,
    pub trials: usize,
    pub cost_norm: Percentiles,
    pub r_hat: Percentiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub per_index: Vec<IndexStats>,
    /// Normalized standard-operation costs without the series resistance.
    pub baseline_nominal: Percentiles,
    pub baseline_stepped: Option<Percentiles>,
}

impl CampaignStats {
    pub fn from_trials(trials: &[TrialResult], baseline: &Baseline, n_operations: usize) -> Result<Self> {
        let mut per_index = Vec::new();
        for n in 1..=n_operations {
            let ops: Vec<&OperationSummary> =
                trials.iter().filter_map(|t| t.operations.get(n - 1)).filter(|o| o.operation == n).collect();
            if ops.is_empty() {
                continue;
            }
            let costs: Vec<f64> = ops.iter().map(|o| o.cost_norm).collect();
            let r: Vec<f64> = ops.iter().map(|o| o.r_hat).collect();
            per_index.push(IndexStats {
                operation: n,
                trials: ops.len(),
                cost_norm: Percentiles::of(&costs)?,
                r_hat: Percentiles::of(&r)?,
            });
        }
        let norm = |v: Vec<f64>| v.into_iter().map(|c| c / baseline.median).collect::<Vec<_>>();
        let stepped = baseline.costs(true);
        Ok(Self {
            per_index,
            baseline_nominal: Percentiles::of(&norm(baseline.costs(false)))?,
            baseline_stepped: if stepped.is_empty() { None } else { Some(Percentiles::of(&norm(stepped))?) },
        })
    }

    pub fn at(&self, operation: usize) -> Option<&IndexStats> {
        self.per_index.iter().find(|s| s.operation == operation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub baseline: Baseline,
    pub trials: Vec<TrialResult>,
    pub stats: CampaignStats,
}

impl CampaignResult {
    pub fn aborted(&self) -> Vec<&str> {
        self.trials.iter().filter_map(|t| t.aborted.as_deref()).collect()
    }

    /// All normalized costs of operations in `first..=last`, pooled across
    /// trials.
    pub fn pooled_costs(&self, first: usize, last: usize) -> Vec<f64> {
        self.trials
            .iter()
            .flat_map(|t| t.operations.iter())
            .filter(|o| (first..=last).contains(&o.operation))
            .map(|o| o.cost_norm)
            .collect()
    }
}

fn trial_grid(cfg: &CampaignConfig) -> Vec<(usize, usize)> {
    (0..cfg.n_relays).flat_map(|r| (0..cfg.n_repetitions).map(move |k| (r, k))).collect()
}

/// Run every trial against an existing baseline. Trials run in parallel on
/// the current rayon pool; results keep (relay, repetition) order.
pub fn run_trials(cfg: &CampaignConfig, baseline: &Baseline) -> Result<Vec<TrialResult>> {
    trial_grid(cfg).into_par_iter().map(|(r, k)| run_trial(cfg, baseline, r, k)).collect()
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    let baseline = run_baseline(cfg)?;
    let trials = run_trials(cfg, &baseline)?;
    let stats = CampaignStats::from_trials(&trials, &baseline, cfg.n_operations)?;
    Ok(CampaignResult { baseline, trials, stats })
}

/// Run `f` on a dedicated pool of `workers` threads (0 lets rayon decide).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub flux: CampaignResult,
    pub voltage: CampaignResult,
}

impl Comparison {
    /// Median normalized cost per operation index, `(flux, voltage)`.
    pub fn median_curves(&self) -> Vec<(usize, f64, f64)> {
        self.flux
            .stats
            .per_index
            .iter()
            .filter_map(|f| self.voltage.stats.at(f.operation).map(|v| (f.operation, f.cost_norm.p50, v.cost_norm.p50)))
            .collect()
    }
}

/// Flux-tracking and voltage-feedforward campaigns on the same relays, seeds
/// and baseline.
pub fn compare(cfg: &CampaignConfig) -> Result<Comparison> {
    let baseline = run_baseline(cfg)?;
    let run = |mode: ControlMode| -> Result<CampaignResult> {
        let c = CampaignConfig { controller_mode: mode, ..cfg.clone() };
        let trials = run_trials(&c, &baseline)?;
        let stats = CampaignStats::from_trials(&trials, &baseline, c.n_operations)?;
        Ok(CampaignResult { baseline: baseline.clone(), trials, stats })
    };
    Ok(Comparison { flux: run(ControlMode::FluxTracking)?, voltage: run(ControlMode::VoltageFeedforward)? })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(fs::File::create(path)?))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trial_file_name(relay: usize, repetition: usize) -> String {
    format!("trial_r{relay:03}_k{repetition:03}.csv")
}

/// One row per operation; the `log_*` columns are the encoded candidate the
/// optimizer proposed.
pub fn write_trial_csv(trial: &TrialResult, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = [
        "operation",
        "resistance_true",
        "r_hat",
        "cost",
        "cost_norm",
        "landing_speed",
        "impacts",
        "saturated_samples",
        "clamped_samples",
        "phase",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(ParamVector::NAMES.iter().map(|n| format!("log_{n}")));
    w.write_record(&header)?;
    for o in &trial.operations {
        let mut row = vec![
            o.operation.to_string(),
            o.resistance_true.to_string(),
            o.r_hat.to_string(),
            o.cost.to_string(),
            o.cost_norm.to_string(),
            fmt_opt(o.landing_speed),
            o.impacts.to_string(),
            o.saturated_samples.to_string(),
            o.clamped_samples.to_string(),
            o.phase.clone(),
        ];
        row.extend(o.candidate.entries().iter().map(|v| v.ln().to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stats_csv(stats: &CampaignStats, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["operation".to_string(), "trials".to_string()];
    for prefix in ["cost_norm", "r_hat"] {
        header.extend(LEVELS.iter().map(|q| format!("{prefix}_p{q}")));
    }
    w.write_record(&header)?;
    for s in &stats.per_index {
        let mut row = vec![s.operation.to_string(), s.trials.to_string()];
        row.extend(s.cost_norm.as_array().iter().map(|v| v.to_string()));
        row.extend(s.r_hat.as_array().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_baseline_csv(baseline: &Baseline, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["relay", "stepped", "index", "cost", "cost_norm"])?;
    for e in &baseline.entries {
        w.write_record([
            e.relay.to_string(),
            e.stepped.to_string(),
            e.index.to_string(),
            e.cost.to_string(),
            (e.cost / baseline.median).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a CampaignConfig,
    baseline_median: f64,
    trials: Vec<TrialManifest<'a>>,
    baseline_failures: &'a [String],
}

#[derive(Serialize)]
struct TrialManifest<'a> {
    relay: usize,
    repetition: usize,
    mode: ControlMode,
    seed: u64,
    relay_seed: u64,
    operations: usize,
    first_cost_norm: Option<f64>,
    last_cost_norm: Option<f64>,
    aborted: Option<&'a str>,
    file: String,
}

fn write_manifest(cfg: &CampaignConfig, command: &str, result: &CampaignResult, dir: &Path, suffix: &str) -> Result<()> {
    let trials = result
        .trials
        .iter()
        .map(|t| TrialManifest {
            relay: t.relay,
            repetition: t.repetition,
            mode: t.mode,
            seed: derive_seed(cfg.seed, &[TAG_TRIAL, t.relay as u64, t.repetition as u64]),
            relay_seed: derive_seed(cfg.seed, &[TAG_RELAY, t.relay as u64]),
            operations: t.operations.len(),
            first_cost_norm: t.operations.first().map(|o| o.cost_norm),
            last_cost_norm: t.operations.last().map(|o| o.cost_norm),
            aborted: t.aborted.as_deref(),
            file: format!("{suffix}{}", trial_file_name(t.relay, t.repetition)),
        })
        .collect();
    let manifest = Manifest {
        command,
        config: cfg,
        baseline_median: result.baseline.median,
        trials,
        baseline_failures: &result.baseline.failures,
    };
    let mut f = fs::File::create(dir.join(format!("{suffix}manifest.json")))?;
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    writeln!(f)?;
    Ok(())
}

/// Trial CSVs, stats, baseline and manifest of one campaign. `prefix` is
/// prepended to every file name.
pub fn write_campaign(cfg: &CampaignConfig, command: &str, result: &CampaignResult, dir: &Path, prefix: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    for t in &result.trials {
        write_trial_csv(t, &dir.join(format!("{prefix}{}", trial_file_name(t.relay, t.repetition))))?;
    }
    write_stats_csv(&result.stats, &dir.join(format!("{prefix}stats.csv")))?;
    write_baseline_csv(&result.baseline, &dir.join(format!("{prefix}baseline.csv")))?;
    write_manifest(cfg, command, result, dir, prefix)
}

pub fn write_comparison(cfg: &CampaignConfig, cmp: &Comparison, dir: &Path) -> Result<()> {
    write_campaign(&CampaignConfig { controller_mode: ControlMode::FluxTracking, ..cfg.clone() }, "compare", &cmp.flux, dir, "flux_")?;
    write_campaign(
        &CampaignConfig { controller_mode: ControlMode::VoltageFeedforward, ..cfg.clone() },
        "compare",
        &cmp.voltage,
        dir,
        "voltage_",
    )?;
    let mut w = csv_writer(&dir.join("compare.csv"))?;
    w.write_record(["operation", "flux_cost_norm_p50", "voltage_cost_norm_p50"])?;
    for (n, f, v) in cmp.median_curves() {
        w.write_record([n.to_string(), f.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
