//! Multi-seed active-learning runs driven by a TOML config.
//!
//! A trial is one seed. Cycle 1 trains on a random initial pool; every later
//! cycle scores the unlabeled pool with the previous cycle's model, labels
//! `budget_per_cycle` samples and retrains. Every random choice in a trial
//! draws from its own stream keyed by `(seed, purpose, substream)`, so two
//! configs that share a seed also share their data and their initial pool.
//! Trials can therefore run in any order, or in parallel.
//!
//! ```toml
//! seeds = [0, 1, 2]
//! sampler = "rankedms"
//!
//! [dataset]
//! generator = "two_moons"
//! n = 2000
//! noise = 0.2
//!
//! [model]
//! hidden = [32, 32]
//!
//! [loop]
//! initial_budget = 20
//! budget_per_cycle = 20
//! cycles = 10
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmam::{fit, TrainingMode};
use crate::data::{gen_blobs, gen_two_moons, init_pool, load_csv, make_imbalanced, Dataset, PoolState};
use crate::error::{io_err, Error, Result};
use crate::metrics::{
    accuracy, evaluate, expected_calibration_error, overconfidence_error, write_sample_dump, EvalRecord, DEFAULT_BINS,
};
use crate::model::{MlpModel, TrainConfig};
use crate::numeric::{Purpose, RngStream};
use crate::sampling::{apply_selection, score_candidates, select_batch, select_random, Sampler};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Blobs {
        n_per_class: usize,
        num_classes: usize,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_spread")]
        spread: f64,
    },
    TwoMoons {
        n: usize,
        #[serde(default = "default_noise")]
        noise: f64,
    },
    /// A labeled file. Without `test_path`, a seeded `test_fraction` of the
    /// rows is held out.
    Csv {
        path: PathBuf,
        label_column: usize,
        num_classes: usize,
        #[serde(default)]
        test_path: Option<PathBuf>,
    },
}

fn default_dim() -> usize {
    2
}
fn default_spread() -> f64 {
    1.0
}
fn default_noise() -> f64 {
    0.2
}
fn default_test_fraction() -> f64 {
    0.25
}
fn default_mix_point() -> usize {
    1
}
fn default_alpha() -> f64 {
    0.4
}
fn default_bins() -> usize {
    DEFAULT_BINS
}

/// Shrinks each listed class of the pool to `floor(count / ratio)` samples.
/// The test set is left balanced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImbalanceSpec {
    pub minority_classes: BTreeSet<usize>,
    pub ratio: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub hidden: Vec<usize>,
    /// Layer whose output is cross-mixed; 0 mixes raw inputs.
    #[serde(default = "default_mix_point")]
    pub mix_point: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmamSpec {
    pub enabled: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl Default for CmamSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            alpha: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSpec {
    pub initial_budget: usize,
    pub budget_per_cycle: usize,
    pub cycles: usize,
}

impl LoopSpec {
    /// Labeled count after the last cycle.
    pub fn final_labeled(&self) -> usize {
        self.initial_budget + (self.cycles.saturating_sub(1)) * self.budget_per_cycle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Test-set size as a fraction of the pool (before any imbalance).
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub imbalance: Option<ImbalanceSpec>,
    pub model: ModelSpec,
    #[serde(default)]
    pub trainer: TrainConfig,
    #[serde(default)]
    pub cmam: CmamSpec,
    pub sampler: Sampler,
    #[serde(rename = "loop")]
    pub active_loop: LoopSpec,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_bins")]
    pub num_bins: usize,
    /// Continue from the previous cycle's weights instead of re-initializing.
    #[serde(default)]
    pub warm_start: bool,
    #[serde(default)]
    pub dump_samples: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Parses a file. Relative data paths are taken relative to the file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut c = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let DatasetSpec::Csv {
            path: data, test_path, ..
        } = &mut c.dataset
        {
            let base = path.parent().unwrap_or(Path::new(""));
            for p in std::iter::once(data).chain(test_path.as_mut()) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn training_mode(&self) -> TrainingMode {
        if self.cmam.enabled {
            TrainingMode::Cmam {
                alpha: self.cmam.alpha,
                mix_point: self.model.mix_point,
            }
        } else {
            TrainingMode::Plain
        }
    }

    /// Pool size implied by a generator, or `None` for file data.
    pub fn pool_size(&self) -> Option<usize> {
        let counts: Vec<usize> = match self.dataset {
            DatasetSpec::Blobs {
                n_per_class,
                num_classes,
                ..
            } => vec![n_per_class; num_classes],
            DatasetSpec::TwoMoons { n, .. } => vec![n.div_ceil(2), n / 2],
            DatasetSpec::Csv { .. } => return None,
        };
        Some(match &self.imbalance {
            None => counts.iter().sum(),
            Some(im) => counts
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    if im.minority_classes.contains(&k) {
                        c / im.ratio.max(1)
                    } else {
                        c
                    }
                })
                .sum(),
        })
    }

    /// Static checks, including the budget schedule against the pool size
    /// when the size is known without loading anything.
    pub fn validate(&self) -> Result<()> {
        let lp = &self.active_loop;
        if lp.cycles == 0 || lp.initial_budget == 0 || lp.budget_per_cycle == 0 {
            return Err(config_err("cycles, initial_budget and budget_per_cycle must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(config_err("at least one seed is required"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(config_err(format!(
                "test_fraction {} must be in (0, 1)",
                self.test_fraction
            )));
        }
        if self.num_bins == 0 {
            return Err(config_err("num_bins must be >= 1"));
        }
        if self.model.hidden.contains(&0) {
            return Err(config_err("hidden widths must be positive"));
        }
        let num_layers = self.model.hidden.len() + 1;
        if self.cmam.enabled {
            if self.model.mix_point >= num_layers {
                return Err(config_err(format!(
                    "mix_point {} out of range for {num_layers} layers",
                    self.model.mix_point
                )));
            }
            if !(self.cmam.alpha > 0.0 && self.cmam.alpha.is_finite()) {
                return Err(config_err(format!("alpha {} must be positive", self.cmam.alpha)));
            }
            if lp.initial_budget < 2 {
                return Err(config_err("cross-mixed training needs initial_budget >= 2"));
            }
        }
        self.trainer.validate().map_err(|e| config_err(e.to_string()))?;
        match &self.dataset {
            DatasetSpec::Blobs {
                num_classes,
                dim,
                spread,
                ..
            } => {
                if *num_classes < 2 || *dim == 0 || !(spread.is_finite() && *spread >= 0.0) {
                    return Err(config_err("blobs need num_classes >= 2, dim >= 1 and spread >= 0"));
                }
            }
            DatasetSpec::TwoMoons { noise, .. } => {
                if !(noise.is_finite() && *noise >= 0.0) {
                    return Err(config_err(format!("noise {noise} must be >= 0")));
                }
            }
            DatasetSpec::Csv { num_classes, .. } => {
                if *num_classes < 2 {
                    return Err(config_err("num_classes must be >= 2"));
                }
            }
        }
        if let Some(im) = &self.imbalance {
            if im.ratio == 0 {
                return Err(config_err("imbalance ratio must be >= 1"));
            }
        }
        if let Some(n) = self.pool_size() {
            check_budget(lp, n)?;
        }
        Ok(())
    }
}

fn check_budget(lp: &LoopSpec, pool: usize) -> Result<()> {
    if lp.final_labeled() > pool {
        return Err(config_err(format!(
            "budget schedule needs {} labels but the pool holds {pool}",
            lp.final_labeled()
        )));
    }
    Ok(())
}

/// Pool and test set of one trial.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub pool: Dataset,
    pub test: Dataset,
}

fn test_size(n: usize, fraction: f64) -> usize {
    ((n as f64 * fraction).round() as usize).max(1)
}

/// Builds the trial's pool and test set from the `DataGen` and `TestSplit`
/// streams of `seed`.
pub fn resolve_data(config: &ExperimentConfig, seed: u64) -> Result<TrialData> {
    let mut gen = RngStream::with_substream(seed, Purpose::DataGen, 0);
    let mut split = RngStream::new(seed, Purpose::TestSplit);
    let (pool, test) = match &config.dataset {
        &DatasetSpec::Blobs {
            n_per_class,
            num_classes,
            dim,
            spread,
        } => (
            gen_blobs(n_per_class, num_classes, dim, spread, &mut gen)?,
            gen_blobs(
                test_size(n_per_class, config.test_fraction),
                num_classes,
                dim,
                spread,
                &mut split,
            )?,
        ),
        &DatasetSpec::TwoMoons { n, noise } => (
            gen_two_moons(n, noise, &mut gen)?,
            gen_two_moons(test_size(n, config.test_fraction).max(2), noise, &mut split)?,
        ),
        DatasetSpec::Csv {
            path,
            label_column,
            num_classes,
            test_path,
        } => {
            let all = load_csv(path, *label_column, *num_classes)?;
            match test_path {
                Some(t) => (all, load_csv(t, *label_column, *num_classes)?),
                None => {
                    let k = test_size(all.len(), config.test_fraction);
                    if k >= all.len() {
                        return Err(config_err(format!("{} rows leave nothing for the pool", all.len())));
                    }
                    let perm = split.permutation(all.len());
                    let (mut test_idx, mut pool_idx) = (perm[..k].to_vec(), perm[k..].to_vec());
                    test_idx.sort_unstable();
                    pool_idx.sort_unstable();
                    (all.subset(&pool_idx)?, all.subset(&test_idx)?)
                }
            }
        }
    };
    let pool = match &config.imbalance {
        Some(im) => make_imbalanced(
            &pool,
            &im.minority_classes,
            im.ratio,
            &mut RngStream::with_substream(seed, Purpose::DataGen, 1),
        )?,
        None => pool,
    };
    check_budget(&config.active_loop, pool.len())?;
    Ok(TrialData { pool, test })
}

/// What one cycle measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    /// 1-based.
    pub cycle: usize,
    pub seed: u64,
    pub labeled_count: usize,
    pub test_accuracy: f64,
    pub oe: f64,
    pub ece: f64,
    pub train_seconds: f64,
}

impl CycleReport {
    /// Equality on every field except wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let bits = |r: &Self| {
            (
                r.cycle,
                r.seed,
                r.labeled_count,
                r.test_accuracy.to_bits(),
                r.oe.to_bits(),
                r.ece.to_bits(),
            )
        };
        bits(self) == bits(other)
    }
}

/// Handed to a trial observer after each cycle.
pub struct CycleView<'a> {
    pub report: &'a CycleReport,
    /// The samples that `pool` indexes into.
    pub data: &'a Dataset,
    pub pool: &'a PoolState,
    pub records: &'a [EvalRecord],
    pub model: &'a MlpModel,
}

/// One trial's reports and, when requested, the per-sample test records of
/// every cycle.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub seed: u64,
    pub reports: Vec<CycleReport>,
    pub samples: Vec<Vec<EvalRecord>>,
}

pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<Vec<CycleReport>> {
    run_trial_with(config, seed, |_| Ok(())).map(|t| t.reports)
}

/// Runs one trial, calling `observer` after every cycle. An observer error
/// aborts the trial.
pub fn run_trial_with(
    config: &ExperimentConfig,
    seed: u64,
    mut observer: impl FnMut(&CycleView<'_>) -> Result<()>,
) -> Result<TrialOutput> {
    config.validate()?;
    let data = resolve_data(config, seed)?;
    let lp = config.active_loop;
    let mode = config.training_mode();
    let mut widths = vec![data.pool.dim()];
    widths.extend(&config.model.hidden);
    let num_classes = data.pool.num_classes();

    let mut pool = init_pool(
        data.pool.len(),
        lp.initial_budget,
        &mut RngStream::with_substream(seed, Purpose::Shuffle, 0),
    )?;
    let mut model: Option<MlpModel> = None;
    let mut out = TrialOutput {
        seed,
        reports: Vec::with_capacity(lp.cycles),
        samples: Vec::new(),
    };
    for cycle in 1..=lp.cycles {
        let r = cycle as u64;
        if let Some(prev) = &model {
            let selected = if config.sampler == Sampler::Random {
                select_random(
                    &pool,
                    lp.budget_per_cycle,
                    &mut RngStream::with_substream(seed, Purpose::SelectTiebreak, r),
                )?
            } else {
                let candidates = pool.unlabeled_indices();
                let probs = prev.predict_proba(&data.pool.features().select_rows(&candidates)?)?;
                let scored = score_candidates(config.sampler, &candidates, &probs)?;
                select_batch(&scored, lp.budget_per_cycle, config.sampler.direction())?
            };
            let next = apply_selection(&pool, &selected)?;
            next.check_invariants()?;
            if next.labeled().len() != pool.labeled().len() + lp.budget_per_cycle {
                return Err(Error::Pool(format!(
                    "cycle {cycle}: labeled count went from {} to {}",
                    pool.labeled().len(),
                    next.labeled().len()
                )));
            }
            pool = next;
        }

        let mut m = match model.take() {
            Some(prev) if config.warm_start => prev,
            _ => MlpModel::init(
                &widths,
                num_classes,
                &mut RngStream::with_substream(seed, Purpose::Init, r),
            )?,
        };
        let started = Instant::now();
        fit(
            &mut m,
            &data.pool,
            &pool,
            mode,
            &config.trainer,
            &mut RngStream::with_substream(seed, Purpose::Shuffle, r + 1),
            &mut RngStream::with_substream(seed, Purpose::Beta, r),
        )?;
        let train_seconds = started.elapsed().as_secs_f64();

        let records = evaluate(&m, &data.test)?;
        let report = CycleReport {
            cycle,
            seed,
            labeled_count: pool.labeled().len(),
            test_accuracy: accuracy(&records)?,
            oe: overconfidence_error(&records, config.num_bins)?,
            ece: expected_calibration_error(&records, config.num_bins)?,
            train_seconds,
        };
        observer(&CycleView {
            report: &report,
            data: &data.pool,
            pool: &pool,
            records: &records,
            model: &m,
        })?;
        out.reports.push(report);
        if config.dump_samples {
            out.samples.push(records);
        }
        model = Some(m);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cycle: usize,
    pub labeled: usize,
    pub accuracy: MeanStd,
    pub oe: MeanStd,
    pub ece: MeanStd,
    pub train_seconds: MeanStd,
}

/// Per-cycle aggregates over seeds.
pub fn summarize(trials: &[TrialOutput]) -> Result<Vec<SummaryRow>> {
    let Some(first) = trials.first() else {
        return Err(config_err("no trials to summarize"));
    };
    let cycles = first.reports.len();
    if cycles == 0 || trials.iter().any(|t| t.reports.len() != cycles) {
        return Err(config_err("trials report different numbers of cycles"));
    }
    Ok((0..cycles)
        .map(|k| {
            let col =
                |f: fn(&CycleReport) -> f64| MeanStd::of(&trials.iter().map(|t| f(&t.reports[k])).collect::<Vec<_>>());
            SummaryRow {
                cycle: first.reports[k].cycle,
                labeled: first.reports[k].labeled_count,
                accuracy: col(|r| r.test_accuracy),
                oe: col(|r| r.oe),
                ece: col(|r| r.ece),
                train_seconds: col(|r| r.train_seconds),
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    /// In the order of `config.seeds`.
    pub trials: Vec<TrialOutput>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentOutcome {
    pub fn reports(&self) -> Vec<CycleReport> {
        self.trials.iter().flat_map(|t| t.reports.iter().cloned()).collect()
    }
}

/// Runs every seed, in parallel, and aggregates. The first failing seed (in
/// config order) is reported.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let trials = config
        .seeds
        .par_iter()
        .map(|&seed| {
            run_trial_with(config, seed, |_| Ok(())).map_err(|e| Error::Trial {
                seed,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&trials)?;
    Ok(ExperimentOutcome {
        config: config.clone(),
        trials,
        summary,
    })
}

pub const CYCLES_HEADER: &str = "cycle,seed,labeled,accuracy,oe,ece,train_seconds";

pub fn write_cycles_csv(reports: &[CycleReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("{CYCLES_HEADER}\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.cycle, r.seed, r.labeled_count, r.test_accuracy, r.oe, r.ece, r.train_seconds
        ));
    }
    fs::write(path, out).map_err(io_err(path))
}

pub fn read_cycles_csv(path: impl AsRef<Path>) -> Result<Vec<CycleReport>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let header = reader.headers().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if header.iter().collect::<Vec<_>>().join(",") != CYCLES_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {CYCLES_HEADER}"),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if rec.len() != 7 {
            return Err(Error::Parse {
                line,
                message: format!("expected 7 fields, found {}", rec.len()),
            });
        }
        let int = |k: usize| {
            rec[k].parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {k}: expected an integer, found {:?}", &rec[k]),
            })
        };
        let real = |k: usize| crate::data::parse_real(&rec[k], line, k);
        out.push(CycleReport {
            cycle: int(0)? as usize,
            seed: int(1)?,
            labeled_count: int(2)? as usize,
            test_accuracy: real(3)?,
            oe: real(4)?,
            ece: real(5)?,
            train_seconds: real(6)?,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    config: &'a ExperimentConfig,
    cycles: &'a [SummaryRow],
}

/// Writes `cycles.csv`, `summary.json` and, for trials that kept samples,
/// `seed_{s}/samples_cycle_{r}.csv`. Returns the paths written.
pub fn emit_reports(outcome: &ExperimentOutcome, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    let reports = outcome.reports();
    if reports.is_empty() {
        return Err(config_err("no cycle reports to write"));
    }
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();

    let cycles = out_dir.join("cycles.csv");
    write_cycles_csv(&reports, &cycles)?;
    written.push(cycles);

    let summary = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(&SummaryFile {
        config: &outcome.config,
        cycles: &outcome.summary,
    })?;
    fs::write(&summary, json + "\n").map_err(io_err(&summary))?;
    written.push(summary);

    for t in outcome.trials.iter().filter(|t| !t.samples.is_empty()) {
        let dir = out_dir.join(format!("seed_{}", t.seed));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (records, report) in t.samples.iter().zip(&t.reports) {
            let p = dir.join(format!("samples_cycle_{}.csv", report.cycle));
            write_sample_dump(records, &p)?;
            written.push(p);
        }
    }
    Ok(written)
}
