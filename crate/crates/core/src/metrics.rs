//! Accuracy and binned calibration metrics.
//!
//! Confidence bins are equal-width and half-open, `(k/B, (k+1)/B]`, so a
//! confidence of exactly `1.0` lands in the last bin.
//!
//! Overconfidence error weighs each bin's excess of confidence over
//! accuracy by the confidence itself:
//! `OE = Σ_B (|B|/n) · conf(B) · max(conf(B) − acc(B), 0)`.
//! Expected calibration error is `Σ_B (|B|/n) · |conf(B) − acc(B)|`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{invalid, io_err, Error, Result};
use crate::model::{softmax_rows, xent_of_row, MlpModel};
use crate::sampling::{score_rankedms, ProbVector};

/// One test prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub sample_index: usize,
    pub true_label: usize,
    pub predicted_label: usize,
    /// Largest predicted probability.
    pub confidence: f64,
    /// Rank-weighted margin of the prediction.
    pub certainty_score: f64,
    /// Cross-entropy against the true label.
    pub xent_loss: f64,
}

impl EvalRecord {
    pub fn is_correct(&self) -> bool {
        self.predicted_label == self.true_label
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

pub const DEFAULT_BINS: usize = 10;

fn non_empty(records: &[EvalRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(invalid("no evaluation records"));
    }
    Ok(())
}

pub fn accuracy(records: &[EvalRecord]) -> Result<f64> {
    non_empty(records)?;
    Ok(records.iter().filter(|r| r.is_correct()).count() as f64 / records.len() as f64)
}

fn edge(k: usize, num_bins: usize) -> f64 {
    k as f64 / num_bins as f64
}

/// Bin index for `c` under `(low, high]` bins.
fn bin_of(c: f64, num_bins: usize) -> usize {
    let mut k = ((c * num_bins as f64).ceil() as usize).clamp(1, num_bins) - 1;
    while k > 0 && c <= edge(k, num_bins) {
        k -= 1;
    }
    while k + 1 < num_bins && c > edge(k + 1, num_bins) {
        k += 1;
    }
    k
}

/// Occupancy and averages for each bin. Empty bins report zeros.
pub fn reliability_bins(records: &[EvalRecord], num_bins: usize) -> Result<Vec<BinStats>> {
    non_empty(records)?;
    if num_bins == 0 {
        return Err(invalid("num_bins must be >= 1"));
    }
    let mut count = vec![0usize; num_bins];
    let mut conf = vec![0.0; num_bins];
    let mut correct = vec![0usize; num_bins];
    for r in records {
        if !(r.confidence.is_finite() && (0.0..=1.0).contains(&r.confidence)) {
            return Err(invalid(format!("confidence {} outside [0, 1]", r.confidence)));
        }
        let k = bin_of(r.confidence, num_bins);
        count[k] += 1;
        conf[k] += r.confidence;
        correct[k] += usize::from(r.is_correct());
    }
    Ok((0..num_bins)
        .map(|k| {
            let n = count[k];
            let (mean_confidence, accuracy) = if n == 0 {
                (0.0, 0.0)
            } else {
                (conf[k] / n as f64, correct[k] as f64 / n as f64)
            };
            BinStats {
                bin_low: edge(k, num_bins),
                bin_high: edge(k + 1, num_bins),
                count: n,
                mean_confidence,
                accuracy,
            }
        })
        .collect())
}

fn weighted_sum(records: &[EvalRecord], num_bins: usize, gap: impl Fn(&BinStats) -> f64) -> Result<f64> {
    let bins = reliability_bins(records, num_bins)?;
    let n = records.len() as f64;
    Ok(bins
        .iter()
        .filter(|b| b.count > 0)
        .map(|b| b.count as f64 / n * gap(b))
        .sum())
}

pub fn overconfidence_error(records: &[EvalRecord], num_bins: usize) -> Result<f64> {
    weighted_sum(records, num_bins, |b| {
        b.mean_confidence * (b.mean_confidence - b.accuracy).max(0.0)
    })
}

pub fn expected_calibration_error(records: &[EvalRecord], num_bins: usize) -> Result<f64> {
    weighted_sum(records, num_bins, |b| (b.mean_confidence - b.accuracy).abs())
}

/// One record per row of `test`.
pub fn evaluate(m: &MlpModel, test: &Dataset) -> Result<Vec<EvalRecord>> {
    if m.num_classes() != test.num_classes() {
        return Err(invalid(format!(
            "model predicts {} classes, dataset has {}",
            m.num_classes(),
            test.num_classes()
        )));
    }
    let logits = m.forward(test.features())?;
    let probs = softmax_rows(&logits);
    let records = logits
        .iter_rows()
        .zip(probs.iter_rows())
        .zip(test.labels())
        .enumerate()
        .map(|(i, ((z, p), &label))| {
            let p = ProbVector::new_unchecked(p.to_vec());
            EvalRecord {
                sample_index: i,
                true_label: label,
                predicted_label: p.argmax(),
                confidence: p.max(),
                certainty_score: score_rankedms(&p),
                xent_loss: xent_of_row(z, label),
            }
        })
        .collect();
    Ok(records)
}

/// Writes `index,true,pred,confidence,rankedms,xent`.
pub fn write_sample_dump(records: &[EvalRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("index,true,pred,confidence,rankedms,xent\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.sample_index, r.true_label, r.predicted_label, r.confidence, r.certainty_score, r.xent_loss
        ));
    }
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(out.as_bytes()).map_err(io_err(path))
}

/// Reads a file written by [`write_sample_dump`].
pub fn read_sample_dump(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let rows = crate::data::read_rows(path)?;
    rows.into_iter()
        .map(|(line, r)| {
            if r.len() != 6 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 6 fields, found {}", r.len()),
                });
            }
            let int = |k: usize| {
                r[k].parse::<usize>().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {k}: expected an index, found {:?}", &r[k]),
                })
            };
            let real = |k: usize| crate::data::parse_real(&r[k], line, k);
            Ok(EvalRecord {
                sample_index: int(0)?,
                true_label: int(1)?,
                predicted_label: int(2)?,
                confidence: real(3)?,
                certainty_score: real(4)?,
                xent_loss: real(5)?,
            })
        })
        .collect()
}
