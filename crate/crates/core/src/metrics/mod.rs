//! Grounding metrics and the reconstruction upper bound.
//!
//! Per-sample scores are computed independently (in parallel when the
//! corpus is large) and summed in input order, so reports do not depend on
//! the worker count.

mod io;
mod upper_bound;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{decode_masks, dequantize_box, GroundingOutput, QuantConfig};
use crate::error::{Error, Result};
use crate::geometry::{box_iou, mask_iou, BBox, BinaryMask};

pub use io::{load_eval_samples, EvalRecord, MaskRef};
pub use upper_bound::{upper_bound_eval, upper_bound_scores, upper_bound_sweep, UpperBound};

/// IoU threshold used for REC and GREC precision.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub no_target: bool,
    pub masks: Vec<BinaryMask>,
    /// Pixel coordinates.
    pub boxes: Vec<BBox<f64>>,
}

impl GroundTruth {
    pub fn none() -> Self {
        Self { no_target: true, masks: Vec::new(), boxes: Vec::new() }
    }

    pub fn masks(masks: Vec<BinaryMask>) -> Self {
        Self { no_target: false, masks, boxes: Vec::new() }
    }

    pub fn boxes(boxes: Vec<BBox<f64>>) -> Self {
        Self { no_target: false, masks: Vec::new(), boxes }
    }
}

/// One ground truth and one model output on a `width x height` image.
/// `pred` is `None` when the model output could not be parsed; such a
/// prediction scores zero and does not count as a no-target answer.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSample {
    pub width: u32,
    pub height: u32,
    pub n_bins: u32,
    pub gt: GroundTruth,
    pub pred: Option<GroundingOutput>,
}

impl EvalSample {
    pub fn new(
        width: u32,
        height: u32,
        n_bins: u32,
        gt: GroundTruth,
        pred: Option<GroundingOutput>,
    ) -> Result<Self> {
        let s = Self { width, height, n_bins, gt, pred };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.quant()?;
        if self.gt.no_target && !(self.gt.masks.is_empty() && self.gt.boxes.is_empty()) {
            return Err(Error::InvalidConfig("no-target sample carries targets".into()));
        }
        for m in &self.gt.masks {
            if (m.width(), m.height()) != (self.width, self.height) {
                return Err(Error::DimensionMismatch(m.width(), m.height(), self.width, self.height));
            }
        }
        Ok(())
    }

    fn quant(&self) -> Result<QuantConfig> {
        QuantConfig::new(self.n_bins, f64::from(self.width), f64::from(self.height))
    }

    fn predicted_no_target(&self) -> bool {
        matches!(self.pred, Some(GroundingOutput::NoTarget))
    }

    fn gt_union(&self) -> Result<BinaryMask> {
        let mut acc = BinaryMask::new(self.width, self.height)?;
        for m in &self.gt.masks {
            acc = acc.union(m)?;
        }
        Ok(acc)
    }

    /// Union of predicted masks; empty for anything that is not a mask answer.
    fn pred_union(&self) -> Result<BinaryMask> {
        match &self.pred {
            Some(GroundingOutput::Masks(seqs)) => decode_masks(seqs, &self.quant()?),
            _ => BinaryMask::new(self.width, self.height),
        }
    }

    fn pred_boxes(&self) -> Result<Vec<BBox<f64>>> {
        let q = self.quant()?;
        match &self.pred {
            Some(GroundingOutput::Boxes(bs)) => bs.iter().map(|b| dequantize_box(b, &q)).collect(),
            _ => Ok(Vec::new()),
        }
    }

    /// Cumulative mask IoU of the unions.
    pub fn mask_iou(&self) -> Result<f64> {
        mask_iou(&self.pred_union()?, &self.gt_union()?)
    }

    /// gIoU contribution: no-target samples score 1 iff answered with
    /// no target, targeted samples answered with no target score 0.
    pub fn giou_term(&self) -> Result<f64> {
        if self.gt.no_target {
            return Ok(if self.predicted_no_target() { 1.0 } else { 0.0 });
        }
        if self.predicted_no_target() {
            return Ok(0.0);
        }
        self.mask_iou()
    }

    /// REC success: exactly one predicted box with IoU ≥ `t`.
    pub fn rec_hit(&self, t: f64) -> Result<bool> {
        let [gt] = self.gt.boxes.as_slice() else {
            return Err(Error::InvalidConfig(format!(
                "REC sample needs exactly one GT box, got {}",
                self.gt.boxes.len()
            )));
        };
        let preds = self.pred_boxes()?;
        Ok(matches!(preds.as_slice(), [p] if box_iou(p, gt) >= t))
    }

    /// GREC success: every GT box matched by one prediction at IoU ≥ `t`
    /// with nothing left over; no-target samples need a no-target answer.
    pub fn grec_hit(&self, t: f64) -> Result<bool> {
        if self.gt.no_target {
            return Ok(self.predicted_no_target());
        }
        let preds = self.pred_boxes()?;
        if preds.len() != self.gt.boxes.len() {
            return Ok(false);
        }
        Ok(greedy_matches(&preds, &self.gt.boxes, t) == self.gt.boxes.len())
    }
}

/// Matches pairs in descending IoU order (ties by prediction then GT
/// index), each box used at most once; returns the number of matches.
pub fn greedy_matches(preds: &[BBox<f64>], gts: &[BBox<f64>], t: f64) -> usize {
    let mut pairs = Vec::new();
    for (i, p) in preds.iter().enumerate() {
        for (j, g) in gts.iter().enumerate() {
            let iou = box_iou(p, g);
            if iou >= t {
                pairs.push((iou, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; preds.len()];
    let mut used_g = vec![false; gts.len()];
    let mut n = 0;
    for (_, i, j) in pairs {
        if !used_p[i] && !used_g[j] {
            used_p[i] = true;
            used_g[j] = true;
            n += 1;
        }
    }
    n
}

fn per_sample<F>(samples: &[EvalSample], f: F) -> Result<Vec<f64>>
where
    F: Fn(&EvalSample) -> Result<f64> + Sync + Send,
{
    samples.par_iter().map(f).collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn non_empty(samples: &[EvalSample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples"));
    }
    Ok(())
}

/// Mean of per-sample mask IoU between prediction and GT unions.
pub fn miou(samples: &[EvalSample]) -> Result<f64> {
    non_empty(samples)?;
    Ok(mean(&per_sample(samples, EvalSample::mask_iou)?))
}

/// A rate with its denominator; an empty denominator reads as 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: u32,
    pub total: u32,
}

impl Rate {
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            f64::from(self.hits) / f64::from(self.total)
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.total == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GresScores {
    pub giou: f64,
    pub n_acc: Rate,
    pub t_acc: Rate,
}

/// No-target accuracy and targeted accuracy.
pub fn target_rates(samples: &[EvalSample]) -> (Rate, Rate) {
    let mut n_acc = Rate { hits: 0, total: 0 };
    let mut t_acc = Rate { hits: 0, total: 0 };
    for s in samples {
        let rate = if s.gt.no_target { &mut n_acc } else { &mut t_acc };
        rate.total += 1;
        rate.hits += u32::from(s.predicted_no_target() == s.gt.no_target);
    }
    (n_acc, t_acc)
}

/// gIoU, no-target accuracy and targeted accuracy.
pub fn giou_nacc_tacc(samples: &[EvalSample]) -> Result<GresScores> {
    non_empty(samples)?;
    let giou = mean(&per_sample(samples, EvalSample::giou_term)?);
    let (n_acc, t_acc) = target_rates(samples);
    Ok(GresScores { giou, n_acc, t_acc })
}

fn hit_rates<F>(samples: &[EvalSample], thresholds: &[f64], hit: F) -> Result<BTreeMap<String, f64>>
where
    F: Fn(&EvalSample, f64) -> Result<bool> + Sync + Send,
{
    non_empty(samples)?;
    let mut out = BTreeMap::new();
    for &t in thresholds {
        let hits = per_sample(samples, |s| hit(s, t).map(|h| if h { 1.0 } else { 0.0 }))?;
        out.insert(threshold_key(t), mean(&hits));
    }
    Ok(out)
}

fn threshold_key(t: f64) -> String {
    format!("{t}")
}

/// REC precision at each IoU threshold (inclusive).
pub fn precision_at(samples: &[EvalSample], thresholds: &[f64]) -> Result<BTreeMap<String, f64>> {
    hit_rates(samples, thresholds, EvalSample::rec_hit)
}

/// GREC precision at each IoU threshold under greedy one-to-one matching.
pub fn grec_precision_at(
    samples: &[EvalSample],
    thresholds: &[f64],
) -> Result<BTreeMap<String, f64>> {
    hit_rates(samples, thresholds, EvalSample::grec_hit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalTask {
    Rec,
    Res,
    Grec,
    Gres,
}

impl EvalTask {
    pub fn expects_masks(self) -> bool {
        matches!(self, Self::Res | Self::Gres)
    }
}

impl fmt::Display for EvalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rec => "rec",
            Self::Res => "res",
            Self::Grec => "grec",
            Self::Gres => "gres",
        })
    }
}

impl FromStr for EvalTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rec" => Ok(Self::Rec),
            "res" => Ok(Self::Res),
            "grec" => Ok(Self::Grec),
            "gres" => Ok(Self::Gres),
            other => Err(Error::InvalidConfig(format!("unknown task {other:?}"))),
        }
    }
}

/// Metrics for one task. Fields that do not apply to the task are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: EvalTask,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miou: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub giou: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_acc: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub pr_at: BTreeMap<String, f64>,
    pub sample_count: u32,
    /// Predictions that could not be parsed (scored as wrong).
    pub malformed: u32,
    /// Rates whose denominator was zero and were reported as 1.0.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub zero_denominator: Vec<String>,
}

/// Full report for `task`; `thresholds` applies to the box tasks.
pub fn evaluate(samples: &[EvalSample], task: EvalTask, thresholds: &[f64]) -> Result<EvalReport> {
    non_empty(samples)?;
    let mut report = EvalReport {
        task,
        miou: None,
        giou: None,
        n_acc: None,
        t_acc: None,
        pr_at: BTreeMap::new(),
        sample_count: u32::try_from(samples.len())
            .map_err(|_| Error::InvalidConfig("too many samples".into()))?,
        malformed: samples.iter().filter(|s| s.pred.is_none()).count() as u32,
        zero_denominator: Vec::new(),
    };
    let set_rates = |report: &mut EvalReport, (n_acc, t_acc): (Rate, Rate)| {
        report.n_acc = Some(n_acc.value());
        report.t_acc = Some(t_acc.value());
        if n_acc.is_vacuous() {
            report.zero_denominator.push("n_acc".into());
        }
        if t_acc.is_vacuous() {
            report.zero_denominator.push("t_acc".into());
        }
    };
    match task {
        EvalTask::Rec => report.pr_at = precision_at(samples, thresholds)?,
        EvalTask::Res => report.miou = Some(miou(samples)?),
        EvalTask::Grec => {
            report.pr_at = grec_precision_at(samples, thresholds)?;
            set_rates(&mut report, target_rates(samples));
        }
        EvalTask::Gres => {
            let g = giou_nacc_tacc(samples)?;
            report.giou = Some(g.giou);
            set_rates(&mut report, (g.n_acc, g.t_acc));
        }
    }
    Ok(report)
}
