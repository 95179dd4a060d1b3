//! Eval JSONL: one ground-truth record per line.
//!
//! ```json
//! {"id": "ref-17", "width": 640, "height": 480, "no_target": false,
//!  "masks": [{"size": [480, 640], "counts": [...]}, {"polygons": [[x0, y0, ...]]}],
//!  "boxes": [[x0, y0, x1, y1]],
//!  "pred": "[12, 40, 300, 420]"}
//! ```
//!
//! RLE `counts` may be a run list or COCO's compact string. Boxes are
//! corner pixel coordinates. `pred` is optional when
//! predictions come from a separate file with one raw output per line,
//! aligned with the non-blank ground-truth lines. An empty prediction line
//! is the no-target answer.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::codec::{parse_grounding, Expect, ParseOptions};
use crate::error::{Error, Result};
use crate::geometry::{mask_from_polygons, BBox, BinaryMask, RleRef};
use crate::metrics::{EvalSample, GroundTruth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaskRef {
    Rle(RleRef),
    Polygons { polygons: Vec<Vec<f64>> },
}

impl MaskRef {
    pub fn to_mask(&self, width: u32, height: u32) -> Result<BinaryMask> {
        match self {
            Self::Rle(rle) => {
                let m = rle.to_rle()?.to_mask()?;
                if (m.width(), m.height()) != (width, height) {
                    return Err(Error::DimensionMismatch(m.width(), m.height(), width, height));
                }
                Ok(m)
            }
            Self::Polygons { polygons } => mask_from_polygons(polygons, width, height),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub no_target: bool,
    #[serde(default)]
    pub masks: Vec<MaskRef>,
    #[serde(default)]
    pub boxes: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred: Option<String>,
}

impl EvalRecord {
    pub fn ground_truth(&self) -> Result<GroundTruth> {
        let masks = self
            .masks
            .iter()
            .map(|m| m.to_mask(self.width, self.height))
            .collect::<Result<Vec<_>>>()?;
        let boxes = self
            .boxes
            .iter()
            .map(|b| BBox::new(b[0], b[1], b[2], b[3]))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroundTruth { no_target: self.no_target, masks, boxes })
    }
}

/// Splits a prediction file into lines, keeping empty lines (no-target
/// answers) and dropping only the final newline.
fn prediction_lines(text: &str) -> Vec<&str> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if text.is_empty() {
        return Vec::new();
    }
    body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect()
}

/// Builds samples from ground-truth JSONL and optional line-aligned
/// predictions. Predictions are parsed leniently; text that still fails
/// to parse becomes a malformed prediction.
pub fn load_eval_samples(
    gt_jsonl: &str,
    predictions: Option<&str>,
    expect: Expect,
    n_bins: u32,
) -> Result<Vec<EvalSample>> {
    let preds = predictions.map(prediction_lines);
    let opts = ParseOptions::lenient(expect).with_bins(n_bins);
    let mut samples = Vec::new();
    for (idx, line) in gt_jsonl.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let bad = |reason: String| Error::InvalidRecord { line: lineno, reason };
        let rec: EvalRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        let raw = match &preds {
            Some(p) => p.get(samples.len()).copied().ok_or(Error::MissingPrediction(lineno))?,
            None => rec.pred.as_deref().ok_or(Error::MissingPrediction(lineno))?,
        };
        let pred = match parse_grounding(raw, &opts) {
            Ok(parsed) => {
                if parsed.warnings > 0 {
                    warn!("line {lineno}: {} prediction repair(s)", parsed.warnings);
                }
                Some(parsed.output)
            }
            Err(e) => {
                warn!("line {lineno}: malformed prediction: {e}");
                None
            }
        };
        let gt = rec.ground_truth().map_err(|e| bad(e.to_string()))?;
        let sample = EvalSample::new(rec.width, rec.height, n_bins, gt, pred)
            .map_err(|e| bad(e.to_string()))?;
        samples.push(sample);
    }
    if let Some(p) = &preds {
        if p.len() > samples.len() {
            warn!("{} prediction line(s) beyond the ground truth ignored", p.len() - samples.len());
        }
    }
    Ok(samples)
}
