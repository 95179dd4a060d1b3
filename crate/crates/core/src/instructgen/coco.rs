//! COCO instances plus referring expressions to instruction records.
//!
//! Expressions come as JSONL, one per line:
//! `{"ann_id": 1820, "image_id": 139, "expression": "the left zebra", "split": "val"}`.
//! `ann_id` may also be a list (multi-target) or `null`/`[]` (no target).

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{quantize_box, GroundingOutput, QuantConfig};
use crate::error::{Error, Result};
use crate::geometry::{BBox, RleRef};
use crate::instructgen::{
    encode_polygons, encode_raster, masks_target, Bindings, ConversionStats, ConvertOptions,
    EncodedObject, InstructionRecord, RecordMeta, Task, RECORD_SCHEMA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: u64,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segmentation {
    Polygons(Vec<Vec<f64>>),
    Rle(RleRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: u64,
    /// `[x, y, width, height]`.
    #[serde(default)]
    pub bbox: Option<[f64; 4]>,
    #[serde(default)]
    pub segmentation: Option<Segmentation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocoInstances {
    pub images: Vec<CocoImage>,
    pub annotations: Vec<CocoAnnotation>,
}

impl CocoInstances {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRecord {
            line: e.line(),
            reason: format!("column {}: {e}", e.column()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnnIds {
    One(u64),
    Many(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefEntry {
    #[serde(default, alias = "ann_ids")]
    pub ann_id: Option<AnnIds>,
    pub image_id: u64,
    pub expression: String,
    #[serde(default)]
    pub split: Option<String>,
}

impl RefEntry {
    pub fn ann_ids(&self) -> Vec<u64> {
        match &self.ann_id {
            None => Vec::new(),
            Some(AnnIds::One(a)) => vec![*a],
            Some(AnnIds::Many(v)) => v.clone(),
        }
    }

    /// Parses refs JSONL; blank lines are skipped. Returns entries with
    /// their zero-based line index.
    pub fn parse_jsonl(text: &str) -> Result<Vec<(usize, RefEntry)>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(line)
                .map_err(|e| Error::InvalidRecord { line: i + 1, reason: e.to_string() })?;
            out.push((i, entry));
        }
        Ok(out)
    }
}

enum Outcome {
    Record(Box<InstructionRecord>, bool, bool),
    MissingAnn,
    EmptyMask,
    NoTarget,
    Invalid,
    Filtered,
}

struct Index<'a> {
    images: HashMap<u64, &'a CocoImage>,
    anns: HashMap<u64, &'a CocoAnnotation>,
}

/// Converts referring expressions into records for `opts.task` (REC, RES,
/// GREC, GRES or REG). Entries are processed in parallel and emitted in
/// input order.
pub fn convert_coco(
    instances: &CocoInstances,
    refs: &[(usize, RefEntry)],
    opts: &ConvertOptions,
) -> Result<(Vec<InstructionRecord>, ConversionStats)> {
    if !matches!(opts.task, Task::Rec | Task::Res | Task::Grec | Task::Gres | Task::Reg) {
        return Err(Error::InvalidConfig(format!("task {} has no COCO converter", opts.task)));
    }
    opts.sampling.validate()?;
    let index = Index {
        images: instances.images.iter().map(|i| (i.id, i)).collect(),
        anns: instances.annotations.iter().map(|a| (a.id, a)).collect(),
    };
    let outcomes: Vec<Outcome> = refs
        .par_iter()
        .map(|(line, entry)| convert_one(&index, *line, entry, opts))
        .collect::<Result<_>>()?;
    let mut stats = ConversionStats::default();
    let mut records = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Record(r, multi, holes) => {
                stats.multi_part += usize::from(multi);
                stats.holes += usize::from(holes);
                if let Some(s) = &r.split {
                    *stats.per_split.entry(s.clone()).or_default() += 1;
                }
                records.push(*r);
            }
            Outcome::MissingAnn => stats.skipped_missing_ann += 1,
            Outcome::EmptyMask => stats.skipped_empty_mask += 1,
            Outcome::NoTarget => stats.skipped_no_target += 1,
            Outcome::Invalid => stats.skipped_invalid += 1,
            Outcome::Filtered => stats.filtered_split += 1,
        }
    }
    stats.records = records.len();
    Ok((records, stats))
}

fn pixel_box(ann: &CocoAnnotation) -> Option<BBox<f64>> {
    let [x, y, w, h] = ann.bbox?;
    BBox::new(x, y, x + w, y + h).ok()
}

fn encode_ann(ann: &CocoAnnotation, img: &CocoImage, qcfg: &QuantConfig, opts: &ConvertOptions) -> Result<EncodedObject> {
    match &ann.segmentation {
        Some(Segmentation::Polygons(polys)) => encode_polygons(polys, qcfg, opts),
        Some(Segmentation::Rle(rle)) => {
            let mask = rle.to_rle()?.to_mask()?;
            if (mask.width(), mask.height()) != (img.width, img.height) {
                return Err(Error::DimensionMismatch(mask.width(), mask.height(), img.width, img.height));
            }
            encode_raster(&mask, qcfg, opts)
        }
        None => Err(Error::NoForeground),
    }
}

fn convert_one(index: &Index<'_>, line: usize, entry: &RefEntry, opts: &ConvertOptions) -> Result<Outcome> {
    if let (Some(keep), Some(split)) = (&opts.splits, &entry.split) {
        if !keep.contains(split) {
            return Ok(Outcome::Filtered);
        }
    } else if opts.splits.is_some() {
        return Ok(Outcome::Filtered);
    }
    let Some(img) = index.images.get(&entry.image_id) else {
        return Ok(Outcome::MissingAnn);
    };
    let ids = entry.ann_ids();
    let mut anns = Vec::with_capacity(ids.len());
    for id in &ids {
        match index.anns.get(id) {
            Some(a) if a.image_id == entry.image_id => anns.push(*a),
            _ => return Ok(Outcome::MissingAnn),
        }
    }
    let single = matches!(opts.task, Task::Rec | Task::Res | Task::Reg);
    if anns.is_empty() && single {
        return Ok(Outcome::NoTarget);
    }
    if single && anns.len() > 1 {
        return Ok(Outcome::Invalid);
    }
    let qcfg = QuantConfig::new(opts.n_bins, f64::from(img.width), f64::from(img.height))?;

    let mut bindings = Bindings::new().expr(entry.expression.as_str());
    let (mut multi, mut holes) = (false, false);
    let target = match opts.task {
        Task::Rec | Task::Grec | Task::Reg => {
            let mut boxes = Vec::with_capacity(anns.len());
            for a in &anns {
                let Some(b) = pixel_box(a) else { return Ok(Outcome::Invalid) };
                boxes.push(quantize_box(&b, &qcfg));
            }
            let out = if boxes.is_empty() { GroundingOutput::NoTarget } else { GroundingOutput::Boxes(boxes) };
            if opts.task == Task::Reg {
                bindings = bindings.objs(out.to_string());
                entry.expression.clone()
            } else {
                out.to_string()
            }
        }
        _ => {
            let mut objects = Vec::with_capacity(anns.len());
            for a in &anns {
                match encode_ann(a, img, &qcfg, opts) {
                    Ok(o) => objects.push(o),
                    Err(Error::NoForeground | Error::DegeneratePolygon(_) | Error::NoContour) => {
                        return Ok(Outcome::EmptyMask)
                    }
                    Err(_) => return Ok(Outcome::Invalid),
                }
            }
            multi = objects.iter().any(|o| o.multi_part);
            holes = objects.iter().any(|o| o.holes);
            if objects.is_empty() {
                String::new()
            } else {
                masks_target(&objects)
            }
        }
    };
    let mut rng = opts.rng_for(line);
    let (template, instruction) = opts.render(&mut rng, &bindings, 1)?;
    let record = InstructionRecord {
        schema: RECORD_SCHEMA.into(),
        id: format!("{}-{:06}", opts.task, line),
        task: opts.task,
        split: entry.split.clone(),
        images: vec![img.file_name.clone()],
        instruction,
        target,
        meta: RecordMeta {
            source: "coco".into(),
            image_ids: vec![img.id.to_string()],
            ann_ids: ids,
            template,
        },
    };
    Ok(Outcome::Record(Box::new(record), multi, holes))
}
