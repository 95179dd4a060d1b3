//! Instruction-tuning records: templates, dataset converters and checks.
//!
//! Records are written one JSON object per line:
//!
//! ```json
//! {"schema": "coinit-record/v1", "id": "res-000012", "task": "res", "split": "val",
//!  "images": ["COCO_val2014_000000000139.jpg"],
//!  "instruction": "Tell me where the left zebra is located in <image>. ...",
//!  "target": "[412, 150, 418, 151, ...]",
//!  "meta": {"source": "coco", "image_ids": ["139"], "ann_ids": [1820], "template": 0}}
//! ```

mod attcoseg;
mod coco;
mod templates;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{
    encode_mask_report, encode_polygon, parse_grounding, Expect, GroundingOutput, ParseOptions,
    QuantConfig, QuantSeq,
};
use crate::error::{Error, Result};
use crate::geometry::{flat_to_ring, shoelace_area, BinaryMask};
use crate::sampling::{SamplingConfig, SamplingMethod};

pub use attcoseg::{
    attcoseg_target, build_attcoseg, parse_attcoseg_target, read_negative_pool, AttCoSegPair,
    PositiveItem,
};
pub use coco::{convert_coco, CocoAnnotation, CocoImage, CocoInstances, RefEntry, Segmentation};
pub use templates::{Bindings, Placeholder, Task, Template, TemplateRegistry, IMAGE_MARKER};

pub const RECORD_SCHEMA: &str = "coinit-record/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub source: String,
    #[serde(default)]
    pub image_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ann_ids: Vec<u64>,
    /// Index of the template within the task's registry list.
    pub template: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub schema: String,
    pub id: String,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    pub images: Vec<String>,
    pub instruction: String,
    pub target: String,
    pub meta: RecordMeta,
}

impl InstructionRecord {
    /// Checks the image marker count and, for grounding tasks, that the
    /// target parses strictly.
    pub fn validate(&self, n_bins: u32) -> Result<()> {
        let markers = self.instruction.matches(IMAGE_MARKER).count();
        if markers != self.images.len() {
            return Err(Error::InvalidConfig(format!(
                "record {}: {markers} image marker(s) for {} image(s)",
                self.id,
                self.images.len()
            )));
        }
        if let Some(expect) = grounding_expect(self.task) {
            let opts = ParseOptions::strict(expect).with_bins(n_bins);
            if self.task == Task::AttCoSeg {
                parse_attcoseg_target(&self.target, self.images.len(), n_bins)?;
            } else {
                parse_grounding(&self.target, &opts)?;
            }
        }
        Ok(())
    }
}

/// Target grammar for grounding tasks.
pub fn grounding_expect(task: Task) -> Option<Expect> {
    match task {
        Task::Rec | Task::Grec => Some(Expect::Boxes),
        Task::Res | Task::Gres | Task::CoSeg | Task::AttCoSeg => Some(Expect::Masks),
        _ => None,
    }
}

/// Counters reported by the converters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionStats {
    pub records: usize,
    pub skipped_missing_ann: usize,
    pub skipped_empty_mask: usize,
    pub skipped_no_target: usize,
    pub skipped_invalid: usize,
    pub filtered_split: usize,
    /// Targets built from the largest part of a multi-part object.
    pub multi_part: usize,
    /// Targets whose object has holes the outline cannot represent.
    pub holes: usize,
    pub per_split: BTreeMap<String, usize>,
}

/// Shared converter settings.
#[derive(Debug, Clone)]
pub struct ConvertOptions {
    pub task: Task,
    pub n_bins: u32,
    pub sampling: SamplingConfig,
    pub method: SamplingMethod,
    pub seed: u64,
    /// Keep only these splits when set.
    pub splits: Option<BTreeSet<String>>,
    pub registry: TemplateRegistry,
}

impl ConvertOptions {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            n_bins: 1000,
            sampling: SamplingConfig::default(),
            method: SamplingMethod::Adaptive,
            seed: 0,
            splits: None,
            registry: TemplateRegistry::builtin(),
        }
    }

    /// Generator for item `index`: one ChaCha stream per item, so results
    /// do not depend on processing order.
    pub(crate) fn rng_for(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    pub(crate) fn render(
        &self,
        rng: &mut ChaCha8Rng,
        bindings: &Bindings,
        images: usize,
    ) -> Result<(usize, String)> {
        let list = self.registry.templates(self.task);
        if list.is_empty() {
            return Err(Error::InvalidConfig(format!("no templates registered for {}", self.task)));
        }
        let idx = rng.gen_range(0..list.len());
        Ok((idx, list[idx].render(bindings, images)?))
    }
}

/// An encoded object outline with notes on what the outline dropped.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EncodedObject {
    pub seq: QuantSeq,
    pub multi_part: bool,
    pub holes: bool,
}

/// Encodes the largest of a set of COCO polygons directly.
pub(crate) fn encode_polygons(
    polygons: &[Vec<f64>],
    qcfg: &QuantConfig,
    opts: &ConvertOptions,
) -> Result<EncodedObject> {
    let mut best: Option<(f64, Vec<_>)> = None;
    let mut parts = 0;
    for flat in polygons {
        let ring = flat_to_ring(flat)?;
        let area = if ring.len() >= 3 { shoelace_area(&ring) } else { 0.0 };
        if area > 0.0 {
            parts += 1;
            if best.as_ref().is_none_or(|(a, _)| area > *a) {
                best = Some((area, ring));
            }
        }
    }
    let (_, ring) = best.ok_or(Error::NoForeground)?;
    let seq = encode_polygon(&ring, qcfg, &opts.sampling, opts.method)?;
    Ok(EncodedObject { seq, multi_part: parts > 1, holes: false })
}

pub(crate) fn encode_raster(
    mask: &BinaryMask,
    qcfg: &QuantConfig,
    opts: &ConvertOptions,
) -> Result<EncodedObject> {
    let r = encode_mask_report(mask, qcfg, &opts.sampling, opts.method)?;
    Ok(EncodedObject { seq: r.seq, multi_part: r.components > 1, holes: r.has_holes })
}

pub(crate) fn masks_target(objects: &[EncodedObject]) -> String {
    GroundingOutput::Masks(objects.iter().map(|o| o.seq.clone()).collect()).to_string()
}

/// An image that appears under more than one split label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitLeak {
    pub image: String,
    pub splits: BTreeSet<String>,
}

/// Images shared between splits. Records without a split are ignored.
pub fn find_split_leaks<'a>(
    records: impl IntoIterator<Item = &'a InstructionRecord>,
) -> Vec<SplitLeak> {
    let mut seen: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for r in records {
        let Some(split) = &r.split else { continue };
        for img in &r.meta.image_ids {
            seen.entry(img.as_str()).or_default().insert(split.clone());
        }
    }
    seen.into_iter()
        .filter(|(_, s)| s.len() > 1)
        .map(|(image, splits)| SplitLeak { image: image.to_string(), splits })
        .collect()
}

pub fn write_jsonl<W: Write>(records: &[InstructionRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<InstructionRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidRecord { line: i + 1, reason: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::InvalidRecord { line: i + 1, reason: e.to_string() })?,
        );
    }
    Ok(out)
}
