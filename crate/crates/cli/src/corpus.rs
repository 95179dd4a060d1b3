//! Mask corpora for the upper-bound command.
//!
//! A corpus is a directory of PNG masks, an eval JSONL (every GT mask is
//! one item) or a COCO instances JSON (every annotation is one item, or
//! every referring expression when a refs file is given). Items are
//! described up front and rasterized on demand.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use maskseq::geometry::{mask_from_png, mask_from_polygons, BinaryMask};
use maskseq::instructgen::{CocoInstances, RefEntry, Segmentation};
use maskseq::metrics::{EvalRecord, MaskRef};

pub enum Item {
    Png(PathBuf),
    Mask { width: u32, height: u32, mask: MaskRef },
    Coco { width: u32, height: u32, parts: Vec<Segmentation> },
}

impl Item {
    pub fn load(&self) -> maskseq::Result<BinaryMask> {
        match self {
            Item::Png(p) => mask_from_png(p),
            Item::Mask { width, height, mask } => mask.to_mask(*width, *height),
            Item::Coco { width, height, parts } => {
                let mut acc = BinaryMask::new(*width, *height)?;
                for seg in parts {
                    let m = match seg {
                        Segmentation::Polygons(p) => mask_from_polygons(p, *width, *height)?,
                        Segmentation::Rle(r) => r.to_rle()?.to_mask()?,
                    };
                    acc = acc.union(&m)?;
                }
                Ok(acc)
            }
        }
    }
}

pub struct CocoSelection<'a> {
    pub refs: Option<&'a Path>,
    pub splits: &'a [String],
    pub unique: bool,
}

pub fn load(path: &Path, coco: &CocoSelection<'_>) -> Result<Vec<Item>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
            .collect();
        files.sort();
        return Ok(files.into_iter().map(Item::Png).collect());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => from_eval_jsonl(&text),
        Some("json") => from_coco(&text, coco),
        _ => bail!("{}: expected a directory, .jsonl or .json corpus", path.display()),
    }
}

fn from_eval_jsonl(text: &str) -> Result<Vec<Item>> {
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: EvalRecord =
            serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        for mask in rec.masks {
            items.push(Item::Mask { width: rec.width, height: rec.height, mask });
        }
    }
    Ok(items)
}

fn from_coco(text: &str, sel: &CocoSelection<'_>) -> Result<Vec<Item>> {
    let inst = CocoInstances::from_json(text)?;
    let dims: std::collections::HashMap<u64, (u32, u32)> =
        inst.images.iter().map(|i| (i.id, (i.width, i.height))).collect();
    let anns: std::collections::HashMap<u64, &maskseq::instructgen::CocoAnnotation> =
        inst.annotations.iter().map(|a| (a.id, a)).collect();
    let item = |ids: &[u64]| -> Option<Item> {
        let first = anns.get(ids.first()?)?;
        let (width, height) = *dims.get(&first.image_id)?;
        let parts = ids
            .iter()
            .map(|id| anns.get(id).and_then(|a| a.segmentation.clone()))
            .collect::<Option<Vec<_>>>()?;
        Some(Item::Coco { width, height, parts })
    };
    let Some(refs_path) = sel.refs else {
        return Ok(inst.annotations.iter().filter_map(|a| item(&[a.id])).collect());
    };
    let refs_text = fs::read_to_string(refs_path)
        .with_context(|| format!("reading {}", refs_path.display()))?;
    let mut seen = BTreeSet::new();
    let mut items = Vec::new();
    let mut missing = 0usize;
    for (_, r) in RefEntry::parse_jsonl(&refs_text)? {
        let keep = sel.splits.is_empty() || r.split.as_ref().is_some_and(|s| sel.splits.contains(s));
        let ids = r.ann_ids();
        if !keep || ids.is_empty() || (sel.unique && !seen.insert(ids.clone())) {
            continue;
        }
        match item(&ids) {
            Some(it) => items.push(it),
            None => missing += 1,
        }
    }
    if missing > 0 {
        log::warn!("{missing} reference(s) point at missing annotations");
    }
    Ok(items)
}
