//! Attribute-level co-segmentation groups.
//!
//! Each manifest line names two images sharing an object with matching
//! attributes, plus that object's mask in each:
//!
//! ```json
//! {"id": "p1", "split": "train", "positives": [
//!   {"image": "a.jpg", "width": 640, "height": 480, "mask": {"polygons": [[...]]}},
//!   {"image": "b.jpg", "width": 500, "height": 375, "mask": {"size": [375, 500], "counts": "..."}}]}
//! ```
//!
//! A group mixes the pair with negatives drawn from a pool, in shuffled
//! order. The target names the zero-based positions of the pair and then
//! lists both outlines: `images 0 and 2: [..]<msep>[..]`.

use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{parse_grounding, GroundingOutput, ParseOptions, Expect, QuantConfig, QuantSeq};
use crate::error::{Error, Result};
use crate::instructgen::{
    encode_polygons, encode_raster, Bindings, ConversionStats, ConvertOptions, EncodedObject,
    InstructionRecord, RecordMeta, Task, RECORD_SCHEMA,
};
use crate::metrics::MaskRef;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveItem {
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub mask: MaskRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttCoSegPair {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub split: Option<String>,
    pub positives: [PositiveItem; 2],
}

impl AttCoSegPair {
    pub fn parse_jsonl(text: &str) -> Result<Vec<AttCoSegPair>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            out.push(
                serde_json::from_str(line)
                    .map_err(|e| Error::InvalidRecord { line: i + 1, reason: e.to_string() })?,
            );
        }
        Ok(out)
    }
}

/// One image reference per non-blank line, either bare, a JSON string or
/// an object with an `image` field.
pub fn read_negative_pool(text: &str) -> Result<Vec<String>> {
    #[derive(Deserialize)]
    struct Obj {
        image: String,
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |e: serde_json::Error| Error::InvalidRecord { line: i + 1, reason: e.to_string() };
        let image = match line.as_bytes()[0] {
            b'"' => serde_json::from_str::<String>(line).map_err(bad)?,
            b'{' => serde_json::from_str::<Obj>(line).map_err(bad)?.image,
            _ => line.to_string(),
        };
        out.push(image);
    }
    Ok(out)
}

pub fn attcoseg_target(i: usize, j: usize, masks: &[QuantSeq; 2]) -> String {
    format!("images {i} and {j}: {}", GroundingOutput::Masks(masks.to_vec()))
}

/// Splits a target into the two positive positions and the outlines,
/// which must parse strictly.
pub fn parse_attcoseg_target(text: &str, n_images: usize, n_bins: u32) -> Result<(usize, usize, Vec<QuantSeq>)> {
    let bad = |why: &str| Error::InvalidTarget(format!("{why}: {text:?}"));
    let rest = text.strip_prefix("images ").ok_or_else(|| bad("missing \"images\" prefix"))?;
    let (head, masks) = rest.split_once(": ").ok_or_else(|| bad("missing \": \""))?;
    let (a, b) = head.split_once(" and ").ok_or_else(|| bad("missing \" and \""))?;
    let i: usize = a.parse().map_err(|_| bad("bad first index"))?;
    let j: usize = b.parse().map_err(|_| bad("bad second index"))?;
    if i == j || i >= n_images || j >= n_images {
        return Err(bad("indices must be distinct and in range"));
    }
    let parsed = parse_grounding(masks, &ParseOptions::strict(Expect::Masks).with_bins(n_bins))?;
    match parsed.output {
        GroundingOutput::Masks(seqs) if seqs.len() == 2 => Ok((i, j, seqs)),
        _ => Err(bad("expected two outlines")),
    }
}

fn encode_positive(item: &PositiveItem, opts: &ConvertOptions) -> Result<EncodedObject> {
    let qcfg = QuantConfig::new(opts.n_bins, f64::from(item.width), f64::from(item.height))?;
    match &item.mask {
        MaskRef::Polygons { polygons } => encode_polygons(polygons, &qcfg, opts),
        m => encode_raster(&m.to_mask(item.width, item.height)?, &qcfg, opts),
    }
}

enum Outcome {
    Record(Box<InstructionRecord>),
    EmptyMask,
}

/// Builds one record per pair with `k_images` images in total. Group `p`
/// draws from generator stream `p`, so output is independent of the
/// thread count.
pub fn build_attcoseg(
    pairs: &[AttCoSegPair],
    pool: &[String],
    k_images: usize,
    opts: &ConvertOptions,
) -> Result<(Vec<InstructionRecord>, ConversionStats)> {
    if k_images < 2 {
        return Err(Error::InvalidConfig(format!("k_images = {k_images} < 2")));
    }
    let n_neg = k_images - 2;
    if pool.len() < n_neg {
        return Err(Error::InvalidConfig(format!(
            "negative pool has {} image(s), need {n_neg}",
            pool.len()
        )));
    }
    let opts = ConvertOptions { task: Task::AttCoSeg, ..opts.clone() };
    opts.sampling.validate()?;
    let outcomes: Vec<Outcome> = pairs
        .par_iter()
        .enumerate()
        .map(|(p, pair)| build_one(p, pair, pool, n_neg, &opts))
        .collect::<Result<_>>()?;
    let mut stats = ConversionStats::default();
    let mut records = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Record(r) => {
                if let Some(s) = &r.split {
                    *stats.per_split.entry(s.clone()).or_default() += 1;
                }
                records.push(*r);
            }
            Outcome::EmptyMask => stats.skipped_empty_mask += 1,
        }
    }
    stats.records = records.len();
    Ok((records, stats))
}

fn build_one(p: usize, pair: &AttCoSegPair, pool: &[String], n_neg: usize, opts: &ConvertOptions) -> Result<Outcome> {
    let mut rng = opts.rng_for(p);
    // None marks a negative; Some(k) is positive k.
    let mut group: Vec<(&str, Option<usize>)> = pair
        .positives
        .iter()
        .enumerate()
        .map(|(k, item)| (item.image.as_str(), Some(k)))
        .collect();
    for idx in index::sample(&mut rng, pool.len(), n_neg) {
        group.push((pool[idx].as_str(), None));
    }
    let distinct: BTreeSet<&str> = group.iter().map(|g| g.0).collect();
    if distinct.len() != group.len() {
        return Err(Error::InvalidConfig(format!("pair {p}: duplicate image in group")));
    }
    group.shuffle(&mut rng);

    let mut encoded = Vec::with_capacity(2);
    for item in &pair.positives {
        match encode_positive(item, opts) {
            Ok(o) => encoded.push(o.seq),
            Err(Error::NoForeground | Error::NoContour | Error::DegeneratePolygon(_)) => {
                return Ok(Outcome::EmptyMask)
            }
            Err(e) => return Err(e),
        }
    }
    let pos = |k| group.iter().position(|g| g.1 == Some(k)).expect("positive present");
    let (i, j) = (pos(0), pos(1));
    let masks = if i < j {
        [encoded[0].clone(), encoded[1].clone()]
    } else {
        [encoded[1].clone(), encoded[0].clone()]
    };
    let images: Vec<String> = group.iter().map(|g| g.0.to_string()).collect();
    let (template, instruction) = opts.render(&mut rng, &Bindings::new(), images.len())?;
    let record = InstructionRecord {
        schema: RECORD_SCHEMA.into(),
        id: pair.id.clone().unwrap_or_else(|| format!("attcoseg-{p:06}")),
        task: Task::AttCoSeg,
        split: pair.split.clone(),
        instruction,
        target: attcoseg_target(i.min(j), i.max(j), &masks),
        meta: RecordMeta { source: "attcoseg".into(), image_ids: images.clone(), ann_ids: vec![], template },
        images,
    };
    Ok(Outcome::Record(Box::new(record)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str) -> AttCoSegPair {
        let sq = |x: f64| MaskRef::Polygons { polygons: vec![vec![x, x, x + 20.0, x, x + 20.0, x + 30.0, x, x + 30.0]] };
        AttCoSegPair {
            id: None,
            split: Some("train".into()),
            positives: [
                PositiveItem { image: a.into(), width: 64, height: 64, mask: sq(4.0) },
                PositiveItem { image: b.into(), width: 64, height: 64, mask: sq(10.0) },
            ],
        }
    }

    fn pool() -> Vec<String> {
        vec!["n1.jpg".into(), "n2.jpg".into(), "n3.jpg".into()]
    }

    #[test]
    fn four_image_group() {
        let (recs, stats) =
            build_attcoseg(&[pair("a.jpg", "b.jpg")], &pool(), 4, &ConvertOptions::new(Task::AttCoSeg)).unwrap();
        assert_eq!(stats.records, 1);
        let r = &recs[0];
        assert_eq!(r.images.len(), 4);
        assert_eq!(r.instruction.matches("<image>").count(), 4);
        let (i, j, seqs) = parse_attcoseg_target(&r.target, 4, 1000).unwrap();
        assert!(i < j && j < 4);
        assert_eq!(seqs.len(), 2);
        let named: BTreeSet<&str> = [r.images[i].as_str(), r.images[j].as_str()].into();
        assert_eq!(named, ["a.jpg", "b.jpg"].into());
        r.validate(1000).unwrap();
    }

    #[test]
    fn seeded_shuffle_is_stable() {
        let pairs: Vec<_> = (0..6).map(|k| pair(&format!("a{k}"), &format!("b{k}"))).collect();
        let opts = ConvertOptions { seed: 11, ..ConvertOptions::new(Task::AttCoSeg) };
        let a = build_attcoseg(&pairs, &pool(), 5, &opts).unwrap();
        let b = build_attcoseg(&pairs, &pool(), 5, &opts).unwrap();
        assert_eq!(a, b);
        let c = build_attcoseg(&pairs, &pool(), 5, &ConvertOptions { seed: 12, ..opts }).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn two_image_group_has_no_negatives() {
        let (recs, _) = build_attcoseg(&[pair("a", "b")], &[], 2, &ConvertOptions::new(Task::AttCoSeg)).unwrap();
        assert!(recs[0].target.starts_with("images 0 and 1: "));
    }

    #[test]
    fn construction_errors() {
        let opts = ConvertOptions::new(Task::AttCoSeg);
        assert!(build_attcoseg(&[pair("a", "b")], &pool(), 6, &opts).is_err());
        assert!(build_attcoseg(&[pair("a", "a")], &pool(), 3, &opts).is_err());
        assert!(build_attcoseg(&[pair("a", "b")], &["a".to_string()], 3, &opts).is_err());
        assert!(build_attcoseg(&[pair("a", "b")], &pool(), 1, &opts).is_err());
    }

    #[test]
    fn target_parsing() {
        let s = QuantSeq::new(vec![(0, 0), (10, 0), (10, 10)]);
        let t = attcoseg_target(1, 3, &[s.clone(), s.clone()]);
        assert_eq!(t, "images 1 and 3: [0, 0, 10, 0, 10, 10]<msep>[0, 0, 10, 0, 10, 10]");
        assert_eq!(parse_attcoseg_target(&t, 4, 1000).unwrap(), (1, 3, vec![s.clone(), s]));
        assert!(parse_attcoseg_target(&t, 3, 1000).is_err());
        assert!(parse_attcoseg_target("images 1 and 1: [0, 0, 1, 1, 2, 2]", 4, 1000).is_err());
        assert!(parse_attcoseg_target("[0, 0, 1, 1, 2, 2]", 4, 1000).is_err());
    }

    #[test]
    fn pool_formats() {
        let p = read_negative_pool("x.jpg\n\n\"y z.jpg\"\n{\"image\": \"w.jpg\"}\n").unwrap();
        assert_eq!(p, vec!["x.jpg", "y z.jpg", "w.jpg"]);
        assert!(read_negative_pool("{\"img\": 1}").is_err());
    }
}
