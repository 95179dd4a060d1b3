#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use maskseq::geometry::{mask_to_png, BinaryMask, CocoRle};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_maskseq"));
    c.env("MASKSEQ_LOG", "error");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn maskseq")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn disk(size: u32, r: f64) -> BinaryMask {
    let c = f64::from(size) / 2.0;
    BinaryMask::from_fn(size, size, |x, y| {
        let (dx, dy) = (f64::from(x) + 0.5 - c, f64::from(y) + 0.5 - c);
        dx * dx + dy * dy <= r * r
    })
    .unwrap()
}

pub fn write_png(dir: &Path, name: &str, mask: &BinaryMask) -> PathBuf {
    let path = dir.join(name);
    mask_to_png(mask, &path).unwrap();
    path
}

/// Two images, four annotations (polygon, multi-part polygon, RLE run list,
/// RLE string) and refs over train/val with a no-target and a missing one.
pub fn write_coco_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let instances = r#"{
  "images": [
    {"id": 1, "file_name": "img1.jpg", "width": 120, "height": 90},
    {"id": 2, "file_name": "img2.jpg", "width": 64, "height": 48}
  ],
  "annotations": [
    {"id": 101, "image_id": 1, "bbox": [10, 12, 40, 30],
     "segmentation": [[10, 12, 50, 12, 50, 42, 30, 42, 30, 30, 10, 30]]},
    {"id": 102, "image_id": 1, "bbox": [60, 20, 50, 60],
     "segmentation": [[60, 20, 110, 20, 85, 80], [100, 70, 104, 70, 104, 74, 100, 74]]},
    {"id": 201, "image_id": 2, "bbox": [1, 1, 3, 2],
     "segmentation": {"size": [48, 64], "counts": [49, 2, 46, 2, 46, 2, 2925]}},
    {"id": 202, "image_id": 2, "bbox": [20, 10, 20, 20],
     "segmentation": {"size": [48, 64], "counts": "RLE_STRING"}}
  ]
}"#;
    let mut square = BinaryMask::new(64, 48).unwrap();
    square.fill_rect(20, 10, 40, 30);
    let instances = instances.replace("RLE_STRING", &CocoRle::from_mask(&square).compress());
    let refs = r#"{"ann_id": 101, "image_id": 1, "expression": "the L-shaped block", "split": "train"}
{"ann_id": 102, "image_id": 1, "expression": "the triangle", "split": "train"}
{"ann_id": [101, 102], "image_id": 1, "expression": "all shapes", "split": "train"}
{"ann_id": null, "image_id": 1, "expression": "the blue car", "split": "train"}
{"ann_id": 201, "image_id": 2, "expression": "the small square", "split": "val"}
{"ann_id": 999, "image_id": 2, "expression": "nothing here", "split": "val"}
{"ann_id": 201, "image_id": 2, "expression": "top left thing", "split": "val"}
{"ann_id": 202, "image_id": 2, "expression": "the middle square", "split": "val"}
"#;
    let ip = dir.join("instances.json");
    let rp = dir.join("refs.jsonl");
    std::fs::write(&ip, instances).unwrap();
    std::fs::write(&rp, refs).unwrap();
    (ip, rp)
}
