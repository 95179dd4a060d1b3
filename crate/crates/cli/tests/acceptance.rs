//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `MASKSEQ_FUZZ_SECS` sets the parser fuzzing budget (default 60).
//! `MASKSEQ_REFCOCO_DIR` enables the RefCOCO reproduction; it must hold
//! `instances.json` and `refs.jsonl` in the converter input format.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::panic;
use std::path::Path;
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use common::{bin, p, write_coco_fixture};
use maskseq::codec::{
    dequantize, parse_grounding, quantize, serialize, Expect, GroundingOutput, ParseMode, ParseOptions,
    QuantBox, QuantConfig, QuantSeq,
};
use maskseq::geometry::{Contour, Point};
use maskseq::instructgen::{find_split_leaks, read_jsonl, InstructionRecord};
use maskseq::metrics::{giou_nacc_tacc, EvalSample, GroundTruth};
use maskseq::sampling::{densify, turning_angles};
use maskseq::{decode_mask, encode_mask, BinaryMask, SamplingConfig, SamplingMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }

    fn skip(detail: impl Into<String>) -> Self {
        Self { status: Status::Skip, detail: detail.into() }
    }

    fn within(self, elapsed: Duration, limit: Option<Duration>) -> Self {
        match limit {
            Some(l) if elapsed > l => Self {
                status: Status::Fail,
                detail: format!("{}; took {:.2} s, limit {} s", self.detail, elapsed.as_secs_f64(), l.as_secs()),
            },
            _ => self,
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn quantization_bound() -> Outcome {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for _ in 0..100_000 {
        let w = r.gen_range(1.0..4000.0);
        let h = r.gen_range(1.0..4000.0);
        let n_bins = r.gen_range(2..=2000);
        let cfg = QuantConfig::new(n_bins, w, h).unwrap();
        let pt = Point::new(r.gen_range(0.0..=w), r.gen_range(0.0..=h));
        let back: Point<f64> = dequantize(quantize(pt, &cfg), &cfg).unwrap();
        let (bx, by) = (w / f64::from(n_bins), h / f64::from(n_bins));
        let (ex, ey) = ((back.x - pt.x).abs(), (back.y - pt.y).abs());
        worst = worst.max(ex / bx).max(ey / by);
        if ex > bx * (1.0 + 1e-12) || ey > by * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Outcome::check(
        violations == 0,
        format!("100000 points, worst error {worst:.4} bin widths, {violations} over bound"),
    )
}

fn random_output(r: &mut ChaCha8Rng, n_bins: u32) -> GroundingOutput {
    match r.gen_range(0..5) {
        0 => GroundingOutput::NoTarget,
        1 | 2 => GroundingOutput::Boxes(
            (0..r.gen_range(1..=4))
                .map(|_| {
                    let (a, b) = (r.gen_range(0..n_bins), r.gen_range(0..n_bins));
                    let (c, d) = (r.gen_range(0..n_bins), r.gen_range(0..n_bins));
                    QuantBox::new(a.min(b), c.min(d), a.max(b), c.max(d))
                })
                .collect(),
        ),
        _ => GroundingOutput::Masks(
            (0..r.gen_range(1..=3))
                .map(|_| {
                    let k = r.gen_range(3..=40);
                    QuantSeq::new((0..k).map(|_| (r.gen_range(0..n_bins), r.gen_range(0..n_bins))).collect())
                })
                .collect(),
        ),
    }
}

fn expect_of(g: &GroundingOutput) -> Expect {
    match g {
        GroundingOutput::Boxes(_) => Expect::Boxes,
        _ => Expect::Masks,
    }
}

fn grammar_round_trip() -> Outcome {
    let mut r = rng(2);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let n_bins = if r.gen_bool(0.5) { 1000 } else { r.gen_range(2..5000) };
        let g = random_output(&mut r, n_bins);
        let opts = ParseOptions::strict(expect_of(&g)).with_bins(n_bins);
        match parse_grounding(&serialize(&g), &opts) {
            Ok(parsed) if parsed.output == g && parsed.warnings == 0 => {}
            _ => mismatches += 1,
        }
    }
    Outcome::check(mismatches == 0, format!("10000 outputs, {mismatches} mismatches"))
}

const ALPHABET: &[&str] =
    &["[", "]", ",", " ", "\n", "<bsep>", "<msep>", "<", ">", "-", "+", "0", "7", "999", "1000", "x", "é", "ß", "\u{1F600}"];

fn mutate(r: &mut ChaCha8Rng, text: &str) -> String {
    let mut s: Vec<char> = text.chars().collect();
    for _ in 0..r.gen_range(1..=4) {
        let at = r.gen_range(0..=s.len());
        match r.gen_range(0..3) {
            0 if at < s.len() => {
                s.remove(at);
            }
            1 => {
                let tok = ALPHABET[r.gen_range(0..ALPHABET.len())];
                for (i, c) in tok.chars().enumerate() {
                    s.insert(at + i, c);
                }
            }
            _ if !s.is_empty() => {
                let cut = r.gen_range(0..s.len());
                s.truncate(cut);
            }
            _ => {}
        }
    }
    s.into_iter().collect()
}

/// Returns (inputs tried, panics seen).
fn fuzz_parser(budget: Duration) -> (u64, u64) {
    let mut r = rng(3);
    let start = Instant::now();
    let (mut tried, mut panics) = (0u64, 0u64);
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    while start.elapsed() < budget {
        let text = if r.gen_bool(0.5) {
            let seed = serialize(&random_output(&mut r, 1000));
            mutate(&mut r, &seed)
        } else if r.gen_bool(0.5) {
            (0..r.gen_range(0..60)).map(|_| ALPHABET[r.gen_range(0..ALPHABET.len())]).collect()
        } else {
            let bytes: Vec<u8> = (0..r.gen_range(0..40)).map(|_| r.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        };
        for mode in [ParseMode::Strict, ParseMode::Lenient] {
            for expect in [Expect::Boxes, Expect::Masks] {
                let opts = ParseOptions { mode, expect, n_bins: 1000 };
                let ok = panic::catch_unwind(|| {
                    if let Err(e) = parse_grounding(&text, &opts) {
                        assert!(e.offset <= text.len());
                    }
                })
                .is_ok();
                panics += u64::from(!ok);
            }
        }
        tried += 1;
    }
    panic::set_hook(hook);
    (tried, panics)
}

fn iou_with_rect(decoded: &BinaryMask, x0: u32, y0: u32, x1: u32, y1: u32) -> f64 {
    let mut inter = 0u64;
    let mut pred = 0u64;
    for y in 0..decoded.height() {
        for x in 0..decoded.width() {
            if decoded.get(i64::from(x), i64::from(y)) {
                pred += 1;
                inter += u64::from(x >= x0 && x < x1 && y >= y0 && y < y1);
            }
        }
    }
    let area = u64::from(x1 - x0) * u64::from(y1 - y0);
    inter as f64 / (pred + area - inter) as f64
}

fn corner_recovery() -> Outcome {
    let mut r = rng(4);
    let base = SamplingConfig::default();
    let scfg = SamplingConfig { n_out: 4, ..base };
    let (mut adaptive, mut uniform) = (0.0, 0.0);
    let total = 100;
    for _ in 0..total {
        let w = r.gen_range(16..=240);
        let h = r.gen_range(16..=240);
        let x0 = r.gen_range(0..=256 - w);
        let y0 = r.gen_range(0..=256 - h);
        let mut m = BinaryMask::new(256, 256).unwrap();
        m.fill_rect(x0, y0, x0 + w, y0 + h);
        let q = QuantConfig::new(1000, 256.0, 256.0).unwrap();
        for (method, acc) in [(SamplingMethod::Adaptive, &mut adaptive), (SamplingMethod::Uniform, &mut uniform)] {
            let seq = encode_mask(&m, &q, &scfg, method).unwrap();
            *acc += iou_with_rect(&decode_mask(&seq, &q).unwrap(), x0, y0, x0 + w, y0 + h);
        }
    }
    let (a, u) = (adaptive / f64::from(total), uniform / f64::from(total));
    Outcome::check(a >= 0.99 && u <= 0.90, format!("n=4 adaptive {a:.4} (>= 0.99), uniform {u:.4} (<= 0.90)"))
}

/// Skyline polygon: a flat base under `k` columns of distinct adjacent
/// heights, giving `2k + 2` corners.
fn skyline(r: &mut ChaCha8Rng, k: u32) -> BinaryMask {
    let (size, left, right, base) = (192u32, 16u32, 176u32, 176u32);
    let mut cuts: Vec<u32> = rand::seq::index::sample(r, (right - left - 1) as usize, (k - 1) as usize)
        .into_iter()
        .map(|i| left + 1 + i as u32)
        .collect();
    cuts.sort_unstable();
    let mut xs = vec![left];
    for c in cuts {
        if c - xs.last().unwrap() >= 6 {
            xs.push(c);
        }
    }
    xs.push(right);
    let mut heights: Vec<u32> = Vec::new();
    for _ in 1..xs.len() {
        let mut h = r.gen_range(10..=150);
        while heights.last().is_some_and(|&prev: &u32| prev.abs_diff(h) < 4) {
            h = r.gen_range(10..=150);
        }
        heights.push(h);
    }
    let mut m = BinaryMask::new(size, size).unwrap();
    for (i, h) in heights.iter().enumerate() {
        m.fill_rect(xs[i], base - h, xs[i + 1], base);
    }
    m
}

fn adaptive_beats_uniform() -> Outcome {
    let mut r = rng(5);
    let corpus: Vec<BinaryMask> = (0..200)
        .map(|_| {
            let k = r.gen_range(2..=5);
            skyline(&mut r, k)
        })
        .collect();
    let q = QuantConfig::new(1000, 192.0, 192.0).unwrap();
    let base = SamplingConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [8, 16, 32] {
        let scfg = SamplingConfig { n_out: n, m_dense: base.m_dense.max(n), ..base };
        let mean = |method| {
            corpus
                .iter()
                .map(|m| maskseq::mask_iou(&decode_mask(&encode_mask(m, &q, &scfg, method).unwrap(), &q).unwrap(), m).unwrap())
                .sum::<f64>()
                / corpus.len() as f64
        };
        let (a, u) = (mean(SamplingMethod::Adaptive), mean(SamplingMethod::Uniform));
        ok &= a > u;
        parts.push(format!("n={n} {a:.4} vs {u:.4}"));
    }
    Outcome::check(ok, format!("200 skylines, adaptive vs uniform: {}", parts.join(", ")))
}

const REFCOCO_ADAPTIVE: [(u32, f64, f64); 5] =
    [(8, 76.47, 1.0), (12, 82.55, 1.0), (16, 89.51, 1.0), (24, 93.04, 1.0), (32, 97.26, 0.5)];
const REFCOCO_UNIFORM_32: (f64, f64) = (94.70, 0.5);

fn refcoco_upper_bound() -> Outcome {
    let Ok(dir) = std::env::var("MASKSEQ_REFCOCO_DIR") else {
        return Outcome::skip("set MASKSEQ_REFCOCO_DIR to run");
    };
    let dir = Path::new(&dir);
    let out = bin()
        .args(["upper-bound", p(&dir.join("instances.json")), "--refs", p(&dir.join("refs.jsonl"))])
        .args(["--split", "val", "--n-list", "8,12,16,24,32", "--methods", "uniform,adaptive"])
        .output()
        .expect("spawn maskseq");
    if !out.status.success() {
        return Outcome::check(false, format!("upper-bound failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let csv = String::from_utf8(out.stdout).unwrap();
    let value = |n: u32, method: &str| -> Option<f64> {
        csv.lines().find_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f.len() == 3 && f[0] == n.to_string() && f[1] == method).then(|| f[2].parse().ok()).flatten()
        })
    };
    let mut ok = true;
    let mut parts = Vec::new();
    let mut compare = |label: String, got: Option<f64>, want: f64, tol: f64| {
        let hit = got.is_some_and(|g| (g - want).abs() <= tol);
        ok &= hit;
        parts.push(format!("{label} {} (want {want} ± {tol})", got.map_or("missing".into(), |g| format!("{g:.2}"))));
    };
    for (n, want, tol) in REFCOCO_ADAPTIVE {
        compare(format!("adaptive n={n}"), value(n, "adaptive"), want, tol);
    }
    compare("uniform n=32".into(), value(32, "uniform"), REFCOCO_UNIFORM_32.0, REFCOCO_UNIFORM_32.1);
    Outcome::check(ok, parts.join(", "))
}

fn square(x0: u32, y0: u32, x1: u32, y1: u32) -> QuantSeq {
    QuantSeq::new(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
}

fn rect_mask(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
    let mut m = BinaryMask::new(w, h).unwrap();
    m.fill_rect(x0, y0, x1, y1);
    m
}

fn fixture_samples() -> Vec<EvalSample> {
    let s = |gt, pred| EvalSample::new(10, 10, 10, gt, Some(pred)).unwrap();
    let masks = GroundingOutput::Masks;
    vec![
        s(GroundTruth::masks(vec![rect_mask(10, 10, 0, 0, 4, 4)]), masks(vec![square(0, 0, 4, 4)])),
        s(GroundTruth::masks(vec![rect_mask(10, 10, 0, 0, 4, 4)]), masks(vec![square(2, 0, 6, 4)])),
        s(GroundTruth::none(), GroundingOutput::NoTarget),
        s(GroundTruth::none(), masks(vec![square(1, 1, 3, 3)])),
        s(GroundTruth::masks(vec![rect_mask(10, 10, 0, 0, 5, 2)]), GroundingOutput::NoTarget),
        s(
            GroundTruth::masks(vec![rect_mask(10, 10, 0, 0, 2, 2), rect_mask(10, 10, 6, 6, 8, 8)]),
            masks(vec![square(0, 0, 2, 2)]),
        ),
    ]
}

/// Even-odd test at a pixel center: a center on a crossing counts when the
/// crossing lies strictly to its right.
fn inside(ring: &[(f64, f64)], px: f64, py: f64) -> bool {
    let mut c = false;
    for k in 0..ring.len() {
        let (ax, ay) = ring[k];
        let (bx, by) = ring[(k + 1) % ring.len()];
        if (ay <= py) != (by <= py) && px < ax + (py - ay) * (bx - ax) / (by - ay) {
            c = !c;
        }
    }
    c
}

fn naive_scores(samples: &[EvalSample]) -> (f64, (u32, u32), (u32, u32)) {
    let mut giou = 0.0;
    let (mut n_hit, mut n_tot, mut t_hit, mut t_tot) = (0, 0, 0, 0);
    for s in samples {
        let scale = (f64::from(s.width) / f64::from(s.n_bins), f64::from(s.height) / f64::from(s.n_bins));
        let said_none = matches!(s.pred, Some(GroundingOutput::NoTarget));
        if s.gt.no_target {
            n_tot += 1;
            n_hit += u32::from(said_none);
            giou += if said_none { 1.0 } else { 0.0 };
            continue;
        }
        t_tot += 1;
        t_hit += u32::from(!said_none);
        let rings: Vec<Vec<(f64, f64)>> = match &s.pred {
            Some(GroundingOutput::Masks(seqs)) => seqs
                .iter()
                .map(|q| q.coords.iter().map(|&(x, y)| (f64::from(x) * scale.0, f64::from(y) * scale.1)).collect())
                .collect(),
            _ => Vec::new(),
        };
        let (mut inter, mut union) = (0u32, 0u32);
        for y in 0..s.height {
            for x in 0..s.width {
                let (px, py) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
                let p = rings.iter().any(|r| inside(r, px, py));
                let g = s.gt.masks.iter().any(|m| m.get(i64::from(x), i64::from(y)));
                inter += u32::from(p && g);
                union += u32::from(p || g);
            }
        }
        if !said_none {
            giou += if union == 0 { 1.0 } else { f64::from(inter) / f64::from(union) };
        }
    }
    (giou / samples.len() as f64, (n_hit, n_tot), (t_hit, t_tot))
}

fn random_samples(r: &mut ChaCha8Rng, count: usize) -> Vec<EvalSample> {
    let (w, h, n_bins) = (24, 18, 12);
    (0..count)
        .map(|_| {
            let gt = if r.gen_bool(0.3) {
                GroundTruth::none()
            } else {
                GroundTruth::masks(
                    (0..r.gen_range(1..=2))
                        .map(|_| {
                            let (x0, y0) = (r.gen_range(0..w - 2), r.gen_range(0..h - 2));
                            rect_mask(w, h, x0, y0, r.gen_range(x0 + 1..=w), r.gen_range(y0 + 1..=h))
                        })
                        .collect(),
                )
            };
            let pred = if r.gen_bool(0.25) {
                GroundingOutput::NoTarget
            } else {
                GroundingOutput::Masks(
                    (0..r.gen_range(1..=2))
                        .map(|_| {
                            let k = r.gen_range(3..=7);
                            QuantSeq::new((0..k).map(|_| (r.gen_range(0..n_bins), r.gen_range(0..n_bins))).collect())
                        })
                        .collect(),
                )
            };
            EvalSample::new(w, h, n_bins, gt, Some(pred)).unwrap()
        })
        .collect()
}

fn metric_fixture() -> Outcome {
    let s = giou_nacc_tacc(&fixture_samples()).unwrap();
    let want_giou = 17.0 / 36.0;
    let fixture_ok = (s.giou - want_giou).abs() <= 1e-12
        && (s.n_acc.hits, s.n_acc.total) == (1, 2)
        && (s.t_acc.hits, s.t_acc.total) == (3, 4);
    let mut r = rng(6);
    let random = random_samples(&mut r, 20);
    let got = giou_nacc_tacc(&random).unwrap();
    let (giou, n, t) = naive_scores(&random);
    let oracle_ok = (got.giou - giou).abs() <= 1e-12
        && (got.n_acc.hits, got.n_acc.total) == n
        && (got.t_acc.hits, got.t_acc.total) == t;
    Outcome::check(
        fixture_ok && oracle_ok,
        format!(
            "fixture gIoU {:.6} (want {want_giou:.6}), N-acc {}/{}, T-acc {}/{}; oracle gIoU {giou:.6} vs {:.6} on 20 samples",
            s.giou, s.n_acc.hits, s.n_acc.total, s.t_acc.hits, s.t_acc.total, got.giou
        ),
    )
}

fn converter_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (inst, refs) = write_coco_fixture(dir.path());
    let convert = |task: &str, jobs: &str, name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let o = bin()
            .args(["--seed", "11", "--jobs", jobs, "convert", "coco", "--instances", p(&inst), "--refs", p(&refs)])
            .args(["--task", task, "--out", p(&out)])
            .output()
            .expect("spawn maskseq");
        if !o.status.success() {
            return Err(format!("{task}: {}", String::from_utf8_lossy(&o.stderr)));
        }
        Ok(fs::read(&out).unwrap())
    };
    let mut problems = Vec::new();
    let mut records: Vec<InstructionRecord> = Vec::new();
    for task in ["rec", "res", "grec", "gres", "reg"] {
        let runs = [
            convert(task, "1", &format!("{task}-a.jsonl")),
            convert(task, "1", &format!("{task}-b.jsonl")),
            convert(task, "8", &format!("{task}-c.jsonl")),
        ];
        let runs: Vec<Vec<u8>> = match runs.into_iter().collect() {
            Ok(v) => v,
            Err(e) => {
                problems.push(e);
                continue;
            }
        };
        if runs[0] != runs[1] || runs[0] != runs[2] {
            problems.push(format!("{task}: outputs differ"));
        }
        let recs: Vec<InstructionRecord> = read_jsonl(runs[0].as_slice()).unwrap();
        for rec in &recs {
            if let Err(e) = rec.validate(1000) {
                problems.push(format!("{}: {e}", rec.id));
            }
        }
        records.extend(recs);
    }
    let leaks = find_split_leaks(&records);
    if !leaks.is_empty() {
        problems.push(format!("{} split leak(s)", leaks.len()));
    }
    Outcome::check(
        problems.is_empty(),
        if problems.is_empty() {
            format!("5 tasks, {} records, identical across runs and --jobs 1/8, strict targets, no leaks", records.len())
        } else {
            problems.join("; ")
        },
    )
}

fn turning_geometry() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let k = r.gen_range(3..=24);
        let mut angles: Vec<f64> = (0..k).map(|_| r.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        if angles.len() < 3 {
            angles = vec![0.0, 2.0, 4.0];
        }
        let (a, b) = (r.gen_range(10.0..200.0), r.gen_range(10.0..200.0));
        let ring: Vec<Point<f64>> = angles.iter().map(|t| Point::new(300.0 + a * t.cos(), 300.0 + b * t.sin())).collect();
        let dense = densify(&Contour::new(ring).unwrap(), r.gen_range(50..=800)).unwrap();
        worst = worst.max((turning_angles(&dense).unwrap().total() - 2.0 * PI).abs());
    }
    let sq = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)].map(|(x, y)| Point::new(x, y));
    let corner_err =
        turning_angles(&sq).unwrap().angles.iter().map(|t| (t - FRAC_PI_2).abs()).fold(0.0f64, f64::max);
    Outcome::check(
        worst <= 1e-6 && corner_err <= 1e-9,
        format!("100 convex rings, worst |sum - 2π| {worst:.2e}; square corner error {corner_err:.2e}"),
    )
}

fn main() -> ExitCode {
    let fuzz_secs: u64 = std::env::var("MASKSEQ_FUZZ_SECS").ok().and_then(|v| v.parse().ok()).unwrap_or(60);
    let fuzz = thread::spawn(move || fuzz_parser(Duration::from_secs(fuzz_secs)));

    type Check = fn() -> Outcome;
    let checks: [(&str, Check, Option<u64>); 8] = [
        ("quantization-bound", quantization_bound, Some(1)),
        ("grammar-round-trip", grammar_round_trip, None),
        ("corner-recovery", corner_recovery, Some(5)),
        ("adaptive-beats-uniform", adaptive_beats_uniform, Some(30)),
        ("refcoco-upper-bound", refcoco_upper_bound, Some(600)),
        ("metric-fixture", metric_fixture, Some(1)),
        ("converter-determinism", converter_determinism, None),
        ("turning-angle-geometry", turning_geometry, None),
    ];
    let mut results = Vec::new();
    for (name, check, limit) in checks {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        results.push((name, outcome.within(elapsed, limit.map(Duration::from_secs)), elapsed));
    }

    let (tried, panics) = fuzz.join().expect("fuzz thread");
    let grammar = &mut results[1].1;
    grammar.detail.push_str(&format!("; fuzzed {tried} inputs for {fuzz_secs} s, {panics} panics"));
    if panics > 0 {
        grammar.status = Status::Fail;
    }

    let mut failed = 0;
    for (name, outcome, elapsed) in &results {
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("{tag} {name:<24} {} ({:.2} s)", outcome.detail, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
