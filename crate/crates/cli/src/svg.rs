//! Static SVG output: grounding overlays and the upper-bound plot.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Context, Result};
use maskseq::codec::{dequantize, dequantize_box, GroundingOutput, QuantConfig};
use maskseq::Point64;

const PALETTE: [&str; 6] = ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Draws a parsed output over an optional image reference. Mask outlines
/// become closed paths, boxes become rectangles, and a no-target answer
/// becomes a text layer.
pub fn overlay(out: &GroundingOutput, qcfg: &QuantConfig, image: Option<&str>) -> Result<String> {
    let (w, h) = (qcfg.image_w, qcfg.image_h);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )?;
    if let Some(href) = image {
        writeln!(s, r#"  <image href="{}" x="0" y="0" width="{w}" height="{h}"/>"#, escape(href))?;
    }
    match out {
        GroundingOutput::NoTarget => {
            writeln!(s, r#"  <g id="no-target">"#)?;
            writeln!(s, r##"    <text x="8" y="20" font-family="sans-serif" font-size="16" fill="#e6194b">no target</text>"##)?;
            writeln!(s, "  </g>")?;
        }
        GroundingOutput::Masks(seqs) => {
            writeln!(s, r#"  <g id="masks" fill-opacity="0.35" stroke-width="1.5">"#)?;
            for (k, seq) in seqs.iter().enumerate() {
                let color = PALETTE[k % PALETTE.len()];
                let mut d = String::new();
                for (i, &q) in seq.coords.iter().enumerate() {
                    let p: Point64 = dequantize(q, qcfg)?;
                    write!(d, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, p.x, p.y)?;
                }
                d.push('Z');
                writeln!(s, r#"    <path d="{d}" fill="{color}" stroke="{color}"/>"#)?;
            }
            writeln!(s, "  </g>")?;
        }
        GroundingOutput::Boxes(boxes) => {
            writeln!(s, r#"  <g id="boxes" fill="none" stroke-width="2">"#)?;
            for (k, b) in boxes.iter().enumerate() {
                let r = dequantize_box::<f64>(b, qcfg)?;
                writeln!(
                    s,
                    r#"    <rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" stroke="{}"/>"#,
                    r.x0,
                    r.y0,
                    r.width(),
                    r.height(),
                    PALETTE[k % PALETTE.len()]
                )?;
            }
            writeln!(s, "  </g>")?;
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[derive(Debug, serde::Deserialize)]
struct Row {
    n: u32,
    method: String,
    #[serde(rename = "mIoU")]
    miou: f64,
}

/// Line plot of mIoU against point count, one line per method, read from
/// the upper-bound CSV.
pub fn plot_from_csv(csv_text: &str) -> Result<String> {
    let mut series: BTreeMap<String, Vec<(u32, f64)>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    for row in rdr.deserialize() {
        let row: Row = row.context("reading upper-bound csv")?;
        series.entry(row.method).or_default().push((row.n, row.miou));
    }
    if series.is_empty() {
        bail!("upper-bound csv has no rows");
    }
    for pts in series.values_mut() {
        pts.sort_by_key(|p| p.0);
    }
    let all = series.values().flatten();
    let n_min = all.clone().map(|p| p.0).min().unwrap_or(0) as f64;
    let n_max = all.clone().map(|p| p.0).max().unwrap_or(1) as f64;
    let y_lo = (all.clone().map(|p| p.1).fold(f64::INFINITY, f64::min) / 5.0).floor() * 5.0;
    let y_hi = 100.0f64.max((all.map(|p| p.1).fold(0.0, f64::max) / 5.0).ceil() * 5.0);
    let (w, h, ml, mr, mt, mb) = (560.0, 360.0, 60.0, 130.0, 20.0, 50.0);
    let sx = |n: f64| {
        if n_max > n_min {
            ml + (n - n_min) / (n_max - n_min) * (w - ml - mr)
        } else {
            ml + (w - ml - mr) / 2.0
        }
    };
    let sy = |v: f64| mt + (y_hi - v) / (y_hi - y_lo).max(1e-9) * (h - mt - mb);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#)?;
    writeln!(s, r#"  <rect width="{w}" height="{h}" fill="white"/>"#)?;
    let (x0, x1, y0, y1) = (ml, w - mr, mt, h - mb);
    writeln!(s, r#"  <path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black"/>"#)?;
    let mut ticks: Vec<u32> = series.values().flatten().map(|p| p.0).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for n in ticks {
        let x = sx(f64::from(n));
        writeln!(s, r#"  <text x="{x:.1}" y="{:.1}" text-anchor="middle">{n}</text>"#, y1 + 16.0)?;
    }
    let mut v = y_lo;
    while v <= y_hi + 1e-9 {
        let y = sy(v);
        writeln!(s, r##"  <path d="M{x0} {y:.1} L{x1} {y:.1}" stroke="#ddd"/>"##)?;
        writeln!(s, r#"  <text x="{:.1}" y="{:.1}" text-anchor="end">{v}</text>"#, x0 - 6.0, y + 4.0)?;
        v += 5.0;
    }
    writeln!(s, r#"  <text x="{:.1}" y="{:.1}" text-anchor="middle">points</text>"#, (x0 + x1) / 2.0, h - 12.0)?;
    writeln!(s, r#"  <text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">mIoU upper bound (%)</text>"#, (y0 + y1) / 2.0, (y0 + y1) / 2.0)?;
    for (k, (method, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let line: Vec<String> =
            pts.iter().map(|&(n, m)| format!("{:.1},{:.1}", sx(f64::from(n)), sy(m))).collect();
        writeln!(s, r#"  <g id="{}" stroke="{color}" fill="{color}">"#, escape(method))?;
        writeln!(s, r#"    <polyline points="{}" fill="none" stroke-width="2"/>"#, line.join(" "))?;
        for &(n, m) in pts {
            writeln!(s, r#"    <circle cx="{:.1}" cy="{:.1}" r="3"><title>{n}: {m:.2}</title></circle>"#, sx(f64::from(n)), sy(m))?;
        }
        let ly = mt + 16.0 + 18.0 * k as f64;
        writeln!(s, r#"    <text x="{:.1}" y="{ly:.1}" stroke="none">{}</text>"#, x1 + 14.0, escape(method))?;
        writeln!(s, "  </g>")?;
    }
    s.push_str("</svg>\n");
    Ok(s)
}
