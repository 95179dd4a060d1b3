//! Mask interchange: PNG files and COCO uncompressed RLE.

use std::io::Cursor;
use std::path::Path;

use image::{GrayImage, ImageFormat, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rasterize_polygon, BinaryMask, Point};

/// Decodes a PNG; any nonzero colour channel marks foreground.
pub fn mask_from_png_bytes(bytes: &[u8]) -> Result<BinaryMask> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::InvalidMask(format!("png decode: {e}")))?
        .to_rgb16();
    let (w, h) = img.dimensions();
    let bits = img.pixels().map(|p| p.0.iter().any(|&c| c != 0)).collect();
    BinaryMask::from_bits(w, h, bits)
}

pub fn mask_from_png(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)
        .map_err(|e| Error::InvalidMask(format!("{}: {e}", path.display())))?;
    mask_from_png_bytes(&bytes)
}

/// 8-bit grayscale PNG, foreground 255.
pub fn mask_to_png_bytes(mask: &BinaryMask) -> Result<Vec<u8>> {
    let img = GrayImage::from_fn(mask.width(), mask.height(), |x, y| {
        Luma([if mask.get(i64::from(x), i64::from(y)) { 255 } else { 0 }])
    });
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::InvalidMask(format!("png encode: {e}")))?;
    Ok(out.into_inner())
}

pub fn mask_to_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mask_to_png_bytes(mask)?)
        .map_err(|e| Error::InvalidMask(format!("{}: {e}", path.display())))
}

/// Union of COCO-style flat polygons `[x0, y0, x1, y1, ...]` on a
/// `width x height` grid.
pub fn mask_from_polygons(polygons: &[Vec<f64>], width: u32, height: u32) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(width, height)?;
    for flat in polygons {
        let ring = flat_to_ring(flat)?;
        mask = mask.union(&rasterize_polygon(&ring, width, height)?)?;
    }
    Ok(mask)
}

/// Pairs up a flat coordinate list.
pub fn flat_to_ring(flat: &[f64]) -> Result<Vec<Point<f64>>> {
    if !flat.len().is_multiple_of(2) {
        return Err(Error::InvalidGeometry(format!("odd polygon coordinate count {}", flat.len())));
    }
    Ok(flat.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
}

/// COCO uncompressed RLE. `size` is `[height, width]`; `counts` alternate
/// background/foreground run lengths over the column-major pixel order,
/// starting with background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CocoRle {
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

impl CocoRle {
    pub fn from_mask(mask: &BinaryMask) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0u32;
        for x in 0..w {
            for y in 0..h {
                let v = mask.get(i64::from(x), i64::from(y));
                if v != current {
                    counts.push(run);
                    run = 0;
                    current = v;
                }
                run += 1;
            }
        }
        counts.push(run);
        Self { size: [h, w], counts }
    }

    pub fn to_mask(&self) -> Result<BinaryMask> {
        let [h, w] = self.size;
        let mut mask = BinaryMask::new(w, h)?;
        let total = u64::from(w) * u64::from(h);
        let sum: u64 = self.counts.iter().map(|&c| u64::from(c)).sum();
        if sum != total {
            return Err(Error::InvalidMask(format!(
                "rle counts sum to {sum}, expected {total} for {w}x{h}"
            )));
        }
        let mut idx = 0u64;
        for (k, &c) in self.counts.iter().enumerate() {
            if k % 2 == 1 {
                for p in idx..idx + u64::from(c) {
                    mask.set((p / u64::from(h)) as u32, (p % u64::from(h)) as u32, true);
                }
            }
            idx += u64::from(c);
        }
        Ok(mask)
    }

    /// COCO's compact string form of `counts`.
    pub fn compress(&self) -> String {
        let mut out = String::new();
        for (i, &c) in self.counts.iter().enumerate() {
            let mut x = i64::from(c);
            if i > 2 {
                x -= i64::from(self.counts[i - 2]);
            }
            loop {
                let mut ch = (x & 0x1f) as u8;
                x >>= 5;
                let more = if ch & 0x10 != 0 { x != -1 } else { x != 0 };
                if more {
                    ch |= 0x20;
                }
                out.push(char::from(ch + 48));
                if !more {
                    break;
                }
            }
        }
        out
    }

    pub fn from_compressed(size: [u32; 2], text: &str) -> Result<Self> {
        let bytes = text.as_bytes();
        let mut counts: Vec<u32> = Vec::new();
        let mut p = 0;
        while p < bytes.len() {
            let mut x: i64 = 0;
            let mut k = 0;
            loop {
                let c = i64::from(bytes[p]) - 48;
                if !(0..64).contains(&c) || k > 12 {
                    return Err(Error::InvalidMask(format!("bad rle byte at {p}")));
                }
                x |= (c & 0x1f) << (5 * k);
                p += 1;
                k += 1;
                if c & 0x20 == 0 {
                    if c & 0x10 != 0 {
                        x |= -1i64 << (5 * k);
                    }
                    break;
                }
                if p == bytes.len() {
                    return Err(Error::InvalidMask("truncated rle string".into()));
                }
            }
            if counts.len() > 2 {
                x += i64::from(counts[counts.len() - 2]);
            }
            let run = u32::try_from(x)
                .map_err(|_| Error::InvalidMask(format!("rle run {x} out of range")))?;
            counts.push(run);
        }
        Ok(Self { size, counts })
    }
}

/// RLE counts as found in COCO files: a run list or the compact string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RleCounts {
    Runs(Vec<u32>),
    Compressed(String),
}

/// An RLE object with either form of counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RleRef {
    pub size: [u32; 2],
    pub counts: RleCounts,
}

impl RleRef {
    pub fn to_rle(&self) -> Result<CocoRle> {
        match &self.counts {
            RleCounts::Runs(c) => Ok(CocoRle { size: self.size, counts: c.clone() }),
            RleCounts::Compressed(s) => CocoRle::from_compressed(self.size, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compressed_rle() {
        // 98 = 3 * 32 + 2: low chunk 2 with continuation (48 + 34 = 'R'), then '3'.
        let rle = CocoRle { size: [10, 10], counts: vec![0, 2, 98] };
        assert_eq!(rle.compress(), "02R3");
        assert_eq!(CocoRle::from_compressed([10, 10], "02R3").unwrap(), rle);
        // Later runs are stored as differences, which may be negative.
        let m = BinaryMask::from_fn(7, 5, |x, y| (x * 3 + y) % 4 == 0 || x == 6).unwrap();
        let rle = CocoRle::from_mask(&m);
        let back = CocoRle::from_compressed([5, 7], &rle.compress()).unwrap();
        assert_eq!(back, rle);
        assert!(CocoRle::from_compressed([2, 2], "2R").is_err());
        let r: RleRef = serde_json::from_str(r#"{"size":[10,10],"counts":"02R3"}"#).unwrap();
        assert_eq!(r.to_rle().unwrap().counts, vec![0, 2, 98]);
    }

    #[test]
    fn rle_is_column_major() {
        // 3 wide, 2 tall; foreground at (1,0) and (1,1) -> column 1 fully set
        let m = BinaryMask::from_fn(3, 2, |x, _| x == 1).unwrap();
        let rle = CocoRle::from_mask(&m);
        assert_eq!(rle.size, [2, 3]);
        assert_eq!(rle.counts, vec![2, 2, 2]);
        assert_eq!(rle.to_mask().unwrap(), m);
    }

    #[test]
    fn rle_leading_foreground_has_zero_run() {
        let m = BinaryMask::from_fn(2, 2, |x, y| x == 0 && y == 0).unwrap();
        assert_eq!(CocoRle::from_mask(&m).counts, vec![0, 1, 3]);
    }

    #[test]
    fn rle_rejects_bad_totals() {
        let rle = CocoRle { size: [2, 2], counts: vec![1, 1] };
        assert!(rle.to_mask().is_err());
    }

    #[test]
    fn polygons_union() {
        let polys = vec![vec![0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0], vec![4.0, 0.0, 6.0, 0.0, 6.0, 1.0, 4.0, 1.0]];
        let m = mask_from_polygons(&polys, 8, 4).unwrap();
        assert_eq!(m.count(), 6);
        assert!(mask_from_polygons(&[vec![1.0, 2.0, 3.0]], 4, 4).is_err());
    }

    #[test]
    fn png_round_trip() {
        let m = BinaryMask::from_fn(7, 5, |x, y| (x + y) % 3 == 0).unwrap();
        let bytes = mask_to_png_bytes(&m).unwrap();
        assert_eq!(mask_from_png_bytes(&bytes).unwrap(), m);
        assert!(mask_from_png_bytes(b"not a png").is_err());
    }

    #[test]
    fn png_nonzero_low_values_are_foreground() {
        let img = GrayImage::from_fn(3, 1, |x, _| Luma([x as u8]));
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).unwrap();
        let m = mask_from_png_bytes(&out.into_inner()).unwrap();
        assert_eq!(m.bits(), &[false, true, true]);
    }
}
