use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major boolean pixel grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// All-background mask.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMask(format!("empty grid {width}x{height}")));
        }
        Ok(Self { width, height, bits: vec![false; width as usize * height as usize] })
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        if bits.len() != mask.bits.len() {
            return Err(Error::InvalidMask(format!(
                "{} bits for a {width}x{height} grid",
                bits.len()
            )));
        }
        mask.bits = bits;
        Ok(mask)
    }

    /// Builds a mask from a predicate over pixel coordinates.
    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Pixel value; out-of-grid coordinates read as background.
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            return false;
        }
        self.bits[self.index(x as u32, y as u32)]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.bits[i] = value;
    }

    /// Sets every pixel of the inclusive-exclusive rectangle `[x0, x1) x [y0, y1)`,
    /// clipped to the grid.
    pub fn fill_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.set(x, y, true);
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn has_foreground(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect();
        Ok(Self { width: self.width, height: self.height, bits })
    }

    /// `(|a ∧ b|, |a ∨ b|)` pixel counts.
    pub fn overlap_counts(&self, other: &Self) -> Result<(u64, u64)> {
        self.check_dims(other)?;
        Ok(self.bits.iter().zip(&other.bits).fold((0, 0), |(i, u), (a, b)| {
            (i + u64::from(*a && *b), u + u64::from(*a || *b))
        }))
    }

    /// True when some background pixel cannot reach the grid border through
    /// 4-connected background.
    pub fn has_holes(&self) -> bool {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut reached = vec![false; w * h];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let border = x == 0 || y == 0 || x + 1 == w || y + 1 == h;
                if border && !self.bits[y * w + x] {
                    reached[y * w + x] = true;
                    stack.push((x, y));
                }
            }
        }
        while let Some((x, y)) = stack.pop() {
            let nbrs = [
                (x.wrapping_sub(1), y),
                (x + 1, y),
                (x, y.wrapping_sub(1)),
                (x, y + 1),
            ];
            for (nx, ny) in nbrs {
                if nx < w && ny < h {
                    let j = ny * w + nx;
                    if !self.bits[j] && !reached[j] {
                        reached[j] = true;
                        stack.push((nx, ny));
                    }
                }
            }
        }
        self.bits.iter().zip(&reached).any(|(&fg, &r)| !fg && !r)
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }
}

/// Pixel intersection over union. Two empty masks score 1.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let (inter, union) = a.overlap_counts(b)?;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}
