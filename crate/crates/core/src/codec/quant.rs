use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, Point};
use crate::scalar::Scalar;

/// Maps image coordinates onto `n_bins` integer bins per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantConfig {
    pub n_bins: u32,
    pub image_w: f64,
    pub image_h: f64,
}

impl QuantConfig {
    pub const DEFAULT_BINS: u32 = 1000;

    pub fn new(n_bins: u32, image_w: f64, image_h: f64) -> Result<Self> {
        let cfg = Self { n_bins, image_w, image_h };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default bin count for an image of the given size.
    pub fn for_image(width: u32, height: u32) -> Result<Self> {
        Self::new(Self::DEFAULT_BINS, f64::from(width), f64::from(height))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins < 2 {
            return Err(Error::InvalidConfig(format!("n_bins = {} < 2", self.n_bins)));
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.image_w) || !ok(self.image_h) {
            return Err(Error::InvalidConfig(format!(
                "image size {}x{} must be positive",
                self.image_w, self.image_h
            )));
        }
        Ok(())
    }

    /// Raster dimensions used when decoding: the image size rounded up.
    pub fn raster_dims(&self) -> (u32, u32) {
        (self.image_w.ceil() as u32, self.image_h.ceil() as u32)
    }

    fn bin(&self, v: f64, extent: f64) -> u32 {
        // f64::round is half-away-from-zero
        let raw = (v / extent * f64::from(self.n_bins)).round();
        if raw < 0.0 {
            log::debug!("coordinate {v} below 0, clamped to bin 0");
            0
        } else if raw > f64::from(self.n_bins - 1) {
            self.n_bins - 1
        } else {
            raw as u32
        }
    }
}

/// `round(x / w * n_bins)` per axis, clamped into `[0, n_bins - 1]`.
pub fn quantize<T: Scalar>(p: Point<T>, cfg: &QuantConfig) -> (u32, u32) {
    (cfg.bin(p.x.as_f64(), cfg.image_w), cfg.bin(p.y.as_f64(), cfg.image_h))
}

/// Left-edge inverse of [`quantize`]: `(qx * w / n_bins, qy * h / n_bins)`.
pub fn dequantize<T: Scalar>(q: (u32, u32), cfg: &QuantConfig) -> Result<Point<T>> {
    for v in [q.0, q.1] {
        if v >= cfg.n_bins {
            return Err(Error::BinOutOfRange { value: v, n_bins: cfg.n_bins });
        }
    }
    let n = f64::from(cfg.n_bins);
    Ok(Point::new(
        T::of(f64::from(q.0) * cfg.image_w / n),
        T::of(f64::from(q.1) * cfg.image_h / n),
    ))
}

/// Box in bin coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl QuantBox {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn coords(&self) -> [u32; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
}

pub fn quantize_box<T: Scalar>(b: &BBox<T>, cfg: &QuantConfig) -> QuantBox {
    let (x0, y0) = quantize(Point::new(b.x0, b.y0), cfg);
    let (x1, y1) = quantize(Point::new(b.x1, b.y1), cfg);
    QuantBox { x0, y0, x1, y1 }
}

pub fn dequantize_box<T: Scalar>(b: &QuantBox, cfg: &QuantConfig) -> Result<BBox<T>> {
    let p0: Point<T> = dequantize((b.x0, b.y0), cfg)?;
    let p1: Point<T> = dequantize((b.x1, b.y1), cfg)?;
    BBox::new(p0.x.min(p1.x), p0.y.min(p1.y), p0.x.max(p1.x), p0.y.max(p1.y))
}

/// A fixed-length sequence of quantized points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct QuantSeq {
    pub coords: Vec<(u32, u32)>,
}

impl QuantSeq {
    pub fn new(coords: Vec<(u32, u32)>) -> Self {
        Self { coords }
    }

    pub fn point_count(&self) -> usize {
        self.coords.len()
    }

    /// Flattened `[x0, y0, x1, y1, ...]`.
    pub fn flat(&self) -> Vec<u32> {
        self.coords.iter().flat_map(|&(x, y)| [x, y]).collect()
    }
}
