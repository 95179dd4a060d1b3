use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Point};
use crate::scalar::Scalar;

/// Even-odd scanline fill. Pixel `(i, j)` is set iff its center
/// `(i + 0.5, j + 0.5)` lies inside the ring; a center exactly on a left
/// crossing counts as inside, on a right crossing as outside. Geometry
/// outside the grid is clipped.
pub fn rasterize_polygon<T: Scalar>(ring: &[Point<T>], width: u32, height: u32) -> Result<BinaryMask> {
    if ring.len() < 3 {
        return Err(Error::DegeneratePolygon(ring.len()));
    }
    if let Some(p) = ring.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry(format!("non-finite point {p:?}")));
    }
    let mut mask = BinaryMask::new(width, height)?;
    let pts: Vec<(f64, f64)> = ring.iter().map(|p| (p.x.as_f64(), p.y.as_f64())).collect();
    let n = pts.len();
    let (ymin, ymax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));

    let row_lo = ((ymin - 0.5).ceil().max(0.0)) as i64;
    let row_hi = ((ymax - 0.5).floor().min(f64::from(height) - 1.0)) as i64;
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    for row in row_lo..=row_hi {
        let cy = row as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % n];
            // half-open in y so shared vertices are counted once
            if (y0 <= cy && cy < y1) || (y1 <= cy && cy < y0) {
                xs.push(x0 + (cy - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let first = (pair[0] - 0.5).ceil().max(0.0);
            let last = ((pair[1] - 0.5).ceil() - 1.0).min(f64::from(width) - 1.0);
            if first > last {
                continue;
            }
            for col in first as u32..=last as u32 {
                mask.set(col, row as u32, true);
            }
        }
    }
    Ok(mask)
}
