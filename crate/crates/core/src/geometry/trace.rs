//! Outer-boundary tracing on the pixel-corner lattice.
//!
//! The boundary of a foreground region is followed along pixel edges
//! ("cracks"), keeping foreground on the right-hand side, which makes every
//! traced ring clockwise on screen. At a vertex where two foreground pixels
//! touch only diagonally the tracer turns toward the diagonal neighbour, so
//! the pixels of one ring are exactly one 8-connected component.

use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Contour, Point};
use crate::scalar::Scalar;

// Clockwise on screen: E, S, W, N.
const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

/// One clockwise outer ring per 8-connected foreground component, in raster
/// order of each component's first pixel. Holes are not reported.
pub fn extract_contours<T: Scalar>(mask: &BinaryMask) -> Vec<Contour<T>> {
    let w = mask.width() as usize;
    let h = mask.height() as usize;
    let mut seen = vec![false; w * h];
    let mut contours = Vec::new();
    let mut stack = Vec::new();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.bits()[i] || seen[i] {
                continue;
            }
            contours.push(trace_outer(mask, x as i64, y as i64));

            seen[i] = true;
            stack.push((x as i64, y as i64));
            while let Some((cx, cy)) = stack.pop() {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (cx + dx, cy + dy);
                        if mask.get(nx, ny) {
                            let j = ny as usize * w + nx as usize;
                            if !seen[j] {
                                seen[j] = true;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    contours
}

/// Follows the outer boundary starting at the top-left corner of `(x, y)`,
/// which must be the first foreground pixel of its component in raster order.
fn trace_outer<T: Scalar>(mask: &BinaryMask, x: i64, y: i64) -> Contour<T> {
    // Pixel touching vertex (vx, vy) in the quadrant given by signs (ox, oy).
    let pixel = |vx: i64, vy: i64, ox: i64, oy: i64| mask.get(vx + (ox - 1) / 2, vy + (oy - 1) / 2);

    let start = (x, y);
    let mut dir = 0usize;
    let mut v = start;
    let mut corners = vec![start];
    v = (v.0 + DIRS[dir].0, v.1 + DIRS[dir].1);
    loop {
        let (dx, dy) = DIRS[dir];
        let (rx, ry) = DIRS[(dir + 1) % 4];
        let ahead_left = pixel(v.0, v.1, dx - rx, dy - ry);
        let ahead_right = pixel(v.0, v.1, dx + rx, dy + ry);
        let next = if ahead_left {
            (dir + 3) % 4
        } else if ahead_right {
            dir
        } else {
            (dir + 1) % 4
        };
        if v == start && next == 0 {
            break;
        }
        if next != dir {
            corners.push(v);
        }
        dir = next;
        v = (v.0 + DIRS[dir].0, v.1 + DIRS[dir].1);
    }

    let points = corners
        .into_iter()
        .map(|(cx, cy)| Point::new(T::of(cx as f64), T::of(cy as f64)))
        .collect();
    Contour::new(points).expect("a traced pixel boundary has at least four corners")
}

/// The contour with the largest absolute area; the earliest one wins ties.
pub fn largest_contour<T: Scalar>(contours: Vec<Contour<T>>) -> Result<Contour<T>> {
    let mut best: Option<(T, Contour<T>)> = None;
    for c in contours {
        let area = c.area();
        match &best {
            Some((a, _)) if *a >= area => {}
            _ => best = Some((area, c)),
        }
    }
    best.map(|(_, c)| c).ok_or(Error::NoContour)
}
