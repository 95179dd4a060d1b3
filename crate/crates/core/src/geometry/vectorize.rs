//! Recovering a polygon from a traced pixel boundary.
//!
//! A traced lattice boundary follows every pixel step, so a slanted or
//! curved edge becomes a staircase of right-angle turns. Those turns carry
//! no shape information, yet a turning-angle score sees them as sharp
//! corners. [`vectorize_boundary`] removes them in two passes:
//!
//! 1. [`destair`]: a vertex flanked by a run shorter than two pixels is
//!    replaced by the midpoints of its two pixel edges. Corners between
//!    longer runs stay on the lattice.
//! 2. [`simplify_ring`]: vertices within `tolerance` of the chord joining
//!    their retained neighbours are dropped.

use crate::geometry::{Contour, Point};
use crate::scalar::Scalar;

/// Shortest run, in pixels, for a lattice corner to be kept as-is.
pub const MIN_CORNER_RUN: f64 = 2.0;

/// Default chord tolerance in pixels.
pub const DEFAULT_TOLERANCE: f64 = 1.0;

/// Staircase removal followed by ring simplification. A non-positive
/// tolerance returns the contour unchanged.
pub fn vectorize_boundary<T: Scalar>(c: &Contour<T>, tolerance: f64) -> Contour<T> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return c.clone();
    }
    simplify_ring(&destair(c, MIN_CORNER_RUN), tolerance)
}

/// Replaces each vertex with an incident edge shorter than `min_run` by the
/// points half a pixel along its two edges.
pub fn destair<T: Scalar>(c: &Contour<T>, min_run: f64) -> Contour<T> {
    let pts = c.points();
    let n = pts.len();
    let half = T::of(0.5);
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let prev = pts[(k + n - 1) % n];
        let cur = pts[k];
        let next = pts[(k + 1) % n];
        let (in_len, out_len) = (prev.distance(&cur), cur.distance(&next));
        if in_len.as_f64() >= min_run && out_len.as_f64() >= min_run {
            out.push(cur);
        } else {
            out.push(cur.lerp(&prev, (half / in_len).min(half)));
            out.push(cur.lerp(&next, (half / out_len).min(half)));
        }
    }
    Contour::new(out).unwrap_or_else(|_| c.clone())
}

/// Douglas-Peucker on a closed ring. The first vertex and the vertex
/// farthest from it are always kept; the result falls back to the input
/// when fewer than three vertices would survive.
pub fn simplify_ring<T: Scalar>(c: &Contour<T>, tolerance: f64) -> Contour<T> {
    let pts = c.points();
    let n = pts.len();
    let far = (1..n)
        .map(|i| (i, pts[0].distance(&pts[i])))
        .fold((0, T::neg_infinity()), |best, (i, d)| if d > best.1 { (i, d) } else { best })
        .0;

    let mut keep = vec![false; n];
    keep[0] = true;
    keep[far] = true;
    // spans are (start, end) indices into the ring, end may equal n (wraps to 0)
    let mut spans = vec![(0usize, far), (far, n)];
    while let Some((a, b)) = spans.pop() {
        if b <= a + 1 {
            continue;
        }
        let (pa, pb) = (pts[a], pts[b % n]);
        let (k, d) = (a + 1..b)
            .map(|k| (k, segment_distance(&pts[k], &pa, &pb)))
            .fold((a, -1.0), |best, (k, d)| if d > best.1 { (k, d) } else { best });
        if d > tolerance {
            keep[k] = true;
            spans.push((a, k));
            spans.push((k, b));
        }
    }
    let out: Vec<Point<T>> = (0..n).filter(|&i| keep[i]).map(|i| pts[i]).collect();
    Contour::new(out).unwrap_or_else(|_| c.clone())
}

fn segment_distance<T: Scalar>(p: &Point<T>, a: &Point<T>, b: &Point<T>) -> f64 {
    let (px, py) = (p.x.as_f64(), p.y.as_f64());
    let (ax, ay) = (a.x.as_f64(), a.y.as_f64());
    let (dx, dy) = (b.x.as_f64() - ax, b.y.as_f64() - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (px - ax - t * dx).hypot(py - ay - t * dy)
}
