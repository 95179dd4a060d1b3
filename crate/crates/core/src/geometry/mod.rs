//! Points, boxes, contours and binary masks, plus the conversions between
//! pixel masks and point rings.
//!
//! Coordinates use the image convention: origin at the top-left corner,
//! `x` to the right, `y` downward. Pixel `(i, j)` covers the unit square
//! `[i, i+1) x [j, j+1)`, so its center is `(i + 0.5, j + 0.5)`.
//!
//! With `y` pointing down, a ring that runs clockwise on screen has a
//! positive signed shoelace area.

mod io;
mod mask;
mod raster;
mod trace;
mod vectorize;

pub use io::{
    flat_to_ring, mask_from_png, mask_from_png_bytes, mask_from_polygons, mask_to_png,
    mask_to_png_bytes, CocoRle, RleCounts, RleRef,
};
pub use mask::{mask_iou, BinaryMask};
pub use raster::rasterize_polygon;
pub use trace::{extract_contours, largest_contour};
pub use vectorize::{destair, simplify_ring, vectorize_boundary, DEFAULT_TOLERANCE, MIN_CORNER_RUN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Self, t: T) -> Self {
        Self::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn cast<U: Scalar>(&self) -> Point<U> {
        Point::new(U::of(self.x.as_f64()), U::of(self.y.as_f64()))
    }
}

/// Axis-aligned box given by its top-left and bottom-right corners.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BBox<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Scalar> BBox<T> {
    pub fn new(x0: T, y0: T, x1: T, y1: T) -> Result<Self> {
        if !(x0 <= x1 && y0 <= y1) {
            return Err(Error::InvalidGeometry(format!(
                "box corners out of order: [{x0}, {y0}, {x1}, {y1}]"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    /// Smallest box containing every point, `None` for an empty slice.
    pub fn enclosing(points: &[Point<T>]) -> Option<Self> {
        let first = points.first()?;
        let init = Self { x0: first.x, y0: first.y, x1: first.x, y1: first.y };
        Some(points.iter().fold(init, |b, p| Self {
            x0: b.x0.min(p.x),
            y0: b.y0.min(p.y),
            x1: b.x1.max(p.x),
            y1: b.y1.max(p.y),
        }))
    }
}

/// Intersection over union of two boxes. Two zero-area boxes score 0.
pub fn box_iou<T: Scalar>(a: &BBox<T>, b: &BBox<T>) -> T {
    let iw = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(T::zero());
    let ih = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(T::zero());
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= T::zero() {
        T::zero()
    } else {
        inter / union
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
}

/// A closed ring of points. The last point implicitly connects to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour<T> {
    points: Vec<Point<T>>,
    orientation: Orientation,
}

impl<T: Scalar> Contour<T> {
    /// Builds a contour, collapsing consecutive duplicate points (including
    /// the wrap-around pair). Fails if fewer than three distinct points
    /// remain or any coordinate is not finite.
    pub fn new(points: Vec<Point<T>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite point {p:?}")));
        }
        let mut ring: Vec<Point<T>> = Vec::with_capacity(points.len());
        for p in points {
            if ring.last() != Some(&p) {
                ring.push(p);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(Error::DegeneratePolygon(ring.len()));
        }
        let orientation = orientation_of(signed_area(&ring));
        Ok(Self { points: ring, orientation })
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point<T>> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Signed shoelace area; positive for clockwise rings in image coordinates.
    pub fn signed_area(&self) -> T {
        signed_area(&self.points)
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> T {
        perimeter(&self.points)
    }

    pub fn bbox(&self) -> BBox<T> {
        BBox::enclosing(&self.points).expect("contour has at least three points")
    }

    /// Returns the same ring traversed clockwise, keeping the first point.
    pub fn into_clockwise(mut self) -> Self {
        if self.orientation == Orientation::CounterClockwise {
            self.points[1..].reverse();
            self.orientation = Orientation::Clockwise;
        }
        self
    }

    pub fn cast<U: Scalar>(&self) -> Contour<U> {
        Contour {
            points: self.points.iter().map(Point::cast).collect(),
            orientation: self.orientation,
        }
    }
}

fn orientation_of<T: Scalar>(signed: T) -> Orientation {
    if signed < T::zero() {
        Orientation::CounterClockwise
    } else {
        Orientation::Clockwise
    }
}

/// Signed shoelace area of a closed ring.
pub fn signed_area<T: Scalar>(ring: &[Point<T>]) -> T {
    let n = ring.len();
    if n < 3 {
        return T::zero();
    }
    let twice = (0..n).fold(T::zero(), |acc, i| {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc + (a.x * b.y - b.x * a.y)
    });
    twice / T::of(2.0)
}

/// Absolute polygon area of a closed ring.
pub fn shoelace_area<T: Scalar>(ring: &[Point<T>]) -> T {
    signed_area(ring).abs()
}

/// Length of the closed ring, including the closing edge.
pub fn perimeter<T: Scalar>(ring: &[Point<T>]) -> T {
    let n = ring.len();
    if n < 2 {
        return T::zero();
    }
    (0..n).fold(T::zero(), |acc, i| acc + ring[i].distance(&ring[(i + 1) % n]))
}
