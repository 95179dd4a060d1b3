//! Contour discretization and point selection.
//!
//! [`uniform_sample`] spaces points evenly by arc length. [`adaptive_sample`]
//! densifies the contour, scores every dense point by how sharply the ring
//! turns there, and keeps the highest-scoring points in contour order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Contour, Point};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Dense points laid on the contour before scoring.
    pub m_dense: u32,
    /// Points kept in the final sequence.
    pub n_out: u32,
    /// Below this spread of turning angles (radians) the contour is treated
    /// as constant-curvature and sampled uniformly.
    pub theta_eps: f64,
    /// Chord tolerance in pixels used to vectorize traced pixel boundaries
    /// before sampling; 0 samples the raw lattice boundary.
    #[serde(default = "default_vectorize_tol")]
    pub vectorize_tol: f64,
}

fn default_vectorize_tol() -> f64 {
    crate::geometry::DEFAULT_TOLERANCE
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { m_dense: 400, n_out: 32, theta_eps: 1e-6, vectorize_tol: default_vectorize_tol() }
    }
}

impl SamplingConfig {
    pub fn new(m_dense: u32, n_out: u32) -> Result<Self> {
        let cfg = Self { m_dense, n_out, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_out < 3 {
            return Err(Error::InvalidConfig(format!("n_out = {} < 3", self.n_out)));
        }
        if self.m_dense < self.n_out {
            return Err(Error::InvalidConfig(format!(
                "m_dense = {} < n_out = {}",
                self.m_dense, self.n_out
            )));
        }
        if !(self.theta_eps >= 0.0 && self.theta_eps.is_finite()) {
            return Err(Error::InvalidConfig(format!("theta_eps = {}", self.theta_eps)));
        }
        if !(self.vectorize_tol >= 0.0 && self.vectorize_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("vectorize_tol = {}", self.vectorize_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMethod {
    Uniform,
    #[default]
    Adaptive,
}

impl std::str::FromStr for SamplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "adaptive" => Ok(Self::Adaptive),
            other => Err(Error::InvalidConfig(format!("unknown sampling method {other:?}"))),
        }
    }
}

impl std::fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Adaptive => "adaptive",
        })
    }
}

/// Turning angle at every dense point, each in `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TurningProfile<T> {
    pub angles: Vec<T>,
}

impl<T: Scalar> TurningProfile<T> {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// `max - min` over the profile.
    pub fn spread(&self) -> T {
        let (lo, hi) = self
            .angles
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &a| (lo.min(a), hi.max(a)));
        if self.angles.is_empty() {
            T::zero()
        } else {
            hi - lo
        }
    }

    pub fn total(&self) -> T {
        self.angles.iter().fold(T::zero(), |acc, &a| acc + a)
    }
}

/// `m` points at equal arc-length spacing around the closed ring, starting
/// at its first vertex and following its traversal order.
pub fn densify<T: Scalar>(c: &Contour<T>, m: u32) -> Result<Vec<Point<T>>> {
    if m < 3 {
        return Err(Error::InvalidConfig(format!("dense point count {m} < 3")));
    }
    let pts = c.points();
    let n = pts.len();
    let total = c.perimeter();
    let step = total / T::of(f64::from(m));

    let mut out = Vec::with_capacity(m as usize);
    let mut edge = 0usize;
    let mut edge_start = T::zero();
    let mut edge_len = pts[0].distance(&pts[1 % n]);
    for k in 0..m {
        let s = step * T::of(f64::from(k));
        while s > edge_start + edge_len && edge + 1 < n {
            edge_start = edge_start + edge_len;
            edge += 1;
            edge_len = pts[edge].distance(&pts[(edge + 1) % n]);
        }
        let t = if edge_len > T::zero() {
            ((s - edge_start) / edge_len).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        out.push(pts[edge].lerp(&pts[(edge + 1) % n], t));
    }
    Ok(out)
}

/// `n` points at equal arc-length spacing, starting at the first vertex.
pub fn uniform_sample<T: Scalar>(c: &Contour<T>, n: u32) -> Result<Vec<Point<T>>> {
    if n < 3 {
        return Err(Error::InvalidConfig(format!("sample count {n} < 3")));
    }
    densify(c, n)
}

/// Turning angle at each point of a closed ring: the angle between the
/// incoming segment `p[i-1] -> p[i]` and the outgoing segment `p[i] -> p[i+1]`.
/// Collinear neighbours give 0, a reversal approaches π. A zero-length
/// neighbouring segment gives 0.
pub fn turning_angles<T: Scalar>(dense: &[Point<T>]) -> Result<TurningProfile<T>> {
    let m = dense.len();
    if m < 3 {
        return Err(Error::DegenerateSequence(m));
    }
    let below_pi = T::PI() - T::PI() * T::epsilon();
    let angles = (0..m)
        .map(|i| {
            let prev = dense[(i + m - 1) % m];
            let cur = dense[i];
            let next = dense[(i + 1) % m];
            let (ax, ay) = (cur.x - prev.x, cur.y - prev.y);
            let (bx, by) = (next.x - cur.x, next.y - cur.y);
            if (ax == T::zero() && ay == T::zero()) || (bx == T::zero() && by == T::zero()) {
                return T::zero();
            }
            let cross = ax * by - ay * bx;
            let dot = ax * bx + ay * by;
            cross.abs().atan2(dot).min(below_pi)
        })
        .collect();
    Ok(TurningProfile { angles })
}

/// Keeps the `n_out` dense points with the largest turning angles, returned
/// in contour order. Falls back to [`uniform_sample`] when every dense point
/// turns by the same amount.
pub fn adaptive_sample<T: Scalar>(c: &Contour<T>, cfg: &SamplingConfig) -> Result<Vec<Point<T>>> {
    cfg.validate()?;
    let n = cfg.n_out as usize;
    let dense = densify(c, cfg.m_dense)?;
    let profile = turning_angles(&dense)?;
    if profile.spread() < T::of(cfg.theta_eps) {
        return uniform_sample(c, cfg.n_out);
    }

    let mut order: Vec<usize> = (0..dense.len()).collect();
    // stable: equal angles keep ascending index order
    order.sort_by(|&a, &b| {
        profile.angles[b]
            .partial_cmp(&profile.angles[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut keep: Vec<usize> = order.into_iter().take(n).collect();
    keep.sort_unstable();

    let mut out: Vec<Point<T>> = Vec::with_capacity(n);
    for i in keep {
        if out.last() != Some(&dense[i]) {
            out.push(dense[i]);
        }
    }
    if let Some(&last) = out.last() {
        out.resize(n, last);
    }
    Ok(out)
}

/// Dispatches to [`uniform_sample`] or [`adaptive_sample`].
pub fn sample<T: Scalar>(c: &Contour<T>, cfg: &SamplingConfig, method: SamplingMethod) -> Result<Vec<Point<T>>> {
    match method {
        SamplingMethod::Uniform => {
            cfg.validate()?;
            uniform_sample(c, cfg.n_out)
        }
        SamplingMethod::Adaptive => adaptive_sample(c, cfg),
    }
}
