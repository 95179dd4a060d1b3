//! Mask-to-sequence tooling for sequence-output vision-language models.
//!
//! * [`geometry`]: masks, contours, rasterization, IoU.
//! * [`sampling`]: uniform and turning-angle adaptive contour sampling.
//! * [`codec`]: coordinate quantization and the grounding text grammar.
//! * [`metrics`]: grounding metrics and the reconstruction upper bound.
//! * [`instructgen`]: instruction templates and dataset converters.
//!
//! Geometry is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! name the common instantiations.

pub mod codec;
pub mod error;
pub mod geometry;
pub mod instructgen;
pub mod metrics;
pub mod sampling;
pub mod scalar;

pub use codec::{
    decode_mask, encode_mask, parse_grounding, serialize, GroundingOutput, QuantConfig, QuantSeq,
};
pub use error::{Error, Result};
pub use geometry::{box_iou, mask_iou, BinaryMask};
pub use sampling::{SamplingConfig, SamplingMethod};
pub use scalar::Scalar;

pub type Point64 = geometry::Point<f64>;
pub type Point32 = geometry::Point<f32>;
pub type BBox64 = geometry::BBox<f64>;
pub type BBox32 = geometry::BBox<f32>;
pub type Contour64 = geometry::Contour<f64>;
pub type Contour32 = geometry::Contour<f32>;
pub type TurningProfile64 = sampling::TurningProfile<f64>;
pub type TurningProfile32 = sampling::TurningProfile<f32>;

/// Library version, also reported by the CLI.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
