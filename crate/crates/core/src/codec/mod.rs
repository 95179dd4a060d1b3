//! Quantization, canonical serialization and parsing of grounding outputs.

mod grammar;
mod mask;
mod quant;

pub use grammar::{
    parse_grounding, serialize, Expect, GroundingOutput, ParseError, ParseErrorKind, ParseMode,
    ParseOptions, Parsed, BOX_SEP, MASK_SEP,
};
pub use mask::{
    canonicalize, decode_mask, decode_mask_with, decode_masks, encode_mask, encode_mask_report,
    encode_mask_with, encode_polygon, EncodeReport,
};
pub use quant::{dequantize, dequantize_box, quantize, quantize_box, QuantBox, QuantConfig, QuantSeq};
