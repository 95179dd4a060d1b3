use crate::codec::quant::{dequantize, quantize, QuantConfig, QuantSeq};
use crate::error::{Error, Result};
use crate::geometry::{
    extract_contours, largest_contour, rasterize_polygon, vectorize_boundary, BinaryMask, Contour, Point,
};
use crate::sampling::{sample, SamplingConfig, SamplingMethod};
use crate::scalar::Scalar;

/// Rotates a ring so it starts at the point with the smallest quantized
/// `(y, x)`; the earliest such point wins ties. Traversal order is kept.
pub fn canonicalize<T: Scalar>(seq: &[Point<T>], cfg: &QuantConfig) -> Vec<Point<T>> {
    let start = seq
        .iter()
        .enumerate()
        .min_by_key(|(i, p)| {
            let (qx, qy) = quantize(**p, cfg);
            (qy, qx, *i)
        })
        .map_or(0, |(i, _)| i);
    let mut out = seq.to_vec();
    out.rotate_left(start);
    out
}

/// What [`encode_mask_report`] saw while encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeReport {
    pub seq: QuantSeq,
    /// 8-connected foreground components; only the largest is encoded.
    pub components: usize,
    /// Whether the mask contains background enclosed by foreground.
    pub has_holes: bool,
}

/// Mask to fixed-length point sequence: trace outer contours, keep the
/// largest, vectorize its pixel boundary, sample it, rotate to the
/// canonical start and quantize.
pub fn encode_mask(
    mask: &BinaryMask,
    qcfg: &QuantConfig,
    scfg: &SamplingConfig,
    method: SamplingMethod,
) -> Result<QuantSeq> {
    encode_mask_with::<f64>(mask, qcfg, scfg, method)
}

/// [`encode_mask`] with the geometry carried in scalar type `T`.
pub fn encode_mask_with<T: Scalar>(
    mask: &BinaryMask,
    qcfg: &QuantConfig,
    scfg: &SamplingConfig,
    method: SamplingMethod,
) -> Result<QuantSeq> {
    Ok(encode_inner::<T>(mask, qcfg, scfg, method)?.0)
}

pub fn encode_mask_report(
    mask: &BinaryMask,
    qcfg: &QuantConfig,
    scfg: &SamplingConfig,
    method: SamplingMethod,
) -> Result<EncodeReport> {
    let (seq, components) = encode_inner::<f64>(mask, qcfg, scfg, method)?;
    Ok(EncodeReport { seq, components, has_holes: mask.has_holes() })
}

fn encode_inner<T: Scalar>(
    mask: &BinaryMask,
    qcfg: &QuantConfig,
    scfg: &SamplingConfig,
    method: SamplingMethod,
) -> Result<(QuantSeq, usize)> {
    qcfg.validate()?;
    scfg.validate()?;
    let contours = extract_contours::<T>(mask);
    if contours.is_empty() {
        return Err(Error::NoForeground);
    }
    let components = contours.len();
    let contour = largest_contour(contours)?;
    let contour = vectorize_boundary(&contour, scfg.vectorize_tol);
    let points = canonicalize(&sample(&contour, scfg, method)?, qcfg);
    Ok((QuantSeq::new(points.into_iter().map(|p| quantize(p, qcfg)).collect()), components))
}

/// Encodes a polygon given in image coordinates (for example an annotation
/// outline). The ring is sampled as-is, without boundary vectorization.
pub fn encode_polygon<T: Scalar>(
    ring: &[Point<T>],
    qcfg: &QuantConfig,
    scfg: &SamplingConfig,
    method: SamplingMethod,
) -> Result<QuantSeq> {
    qcfg.validate()?;
    scfg.validate()?;
    let contour = Contour::new(ring.to_vec())?.into_clockwise();
    let points = canonicalize(&sample(&contour, scfg, method)?, qcfg);
    Ok(QuantSeq::new(points.into_iter().map(|p| quantize(p, qcfg)).collect()))
}

/// Dequantizes a sequence and fills it onto the image grid (even-odd,
/// pixel centers).
pub fn decode_mask(seq: &QuantSeq, cfg: &QuantConfig) -> Result<BinaryMask> {
    decode_mask_with::<f64>(seq, cfg)
}

pub fn decode_mask_with<T: Scalar>(seq: &QuantSeq, cfg: &QuantConfig) -> Result<BinaryMask> {
    cfg.validate()?;
    if seq.point_count() < 3 {
        return Err(Error::DegenerateSequence(seq.point_count()));
    }
    let ring = seq
        .coords
        .iter()
        .map(|&q| dequantize::<T>(q, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (w, h) = cfg.raster_dims();
    rasterize_polygon(&ring, w, h)
}

/// Union of several decoded sequences on one grid.
pub fn decode_masks(seqs: &[QuantSeq], cfg: &QuantConfig) -> Result<BinaryMask> {
    let (w, h) = cfg.raster_dims();
    let mut acc = BinaryMask::new(w, h)?;
    for s in seqs {
        acc = acc.union(&decode_mask(s, cfg)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mask_iou;

    fn full_square(side: u32) -> BinaryMask {
        BinaryMask::from_fn(side, side, |_, _| true).unwrap()
    }

    fn disk(size: u32, r: f64) -> BinaryMask {
        let c = f64::from(size) / 2.0;
        BinaryMask::from_fn(size, size, |x, y| {
            let (dx, dy) = (f64::from(x) + 0.5 - c, f64::from(y) + 0.5 - c);
            dx * dx + dy * dy <= r * r
        })
        .unwrap()
    }

    #[test]
    fn canonical_start_is_top_left() {
        let cfg = QuantConfig::new(1000, 10.0, 10.0).unwrap();
        let ring: Vec<Point<f64>> =
            [(10., 5.), (10., 10.), (0., 10.), (0., 0.), (10., 0.)].iter().map(|&(x, y)| Point::new(x, y)).collect();
        let c = canonicalize(&ring, &cfg);
        assert_eq!(c[0], Point::new(0., 0.));
        assert_eq!(c[1], Point::new(10., 0.));
        assert_eq!(canonicalize(&c, &cfg), c);
        let same = vec![Point::new(3.0, 3.0); 4];
        assert_eq!(canonicalize(&same, &cfg), same);
    }

    #[test]
    fn full_frame_square_encodes_to_corner_bins() {
        let m = full_square(64);
        let q = QuantConfig::for_image(64, 64).unwrap();
        let s = SamplingConfig { n_out: 4, ..Default::default() };
        let seq = encode_mask(&m, &q, &s, SamplingMethod::Adaptive).unwrap();
        assert_eq!(seq.coords, vec![(0, 0), (999, 0), (999, 999), (0, 999)]);
        assert_eq!(decode_mask(&seq, &q).unwrap().count(), 64 * 64);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let m = BinaryMask::new(8, 8).unwrap();
        let q = QuantConfig::for_image(8, 8).unwrap();
        assert_eq!(
            encode_mask(&m, &q, &SamplingConfig::default(), SamplingMethod::Adaptive),
            Err(Error::NoForeground)
        );
    }

    #[test]
    fn decode_ignores_repeated_points() {
        let q = QuantConfig::for_image(50, 50).unwrap();
        let a = QuantSeq::new(vec![(100, 100), (800, 120), (700, 900), (150, 600)]);
        let b = QuantSeq::new(vec![(100, 100), (800, 120), (800, 120), (700, 900), (150, 600), (150, 600)]);
        assert_eq!(decode_mask(&a, &q).unwrap(), decode_mask(&b, &q).unwrap());
        assert_eq!(
            decode_mask(&QuantSeq::new(vec![(1, 1), (2, 2)]), &q),
            Err(Error::DegenerateSequence(2))
        );
    }

    #[test]
    fn disk_round_trip() {
        let m = disk(128, 60.0);
        let q = QuantConfig::for_image(128, 128).unwrap();
        for method in [SamplingMethod::Adaptive, SamplingMethod::Uniform] {
            let seq = encode_mask(&m, &q, &SamplingConfig::default(), method).unwrap();
            assert_eq!(seq.point_count(), 32);
            let iou = mask_iou(&decode_mask(&seq, &q).unwrap(), &m).unwrap();
            assert!(iou >= 0.97, "{method}: {iou}");
        }
    }

    #[test]
    fn encoding_is_canonical_under_reencode() {
        let m = disk(96, 30.0);
        let q = QuantConfig::for_image(96, 96).unwrap();
        let s = SamplingConfig::default();
        let seq = encode_mask(&m, &q, &s, SamplingMethod::Adaptive).unwrap();
        let again = encode_mask(&decode_mask(&seq, &q).unwrap(), &q, &s, SamplingMethod::Adaptive).unwrap();
        let min_key = |s: &QuantSeq| s.coords.iter().map(|&(x, y)| (y, x)).min().unwrap();
        assert_eq!((again.coords[0].1, again.coords[0].0), min_key(&again));
        assert_eq!((seq.coords[0].1, seq.coords[0].0), min_key(&seq));
    }

    #[test]
    fn polygon_encoding_orients_and_canonicalizes() {
        let q = QuantConfig::for_image(100, 100).unwrap();
        let s = SamplingConfig { n_out: 4, ..Default::default() };
        // counter-clockwise input starting at the bottom-right corner
        // perimeter 320 over 400 dense points puts a dense point on every corner
        let ring = [Point::new(90.0, 90.0), Point::new(90.0, 10.0), Point::new(10.0, 10.0), Point::new(10.0, 90.0)];
        let seq = encode_polygon(&ring, &q, &s, SamplingMethod::Adaptive).unwrap();
        assert_eq!(seq.coords, vec![(100, 100), (900, 100), (900, 900), (100, 900)]);
    }

    #[test]
    fn raw_lattice_boundary_when_vectorization_disabled() {
        let m = full_square(32);
        let q = QuantConfig::for_image(32, 32).unwrap();
        let s = SamplingConfig { n_out: 4, vectorize_tol: 0.0, ..Default::default() };
        let seq = encode_mask(&m, &q, &s, SamplingMethod::Adaptive).unwrap();
        assert_eq!(seq.coords, vec![(0, 0), (999, 0), (999, 999), (0, 999)]);
    }

    #[test]
    fn report_flags_parts_and_holes() {
        let mut m = BinaryMask::new(20, 20).unwrap();
        m.fill_rect(1, 1, 9, 9);
        m.set(4, 4, false);
        m.fill_rect(12, 12, 15, 15);
        let q = QuantConfig::for_image(20, 20).unwrap();
        let r = encode_mask_report(&m, &q, &SamplingConfig::default(), SamplingMethod::Adaptive).unwrap();
        assert_eq!(r.components, 2);
        assert!(r.has_holes);
    }
}
