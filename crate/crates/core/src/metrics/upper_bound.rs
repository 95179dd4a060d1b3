use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{decode_mask, encode_mask, QuantConfig};
use crate::error::{Error, Result};
use crate::geometry::{mask_iou, BinaryMask};
use crate::sampling::{SamplingConfig, SamplingMethod};

/// Mean reconstruction IoU per point count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub method: SamplingMethod,
    pub miou: BTreeMap<u32, f64>,
    /// Masks that entered the mean.
    pub evaluated: usize,
    /// Masks skipped for having no foreground.
    pub skipped: usize,
}

/// Encode-decode IoU of every mask with `n` points, in corpus order.
/// Masks without foreground yield `None`.
pub fn upper_bound_scores(
    corpus: &[BinaryMask],
    n: u32,
    method: SamplingMethod,
    base: &SamplingConfig,
    n_bins: u32,
) -> Result<Vec<Option<f64>>> {
    let scfg = SamplingConfig { n_out: n, m_dense: base.m_dense.max(n), ..*base };
    scfg.validate()?;
    corpus
        .par_iter()
        .map(|mask| {
            if !mask.has_foreground() {
                return Ok(None);
            }
            let qcfg = QuantConfig::new(n_bins, f64::from(mask.width()), f64::from(mask.height()))?;
            let seq = encode_mask(mask, &qcfg, &scfg, method)?;
            Ok(Some(mask_iou(&decode_mask(&seq, &qcfg)?, mask)?))
        })
        .collect()
}

/// The information ceiling of the sequence format: for each `n`, the
/// mean IoU between every mask and its own encode-decode reconstruction.
pub fn upper_bound_eval(
    corpus: &[BinaryMask],
    n_values: &[u32],
    method: SamplingMethod,
    base: &SamplingConfig,
    n_bins: u32,
) -> Result<UpperBound> {
    let mut out = upper_bound_sweep(corpus.len(), |i| Ok(corpus[i].clone()), n_values, &[method], base, n_bins)?;
    Ok(out.remove(0))
}

/// [`upper_bound_eval`] for several methods over a corpus loaded on
/// demand: `load(i)` is called once per item, in parallel, and the mask
/// is dropped after scoring every (method, n) pair.
pub fn upper_bound_sweep<F>(
    len: usize,
    load: F,
    n_values: &[u32],
    methods: &[SamplingMethod],
    base: &SamplingConfig,
    n_bins: u32,
) -> Result<Vec<UpperBound>>
where
    F: Fn(usize) -> Result<BinaryMask> + Sync + Send,
{
    let configs = n_values
        .iter()
        .map(|&n| {
            let c = SamplingConfig { n_out: n, m_dense: base.m_dense.max(n), ..*base };
            c.validate().map(|_| c)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Option<Vec<f64>>> = (0..len)
        .into_par_iter()
        .map(|i| {
            let mask = load(i)?;
            if !mask.has_foreground() {
                return Ok(None);
            }
            let qcfg = QuantConfig::new(n_bins, f64::from(mask.width()), f64::from(mask.height()))?;
            let mut row = Vec::with_capacity(methods.len() * configs.len());
            for &m in methods {
                for scfg in &configs {
                    let seq = encode_mask(&mask, &qcfg, scfg, m)?;
                    row.push(mask_iou(&decode_mask(&seq, &qcfg)?, &mask)?);
                }
            }
            Ok(Some(row))
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    if skipped > 0 {
        warn!("skipping {skipped} mask(s) with no foreground");
    }
    let evaluated = len - skipped;
    if evaluated == 0 {
        return Err(Error::EmptyInput("no mask with foreground"));
    }
    let mut sums = vec![0.0f64; methods.len() * configs.len()];
    for row in rows.iter().flatten() {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| UpperBound {
            method,
            miou: n_values
                .iter()
                .enumerate()
                .map(|(ni, &n)| (n, sums[mi * configs.len() + ni] / evaluated as f64))
                .collect(),
            evaluated,
            skipped,
        })
        .collect())
}
