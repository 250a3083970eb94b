//! 8-bit min/max quantization of the network parameters.
//!
//! Each of `w1`, `b1`, `w2`, `b2` is mapped linearly onto `[0, 255]` using
//! its own extrema. The extrema travel as `f32`; both sides quantize and
//! dequantize against the `f32`-rounded values so they agree bit for bit.
//!
//! Serialized layout: `q_w1` (160, row-major), `q_b1` (10), `q_w2` (160,
//! row-major), `q_b2` (16), then four little-endian `f32` `(min, max)` pairs.

use crate::error::{Error, Result};
use crate::mlp::{MlpParams, B1_LEN, B2_LEN, HIDDEN, INPUTS, OUTPUTS, W1_LEN, W2_LEN};
use crate::round::round_half_away;

/// Quantized bytes for all four parameter groups.
pub const PAYLOAD_BYTES: usize = W1_LEN + B1_LEN + W2_LEN + B2_LEN;
/// Four `(min, max)` pairs of `f32`.
pub const RANGE_BYTES: usize = 4 * 2 * 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f32,
    pub max: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedParams {
    pub q_w1: Vec<u8>,
    pub q_b1: Vec<u8>,
    pub q_w2: Vec<u8>,
    pub q_b2: Vec<u8>,
    /// Ranges for `w1`, `b1`, `w2`, `b2` in that order.
    pub ranges: [Range; 4],
}

/// Quantizes `values` against their own extrema. Returns the bytes and the
/// `f32`-rounded `(min, max)` actually used.
pub fn quantize_matrix(values: &[f64]) -> Result<(Vec<u8>, f32, f32)> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "cannot quantize non-finite value {bad}"
        )));
    }
    if values.is_empty() {
        return Ok((Vec::new(), 0.0, 0.0));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (min, max) = (lo as f32, hi as f32);
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::Numeric(format!("range [{lo}, {hi}] overflows f32")));
    }
    if max <= min {
        return Ok((vec![0; values.len()], min, max));
    }
    let (fmin, span) = (min as f64, max as f64 - min as f64);
    let bytes = values
        .iter()
        .map(|&v| round_half_away(255.0 * (v - fmin) / span).clamp(0.0, 255.0) as u8)
        .collect();
    Ok((bytes, min, max))
}

/// `min + q · (max − min) / 255`; all `min` when the range is degenerate.
pub fn dequantize_matrix(bytes: &[u8], min: f32, max: f32, len: usize) -> Result<Vec<f64>> {
    if bytes.len() != len {
        return Err(Error::Dimension(format!(
            "expected {len} bytes, got {}",
            bytes.len()
        )));
    }
    let fmin = min as f64;
    if max <= min {
        return Ok(vec![fmin; len]);
    }
    let span = max as f64 - fmin;
    Ok(bytes
        .iter()
        .map(|&q| fmin + q as f64 * span / 255.0)
        .collect())
}

impl QuantizedParams {
    pub fn quantize(params: &MlpParams) -> Result<Self> {
        let w1: Vec<f64> = params.w1.iter().flatten().copied().collect();
        let w2: Vec<f64> = params.w2.iter().flatten().copied().collect();
        let (q_w1, a0, a1) = quantize_matrix(&w1)?;
        let (q_b1, b0, b1) = quantize_matrix(&params.b1)?;
        let (q_w2, c0, c1) = quantize_matrix(&w2)?;
        let (q_b2, d0, d1) = quantize_matrix(&params.b2)?;
        let r = |min, max| Range { min, max };
        Ok(QuantizedParams {
            q_w1,
            q_b1,
            q_w2,
            q_b2,
            ranges: [r(a0, a1), r(b0, b1), r(c0, c1), r(d0, d1)],
        })
    }

    pub fn dequantize(&self) -> Result<MlpParams> {
        let [r1, r2, r3, r4] = self.ranges;
        let w1 = dequantize_matrix(&self.q_w1, r1.min, r1.max, W1_LEN)?;
        let b1 = dequantize_matrix(&self.q_b1, r2.min, r2.max, B1_LEN)?;
        let w2 = dequantize_matrix(&self.q_w2, r3.min, r3.max, W2_LEN)?;
        let b2 = dequantize_matrix(&self.q_b2, r4.min, r4.max, B2_LEN)?;
        let mut p = MlpParams::default();
        for h in 0..HIDDEN {
            p.w1[h].copy_from_slice(&w1[h * INPUTS..(h + 1) * INPUTS]);
        }
        p.b1.copy_from_slice(&b1);
        for r in 0..OUTPUTS {
            p.w2[r].copy_from_slice(&w2[r * HIDDEN..(r + 1) * HIDDEN]);
        }
        p.b2.copy_from_slice(&b2);
        Ok(p)
    }

    /// The 346 quantized bytes in wire order.
    pub fn payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PAYLOAD_BYTES);
        out.extend(&self.q_w1);
        out.extend(&self.q_b1);
        out.extend(&self.q_w2);
        out.extend(&self.q_b2);
        out
    }

    /// The 32 range bytes: `(min, max)` pairs as little-endian `f32`.
    pub fn range_bytes(&self) -> [u8; RANGE_BYTES] {
        let mut out = [0u8; RANGE_BYTES];
        for (i, r) in self.ranges.iter().enumerate() {
            out[8 * i..8 * i + 4].copy_from_slice(&r.min.to_le_bytes());
            out[8 * i + 4..8 * i + 8].copy_from_slice(&r.max.to_le_bytes());
        }
        out
    }

    pub fn from_parts(payload: &[u8], ranges: &[u8]) -> Result<Self> {
        if payload.len() != PAYLOAD_BYTES {
            return Err(Error::Dimension(format!(
                "parameter payload must be {PAYLOAD_BYTES} bytes, got {}",
                payload.len()
            )));
        }
        if ranges.len() != RANGE_BYTES {
            return Err(Error::Dimension(format!(
                "range block must be {RANGE_BYTES} bytes, got {}",
                ranges.len()
            )));
        }
        let f = |o: usize| f32::from_le_bytes(ranges[o..o + 4].try_into().unwrap());
        let mut parsed = [Range { min: 0.0, max: 0.0 }; 4];
        for (i, r) in parsed.iter_mut().enumerate() {
            *r = Range {
                min: f(8 * i),
                max: f(8 * i + 4),
            };
            if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) {
                return Err(Error::Numeric(format!(
                    "invalid parameter range {i}: {r:?}"
                )));
            }
        }
        let (a, rest) = payload.split_at(W1_LEN);
        let (b, rest) = rest.split_at(B1_LEN);
        let (c, d) = rest.split_at(W2_LEN);
        Ok(QuantizedParams {
            q_w1: a.to_vec(),
            q_b1: b.to_vec(),
            q_w2: c.to_vec(),
            q_b2: d.to_vec(),
            ranges: parsed,
        })
    }
}

/// Replaces trained parameters with what the decoder will reconstruct.
pub fn round_trip(params: &MlpParams) -> Result<(QuantizedParams, MlpParams)> {
    let q = QuantizedParams::quantize(params)?;
    let p = q.dequantize()?;
    Ok((q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_map_to_byte_extremes() {
        let (q, min, max) = quantize_matrix(&[-0.75, 0.1, 2.5]).unwrap();
        assert_eq!((q[0], q[2]), (0, 255));
        assert_eq!((min, max), (-0.75, 2.5));
        let back = dequantize_matrix(&[0, 255], min, max, 2).unwrap();
        assert_eq!(back, vec![-0.75, 2.5]);
    }

    #[test]
    fn constant_matrix() {
        let (q, min, max) = quantize_matrix(&[0.3; 7]).unwrap();
        assert!(q.iter().all(|&b| b == 0));
        assert_eq!(min, max);
        let back = dequantize_matrix(&[9, 200, 3], 1.5, 1.5, 3).unwrap();
        assert_eq!(back, vec![1.5; 3]);
    }

    #[test]
    fn errors() {
        assert!(quantize_matrix(&[1.0, f64::NAN]).is_err());
        assert!(quantize_matrix(&[f64::INFINITY]).is_err());
        assert!(dequantize_matrix(&[1, 2], 0.0, 1.0, 3).is_err());
        assert!(QuantizedParams::from_parts(&[0; 345], &[0; 32]).is_err());
    }

    #[test]
    fn payload_size_is_fixed() {
        let mut p = MlpParams::default();
        p.w1[3][4] = 1.0;
        let q = QuantizedParams::quantize(&p).unwrap();
        assert_eq!(q.payload().len(), 346);
        assert_eq!(q.range_bytes().len(), 32);
        // Under 1% of a 256×256 8-bit band.
        assert!((q.payload().len() + q.range_bytes().len()) * 100 < 65536);
        let parsed = QuantizedParams::from_parts(&q.payload(), &q.range_bytes()).unwrap();
        assert_eq!(parsed, q);
    }

    proptest! {
        #[test]
        fn reconstruction_within_half_step(values in proptest::collection::vec(-8.0f64..8.0, 1..200)) {
            let (q, min, max) = quantize_matrix(&values).unwrap();
            let back = dequantize_matrix(&q, min, max, values.len()).unwrap();
            // f32 rounding of the extrema shifts the grid by at most one f32 ulp of them.
            let ulp = |x: f32| (f32::from_bits(x.abs().to_bits() + 1) - x.abs()) as f64;
            let slack = 2.0 * (ulp(min) + ulp(max)) + 4.0 * f64::EPSILON * 8.0;
            let half = (max as f64 - min as f64) / 510.0;
            for (v, b) in values.iter().zip(&back) {
                prop_assert!((v - b).abs() <= half + slack, "{v} vs {b}");
            }
        }

        #[test]
        fn requantizing_is_a_fixed_point(values in proptest::collection::vec(-8.0f64..8.0, 1..200)) {
            let (q, min, max) = quantize_matrix(&values).unwrap();
            let back = dequantize_matrix(&q, min, max, values.len()).unwrap();
            let (q2, min2, max2) = quantize_matrix(&back).unwrap();
            prop_assert_eq!((min, max), (min2, max2));
            prop_assert_eq!(q, q2);
        }
    }
}
