//! Near-lossless correction of predicted bands.
//!
//! A pixel whose relative error `|t − r| / max(|t|, 1)` exceeds `λ` gets an
//! offset that moves it to the edge of the tolerance band on the side it
//! came from: `⌊t + λ|t|⌋` from below, `⌈t − λ|t|⌉` from above. The offset
//! is then rounded to a multiple of `q_step`.
//!
//! Offsets serialize as a varint entry count followed by, per entry, the
//! varint index delta from the previous entry (the first entry's delta is
//! its index) and the zigzag-varint offset.

use crate::cube_io::Band;
use crate::error::{Error, Result};
use crate::round::round_half_away;
use crate::varint;

const SEGMENT: &str = "offset segment";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationConfig {
    /// Largest acceptable relative reconstruction error.
    pub lambda: f64,
    /// Offsets are transmitted as multiples of this step.
    pub q_step: u32,
    pub enabled: bool,
}

impl Default for CompensationConfig {
    fn default() -> Self {
        CompensationConfig {
            lambda: 0.01,
            q_step: 1,
            enabled: true,
        }
    }
}

impl CompensationConfig {
    pub fn disabled() -> Self {
        CompensationConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn lossless() -> Self {
        CompensationConfig {
            lambda: 0.0,
            q_step: 1,
            enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be a finite value >= 0, got {}",
                self.lambda
            )));
        }
        if self.q_step == 0 {
            return Err(Error::Config("q_step must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sparse per-pixel corrections, indices strictly increasing, offsets nonzero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OffsetMap {
    pub entries: Vec<(u32, i32)>,
}

impl OffsetMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + self.entries.len() * 3);
        varint::write_u64(&mut out, self.entries.len() as u64);
        let mut prev = 0u32;
        for &(idx, off) in &self.entries {
            varint::write_u64(&mut out, (idx - prev) as u64);
            varint::write_u64(&mut out, varint::zigzag(off as i64));
            prev = idx;
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::corrupt(SEGMENT, m);
        let mut rd = varint::Reader::new(bytes);
        let n = rd
            .varint()
            .map_err(|_| bad("truncated entry count".into()))?;
        if n > bytes.len() as u64 {
            return Err(bad(format!(
                "{n} entries cannot fit in {} bytes",
                bytes.len()
            )));
        }
        let mut entries = Vec::with_capacity(n as usize);
        let mut idx = 0u64;
        for k in 0..n {
            let delta = rd
                .varint()
                .map_err(|_| bad(format!("truncated entry {k}")))?;
            let off = rd
                .varint()
                .map_err(|_| bad(format!("truncated entry {k}")))?;
            if k > 0 && delta == 0 {
                return Err(bad(format!("entry {k}: indices not increasing")));
            }
            idx += delta;
            let idx32 =
                u32::try_from(idx).map_err(|_| bad(format!("entry {k}: index {idx} too large")))?;
            let off = i32::try_from(varint::unzigzag(off))
                .map_err(|_| bad(format!("entry {k}: offset out of range")))?;
            if off == 0 {
                return Err(bad(format!("entry {k}: zero offset")));
            }
            entries.push((idx32, off));
        }
        if !rd.is_empty() {
            return Err(bad(format!("{} trailing bytes", rd.remaining())));
        }
        Ok(OffsetMap { entries })
    }
}

/// The integer value a violating reconstruction `recon` is moved to.
fn tolerance_edge(target: i32, recon: i32, lambda: f64) -> i32 {
    let t = target as f64;
    let slack = lambda * t.abs();
    if recon < target {
        (t + slack).floor() as i32
    } else {
        (t - slack).ceil() as i32
    }
}

fn violates(target: i32, recon: i32, lambda: f64) -> bool {
    let err = (target as f64 - recon as f64).abs();
    err / (target as f64).abs().max(1.0) > lambda
}

/// Offsets that bring every out-of-tolerance pixel of `recon` back within
/// `cfg.lambda` of `target` (up to the `q_step` rounding).
pub fn compute_offsets(target: &Band, recon: &Band, cfg: &CompensationConfig) -> Result<OffsetMap> {
    if (target.rows, target.cols) != (recon.rows, recon.cols) {
        return Err(Error::Dimension(format!(
            "target {}x{} vs reconstruction {}x{}",
            target.rows, target.cols, recon.rows, recon.cols
        )));
    }
    cfg.validate()?;
    let q = cfg.q_step as f64;
    let mut entries = Vec::new();
    for (idx, (&t, &r)) in target.data.iter().zip(&recon.data).enumerate() {
        if !violates(t, r, cfg.lambda) {
            continue;
        }
        let raw = (tolerance_edge(t, r, cfg.lambda) as i64 - r as i64) as f64;
        let off = (q * round_half_away(raw / q)) as i64;
        if off != 0 {
            let off = i32::try_from(off)
                .map_err(|_| Error::Numeric(format!("offset {off} overflows")))?;
            entries.push((idx as u32, off));
        }
    }
    Ok(OffsetMap { entries })
}

/// Adds each offset to its pixel; results are clamped to the `i16` range.
pub fn apply_offsets(recon: &Band, map: &OffsetMap) -> Result<Band> {
    let mut out = recon.clone();
    let n = out.data.len();
    for &(idx, off) in &map.entries {
        let idx = idx as usize;
        if idx >= n {
            return Err(Error::corrupt(
                SEGMENT,
                format!("pixel index {idx} outside a {n}-pixel band"),
            ));
        }
        let v = out.data[idx] as i64 + off as i64;
        out.data[idx] = v.clamp(i16::MIN as i64, i16::MAX as i64) as i32;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy_coder::{decode_bytes, encode_bytes};
    use proptest::prelude::*;

    fn band(data: Vec<i32>) -> Band {
        let n = data.len();
        Band::new(1, n, data).unwrap()
    }

    fn cfg(lambda: f64, q_step: u32) -> CompensationConfig {
        CompensationConfig {
            lambda,
            q_step,
            enabled: true,
        }
    }

    #[test]
    fn perfect_prediction_needs_nothing() {
        let t = band(vec![5, -3, 0, 900]);
        assert!(compute_offsets(&t, &t, &cfg(0.0, 1)).unwrap().is_empty());
    }

    #[test]
    fn lossless_limit_offsets_are_exact_residuals() {
        let t = band(vec![5, -3, 0, 900, 7]);
        let r = band(vec![4, -3, 2, 880, 7]);
        let map = compute_offsets(&t, &r, &cfg(0.0, 1)).unwrap();
        assert_eq!(map.entries, vec![(0, 1), (2, -2), (3, 20)]);
        assert_eq!(apply_offsets(&r, &map).unwrap(), t);
    }

    #[test]
    fn hand_evaluated_offset() {
        // 10/100 > 0.05; floor(100 * 1.05) - 90 = 15.
        let map = compute_offsets(&band(vec![100]), &band(vec![90]), &cfg(0.05, 1)).unwrap();
        assert_eq!(map.entries, vec![(0, 15)]);
        let out = apply_offsets(&band(vec![90]), &map).unwrap();
        assert_eq!(out.data, vec![105]);
        assert!((105.0f64 - 100.0).abs() / 100.0 <= 0.05);
    }

    #[test]
    fn overshoot_from_above_lands_inside_tolerance() {
        // t(1 - λ) = 95.95; the edge inside the band is 96.
        let map = compute_offsets(&band(vec![101]), &band(vec![120]), &cfg(0.05, 1)).unwrap();
        assert_eq!(map.entries, vec![(0, -24)]);
    }

    #[test]
    fn quantized_offsets() {
        // raw = 15, q = 4 → 4 * round(3.75) = 16
        let map = compute_offsets(&band(vec![100]), &band(vec![90]), &cfg(0.05, 4)).unwrap();
        assert_eq!(map.entries, vec![(0, 16)]);
        // raw = 1 with q = 4 rounds to zero and is dropped.
        let map = compute_offsets(&band(vec![10]), &band(vec![9]), &cfg(0.0, 4)).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn apply_cases() {
        let r = Band::filled(256, 256, 3);
        assert_eq!(apply_offsets(&r, &OffsetMap::default()).unwrap(), r);
        let out = apply_offsets(
            &r,
            &OffsetMap {
                entries: vec![(0, 5)],
            },
        )
        .unwrap();
        assert_eq!(out.data[0], 8);
        assert!(out.data[1..].iter().all(|&v| v == 3));
        let bad = OffsetMap {
            entries: vec![(65536, 1)],
        };
        assert!(matches!(
            apply_offsets(&r, &bad),
            Err(Error::CorruptStream { .. })
        ));
    }

    #[test]
    fn shape_and_config_errors() {
        assert!(compute_offsets(&band(vec![1, 2]), &band(vec![1]), &cfg(0.0, 1)).is_err());
        assert!(compute_offsets(&band(vec![1]), &band(vec![1]), &cfg(-0.1, 1)).is_err());
        assert!(compute_offsets(&band(vec![1]), &band(vec![1]), &cfg(0.1, 0)).is_err());
    }

    #[test]
    fn serialization_errors() {
        assert!(OffsetMap::from_bytes(&[]).is_err());
        assert!(OffsetMap::from_bytes(&[2, 0, 2]).is_err());
        // second delta zero
        assert!(OffsetMap::from_bytes(&[2, 1, 2, 0, 2]).is_err());
        // zero offset
        assert!(OffsetMap::from_bytes(&[1, 1, 0]).is_err());
        // trailing byte
        assert!(OffsetMap::from_bytes(&[0, 9]).is_err());
        assert_eq!(OffsetMap::from_bytes(&[0]).unwrap(), OffsetMap::default());
    }

    proptest! {
        #[test]
        fn near_lossless_bound(
            pairs in proptest::collection::vec((-4000i32..4000, -300i32..300), 1..400),
            lambda in 0.0f64..0.2,
            q_step in 1u32..6,
        ) {
            let t: Vec<i32> = pairs.iter().map(|p| p.0).collect();
            let r: Vec<i32> = pairs.iter().map(|p| p.0 + p.1).collect();
            let (t, r) = (band(t), band(r));
            let map = compute_offsets(&t, &r, &cfg(lambda, q_step)).unwrap();
            let out = apply_offsets(&r, &map).unwrap();
            for (&tv, &ov) in t.data.iter().zip(&out.data) {
                if tv.abs() >= 1 {
                    let rel = (tv - ov).abs() as f64 / tv.abs() as f64;
                    prop_assert!(rel <= lambda + q_step as f64 / (2.0 * tv.abs() as f64) + 1e-12,
                        "t={tv} out={ov} rel={rel}");
                }
            }
            if lambda == 0.0 && q_step == 1 {
                prop_assert_eq!(out, t);
            }
        }

        #[test]
        fn serialization_round_trips_through_entropy_coder(
            raw in proptest::collection::btree_map(0u32..65536, any::<i32>().prop_filter("nonzero", |v| *v != 0), 0..300)
        ) {
            let map = OffsetMap { entries: raw.into_iter().collect() };
            let coded = encode_bytes(&map.to_bytes());
            let back = OffsetMap::from_bytes(&decode_bytes(&coded).unwrap()).unwrap();
            prop_assert_eq!(back, map);
        }
    }
}
