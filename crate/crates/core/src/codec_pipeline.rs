//! Encoder and decoder for whole cubes.
//!
//! The first non-empty band is stored losslessly. Every later band is
//! predicted from the *reconstructed* previous band by a freshly trained
//! network whose quantized parameters are transmitted. The encoder runs the
//! decoder's arithmetic on the quantized parameters itself, so both sides
//! hold the same previous band when the next one is predicted.

use crate::bitstream::{Bitstream, Segment, SegmentTag, StreamHeader};
use crate::block_transform::{band_to_blocks, blocks_to_band, BlockMatrix};
use crate::cube_io::{
    denormalize_values, normalize_band, resize_band, Band, HyperCube, BAND_PIXELS, BAND_SIDE,
};
use crate::entropy_coder::{decode_bytes, encode_bytes, CodedSegment};
use crate::error::{Error, Result};
use crate::lm_trainer::{train, TrainConfig, TrainReport};
use crate::mlp::{forward, MlpParams};
use crate::param_quantizer::{self, QuantizedParams, PAYLOAD_BYTES, RANGE_BYTES};
use crate::residual_compensation::{apply_offsets, compute_offsets, CompensationConfig, OffsetMap};
use crate::varint::Reader;

/// Bytes of per-band source range carried next to the parameter ranges.
pub const MINMAX_BYTES: usize = 8;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncoderConfig {
    pub train: TrainConfig,
    pub compensation: CompensationConfig,
    /// Source band indices left out of the stream (merged with the cube's own list).
    pub band_exclusions: Vec<usize>,
}

/// What the encoder spent on one predicted band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRecord {
    /// Index of the band in the decoded cube.
    pub band: usize,
    /// Source band index.
    pub source_band: usize,
    pub report: TrainReport,
    /// Parameter bytes + range bytes + band min/max, before entropy coding.
    pub side_info_bytes: usize,
    /// Stream bytes of this band's segments, tags and lengths included.
    pub coded_bytes: usize,
    pub offsets: usize,
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub bitstream: Bitstream,
    /// Resized source bands, in decoded-cube order.
    pub reference: Vec<Band>,
    /// The encoder's own reconstruction, identical to what the decoder produces.
    pub reconstruction: Vec<Band>,
    pub records: Vec<BandRecord>,
    /// Position of the losslessly coded band in decoded-cube order.
    pub first_band: usize,
}

fn band_blocks(band: &Band) -> Result<(BlockMatrix, i32, i32)> {
    let nb = normalize_band(band);
    Ok((
        band_to_blocks(&nb.values, nb.rows, nb.cols)?,
        nb.src_min,
        nb.src_max,
    ))
}

/// Prediction of the next band from the reconstructed previous one.
fn predict_band(
    params: &MlpParams,
    input: &BlockMatrix,
    src_min: i32,
    src_max: i32,
) -> Result<Band> {
    let out = forward(params, &input.columns)?;
    let values = blocks_to_band(&BlockMatrix::new(out, input.block_rows, input.block_cols)?)?;
    Band::new(
        BAND_SIDE,
        BAND_SIDE,
        denormalize_values(&values, src_min, src_max),
    )
}

fn band_bytes(band: &Band) -> Vec<u8> {
    band.data
        .iter()
        .flat_map(|&v| (v as i16).to_le_bytes())
        .collect()
}

fn merged_exclusions(cube: &HyperCube, extra: &[usize]) -> Result<Vec<usize>> {
    let mut all: Vec<usize> = cube
        .band_exclusions()
        .iter()
        .chain(extra)
        .copied()
        .collect();
    all.sort_unstable();
    all.dedup();
    if let Some(&bad) = all.iter().find(|&&l| l >= cube.bands()) {
        return Err(Error::Config(format!(
            "excluded band {bad} out of range for {} bands",
            cube.bands()
        )));
    }
    Ok(all)
}

/// Encodes `cube`, returning the stream together with the encoder-side
/// reconstruction and per-band statistics.
pub fn encode_cube_detailed(cube: &HyperCube, cfg: &EncoderConfig) -> Result<Encoded> {
    cfg.train.validate()?;
    cfg.compensation.validate()?;
    let exclusions = merged_exclusions(cube, &cfg.band_exclusions)?;
    let active: Vec<usize> = (0..cube.bands())
        .filter(|l| exclusions.binary_search(l).is_err())
        .collect();
    if active.is_empty() {
        return Err(Error::NoContent("every band is excluded".into()));
    }
    let reference: Vec<Band> = active.iter().map(|&l| resize_band(&cube.band(l))).collect();
    let first = reference
        .iter()
        .position(|b| !b.is_all_zero())
        .ok_or_else(|| Error::NoContent("all samples are zero".into()))?;

    let header = StreamHeader {
        rows: BAND_SIDE as u32,
        cols: BAND_SIDE as u32,
        src_rows: cube.rows() as u32,
        src_cols: cube.cols() as u32,
        src_bands: cube.bands() as u32,
        coded_bands: active.len() as u32,
        leading_zero_bands: first as u32,
        compensation: cfg.compensation,
        exclusions: exclusions.iter().map(|&l| l as u32).collect(),
    };

    let mut segments = Vec::new();
    let mut reconstruction: Vec<Band> = (0..first)
        .map(|_| Band::filled(BAND_SIDE, BAND_SIDE, 0))
        .collect();
    let mut records = Vec::new();

    let lossless = &reference[first];
    let (lo, hi) = lossless.min_max();
    let mut body = Vec::new();
    body.extend_from_slice(&lo.to_le_bytes());
    body.extend_from_slice(&hi.to_le_bytes());
    body.extend(encode_bytes(&band_bytes(lossless)).to_bytes());
    segments.push(Segment {
        tag: SegmentTag::FirstBand,
        body,
    });
    reconstruction.push(lossless.clone());

    for pos in first + 1..active.len() {
        let (input, _, _) = band_blocks(&reconstruction[pos - 1])?;
        let target = &reference[pos];
        let (target_blocks, t_min, t_max) = band_blocks(target)?;
        let train_cfg = TrainConfig {
            seed: cfg.train.seed.wrapping_add(pos as u64),
            ..cfg.train.clone()
        };
        let (params, report) = train(&input.columns, &target_blocks.columns, &train_cfg)?;
        let (quantized, params) = param_quantizer::round_trip(&params)?;
        let predicted = predict_band(&params, &input, t_min, t_max)?;

        let params_seg = Segment {
            tag: SegmentTag::Params,
            body: encode_bytes(&quantized.payload()).to_bytes(),
        };
        let mut ranges = quantized.range_bytes().to_vec();
        ranges.extend_from_slice(&t_min.to_le_bytes());
        ranges.extend_from_slice(&t_max.to_le_bytes());
        let ranges_seg = Segment {
            tag: SegmentTag::Ranges,
            body: ranges,
        };
        let mut coded_bytes = params_seg.wire_len() + ranges_seg.wire_len();
        segments.push(params_seg);
        segments.push(ranges_seg);

        let mut offsets = 0;
        let recon = if cfg.compensation.enabled {
            let map = compute_offsets(target, &predicted, &cfg.compensation)?;
            offsets = map.len();
            let recon = apply_offsets(&predicted, &map)?;
            if !map.is_empty() {
                let seg = Segment {
                    tag: SegmentTag::Offsets,
                    body: encode_bytes(&map.to_bytes()).to_bytes(),
                };
                coded_bytes += seg.wire_len();
                segments.push(seg);
            }
            recon
        } else {
            predicted
        };
        reconstruction.push(recon);
        records.push(BandRecord {
            band: pos,
            source_band: active[pos],
            report,
            side_info_bytes: PAYLOAD_BYTES + RANGE_BYTES + MINMAX_BYTES,
            coded_bytes,
            offsets,
        });
    }

    Ok(Encoded {
        bitstream: Bitstream { header, segments },
        reference,
        reconstruction,
        records,
        first_band: first,
    })
}

pub fn encode_cube(cube: &HyperCube, cfg: &EncoderConfig) -> Result<Bitstream> {
    Ok(encode_cube_detailed(cube, cfg)?.bitstream)
}

fn entropy_body(body: &[u8], segment: &str) -> Result<Vec<u8>> {
    let relabel = |e: Error| match e {
        Error::CorruptStream { reason, .. } => Error::corrupt(segment, reason),
        other => other,
    };
    decode_bytes(&CodedSegment::from_bytes(body).map_err(relabel)?).map_err(relabel)
}

/// Reconstructs every coded band, in decoded-cube order.
pub fn decode_bands(bs: &Bitstream) -> Result<Vec<Band>> {
    bs.check_grammar()?;
    let header = &bs.header;
    let name = |k: usize, tag: SegmentTag| format!("segment {k} ({})", tag.name());
    let mut bands: Vec<Band> = (0..header.leading_zero_bands)
        .map(|_| Band::filled(BAND_SIDE, BAND_SIDE, 0))
        .collect();

    let first = &bs.segments[0];
    let seg_name = name(0, first.tag);
    let mut rd = Reader::new(&first.body);
    let short = |_| Error::corrupt(seg_name.clone(), "truncated band range");
    let lo = rd.i32().map_err(short)?;
    let hi = rd.i32().map_err(short)?;
    let raw = entropy_body(rd.rest(), &seg_name)?;
    if raw.len() != 2 * BAND_PIXELS {
        return Err(Error::corrupt(
            seg_name,
            format!(
                "first band has {} bytes, expected {}",
                raw.len(),
                2 * BAND_PIXELS
            ),
        ));
    }
    let data: Vec<i32> = raw
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as i32)
        .collect();
    let lossless = Band::new(BAND_SIDE, BAND_SIDE, data)?;
    if lossless.min_max() != (lo, hi) {
        return Err(Error::corrupt(
            seg_name,
            "band range does not match samples",
        ));
    }
    bands.push(lossless);

    let mut k = 1;
    while k < bs.segments.len() {
        let params_name = name(k, SegmentTag::Params);
        let payload = entropy_body(&bs.segments[k].body, &params_name)?;
        let ranges_name = name(k + 1, SegmentTag::Ranges);
        let ranges = &bs.segments[k + 1].body;
        if ranges.len() != RANGE_BYTES + MINMAX_BYTES {
            return Err(Error::corrupt(
                ranges_name,
                format!(
                    "{} bytes, expected {}",
                    ranges.len(),
                    RANGE_BYTES + MINMAX_BYTES
                ),
            ));
        }
        let quantized = QuantizedParams::from_parts(&payload, &ranges[..RANGE_BYTES])
            .map_err(|e| Error::corrupt(format!("segment {k}-{}", k + 1), e.to_string()))?;
        let mut rd = Reader::new(&ranges[RANGE_BYTES..]);
        let t_min = rd.i32()?;
        let t_max = rd.i32()?;
        if t_min > t_max {
            return Err(Error::corrupt(ranges_name, "band min exceeds max"));
        }
        k += 2;

        let params = quantized.dequantize()?;
        let (input, _, _) = band_blocks(bands.last().unwrap())?;
        let mut band = predict_band(&params, &input, t_min, t_max)?;
        if k < bs.segments.len() && bs.segments[k].tag == SegmentTag::Offsets {
            let offsets_name = name(k, SegmentTag::Offsets);
            let bytes = entropy_body(&bs.segments[k].body, &offsets_name)?;
            let relabel = |e: Error| match e {
                Error::CorruptStream { reason, .. } => Error::corrupt(offsets_name.clone(), reason),
                other => other,
            };
            let map = OffsetMap::from_bytes(&bytes).map_err(relabel)?;
            band = apply_offsets(&band, &map).map_err(relabel)?;
            k += 1;
        }
        bands.push(band);
    }
    Ok(bands)
}

pub fn decode_cube(bs: &Bitstream) -> Result<HyperCube> {
    HyperCube::from_bands(&decode_bands(bs)?)
}

/// Total stream bits per pixel per coded band.
pub fn bitrate(bs: &Bitstream) -> f64 {
    let pixels = (bs.header.rows as f64) * (bs.header.cols as f64) * bs.header.coded_bands as f64;
    (bs.byte_len() * 8) as f64 / pixels
}

/// Bits per pixel per band spent on the predicted bands alone: their
/// segments, over their pixels. `None` when nothing is predicted.
pub fn predicted_bitrate(bs: &Bitstream) -> Option<f64> {
    let n = bs.header.predicted_bands();
    if n == 0 {
        return None;
    }
    let bytes: usize = bs.segments[1..].iter().map(Segment::wire_len).sum();
    Some((bytes * 8) as f64 / (BAND_PIXELS * n) as f64)
}
