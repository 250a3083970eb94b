//! Distortion measures and rate-distortion sweeps.

use crate::codec_pipeline::{bitrate, decode_bands, encode_cube_detailed, EncoderConfig};
use crate::cube_io::{Band, HyperCube};
use crate::error::{Error, Result};
use crate::residual_compensation::CompensationConfig;

/// Dynamic range for SSIM and the default PSNR peak.
pub const PEAK: i32 = 255;

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub band_index: usize,
    pub mse: f64,
    /// `f64::INFINITY` for identical bands.
    pub psnr_db: f64,
    pub ssim: f64,
    /// Correlation of the reference band with the next one; `None` for the
    /// last band or when both are constant.
    pub cc_next: Option<f64>,
}

fn same_shape(a: &Band, b: &Band) -> Result<()> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::Dimension(format!(
            "bands {}x{} and {}x{} differ in shape",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// Pearson correlation over all pixels of two bands.
///
/// When exactly one band is constant there is no linear relationship to
/// measure and the result is 0.
pub fn correlation_coefficient(a: &Band, b: &Band) -> Result<f64> {
    same_shape(a, b)?;
    let n = a.data.len() as f64;
    let mean = |v: &[i32]| v.iter().map(|&x| x as f64).sum::<f64>() / n;
    let (ma, mb) = (mean(&a.data), mean(&b.data));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.data.iter().zip(&b.data) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    match (saa == 0.0, sbb == 0.0) {
        (true, true) => Err(Error::UndefinedCorrelation),
        (true, false) | (false, true) => Ok(0.0),
        _ => Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)),
    }
}

pub fn band_mse(reference: &Band, test: &Band) -> Result<f64> {
    same_shape(reference, test)?;
    let sum: f64 = reference
        .data
        .iter()
        .zip(&test.data)
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok(sum / reference.data.len() as f64)
}

/// `10 log10(peak² / mse)`, infinite when the bands are identical.
pub fn psnr(reference: &Band, test: &Band, peak: i32) -> Result<f64> {
    if peak <= 0 {
        return Err(Error::Config(format!("peak must be positive, got {peak}")));
    }
    let mse = band_mse(reference, test)?;
    Ok(psnr_from_mse(mse, peak))
}

pub fn psnr_from_mse(mse: f64, peak: i32) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        let p = peak as f64;
        10.0 * (p * p / mse).log10()
    }
}

fn gaussian_kernel() -> [f64; WINDOW] {
    let mut k = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-(d * d) / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable "valid" Gaussian filter of a row-major image.
fn filter_valid(img: &[f64], rows: usize, cols: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let (or, oc) = (rows - WINDOW + 1, cols - WINDOW + 1);
    let mut horiz = vec![0.0; rows * oc];
    for i in 0..rows {
        let row = &img[i * cols..(i + 1) * cols];
        for j in 0..oc {
            let mut s = 0.0;
            for (t, w) in k.iter().enumerate() {
                s += w * row[j + t];
            }
            horiz[i * oc + j] = s;
        }
    }
    let mut out = vec![0.0; or * oc];
    for i in 0..or {
        for j in 0..oc {
            let mut s = 0.0;
            for (t, w) in k.iter().enumerate() {
                s += w * horiz[(i + t) * oc + j];
            }
            out[i * oc + j] = s;
        }
    }
    out
}

/// Mean SSIM over every 11×11 window position (Gaussian weights, σ = 1.5,
/// K1 = 0.01, K2 = 0.03, L = 255).
pub fn ssim(reference: &Band, test: &Band) -> Result<f64> {
    same_shape(reference, test)?;
    let (rows, cols) = (reference.rows, reference.cols);
    if rows < WINDOW || cols < WINDOW {
        return Err(Error::Dimension(format!(
            "band {rows}x{cols} is smaller than the {WINDOW}x{WINDOW} window"
        )));
    }
    let x: Vec<f64> = reference.data.iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = test.data.iter().map(|&v| v as f64).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let k = gaussian_kernel();
    let mx = filter_valid(&x, rows, cols, &k);
    let my = filter_valid(&y, rows, cols, &k);
    let sxx = filter_valid(&xx, rows, cols, &k);
    let syy = filter_valid(&yy, rows, cols, &k);
    let sxy = filter_valid(&xy, rows, cols, &k);
    let l = PEAK as f64;
    let (c1, c2) = ((K1 * l).powi(2), (K2 * l).powi(2));
    let mut total = 0.0;
    for i in 0..mx.len() {
        let (a, b) = (mx[i], my[i]);
        let va = sxx[i] - a * a;
        let vb = syy[i] - b * b;
        let cov = sxy[i] - a * b;
        total += ((2.0 * a * b + c1) * (2.0 * cov + c2)) / ((a * a + b * b + c1) * (va + vb + c2));
    }
    Ok(total / mx.len() as f64)
}

/// Per-band report comparing `test` against `reference`.
pub fn band_metrics(reference: &[Band], test: &[Band], peak: i32) -> Result<Vec<MetricsRecord>> {
    if reference.len() != test.len() {
        return Err(Error::Dimension(format!(
            "{} reference bands vs {} test bands",
            reference.len(),
            test.len()
        )));
    }
    let mut out = Vec::with_capacity(reference.len());
    for (l, (r, t)) in reference.iter().zip(test).enumerate() {
        let mse = band_mse(r, t)?;
        let cc_next = match reference.get(l + 1) {
            Some(next) => match correlation_coefficient(r, next) {
                Ok(cc) => Some(cc),
                Err(Error::UndefinedCorrelation) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        out.push(MetricsRecord {
            band_index: l,
            mse,
            psnr_db: psnr_from_mse(mse, peak),
            ssim: ssim(r, t)?,
            cc_next,
        });
    }
    Ok(out)
}

/// Reference point for the codec: every band predicted as a copy of the
/// previous one. Record `l` compares band `l + 1` against band `l`.
pub fn copy_previous_baseline(bands: &[Band], peak: i32) -> Result<Vec<MetricsRecord>> {
    if bands.len() < 2 {
        return Ok(Vec::new());
    }
    let mut out = band_metrics(&bands[1..], &bands[..bands.len() - 1], peak)?;
    for r in &mut out {
        r.band_index += 1;
    }
    Ok(out)
}

pub fn cube_bands(cube: &HyperCube) -> Vec<Band> {
    (0..cube.bands()).map(|l| cube.band(l)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    /// `None` when compensation is disabled.
    pub lambda: Option<f64>,
    pub bpppb: f64,
    pub mean_psnr_db: f64,
    pub mean_ssim: f64,
}

/// Encodes and decodes `cube` once per tolerance and measures the
/// predicted bands against the resized originals. With compensation
/// disabled the sweep collapses to a single point. Rows are sorted by rate.
pub fn rd_points(cube: &HyperCube, lambdas: &[f64], cfg: &EncoderConfig) -> Result<Vec<RdPoint>> {
    if lambdas.is_empty() && cfg.compensation.enabled {
        return Err(Error::Config("lambda sweep is empty".into()));
    }
    let sweep: Vec<Option<f64>> = if cfg.compensation.enabled {
        lambdas.iter().map(|&l| Some(l)).collect()
    } else {
        vec![None]
    };
    let mut points = Vec::with_capacity(sweep.len());
    for lambda in sweep {
        let run = EncoderConfig {
            compensation: CompensationConfig {
                lambda: lambda.unwrap_or(cfg.compensation.lambda),
                ..cfg.compensation
            },
            ..cfg.clone()
        };
        let enc = encode_cube_detailed(cube, &run)?;
        let decoded = decode_bands(&enc.bitstream)?;
        let skip = enc.first_band + 1;
        let measured = if decoded.len() > skip {
            skip
        } else {
            enc.first_band
        };
        let records = band_metrics(&enc.reference[measured..], &decoded[measured..], PEAK)?;
        let n = records.len() as f64;
        points.push(RdPoint {
            lambda,
            bpppb: bitrate(&enc.bitstream),
            mean_psnr_db: records.iter().map(|r| r.psnr_db).sum::<f64>() / n,
            mean_ssim: records.iter().map(|r| r.ssim).sum::<f64>() / n,
        });
    }
    points.sort_by(|a, b| a.bpppb.total_cmp(&b.bpppb));
    Ok(points)
}

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

pub fn rd_csv(points: &[RdPoint]) -> String {
    let mut out = String::from("lambda,bpppb,mean_psnr_db,mean_ssim\n");
    for p in points {
        let lambda = p
            .lambda
            .map_or_else(|| "off".to_string(), |l| format_sig(l, 6));
        out.push_str(&format!(
            "{lambda},{},{},{}\n",
            format_sig(p.bpppb, 6),
            format_sig(p.mean_psnr_db, 6),
            format_sig(p.mean_ssim, 6)
        ));
    }
    out
}
