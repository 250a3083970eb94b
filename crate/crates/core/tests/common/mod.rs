#![allow(dead_code)]

use hsicodec::cube_io::{BAND_PIXELS, BAND_SIDE};
use hsicodec::{Band, HyperCube};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LO: f64 = 20.0;
const SPAN: f64 = 215.0;

/// Smooth 8-bit-range cube; each band is a monotone nonlinear curve applied
/// to the previous band.
pub fn smooth_cube(bands: usize) -> HyperCube {
    let mut field: Vec<f64> = (0..BAND_PIXELS)
        .map(|p| {
            let (i, j) = ((p / BAND_SIDE) as f64, (p % BAND_SIDE) as f64);
            let v = 0.5
                + 0.3 * (i / 23.0 + 0.3).sin() * (j / 31.0).cos()
                + 0.15 * ((i + j) / 47.0).sin();
            v.clamp(0.0, 1.0)
        })
        .collect();
    let mut out = Vec::with_capacity(bands);
    for l in 0..bands {
        if l > 0 {
            let a = if l % 2 == 0 { 0.08 } else { -0.06 };
            for x in &mut field {
                *x += a * (2.0 * std::f64::consts::PI * *x).sin();
            }
        }
        let data = field
            .iter()
            .map(|x| (LO + SPAN * x).round() as i32)
            .collect();
        out.push(Band::new(BAND_SIDE, BAND_SIDE, data).unwrap());
    }
    HyperCube::from_bands(&out).unwrap()
}

pub fn random_cube(rows: usize, cols: usize, bands: usize, seed: u64) -> HyperCube {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..rows * cols * bands)
        .map(|_| rng.random_range(0i16..1024))
        .collect();
    HyperCube::new(rows, cols, bands, samples).unwrap()
}
