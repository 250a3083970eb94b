//! Hyperspectral cube storage plus the per-band resize and normalization
//! that put every band into the codec's working geometry.
//!
//! On disk a cube is a raw band-sequential file of little-endian `i16`
//! samples next to a plain-text `.hdr` sidecar:
//!
//! ```text
//! rows=145
//! cols=145
//! bands=220
//! dtype=i16le
//! order=bsq
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::round::round_half_away;

/// Side length of the square band every cube is resized to.
pub const BAND_SIDE: usize = 256;

/// Pixels in one working band.
pub const BAND_PIXELS: usize = BAND_SIDE * BAND_SIDE;

/// A single 2-D integer band, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i32>,
}

impl Band {
    pub fn new(rows: usize, cols: usize, data: Vec<i32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "band must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "band {rows}x{cols} needs {} samples, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Band { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: i32) -> Self {
        Band {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.data[row * self.cols + col]
    }

    pub fn min_max(&self) -> (i32, i32) {
        let mut lo = i32::MAX;
        let mut hi = i32::MIN;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }
}

/// A rows × cols × bands cube of 16-bit samples in band-sequential order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperCube {
    rows: usize,
    cols: usize,
    bands: usize,
    samples: Vec<i16>,
    band_exclusions: Vec<usize>,
}

impl HyperCube {
    pub fn new(rows: usize, cols: usize, bands: usize, samples: Vec<i16>) -> Result<Self> {
        if rows == 0 || cols == 0 || bands == 0 {
            return Err(Error::Dimension(format!(
                "cube dimensions must be positive, got {rows}x{cols}x{bands}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(bands))
            .ok_or_else(|| Error::Dimension("cube dimensions overflow".into()))?;
        if samples.len() != expected {
            return Err(Error::Dimension(format!(
                "cube {rows}x{cols}x{bands} needs {expected} samples, got {}",
                samples.len()
            )));
        }
        Ok(HyperCube {
            rows,
            cols,
            bands,
            samples,
            band_exclusions: Vec::new(),
        })
    }

    /// Stacks equally sized bands. Values must fit in `i16`.
    pub fn from_bands(bands: &[Band]) -> Result<Self> {
        let first = bands
            .first()
            .ok_or_else(|| Error::Dimension("cube needs at least one band".into()))?;
        let (rows, cols) = (first.rows, first.cols);
        let mut samples = Vec::with_capacity(rows * cols * bands.len());
        for (l, band) in bands.iter().enumerate() {
            if band.rows != rows || band.cols != cols {
                return Err(Error::Dimension(format!(
                    "band {l} is {}x{}, expected {rows}x{cols}",
                    band.rows, band.cols
                )));
            }
            for &v in &band.data {
                let s = i16::try_from(v).map_err(|_| {
                    Error::Numeric(format!("band {l} sample {v} does not fit in i16"))
                })?;
                samples.push(s);
            }
        }
        HyperCube::new(rows, cols, bands.len(), samples)
    }

    pub fn with_exclusions(mut self, mut exclusions: Vec<usize>) -> Result<Self> {
        exclusions.sort_unstable();
        exclusions.dedup();
        if let Some(&bad) = exclusions.iter().find(|&&l| l >= self.bands) {
            return Err(Error::Config(format!(
                "excluded band {bad} out of range for {} bands",
                self.bands
            )));
        }
        self.band_exclusions = exclusions;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn band_exclusions(&self) -> &[usize] {
        &self.band_exclusions
    }

    pub fn band_samples(&self, band: usize) -> &[i16] {
        let n = self.rows * self.cols;
        &self.samples[band * n..(band + 1) * n]
    }

    pub fn band(&self, band: usize) -> Band {
        Band {
            rows: self.rows,
            cols: self.cols,
            data: self.band_samples(band).iter().map(|&v| v as i32).collect(),
        }
    }
}

/// Dimensions read from a `.hdr` sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeHeader {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
}

impl CubeHeader {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = None;
        let mut cols = None;
        let mut bands = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key=value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let count = || {
                value.parse::<usize>().map_err(|_| {
                    Error::Format(format!("line {}: bad {key} value {value:?}", n + 1))
                })
            };
            match key {
                "rows" => rows = Some(count()?),
                "cols" => cols = Some(count()?),
                "bands" => bands = Some(count()?),
                "dtype" if value != "i16le" => {
                    return Err(Error::Format(format!("unsupported dtype {value:?}")))
                }
                "order" if value != "bsq" => {
                    return Err(Error::Format(format!("unsupported order {value:?}")))
                }
                _ => {}
            }
        }
        let missing = |k: &str| Error::Format(format!("header is missing {k}"));
        let header = CubeHeader {
            rows: rows.ok_or_else(|| missing("rows"))?,
            cols: cols.ok_or_else(|| missing("cols"))?,
            bands: bands.ok_or_else(|| missing("bands"))?,
        };
        if header.rows == 0 || header.cols == 0 || header.bands == 0 {
            return Err(Error::Format("header dimensions must be positive".into()));
        }
        Ok(header)
    }

    pub fn render(&self) -> String {
        format!(
            "rows={}\ncols={}\nbands={}\ndtype=i16le\norder=bsq\n",
            self.rows, self.cols, self.bands
        )
    }

    pub fn byte_len(&self) -> usize {
        self.rows * self.cols * self.bands * 2
    }
}

/// Sidecar path for a raw cube file: `name.raw` → `name.hdr`.
pub fn header_path(raw: &Path) -> PathBuf {
    raw.with_extension("hdr")
}

pub fn read_header(path: &Path) -> Result<CubeHeader> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read header {}: {e}", path.display())))?;
    CubeHeader::parse(&text)
}

/// Reads the raw samples of `path` using dimensions from `header`.
pub fn load_cube(path: &Path, header: &CubeHeader) -> Result<HyperCube> {
    let bytes = fs::read(path)?;
    if bytes.len() != header.byte_len() {
        return Err(Error::CorruptInput(format!(
            "{} has {} bytes, header declares {}x{}x{} ({} bytes)",
            path.display(),
            bytes.len(),
            header.rows,
            header.cols,
            header.bands,
            header.byte_len()
        )));
    }
    let samples = bytes
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]))
        .collect();
    HyperCube::new(header.rows, header.cols, header.bands, samples)
}

/// Loads `path` using the sidecar header next to it.
pub fn open_cube(path: &Path) -> Result<HyperCube> {
    let header = read_header(&header_path(path))?;
    load_cube(path, &header)
}

/// Writes the raw samples to `path` and the header to its sidecar.
pub fn store_cube(cube: &HyperCube, path: &Path) -> Result<()> {
    let wrap = |p: &Path| {
        let p = p.display().to_string();
        move |source| Error::Write { path: p, source }
    };
    let mut bytes = Vec::with_capacity(cube.samples.len() * 2);
    for s in &cube.samples {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    fs::write(path, bytes).map_err(wrap(path))?;
    let header = CubeHeader {
        rows: cube.rows,
        cols: cube.cols,
        bands: cube.bands,
    };
    let hdr = header_path(path);
    fs::write(&hdr, header.render()).map_err(wrap(&hdr))?;
    Ok(())
}

/// Nearest-neighbour resample to 256×256, sampling source pixel
/// `floor((i + 0.5) * rows / 256)` for output row `i` (columns likewise).
pub fn resize_band(band: &Band) -> Band {
    if band.rows == BAND_SIDE && band.cols == BAND_SIDE {
        return band.clone();
    }
    // (2i + 1) * n / 512 is the same floor in exact integer arithmetic.
    let src_index = |i: usize, n: usize| ((2 * i + 1) * n) / (2 * BAND_SIDE);
    let cols: Vec<usize> = (0..BAND_SIDE).map(|j| src_index(j, band.cols)).collect();
    let mut data = Vec::with_capacity(BAND_PIXELS);
    for i in 0..BAND_SIDE {
        let r = src_index(i, band.rows);
        data.extend(cols.iter().map(|&c| band.get(r, c)));
    }
    Band {
        rows: BAND_SIDE,
        cols: BAND_SIDE,
        data,
    }
}

/// A band rescaled to the unit interval together with the range needed to
/// map it back.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedBand {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub src_min: i32,
    pub src_max: i32,
}

pub fn normalize_band(band: &Band) -> NormalizedBand {
    let (lo, hi) = band.min_max();
    let values = if hi > lo {
        let span = (hi - lo) as f64;
        band.data.iter().map(|&v| (v - lo) as f64 / span).collect()
    } else {
        vec![0.0; band.data.len()]
    };
    NormalizedBand {
        rows: band.rows,
        cols: band.cols,
        values,
        src_min: lo,
        src_max: hi,
    }
}

pub fn denormalize_band(nb: &NormalizedBand) -> Band {
    Band {
        rows: nb.rows,
        cols: nb.cols,
        data: denormalize_values(&nb.values, nb.src_min, nb.src_max),
    }
}

/// `round(v * (max - min)) + min`, clamped to `[min, max]`. Accepts values
/// outside the unit interval (network outputs) and clamps the result.
pub fn denormalize_values(values: &[f64], src_min: i32, src_max: i32) -> Vec<i32> {
    let span = (src_max as f64) - (src_min as f64);
    values
        .iter()
        .map(|&v| {
            let scaled = round_half_away(v * span);
            let scaled = if scaled.is_nan() { 0.0 } else { scaled };
            let out = scaled + src_min as f64;
            out.clamp(src_min as f64, src_max as f64) as i32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn smallest_cube_loads() {
        let dir = tmp();
        let raw = dir.path().join("one.raw");
        fs::write(&raw, 7i16.to_le_bytes()).unwrap();
        let header = CubeHeader {
            rows: 1,
            cols: 1,
            bands: 1,
        };
        let cube = load_cube(&raw, &header).unwrap();
        assert_eq!(cube.samples(), &[7]);
    }

    #[test]
    fn size_mismatch_is_corrupt_input() {
        let dir = tmp();
        let raw = dir.path().join("short.raw");
        fs::write(&raw, [0u8; 10]).unwrap();
        let header = CubeHeader {
            rows: 2,
            cols: 2,
            bands: 2,
        };
        assert!(matches!(
            load_cube(&raw, &header),
            Err(Error::CorruptInput(_))
        ));
    }

    #[test]
    fn unreadable_header_is_format_error() {
        assert!(matches!(
            CubeHeader::parse("rows=3\ncols\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            CubeHeader::parse("rows=3\ncols=2\n"),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            CubeHeader::parse("rows=1\ncols=1\nbands=1\ndtype=f32\n"),
            Err(Error::Format(_))
        ));
        let dir = tmp();
        assert!(matches!(
            read_header(&dir.path().join("missing.hdr")),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn zero_cube_byte_layout() {
        let dir = tmp();
        let raw = dir.path().join("z.raw");
        let cube = HyperCube::new(2, 2, 1, vec![0; 4]).unwrap();
        store_cube(&cube, &raw).unwrap();
        assert_eq!(fs::read(&raw).unwrap(), vec![0u8; 8]);
        let hdr = fs::read_to_string(header_path(&raw)).unwrap();
        assert_eq!(
            CubeHeader::parse(&hdr).unwrap(),
            CubeHeader {
                rows: 2,
                cols: 2,
                bands: 1
            }
        );
    }

    #[test]
    fn sample_order_is_band_sequential_le() {
        let dir = tmp();
        let raw = dir.path().join("o.raw");
        let cube = HyperCube::new(1, 2, 2, vec![1, -2, 0x0102, 4]).unwrap();
        store_cube(&cube, &raw).unwrap();
        assert_eq!(fs::read(&raw).unwrap(), vec![1, 0, 0xfe, 0xff, 2, 1, 4, 0]);
        assert_eq!(cube.band(1).data, vec![0x0102, 4]);
    }

    #[test]
    fn unwritable_path_is_write_error() {
        let dir = tmp();
        let raw = dir.path().join("no/such/dir/c.raw");
        let cube = HyperCube::new(1, 1, 1, vec![0]).unwrap();
        assert!(matches!(store_cube(&cube, &raw), Err(Error::Write { .. })));
    }

    #[test]
    fn cube_invariants() {
        assert!(HyperCube::new(0, 1, 1, vec![]).is_err());
        assert!(HyperCube::new(2, 2, 1, vec![0; 3]).is_err());
        let cube = HyperCube::new(1, 1, 3, vec![0; 3]).unwrap();
        assert!(cube.clone().with_exclusions(vec![3]).is_err());
        assert_eq!(
            cube.with_exclusions(vec![2, 0, 2])
                .unwrap()
                .band_exclusions(),
            &[0, 2]
        );
    }

    #[test]
    fn resize_identity_on_working_size() {
        let data = (0..BAND_PIXELS as i32).map(|v| v % 977).collect();
        let band = Band::new(256, 256, data).unwrap();
        assert_eq!(resize_band(&band), band);
    }

    #[test]
    fn resize_halves_512_by_centre_sampling() {
        let data = (0..512 * 512).collect();
        let band = Band::new(512, 512, data).unwrap();
        let out = resize_band(&band);
        for i in (0..256).step_by(17) {
            for j in (0..256).step_by(13) {
                // floor((i + 0.5) * 2) = 2i + 1
                assert_eq!(out.get(i, j), band.get(2 * i + 1, 2 * j + 1));
            }
        }
    }

    #[test]
    fn resize_expands_single_pixel() {
        let out = resize_band(&Band::filled(1, 1, -9));
        assert_eq!(out.data, vec![-9; BAND_PIXELS]);
    }

    #[test]
    fn resize_non_square_source() {
        let data = (0..3 * 700).collect();
        let band = Band::new(3, 700, data).unwrap();
        let out = resize_band(&band);
        assert_eq!((out.rows, out.cols), (256, 256));
        // Row 0 → floor(0.5 * 3 / 256) = 0; row 255 → floor(255.5 * 3 / 256) = 2.
        assert_eq!(out.get(0, 0), band.get(0, (700) / 512));
        assert_eq!(out.get(255, 255), band.get(2, (511 * 700) / 512));
    }

    #[test]
    fn normalize_endpoints() {
        let band = Band::new(1, 3, vec![0, 100, 255]).unwrap();
        let nb = normalize_band(&band);
        assert_eq!(nb.values[0], 0.0);
        assert_eq!(nb.values[2], 1.0);
        assert_eq!((nb.src_min, nb.src_max), (0, 255));
    }

    #[test]
    fn normalize_constant_band() {
        let nb = normalize_band(&Band::filled(4, 4, 42));
        assert!(nb.values.iter().all(|&v| v == 0.0));
        assert_eq!((nb.src_min, nb.src_max), (42, 42));
        assert_eq!(denormalize_band(&nb).data, vec![42; 16]);
    }

    #[test]
    fn denormalize_endpoints_and_rounding() {
        assert_eq!(denormalize_values(&[0.0; 3], 10, 200), vec![10; 3]);
        assert_eq!(denormalize_values(&[1.0; 3], 10, 200), vec![200; 3]);
        // 0.5 * 255 = 127.5 rounds away from zero.
        assert_eq!(denormalize_values(&[0.5], 0, 255), vec![128]);
        assert_eq!(
            denormalize_values(&[-0.3, 1.7, f64::NAN], 5, 9),
            vec![5, 9, 5]
        );
    }

    proptest! {
        #[test]
        fn cube_round_trips_through_disk(samples in proptest::collection::vec(any::<i16>(), 8 * 8 * 4)) {
            let dir = tmp();
            let raw = dir.path().join("c.raw");
            let cube = HyperCube::new(8, 8, 4, samples).unwrap();
            store_cube(&cube, &raw).unwrap();
            prop_assert_eq!(open_cube(&raw).unwrap(), cube);
        }

        #[test]
        fn normalize_stays_in_unit_interval(data in proptest::collection::vec(-32768i32..=32767, 1..300)) {
            let n = data.len();
            let nb = normalize_band(&Band::new(1, n, data).unwrap());
            prop_assert!(nb.values.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(nb.src_min <= nb.src_max);
        }

        #[test]
        fn normalize_inverts_exactly(data in proptest::collection::vec(-32768i32..=32767, 1..300)) {
            let n = data.len();
            let band = Band::new(1, n, data).unwrap();
            prop_assert_eq!(denormalize_band(&normalize_band(&band)), band);
        }

        #[test]
        fn resize_is_idempotent(rows in 1usize..40, cols in 1usize..40, seed in any::<i32>()) {
            let data = (0..rows * cols).map(|v| (v as i32).wrapping_mul(seed) % 1000).collect();
            let once = resize_band(&Band::new(rows, cols, data).unwrap());
            prop_assert_eq!(resize_band(&once), once.clone());
        }
    }
}
