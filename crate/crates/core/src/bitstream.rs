//! The coded-cube container.
//!
//! ```text
//! "BIPN" magic, u8 version
//! header, little-endian fixed width:
//!   u32 rows, u32 cols                 working geometry (256 × 256)
//!   u32 src_rows, u32 src_cols, u32 src_bands
//!   u32 coded_bands                    bands present in the decoded cube
//!   u32 leading_zero_bands             all-zero bands before the first coded one
//!   u8 compensation enabled, f64 lambda, u32 q_step
//!   u32 exclusion count, u32 × count   excluded source band indices
//! segments, each: u8 tag, varint body length, body
//!   0x01 first band   i32 min, i32 max, entropy segment of i16le samples
//!   0x02 params       entropy segment of the 346 quantized parameter bytes
//!   0x03 ranges       32 bytes of f32 (min, max) pairs, i32 band min, i32 band max
//!   0x04 offsets      entropy segment of the serialized offset map
//! ```
//!
//! Grammar: one `0x01`, then per predicted band `0x02 0x03` optionally
//! followed by `0x04`.

use crate::cube_io::BAND_SIDE;
use crate::error::{Error, Result};
use crate::residual_compensation::CompensationConfig;
use crate::varint;

pub const MAGIC: [u8; 4] = *b"BIPN";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentTag {
    FirstBand = 0x01,
    Params = 0x02,
    Ranges = 0x03,
    Offsets = 0x04,
}

impl SegmentTag {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x01 => Some(SegmentTag::FirstBand),
            0x02 => Some(SegmentTag::Params),
            0x03 => Some(SegmentTag::Ranges),
            0x04 => Some(SegmentTag::Offsets),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SegmentTag::FirstBand => "first-band",
            SegmentTag::Params => "params",
            SegmentTag::Ranges => "ranges",
            SegmentTag::Offsets => "offsets",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamHeader {
    pub rows: u32,
    pub cols: u32,
    pub src_rows: u32,
    pub src_cols: u32,
    pub src_bands: u32,
    pub coded_bands: u32,
    pub leading_zero_bands: u32,
    pub compensation: CompensationConfig,
    pub exclusions: Vec<u32>,
}

impl StreamHeader {
    fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        for v in [
            self.rows,
            self.cols,
            self.src_rows,
            self.src_cols,
            self.src_bands,
            self.coded_bands,
            self.leading_zero_bands,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.push(self.compensation.enabled as u8);
        out.extend_from_slice(&self.compensation.lambda.to_le_bytes());
        out.extend_from_slice(&self.compensation.q_step.to_le_bytes());
        out.extend_from_slice(&(self.exclusions.len() as u32).to_le_bytes());
        for e in &self.exclusions {
            out.extend_from_slice(&e.to_le_bytes());
        }
    }

    fn read(rd: &mut varint::Reader<'_>) -> Result<Self> {
        let bad = |m: &str| Error::corrupt("header", m);
        let short = |_| bad("truncated header");
        let magic = rd.take(4).map_err(short)?;
        if magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = rd.u8().map_err(short)?;
        if version != VERSION {
            return Err(Error::corrupt(
                "header",
                format!("unsupported version {version}"),
            ));
        }
        let mut f = [0u32; 7];
        for v in f.iter_mut() {
            *v = rd.u32().map_err(short)?;
        }
        let [rows, cols, src_rows, src_cols, src_bands, coded_bands, leading_zero_bands] = f;
        let enabled = match rd.u8().map_err(short)? {
            0 => false,
            1 => true,
            _ => return Err(bad("compensation flag must be 0 or 1")),
        };
        let lambda = rd.f64().map_err(short)?;
        let q_step = rd.u32().map_err(short)?;
        let compensation = CompensationConfig {
            lambda,
            q_step,
            enabled,
        };
        compensation
            .validate()
            .map_err(|e| Error::corrupt("header", e.to_string()))?;
        let n = rd.u32().map_err(short)? as usize;
        if n > rd.remaining() / 4 {
            return Err(bad("exclusion list longer than stream"));
        }
        let exclusions = (0..n)
            .map(|_| rd.u32())
            .collect::<Result<Vec<_>>>()
            .map_err(short)?;
        let header = StreamHeader {
            rows,
            cols,
            src_rows,
            src_cols,
            src_bands,
            coded_bands,
            leading_zero_bands,
            compensation,
            exclusions,
        };
        header.check()?;
        Ok(header)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::corrupt("header", m));
        if self.rows as usize != BAND_SIDE || self.cols as usize != BAND_SIDE {
            return bad(format!(
                "working geometry {}x{} is not 256x256",
                self.rows, self.cols
            ));
        }
        if self.src_rows == 0 || self.src_cols == 0 || self.src_bands == 0 {
            return bad("source dimensions must be positive".into());
        }
        if self.exclusions.windows(2).any(|w| w[0] >= w[1])
            || self.exclusions.iter().any(|&e| e >= self.src_bands)
        {
            return bad("exclusion list must be increasing and within the source bands".into());
        }
        if self.coded_bands as u64 + self.exclusions.len() as u64 != self.src_bands as u64 {
            return bad(format!(
                "{} coded + {} excluded bands != {} source bands",
                self.coded_bands,
                self.exclusions.len(),
                self.src_bands
            ));
        }
        if self.leading_zero_bands >= self.coded_bands {
            return bad("no band left after the leading zero bands".into());
        }
        Ok(())
    }

    /// Bands predicted by the network, after the lossless first band.
    pub fn predicted_bands(&self) -> usize {
        (self.coded_bands - self.leading_zero_bands - 1) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub tag: SegmentTag,
    pub body: Vec<u8>,
}

impl Segment {
    /// Bytes this segment occupies in the stream, tag and length included.
    pub fn wire_len(&self) -> usize {
        let mut len = Vec::new();
        varint::write_u64(&mut len, self.body.len() as u64);
        1 + len.len() + self.body.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub header: StreamHeader,
    pub segments: Vec<Segment>,
}

impl Bitstream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.header.write(&mut out);
        for seg in &self.segments {
            out.push(seg.tag as u8);
            varint::write_u64(&mut out, seg.body.len() as u64);
            out.extend_from_slice(&seg.body);
        }
        out
    }

    pub fn header_len(&self) -> usize {
        let mut out = Vec::new();
        self.header.write(&mut out);
        out.len()
    }

    pub fn byte_len(&self) -> usize {
        self.header_len() + self.segments.iter().map(Segment::wire_len).sum::<usize>()
    }

    /// Parses a stream and checks its segment grammar.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rd = varint::Reader::new(bytes);
        let header = StreamHeader::read(&mut rd)?;
        let mut segments = Vec::new();
        while !rd.is_empty() {
            let k = segments.len();
            let at = |what: &str| format!("segment {k} ({what})");
            let tag_byte = rd.u8()?;
            let tag = SegmentTag::from_byte(tag_byte).ok_or_else(|| {
                Error::corrupt(at("tag"), format!("unknown tag 0x{tag_byte:02x}"))
            })?;
            let len = rd
                .varint()
                .map_err(|_| Error::corrupt(at(tag.name()), "truncated length"))?;
            if len > rd.remaining() as u64 {
                return Err(Error::corrupt(
                    at(tag.name()),
                    format!("body of {len} bytes but only {} remain", rd.remaining()),
                ));
            }
            let body = rd.take(len as usize)?.to_vec();
            segments.push(Segment { tag, body });
        }
        let bs = Bitstream { header, segments };
        bs.check_grammar()?;
        Ok(bs)
    }

    pub fn check_grammar(&self) -> Result<()> {
        let violation = |k: usize, m: String| Err(Error::corrupt(format!("segment {k}"), m));
        let mut it = self.segments.iter().enumerate().peekable();
        match it.next() {
            Some((_, s)) if s.tag == SegmentTag::FirstBand => {}
            Some((k, s)) => {
                return violation(k, format!("expected first-band, found {}", s.tag.name()))
            }
            None => {
                return Err(Error::corrupt(
                    "segment 0",
                    "stream has no first-band segment",
                ))
            }
        }
        let mut bands = 0usize;
        while let Some((k, s)) = it.next() {
            if s.tag != SegmentTag::Params {
                return violation(k, format!("expected params, found {}", s.tag.name()));
            }
            match it.next() {
                Some((_, s)) if s.tag == SegmentTag::Ranges => {}
                Some((j, s)) => {
                    return violation(j, format!("expected ranges, found {}", s.tag.name()))
                }
                None => return violation(k + 1, "missing ranges segment".into()),
            }
            if let Some((j, s)) = it.peek() {
                if s.tag == SegmentTag::Offsets {
                    if !self.header.compensation.enabled {
                        return violation(*j, "offsets present with compensation disabled".into());
                    }
                    it.next();
                }
            }
            bands += 1;
        }
        if bands != self.header.predicted_bands() {
            return Err(Error::corrupt(
                "stream",
                format!(
                    "{bands} predicted bands, header expects {}",
                    self.header.predicted_bands()
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(coded: u32) -> StreamHeader {
        StreamHeader {
            rows: 256,
            cols: 256,
            src_rows: 10,
            src_cols: 12,
            src_bands: coded + 1,
            coded_bands: coded,
            leading_zero_bands: 0,
            compensation: CompensationConfig::default(),
            exclusions: vec![1],
        }
    }

    fn seg(tag: SegmentTag, n: usize) -> Segment {
        Segment {
            tag,
            body: vec![7; n],
        }
    }

    #[test]
    fn round_trip_and_lengths() {
        let bs = Bitstream {
            header: header(2),
            segments: vec![
                seg(SegmentTag::FirstBand, 300),
                seg(SegmentTag::Params, 20),
                seg(SegmentTag::Ranges, 40),
                seg(SegmentTag::Offsets, 3),
            ],
        };
        let bytes = bs.to_bytes();
        assert_eq!(&bytes[..4], b"BIPN");
        assert_eq!(bytes.len(), bs.byte_len());
        assert_eq!(Bitstream::from_bytes(&bytes).unwrap(), bs);
    }

    #[test]
    fn grammar_violations() {
        let mut bs = Bitstream {
            header: header(2),
            segments: vec![seg(SegmentTag::FirstBand, 1), seg(SegmentTag::Ranges, 40)],
        };
        assert!(bs.check_grammar().is_err());
        bs.segments = vec![seg(SegmentTag::FirstBand, 1)];
        assert!(bs.check_grammar().is_err());
        bs.segments = vec![
            seg(SegmentTag::FirstBand, 1),
            seg(SegmentTag::Params, 1),
            seg(SegmentTag::Ranges, 1),
            seg(SegmentTag::Offsets, 1),
            seg(SegmentTag::Offsets, 1),
        ];
        assert!(bs.check_grammar().is_err());
        bs.header.compensation.enabled = false;
        bs.segments.pop();
        assert!(bs.check_grammar().is_err());
        bs.segments.pop();
        assert!(bs.check_grammar().is_ok());
    }

    #[test]
    fn corrupt_headers() {
        let bs = Bitstream {
            header: header(1),
            segments: vec![seg(SegmentTag::FirstBand, 5)],
        };
        let good = bs.to_bytes();
        let mut flipped = good.clone();
        flipped[0] ^= 1;
        assert!(matches!(
            Bitstream::from_bytes(&flipped),
            Err(Error::CorruptStream { .. })
        ));
        let mut version = good.clone();
        version[4] = 9;
        assert!(Bitstream::from_bytes(&version).is_err());
        for cut in [3, 20, good.len() - 1] {
            assert!(Bitstream::from_bytes(&good[..cut]).is_err(), "cut at {cut}");
        }
        let mut tag = good.clone();
        let first_tag = bs.header_len();
        tag[first_tag] = 0x09;
        let err = Bitstream::from_bytes(&tag).unwrap_err().to_string();
        assert!(err.contains("segment 0"), "{err}");
    }
}
