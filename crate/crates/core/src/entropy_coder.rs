//! Order-0 canonical Huffman coding of byte strings.
//!
//! Wire layout of a segment:
//!
//! ```text
//! mode: u8            0 = raw, 1 = huffman, 2 = single symbol
//! original_len: varint
//! body:
//!   raw      the bytes themselves
//!   huffman  256 code lengths as 4-bit nibbles (128 bytes, even symbol in
//!            the high nibble), then the code bits, most significant first,
//!            zero-padded to a byte
//!   single   the repeated symbol (1 byte)
//! ```
//!
//! Code construction is fully determined by the input: equal weights are
//! merged smaller-symbol-first, where a subtree's symbol is the smallest
//! symbol it contains, and codes are handed out in `(length, symbol)` order.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::varint;

/// Longest permitted code.
pub const MAX_CODE_LEN: u8 = 15;

const TABLE_BYTES: usize = 128;
const SEGMENT: &str = "entropy segment";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodingMode {
    Raw = 0,
    Huffman = 1,
    SingleSymbol = 2,
}

impl CodingMode {
    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(CodingMode::Raw),
            1 => Ok(CodingMode::Huffman),
            2 => Ok(CodingMode::SingleSymbol),
            _ => Err(Error::corrupt(SEGMENT, format!("unknown coding mode {b}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSegment {
    pub mode: CodingMode,
    pub original_len: usize,
    pub payload: Vec<u8>,
    /// Code length per byte value; present in Huffman mode only.
    pub table: Option<[u8; 256]>,
}

impl CodedSegment {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload.len() + TABLE_BYTES + 6);
        out.push(self.mode as u8);
        varint::write_u64(&mut out, self.original_len as u64);
        if let Some(table) = &self.table {
            for pair in table.chunks_exact(2) {
                out.push((pair[0] << 4) | pair[1]);
            }
        }
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parses a segment occupying all of `bytes`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rd = varint::Reader::new(bytes);
        let mode = CodingMode::from_byte(rd.u8().map_err(|_| truncated("mode byte"))?)?;
        let original_len = rd.varint().map_err(|_| truncated("length"))? as usize;
        let table = if mode == CodingMode::Huffman {
            let packed = rd.take(TABLE_BYTES).map_err(|_| truncated("code table"))?;
            let mut table = [0u8; 256];
            for (i, &b) in packed.iter().enumerate() {
                table[2 * i] = b >> 4;
                table[2 * i + 1] = b & 0x0f;
            }
            Some(table)
        } else {
            None
        };
        Ok(CodedSegment {
            mode,
            original_len,
            payload: rd.rest().to_vec(),
            table,
        })
    }

    pub fn wire_len(&self) -> usize {
        let mut len = Vec::new();
        varint::write_u64(&mut len, self.original_len as u64);
        1 + len.len() + self.table.map_or(0, |_| TABLE_BYTES) + self.payload.len()
    }
}

fn truncated(what: &str) -> Error {
    Error::corrupt(SEGMENT, format!("truncated {what}"))
}

/// Stores `data` uncompressed.
pub fn encode_raw(data: &[u8]) -> CodedSegment {
    CodedSegment {
        mode: CodingMode::Raw,
        original_len: data.len(),
        payload: data.to_vec(),
        table: None,
    }
}

/// Huffman-codes `data`, falling back to raw when that is no larger, and
/// to single-symbol mode for a one-letter alphabet.
pub fn encode_bytes(data: &[u8]) -> CodedSegment {
    let mut freq = [0u64; 256];
    for &b in data {
        freq[b as usize] += 1;
    }
    let distinct = freq.iter().filter(|&&f| f > 0).count();
    match distinct {
        0 => return encode_raw(data),
        1 => {
            return CodedSegment {
                mode: CodingMode::SingleSymbol,
                original_len: data.len(),
                payload: vec![data[0]],
                table: None,
            }
        }
        _ => {}
    }
    let lengths = code_lengths(&freq);
    let bits: u64 = freq.iter().zip(&lengths).map(|(&f, &l)| f * l as u64).sum();
    let coded = TABLE_BYTES as u64 + bits.div_ceil(8);
    if coded >= data.len() as u64 {
        return encode_raw(data);
    }
    let codes = canonical_codes(&lengths);
    let mut w = BitWriter::with_capacity(bits.div_ceil(8) as usize);
    for &b in data {
        let (code, len) = codes[b as usize];
        w.put(code, len);
    }
    CodedSegment {
        mode: CodingMode::Huffman,
        original_len: data.len(),
        payload: w.finish(),
        table: Some(lengths),
    }
}

pub fn decode_bytes(seg: &CodedSegment) -> Result<Vec<u8>> {
    match seg.mode {
        CodingMode::Raw => {
            if seg.payload.len() != seg.original_len {
                return Err(Error::corrupt(
                    SEGMENT,
                    format!(
                        "raw payload {} bytes, header says {}",
                        seg.payload.len(),
                        seg.original_len
                    ),
                ));
            }
            Ok(seg.payload.clone())
        }
        CodingMode::SingleSymbol => match seg.payload.as_slice() {
            [s] => Ok(vec![*s; seg.original_len]),
            _ => Err(Error::corrupt(
                SEGMENT,
                "single-symbol body must be one byte",
            )),
        },
        CodingMode::Huffman => {
            let table = seg
                .table
                .as_ref()
                .ok_or_else(|| Error::corrupt(SEGMENT, "huffman segment without table"))?;
            decode_huffman(table, &seg.payload, seg.original_len)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct NodeKey {
    weight: u64,
    min_symbol: u8,
}

/// Huffman code lengths for the nonzero entries of `freq`, length-limited
/// to [`MAX_CODE_LEN`].
fn code_lengths(freq: &[u64; 256]) -> [u8; 256] {
    limit_lengths(&tree_depths(freq))
}

/// Leaf depths of the unrestricted Huffman tree.
fn tree_depths(freq: &[u64; 256]) -> [u32; 256] {
    // Node storage: leaves 0..256, internal nodes appended.
    let mut parent: Vec<usize> = vec![usize::MAX; 256];
    let mut heap = BinaryHeap::new();
    for (s, &f) in freq.iter().enumerate() {
        if f > 0 {
            heap.push(Reverse((
                NodeKey {
                    weight: f,
                    min_symbol: s as u8,
                },
                s,
            )));
        }
    }
    while heap.len() > 1 {
        let Reverse((ka, a)) = heap.pop().unwrap();
        let Reverse((kb, b)) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a] = id;
        parent[b] = id;
        let key = NodeKey {
            weight: ka.weight + kb.weight,
            min_symbol: ka.min_symbol.min(kb.min_symbol),
        };
        heap.push(Reverse((key, id)));
    }
    let mut depth = vec![0u32; parent.len()];
    // Parents are created after their children, so walk ids downward.
    for id in (0..parent.len()).rev() {
        if parent[id] != usize::MAX {
            depth[id] = depth[parent[id]] + 1;
        }
    }
    let mut lengths = [0u32; 256];
    for s in 0..256 {
        if freq[s] > 0 {
            lengths[s] = depth[s];
        }
    }
    lengths
}

/// Rebalances code lengths so none exceeds [`MAX_CODE_LEN`], moving the
/// deepest leaves up while keeping the prefix code complete.
fn limit_lengths(lengths: &[u32; 256]) -> [u8; 256] {
    let max = MAX_CODE_LEN as usize;
    let longest = *lengths.iter().max().unwrap() as usize;
    let mut out = [0u8; 256];
    if longest <= max {
        for (o, &l) in out.iter_mut().zip(lengths) {
            *o = l as u8;
        }
        return out;
    }
    let mut count = vec![0usize; longest + 1];
    for &l in lengths.iter().filter(|&&l| l > 0) {
        count[l as usize] += 1;
    }
    for i in (max + 1..=longest).rev() {
        while count[i] > 0 {
            let mut j = i - 2;
            while count[j] == 0 {
                j -= 1;
            }
            count[i] -= 2;
            count[i - 1] += 1;
            count[j + 1] += 2;
            count[j] -= 1;
        }
    }
    // Shortest codes go to the symbols that had the shortest codes before.
    let mut order: Vec<usize> = (0..256).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut it = order.into_iter();
    for (len, &n) in count.iter().enumerate().take(max + 1) {
        for _ in 0..n {
            out[it.next().unwrap()] = len as u8;
        }
    }
    out
}

/// `(code, length)` per symbol, assigned in `(length, symbol)` order.
fn canonical_codes(lengths: &[u8; 256]) -> [(u32, u8); 256] {
    let mut order: Vec<usize> = (0..256).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut codes = [(0u32, 0u8); 256];
    let mut code = 0u32;
    let mut prev = 0u8;
    for s in order {
        let len = lengths[s];
        code <<= len - prev;
        codes[s] = (code, len);
        code += 1;
        prev = len;
    }
    codes
}

fn decode_huffman(lengths: &[u8; 256], payload: &[u8], original_len: usize) -> Result<Vec<u8>> {
    let max = MAX_CODE_LEN as usize;
    let mut count = [0u32; 16];
    for &l in lengths.iter() {
        if l as usize > max {
            return Err(Error::corrupt(
                SEGMENT,
                format!("code length {l} exceeds {max}"),
            ));
        }
        if l > 0 {
            count[l as usize] += 1;
        }
    }
    let kraft: u64 = (1..=max).map(|l| (count[l] as u64) << (max - l)).sum();
    if kraft > 1 << max || kraft == 0 {
        return Err(Error::corrupt(SEGMENT, "invalid code table"));
    }
    let mut order: Vec<u8> = (0..=255u8).filter(|&s| lengths[s as usize] > 0).collect();
    order.sort_by_key(|&s| (lengths[s as usize], s));
    // first[l]: first canonical code of length l; index[l]: its position in `order`.
    let mut first = [0u32; 17];
    let mut index = [0u32; 17];
    let mut code = 0u32;
    let mut pos = 0u32;
    for l in 1..=max {
        first[l] = code;
        index[l] = pos;
        code = (code + count[l]) << 1;
        pos += count[l];
    }

    let total_bits = payload.len() * 8;
    let mut bit = 0usize;
    let mut out = Vec::with_capacity(original_len);
    while out.len() < original_len {
        let mut code = 0u32;
        let mut len = 0usize;
        loop {
            if bit >= total_bits {
                return Err(Error::corrupt(SEGMENT, "payload ends mid-symbol"));
            }
            let b = (payload[bit >> 3] >> (7 - (bit & 7))) & 1;
            bit += 1;
            code = (code << 1) | b as u32;
            len += 1;
            if len > max {
                return Err(Error::corrupt(SEGMENT, "bit pattern matches no code"));
            }
            let offset = code.wrapping_sub(first[len]);
            if code >= first[len] && offset < count[len] {
                out.push(order[(index[len] + offset) as usize]);
                break;
            }
        }
    }
    if bit.div_ceil(8) != payload.len() {
        return Err(Error::corrupt(SEGMENT, "trailing bytes after last symbol"));
    }
    Ok(out)
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    fn with_capacity(n: usize) -> Self {
        BitWriter {
            out: Vec::with_capacity(n),
            acc: 0,
            nbits: 0,
        }
    }

    fn put(&mut self, code: u32, len: u8) {
        self.acc = (self.acc << len) | code as u64;
        self.nbits += len as u32;
        while self.nbits >= 8 {
            self.nbits -= 8;
            self.out.push((self.acc >> self.nbits) as u8);
        }
        self.acc &= (1u64 << self.nbits) - 1;
    }

    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            self.out.push((self.acc << (8 - self.nbits)) as u8);
        }
        self.out
    }
}
