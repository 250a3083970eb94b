//! 4×4 block vectorization of a band.
//!
//! Blocks are scanned row-major over the band; within a block, pixels are
//! scanned row-major. Column `64 * br + bc` of the result holds block
//! `(br, bc)` and entry `4 * (i % 4) + (j % 4)` of that column holds pixel
//! `(i, j)`.

use crate::error::{Error, Result};

/// Pixels per block, and the width of the network's input and output.
pub const BLOCK_LEN: usize = 16;

const EDGE: usize = 4;

/// A band rearranged into one 16-vector per 4×4 block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub columns: Vec<[f64; BLOCK_LEN]>,
    pub block_rows: usize,
    pub block_cols: usize,
}

impl BlockMatrix {
    pub fn new(
        columns: Vec<[f64; BLOCK_LEN]>,
        block_rows: usize,
        block_cols: usize,
    ) -> Result<Self> {
        if columns.len() != block_rows * block_cols {
            return Err(Error::Dimension(format!(
                "{} columns for a {block_rows}x{block_cols} block grid",
                columns.len()
            )));
        }
        Ok(BlockMatrix {
            columns,
            block_rows,
            block_cols,
        })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Band height and width this matrix unpacks to.
    pub fn band_shape(&self) -> (usize, usize) {
        (self.block_rows * EDGE, self.block_cols * EDGE)
    }
}

/// Rearranges a row-major `rows × cols` band; both sides must be multiples
/// of four (256 × 256 in the codec).
pub fn band_to_blocks(values: &[f64], rows: usize, cols: usize) -> Result<BlockMatrix> {
    if rows == 0 || cols == 0 || !rows.is_multiple_of(EDGE) || !cols.is_multiple_of(EDGE) {
        return Err(Error::Dimension(format!(
            "band {rows}x{cols} does not tile into 4x4 blocks"
        )));
    }
    if values.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "band {rows}x{cols} needs {} values, got {}",
            rows * cols,
            values.len()
        )));
    }
    let (block_rows, block_cols) = (rows / EDGE, cols / EDGE);
    let mut columns = Vec::with_capacity(block_rows * block_cols);
    for br in 0..block_rows {
        for bc in 0..block_cols {
            let mut col = [0.0; BLOCK_LEN];
            for di in 0..EDGE {
                let start = (br * EDGE + di) * cols + bc * EDGE;
                col[di * EDGE..(di + 1) * EDGE].copy_from_slice(&values[start..start + EDGE]);
            }
            columns.push(col);
        }
    }
    Ok(BlockMatrix {
        columns,
        block_rows,
        block_cols,
    })
}

/// Exact inverse of [`band_to_blocks`]; returns the row-major band values.
pub fn blocks_to_band(bm: &BlockMatrix) -> Result<Vec<f64>> {
    if bm.columns.len() != bm.block_rows * bm.block_cols || bm.columns.is_empty() {
        return Err(Error::Dimension(format!(
            "{} columns for a {}x{} block grid",
            bm.columns.len(),
            bm.block_rows,
            bm.block_cols
        )));
    }
    let (rows, cols) = bm.band_shape();
    let mut values = vec![0.0; rows * cols];
    for (c, col) in bm.columns.iter().enumerate() {
        let (br, bc) = (c / bm.block_cols, c % bm.block_cols);
        for di in 0..EDGE {
            let start = (br * EDGE + di) * cols + bc * EDGE;
            values[start..start + EDGE].copy_from_slice(&col[di * EDGE..(di + 1) * EDGE]);
        }
    }
    Ok(values)
}
