//! The 16-10-16 predictor network.
//!
//! A `tansig` hidden layer feeds a linear output layer:
//!
//! ```text
//! hidden = tansig(W1 · x + b1)
//! output = W2 · hidden + b2
//! ```
//!
//! Parameters flatten in a fixed order, used by the Jacobian, the
//! quantizer and the bitstream alike: `w1` row-major, `b1`, `w2` row-major,
//! `b2`.

use crate::block_transform::BLOCK_LEN;
use crate::error::{Error, Result};

pub const INPUTS: usize = BLOCK_LEN;
pub const HIDDEN: usize = 10;
pub const OUTPUTS: usize = BLOCK_LEN;

pub const W1_LEN: usize = HIDDEN * INPUTS;
pub const B1_LEN: usize = HIDDEN;
pub const W2_LEN: usize = OUTPUTS * HIDDEN;
pub const B2_LEN: usize = OUTPUTS;
pub const PARAM_COUNT: usize = W1_LEN + B1_LEN + W2_LEN + B2_LEN;

pub const W1_OFFSET: usize = 0;
pub const B1_OFFSET: usize = W1_OFFSET + W1_LEN;
pub const W2_OFFSET: usize = B1_OFFSET + B1_LEN;
pub const B2_OFFSET: usize = W2_OFFSET + W2_LEN;

/// One column of network input or output.
pub type Column = [f64; BLOCK_LEN];

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub w1: [[f64; INPUTS]; HIDDEN],
    pub b1: [f64; HIDDEN],
    pub w2: [[f64; HIDDEN]; OUTPUTS],
    pub b2: [f64; OUTPUTS],
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            w1: [[0.0; INPUTS]; HIDDEN],
            b1: [0.0; HIDDEN],
            w2: [[0.0; HIDDEN]; OUTPUTS],
            b2: [0.0; OUTPUTS],
        }
    }
}

impl MlpParams {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(PARAM_COUNT);
        v.extend(self.w1.iter().flatten());
        v.extend(&self.b1);
        v.extend(self.w2.iter().flatten());
        v.extend(&self.b2);
        v
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        if theta.len() != PARAM_COUNT {
            return Err(Error::Dimension(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                theta.len()
            )));
        }
        let mut p = MlpParams::default();
        for (h, row) in p.w1.iter_mut().enumerate() {
            row.copy_from_slice(&theta[W1_OFFSET + h * INPUTS..W1_OFFSET + (h + 1) * INPUTS]);
        }
        p.b1.copy_from_slice(&theta[B1_OFFSET..W2_OFFSET]);
        for (r, row) in p.w2.iter_mut().enumerate() {
            row.copy_from_slice(&theta[W2_OFFSET + r * HIDDEN..W2_OFFSET + (r + 1) * HIDDEN]);
        }
        p.b2.copy_from_slice(&theta[B2_OFFSET..]);
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.is_finite())
    }

    /// Hidden activations for one input column.
    #[inline]
    pub fn hidden(&self, x: &Column) -> [f64; HIDDEN] {
        let mut a = [0.0; HIDDEN];
        for (h, out) in a.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..INPUTS {
                s += self.w1[h][i] * x[i];
            }
            *out = tansig(s + self.b1[h]);
        }
        a
    }

    /// Output column for precomputed hidden activations.
    #[inline]
    pub fn output(&self, a: &[f64; HIDDEN]) -> Column {
        let mut y = [0.0; OUTPUTS];
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for h in 0..HIDDEN {
                s += self.w2[r][h] * a[h];
            }
            *out = s + self.b2[r];
        }
        y
    }

    #[inline]
    pub fn predict(&self, x: &Column) -> Column {
        self.output(&self.hidden(x))
    }
}

/// Hyperbolic tangent sigmoid, `2 / (1 + exp(-2x)) - 1`.
///
/// Evaluated as `tanh`, which is the same function without the
/// cancellation the literal form suffers near zero.
#[inline]
pub fn tansig(x: f64) -> f64 {
    x.tanh()
}

/// Runs the network over every column. Dot products accumulate in index
/// order, then the bias is added, then the transfer function applied, so
/// encoder and decoder produce identical bits.
pub fn forward(params: &MlpParams, input: &[Column]) -> Result<Vec<Column>> {
    if input.is_empty() {
        return Err(Error::Dimension("forward needs at least one column".into()));
    }
    Ok(input.iter().map(|x| params.predict(x)).collect())
}

/// Mean of squared differences over all entries.
pub fn mse(pred: &[Column], target: &[Column]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Dimension(format!(
            "mse over {} vs {} columns",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Dimension("mse over zero columns".into()));
    }
    Ok(sum_sq_diff(pred, target) / (pred.len() * BLOCK_LEN) as f64)
}

pub(crate) fn sum_sq_diff(pred: &[Column], target: &[Column]) -> f64 {
    let mut acc = 0.0;
    for (p, t) in pred.iter().zip(target) {
        for r in 0..BLOCK_LEN {
            let d = p[r] - t[r];
            acc += d * d;
        }
    }
    acc
}
