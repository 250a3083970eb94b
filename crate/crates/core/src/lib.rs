//! Lossy and near-lossless compression of hyperspectral cubes.
//!
//! Each band is predicted from the previously reconstructed band by a small
//! 16-10-16 network trained per band. The network parameters travel in the
//! bitstream, optionally followed by sparse offsets that bound the relative
//! error of every pixel.
//!
//! ```
//! use hsicodec::{encode_cube, decode_cube, EncoderConfig, HyperCube, Band};
//!
//! let a = Band::new(256, 256, (0..65536).map(|p| (p % 256) as i32).collect()).unwrap();
//! let cube = HyperCube::from_bands(&[a]).unwrap();
//! let stream = encode_cube(&cube, &EncoderConfig::default()).unwrap();
//! assert_eq!(decode_cube(&stream).unwrap(), cube);
//! ```

// Index loops mirror the matrix formulas; `!(x > 0.0)` rejects NaN on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bitstream;
pub mod block_transform;
pub mod codec_pipeline;
pub mod cube_io;
pub mod entropy_coder;
pub mod error;
pub mod lm_trainer;
pub mod mlp;
pub mod param_quantizer;
pub mod quality_metrics;
pub mod residual_compensation;
mod round;
pub mod varint;

pub use bitstream::{Bitstream, Segment, SegmentTag, StreamHeader};
pub use codec_pipeline::{
    bitrate, decode_bands, decode_cube, encode_cube, encode_cube_detailed, predicted_bitrate,
    Encoded, EncoderConfig,
};
pub use cube_io::{load_cube, open_cube, store_cube, Band, CubeHeader, HyperCube};
pub use error::{Error, Result};
pub use lm_trainer::{train, StopReason, TrainConfig, TrainReport};
pub use mlp::MlpParams;
pub use residual_compensation::{CompensationConfig, OffsetMap};

/// Runs the guide's code samples as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/cubes.md")]
    mod cubes {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/quantization.md")]
    mod quantization {}
    #[doc = include_str!("../../../book/src/entropy.md")]
    mod entropy {}
    #[doc = include_str!("../../../book/src/compensation.md")]
    mod compensation {}
    #[doc = include_str!("../../../book/src/bitstream.md")]
    mod bitstream {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
