//! 360-degree video projection toolkit: resampling between sphere-to-plane
//! projection formats, raw YUV handling, PSNR/WS-PSNR quality metrics,
//! Bjontegaard-delta rate-distortion analysis, and a codec-in-the-loop
//! evaluation pipeline with pluggable external codecs.
//!
//! The crate is primarily a library; see the `examples/` directory for one
//! runnable example per capability and the `proj360` binary for a thin CLI
//! over the same entry points.

pub mod bd;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod pattern;
pub mod pipeline;
pub mod projection;
pub mod resample;
pub mod sphere;
pub mod yuv;

pub mod cli;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{Error, Result};
pub use frame::{ChromaFormat, Frame, FrameGeometry, Plane, RgbFrame};
pub use projection::{forward_map, inverse_map, Format, ProjectionSpec};
pub use sphere::{Direction, LonLat};
