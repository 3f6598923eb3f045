//! Deterministic, smooth test content defined directly on the sphere.
//!
//! Each channel is a low-order polynomial in the direction components
//! (degree <= 4), so the signal is bandlimited to a few cycles around the
//! sphere and resamples cleanly between projection formats. Frames of a
//! clip rotate the pattern around the polar axis for temporal motion.

use crate::error::Result;
use crate::frame::{Frame, Plane};
use crate::projection::{forward_map, ProjectionSpec};
use crate::sphere::Direction;

use rayon::prelude::*;

/// Luma pattern in [0.1, 0.9].
pub fn pattern_y(d: &Direction) -> f64 {
    let (x, y, z) = (d.x(), d.y(), d.z());
    let g = 0.45 * x + 0.25 * y * z + 0.18 * (x * x - y * y) + 0.12 * x * y * z;
    0.5 + 0.4 * g
}

/// First chroma pattern in [0.2, 0.8].
pub fn pattern_u(d: &Direction) -> f64 {
    let (x, y, z) = (d.x(), d.y(), d.z());
    let g = 0.55 * y + 0.30 * x * z + 0.15 * (3.0 * z * z - 1.0) / 2.0;
    0.5 + 0.3 * g
}

/// Second chroma pattern in [0.2, 0.8].
pub fn pattern_v(d: &Direction) -> f64 {
    let (x, y, z) = (d.x(), d.y(), d.z());
    let g = 0.5 * z + 0.3 * x * y + 0.2 * (x * x - z * z);
    0.5 + 0.3 * g
}

fn rotate_lon(d: &Direction, angle: f64) -> Direction {
    let (sin_a, cos_a) = angle.sin_cos();
    Direction::normalized(
        cos_a * d.x() + sin_a * d.y(),
        -sin_a * d.x() + cos_a * d.y(),
        d.z(),
    )
}

/// Renders one frame of the pattern in the given projection, rotated by
/// `phase` radians around the polar axis.
pub fn render_frame(spec: &ProjectionSpec, phase: f64) -> Result<Frame> {
    let geometry = *spec.coded_geometry();
    let max = geometry.max_value() as f64;
    let mut frame = Frame::new(geometry);
    let render = |plane: &mut Plane, f: &(dyn Fn(&Direction) -> f64 + Sync)| -> Result<()> {
        let (w, h) = (plane.width, plane.height);
        plane
            .data
            .par_chunks_mut(w)
            .enumerate()
            .try_for_each(|(j, row)| -> Result<()> {
                let v = (j as f64 + 0.5) / h as f64;
                for (i, out) in row.iter_mut().enumerate() {
                    let u = (i as f64 + 0.5) / w as f64;
                    let dir = rotate_lon(&forward_map(spec, u, v)?, phase);
                    *out = (f(&dir) * max).round().clamp(0.0, max) as u16;
                }
                Ok(())
            })
    };
    render(&mut frame.y, &pattern_y)?;
    render(&mut frame.u, &pattern_u)?;
    render(&mut frame.v, &pattern_v)?;
    Ok(frame)
}

/// Renders a clip with a slow rotation (0.02 rad/frame) for codec-visible
/// motion.
pub fn render_clip(spec: &ProjectionSpec, frames: usize) -> Result<Vec<Frame>> {
    (0..frames)
        .map(|t| render_frame(spec, t as f64 * 0.02))
        .collect()
}
