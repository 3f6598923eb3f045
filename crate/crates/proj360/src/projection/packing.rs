//! Arrangement of projection faces into one rectangular packed frame.
//!
//! Cube family (3x2 grid): top row NY, PX, PY left to right; bottom row
//! NZ, NX, PZ with the bottom-row face content rotated 90 degrees
//! clockwise, which keeps the bottom strip (south pole, back, north pole)
//! edge-continuous. ECP: top row E0, E1, E2; bottom row E3, TOP, BOTTOM,
//! no rotation. ERP/AEP: a single face spans the frame.

use crate::error::{Error, Result};
use crate::projection::Format;

/// Identifier of one projection face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    // Cube family, in tie-break order.
    Px,
    Nx,
    Py,
    Ny,
    Pz,
    Nz,
    // ECP tiles, in tie-break order.
    E0,
    E1,
    E2,
    E3,
    Top,
    Bottom,
    // Single face of ERP/AEP.
    F0,
}

/// A face identifier plus face-local coordinates in [-1, 1]^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceCoord {
    pub face: Face,
    pub s: f64,
    pub t: f64,
}

/// Tile grid of the cube-family packing: (row, column) per face.
const CUBE_TILES: [(Face, usize, usize); 6] = [
    (Face::Ny, 0, 0),
    (Face::Px, 0, 1),
    (Face::Py, 0, 2),
    (Face::Nz, 1, 0),
    (Face::Nx, 1, 1),
    (Face::Pz, 1, 2),
];

const ECP_TILES: [(Face, usize, usize); 6] = [
    (Face::E0, 0, 0),
    (Face::E1, 0, 1),
    (Face::E2, 0, 2),
    (Face::E3, 1, 0),
    (Face::Top, 1, 1),
    (Face::Bottom, 1, 2),
];

fn tile_of(format: Format, face: Face) -> Result<(usize, usize)> {
    let table: &[(Face, usize, usize)] = match format {
        Format::Erp | Format::Aep => {
            if face == Face::F0 {
                return Ok((0, 0));
            }
            &[]
        }
        Format::Ecp => &ECP_TILES,
        _ => &CUBE_TILES,
    };
    table
        .iter()
        .find(|(f, _, _)| *f == face)
        .map(|&(_, r, c)| (r, c))
        .ok_or_else(|| Error::Domain(format!("face {face:?} is not valid for format {format}")))
}

/// Largest representable value below 1.0, used to keep packed coordinates
/// inside [0, 1) at exact tile edges.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// Face-local coordinates -> packed frame coordinates in [0, 1)^2.
pub fn packing_place(format: Format, face: Face, s: f64, t: f64) -> Result<(f64, f64)> {
    if !(-1.0..=1.0).contains(&s) || !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "face coordinates ({s}, {t}) outside [-1, 1]^2"
        )));
    }
    let (row, col) = tile_of(format, face)?;
    if matches!(format, Format::Erp | Format::Aep) {
        return Ok((
            (0.5 * (s + 1.0)).min(ONE_BELOW),
            (0.5 * (1.0 - t)).min(ONE_BELOW),
        ));
    }
    // Tile-local coordinates: p to the right, q downward, each in [0, 1].
    let (p, q) = if row == 1 && format != Format::Ecp {
        // Bottom cube row, content rotated 90 degrees clockwise.
        (0.5 * (1.0 + t), 0.5 * (s + 1.0))
    } else {
        (0.5 * (s + 1.0), 0.5 * (1.0 - t))
    };
    let u = ((col as f64 + p) / 3.0).min(ONE_BELOW);
    let v = ((row as f64 + q) / 2.0).min(ONE_BELOW);
    Ok((u, v))
}

/// Packed frame coordinates -> owning face and face-local coordinates.
pub fn packing_locate(format: Format, u: f64, v: f64) -> Result<FaceCoord> {
    if !(0.0..1.0).contains(&u) || !(0.0..1.0).contains(&v) {
        return Err(Error::Domain(format!(
            "packed coordinates ({u}, {v}) outside [0, 1)^2"
        )));
    }
    if matches!(format, Format::Erp | Format::Aep) {
        return Ok(FaceCoord {
            face: Face::F0,
            s: 2.0 * u - 1.0,
            t: 1.0 - 2.0 * v,
        });
    }
    let col = ((u * 3.0) as usize).min(2);
    let row = ((v * 2.0) as usize).min(1);
    let p = u * 3.0 - col as f64;
    let q = v * 2.0 - row as f64;
    let table = if format == Format::Ecp {
        &ECP_TILES
    } else {
        &CUBE_TILES
    };
    let face = table
        .iter()
        .find(|&&(_, r, c)| r == row && c == col)
        .map(|&(f, _, _)| f)
        .expect("3x2 grid is fully covered");
    let (s, t) = if row == 1 && format != Format::Ecp {
        (2.0 * q - 1.0, 2.0 * p - 1.0)
    } else {
        (2.0 * p - 1.0, 1.0 - 2.0 * q)
    };
    Ok(FaceCoord { face, s, t })
}
