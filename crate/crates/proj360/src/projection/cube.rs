//! Cube-face geometry shared by CMP, EAC, HEC, ACP and GCP.
//!
//! Each face has an outward axis and two in-face basis vectors; a point on
//! the cube surface is `axis + sc*u + tc*v` with cube coordinates
//! (sc, tc) in [-1, 1]^2. Equatorial faces use s eastward and t toward the
//! north pole; the PZ/NZ frames are chosen so the packed bottom row forms
//! an edge-continuous strip once rotated.

use crate::projection::packing::Face;
use crate::sphere::Direction;

#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceFrame {
    pub axis: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
}

/// Face frames in the fixed tie-break order PX, NX, PY, NY, PZ, NZ.
pub(crate) const CUBE_FRAMES: [(Face, FaceFrame); 6] = [
    (
        Face::Px,
        FaceFrame {
            axis: [1.0, 0.0, 0.0],
            u: [0.0, 1.0, 0.0],
            v: [0.0, 0.0, 1.0],
        },
    ),
    (
        Face::Nx,
        FaceFrame {
            axis: [-1.0, 0.0, 0.0],
            u: [0.0, -1.0, 0.0],
            v: [0.0, 0.0, 1.0],
        },
    ),
    (
        Face::Py,
        FaceFrame {
            axis: [0.0, 1.0, 0.0],
            u: [-1.0, 0.0, 0.0],
            v: [0.0, 0.0, 1.0],
        },
    ),
    (
        Face::Ny,
        FaceFrame {
            axis: [0.0, -1.0, 0.0],
            u: [1.0, 0.0, 0.0],
            v: [0.0, 0.0, 1.0],
        },
    ),
    (
        Face::Pz,
        FaceFrame {
            axis: [0.0, 0.0, 1.0],
            u: [0.0, -1.0, 0.0],
            v: [1.0, 0.0, 0.0],
        },
    ),
    (
        Face::Nz,
        FaceFrame {
            axis: [0.0, 0.0, -1.0],
            u: [0.0, -1.0, 0.0],
            v: [-1.0, 0.0, 0.0],
        },
    ),
];

pub(crate) fn frame_of(face: Face) -> &'static FaceFrame {
    CUBE_FRAMES
        .iter()
        .find(|(f, _)| *f == face)
        .map(|(_, fr)| fr)
        .expect("cube face")
}

/// True for the two pole faces (PZ, NZ); the HEC vertical warp differs
/// between pole and equator faces.
pub(crate) fn is_polar(face: Face) -> bool {
    matches!(face, Face::Pz | Face::Nz)
}

/// Picks the owning face by dominant component; exact ties resolve to the
/// first face in the fixed order PX, NX, PY, NY, PZ, NZ.
pub(crate) fn select_face(d: &Direction) -> Face {
    let (x, y, z) = (d.x(), d.y(), d.z());
    let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
    let m = ax.max(ay).max(az);
    if x > 0.0 && ax == m {
        Face::Px
    } else if x < 0.0 && ax == m {
        Face::Nx
    } else if y > 0.0 && ay == m {
        Face::Py
    } else if y < 0.0 && ay == m {
        Face::Ny
    } else if z > 0.0 {
        Face::Pz
    } else {
        Face::Nz
    }
}

/// Central projection of a direction onto the given face plane; returns
/// cube coordinates in [-1, 1]^2.
pub(crate) fn direction_to_cube(d: &Direction, face: Face) -> (f64, f64) {
    let fr = frame_of(face);
    let dv = [d.x(), d.y(), d.z()];
    let depth = dot(&dv, &fr.axis);
    debug_assert!(depth > 0.0);
    let sc = dot(&dv, &fr.u) / depth;
    let tc = dot(&dv, &fr.v) / depth;
    (sc.clamp(-1.0, 1.0), tc.clamp(-1.0, 1.0))
}

/// Point on the cube surface back to the sphere.
pub(crate) fn cube_to_direction(face: Face, sc: f64, tc: f64) -> Direction {
    let fr = frame_of(face);
    Direction::normalized(
        fr.axis[0] + sc * fr.u[0] + tc * fr.v[0],
        fr.axis[1] + sc * fr.u[1] + tc * fr.v[1],
        fr.axis[2] + sc * fr.u[2] + tc * fr.v[2],
    )
}

#[inline]
fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_axes_map_to_face_centers() {
        for (face, fr) in CUBE_FRAMES {
            let d = Direction::new(fr.axis[0], fr.axis[1], fr.axis[2]).unwrap();
            assert_eq!(select_face(&d), face);
            let (sc, tc) = direction_to_cube(&d, face);
            assert_eq!((sc, tc), (0.0, 0.0));
        }
    }

    #[test]
    fn corner_tie_break_prefers_px() {
        let d = Direction::normalized(1.0, 1.0, 1.0);
        assert_eq!(select_face(&d), Face::Px);
        let (sc, tc) = direction_to_cube(&d, Face::Px);
        assert_eq!((sc, tc), (1.0, 1.0));
    }

    #[test]
    fn frames_are_orthonormal() {
        for (_, fr) in CUBE_FRAMES {
            assert_eq!(dot(&fr.axis, &fr.u), 0.0);
            assert_eq!(dot(&fr.axis, &fr.v), 0.0);
            assert_eq!(dot(&fr.u, &fr.v), 0.0);
            assert_eq!(dot(&fr.u, &fr.u), 1.0);
            assert_eq!(dot(&fr.v, &fr.v), 1.0);
        }
    }

    #[test]
    fn bottom_row_strip_is_edge_continuous() {
        // NZ right edge (t=+1 after rotation lands left of NX's t=-1 edge):
        // the shared packed edges must be the same sphere points.
        for q in [-0.75, -0.25, 0.25, 0.75] {
            // NZ tile right edge = NX tile left edge.
            let a = cube_to_direction(Face::Nz, q, 1.0);
            let b = cube_to_direction(Face::Nx, q, -1.0);
            assert!(a.angle_to(&b) < 1e-12);
            // NX tile right edge = PZ tile left edge.
            let a = cube_to_direction(Face::Nx, q, 1.0);
            let b = cube_to_direction(Face::Pz, q, -1.0);
            assert!(a.angle_to(&b) < 1e-12);
        }
    }
}
