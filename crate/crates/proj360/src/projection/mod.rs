//! Projection formats: bijections (up to seams) between packed-frame unit
//! coordinates and directions on the image sphere.

mod cube;
mod ecp;
mod packing;
mod warp;

pub use packing::{packing_locate, packing_place, Face, FaceCoord};
pub use warp::{warp_eval, warp_invert, WarpFunction, DEFAULT_POLY_COEFFS};

use crate::error::{Error, Result};
use crate::frame::{ChromaFormat, FrameGeometry};
use crate::sphere::{direction_to_lonlat, lonlat_to_direction, Direction, LonLat};

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

/// The supported projection formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Erp,
    Aep,
    Cmp,
    Eac,
    Hec,
    Acp,
    Gcp,
    Ecp,
}

impl Format {
    pub const ALL: [Format; 8] = [
        Format::Erp,
        Format::Aep,
        Format::Cmp,
        Format::Eac,
        Format::Hec,
        Format::Acp,
        Format::Gcp,
        Format::Ecp,
    ];

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "erp" => Ok(Format::Erp),
            "aep" => Ok(Format::Aep),
            "cmp" => Ok(Format::Cmp),
            "eac" => Ok(Format::Eac),
            "hec" => Ok(Format::Hec),
            "acp" => Ok(Format::Acp),
            "gcp" => Ok(Format::Gcp),
            "ecp" => Ok(Format::Ecp),
            other => Err(Error::Config(format!("unknown projection format {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Format::Erp => "erp",
            Format::Aep => "aep",
            Format::Cmp => "cmp",
            Format::Eac => "eac",
            Format::Hec => "hec",
            Format::Acp => "acp",
            Format::Gcp => "gcp",
            Format::Ecp => "ecp",
        }
    }

    /// True for the formats packed as a 3x2 grid of square tiles.
    pub fn is_tiled(&self) -> bool {
        !matches!(self, Format::Erp | Format::Aep)
    }

    /// True for the warped-cube formats.
    pub fn is_cube_family(&self) -> bool {
        matches!(
            self,
            Format::Cmp | Format::Eac | Format::Hec | Format::Acp | Format::Gcp
        )
    }

    /// Default coded resolution (width, height). GCP deliberately shares the
    /// cube-family grid since it is realized as the parametric cube here.
    pub fn default_coded_size(&self) -> (usize, usize) {
        match self {
            Format::Erp | Format::Aep => (2048, 1024),
            _ => (1800, 1200),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A projection format plus warp coefficients and the coded frame geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSpec {
    format: Format,
    /// Polynomial (a, b) used on the horizontal face axis where the format
    /// calls for the polynomial family.
    horiz_coeffs: (f64, f64),
    /// Polynomial (a, b) used on the vertical face axis.
    vert_coeffs: (f64, f64),
    coded_geometry: FrameGeometry,
}

impl ProjectionSpec {
    pub fn new(format: Format, coded_geometry: FrameGeometry) -> Result<Self> {
        if format.is_tiled() {
            let w = coded_geometry.width;
            let h = coded_geometry.height;
            if w % 3 != 0 || h % 2 != 0 || w / 3 != h / 2 {
                return Err(Error::Config(format!(
                    "{format} needs a 3x2 grid of square tiles, got {w}x{h}"
                )));
            }
        }
        Ok(ProjectionSpec {
            format,
            horiz_coeffs: DEFAULT_POLY_COEFFS,
            vert_coeffs: DEFAULT_POLY_COEFFS,
            coded_geometry,
        })
    }

    /// Spec with the format's default coded resolution.
    pub fn with_defaults(format: Format, bit_depth: u8, chroma: ChromaFormat) -> Result<Self> {
        let (w, h) = format.default_coded_size();
        ProjectionSpec::new(format, FrameGeometry::new(w, h, bit_depth, chroma)?)
    }

    /// Builds from a text name ("erp" ... "ecp"); used by the CLI and the
    /// run configuration.
    pub fn from_name(name: &str, coded_geometry: FrameGeometry) -> Result<Self> {
        ProjectionSpec::new(Format::from_name(name)?, coded_geometry)
    }

    /// Overrides the polynomial warp coefficients (validated; only ACP, GCP
    /// and HEC read them).
    pub fn with_warp_coeffs(mut self, horiz: (f64, f64), vert: (f64, f64)) -> Result<Self> {
        WarpFunction::polynomial(horiz.0, horiz.1)?;
        WarpFunction::polynomial(vert.0, vert.1)?;
        self.horiz_coeffs = horiz;
        self.vert_coeffs = vert;
        Ok(self)
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn coded_geometry(&self) -> &FrameGeometry {
        &self.coded_geometry
    }

    pub fn warp_coeffs(&self) -> ((f64, f64), (f64, f64)) {
        (self.horiz_coeffs, self.vert_coeffs)
    }

    /// The (horizontal, vertical) warps to apply on a given cube face.
    fn face_warps(&self, face: Face) -> (WarpFunction, WarpFunction) {
        let poly_h = WarpFunction::Polynomial {
            a: self.horiz_coeffs.0,
            b: self.horiz_coeffs.1,
        };
        let poly_v = WarpFunction::Polynomial {
            a: self.vert_coeffs.0,
            b: self.vert_coeffs.1,
        };
        match self.format {
            Format::Cmp => (WarpFunction::Identity, WarpFunction::Identity),
            Format::Eac => (WarpFunction::Tangent, WarpFunction::Tangent),
            Format::Acp | Format::Gcp => (poly_h, poly_v),
            Format::Hec => {
                // Tangent everywhere except the vertical axis of the four
                // equator faces.
                if cube::is_polar(face) {
                    (WarpFunction::Tangent, WarpFunction::Tangent)
                } else {
                    (WarpFunction::Tangent, poly_v)
                }
            }
            _ => unreachable!("not a cube-family format"),
        }
    }

    /// Key uniquely identifying the mapping (used by resample-map caches).
    pub(crate) fn mapping_key(&self) -> SpecKey {
        SpecKey {
            format: self.format,
            h: (self.horiz_coeffs.0.to_bits(), self.horiz_coeffs.1.to_bits()),
            v: (self.vert_coeffs.0.to_bits(), self.vert_coeffs.1.to_bits()),
            geometry: self.coded_geometry,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct SpecKey {
    format: Format,
    h: (u64, u64),
    v: (u64, u64),
    geometry: FrameGeometry,
}

/// Packed unit coordinates -> sphere direction.
pub fn forward_map(spec: &ProjectionSpec, u: f64, v: f64) -> Result<Direction> {
    let fc = packing_locate(spec.format, u, v)?;
    Ok(face_to_direction(spec, fc.face, fc.s, fc.t))
}

/// Sphere direction -> owning face and packed unit coordinates.
pub fn inverse_map(spec: &ProjectionSpec, d: &Direction) -> Result<(FaceCoord, (f64, f64))> {
    let fc = direction_to_face_coord(spec, d);
    let uv = packing_place(spec.format, fc.face, fc.s, fc.t)?;
    Ok((fc, uv))
}

fn face_to_direction(spec: &ProjectionSpec, face: Face, s: f64, t: f64) -> Direction {
    match spec.format {
        Format::Erp => {
            let lon = s * PI;
            let lat = t * FRAC_PI_2;
            lonlat_to_direction(LonLat::new(lon, lat).expect("rect latitude in range"))
        }
        Format::Aep => {
            let lon = s * PI;
            let lat = t.clamp(-1.0, 1.0).asin();
            lonlat_to_direction(LonLat::new(lon, lat).expect("rect latitude in range"))
        }
        Format::Ecp => ecp::face_to_direction(face, s, t),
        _ => {
            let (wh, wv) = spec.face_warps(face);
            let sc = warp_eval(&wh, s).expect("face coordinate in range");
            let tc = warp_eval(&wv, t).expect("face coordinate in range");
            cube::cube_to_direction(face, sc, tc)
        }
    }
}

fn direction_to_face_coord(spec: &ProjectionSpec, d: &Direction) -> FaceCoord {
    match spec.format {
        Format::Erp => {
            let p = direction_to_lonlat(*d);
            FaceCoord {
                face: Face::F0,
                s: (p.lon() / PI).clamp(-1.0, 1.0),
                t: (p.lat() / FRAC_PI_2).clamp(-1.0, 1.0),
            }
        }
        Format::Aep => {
            let p = direction_to_lonlat(*d);
            FaceCoord {
                face: Face::F0,
                s: (p.lon() / PI).clamp(-1.0, 1.0),
                t: d.z().clamp(-1.0, 1.0),
            }
        }
        Format::Ecp => {
            let (face, s, t) = ecp::direction_to_face(d);
            FaceCoord { face, s, t }
        }
        _ => {
            let face = cube::select_face(d);
            let (sc, tc) = cube::direction_to_cube(d, face);
            let (wh, wv) = spec.face_warps(face);
            let s = warp_invert(&wh, sc).expect("cube coordinate in range");
            let t = warp_invert(&wv, tc).expect("cube coordinate in range");
            FaceCoord { face, s, t }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec(format: Format) -> ProjectionSpec {
        ProjectionSpec::with_defaults(format, 8, ChromaFormat::C444).unwrap()
    }

    #[test]
    fn erp_center_is_forward_axis() {
        let d = forward_map(&spec(Format::Erp), 0.5, 0.5).unwrap();
        assert!(d.angle_to(&Direction::new(1.0, 0.0, 0.0).unwrap()) < 1e-15);
    }

    #[test]
    fn aep_top_edge_is_north_pole() {
        let d = forward_map(&spec(Format::Aep), 0.5, 0.0).unwrap();
        assert!(d.angle_to(&Direction::new(0.0, 0.0, 1.0).unwrap()) < 1e-12);
    }

    #[test]
    fn eac_px_center_is_forward_axis() {
        // Center of the PX tile (top middle).
        let d = forward_map(&spec(Format::Eac), 0.5, 0.25).unwrap();
        assert!(d.angle_to(&Direction::new(1.0, 0.0, 0.0).unwrap()) < 1e-15);
    }

    #[test]
    fn cmp_inverse_examples() {
        let s = spec(Format::Cmp);
        let (fc, _) = inverse_map(&s, &Direction::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(fc.face, Face::Px);
        assert_eq!((fc.s, fc.t), (0.0, 0.0));

        let (fc, _) = inverse_map(&s, &Direction::normalized(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(fc.face, Face::Px);
        assert_eq!((fc.s, fc.t), (1.0, 1.0));
    }

    #[test]
    fn ecp_equator_lands_in_band() {
        let s = spec(Format::Ecp);
        let d = lonlat_to_direction(LonLat::new(0.0, 0.0).unwrap());
        let (fc, _) = inverse_map(&s, &d).unwrap();
        assert!(matches!(fc.face, Face::E0 | Face::E1 | Face::E2 | Face::E3));
        assert!(fc.t.abs() < 1e-15);
    }

    #[test]
    fn uv_out_of_range_rejected() {
        let s = spec(Format::Erp);
        assert!(forward_map(&s, 1.0, 0.5).is_err());
        assert!(forward_map(&s, 0.5, -0.1).is_err());
    }

    #[test]
    fn tiled_geometry_validated() {
        let bad = FrameGeometry::new(1800, 1024, 8, ChromaFormat::C444).unwrap();
        assert!(ProjectionSpec::new(Format::Cmp, bad).is_err());
        let good = FrameGeometry::new(1800, 1200, 8, ChromaFormat::C444).unwrap();
        assert!(ProjectionSpec::new(Format::Cmp, good).is_ok());
    }

    #[test]
    fn direction_roundtrip_all_formats() {
        // Bijectivity oracle at unit-test scale; the acceptance suite runs
        // the full 1e5-direction sweep.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for format in Format::ALL {
            let s = spec(format);
            let mut max_err: f64 = 0.0;
            for _ in 0..10_000 {
                let d = crate::test_util::random_direction(&mut rng);
                let (_, (u, v)) = inverse_map(&s, &d).unwrap();
                assert!((0.0..1.0).contains(&u) && (0.0..1.0).contains(&v));
                let back = forward_map(&s, u, v).unwrap();
                max_err = max_err.max(d.angle_to(&back));
            }
            assert!(max_err < 1e-9, "{format} round-trip error {max_err}");
        }
    }

    #[test]
    fn uv_roundtrip_away_from_seams() {
        // forward then inverse returns the same uv within 1e-9 for points
        // that do not sit on face seams.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        for format in Format::ALL {
            let s = spec(format);
            let mut checked = 0u32;
            while checked < 10_000 {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                if near_seam(format, u, v) {
                    continue;
                }
                let d = forward_map(&s, u, v).unwrap();
                let (_, (u2, v2)) = inverse_map(&s, &d).unwrap();
                assert!(
                    (u - u2).abs() < 1e-9 && (v - v2).abs() < 1e-9,
                    "{format}: ({u}, {v}) -> ({u2}, {v2})"
                );
                checked += 1;
            }
        }
    }

    /// Conservative seam test: tile borders (where the uv representation of
    /// a direction is genuinely ambiguous; the ECP cap rims fall on tile
    /// borders too) plus the ERP/AEP wrap column and poles.
    fn near_seam(format: Format, u: f64, v: f64) -> bool {
        let eps = 1e-6;
        if format.is_tiled() {
            let p = u * 3.0;
            let q = v * 2.0;
            (p - p.round()).abs() < eps || (q - q.round()).abs() < eps
        } else {
            u < eps || u > 1.0 - eps || v < eps || v > 1.0 - eps
        }
    }
}
