//! Sphere coordinate conventions shared by every projection format.
//!
//! Axis convention: +x points at (lon 0, lat 0), +z at the north pole,
//! right-handed. Longitude increases eastward in [-pi, pi), latitude in
//! [-pi/2, pi/2]. Pixel centers sit at half-integer offsets.

use crate::error::{Error, Result};
use crate::frame::FrameGeometry;

pub const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
pub const PI: f64 = std::f64::consts::PI;
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Unit vector on the image sphere; the common currency between projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    /// Builds a direction from components that must already be unit norm
    /// (within 1e-9); renormalizes to machine precision.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "direction ({x}, {y}, {z}) is not unit norm (|v| = {norm})"
            )));
        }
        Ok(Self::normalized(x, y, z))
    }

    /// Normalizes an arbitrary nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Self {
        let norm = (x * x + y * y + z * z).sqrt();
        debug_assert!(norm > 0.0, "cannot normalize the zero vector");
        Direction {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Angle in radians between two directions, numerically stable for
    /// nearly parallel vectors (atan2 of cross and dot, not acos).
    pub fn angle_to(&self, other: &Direction) -> f64 {
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        let cross = (cx * cx + cy * cy + cz * cz).sqrt();
        cross.atan2(self.dot(other))
    }
}

/// Longitude/latitude pair in radians; lon in [-pi, pi), lat in [-pi/2, pi/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LonLat {
    lon: f64,
    lat: f64,
}

impl LonLat {
    /// Longitude wraps modulo 2*pi; latitude out of range is an error, not a
    /// clamp.
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        if !lat.is_finite() || !(-HALF_PI..=HALF_PI).contains(&lat) {
            return Err(Error::Domain(format!(
                "latitude {lat} outside [-pi/2, pi/2]"
            )));
        }
        if !lon.is_finite() {
            return Err(Error::Domain(format!("longitude {lon} is not finite")));
        }
        Ok(LonLat {
            lon: wrap_lon(lon),
            lat,
        })
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }
}

/// Wraps a longitude into [-pi, pi).
pub fn wrap_lon(lon: f64) -> f64 {
    let wrapped = (lon + PI).rem_euclid(TWO_PI) - PI;
    // rem_euclid can return exactly 2*pi for inputs just below -pi due to
    // rounding; fold the boundary back.
    if wrapped >= PI {
        wrapped - TWO_PI
    } else {
        wrapped
    }
}

/// (lon, lat) -> unit direction under the fixed axis convention.
pub fn lonlat_to_direction(p: LonLat) -> Direction {
    let (sin_lat, cos_lat) = p.lat.sin_cos();
    let (sin_lon, cos_lon) = p.lon.sin_cos();
    Direction {
        x: cos_lat * cos_lon,
        y: cos_lat * sin_lon,
        z: sin_lat,
    }
}

/// Inverse of [`lonlat_to_direction`]. At the poles (|z| = 1) longitude is
/// canonicalized to 0 so the inverse is deterministic.
pub fn direction_to_lonlat(d: Direction) -> LonLat {
    if d.x == 0.0 && d.y == 0.0 {
        return LonLat {
            lon: 0.0,
            lat: if d.z > 0.0 { HALF_PI } else { -HALF_PI },
        };
    }
    LonLat {
        lon: wrap_lon(d.y.atan2(d.x)),
        lat: d.z.clamp(-1.0, 1.0).asin(),
    }
}

/// Maps a pixel index to the unit square using the pixel-center convention:
/// u = (i + 0.5) / width, v = (j + 0.5) / height.
pub fn pixel_to_unit(i: usize, j: usize, g: &FrameGeometry) -> Result<(f64, f64)> {
    if i >= g.width || j >= g.height {
        return Err(Error::Domain(format!(
            "pixel ({i}, {j}) outside {}x{} frame",
            g.width, g.height
        )));
    }
    Ok((
        (i as f64 + 0.5) / g.width as f64,
        (j as f64 + 0.5) / g.height as f64,
    ))
}
