//! Equatorial cylindrical projection geometry.
//!
//! Four equatorial tiles cover the latitude band |sin(lat)| <= 2/3 with
//! 90 degrees of longitude each; the vertical law sin(lat) = t * 2/3 is
//! equal-area, and the band holds two thirds of both the sphere and the
//! packed frame. The polar caps map their square tiles through the
//! concentric (equal-area) square-to-disc transform, with the equal-area
//! radial law sin(lat) = 1 - (1 - 2/3) * rho^2, so every tile covers the
//! same sphere area.

use crate::projection::packing::Face;
use crate::sphere::{direction_to_lonlat, lonlat_to_direction, Direction, LonLat};

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

/// sin of the band boundary latitude.
pub const SIN_BAND_EDGE: f64 = 2.0 / 3.0;

const TILE_SPAN: f64 = FRAC_PI_2;

fn tile_center_lon(k: usize) -> f64 {
    -PI + (k as f64 + 0.5) * TILE_SPAN
}

fn equatorial_face(k: usize) -> Face {
    [Face::E0, Face::E1, Face::E2, Face::E3][k]
}

/// Face-local coordinates -> sphere direction.
pub(crate) fn face_to_direction(face: Face, s: f64, t: f64) -> Direction {
    match face {
        Face::E0 | Face::E1 | Face::E2 | Face::E3 => {
            let k = match face {
                Face::E0 => 0,
                Face::E1 => 1,
                Face::E2 => 2,
                _ => 3,
            };
            let lon = tile_center_lon(k) + s * FRAC_PI_4;
            let lat = (t * SIN_BAND_EDGE).asin();
            lonlat_to_direction(LonLat::new(lon, lat).expect("band latitude in range"))
        }
        Face::Top | Face::Bottom => {
            let (a, b) = square_to_disc(s, t);
            let rho2 = a * a + b * b;
            let sin_lat = (1.0 - (1.0 - SIN_BAND_EDGE) * rho2).min(1.0);
            let lat = if face == Face::Top {
                sin_lat.asin()
            } else {
                -sin_lat.asin()
            };
            let lon = if rho2 == 0.0 { 0.0 } else { b.atan2(a) };
            lonlat_to_direction(LonLat::new(lon, lat).expect("cap latitude in range"))
        }
        _ => unreachable!("not an ECP face"),
    }
}

/// Sphere direction -> owning tile and face-local coordinates. Band ties at
/// |sin(lat)| = 2/3 go to the equatorial tiles, and shared meridians go to
/// the lowest-numbered tile.
pub(crate) fn direction_to_face(d: &Direction) -> (Face, f64, f64) {
    let z = d.z().clamp(-1.0, 1.0);
    if z.abs() <= SIN_BAND_EDGE {
        let lon = direction_to_lonlat(*d).lon();
        // Smallest tile whose right edge is at or past this longitude.
        let mut k = 3;
        for cand in 0..4 {
            if lon <= -PI + (cand as f64 + 1.0) * TILE_SPAN {
                k = cand;
                break;
            }
        }
        let s = ((lon - tile_center_lon(k)) / FRAC_PI_4).clamp(-1.0, 1.0);
        let t = (z / SIN_BAND_EDGE).clamp(-1.0, 1.0);
        (equatorial_face(k), s, t)
    } else {
        let face = if z > 0.0 { Face::Top } else { Face::Bottom };
        let rho = ((1.0 - z.abs()) / (1.0 - SIN_BAND_EDGE)).max(0.0).sqrt().min(1.0);
        let lon = direction_to_lonlat(*d).lon();
        let (s, t) = disc_to_square(rho * lon.cos(), rho * lon.sin());
        (face, s.clamp(-1.0, 1.0), t.clamp(-1.0, 1.0))
    }
}

/// Concentric square-to-disc map: concentric squares max(|s|,|t|) = r map
/// onto circles of radius r, preserving area up to the constant pi/4.
pub(crate) fn square_to_disc(s: f64, t: f64) -> (f64, f64) {
    if s == 0.0 && t == 0.0 {
        return (0.0, 0.0);
    }
    let (r, theta) = if s * s > t * t {
        (s, FRAC_PI_4 * (t / s))
    } else {
        (t, FRAC_PI_2 - FRAC_PI_4 * (s / t))
    };
    (r * theta.cos(), r * theta.sin())
}

/// Inverse of [`square_to_disc`].
pub(crate) fn disc_to_square(a: f64, b: f64) -> (f64, f64) {
    let r = (a * a + b * b).sqrt();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let mut phi = b.atan2(a);
    if phi < -FRAC_PI_4 {
        phi += TAU;
    }
    if phi < FRAC_PI_4 {
        (r, r * phi / FRAC_PI_4)
    } else if phi < 3.0 * FRAC_PI_4 {
        (r * (FRAC_PI_2 - phi) / FRAC_PI_4, r)
    } else if phi < 5.0 * FRAC_PI_4 {
        (-r, -r * (phi - PI) / FRAC_PI_4)
    } else {
        (r * (phi - 3.0 * FRAC_PI_2) / FRAC_PI_4, -r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn equator_center_lands_in_band_tile() {
        // lon 0 sits on the E1/E2 shared meridian; the tie-break rule
        // hands it to the lower-numbered tile.
        let d = lonlat_to_direction(LonLat::new(0.0, 0.0).unwrap());
        let (face, s, t) = direction_to_face(&d);
        assert_eq!(face, Face::E1);
        assert!(t.abs() < 1e-15);
        assert!((s - 1.0).abs() < 1e-12, "lon 0 is the right edge of E1, s={s}");
    }

    #[test]
    fn shared_meridian_goes_to_lower_tile() {
        // lon exactly -pi/2 is shared by E0 (s=1) and E1 (s=-1).
        let d = lonlat_to_direction(LonLat::new(-FRAC_PI_2, 0.1).unwrap());
        let (face, s, _) = direction_to_face(&d);
        assert_eq!(face, Face::E0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_edge_tie_goes_to_band() {
        let lat = SIN_BAND_EDGE.asin();
        let d = lonlat_to_direction(LonLat::new(0.3, lat).unwrap());
        let (face, _, t) = direction_to_face(&d);
        assert!(matches!(face, Face::E0 | Face::E1 | Face::E2 | Face::E3));
        assert!((t - 1.0).abs() < 1e-9);
    }

    #[test]
    fn poles_map_to_cap_centers() {
        let (face, s, t) = direction_to_face(&Direction::new(0.0, 0.0, 1.0).unwrap());
        assert_eq!(face, Face::Top);
        assert_eq!((s, t), (0.0, 0.0));
        let (face, ..) = direction_to_face(&Direction::new(0.0, 0.0, -1.0).unwrap());
        assert_eq!(face, Face::Bottom);
    }

    #[test]
    fn concentric_map_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let s: f64 = rng.gen_range(-1.0..=1.0);
            let t: f64 = rng.gen_range(-1.0..=1.0);
            let (a, b) = square_to_disc(s, t);
            assert!(a * a + b * b <= 1.0 + 1e-12);
            let (s2, t2) = disc_to_square(a, b);
            assert!((s - s2).abs() < 1e-12 && (t - t2).abs() < 1e-12, "({s},{t}) -> ({s2},{t2})");
        }
    }

    #[test]
    fn concentric_map_preserves_chebyshev_radius() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5_000 {
            let s: f64 = rng.gen_range(-1.0..=1.0);
            let t: f64 = rng.gen_range(-1.0..=1.0);
            let (a, b) = square_to_disc(s, t);
            let r_square = s.abs().max(t.abs());
            let r_disc = (a * a + b * b).sqrt();
            assert!((r_square - r_disc).abs() < 1e-12);
        }
    }

    #[test]
    fn face_roundtrip_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50_000 {
            let d = crate::test_util::random_direction(&mut rng);
            let (face, s, t) = direction_to_face(&d);
            let back = face_to_direction(face, s, t);
            assert!(
                d.angle_to(&back) < 1e-9,
                "ECP face roundtrip failed: {face:?} ({s}, {t})"
            );
        }
    }
}
