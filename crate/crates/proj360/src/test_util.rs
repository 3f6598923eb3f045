//! Helpers shared by unit tests.

use crate::sphere::Direction;
use rand::Rng;

/// Uniform random unit vector by rejection sampling from the cube.
pub(crate) fn random_direction<R: Rng>(rng: &mut R) -> Direction {
    loop {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-1.0..1.0);
        let z: f64 = rng.gen_range(-1.0..1.0);
        let n2 = x * x + y * y + z * z;
        if n2 > 1e-4 && n2 < 1.0 {
            return Direction::normalized(x, y, z);
        }
    }
}
