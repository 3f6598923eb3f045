//! Planar frame storage. Samples are kept as `u16` regardless of bit depth;
//! the geometry's `bit_depth` defines the legal range.

use crate::error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Chroma layout of a YUV frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChromaFormat {
    /// Chroma subsampled by two in both directions.
    #[serde(rename = "420")]
    C420,
    /// Full-resolution chroma.
    #[serde(rename = "444")]
    C444,
}

impl ChromaFormat {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "420" | "4:2:0" => Ok(ChromaFormat::C420),
            "444" | "4:4:4" => Ok(ChromaFormat::C444),
            other => Err(Error::Config(format!(
                "unknown chroma format {other:?} (expected \"420\" or \"444\")"
            ))),
        }
    }
}

/// Size, bit depth and chroma layout of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub chroma: ChromaFormat,
}

impl FrameGeometry {
    pub fn new(width: usize, height: usize, bit_depth: u8, chroma: ChromaFormat) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract(format!(
                "frame dimensions must be nonzero, got {width}x{height}"
            )));
        }
        if bit_depth != 8 && bit_depth != 10 {
            return Err(Error::Contract(format!(
                "bit depth must be 8 or 10, got {bit_depth}"
            )));
        }
        if chroma == ChromaFormat::C420 && (width % 2 != 0 || height % 2 != 0) {
            return Err(Error::Contract(format!(
                "4:2:0 frames need even dimensions, got {width}x{height}"
            )));
        }
        Ok(FrameGeometry {
            width,
            height,
            bit_depth,
            chroma,
        })
    }

    /// Maximum legal sample value.
    pub fn max_value(&self) -> u16 {
        (1u16 << self.bit_depth) - 1
    }

    /// Chroma plane dimensions.
    pub fn chroma_dims(&self) -> (usize, usize) {
        match self.chroma {
            ChromaFormat::C420 => (self.width / 2, self.height / 2),
            ChromaFormat::C444 => (self.width, self.height),
        }
    }

    /// Bytes of one sample in raw file layout (1 for 8-bit, 2 for 10-bit).
    pub fn bytes_per_sample(&self) -> usize {
        if self.bit_depth > 8 {
            2
        } else {
            1
        }
    }

    /// Bytes of one whole frame in raw planar layout.
    pub fn frame_bytes(&self) -> usize {
        let (cw, ch) = self.chroma_dims();
        (self.width * self.height + 2 * cw * ch) * self.bytes_per_sample()
    }
}

/// One sample plane in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u16>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Plane {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u16) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[u16] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Planar YUV picture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
    pub geometry: FrameGeometry,
}

impl Frame {
    /// Allocates a zeroed frame matching the geometry.
    pub fn new(geometry: FrameGeometry) -> Self {
        let (cw, ch) = geometry.chroma_dims();
        Frame {
            y: Plane::new(geometry.width, geometry.height),
            u: Plane::new(cw, ch),
            v: Plane::new(cw, ch),
            geometry,
        }
    }

    /// A frame with every plane set to a constant value.
    pub fn filled(geometry: FrameGeometry, y: u16, u: u16, v: u16) -> Self {
        let (cw, ch) = geometry.chroma_dims();
        Frame {
            y: Plane::filled(geometry.width, geometry.height, y),
            u: Plane::filled(cw, ch, u),
            v: Plane::filled(cw, ch, v),
            geometry,
        }
    }

    pub fn planes(&self) -> [&Plane; 3] {
        [&self.y, &self.u, &self.v]
    }

    /// Validates plane dimensions and the sample range against the geometry.
    pub fn validate(&self) -> Result<()> {
        let (cw, ch) = self.geometry.chroma_dims();
        let dims_ok = self.y.width == self.geometry.width
            && self.y.height == self.geometry.height
            && self.u.width == cw
            && self.u.height == ch
            && self.v.width == cw
            && self.v.height == ch
            && self.y.data.len() == self.y.width * self.y.height
            && self.u.data.len() == cw * ch
            && self.v.data.len() == cw * ch;
        if !dims_ok {
            return Err(Error::Contract(
                "plane dimensions inconsistent with frame geometry".into(),
            ));
        }
        let max = self.geometry.max_value();
        for plane in self.planes() {
            if plane.data.iter().any(|&s| s > max) {
                return Err(Error::Data(format!(
                    "sample exceeds {}-bit range",
                    self.geometry.bit_depth
                )));
            }
        }
        Ok(())
    }
}

/// Planar full-range RGB picture at the same bit depth as its source frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    pub r: Plane,
    pub g: Plane,
    pub b: Plane,
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, bit_depth: u8) -> Self {
        RgbFrame {
            r: Plane::new(width, height),
            g: Plane::new(width, height),
            b: Plane::new(width, height),
            width,
            height,
            bit_depth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c420_requires_even_dims() {
        assert!(FrameGeometry::new(3, 2, 8, ChromaFormat::C420).is_err());
        assert!(FrameGeometry::new(2, 2, 8, ChromaFormat::C420).is_ok());
        assert!(FrameGeometry::new(3, 3, 8, ChromaFormat::C444).is_ok());
    }

    #[test]
    fn frame_bytes() {
        // 2x2 4:2:0 8-bit: 4 luma + 2 chroma samples = 6 bytes.
        let g = FrameGeometry::new(2, 2, 8, ChromaFormat::C420).unwrap();
        assert_eq!(g.frame_bytes(), 6);
        // 2x2 4:4:4 10-bit: 12 samples, 2 bytes each.
        let g = FrameGeometry::new(2, 2, 10, ChromaFormat::C444).unwrap();
        assert_eq!(g.frame_bytes(), 24);
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let g = FrameGeometry::new(2, 2, 8, ChromaFormat::C444).unwrap();
        let mut f = Frame::new(g);
        f.y.set(0, 0, 256);
        assert!(f.validate().is_err());
        f.y.set(0, 0, 255);
        assert!(f.validate().is_ok());
    }
}
