//! Raw headerless YUV sequence reading/writing (I420/I444 layouts, 8-bit
//! single byte, 10-bit little-endian two-byte) and BT.709 RGB conversion.
//! Geometry is always supplied externally, never probed from the file.

use crate::error::{Error, Result};
use crate::frame::{ChromaFormat, Frame, FrameGeometry, RgbFrame};

use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

/// A raw YUV file plus the externally supplied geometry.
#[derive(Debug, Clone)]
pub struct YuvSequence {
    pub path: PathBuf,
    pub geometry: FrameGeometry,
    pub frame_rate: f64,
    pub frame_count: usize,
}

impl YuvSequence {
    /// Opens an existing file, deriving the frame count from its size.
    pub fn open(path: impl Into<PathBuf>, geometry: FrameGeometry, frame_rate: f64) -> Result<Self> {
        let path = path.into();
        let meta = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
        let frame_count = meta.len() as usize / geometry.frame_bytes();
        Ok(YuvSequence {
            path,
            geometry,
            frame_rate,
            frame_count,
        })
    }

    /// Opens with an explicit frame count, validating the file is at least
    /// that long.
    pub fn open_with_count(
        path: impl Into<PathBuf>,
        geometry: FrameGeometry,
        frame_rate: f64,
        frame_count: usize,
    ) -> Result<Self> {
        let path = path.into();
        let meta = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
        let needed = frame_count as u64 * geometry.frame_bytes() as u64;
        if meta.len() < needed {
            return Err(Error::Contract(format!(
                "{} holds {} bytes but {frame_count} frames of {:?} need {needed}",
                path.display(),
                meta.len(),
                geometry
            )));
        }
        Ok(YuvSequence {
            path,
            geometry,
            frame_rate,
            frame_count,
        })
    }

    /// Reads a contiguous range of frames.
    pub fn read_frames(&self, range: Range<usize>) -> Result<Vec<Frame>> {
        if range.end > self.frame_count {
            return Err(Error::Contract(format!(
                "frame range {range:?} exceeds sequence length {}",
                self.frame_count
            )));
        }
        let mut file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let frame_bytes = self.geometry.frame_bytes();
        file.seek(SeekFrom::Start((range.start * frame_bytes) as u64))
            .map_err(|e| Error::io(&self.path, e))?;
        let mut frames = Vec::with_capacity(range.len());
        let mut buf = vec![0u8; frame_bytes];
        for index in range {
            file.read_exact(&mut buf).map_err(|e| {
                Error::Io {
                    path: self.path.clone(),
                    source: std::io::Error::new(
                        e.kind(),
                        format!("reading frame {index}: {e}"),
                    ),
                }
            })?;
            frames.push(decode_frame(&buf, self.geometry, index)?);
        }
        Ok(frames)
    }
}

fn decode_frame(buf: &[u8], geometry: FrameGeometry, index: usize) -> Result<Frame> {
    let mut frame = Frame::new(geometry);
    let mut offset = 0usize;
    let max = geometry.max_value();
    let two_byte = geometry.bytes_per_sample() == 2;
    for plane in [&mut frame.y, &mut frame.u, &mut frame.v] {
        let n = plane.width * plane.height;
        if two_byte {
            for (k, out) in plane.data.iter_mut().enumerate() {
                let lo = buf[offset + 2 * k] as u16;
                let hi = buf[offset + 2 * k + 1] as u16;
                let v = lo | (hi << 8);
                if v > max {
                    return Err(Error::Data(format!(
                        "frame {index}: sample value {v} exceeds {}-bit range",
                        geometry.bit_depth
                    )));
                }
                *out = v;
            }
            offset += 2 * n;
        } else {
            for (k, out) in plane.data.iter_mut().enumerate() {
                *out = buf[offset + k] as u16;
            }
            offset += n;
        }
    }
    Ok(frame)
}

fn encode_frame(frame: &Frame, out: &mut Vec<u8>) {
    let two_byte = frame.geometry.bytes_per_sample() == 2;
    for plane in frame.planes() {
        if two_byte {
            for &s in &plane.data {
                out.extend_from_slice(&s.to_le_bytes());
            }
        } else {
            out.extend(plane.data.iter().map(|&s| s as u8));
        }
    }
}

/// Writes frames as a raw planar file; the inverse of
/// [`YuvSequence::read_frames`]. All frames must share `geometry` (an empty
/// list writes a zero-length file).
pub fn write_frames(
    frames: &[Frame],
    geometry: FrameGeometry,
    frame_rate: f64,
    path: impl AsRef<Path>,
) -> Result<YuvSequence> {
    let path = path.as_ref();
    for f in frames {
        if f.geometry != geometry {
            return Err(Error::Contract(format!(
                "mixed geometries: {:?} vs {:?}",
                f.geometry, geometry
            )));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut buf = Vec::with_capacity(geometry.frame_bytes());
    for f in frames {
        buf.clear();
        encode_frame(f, &mut buf);
        w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(YuvSequence {
        path: path.to_path_buf(),
        geometry,
        frame_rate,
        frame_count: frames.len(),
    })
}

/// YUV quantization range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum YuvRange {
    /// Broadcast range: luma excursion 219 << (d-8) with offset 16 << (d-8),
    /// chroma excursion 224 << (d-8) around mid-level.
    #[serde(rename = "limited")]
    Limited,
    #[serde(rename = "full")]
    Full,
}

struct RangeParams {
    y_offset: f64,
    y_scale: f64,
    c_scale: f64,
    mid: f64,
}

fn range_params(range: YuvRange, bit_depth: u8) -> RangeParams {
    let s = (1u32 << (bit_depth - 8)) as f64;
    let max = ((1u32 << bit_depth) - 1) as f64;
    match range {
        YuvRange::Limited => RangeParams {
            y_offset: 16.0 * s,
            y_scale: 219.0 * s,
            c_scale: 224.0 * s,
            mid: 128.0 * s,
        },
        YuvRange::Full => RangeParams {
            y_offset: 0.0,
            y_scale: max,
            c_scale: max,
            mid: 128.0 * s,
        },
    }
}

const KR: f64 = 0.2126;
const KB: f64 = 0.0722;
const KG: f64 = 1.0 - KR - KB;

/// 4:4:4 YUV -> full-range planar RGB, BT.709 matrix, limited YUV range.
pub fn yuv_to_rgb_bt709(f: &Frame) -> Result<RgbFrame> {
    yuv_to_rgb_bt709_ranged(f, YuvRange::Limited)
}

pub fn yuv_to_rgb_bt709_ranged(f: &Frame, range: YuvRange) -> Result<RgbFrame> {
    if f.geometry.chroma != ChromaFormat::C444 {
        return Err(Error::Contract("RGB conversion requires 4:4:4 input".into()));
    }
    let p = range_params(range, f.geometry.bit_depth);
    let max = f.geometry.max_value() as f64;
    // Direct matrix form so zero chroma maps gray to exactly R = G = B.
    let g_pb = 2.0 * KB * (1.0 - KB) / KG;
    let g_pr = 2.0 * KR * (1.0 - KR) / KG;
    let mut rgb = RgbFrame::new(f.geometry.width, f.geometry.height, f.geometry.bit_depth);
    for k in 0..f.y.data.len() {
        let ey = (f.y.data[k] as f64 - p.y_offset) / p.y_scale;
        let pb = (f.u.data[k] as f64 - p.mid) / p.c_scale;
        let pr = (f.v.data[k] as f64 - p.mid) / p.c_scale;
        let r = ey + 2.0 * (1.0 - KR) * pr;
        let b = ey + 2.0 * (1.0 - KB) * pb;
        let g = ey - g_pb * pb - g_pr * pr;
        rgb.r.data[k] = (r * max).round().clamp(0.0, max) as u16;
        rgb.g.data[k] = (g * max).round().clamp(0.0, max) as u16;
        rgb.b.data[k] = (b * max).round().clamp(0.0, max) as u16;
    }
    Ok(rgb)
}

/// Full-range planar RGB -> 4:4:4 YUV, BT.709 matrix, limited YUV range.
pub fn rgb_to_yuv_bt709(rgb: &RgbFrame) -> Result<Frame> {
    rgb_to_yuv_bt709_ranged(rgb, YuvRange::Limited)
}

pub fn rgb_to_yuv_bt709_ranged(rgb: &RgbFrame, range: YuvRange) -> Result<Frame> {
    let geometry = FrameGeometry::new(rgb.width, rgb.height, rgb.bit_depth, ChromaFormat::C444)?;
    let p = range_params(range, rgb.bit_depth);
    let max = geometry.max_value() as f64;
    let s = (1u32 << (rgb.bit_depth - 8)) as f64;
    let (y_lo, y_hi, c_lo, c_hi) = match range {
        YuvRange::Limited => (16.0 * s, 235.0 * s, 16.0 * s, 240.0 * s),
        YuvRange::Full => (0.0, max, 0.0, max),
    };
    let mut out = Frame::new(geometry);
    for k in 0..out.y.data.len() {
        let r = rgb.r.data[k] as f64 / max;
        let g = rgb.g.data[k] as f64 / max;
        let b = rgb.b.data[k] as f64 / max;
        let ey = KR * r + KG * g + KB * b;
        let pb = (b - ey) / (2.0 * (1.0 - KB));
        let pr = (r - ey) / (2.0 * (1.0 - KR));
        out.y.data[k] = (p.y_offset + ey * p.y_scale).round().clamp(y_lo, y_hi) as u16;
        out.u.data[k] = (p.mid + pb * p.c_scale).round().clamp(c_lo, c_hi) as u16;
        out.v.data[k] = (p.mid + pr * p.c_scale).round().clamp(c_lo, c_hi) as u16;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_frame<R: Rng>(rng: &mut R, g: FrameGeometry) -> Frame {
        let mut f = Frame::new(g);
        let max = g.max_value();
        for p in [&mut f.y, &mut f.u, &mut f.v] {
            p.data.iter_mut().for_each(|v| *v = rng.gen_range(0..=max));
        }
        f
    }

    #[test]
    fn frame_size_arithmetic() {
        let g = FrameGeometry::new(2, 2, 8, ChromaFormat::C420).unwrap();
        assert_eq!(g.frame_bytes(), 6);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("two.yuv");
        std::fs::write(&path, vec![0u8; 12]).unwrap();
        let seq = YuvSequence::open(&path, g, 30.0).unwrap();
        assert_eq!(seq.frame_count, 2);
        assert!(seq.read_frames(0..1).is_ok());
        assert!(seq.read_frames(0..3).is_err());
    }

    #[test]
    fn range_contract() {
        let g = FrameGeometry::new(4, 2, 8, ChromaFormat::C420).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.yuv");
        let frames: Vec<Frame> = (0..32).map(|i| Frame::filled(g, i as u16, 0, 0)).collect();
        let seq = write_frames(&frames, g, 30.0, &path).unwrap();
        assert!(seq.read_frames(0..32).is_ok());
        assert!(seq.read_frames(0..33).is_err());
    }

    #[test]
    fn empty_write_is_zero_length() {
        let g = FrameGeometry::new(4, 2, 8, ChromaFormat::C420).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.yuv");
        let seq = write_frames(&[], g, 30.0, &path).unwrap();
        assert_eq!(seq.frame_count, 0);
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 0);
    }

    #[test]
    fn ten_bit_2x2_444_is_24_bytes() {
        let g = FrameGeometry::new(2, 2, 10, ChromaFormat::C444).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.yuv");
        write_frames(&[Frame::filled(g, 512, 512, 512)], g, 30.0, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 24);
    }

    #[test]
    fn mixed_geometries_rejected() {
        let g1 = FrameGeometry::new(4, 2, 8, ChromaFormat::C420).unwrap();
        let g2 = FrameGeometry::new(4, 4, 8, ChromaFormat::C420).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mixed.yuv");
        let frames = vec![Frame::new(g1), Frame::new(g2)];
        assert!(write_frames(&frames, g1, 30.0, &path).is_err());
    }

    #[test]
    fn roundtrip_bit_exact_all_layouts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let dir = tempfile::tempdir().unwrap();
        for (depth, chroma) in [
            (8, ChromaFormat::C420),
            (8, ChromaFormat::C444),
            (10, ChromaFormat::C420),
            (10, ChromaFormat::C444),
        ] {
            let g = FrameGeometry::new(16, 8, depth, chroma).unwrap();
            let frames: Vec<Frame> = (0..5).map(|_| random_frame(&mut rng, g)).collect();
            let path = dir.path().join(format!("rt_{depth}_{chroma:?}.yuv"));
            let seq = write_frames(&frames, g, 30.0, &path).unwrap();
            let back = seq.read_frames(0..5).unwrap();
            assert_eq!(frames, back, "{depth}-bit {chroma:?}");
        }
    }

    #[test]
    fn ten_bit_overrange_sample_is_data_error() {
        let g = FrameGeometry::new(2, 2, 10, ChromaFormat::C444).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.yuv");
        let mut bytes = vec![0u8; g.frame_bytes()];
        bytes[0] = 0xFF;
        bytes[1] = 0xFF; // 65535 > 1023
        std::fs::write(&path, &bytes).unwrap();
        let seq = YuvSequence::open(&path, g, 30.0).unwrap();
        match seq.read_frames(0..1) {
            Err(Error::Data(msg)) => assert!(msg.contains("frame 0")),
            other => panic!("expected data error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_names_failing_frame() {
        let g = FrameGeometry::new(4, 2, 8, ChromaFormat::C420).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.yuv");
        std::fs::write(&path, vec![0u8; g.frame_bytes() + 3]).unwrap();
        let seq = YuvSequence {
            path: path.clone(),
            geometry: g,
            frame_rate: 30.0,
            frame_count: 2,
        };
        match seq.read_frames(0..2) {
            Err(Error::Io { source, .. }) => {
                assert!(source.to_string().contains("frame 1"), "{source}");
            }
            other => panic!("expected io error, got {other:?}"),
        }
    }

    #[test]
    fn bt709_white_and_black_points() {
        let g = FrameGeometry::new(1, 1, 8, ChromaFormat::C444).unwrap();
        let white = yuv_to_rgb_bt709(&Frame::filled(g, 235, 128, 128)).unwrap();
        assert_eq!(
            (white.r.data[0], white.g.data[0], white.b.data[0]),
            (255, 255, 255)
        );
        let black = yuv_to_rgb_bt709(&Frame::filled(g, 16, 128, 128)).unwrap();
        assert_eq!((black.r.data[0], black.g.data[0], black.b.data[0]), (0, 0, 0));
    }

    #[test]
    fn bt709_gray_sweep_within_one_lsb() {
        // Exhaustive sweep oracle over all legal gray levels, both depths.
        for depth in [8u8, 10] {
            let s = 1u16 << (depth - 8);
            let g = FrameGeometry::new(1, 1, depth, ChromaFormat::C444).unwrap();
            let mid = 128 * s;
            for y in (16 * s)..=(235 * s) {
                let f = Frame::filled(g, y, mid, mid);
                let rgb = yuv_to_rgb_bt709(&f).unwrap();
                assert!(
                    rgb.r.data[0] == rgb.g.data[0] && rgb.g.data[0] == rgb.b.data[0],
                    "gray input must stay gray"
                );
                let back = rgb_to_yuv_bt709(&rgb).unwrap();
                assert!(
                    (back.y.data[0] as i32 - y as i32).abs() <= 1,
                    "{depth}-bit Y {y} -> {}",
                    back.y.data[0]
                );
                assert!((back.u.data[0] as i32 - mid as i32).abs() <= 1);
                assert!((back.v.data[0] as i32 - mid as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn bt709_requires_444() {
        let g = FrameGeometry::new(2, 2, 8, ChromaFormat::C420).unwrap();
        assert!(yuv_to_rgb_bt709(&Frame::new(g)).is_err());
    }

    #[test]
    fn bt709_roundtrip_in_gamut_random() {
        // RGB -> YUV -> RGB on random full-range RGB stays within 1 LSB of
        // the YUV produced in between (in-gamut by construction).
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut rgb = RgbFrame::new(8, 8, 8);
        for p in [&mut rgb.r, &mut rgb.g, &mut rgb.b] {
            p.data.iter_mut().for_each(|v| *v = rng.gen_range(0..=255));
        }
        let yuv = rgb_to_yuv_bt709(&rgb).unwrap();
        let rgb2 = yuv_to_rgb_bt709(&yuv).unwrap();
        let yuv2 = rgb_to_yuv_bt709(&rgb2).unwrap();
        for (a, b) in yuv.y.data.iter().zip(&yuv2.y.data) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }
}
