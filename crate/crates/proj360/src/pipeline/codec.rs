//! Codec adapters: a deterministic mock quantizer for desk-scale runs, an
//! external-command adapter for real codecs, and an identity null codec.

use crate::error::{Error, Result};
use crate::frame::{Frame, FrameGeometry};
use crate::yuv::{write_frames, YuvRange, YuvSequence};

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::process::Command;

/// Environment variable naming a directory that is prepended to PATH when
/// spawning external codec tools.
pub const TOOLS_ENV_VAR: &str = "PROJ360_TOOLS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodecKind {
    #[serde(rename = "external-command")]
    ExternalCommand,
    #[serde(rename = "mock-quantizer")]
    MockQuantizer,
    #[serde(rename = "null")]
    Null,
}

/// Color space handed to the codec: convert to BT.709 RGB around the codec
/// (the convention of neural codecs), or pass YUV planes through directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColorMode {
    #[serde(rename = "rgb-bt709")]
    RgbBt709,
    #[serde(rename = "yuv-direct")]
    YuvDirect,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodecAdapter {
    pub kind: CodecKind,
    /// Label used in reports; defaults to the kind name.
    pub name: String,
    /// Encode command template with {input} {bitstream} {q} {width}
    /// {height} {bitdepth} {framerate} {gop} placeholders.
    pub encode: Option<String>,
    /// Decode command template with {bitstream} {recon} and the same
    /// auxiliary placeholders.
    pub decode: Option<String>,
    pub color_mode: ColorMode,
    pub color_range: YuvRange,
    pub gop: u32,
}

impl CodecAdapter {
    pub fn mock_quantizer() -> Self {
        CodecAdapter {
            kind: CodecKind::MockQuantizer,
            name: "mock-quantizer".into(),
            encode: None,
            decode: None,
            color_mode: ColorMode::YuvDirect,
            color_range: YuvRange::Limited,
            gop: 32,
        }
    }

    pub fn null() -> Self {
        CodecAdapter {
            kind: CodecKind::Null,
            name: "null".into(),
            ..CodecAdapter::mock_quantizer()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == CodecKind::ExternalCommand {
            let encode = self.encode.as_deref().ok_or_else(|| {
                Error::Config("external-command codec needs an encode template".into())
            })?;
            let decode = self.decode.as_deref().ok_or_else(|| {
                Error::Config("external-command codec needs a decode template".into())
            })?;
            for (template, role, needed) in [
                (encode, "encode", ["{input}", "{bitstream}"]),
                (decode, "decode", ["{bitstream}", "{recon}"]),
            ] {
                for placeholder in needed {
                    if !template.contains(placeholder) {
                        return Err(Error::Config(format!(
                            "{role} template is missing the {placeholder} placeholder"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Validates a quality index against the adapter: the mock quantizer
    /// defines q in {0, 1, 2, 3}; external codecs take arbitrary values
    /// (e.g. QPs).
    pub fn validate_quality(&self, q: u32) -> Result<()> {
        if self.kind == CodecKind::MockQuantizer && q > 3 {
            return Err(Error::Config(format!(
                "mock-quantizer quality index {q} outside {{0, 1, 2, 3}}"
            )));
        }
        Ok(())
    }
}

/// Output of one codec invocation.
#[derive(Debug)]
pub struct CodecOutput {
    /// Exact size of the bitstream in bits.
    pub bits: u64,
    pub reconstruction: Vec<Frame>,
}

// ---------------------------------------------------------------------------
// Mock quantizer
// ---------------------------------------------------------------------------

/// Quantization step for quality index q in {0..3}: 32, 16, 8, 4.
fn mock_step(q: u32) -> Result<u16> {
    if q > 3 {
        return Err(Error::Contract(format!(
            "mock quantizer quality index {q} outside {{0, 1, 2, 3}}"
        )));
    }
    Ok(1u16 << (5 - q))
}

/// Uniform scalar quantization with an exact-bit-count entropy code:
/// horizontally DPCM-predicted quantization levels, coded as zero-run /
/// value pairs in order-0 exponential-Golomb. Deterministic, and
/// `mock_decode` reproduces the reconstruction exactly from the bitstream.
pub fn mock_quantizer_encode(frames: &[Frame], q: u32) -> Result<(CodecOutput, Vec<u8>)> {
    let step = mock_step(q)?;
    let mut writer = BitWriter::new();
    let mut recon = Vec::with_capacity(frames.len());
    for frame in frames {
        let max = frame.geometry.max_value();
        let mut out = frame.clone();
        for (plane, out_plane) in frame.planes().into_iter().zip([
            &mut out.y,
            &mut out.u,
            &mut out.v,
        ]) {
            let w = plane.width;
            let mut zero_run: u64 = 0;
            let mut prev_row_seed: i64 = 0;
            for y in 0..plane.height {
                let mut pred: i64 = prev_row_seed;
                for x in 0..w {
                    let level = (plane.get(x, y) / step) as i64;
                    let residual = level - pred;
                    pred = level;
                    if x == 0 {
                        prev_row_seed = level;
                    }
                    if residual == 0 {
                        zero_run += 1;
                    } else {
                        writer.write_ue(zero_run);
                        writer.write_se(residual);
                        zero_run = 0;
                    }
                    out_plane.set(x, y, reconstruct(level, step, max));
                }
            }
            if zero_run > 0 {
                writer.write_ue(zero_run);
            }
        }
        recon.push(out);
    }
    let bits = writer.bit_len();
    Ok((
        CodecOutput {
            bits,
            reconstruction: recon,
        },
        writer.into_bytes(),
    ))
}

/// Rebuilds the reconstruction from a mock bitstream; exact inverse of the
/// encoder given the same geometry, frame count and quality index.
pub fn mock_decode(
    bitstream: &[u8],
    geometry: FrameGeometry,
    frame_count: usize,
    q: u32,
) -> Result<Vec<Frame>> {
    let step = mock_step(q)?;
    let max = geometry.max_value();
    let mut reader = BitReader::new(bitstream);
    let mut frames = Vec::with_capacity(frame_count);
    for _ in 0..frame_count {
        let mut frame = Frame::new(geometry);
        for plane in [&mut frame.y, &mut frame.u, &mut frame.v] {
            let (w, h) = (plane.width, plane.height);
            let n = w * h;
            // Every zero-run is followed by a value unless it reaches the
            // end of the plane.
            let mut residuals: Vec<i64> = Vec::with_capacity(n);
            while residuals.len() < n {
                let run = reader.read_ue()? as usize;
                if residuals.len() + run > n {
                    return Err(Error::Data("zero-run overflows the plane".into()));
                }
                residuals.resize(residuals.len() + run, 0);
                if residuals.len() < n {
                    residuals.push(reader.read_se()?);
                }
            }
            let mut prev_row_seed: i64 = 0;
            for y in 0..h {
                let mut pred = prev_row_seed;
                for x in 0..w {
                    let level = pred + residuals[y * w + x];
                    pred = level;
                    if x == 0 {
                        prev_row_seed = level;
                    }
                    plane.set(x, y, reconstruct(level, step, max));
                }
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

#[inline]
fn reconstruct(level: i64, step: u16, max: u16) -> u16 {
    let v = level * step as i64 + step as i64 / 2;
    v.clamp(0, max as i64) as u16
}

struct BitWriter {
    bytes: Vec<u8>,
    used: u64,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            used: 0,
        }
    }

    fn write_bit(&mut self, bit: bool) {
        let byte = (self.used / 8) as usize;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.used % 8);
        }
        self.used += 1;
    }

    fn write_bits(&mut self, value: u64, count: u32) {
        for k in (0..count).rev() {
            self.write_bit((value >> k) & 1 == 1);
        }
    }

    /// Order-0 exponential-Golomb code of an unsigned value.
    fn write_ue(&mut self, value: u64) {
        let m = value + 1;
        let nbits = 64 - m.leading_zeros();
        self.write_bits(0, nbits - 1);
        self.write_bits(m, nbits);
    }

    /// Signed mapping: positive v -> 2v-1, non-positive v -> -2v.
    fn write_se(&mut self, value: i64) {
        let mapped = if value > 0 {
            (2 * value - 1) as u64
        } else {
            (-2 * value) as u64
        };
        self.write_ue(mapped);
    }

    fn bit_len(&self) -> u64 {
        self.used
    }

    fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    fn read_bit(&mut self) -> Result<bool> {
        let byte = (self.pos / 8) as usize;
        if byte >= self.bytes.len() {
            return Err(Error::Data("mock bitstream truncated".into()));
        }
        let bit = self.bytes[byte] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    fn read_ue(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::Data("malformed exp-Golomb code".into()));
            }
        }
        let mut value = 1u64;
        for _ in 0..zeros {
            value = (value << 1) | self.read_bit()? as u64;
        }
        Ok(value - 1)
    }

    fn read_se(&mut self) -> Result<i64> {
        let k = self.read_ue()?;
        Ok(if k % 2 == 1 {
            ((k + 1) / 2) as i64
        } else {
            -((k / 2) as i64)
        })
    }
}

// ---------------------------------------------------------------------------
// External command adapter
// ---------------------------------------------------------------------------

/// Parameters substituted into external command templates.
pub struct ExternalCellParams<'a> {
    pub work_dir: &'a Path,
    pub quality: u32,
    pub frame_rate: f64,
}

/// Runs the external encode/decode pair for one cell: writes the input as
/// a raw planar file, substitutes template placeholders, executes both
/// tools, measures the bitstream size, and loads the reconstruction. Tool
/// output is persisted next to the intermediates.
pub fn external_codec_invoke(
    adapter: &CodecAdapter,
    frames: &[Frame],
    params: &ExternalCellParams<'_>,
) -> Result<CodecOutput> {
    let geometry = frames
        .first()
        .map(|f| f.geometry)
        .ok_or_else(|| Error::Contract("external codec needs at least one frame".into()))?;
    let dir = params.work_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let input_path = dir.join("input.raw");
    let bitstream_path = dir.join("bitstream.bin");
    let recon_path = dir.join("recon.raw");
    write_frames(frames, geometry, params.frame_rate, &input_path)?;

    let fill = |template: &str| -> Vec<String> {
        template
            .split_whitespace()
            .map(|token| {
                token
                    .replace("{input}", &input_path.to_string_lossy())
                    .replace("{bitstream}", &bitstream_path.to_string_lossy())
                    .replace("{recon}", &recon_path.to_string_lossy())
                    .replace("{q}", &params.quality.to_string())
                    .replace("{width}", &geometry.width.to_string())
                    .replace("{height}", &geometry.height.to_string())
                    .replace("{bitdepth}", &geometry.bit_depth.to_string())
                    .replace("{framerate}", &params.frame_rate.to_string())
                    .replace("{gop}", &adapter.gop.to_string())
            })
            .collect()
    };

    let encode = adapter
        .encode
        .as_deref()
        .ok_or_else(|| Error::Config("missing encode template".into()))?;
    run_tool(&fill(encode), dir, "encode")?;
    let bitstream_size = std::fs::metadata(&bitstream_path)
        .map_err(|_| Error::Codec("encoder produced no bitstream file".into()))?
        .len();

    let decode = adapter
        .decode
        .as_deref()
        .ok_or_else(|| Error::Config("missing decode template".into()))?;
    run_tool(&fill(decode), dir, "decode")?;

    let recon_seq = YuvSequence::open(&recon_path, geometry, params.frame_rate)
        .map_err(|_| Error::Codec("decoder produced no reconstruction file".into()))?;
    if recon_seq.frame_count < frames.len() {
        return Err(Error::Codec(format!(
            "reconstruction holds {} frames of {}x{}, expected {}",
            recon_seq.frame_count,
            geometry.width,
            geometry.height,
            frames.len()
        )));
    }
    let reconstruction = recon_seq.read_frames(0..frames.len())?;
    Ok(CodecOutput {
        bits: bitstream_size * 8,
        reconstruction,
    })
}

fn run_tool(argv: &[String], dir: &Path, role: &str) -> Result<()> {
    if argv.is_empty() {
        return Err(Error::Config(format!("{role} template is empty")));
    }
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..]).current_dir(dir);
    if let Ok(tools) = std::env::var(TOOLS_ENV_VAR) {
        let path = std::env::var("PATH").unwrap_or_default();
        cmd.env("PATH", format!("{tools}:{path}"));
    }
    let output = cmd
        .output()
        .map_err(|e| Error::Codec(format!("failed to launch {role} tool {:?}: {e}", argv[0])))?;
    let log = dir.join(format!("{role}.log"));
    let mut contents = output.stdout.clone();
    contents.extend_from_slice(&output.stderr);
    std::fs::write(&log, &contents).map_err(|e| Error::io(&log, e))?;
    if !output.status.success() {
        let tail: String = String::from_utf8_lossy(&contents)
            .lines()
            .rev()
            .take(5)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect::<Vec<_>>()
            .join(" | ");
        return Err(Error::Codec(format!(
            "{role} command exited with {:?}: {tail}",
            output.status.code()
        )));
    }
    Ok(())
}
