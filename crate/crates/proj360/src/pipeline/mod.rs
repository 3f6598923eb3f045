//! Codec-in-the-loop evaluation pipeline.
//!
//! Per (sequence, format, quality) cell: read the ERP source, convert to
//! 4:4:4, resample to the coding projection at its coded resolution, hand
//! the frames to the codec adapter (with BT.709 RGB conversion when
//! configured), decode, resample back to the source ERP geometry, return
//! to 4:2:0, and measure PSNR/WS-PSNR against the untouched source. Rates
//! are bitstream bits over source pixels, so differently sized coded
//! formats compare against the same denominator.
//!
//! Cells are cached in the output directory, keyed by a hash of the
//! cell-relevant configuration; reruns skip completed cells and produce
//! byte-identical reports.

pub mod codec;
pub mod report;

pub use codec::{
    external_codec_invoke, mock_decode, mock_quantizer_encode, CodecAdapter, CodecKind,
    CodecOutput, ColorMode, ExternalCellParams,
};
pub use report::{emit_report, ReportFormat};

use crate::bd::{bd_result, BdResult, FitMode, RdCurve};
use crate::error::{Error, Result};
use crate::frame::{ChromaFormat, Frame, FrameGeometry, Plane, RgbFrame};
use crate::metrics::{aggregate_sequence, QualityResult};
use crate::projection::{Format, ProjectionSpec, SpecKey};
use crate::resample::{chroma_420_to_444, chroma_444_to_420, resample_frame_with_map, Kernel, ResampleMap};
use crate::yuv::{rgb_to_yuv_bt709_ranged, yuv_to_rgb_bt709_ranged, YuvSequence};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Coded resolutions of the reference evaluation procedure, recorded in
/// every run manifest. The active GCP resolution here is the cube-family
/// grid (1800x1200) since GCP is realized as the parametric cube; the
/// table keeps the format-specific reference values alongside.
pub const REFERENCE_CODED_RESOLUTIONS: [(&str, usize, usize); 10] = [
    ("erp", 2048, 1024),
    ("aep", 2048, 1024),
    ("cmp", 1800, 1200),
    ("eac", 1800, 1200),
    ("hec", 1800, 1200),
    ("acp", 1800, 1200),
    ("ecp", 1800, 1200),
    ("rsp", 1800, 1200),
    ("gcp", 1816, 1232),
    ("isp", 1306, 1672),
];

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub name: String,
    pub path: PathBuf,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    #[serde(default = "default_chroma")]
    pub chroma: String,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    /// Frames to code from the start of the sequence.
    #[serde(default = "default_frames")]
    pub frames: usize,
}

fn default_bit_depth() -> u8 {
    8
}
fn default_chroma() -> String {
    "420".into()
}
fn default_frame_rate() -> f64 {
    30.0
}
fn default_frames() -> usize {
    32
}

impl SequenceConfig {
    pub fn geometry(&self) -> Result<FrameGeometry> {
        FrameGeometry::new(
            self.width,
            self.height,
            self.bit_depth,
            ChromaFormat::from_name(&self.chroma)?,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormatConfig {
    pub name: String,
    /// Coded width/height; defaults to the format's reference resolution.
    pub width: Option<usize>,
    pub height: Option<usize>,
    /// Optional polynomial warp coefficient overrides (a, b) per axis.
    pub horiz_coeffs: Option<(f64, f64)>,
    pub vert_coeffs: Option<(f64, f64)>,
}

impl FormatConfig {
    pub fn named(name: &str) -> Self {
        FormatConfig {
            name: name.into(),
            width: None,
            height: None,
            horiz_coeffs: None,
            vert_coeffs: None,
        }
    }

    pub fn with_size(name: &str, width: usize, height: usize) -> Self {
        FormatConfig {
            width: Some(width),
            height: Some(height),
            ..FormatConfig::named(name)
        }
    }

    pub fn coded_size(&self) -> Result<(usize, usize)> {
        let format = Format::from_name(&self.name)?;
        let (dw, dh) = format.default_coded_size();
        Ok((self.width.unwrap_or(dw), self.height.unwrap_or(dh)))
    }

    /// Builds the projection spec at the given bit depth and chroma format.
    pub fn spec(&self, bit_depth: u8, chroma: ChromaFormat) -> Result<ProjectionSpec> {
        let format = Format::from_name(&self.name)?;
        let (w, h) = self.coded_size()?;
        let mut spec = ProjectionSpec::new(format, FrameGeometry::new(w, h, bit_depth, chroma)?)?;
        if self.horiz_coeffs.is_some() || self.vert_coeffs.is_some() {
            let (dh, dv) = spec.warp_coeffs();
            spec = spec.with_warp_coeffs(
                self.horiz_coeffs.unwrap_or(dh),
                self.vert_coeffs.unwrap_or(dv),
            )?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub output_dir: PathBuf,
    pub codec: CodecAdapter,
    pub sequences: Vec<SequenceConfig>,
    pub formats: Vec<FormatConfig>,
    #[serde(default = "default_qualities")]
    pub qualities: Vec<u32>,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    /// Worker cap for the cell pool; 0 uses the rayon default.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_fit")]
    pub fit: String,
}

fn default_version() -> u32 {
    1
}
fn default_qualities() -> Vec<u32> {
    vec![0, 1, 2, 3]
}
fn default_kernel() -> String {
    "lanczos".into()
}
fn default_fit() -> String {
    "piecewise-cubic".into()
}

/// TOML view of [`RunConfig`] with the codec section in friendlier shape.
#[derive(Debug, Deserialize)]
struct RunConfigFile {
    #[serde(default = "default_version")]
    version: u32,
    output_dir: PathBuf,
    codec: CodecSection,
    #[serde(rename = "sequences", default)]
    sequences: Vec<SequenceConfig>,
    #[serde(rename = "formats", default)]
    formats: Vec<FormatConfigFile>,
    #[serde(default)]
    run: RunSection,
}

#[derive(Debug, Deserialize)]
struct CodecSection {
    kind: CodecKind,
    name: Option<String>,
    encode: Option<String>,
    decode: Option<String>,
    #[serde(default = "default_color_mode")]
    color_mode: ColorMode,
    #[serde(default = "default_color_range")]
    color_range: crate::yuv::YuvRange,
    #[serde(default = "default_gop")]
    gop: u32,
}

fn default_color_mode() -> ColorMode {
    ColorMode::YuvDirect
}
fn default_color_range() -> crate::yuv::YuvRange {
    crate::yuv::YuvRange::Limited
}
fn default_gop() -> u32 {
    32
}

#[derive(Debug, Deserialize)]
struct FormatConfigFile {
    name: String,
    width: Option<usize>,
    height: Option<usize>,
    horiz_coeffs: Option<Vec<f64>>,
    vert_coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
struct RunSection {
    qualities: Option<Vec<u32>>,
    kernel: Option<String>,
    parallelism: Option<usize>,
    fit: Option<String>,
}

impl RunConfig {
    /// Parses the TOML config format; relative paths resolve against
    /// `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let file: RunConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        if file.version != 1 {
            return Err(Error::Config(format!(
                "unsupported config version {}",
                file.version
            )));
        }
        let coeff_pair = |v: &Option<Vec<f64>>, axis: &str| -> Result<Option<(f64, f64)>> {
            match v {
                None => Ok(None),
                Some(c) if c.len() == 2 => Ok(Some((c[0], c[1]))),
                Some(c) => Err(Error::Config(format!(
                    "{axis} coefficients need exactly 2 entries, got {}",
                    c.len()
                ))),
            }
        };
        let formats = file
            .formats
            .iter()
            .map(|f| {
                Ok(FormatConfig {
                    name: f.name.clone(),
                    width: f.width,
                    height: f.height,
                    horiz_coeffs: coeff_pair(&f.horiz_coeffs, "horizontal")?,
                    vert_coeffs: coeff_pair(&f.vert_coeffs, "vertical")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let resolve = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let cfg = RunConfig {
            version: file.version,
            output_dir: resolve(&file.output_dir),
            codec: CodecAdapter {
                kind: file.codec.kind,
                name: file.codec.name.unwrap_or_else(|| {
                    match file.codec.kind {
                        CodecKind::ExternalCommand => "external",
                        CodecKind::MockQuantizer => "mock-quantizer",
                        CodecKind::Null => "null",
                    }
                    .into()
                }),
                encode: file.codec.encode,
                decode: file.codec.decode,
                color_mode: file.codec.color_mode,
                color_range: file.codec.color_range,
                gop: file.codec.gop,
            },
            sequences: file
                .sequences
                .into_iter()
                .map(|mut s| {
                    s.path = resolve(&s.path);
                    s
                })
                .collect(),
            formats,
            qualities: file.run.qualities.unwrap_or_else(default_qualities),
            kernel: file.run.kernel.unwrap_or_else(default_kernel),
            parallelism: file.run.parallelism.unwrap_or(0),
            fit: file.run.fit.unwrap_or_else(default_fit),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn kernel_obj(&self) -> Result<Kernel> {
        Kernel::from_name(&self.kernel)
    }

    pub fn fit_mode(&self) -> Result<FitMode> {
        FitMode::from_name(&self.fit)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequences.is_empty() {
            return Err(Error::Config("at least one sequence is required".into()));
        }
        if self.formats.is_empty() {
            return Err(Error::Config("at least one format is required".into()));
        }
        if self.qualities.len() < 2 {
            return Err(Error::Config(
                "at least two quality points are required for BD computation".into(),
            ));
        }
        let mut names: Vec<&str> = self.formats.iter().map(|f| f.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.formats.len() {
            return Err(Error::Config("duplicate format names".into()));
        }
        for s in &self.sequences {
            s.geometry()?;
        }
        for f in &self.formats {
            // Geometry and coefficient validation at 4:4:4.
            let g = self.sequences[0].geometry()?;
            f.spec(g.bit_depth, ChromaFormat::C444)?;
        }
        self.codec.validate()?;
        for &q in &self.qualities {
            self.codec.validate_quality(q)?;
        }
        self.kernel_obj()?;
        self.fit_mode()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub sequence: String,
    pub codec: String,
    pub format: String,
    pub quality: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub rate_bpp: f64,
    pub bits: u64,
    pub metrics: QualityResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportCell {
    #[serde(flatten)]
    pub key: CellKey,
    #[serde(flatten)]
    pub result: CellResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BdRow {
    pub codec: String,
    pub format: String,
    pub result: Option<BdResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BdTables {
    /// Rows based on YUV-PSNR quality.
    pub psnr: Vec<BdRow>,
    /// Rows based on YUV-WS-PSNR quality.
    pub wspsnr: Vec<BdRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    /// Rates divide bitstream bits by source ERP pixels, not coded pixels.
    pub rate_normalization: String,
    pub fit: String,
    pub cells: Vec<ReportCell>,
    pub bd_tables: BdTables,
}

#[derive(Debug, Clone, Serialize)]
struct CellStatus {
    #[serde(flatten)]
    key: CellKey,
    cache_id: String,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    rate_normalization: &'a str,
    reference_coded_resolutions: BTreeMap<&'static str, (usize, usize)>,
    active_coded_resolutions: BTreeMap<String, (usize, usize)>,
    config: &'a RunConfig,
    cells: Vec<CellStatus>,
}

struct CellTask {
    key: CellKey,
    cache_id: String,
    dir: PathBuf,
    sequence: Arc<SequenceData>,
    forward: Arc<ResampleMap>,
    backward: Arc<ResampleMap>,
    quality: u32,
}

struct SequenceData {
    cfg: SequenceConfig,
    geometry: FrameGeometry,
    /// Untouched source frames (metric reference).
    source: Vec<Frame>,
    /// Source after 4:2:0 -> 4:4:4 (codec path input).
    source444: Vec<Frame>,
}

/// Stable cache identifier for one cell: a truncated SHA-256 of every
/// configuration field the cell's output depends on.
fn cell_cache_id(cfg: &RunConfig, seq: &SequenceConfig, fmt: &FormatConfig, q: u32) -> String {
    let mut hasher = Sha256::new();
    let descriptor = format!(
        "cell-v1|seq:{}|{}|{}x{}|{}|{}|{}|{}|fmt:{}|{:?}x{:?}|{:?}|{:?}|q:{q}|codec:{:?}|{}|{:?}|{:?}|{:?}|{:?}|{}|kernel:{}",
        seq.name,
        seq.path.display(),
        seq.width,
        seq.height,
        seq.bit_depth,
        seq.chroma,
        seq.frame_rate,
        seq.frames,
        fmt.name,
        fmt.width,
        fmt.height,
        fmt.horiz_coeffs,
        fmt.vert_coeffs,
        cfg.codec.kind,
        cfg.codec.name,
        cfg.codec.encode,
        cfg.codec.decode,
        cfg.codec.color_mode,
        cfg.codec.color_range,
        cfg.codec.gop,
        cfg.kernel,
    );
    hasher.update(descriptor.as_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Pipeline execution
// ---------------------------------------------------------------------------

/// Runs the full evaluation and writes manifest + report files into the
/// output directory. Completed cells found in the cache are reused.
pub fn run_pipeline(cfg: &RunConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let kernel = cfg.kernel_obj()?;
    let fit = cfg.fit_mode()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;

    // Load sources once per sequence.
    let mut sequences = Vec::new();
    for seq_cfg in &cfg.sequences {
        let geometry = seq_cfg.geometry()?;
        let file = YuvSequence::open(&seq_cfg.path, geometry, seq_cfg.frame_rate)?;
        if file.frame_count < seq_cfg.frames {
            return Err(Error::Config(format!(
                "sequence {} has {} frames, config asks for {}",
                seq_cfg.name, file.frame_count, seq_cfg.frames
            )));
        }
        let source = file.read_frames(0..seq_cfg.frames)?;
        let source444 = match geometry.chroma {
            ChromaFormat::C420 => source
                .iter()
                .map(chroma_420_to_444)
                .collect::<Result<Vec<_>>>()?,
            ChromaFormat::C444 => source.clone(),
        };
        sequences.push(Arc::new(SequenceData {
            cfg: seq_cfg.clone(),
            geometry,
            source,
            source444,
        }));
    }

    // Coordinate maps are built once, single-threaded, then shared
    // read-only by the cell pool.
    let mut map_cache: HashMap<(SpecKey, SpecKey), Arc<ResampleMap>> = HashMap::new();
    let mut build_map = |from: &ProjectionSpec, to: &ProjectionSpec| -> Result<Arc<ResampleMap>> {
        let key = (from.mapping_key(), to.mapping_key());
        if let Some(m) = map_cache.get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(ResampleMap::build(from, to)?);
        map_cache.insert(key, m.clone());
        Ok(m)
    };
    let mut tasks = Vec::new();
    for sequence in &sequences {
        let depth = sequence.geometry.bit_depth;
        let src_spec = ProjectionSpec::new(
            Format::Erp,
            FrameGeometry::new(
                sequence.geometry.width,
                sequence.geometry.height,
                depth,
                ChromaFormat::C444,
            )?,
        )?;
        for fmt in &cfg.formats {
            let dst_spec = fmt.spec(depth, ChromaFormat::C444)?;
            let forward = build_map(&src_spec, &dst_spec)?;
            let backward = build_map(&dst_spec, &src_spec)?;
            for &q in &cfg.qualities {
                let cache_id = cell_cache_id(cfg, &sequence.cfg, fmt, q);
                tasks.push(CellTask {
                    key: CellKey {
                        sequence: sequence.cfg.name.clone(),
                        codec: cfg.codec.name.clone(),
                        format: fmt.name.clone(),
                        quality: q,
                    },
                    dir: cfg.output_dir.join("cells").join(&cache_id),
                    cache_id,
                    sequence: sequence.clone(),
                    forward: forward.clone(),
                    backward: backward.clone(),
                    quality: q,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<std::result::Result<CellResult, String>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| run_cell(cfg, task, kernel).map_err(|e| e.to_string()))
            .collect()
    });

    // Assemble report rows (sorted) and manifest statuses (task order).
    let mut cells = Vec::new();
    let mut statuses = Vec::new();
    for (task, outcome) in tasks.iter().zip(&outcomes) {
        match outcome {
            Ok(result) => {
                cells.push(ReportCell {
                    key: task.key.clone(),
                    result: result.clone(),
                });
                statuses.push(CellStatus {
                    key: task.key.clone(),
                    cache_id: task.cache_id.clone(),
                    status: "ok",
                    error: None,
                });
            }
            Err(message) => statuses.push(CellStatus {
                key: task.key.clone(),
                cache_id: task.cache_id.clone(),
                status: "failed",
                error: Some(message.clone()),
            }),
        }
    }
    cells.sort_by(|a, b| a.key.cmp(&b.key));

    let report = EvalReport {
        schema_version: 1,
        rate_normalization: "bits / (source width x height x frames)".into(),
        fit: cfg.fit.clone(),
        bd_tables: build_bd_tables(&cells, fit),
        cells,
    };

    let mut active = BTreeMap::new();
    for fmt in &cfg.formats {
        active.insert(fmt.name.clone(), fmt.coded_size()?);
    }
    let manifest = Manifest {
        schema_version: 1,
        rate_normalization: &report.rate_normalization,
        reference_coded_resolutions: REFERENCE_CODED_RESOLUTIONS
            .iter()
            .map(|&(n, w, h)| (n, (w, h)))
            .collect(),
        active_coded_resolutions: active,
        config: cfg,
        cells: statuses,
    };
    write_json(&cfg.output_dir.join("manifest.json"), &manifest)?;
    emit_report(
        &report,
        &cfg.output_dir,
        &[ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown],
    )?;
    Ok(report)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Contract(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run_cell(cfg: &RunConfig, task: &CellTask, kernel: Kernel) -> Result<CellResult> {
    let result_path = task.dir.join("result.json");
    if let Ok(text) = std::fs::read_to_string(&result_path) {
        match serde_json::from_str::<CellResult>(&text) {
            Ok(cached) => return Ok(cached),
            Err(e) => {
                return Err(Error::PipelineState(format!(
                    "cached result {} is unreadable: {e}",
                    result_path.display()
                )))
            }
        }
    }
    std::fs::create_dir_all(&task.dir).map_err(|e| Error::io(&task.dir, e))?;

    let seq = &task.sequence;
    let coded: Vec<Frame> = seq
        .source444
        .iter()
        .map(|f| resample_frame_with_map(f, &task.forward, kernel))
        .collect::<Result<_>>()?;

    let codec_input: Vec<Frame> = match cfg.codec.color_mode {
        ColorMode::YuvDirect => coded,
        ColorMode::RgbBt709 => coded
            .iter()
            .map(|f| {
                yuv_to_rgb_bt709_ranged(f, cfg.codec.color_range).map(rgb_planes_as_frame)
            })
            .collect::<Result<_>>()?,
    };

    let output = match cfg.codec.kind {
        CodecKind::Null => CodecOutput {
            bits: 0,
            reconstruction: codec_input.clone(),
        },
        CodecKind::MockQuantizer => {
            let (out, bitstream) = mock_quantizer_encode(&codec_input, task.quality)?;
            let bs_path = task.dir.join("bitstream.bin");
            std::fs::write(&bs_path, &bitstream).map_err(|e| Error::io(&bs_path, e))?;
            out
        }
        CodecKind::ExternalCommand => external_codec_invoke(
            &cfg.codec,
            &codec_input,
            &ExternalCellParams {
                work_dir: &task.dir,
                quality: task.quality,
                frame_rate: seq.cfg.frame_rate,
            },
        )?,
    };

    let recon_yuv: Vec<Frame> = match cfg.codec.color_mode {
        ColorMode::YuvDirect => output.reconstruction,
        ColorMode::RgbBt709 => output
            .reconstruction
            .iter()
            .map(|f| rgb_to_yuv_bt709_ranged(&frame_as_rgb_planes(f), cfg.codec.color_range))
            .collect::<Result<_>>()?,
    };

    let mut per_frame = Vec::with_capacity(recon_yuv.len());
    for (recon, source) in recon_yuv.iter().zip(&seq.source) {
        let back = resample_frame_with_map(recon, &task.backward, kernel)?;
        let restored = match seq.geometry.chroma {
            ChromaFormat::C420 => chroma_444_to_420(&back)?,
            ChromaFormat::C444 => back,
        };
        per_frame.push(QualityResult::between(source, &restored)?);
    }
    let metrics = aggregate_sequence(&per_frame)?;
    let pixels = (seq.geometry.width * seq.geometry.height * seq.cfg.frames) as f64;
    let result = CellResult {
        rate_bpp: output.bits as f64 / pixels,
        bits: output.bits,
        metrics,
    };
    write_json(&result_path, &result)?;
    Ok(result)
}

/// Repackages RGB planes into the planar frame container used by codec
/// adapters (R, G, B in the Y, U, V slots).
fn rgb_planes_as_frame(rgb: RgbFrame) -> Frame {
    let geometry = FrameGeometry {
        width: rgb.width,
        height: rgb.height,
        bit_depth: rgb.bit_depth,
        chroma: ChromaFormat::C444,
    };
    Frame {
        y: rgb.r,
        u: rgb.g,
        v: rgb.b,
        geometry,
    }
}

fn frame_as_rgb_planes(f: &Frame) -> RgbFrame {
    RgbFrame {
        r: Plane {
            width: f.y.width,
            height: f.y.height,
            data: f.y.data.clone(),
        },
        g: Plane {
            width: f.u.width,
            height: f.u.height,
            data: f.u.data.clone(),
        },
        b: Plane {
            width: f.v.width,
            height: f.v.height,
            data: f.v.data.clone(),
        },
        width: f.geometry.width,
        height: f.geometry.height,
        bit_depth: f.geometry.bit_depth,
    }
}

// ---------------------------------------------------------------------------
// BD table assembly
// ---------------------------------------------------------------------------

fn curve_for(
    cells: &[ReportCell],
    codec: &str,
    format: &str,
    metric: impl Fn(&QualityResult) -> f64,
) -> std::result::Result<RdCurve, String> {
    let points: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.key.codec == codec && c.key.format == format)
        .filter(|c| !c.result.metrics.lossless && c.result.rate_bpp > 0.0)
        .map(|c| (c.result.rate_bpp, metric(&c.result.metrics)))
        .collect();
    if points.len() < 3 {
        return Err(format!(
            "{} usable points (need 3); lossless or zero-rate cells are excluded",
            points.len()
        ));
    }
    RdCurve::new(points).map_err(|e| e.to_string())
}

fn build_bd_tables(cells: &[ReportCell], fit: FitMode) -> BdTables {
    let mut codecs: Vec<String> = cells.iter().map(|c| c.key.codec.clone()).collect();
    codecs.sort();
    codecs.dedup();
    let mut tables = BdTables::default();
    let mut notes = Vec::new();

    for codec in &codecs {
        let mut formats: Vec<String> = cells
            .iter()
            .filter(|c| c.key.codec == *codec)
            .map(|c| c.key.format.clone())
            .collect();
        formats.sort();
        formats.dedup();
        if !formats.iter().any(|f| f == "erp") {
            notes.push(format!("{codec}: no ERP cells, BD anchor unavailable"));
            continue;
        }

        for (metric, rows) in [
            (
                &(|q: &QualityResult| q.yuv_psnr) as &dyn Fn(&QualityResult) -> f64,
                &mut tables.psnr,
            ),
            (
                &(|q: &QualityResult| q.yuv_wspsnr) as &dyn Fn(&QualityResult) -> f64,
                &mut tables.wspsnr,
            ),
        ] {
            let anchor = match curve_for(cells, codec, "erp", metric) {
                Ok(c) => c,
                Err(why) => {
                    notes.push(format!("{codec}: ERP anchor curve unavailable ({why})"));
                    continue;
                }
            };
            for format in &formats {
                let row = match curve_for(cells, codec, format, metric) {
                    Ok(test) => match bd_result(&anchor, &test, fit) {
                        Ok(result) => BdRow {
                            codec: codec.clone(),
                            format: format.clone(),
                            result: Some(result),
                            note: None,
                        },
                        Err(e) => BdRow {
                            codec: codec.clone(),
                            format: format.clone(),
                            result: None,
                            note: Some(e.to_string()),
                        },
                    },
                    Err(why) => BdRow {
                        codec: codec.clone(),
                        format: format.clone(),
                        result: None,
                        note: Some(why),
                    },
                };
                rows.push(row);
            }
        }
    }
    if !notes.is_empty() {
        notes.sort();
        notes.dedup();
        tables.note = Some(notes.join("; "));
    }
    tables
}

#[cfg(test)]
mod tests;
