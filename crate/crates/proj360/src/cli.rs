//! Thin command-line front end over the library: one-shot format
//! conversion, metrics between two raw files, BD statistics from CSV
//! curves, full pipeline runs, and report re-emission.

use crate::bd::{bd_result, curves_from_csv, FitMode};
use crate::error::{Error, Result};
use crate::frame::{ChromaFormat, FrameGeometry};
use crate::metrics::{aggregate_sequence, QualityResult};
use crate::pipeline::{emit_report, report::load_report, run_pipeline, ReportFormat, RunConfig};
use crate::projection::ProjectionSpec;
use crate::resample::{resample_frame_with_map, Kernel, ResampleMap};
use crate::yuv::{write_frames, YuvSequence};

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "proj360",
    about = "360-degree video projection resampling and codec evaluation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resample a raw YUV sequence between projection formats.
    Convert(ConvertArgs),
    /// PSNR / WS-PSNR between two raw YUV files in ERP geometry.
    Metrics(MetricsArgs),
    /// Bjontegaard-delta statistics from CSV rate-distortion curves.
    Bd(BdArgs),
    /// Run the full evaluation pipeline from a config file.
    Run(RunArgs),
    /// Re-emit report tables from a cached run directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Input raw YUV file.
    #[arg(long)]
    input: PathBuf,
    /// Input projection format (erp, aep, cmp, eac, hec, acp, gcp, ecp).
    #[arg(long)]
    input_format: String,
    /// Input size as WxH.
    #[arg(long)]
    input_size: String,
    /// Output raw YUV file.
    #[arg(long)]
    output: PathBuf,
    /// Output projection format.
    #[arg(long)]
    output_format: String,
    /// Output size as WxH; defaults to the format's reference resolution.
    #[arg(long)]
    output_size: Option<String>,
    #[arg(long, default_value_t = 8)]
    depth: u8,
    /// Chroma format of input and output ("420" or "444").
    #[arg(long, default_value = "420")]
    chroma: String,
    #[arg(long, default_value = "lanczos")]
    kernel: String,
    /// Frames to convert; defaults to the whole file.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long, default_value_t = 30.0)]
    frame_rate: f64,
    /// Polynomial warp coefficients "a,b" applied to both axes of the
    /// output format (acp/gcp/hec only).
    #[arg(long)]
    warp_coeffs: Option<String>,
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference raw YUV file.
    #[arg(long)]
    reference: PathBuf,
    /// Test raw YUV file.
    #[arg(long)]
    test: PathBuf,
    /// Size of both files as WxH.
    #[arg(long)]
    size: String,
    #[arg(long, default_value_t = 8)]
    depth: u8,
    #[arg(long, default_value = "420")]
    chroma: String,
    /// Frames to compare; defaults to the shorter file.
    #[arg(long)]
    frames: Option<usize>,
    /// Print per-frame results in addition to the sequence mean.
    #[arg(long)]
    per_frame: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BdArgs {
    /// CSV file with columns label,rate_bpp,quality_db.
    #[arg(long)]
    curves: PathBuf,
    /// Label of the anchor curve.
    #[arg(long)]
    anchor: String,
    /// Label of the test curve; defaults to every other curve in the file.
    #[arg(long)]
    test: Option<String>,
    /// Fit mode: piecewise-cubic (default) or cubic-poly.
    #[arg(long, default_value = "piecewise-cubic")]
    fit: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory of a previous run.
    #[arg(long)]
    run_dir: PathBuf,
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(args) => convert(args),
        Command::Metrics(args) => metrics(args),
        Command::Bd(args) => bd(args),
        Command::Run(args) => run(args),
        Command::Report(args) => report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn parse_size(text: &str) -> Result<(usize, usize)> {
    let (w, h) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("size {text:?} is not WxH")))?;
    Ok((
        w.parse()
            .map_err(|e| Error::Config(format!("bad width {w:?}: {e}")))?,
        h.parse()
            .map_err(|e| Error::Config(format!("bad height {h:?}: {e}")))?,
    ))
}

fn parse_coeffs(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("coefficients {text:?} are not \"a,b\"")))?;
    Ok((
        a.trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad coefficient {a:?}: {e}")))?,
        b.trim()
            .parse()
            .map_err(|e| Error::Config(format!("bad coefficient {b:?}: {e}")))?,
    ))
}

fn convert(args: ConvertArgs) -> Result<()> {
    let chroma = ChromaFormat::from_name(&args.chroma)?;
    let (iw, ih) = parse_size(&args.input_size)?;
    let src_spec = ProjectionSpec::from_name(
        &args.input_format,
        FrameGeometry::new(iw, ih, args.depth, chroma)?,
    )?;
    let dst_format = crate::projection::Format::from_name(&args.output_format)?;
    let (ow, oh) = match &args.output_size {
        Some(s) => parse_size(s)?,
        None => dst_format.default_coded_size(),
    };
    let mut dst_spec = ProjectionSpec::new(
        dst_format,
        FrameGeometry::new(ow, oh, args.depth, chroma)?,
    )?;
    if let Some(coeffs) = &args.warp_coeffs {
        let pair = parse_coeffs(coeffs)?;
        dst_spec = dst_spec.with_warp_coeffs(pair, pair)?;
    }
    let kernel = Kernel::from_name(&args.kernel)?;

    let seq = YuvSequence::open(&args.input, *src_spec.coded_geometry(), args.frame_rate)?;
    let count = args.frames.unwrap_or(seq.frame_count).min(seq.frame_count);
    let frames = seq.read_frames(0..count)?;
    let map = ResampleMap::build(&src_spec, &dst_spec)?;
    let converted = frames
        .iter()
        .map(|f| resample_frame_with_map(f, &map, kernel))
        .collect::<Result<Vec<_>>>()?;
    write_frames(
        &converted,
        *dst_spec.coded_geometry(),
        args.frame_rate,
        &args.output,
    )?;
    println!(
        "converted {count} frame(s) {}:{}x{} -> {}:{}x{} ({})",
        args.input_format, iw, ih, args.output_format, ow, oh, args.kernel
    );
    Ok(())
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let chroma = ChromaFormat::from_name(&args.chroma)?;
    let (w, h) = parse_size(&args.size)?;
    let geometry = FrameGeometry::new(w, h, args.depth, chroma)?;
    let reference = YuvSequence::open(&args.reference, geometry, 30.0)?;
    let test = YuvSequence::open(&args.test, geometry, 30.0)?;
    let count = args
        .frames
        .unwrap_or(usize::MAX)
        .min(reference.frame_count)
        .min(test.frame_count);
    if count == 0 {
        return Err(Error::Contract("no frames to compare".into()));
    }
    let ref_frames = reference.read_frames(0..count)?;
    let test_frames = test.read_frames(0..count)?;
    let per_frame: Vec<QualityResult> = ref_frames
        .iter()
        .zip(&test_frames)
        .map(|(a, b)| QualityResult::between(a, b))
        .collect::<Result<_>>()?;
    let mean = aggregate_sequence(&per_frame)?;
    if args.json {
        #[derive(serde::Serialize)]
        struct Out<'a> {
            frames: usize,
            mean: &'a QualityResult,
            #[serde(skip_serializing_if = "Option::is_none")]
            per_frame: Option<&'a [QualityResult]>,
        }
        let out = Out {
            frames: count,
            mean: &mean,
            per_frame: args.per_frame.then_some(&per_frame),
        };
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        if args.per_frame {
            for (i, q) in per_frame.iter().enumerate() {
                println!(
                    "frame {i:4}: YUV-PSNR {:8.4} dB  YUV-WS-PSNR {:8.4} dB{}",
                    q.yuv_psnr,
                    q.yuv_wspsnr,
                    if q.lossless { "  (lossless)" } else { "" }
                );
            }
        }
        println!("frames compared : {count}");
        println!(
            "PSNR    (Y/U/V) : {:.4} / {:.4} / {:.4} dB",
            mean.psnr_y, mean.psnr_u, mean.psnr_v
        );
        println!("YUV-PSNR        : {:.4} dB", mean.yuv_psnr);
        println!(
            "WS-PSNR (Y/U/V) : {:.4} / {:.4} / {:.4} dB",
            mean.wspsnr_y, mean.wspsnr_u, mean.wspsnr_v
        );
        println!("YUV-WS-PSNR     : {:.4} dB", mean.yuv_wspsnr);
        if mean.lossless {
            println!("note            : lossless, dB values capped");
        }
    }
    Ok(())
}

fn bd(args: BdArgs) -> Result<()> {
    let fit = FitMode::from_name(&args.fit)?;
    let file = std::fs::File::open(&args.curves).map_err(|e| Error::io(&args.curves, e))?;
    let curves = curves_from_csv(file)?;
    let anchor = curves
        .iter()
        .find(|(label, _)| *label == args.anchor)
        .ok_or_else(|| Error::Config(format!("anchor label {:?} not in CSV", args.anchor)))?;
    let tests: Vec<&(String, crate::bd::RdCurve)> = match &args.test {
        Some(t) => vec![curves
            .iter()
            .find(|(label, _)| label == t)
            .ok_or_else(|| Error::Config(format!("test label {t:?} not in CSV")))?],
        None => curves.iter().filter(|(l, _)| *l != args.anchor).collect(),
    };
    if tests.is_empty() {
        return Err(Error::Config("no test curves in CSV".into()));
    }
    #[derive(serde::Serialize)]
    struct Row<'a> {
        anchor: &'a str,
        test: &'a str,
        #[serde(flatten)]
        result: crate::bd::BdResult,
    }
    let mut rows = Vec::new();
    for (label, curve) in tests {
        let result = bd_result(&anchor.1, curve, fit)?;
        rows.push(Row {
            anchor: &args.anchor,
            test: label,
            result,
        });
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows).unwrap());
    } else {
        println!(
            "{:<16} {:<16} {:>12} {:>14} {:>8}  flag",
            "anchor", "test", "BD-rate (%)", "BD-qual (dB)", "IoU"
        );
        for row in rows {
            println!(
                "{:<16} {:<16} {:>12.4} {:>14.4} {:>8.4}  {}",
                row.anchor,
                row.test,
                row.result.bd_rate,
                row.result.bd_quality,
                row.result.iou,
                if row.result.flagged { "*" } else { "" }
            );
        }
        println!("*: quality-axis IoU below 1/3; treat with caution");
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = RunConfig::from_toml_path(&args.config)?;
    let report = run_pipeline(&cfg)?;
    println!(
        "run complete: {} cell(s) in report, output in {}",
        report.cells.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let report = load_report(&args.run_dir)?;
    let written = emit_report(
        &report,
        &args.run_dir,
        &[ReportFormat::Csv, ReportFormat::Markdown],
    )?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
