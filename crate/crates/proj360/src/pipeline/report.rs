//! Report emission: per-cell tables plus per-codec BD tables against the
//! ERP anchor, in CSV, JSON and markdown. Output is deterministic (stable
//! ordering, fixed float formatting) so reruns are byte-identical.

use crate::error::{Error, Result};
use crate::pipeline::{BdRow, EvalReport};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

/// Writes the report files into `dir` and returns the paths written.
pub fn emit_report(
    report: &EvalReport,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    if report.cells.is_empty() {
        return Err(Error::Contract(
            "refusing to emit a report with zero completed cells".into(),
        ));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut write = |name: &str, contents: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for format in formats {
        match format {
            ReportFormat::Json => {
                let mut text = serde_json::to_string_pretty(report)
                    .map_err(|e| Error::Contract(format!("report serialization: {e}")))?;
                text.push('\n');
                write("report.json", text)?;
            }
            ReportFormat::Csv => {
                write("cells.csv", cells_csv(report))?;
                write("bd_psnr.csv", bd_csv(&report.bd_tables.psnr))?;
                write("bd_wspsnr.csv", bd_csv(&report.bd_tables.wspsnr))?;
            }
            ReportFormat::Markdown => write("report.md", markdown(report))?,
        }
    }
    Ok(written)
}

fn cells_csv(report: &EvalReport) -> String {
    let mut out = String::from(
        "sequence,codec,format,quality,rate_bpp,bits,psnr_y,psnr_u,psnr_v,yuv_psnr,\
         wspsnr_y,wspsnr_u,wspsnr_v,yuv_wspsnr,lossless\n",
    );
    for cell in &report.cells {
        let m = &cell.result.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{:.8},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            cell.key.sequence,
            cell.key.codec,
            cell.key.format,
            cell.key.quality,
            cell.result.rate_bpp,
            cell.result.bits,
            m.psnr_y,
            m.psnr_u,
            m.psnr_v,
            m.yuv_psnr,
            m.wspsnr_y,
            m.wspsnr_u,
            m.wspsnr_v,
            m.yuv_wspsnr,
            m.lossless,
        );
    }
    out
}

fn bd_csv(rows: &[BdRow]) -> String {
    let mut out = String::from("codec,format,bd_rate_pct,bd_quality_db,iou,flagged,note\n");
    for row in rows {
        match &row.result {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{:.4},{:.4},{:.4},{},",
                    row.codec, row.format, r.bd_rate, r.bd_quality, r.iou, r.flagged
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "{},{},,,,,{}",
                    row.codec,
                    row.format,
                    row.note.as_deref().unwrap_or("unavailable")
                );
            }
        }
    }
    out
}

fn markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Evaluation report\n");
    let _ = writeln!(out, "Rate normalization: {}.", report.rate_normalization);
    let _ = writeln!(out, "BD fit: {}.\n", report.fit);

    let _ = writeln!(out, "## Cells\n");
    let _ = writeln!(
        out,
        "| sequence | codec | format | q | rate (bpp) | YUV-PSNR (dB) | YUV-WS-PSNR (dB) |"
    );
    let _ = writeln!(out, "|---|---|---|---:|---:|---:|---:|");
    for cell in &report.cells {
        let m = &cell.result.metrics;
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {:.6} | {:.4}{} | {:.4}{} |",
            cell.key.sequence,
            cell.key.codec,
            cell.key.format,
            cell.key.quality,
            cell.result.rate_bpp,
            m.yuv_psnr,
            if m.lossless { " (lossless)" } else { "" },
            m.yuv_wspsnr,
            if m.lossless { " (lossless)" } else { "" },
        );
    }

    for (title, rows) in [
        ("BD-rate vs ERP (YUV-PSNR)", &report.bd_tables.psnr),
        ("BD-rate vs ERP (YUV-WS-PSNR)", &report.bd_tables.wspsnr),
    ] {
        let _ = writeln!(out, "\n## {title}\n");
        if rows.is_empty() {
            let _ = writeln!(out, "_No BD table: insufficient usable points._");
            continue;
        }
        let _ = writeln!(out, "| codec | format | BD-rate (%) | BD-quality (dB) | IoU |");
        let _ = writeln!(out, "|---|---|---:|---:|---:|");
        for row in rows {
            match &row.result {
                Some(r) => {
                    // The asterisk marks entries whose quality ranges
                    // overlap by less than a third.
                    let star = if r.flagged { "*" } else { "" };
                    let _ = writeln!(
                        out,
                        "| {} | {} | {:.2}{star} | {:.3}{star} | {:.3} |",
                        row.codec, row.format, r.bd_rate, r.bd_quality, r.iou
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | n/a | n/a | n/a |",
                        row.codec, row.format
                    );
                }
            }
        }
        let _ = writeln!(
            out,
            "\n`*`: quality-axis IoU below 1/3; treat the entry with caution."
        );
    }
    if let Some(note) = &report.bd_tables.note {
        let _ = writeln!(out, "\nNotes: {note}");
    }
    out
}

/// Loads a previously emitted `report.json` for re-emission.
pub fn load_report(dir: &Path) -> Result<EvalReport> {
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::PipelineState(format!("cannot parse {}: {e}", path.display())))
}
