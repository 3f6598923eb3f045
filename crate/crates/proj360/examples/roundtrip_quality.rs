//! Measures pure resampling loss: a smooth spherical test pattern rendered
//! to ERP 2048x1024 is resampled to ACP 1800x1200 and back, then compared
//! against the original with WS-PSNR. Run with a format name to try other
//! projections:
//!
//! ```text
//! cargo run --release --example roundtrip_quality [acp]
//! ```

use proj360::frame::{ChromaFormat, FrameGeometry};
use proj360::metrics::ws_psnr_plane;
use proj360::pattern::render_frame;
use proj360::projection::{Format, ProjectionSpec};
use proj360::resample::{resample_frame, Kernel};

fn main() -> proj360::Result<()> {
    let format = std::env::args()
        .nth(1)
        .map(|name| Format::from_name(&name))
        .transpose()?
        .unwrap_or(Format::Acp);

    let erp = ProjectionSpec::new(
        Format::Erp,
        FrameGeometry::new(2048, 1024, 8, ChromaFormat::C444)?,
    )?;
    let coding = ProjectionSpec::with_defaults(format, 8, ChromaFormat::C444)?;
    let source = render_frame(&erp, 0.0)?;

    println!(
        "ERP {}x{} -> {} {}x{} -> ERP, luma WS-PSNR of the round trip:",
        2048,
        1024,
        format,
        coding.coded_geometry().width,
        coding.coded_geometry().height
    );
    for kernel in [Kernel::bilinear(), Kernel::lanczos3()] {
        let coded = resample_frame(&source, &erp, &coding, kernel)?;
        let back = resample_frame(&coded, &coding, &erp, kernel)?;
        let ws = ws_psnr_plane(&source.y, &back.y, 255)?;
        println!("  {:<10} {ws:.3} dB", kernel.name());
    }
    Ok(())
}
