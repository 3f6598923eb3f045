use super::*;
use crate::pattern::render_clip;
use crate::yuv::write_frames;

use std::path::Path;

fn make_clip(dir: &Path, name: &str, w: usize, h: usize, frames: usize) -> PathBuf {
    let geometry = FrameGeometry::new(w, h, 8, ChromaFormat::C420).unwrap();
    let spec = ProjectionSpec::new(Format::Erp, geometry).unwrap();
    let clip = render_clip(&spec, frames).unwrap();
    let path = dir.join(name);
    write_frames(&clip, geometry, 30.0, &path).unwrap();
    path
}

fn mock_config(dir: &Path, clip: &Path) -> RunConfig {
    RunConfig {
        version: 1,
        output_dir: dir.join("out"),
        codec: CodecAdapter::mock_quantizer(),
        sequences: vec![SequenceConfig {
            name: "clip".into(),
            path: clip.to_path_buf(),
            width: 64,
            height: 32,
            bit_depth: 8,
            chroma: "420".into(),
            frame_rate: 30.0,
            frames: 2,
        }],
        formats: vec![
            FormatConfig::with_size("erp", 64, 32),
            FormatConfig::with_size("acp", 48, 32),
        ],
        qualities: vec![0, 1, 2, 3],
        kernel: "lanczos".into(),
        parallelism: 2,
        fit: "piecewise-cubic".into(),
    }
}

#[test]
fn toml_config_parses_with_defaults() {
    let text = r#"
version = 1
output_dir = "out"

[codec]
kind = "mock-quantizer"

[[sequences]]
name = "clip"
path = "clip.yuv"
width = 512
height = 256

[[formats]]
name = "erp"
width = 512
height = 256

[[formats]]
name = "ecp"
width = 384
height = 256
"#;
    let cfg = RunConfig::from_toml_str(text, Path::new("/base")).unwrap();
    assert_eq!(cfg.output_dir, Path::new("/base/out"));
    assert_eq!(cfg.sequences[0].path, Path::new("/base/clip.yuv"));
    assert_eq!(cfg.sequences[0].frames, 32);
    assert_eq!(cfg.qualities, vec![0, 1, 2, 3]);
    assert_eq!(cfg.codec.gop, 32);
    assert_eq!(cfg.kernel, "lanczos");
}

#[test]
fn config_validation_failures() {
    let base = Path::new(".");
    // Missing bitstream placeholder.
    let text = r#"
output_dir = "out"
[codec]
kind = "external-command"
encode = "enc {input} out.bin"
decode = "dec {bitstream} {recon}"
[[sequences]]
name = "s"
path = "s.yuv"
width = 64
height = 32
[[formats]]
name = "erp"
"#;
    assert!(matches!(
        RunConfig::from_toml_str(text, base),
        Err(Error::Config(_))
    ));

    // One quality point is not enough for BD.
    let text = r#"
output_dir = "out"
[codec]
kind = "mock-quantizer"
[[sequences]]
name = "s"
path = "s.yuv"
width = 64
height = 32
[[formats]]
name = "erp"
[run]
qualities = [2]
"#;
    assert!(matches!(
        RunConfig::from_toml_str(text, base),
        Err(Error::Config(_))
    ));

    // Mock quality index out of range.
    let text = r#"
output_dir = "out"
[codec]
kind = "mock-quantizer"
[[sequences]]
name = "s"
path = "s.yuv"
width = 64
height = 32
[[formats]]
name = "erp"
[run]
qualities = [22, 27]
"#;
    assert!(matches!(
        RunConfig::from_toml_str(text, base),
        Err(Error::Config(_))
    ));
}

#[test]
fn mock_run_produces_monotone_curves_and_zero_erp_row() {
    let dir = tempfile::tempdir().unwrap();
    let clip = make_clip(dir.path(), "clip.yuv", 64, 32, 2);
    let cfg = mock_config(dir.path(), &clip);
    let report = run_pipeline(&cfg).unwrap();

    assert_eq!(report.cells.len(), 8);
    for format in ["erp", "acp"] {
        let mut cells: Vec<&ReportCell> = report
            .cells
            .iter()
            .filter(|c| c.key.format == format)
            .collect();
        cells.sort_by_key(|c| c.key.quality);
        for pair in cells.windows(2) {
            assert!(
                pair[1].result.rate_bpp > pair[0].result.rate_bpp,
                "{format}: rate must grow with q"
            );
            assert!(
                pair[1].result.metrics.yuv_psnr > pair[0].result.metrics.yuv_psnr,
                "{format}: quality must grow with q"
            );
        }
    }

    for rows in [&report.bd_tables.psnr, &report.bd_tables.wspsnr] {
        let erp = rows.iter().find(|r| r.format == "erp").unwrap();
        let result = erp.result.unwrap();
        assert_eq!(result.bd_rate, 0.0);
        assert_eq!(result.bd_quality, 0.0);
        assert!(!result.flagged);
        assert!(rows.iter().any(|r| r.format == "acp"));
    }

    assert!(cfg.output_dir.join("manifest.json").is_file());
    assert!(cfg.output_dir.join("report.json").is_file());
    assert!(cfg.output_dir.join("cells.csv").is_file());
    assert!(cfg.output_dir.join("report.md").is_file());
}

#[test]
fn rerun_is_byte_identical_and_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let clip = make_clip(dir.path(), "clip.yuv", 64, 32, 2);
    let cfg = mock_config(dir.path(), &clip);

    run_pipeline(&cfg).unwrap();
    let manifest1 = std::fs::read(cfg.output_dir.join("manifest.json")).unwrap();
    let report1 = std::fs::read(cfg.output_dir.join("report.json")).unwrap();

    run_pipeline(&cfg).unwrap();
    let manifest2 = std::fs::read(cfg.output_dir.join("manifest.json")).unwrap();
    let report2 = std::fs::read(cfg.output_dir.join("report.json")).unwrap();
    assert_eq!(manifest1, manifest2);
    assert_eq!(report1, report2);

    // A fresh output directory gives the same bytes as well.
    let cfg2 = RunConfig {
        output_dir: dir.path().join("out2"),
        ..cfg.clone()
    };
    run_pipeline(&cfg2).unwrap();
    let report3 = std::fs::read(cfg2.output_dir.join("report.json")).unwrap();
    assert_eq!(report1, report3);

    // Completed cells really are skipped: a tampered cached result shows
    // up verbatim in the next report.
    let cell_dir = std::fs::read_dir(cfg.output_dir.join("cells"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let result_path = cell_dir.join("result.json");
    let mut cached: CellResult =
        serde_json::from_str(&std::fs::read_to_string(&result_path).unwrap()).unwrap();
    cached.bits = 424242;
    std::fs::write(&result_path, serde_json::to_string(&cached).unwrap()).unwrap();
    let tampered = run_pipeline(&cfg).unwrap();
    assert!(tampered.cells.iter().any(|c| c.result.bits == 424242));
}

#[test]
fn null_codec_identity_is_lossless_with_zero_rate() {
    let dir = tempfile::tempdir().unwrap();
    let clip = make_clip(dir.path(), "clip.yuv", 64, 32, 2);
    let mut cfg = mock_config(dir.path(), &clip);
    cfg.codec = CodecAdapter::null();
    cfg.formats = vec![FormatConfig::with_size("erp", 64, 32)];
    let report = run_pipeline(&cfg).unwrap();

    for cell in &report.cells {
        assert_eq!(cell.result.bits, 0);
        assert_eq!(cell.result.rate_bpp, 0.0);
        assert!(cell.result.metrics.lossless);
        assert_eq!(cell.result.metrics.yuv_wspsnr, crate::metrics::LOSSLESS_DB_CAP);
    }
    // Zero-rate lossless points cannot form a curve: BD degenerates to an
    // unavailable table with an explanatory note.
    assert!(report.bd_tables.psnr.is_empty());
    assert!(report.bd_tables.note.is_some());
}

#[test]
fn killed_subprocess_fails_cell_but_run_continues() {
    let dir = tempfile::tempdir().unwrap();
    let clip = make_clip(dir.path(), "clip.yuv", 64, 32, 2);

    // An "encoder" that kills itself with SIGKILL.
    let killer = dir.path().join("killer.sh");
    std::fs::write(&killer, "#!/bin/sh\nkill -9 $$\n").unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&killer, std::fs::Permissions::from_mode(0o755)).unwrap();
    }

    let mut cfg = mock_config(dir.path(), &clip);
    cfg.codec = CodecAdapter {
        kind: CodecKind::ExternalCommand,
        name: "killer".into(),
        encode: Some(format!("{} {{input}} {{bitstream}}", killer.display())),
        decode: Some("cp {bitstream} {recon}".into()),
        color_mode: ColorMode::YuvDirect,
        color_range: crate::yuv::YuvRange::Limited,
        gop: 32,
    };
    cfg.qualities = vec![0, 1];
    cfg.formats = vec![FormatConfig::with_size("erp", 64, 32)];

    // Every cell fails, so report emission refuses to run; the manifest
    // still records the failures.
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, Error::Contract(_)), "{err}");
    let manifest = std::fs::read_to_string(cfg.output_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"failed\""));
    assert!(manifest.contains("codec error"));
}

#[test]
fn partial_codec_failure_keeps_other_cells() {
    let dir = tempfile::tempdir().unwrap();
    let clip = make_clip(dir.path(), "clip.yuv", 64, 32, 2);

    // Fails only for q=1 (the template passes {q} to the script).
    let flaky = dir.path().join("flaky.sh");
    std::fs::write(
        &flaky,
        "#!/bin/sh\nif [ \"$3\" = \"1\" ]; then exit 7; fi\ncp \"$1\" \"$2\"\n",
    )
    .unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&flaky, std::fs::Permissions::from_mode(0o755)).unwrap();
    }

    let mut cfg = mock_config(dir.path(), &clip);
    cfg.codec = CodecAdapter {
        kind: CodecKind::ExternalCommand,
        name: "flaky".into(),
        encode: Some(format!("{} {{input}} {{bitstream}} {{q}}", flaky.display())),
        decode: Some("cp {bitstream} {recon}".into()),
        color_mode: ColorMode::YuvDirect,
        color_range: crate::yuv::YuvRange::Limited,
        gop: 32,
    };
    cfg.qualities = vec![0, 1];
    cfg.formats = vec![FormatConfig::with_size("erp", 64, 32)];

    let report = run_pipeline(&cfg).unwrap();
    // q=1 row absent, q=0 rows present (identity copy => lossless).
    assert_eq!(report.cells.len(), 1);
    assert_eq!(report.cells[0].key.quality, 0);
    assert!(report.cells[0].result.metrics.lossless);
    let manifest = std::fs::read_to_string(cfg.output_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"failed\""));
    assert!(manifest.contains("\"status\": \"ok\""));
}

#[test]
fn manifest_reference_resolutions_match_defaults() {
    let table: BTreeMap<&str, (usize, usize)> = REFERENCE_CODED_RESOLUTIONS
        .iter()
        .map(|&(n, w, h)| (n, (w, h)))
        .collect();
    assert_eq!(table["erp"], (2048, 1024));
    assert_eq!(table["aep"], (2048, 1024));
    for f in ["cmp", "eac", "hec", "acp", "ecp"] {
        assert_eq!(table[f], (1800, 1200), "{f}");
    }
    // Recorded for reference even though the active GCP grid is 1800x1200.
    assert_eq!(table["gcp"], (1816, 1232));
    assert_eq!(table["isp"], (1306, 1672));
}

#[test]
fn rgb_color_mode_passes_through_mock_codec() {
    let dir = tempfile::tempdir().unwrap();
    let clip = make_clip(dir.path(), "clip.yuv", 64, 32, 2);
    let mut cfg = mock_config(dir.path(), &clip);
    cfg.codec.color_mode = ColorMode::RgbBt709;
    let report = run_pipeline(&cfg).unwrap();
    assert_eq!(report.cells.len(), 8);
    // Still monotone in rate.
    let mut erp: Vec<&ReportCell> = report
        .cells
        .iter()
        .filter(|c| c.key.format == "erp")
        .collect();
    erp.sort_by_key(|c| c.key.quality);
    assert!(erp.windows(2).all(|p| p[1].result.bits > p[0].result.bits));
}
