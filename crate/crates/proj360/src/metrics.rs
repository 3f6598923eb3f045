//! PSNR and WS-PSNR with the 6:1:1 YUV component weighting.
//!
//! WS-PSNR weights each pixel's squared error by the sphere area it covers;
//! the weights here are the ERP row weights, since quality is always
//! evaluated after resampling back to ERP.

use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

/// Lossless results are reported as this capped value so downstream BD
/// fitting stays finite; callers exclude capped points from fits.
pub const LOSSLESS_DB_CAP: f64 = 999.99;

/// 10*log10(max^2 / MSE); returns infinity for identical planes.
pub fn psnr_plane(reference: &Plane, test: &Plane, max_val: u16) -> Result<f64> {
    weighted_psnr_plane(reference, test, max_val, |_| 1.0)
}

/// ERP area weight of a pixel row: cos((j + 0.5 - H/2) * pi / H).
pub fn ws_weight_erp(j: usize, height: usize) -> f64 {
    ((j as f64 + 0.5 - height as f64 / 2.0) * std::f64::consts::PI / height as f64).cos()
}

/// WS-PSNR over a plane in ERP geometry. 4:2:0 chroma planes use their own
/// height in the weight formula.
pub fn ws_psnr_plane(reference: &Plane, test: &Plane, max_val: u16) -> Result<f64> {
    let h = reference.height;
    weighted_psnr_plane(reference, test, max_val, move |j| ws_weight_erp(j, h))
}

fn weighted_psnr_plane(
    reference: &Plane,
    test: &Plane,
    max_val: u16,
    weight: impl Fn(usize) -> f64,
) -> Result<f64> {
    if reference.width != test.width || reference.height != test.height {
        return Err(Error::Contract(format!(
            "plane dimensions differ: {}x{} vs {}x{}",
            reference.width, reference.height, test.width, test.height
        )));
    }
    let mut err_acc = 0.0f64;
    let mut weight_acc = 0.0f64;
    for j in 0..reference.height {
        let w = weight(j);
        let ref_row = reference.row(j);
        let test_row = test.row(j);
        let mut row_err = 0.0f64;
        for (a, b) in ref_row.iter().zip(test_row) {
            let d = *a as f64 - *b as f64;
            row_err += d * d;
        }
        err_acc += w * row_err;
        weight_acc += w * reference.width as f64;
    }
    if err_acc == 0.0 {
        return Ok(f64::INFINITY);
    }
    let wmse = err_acc / weight_acc;
    Ok(10.0 * ((max_val as f64 * max_val as f64) / wmse).log10())
}

/// (6*y + u + v) / 8.
pub fn combine_yuv(py: f64, pu: f64, pv: f64) -> f64 {
    (6.0 * py + pu + pv) / 8.0
}

/// Per-frame (or per-sequence) quality numbers. Values are capped at
/// [`LOSSLESS_DB_CAP`]; `lossless` records that at least one component was
/// exactly lossless before capping.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QualityResult {
    pub psnr_y: f64,
    pub psnr_u: f64,
    pub psnr_v: f64,
    pub wspsnr_y: f64,
    pub wspsnr_u: f64,
    pub wspsnr_v: f64,
    pub yuv_psnr: f64,
    pub yuv_wspsnr: f64,
    pub lossless: bool,
}

impl QualityResult {
    /// Computes all metrics between a reference and a test frame of equal
    /// geometry (evaluated in the ERP domain).
    pub fn between(reference: &Frame, test: &Frame) -> Result<QualityResult> {
        if reference.geometry != test.geometry {
            return Err(Error::Contract(format!(
                "frame geometries differ: {:?} vs {:?}",
                reference.geometry, test.geometry
            )));
        }
        let max = reference.geometry.max_value();
        let psnr_y = psnr_plane(&reference.y, &test.y, max)?;
        let psnr_u = psnr_plane(&reference.u, &test.u, max)?;
        let psnr_v = psnr_plane(&reference.v, &test.v, max)?;
        let ws_y = ws_psnr_plane(&reference.y, &test.y, max)?;
        let ws_u = ws_psnr_plane(&reference.u, &test.u, max)?;
        let ws_v = ws_psnr_plane(&reference.v, &test.v, max)?;
        let lossless = [psnr_y, psnr_u, psnr_v].iter().any(|v| v.is_infinite());
        let cap = |v: f64| v.min(LOSSLESS_DB_CAP);
        Ok(QualityResult {
            psnr_y: cap(psnr_y),
            psnr_u: cap(psnr_u),
            psnr_v: cap(psnr_v),
            wspsnr_y: cap(ws_y),
            wspsnr_u: cap(ws_u),
            wspsnr_v: cap(ws_v),
            yuv_psnr: cap(combine_yuv(psnr_y, psnr_u, psnr_v)),
            yuv_wspsnr: cap(combine_yuv(ws_y, ws_u, ws_v)),
            lossless,
        })
    }
}

/// Mean of each dB field over the frames of a sequence. Capped sentinels
/// propagate: a sequence with a lossless frame keeps the lossless flag.
pub fn aggregate_sequence(per_frame: &[QualityResult]) -> Result<QualityResult> {
    if per_frame.is_empty() {
        return Err(Error::Contract("cannot aggregate zero frames".into()));
    }
    let n = per_frame.len() as f64;
    // Rounding in the mean must not push capped values past the cap.
    let mean = |f: fn(&QualityResult) -> f64| {
        (per_frame.iter().map(f).sum::<f64>() / n).min(LOSSLESS_DB_CAP)
    };
    Ok(QualityResult {
        psnr_y: mean(|q| q.psnr_y),
        psnr_u: mean(|q| q.psnr_u),
        psnr_v: mean(|q| q.psnr_v),
        wspsnr_y: mean(|q| q.wspsnr_y),
        wspsnr_u: mean(|q| q.wspsnr_u),
        wspsnr_v: mean(|q| q.wspsnr_v),
        yuv_psnr: mean(|q| q.yuv_psnr),
        yuv_wspsnr: mean(|q| q.yuv_wspsnr),
        lossless: per_frame.iter().any(|q| q.lossless),
    })
}
