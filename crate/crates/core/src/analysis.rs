//! Numeric comparison of acquired, oracle and analytic signals.
//!
//! Everything here is defined up to a global complex constant, which
//! [`fit_complex_scale`] removes.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default half-width of the comparison window on the detector axis, µm.
pub const DEFAULT_WINDOW_HALF_WIDTH: f64 = 400.0;

/// Least-squares c minimizing Σ|measured − c·reference|².
pub fn fit_complex_scale(measured: &[Complex64], reference: &[Complex64]) -> Result<Complex64> {
    if measured.len() != reference.len() {
        return Err(Error::usage(format!(
            "length mismatch: {} measured vs {} reference",
            measured.len(),
            reference.len()
        )));
    }
    if measured.len() < 2 {
        return Err(Error::domain("need at least two samples to fit a scale"));
    }
    let denom: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    if denom == 0.0 {
        return Err(Error::domain("reference is identically zero"));
    }
    let num: Complex64 = measured.iter().zip(reference).map(|(m, r)| m * r.conj()).sum();
    Ok(num / denom)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::usage("pearson inputs differ in length"));
    }
    if a.len() < 2 {
        return Err(Error::domain("pearson needs at least two samples"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::domain("pearson input is constant"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// ‖measured − c·reference‖ / ‖c·reference‖ with c from [`fit_complex_scale`].
pub fn nrmse(measured: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    let c = fit_complex_scale(measured, reference)?;
    nrmse_with_scale(measured, reference, c)
}

fn nrmse_with_scale(measured: &[Complex64], reference: &[Complex64], c: Complex64) -> Result<f64> {
    let mut err = 0.0;
    let mut norm = 0.0;
    for (m, r) in measured.iter().zip(reference) {
        let fitted = c * r;
        err += (m - fitted).norm_sqr();
        norm += fitted.norm_sqr();
    }
    if norm == 0.0 {
        // Fitted reference vanishes: measured is orthogonal to it.
        return Ok(if err == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((err / norm).sqrt())
}

/// Relative L2 distance without any fitting.
pub fn relative_l2(measured: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if measured.len() != reference.len() {
        return Err(Error::usage("relative_l2 inputs differ in length"));
    }
    let norm: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    if norm == 0.0 {
        return Err(Error::domain("reference is identically zero"));
    }
    let err: f64 = measured.iter().zip(reference).map(|(m, r)| (m - r).norm_sqr()).sum();
    Ok((err / norm).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub fitted_scale: Complex64,
    pub pearson_re: f64,
    pub pearson_im: f64,
    pub nrmse: f64,
    pub window: (f64, f64),
}

/// Indices of `positions` inside `[lo, hi]`.
pub fn window_indices(positions: &[f64], window: (f64, f64)) -> Vec<usize> {
    positions
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= window.0 && p <= window.1)
        .map(|(i, _)| i)
        .collect()
}

/// Compare `measured` against `reference` on the detector samples whose
/// positions fall inside `window`. Pearson coefficients are taken after the
/// reference has been multiplied by the fitted scale.
pub fn compare(
    measured: &[Complex64],
    reference: &[Complex64],
    positions: &[f64],
    window: (f64, f64),
) -> Result<ComparisonReport> {
    if measured.len() != positions.len() || reference.len() != positions.len() {
        return Err(Error::usage("compare inputs differ in length"));
    }
    let idx = window_indices(positions, window);
    let m: Vec<Complex64> = idx.iter().map(|&i| measured[i]).collect();
    let r: Vec<Complex64> = idx.iter().map(|&i| reference[i]).collect();
    let c = fit_complex_scale(&m, &r)?;
    let fitted: Vec<Complex64> = r.iter().map(|x| c * x).collect();
    let re = |v: &[Complex64]| v.iter().map(|z| z.re).collect::<Vec<_>>();
    let im = |v: &[Complex64]| v.iter().map(|z| z.im).collect::<Vec<_>>();
    Ok(ComparisonReport {
        fitted_scale: c,
        pearson_re: pearson(&re(&m), &re(&fitted))?,
        pearson_im: pearson(&im(&m), &im(&fitted))?,
        nrmse: nrmse_with_scale(&m, &r, c)?,
        window,
    })
}
