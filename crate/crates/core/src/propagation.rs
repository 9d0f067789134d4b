//! Fresnel propagation between planes as dense, precomputed transfer matrices.
//!
//! A matrix maps a field sampled on a source grid to a field on a destination
//! grid. Applying it uses the midpoint rule:
//! `out[m] = Σ_i entries[m, i] · field[i] · src.spacing`.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{ConfigCode, Error, Result};
use crate::field::{ComplexField, Grid, SystemGeometry};

/// Fresnel kernel e^{jkd}/(jλd) · e^{jk(x_dst − x_src)²/(2d)}, in 1/µm.
pub fn fresnel_kernel(x_src: f64, x_dst: f64, dist: f64, wavelength: f64) -> Result<Complex64> {
    if !(dist.is_finite() && dist > 0.0) {
        return Err(Error::domain(format!(
            "propagation distance must be positive, got {dist}"
        )));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::domain(format!("wavelength must be positive, got {wavelength}")));
    }
    let k = 2.0 * PI / wavelength;
    let sep = x_dst - x_src;
    let phase = k * dist - FRAC_PI_2 + k * sep * sep / (2.0 * dist);
    Ok(Complex64::from_polar(1.0 / (wavelength * dist), phase))
}

/// Outcome of the quadrature adequacy check for one plane pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingReport {
    /// Largest local spatial frequency of the kernel chirp, 1/µm.
    pub max_frequency: f64,
    /// Smaller of the two grids' Nyquist frequencies, 1/µm.
    pub nyquist: f64,
    /// `nyquist / max_frequency`; above 1 means the chirp is resolved.
    pub margin: f64,
    pub passed: bool,
}

/// Check that the kernel chirp between `src` and `dst` is resolved on both grids.
///
/// The local frequency of the kernel phase is |x_dst − x_src|/(λ·dist); its
/// maximum over the two grids must stay below 1/(2·spacing) for each grid.
pub fn validate_sampling(src: &Grid, dst: &Grid, dist: f64, wavelength: f64) -> SamplingReport {
    let max_sep = (dst.max() - src.min()).abs().max((src.max() - dst.min()).abs());
    let max_frequency = max_sep / (wavelength * dist);
    let nyquist = (0.5 / src.spacing()).min(0.5 / dst.spacing());
    let margin = if max_frequency > 0.0 {
        nyquist / max_frequency
    } else {
        f64::INFINITY
    };
    SamplingReport {
        max_frequency,
        nyquist,
        margin,
        passed: max_frequency.is_finite() && max_frequency < nyquist,
    }
}

/// Dense Fresnel operator from `src` to `dst`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    src: Grid,
    dst: Grid,
    entries: Array2<Complex64>,
    label: String,
}

impl TransferMatrix {
    /// Wrap explicit entries of shape (dst.count, src.count).
    pub fn from_entries(src: Grid, dst: Grid, entries: Array2<Complex64>, label: impl Into<String>) -> Result<Self> {
        if entries.dim() != (dst.count(), src.count()) {
            return Err(Error::usage(format!(
                "matrix shape {:?} does not match grids ({}, {})",
                entries.dim(),
                dst.count(),
                src.count()
            )));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain("transfer matrix has non-finite entries"));
        }
        Ok(TransferMatrix {
            src,
            dst,
            entries,
            label: label.into(),
        })
    }

    pub fn src(&self) -> &Grid {
        &self.src
    }

    pub fn dst(&self) -> &Grid {
        &self.dst
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Entries with the source quadrature weight folded in.
    pub fn weighted(&self) -> Array2<Complex64> {
        &self.entries * Complex64::new(self.src.spacing(), 0.0)
    }

    /// The operator `after · diag(weights · Δmid) · self`, mapping `self.src`
    /// to `after.dst` through an intermediate plane that multiplies the field
    /// by `weights` (an object transmittance, typically).
    pub fn compose_through(&self, weights: &[Complex64], after: &TransferMatrix) -> Result<TransferMatrix> {
        if self.dst != after.src {
            return Err(Error::usage(format!(
                "cannot chain '{}' into '{}': intermediate grids differ",
                self.label, after.label
            )));
        }
        if weights.len() != self.dst.count() {
            return Err(Error::usage(format!(
                "intermediate weights have {} samples, plane has {}",
                weights.len(),
                self.dst.count()
            )));
        }
        let dmid = self.dst.spacing();
        let mut scaled = self.entries.clone();
        for (mut row, w) in scaled.axis_iter_mut(Axis(0)).zip(weights) {
            let w = w * dmid;
            row.mapv_inplace(|z| z * w);
        }
        let entries = after.entries.dot(&scaled);
        Ok(TransferMatrix {
            src: self.src,
            dst: after.dst,
            entries,
            label: format!("{} ; {}", self.label, after.label),
        })
    }

    /// Reverse the destination rows so that row m holds the response at −η_m.
    pub fn flip_rows(&self) -> Result<TransferMatrix> {
        if !self.dst.is_origin_centered() {
            return Err(Error::config(
                ConfigCode::Range,
                format!("cannot flip '{}': destination grid is not origin-centred", self.label),
            ));
        }
        let mut entries = self.entries.clone();
        entries.invert_axis(Axis(0));
        Ok(TransferMatrix {
            src: self.src,
            dst: self.dst,
            entries: entries.as_standard_layout().into_owned(),
            label: format!("flip({})", self.label),
        })
    }
}

/// Kernel matrix without the sampling check.
pub(crate) fn kernel_matrix(src: &Grid, dst: &Grid, dist: f64, wavelength: f64) -> Result<Array2<Complex64>> {
    // Split the constant factor off so each entry only needs one sincos.
    let k = 2.0 * PI / wavelength;
    let front = fresnel_kernel(0.0, 0.0, dist, wavelength)?;
    let xs = src.positions();
    let xd = dst.positions();
    let mut m = Array2::zeros((dst.count(), src.count()));
    for (mut row, &eta) in m.axis_iter_mut(Axis(0)).zip(&xd) {
        for (z, &x) in row.iter_mut().zip(&xs) {
            let sep = eta - x;
            let (s, c) = (k * sep * sep / (2.0 * dist)).sin_cos();
            *z = front * Complex64::new(c, s);
        }
    }
    Ok(m)
}

/// Build the Fresnel transfer matrix for free-space propagation over `dist`.
///
/// Fails with [`ConfigCode::Sampling`] when the kernel chirp is not resolved on
/// either grid.
pub fn build_transfer_matrix(src: &Grid, dst: &Grid, dist: f64, geometry: &SystemGeometry) -> Result<TransferMatrix> {
    build_labelled(src, dst, dist, geometry, "propagation")
}

pub(crate) fn build_labelled(
    src: &Grid,
    dst: &Grid,
    dist: f64,
    geometry: &SystemGeometry,
    label: &str,
) -> Result<TransferMatrix> {
    let report = validate_sampling(src, dst, dist, geometry.wavelength());
    if !report.passed {
        return Err(Error::config(
            ConfigCode::Sampling,
            format!(
                "{label}: kernel frequency {:.4e} /um exceeds Nyquist {:.4e} /um (margin {:.3})",
                report.max_frequency, report.nyquist, report.margin
            ),
        ));
    }
    let entries = kernel_matrix(src, dst, dist, geometry.wavelength())?;
    Ok(TransferMatrix {
        src: *src,
        dst: *dst,
        entries,
        label: label.to_string(),
    })
}

/// Apply `t` to `field` with the midpoint quadrature weight.
pub fn propagate(field: &ComplexField, t: &TransferMatrix) -> Result<ComplexField> {
    if field.grid() != &t.src {
        return Err(Error::usage(format!(
            "field grid does not match source grid of '{}'",
            t.label
        )));
    }
    let w = t.src.spacing();
    let out = t
        .entries
        .axis_iter(Axis(0))
        .map(|row| {
            row.iter()
                .zip(field.samples())
                .fold(Complex64::new(0.0, 0.0), |acc, (k, e)| acc + k * e)
                * w
        })
        .collect();
    Ok(ComplexField::from_parts_unchecked(t.dst, out))
}
