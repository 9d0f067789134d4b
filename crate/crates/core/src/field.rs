//! Coordinate grids, sampled complex fields and the interferometer geometry.
//!
//! All lengths are in micrometres.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ConfigCode, Error, Result};

/// Uniform 1-D sampling axis, symmetric about `center`.
///
/// Sample `i` sits at `center + (i - (count - 1) / 2) * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    center: f64,
    spacing: f64,
    count: usize,
}

impl Grid {
    pub fn new(center: f64, spacing: f64, count: usize) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::config(ConfigCode::Range, "grid center must be finite"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::config(
                ConfigCode::Range,
                format!("grid spacing must be positive, got {spacing}"),
            ));
        }
        if count < 2 {
            return Err(Error::config(
                ConfigCode::Range,
                format!("grid needs at least 2 samples, got {count}"),
            ));
        }
        Ok(Grid { center, spacing, count })
    }

    /// Grid whose first and last samples are `extent` apart.
    pub fn from_extent(center: f64, extent: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::config(
                ConfigCode::Range,
                format!("grid needs at least 2 samples, got {count}"),
            ));
        }
        Grid::new(center, extent / (count - 1) as f64, count)
    }

    /// Origin-centred grid.
    pub fn centered(extent: f64, count: usize) -> Result<Self> {
        Grid::from_extent(0.0, extent, count)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Distance between the first and last sample.
    pub fn extent(&self) -> f64 {
        self.spacing * (self.count - 1) as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        self.center + (i as f64 - (self.count - 1) as f64 / 2.0) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.position(i)).collect()
    }

    pub fn min(&self) -> f64 {
        self.position(0)
    }

    pub fn max(&self) -> f64 {
        self.position(self.count - 1)
    }

    pub fn is_origin_centered(&self) -> bool {
        self.center == 0.0
    }
}

/// Free-function form of [`Grid::positions`].
pub fn grid_positions(grid: &Grid) -> Vec<f64> {
    grid.positions()
}

/// One instantaneous realization of a scalar field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.count() {
            return Err(Error::usage(format!(
                "field has {} samples but its grid has {}",
                samples.len(),
                grid.count()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::domain(format!("field sample {i} is not finite")));
        }
        Ok(ComplexField { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        ComplexField {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.count()],
        }
    }

    /// Samples `f` at every grid position.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        ComplexField::new(grid, grid.positions().into_iter().map(f).collect())
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.count());
        ComplexField { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Pointwise `a * self + b * other`.
    pub fn linear_combination(&self, a: Complex64, other: &ComplexField, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::usage("linear combination of fields on different grids"));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(ComplexField::from_parts_unchecked(self.grid, samples))
    }

    /// Σ|E|²·Δ, the discrete field energy.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }
}

/// Mirror a field about the origin: output(η) = input(−η).
///
/// Only defined on origin-centred grids, where the mirror maps grid points
/// onto grid points.
pub fn flip(field: &ComplexField) -> Result<ComplexField> {
    if !field.grid.is_origin_centered() {
        return Err(Error::config(
            ConfigCode::Range,
            format!("flip needs an origin-centred grid, got center {}", field.grid.center()),
        ));
    }
    let mut samples = field.samples.clone();
    samples.reverse();
    Ok(ComplexField::from_parts_unchecked(field.grid, samples))
}

/// Multiply every sample by e^{jφ}.
pub fn apply_phase(field: &ComplexField, phi: f64) -> ComplexField {
    let rot = Complex64::from_polar(1.0, phi);
    let samples = field.samples.iter().map(|s| s * rot).collect();
    ComplexField::from_parts_unchecked(field.grid, samples)
}

/// Pointwise |E|².
pub fn intensity(field: &ComplexField) -> Vec<f64> {
    field.samples.iter().map(|s| s.norm_sqr()).collect()
}

/// Wavelength and the three arm distances of the two-arm interferometer.
///
/// The lower arm runs source → object (`d1`) → detector (`d2`); the upper arm
/// runs source → detector directly (`d`). Equal optical length requires
/// `d = d1 + d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemGeometry {
    wavelength: f64,
    d1: f64,
    d2: f64,
    d: f64,
}

impl SystemGeometry {
    /// Relative tolerance on `d - (d1 + d2)`.
    pub const ARM_TOLERANCE: f64 = 1e-9;

    pub fn new(wavelength: f64, d1: f64, d2: f64, d: f64) -> Result<Self> {
        for (name, v) in [("wavelength", wavelength), ("d1", d1), ("d2", d2), ("d", d)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(
                    ConfigCode::Range,
                    format!("{name} must be positive, got {v}"),
                ));
            }
        }
        if (d - (d1 + d2)).abs() > Self::ARM_TOLERANCE * d {
            return Err(Error::config(
                ConfigCode::ArmLength,
                format!("unequal arms: d = {d} but d1 + d2 = {}", d1 + d2),
            ));
        }
        Ok(SystemGeometry { wavelength, d1, d2, d })
    }

    /// λ = 0.532 µm, d1 = 60 000 µm, d2 = 75 000 µm, d = 135 000 µm.
    pub fn standard() -> Self {
        SystemGeometry {
            wavelength: 0.532,
            d1: 60_000.0,
            d2: 75_000.0,
            d: 135_000.0,
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Spatial frequency probed at detector coordinate η, ν = 2η/(λ·d2).
    pub fn detector_frequency(&self, eta: f64) -> f64 {
        2.0 * eta / (self.wavelength * self.d2)
    }
}
