//! Beam splitter BS2, the phase plates J and P′, and the object transmittance.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{ConfigCode, Error, Result};
use crate::field::{ComplexField, Grid};

/// Phase the P′ plate adds to the lower arm by default.
///
/// The Fresnel chain leaves ⟨E(η)E*(−η)⟩ ∝ e^{−jπ/4}·F(2η/λd₂); a +π/4 plate
/// on the lower arm removes that constant.
pub const COMPENSATION_PHASE: f64 = FRAC_PI_4;

/// Phase the J plate adds to the upper arm.
pub const J_PLATE_PHASE: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePlateSetting {
    pub j_plate_on: bool,
    pub p_prime_on: bool,
    p_prime_phase: f64,
}

impl PhasePlateSetting {
    pub fn new(j_plate_on: bool, p_prime_on: bool, p_prime_phase: f64) -> Result<Self> {
        if !(p_prime_phase > -PI && p_prime_phase <= PI) {
            return Err(Error::config(
                ConfigCode::Range,
                format!("P' phase must lie in (-pi, pi], got {p_prime_phase}"),
            ));
        }
        Ok(PhasePlateSetting {
            j_plate_on,
            p_prime_on,
            p_prime_phase,
        })
    }

    /// Setting with the default P′ phase.
    pub fn with_plates(j_plate_on: bool, p_prime_on: bool) -> Self {
        PhasePlateSetting {
            j_plate_on,
            p_prime_on,
            p_prime_phase: COMPENSATION_PHASE,
        }
    }

    pub fn p_prime_phase(&self) -> f64 {
        self.p_prime_phase
    }

    /// The same setting with the J plate toggled.
    pub fn with_j(self, j_plate_on: bool) -> Self {
        PhasePlateSetting { j_plate_on, ..self }
    }
}

/// Arm phases `(upper, lower)` implied by the plates.
pub fn arm_phases(setting: &PhasePlateSetting) -> (f64, f64) {
    let upper = if setting.j_plate_on { J_PLATE_PHASE } else { 0.0 };
    let lower = if setting.p_prime_on { setting.p_prime_phase } else { 0.0 };
    (upper, lower)
}

/// Complex object transmittance f(ξ) sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmittance {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Transmittance {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::usage(format!(
                "transmittance has {} values but its grid has {}",
                values.len(),
                grid.count()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::domain("transmittance contains non-finite values"));
        }
        Ok(Transmittance { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Transmittance::new(grid, grid.positions().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Same object scaled by a complex constant.
    pub fn scaled(&self, c: Complex64) -> Transmittance {
        Transmittance {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// 50/50 splitter with the half-wave loss on port 1:
/// E₁ = (a − b)/√2, E₂ = (a + b)/√2.
pub fn beam_splitter_mix(a: &ComplexField, b: &ComplexField) -> Result<(ComplexField, ComplexField)> {
    if a.grid() != b.grid() {
        return Err(Error::usage("beam splitter inputs are on different grids"));
    }
    let (e1, e2) = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| mix_pair(x, y))
        .unzip();
    Ok((
        ComplexField::from_parts_unchecked(*a.grid(), e1),
        ComplexField::from_parts_unchecked(*a.grid(), e2),
    ))
}

#[inline]
pub(crate) fn mix_pair(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    ((a - b) * FRAC_1_SQRT_2, (a + b) * FRAC_1_SQRT_2)
}

/// Pointwise field · f.
pub fn apply_object(field: &ComplexField, f: &Transmittance) -> Result<ComplexField> {
    if field.grid() != f.grid() {
        return Err(Error::usage("field and transmittance are on different grids"));
    }
    let samples = field.samples().iter().zip(&f.values).map(|(e, t)| e * t).collect();
    Ok(ComplexField::from_parts_unchecked(*field.grid(), samples))
}
