//! Seeded chaotic-light source realizations.
//!
//! Each sample is an independent circular complex Gaussian with zero mean and
//! variance `I / Δx`, the discrete stand-in for ⟨E(x)E*(x')⟩ = I·δ(x − x').
//!
//! Realizations are addressed by `(master_seed, index, setting)`; the three
//! are mixed into a 64-bit seed for a ChaCha8 stream, so any realization can
//! be generated without its predecessors. Gaussian pairs come from the
//! polar-free Box–Muller transform on 53-bit uniforms:
//!
//! ```text
//! u1 = 1 - (bits1 >> 11) * 2^-53        in (0, 1]
//! u2 =     (bits2 >> 11) * 2^-53        in [0, 1)
//! re = σ · sqrt(-2 ln u1) · cos(2π u2)
//! im = σ · sqrt(-2 ln u1) · sin(2π u2),  σ = sqrt(I / (2Δx))
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ConfigCode, Error, Result};
use crate::field::{ComplexField, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    grid: Grid,
    mean_intensity: f64,
    master_seed: u64,
}

impl SourceConfig {
    pub fn new(grid: Grid, mean_intensity: f64, master_seed: u64) -> Result<Self> {
        if !(mean_intensity.is_finite() && mean_intensity > 0.0) {
            return Err(Error::config(
                ConfigCode::Range,
                format!("source mean intensity must be positive, got {mean_intensity}"),
            ));
        }
        Ok(SourceConfig {
            grid,
            mean_intensity,
            master_seed,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mean_intensity(&self) -> f64 {
        self.mean_intensity
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Per-sample variance ⟨|E|²⟩ = I/Δx.
    pub fn sample_variance(&self) -> f64 {
        self.mean_intensity / self.grid.spacing()
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix master seed, realization index and setting tag into one stream seed.
///
/// `h = sm(sm(sm(master) ^ sm(index ^ A)) ^ sm(tag ^ B))` with the SplitMix64
/// finaliser `sm`. For fixed master and tag the map index → seed is a
/// bijection, so realizations within a setting never share a seed.
pub fn realization_seed(master_seed: u64, realization_index: u64, setting_tag: u64) -> u64 {
    const A: u64 = 0x6A09_E667_F3BC_C908;
    const B: u64 = 0xBB67_AE85_84CA_A73B;
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ splitmix64(realization_index ^ A));
    splitmix64(h ^ splitmix64(setting_tag ^ B))
}

#[inline]
fn unit_open_closed(bits: u64) -> f64 {
    1.0 - (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn unit_closed_open(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fill `out` with circular Gaussian samples of total variance `variance`.
pub(crate) fn fill_circular_gaussian(out: &mut [Complex64], variance: f64, seed: u64) {
    let sigma = (variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for z in out.iter_mut() {
        let u1 = unit_open_closed(rng.next_u64());
        let u2 = unit_closed_open(rng.next_u64());
        let r = sigma * (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        *z = Complex64::new(r * c, r * s);
    }
}

/// Draw one instantaneous source field.
pub fn sample_thermal(config: &SourceConfig, seed: u64) -> ComplexField {
    let mut samples = vec![Complex64::new(0.0, 0.0); config.grid.count()];
    fill_circular_gaussian(&mut samples, config.sample_variance(), seed);
    ComplexField::from_parts_unchecked(config.grid, samples)
}
