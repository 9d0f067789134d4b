//! Test objects and their closed-form Fourier transforms.
//!
//! Transforms use F{f}(ν) = ∫ f(ξ) e^{−j2πνξ} dξ with ν in 1/µm.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elements::Transmittance;
use crate::error::{ConfigCode, Error, Result};
use crate::field::Grid;

/// Unit rectangle; 1/2 on the edges.
pub fn rect(u: f64) -> f64 {
    let a = u.abs();
    if a < 0.5 {
        1.0
    } else if a == 0.5 {
        0.5
    } else {
        0.0
    }
}

/// Normalized sinc, sin(πu)/(πu).
pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        let x = PI * u;
        x.sin() / x
    }
}

/// Parameters of the two-part test object
/// `{(1 + cos(a·ξ)) + j[rect((ξ + s)/w) + rect((ξ − s)/w)]} · rect(ξ/W)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConceivedObjectParams {
    /// `a`, rad/µm.
    pub cos_freq: f64,
    /// `s`, µm.
    pub rect_offset: f64,
    /// `w`, µm.
    pub rect_width: f64,
    /// `W`, µm.
    pub support_width: f64,
}

impl Default for ConceivedObjectParams {
    fn default() -> Self {
        ConceivedObjectParams {
            cos_freq: 0.05,
            rect_offset: 150.0,
            rect_width: 105.0,
            support_width: 1000.0,
        }
    }
}

impl ConceivedObjectParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cos_freq", self.cos_freq),
            ("rect_offset", self.rect_offset),
            ("rect_width", self.rect_width),
            ("support_width", self.support_width),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(
                    ConfigCode::Range,
                    format!("object {name} must be positive, got {v}"),
                ));
            }
        }
        if self.rect_offset + self.rect_width / 2.0 > self.support_width / 2.0 {
            return Err(Error::config(
                ConfigCode::Range,
                "imaginary bands extend past the object support",
            ));
        }
        Ok(())
    }
}

pub fn conceived_object(xi: f64, p: &ConceivedObjectParams) -> Complex64 {
    let support = rect(xi / p.support_width);
    if support == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let re = 1.0 + (p.cos_freq * xi).cos();
    let im = rect((xi + p.rect_offset) / p.rect_width) + rect((xi - p.rect_offset) / p.rect_width);
    Complex64::new(re, im) * support
}

/// Transform of the real part:
/// (W/2)·sinc(W(ν + a/2π)) + W·sinc(Wν) + (W/2)·sinc(W(ν − a/2π)).
pub fn analytic_ft_real(nu: f64, p: &ConceivedObjectParams) -> f64 {
    let w = p.support_width;
    let side = p.cos_freq / (2.0 * PI);
    0.5 * w * sinc(w * (nu + side)) + w * sinc(w * nu) + 0.5 * w * sinc(w * (nu - side))
}

/// Transform of the imaginary part: 2w·sinc(wν)·cos(2πsν).
pub fn analytic_ft_imag(nu: f64, p: &ConceivedObjectParams) -> f64 {
    2.0 * p.rect_width * sinc(p.rect_width * nu) * (2.0 * PI * p.rect_offset * nu).cos()
}

/// Sample the test object on `grid`, which must cover the whole support.
pub fn sample_transmittance(grid: &Grid, p: &ConceivedObjectParams) -> Result<Transmittance> {
    p.validate()?;
    let half = p.support_width / 2.0;
    if grid.min() > -half || grid.max() < half {
        return Err(Error::config(
            ConfigCode::Range,
            format!(
                "object grid [{}, {}] does not cover the {} um support",
                grid.min(),
                grid.max(),
                p.support_width
            ),
        ));
    }
    Transmittance::from_fn(*grid, |xi| conceived_object(xi, p))
}

/// Objects the pipeline can be driven with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectModel {
    Conceived(ConceivedObjectParams),
    /// Real rect((ξ − center)/width); asymmetric when center ≠ 0.
    Rect {
        center: f64,
        width: f64,
    },
    /// f ≡ 0.
    Opaque,
}

impl ObjectModel {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectModel::Conceived(_) => "conceived",
            ObjectModel::Rect { .. } => "rect",
            ObjectModel::Opaque => "opaque",
        }
    }

    pub fn value(&self, xi: f64) -> Complex64 {
        match self {
            ObjectModel::Conceived(p) => conceived_object(xi, p),
            ObjectModel::Rect { center, width } => Complex64::new(rect((xi - center) / width), 0.0),
            ObjectModel::Opaque => Complex64::new(0.0, 0.0),
        }
    }

    /// Closed-form transform at spatial frequency `nu`.
    pub fn analytic_ft(&self, nu: f64) -> Complex64 {
        match self {
            ObjectModel::Conceived(p) => Complex64::new(analytic_ft_real(nu, p), analytic_ft_imag(nu, p)),
            ObjectModel::Rect { center, width } => {
                Complex64::from_polar(width * sinc(width * nu), -2.0 * PI * nu * center)
            }
            ObjectModel::Opaque => Complex64::new(0.0, 0.0),
        }
    }

    pub fn transmittance(&self, grid: &Grid) -> Result<Transmittance> {
        match self {
            ObjectModel::Conceived(p) => sample_transmittance(grid, p),
            ObjectModel::Rect { center, width } => {
                if !(width.is_finite() && *width > 0.0 && center.is_finite()) {
                    return Err(Error::config(ConfigCode::Range, "rect object needs a positive width"));
                }
                if grid.min() > center - width / 2.0 || grid.max() < center + width / 2.0 {
                    return Err(Error::config(
                        ConfigCode::Range,
                        "object grid does not cover the rect object",
                    ));
                }
                Transmittance::from_fn(*grid, |xi| self.value(xi))
            }
            ObjectModel::Opaque => Transmittance::from_fn(*grid, |_| Complex64::new(0.0, 0.0)),
        }
    }
}
