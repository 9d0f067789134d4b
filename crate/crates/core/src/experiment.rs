//! End-to-end acquisition: Monte Carlo intensity registration behind BS2,
//! extraction of the real and imaginary parts, the deterministic
//! coherent-mode oracle, and inversion back to the object plane.
//!
//! The lower arm is source → object (d1) → detector (d2); the upper arm is
//! source → detector (d) followed by the mirror η → −η. Both arms consume the
//! same source realization.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::elements::{self, apply_object, arm_phases, beam_splitter_mix, mix_pair, PhasePlateSetting, Transmittance};
use crate::error::{ConfigCode, Error, Result};
use crate::field::{apply_phase, flip, intensity, ComplexField, Grid, SystemGeometry};
use crate::object::{ConceivedObjectParams, ObjectModel};
use crate::propagation::{build_labelled, propagate, validate_sampling, SamplingReport, TransferMatrix};
use crate::source::{fill_circular_gaussian, realization_seed, SourceConfig};

/// Realizations in a standard run.
pub const DEFAULT_REALIZATIONS: usize = 20_000;
/// Realizations per work item; part of the reproducibility contract.
pub const DEFAULT_CHUNK_SIZE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: SystemGeometry,
    pub source: SourceConfig,
    pub object_grid: Grid,
    pub detector_grid: Grid,
    /// Closed-form model behind `transmittance`, when there is one.
    pub object: Option<ObjectModel>,
    pub transmittance: Transmittance,
    /// Plate settings for the J-off and J-on registrations, in that order.
    pub plates: [PhasePlateSetting; 2],
    pub realizations: usize,
    pub shared_noise: bool,
    pub chunk_size: usize,
}

/// Default grids: source 3000 µm / 1536, object 1200 µm / 1024, detector 800 µm / 801.
pub fn default_grids() -> (Grid, Grid, Grid) {
    (
        Grid::centered(3000.0, 1536).expect("valid"),
        Grid::centered(1200.0, 1024).expect("valid"),
        Grid::centered(800.0, 801).expect("valid"),
    )
}

impl ExperimentConfig {
    /// Standard geometry, the conceived object, default grids, P′ inserted.
    pub fn standard(master_seed: u64) -> Self {
        let (src, obj, det) = default_grids();
        let model = ObjectModel::Conceived(ConceivedObjectParams::default());
        ExperimentConfig {
            geometry: SystemGeometry::standard(),
            source: SourceConfig::new(src, 1.0, master_seed).expect("valid"),
            object_grid: obj,
            detector_grid: det,
            transmittance: model.transmittance(&obj).expect("object fits default grid"),
            object: Some(model),
            plates: plate_pair(true),
            realizations: DEFAULT_REALIZATIONS,
            shared_noise: false,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }

    /// Replace the object, resampling it on the object grid.
    pub fn set_object(&mut self, model: ObjectModel) -> Result<()> {
        self.transmittance = model.transmittance(&self.object_grid)?;
        self.object = Some(model);
        Ok(())
    }

    /// Replace the transmittance with one that has no closed-form model.
    pub fn set_transmittance(&mut self, t: Transmittance) {
        self.transmittance = t;
        self.object = None;
    }

    pub fn set_p_prime(&mut self, on: bool) {
        self.plates = plate_pair(on);
    }

    /// Sampling reports for the three legs, labelled.
    pub fn sampling_reports(&self) -> [(&'static str, SamplingReport); 3] {
        let lam = self.geometry.wavelength();
        let src = self.source.grid();
        [
            (
                LEG_X_XI,
                validate_sampling(src, &self.object_grid, self.geometry.d1(), lam),
            ),
            (
                LEG_XI_ETA,
                validate_sampling(&self.object_grid, &self.detector_grid, self.geometry.d2(), lam),
            ),
            (
                LEG_X_ETA,
                validate_sampling(src, &self.detector_grid, self.geometry.d(), lam),
            ),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::config(
                ConfigCode::Realizations,
                "realization count must be positive",
            ));
        }
        if self.chunk_size == 0 {
            return Err(Error::config(ConfigCode::Range, "chunk size must be positive"));
        }
        if !self.detector_grid.is_origin_centered() {
            return Err(Error::config(
                ConfigCode::Range,
                "detector grid must be centred on the optical axis",
            ));
        }
        if self.transmittance.grid() != &self.object_grid {
            return Err(Error::usage("transmittance is not sampled on the object grid"));
        }
        if self.plates[0].j_plate_on || !self.plates[1].j_plate_on {
            return Err(Error::config(ConfigCode::Range, "plate pair must be (J off, J on)"));
        }
        if self.plates[0].p_prime_on != self.plates[1].p_prime_on
            || self.plates[0].p_prime_phase() != self.plates[1].p_prime_phase()
        {
            return Err(Error::config(
                ConfigCode::Range,
                "P' must be the same for both J settings",
            ));
        }
        for (label, r) in self.sampling_reports() {
            if !r.passed {
                return Err(Error::config(
                    ConfigCode::Sampling,
                    format!(
                        "{label}: kernel frequency {:.4e} /um exceeds Nyquist {:.4e} /um",
                        r.max_frequency, r.nyquist
                    ),
                ));
            }
        }
        Ok(())
    }

    /// ν = 2η/(λd2) at each detector sample.
    pub fn frequency_axis(&self) -> Vec<f64> {
        frequency_axis(&self.detector_grid, &self.geometry)
    }

    /// Closed-form transform on the detector frequency axis, if known.
    pub fn analytic_reference(&self) -> Option<Vec<Complex64>> {
        let model = self.object?;
        Some(
            self.frequency_axis()
                .into_iter()
                .map(|nu| model.analytic_ft(nu))
                .collect(),
        )
    }
}

/// (J off, J on) with P′ inserted or not at its default phase.
pub fn plate_pair(p_prime_on: bool) -> [PhasePlateSetting; 2] {
    let base = PhasePlateSetting::with_plates(false, p_prime_on);
    [base, base.with_j(true)]
}

pub fn frequency_axis(detector: &Grid, geometry: &SystemGeometry) -> Vec<f64> {
    detector
        .positions()
        .into_iter()
        .map(|eta| geometry.detector_frequency(eta))
        .collect()
}

const LEG_X_XI: &str = "x->xi (lower arm, d1)";
const LEG_XI_ETA: &str = "xi->eta (lower arm, d2)";
const LEG_X_ETA: &str = "x->eta (upper arm, d)";

/// One registration channel: complex multipliers on the two arms (plates, or
/// 0 to block an arm) and the tag selecting the source-noise stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub lower: Complex64,
    pub upper: Complex64,
    pub noise_tag: u64,
}

impl Channel {
    pub fn from_plates(setting: &PhasePlateSetting, noise_tag: u64) -> Self {
        let (up, low) = arm_phases(setting);
        Channel {
            lower: Complex64::from_polar(1.0, low),
            upper: Complex64::from_polar(1.0, up),
            noise_tag,
        }
    }
}

/// Summed detector intensities behind BS2 for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySums {
    /// Σ|E₁|² at each detector sample (port with the half-wave loss).
    pub i1: Vec<f64>,
    /// Σ|E₂|².
    pub i2: Vec<f64>,
    pub count: usize,
}

impl IntensitySums {
    pub fn zeros(len: usize) -> Self {
        IntensitySums {
            i1: vec![0.0; len],
            i2: vec![0.0; len],
            count: 0,
        }
    }

    pub fn add(&mut self, other: &IntensitySums) {
        for (a, b) in self.i1.iter_mut().zip(&other.i1) {
            *a += b;
        }
        for (a, b) in self.i2.iter_mut().zip(&other.i2) {
            *a += b;
        }
        self.count += other.count;
    }

    /// Mean intensities (I₁, I₂).
    pub fn means(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.count.max(1) as f64;
        (
            self.i1.iter().map(|v| v / n).collect(),
            self.i2.iter().map(|v| v / n).collect(),
        )
    }

    /// (I₂ − I₁)/2 = Re⟨E_low E_up*⟩ for this channel.
    pub fn half_difference(&self) -> Vec<f64> {
        let (i1, i2) = self.means();
        i2.iter().zip(&i1).map(|(b, a)| (b - a) / 2.0).collect()
    }
}

/// The precomputed optical system for one configuration.
///
/// Holds the three free-space legs and the fused per-arm operators used in the
/// Monte Carlo loop: `lower = T_ξη · diag(f·Δξ) · T_xξ` and the row-flipped
/// `T_xη`.
#[derive(Debug, Clone)]
pub struct Interferometer {
    config: ExperimentConfig,
    x_to_xi: TransferMatrix,
    xi_to_eta: TransferMatrix,
    x_to_eta: TransferMatrix,
    lower: TransferMatrix,
    upper_flipped: TransferMatrix,
    /// Source-weighted operators stacked as columns: (src, 2·det),
    /// lower arm first.
    stacked_t: Array2<Complex64>,
}

impl Interferometer {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let geo = &config.geometry;
        let src = config.source.grid();
        let x_to_xi = build_labelled(src, &config.object_grid, geo.d1(), geo, LEG_X_XI)?;
        let xi_to_eta = build_labelled(&config.object_grid, &config.detector_grid, geo.d2(), geo, LEG_XI_ETA)?;
        let x_to_eta = build_labelled(src, &config.detector_grid, geo.d(), geo, LEG_X_ETA)?;
        let lower = x_to_xi.compose_through(config.transmittance.values(), &xi_to_eta)?;
        let upper_flipped = x_to_eta.flip_rows()?;

        let m = config.detector_grid.count();
        let mut stacked_t = Array2::zeros((src.count(), 2 * m));
        stacked_t.slice_mut(s![.., ..m]).assign(&lower.weighted().t());
        stacked_t.slice_mut(s![.., m..]).assign(&upper_flipped.weighted().t());

        Ok(Interferometer {
            config: config.clone(),
            x_to_xi,
            xi_to_eta,
            x_to_eta,
            lower,
            upper_flipped,
            stacked_t,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn legs(&self) -> [&TransferMatrix; 3] {
        [&self.x_to_xi, &self.xi_to_eta, &self.x_to_eta]
    }

    pub fn lower_operator(&self) -> &TransferMatrix {
        &self.lower
    }

    pub fn upper_flipped_operator(&self) -> &TransferMatrix {
        &self.upper_flipped
    }

    fn seed(&self, index: usize, tag: u64) -> u64 {
        realization_seed(self.config.source.master_seed(), index as u64, tag)
    }

    /// Sum registrations over realizations `start..end` for every channel.
    ///
    /// Work is split into chunks of `chunk_size` realizations starting at
    /// `start`; chunks run in parallel on the current rayon pool and their
    /// partial sums are added in chunk order, so the result does not depend
    /// on the worker count.
    pub fn register(&self, channels: &[Channel], start: usize, end: usize) -> Vec<IntensitySums> {
        let m = self.config.detector_grid.count();
        let chunk = self.config.chunk_size;
        let bounds: Vec<(usize, usize)> = (start..end).step_by(chunk).map(|a| (a, (a + chunk).min(end))).collect();
        let partials: Vec<Vec<IntensitySums>> = bounds
            .into_par_iter()
            .map(|(a, b)| self.register_chunk(channels, a, b))
            .collect();
        let mut total = vec![IntensitySums::zeros(m); channels.len()];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                t.add(p);
            }
        }
        total
    }

    fn register_chunk(&self, channels: &[Channel], start: usize, end: usize) -> Vec<IntensitySums> {
        let m = self.config.detector_grid.count();
        let n_src = self.config.source.grid().count();
        let rows = end - start;
        let variance = self.config.source.sample_variance();
        let mut out = vec![IntensitySums::zeros(m); channels.len()];

        let mut tags: Vec<u64> = channels.iter().map(|c| c.noise_tag).collect();
        tags.sort_unstable();
        tags.dedup();

        let mut fields = Array2::<Complex64>::zeros((rows, n_src));
        for tag in tags {
            for (r, mut row) in fields.axis_iter_mut(Axis(0)).enumerate() {
                let row = row.as_slice_mut().expect("standard layout");
                fill_circular_gaussian(row, variance, self.seed(start + r, tag));
            }
            // (rows, 2m): lower-arm fields then upper-arm fields per realization.
            let arms = fields.dot(&self.stacked_t);
            for (ch, sums) in channels.iter().zip(out.iter_mut()) {
                if ch.noise_tag != tag {
                    continue;
                }
                for row in arms.axis_iter(Axis(0)) {
                    let row = row.as_slice().expect("standard layout");
                    let (low, up) = row.split_at(m);
                    for j in 0..m {
                        let (e1, e2) = mix_pair(low[j] * ch.lower, up[j] * ch.upper);
                        sums.i1[j] += e1.norm_sqr();
                        sums.i2[j] += e2.norm_sqr();
                    }
                }
                sums.count += rows;
            }
        }
        out
    }

    /// One realization through the unfused chain of field operations:
    /// source → propagate → object → propagate → P′ on the lower arm,
    /// source → propagate → J → flip on the upper arm, then BS2.
    pub fn simulate_realization(
        &self,
        source_field: &ComplexField,
        setting: &PhasePlateSetting,
    ) -> Result<(ComplexField, ComplexField)> {
        let (up_phase, low_phase) = arm_phases(setting);
        let at_object = propagate(source_field, &self.x_to_xi)?;
        let lower = apply_phase(
            &propagate(&apply_object(&at_object, &self.config.transmittance)?, &self.xi_to_eta)?,
            low_phase,
        );
        let upper = flip(&apply_phase(&propagate(source_field, &self.x_to_eta)?, up_phase))?;
        beam_splitter_mix(&lower, &upper)
    }

    /// The two registrations (J off, J on) over all configured realizations.
    pub fn acquire(&self) -> Result<AcquisitionResult> {
        let n = self.config.realizations;
        let channels: Vec<Channel> = self
            .config
            .plates
            .iter()
            .enumerate()
            .map(|(s, p)| Channel::from_plates(p, if self.config.shared_noise { 0 } else { s as u64 }))
            .collect();
        let sums = self.register(&channels, 0, n);
        AcquisitionResult::from_sums(&self.config, &sums[0], &sums[1])
    }

    /// Deterministic mutual intensity ⟨E_low(η)E_up*(−η)⟩ for the J-off setting:
    /// `I·Δx · Σᵢ H_low[η, xᵢ]·e^{jφ_P′}·conj(H_up_flipped[η, xᵢ])`.
    pub fn coherent_mode_oracle(&self) -> Vec<Complex64> {
        let (_, low_phase) = arm_phases(&self.config.plates[0]);
        let rot = Complex64::from_polar(1.0, low_phase);
        let src = self.config.source;
        let scale = src.mean_intensity() * src.grid().spacing();
        self.lower
            .entries()
            .axis_iter(Axis(0))
            .zip(self.upper_flipped.entries().axis_iter(Axis(0)))
            .map(|(hl, hu)| {
                let acc = hl
                    .iter()
                    .zip(hu.iter())
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b.conj());
                acc * rot * scale
            })
            .collect()
    }

    /// Complex estimates built purely from intensities at base upper-arm
    /// phases 0 (J off) and π/2 (J on): each is D(φ) + j·D(φ + π/2) with
    /// D = (I₂ − I₁)/2. Returns `(estimate_off, estimate_on)`.
    pub fn j_plate_estimates(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let (_, low_phase) = arm_phases(&self.config.plates[0]);
        let lower = Complex64::from_polar(1.0, low_phase);
        let shared = self.config.shared_noise;
        let channels: Vec<Channel> = [0.0, FRAC_PI_2, PI]
            .iter()
            .enumerate()
            .map(|(i, &phi)| Channel {
                lower,
                upper: Complex64::from_polar(1.0, phi),
                noise_tag: if shared { 0 } else { i as u64 },
            })
            .collect();
        let sums = self.register(&channels, 0, self.config.realizations);
        let d: Vec<Vec<f64>> = sums.iter().map(IntensitySums::half_difference).collect();
        let combine =
            |a: &[f64], b: &[f64]| -> Vec<Complex64> { a.iter().zip(b).map(|(&r, &i)| Complex64::new(r, i)).collect() };
        (combine(&d[0], &d[1]), combine(&d[1], &d[2]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionResult {
    pub detector_grid: Grid,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub i1p: Vec<f64>,
    pub i2p: Vec<f64>,
    pub re_part: Vec<f64>,
    pub im_part: Vec<f64>,
    pub complex_ft: Vec<Complex64>,
    pub realizations_used: usize,
}

impl AcquisitionResult {
    fn from_sums(config: &ExperimentConfig, off: &IntensitySums, on: &IntensitySums) -> Result<Self> {
        let (i1, i2) = off.means();
        let (i1p, i2p) = on.means();
        let re_part = off.half_difference();
        let im_part = on.half_difference();
        let complex_ft = assemble_complex_ft(&re_part, &im_part, &config.plates[0])?;
        Ok(AcquisitionResult {
            detector_grid: config.detector_grid,
            i1,
            i2,
            i1p,
            i2p,
            re_part,
            im_part,
            complex_ft,
            realizations_used: off.count,
        })
    }

    /// re_part + j·im_part, the estimate of the (P′-rotated) mutual intensity.
    pub fn mutual_intensity(&self) -> Vec<Complex64> {
        self.re_part
            .iter()
            .zip(&self.im_part)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }
}

/// Run the full two-setting acquisition.
pub fn run_acquisition(config: &ExperimentConfig) -> Result<AcquisitionResult> {
    Interferometer::new(config)?.acquire()
}

pub fn coherent_mode_oracle(config: &ExperimentConfig) -> Result<Vec<Complex64>> {
    Ok(Interferometer::new(config)?.coherent_mode_oracle())
}

/// Z = re + j·im, rotated by e^{jπ/4} unless P′ already did that optically.
pub fn assemble_complex_ft(re_part: &[f64], im_part: &[f64], plates: &PhasePlateSetting) -> Result<Vec<Complex64>> {
    if re_part.len() != im_part.len() {
        return Err(Error::usage(format!(
            "real part has {} samples, imaginary part {}",
            re_part.len(),
            im_part.len()
        )));
    }
    let rot = if plates.p_prime_on {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, elements::COMPENSATION_PHASE)
    };
    Ok(re_part
        .iter()
        .zip(im_part)
        .map(|(&r, &i)| Complex64::new(r, i) * rot)
        .collect())
}

/// Reconstructed object plus any coverage warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub field: ComplexField,
    pub warnings: Vec<String>,
}

/// Inverse transform f̂(ξ) = Σ_m Z[m]·e^{+j2πν_mξ}·Δν with ν_m = 2η_m/(λd2),
/// evaluated by direct summation on `target`.
pub fn invert_to_object(
    complex_ft: &[Complex64],
    detector_grid: &Grid,
    geometry: &SystemGeometry,
    target: &Grid,
) -> Result<Reconstruction> {
    if complex_ft.len() != detector_grid.count() {
        return Err(Error::usage(format!(
            "transform has {} samples, detector grid {}",
            complex_ft.len(),
            detector_grid.count()
        )));
    }
    let nu = frequency_axis(detector_grid, geometry);
    let dnu = 2.0 * detector_grid.spacing() / (geometry.wavelength() * geometry.d2());
    let samples: Vec<Complex64> = target
        .positions()
        .into_iter()
        .map(|xi| {
            nu.iter()
                .zip(complex_ft)
                .fold(Complex64::new(0.0, 0.0), |acc, (&v, z)| {
                    acc + z * Complex64::from_polar(1.0, 2.0 * PI * v * xi)
                })
                * dnu
        })
        .collect();

    let mut warnings = Vec::new();
    let nu_max = nu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let target_band = 0.5 / target.spacing();
    if target_band > nu_max {
        warnings.push(format!(
            "frequency coverage |nu| <= {nu_max:.4e} /um is narrower than the target grid band {target_band:.4e} /um; \
             the reconstruction is band-limited to about {:.1} um resolution",
            0.5 / nu_max
        ));
    }
    let period = 1.0 / dnu;
    if target.extent() >= period {
        warnings.push(format!(
            "target extent {:.1} um exceeds the alias-free period {period:.1} um of the frequency sampling",
            target.extent()
        ));
    }
    Ok(Reconstruction {
        field: ComplexField::new(*target, samples)?,
        warnings,
    })
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub realizations: usize,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of log(error) against log(N).
    pub slope: f64,
}

/// Relative L2 error of the intensity-derived mutual intensity against the
/// oracle on `window`, at each N in `counts`.
///
/// All counts are prefixes of one run: realization n always uses the same
/// seeds, so the run to max N is accumulated once and read off at each count.
pub fn sweep_realizations(config: &ExperimentConfig, counts: &[usize], window: (f64, f64)) -> Result<SweepResult> {
    let mut ns: Vec<usize> = counts.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 || ns[0] == 0 {
        return Err(Error::config(
            ConfigCode::Realizations,
            "sweep needs at least two distinct positive realization counts",
        ));
    }
    let system = Interferometer::new(config)?;
    let oracle = system.coherent_mode_oracle();
    let idx = crate::analysis::window_indices(&config.detector_grid.positions(), window);
    let oracle_w: Vec<Complex64> = idx.iter().map(|&i| oracle[i]).collect();
    let channels: Vec<Channel> = config
        .plates
        .iter()
        .enumerate()
        .map(|(s, p)| Channel::from_plates(p, if config.shared_noise { 0 } else { s as u64 }))
        .collect();

    let m = config.detector_grid.count();
    let mut totals = vec![IntensitySums::zeros(m); channels.len()];
    let mut done = 0;
    let mut points = Vec::with_capacity(ns.len());
    for &n in &ns {
        let seg = system.register(&channels, done, n);
        for (t, s) in totals.iter_mut().zip(&seg) {
            t.add(s);
        }
        done = n;
        let re = totals[0].half_difference();
        let im = totals[1].half_difference();
        let est: Vec<Complex64> = idx.iter().map(|&i| Complex64::new(re[i], im[i])).collect();
        points.push(SweepPoint {
            realizations: n,
            relative_error: crate::analysis::relative_l2(&est, &oracle_w)?,
        });
    }
    let slope = loglog_slope(&points);
    Ok(SweepResult { points, slope })
}

fn loglog_slope(points: &[SweepPoint]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.realizations as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.relative_error.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean single-arm intensities with the other arm blocked, summed:
/// the background (|E_low|² + |E_up|²)/2 seen at each BS2 port.
pub fn single_arm_background(system: &Interferometer) -> Vec<f64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let channels = [
        Channel {
            lower: one,
            upper: zero,
            noise_tag: 0,
        },
        Channel {
            lower: zero,
            upper: one,
            noise_tag: 0,
        },
    ];
    let sums = system.register(&channels, 0, system.config().realizations);
    let (low, _) = sums[0].means();
    let (up, _) = sums[1].means();
    low.iter().zip(&up).map(|(a, b)| a + b).collect()
}

/// Intensity of a field behind BS2 port 1 and port 2.
pub fn port_intensities(e1: &ComplexField, e2: &ComplexField) -> (Vec<f64>, Vec<f64>) {
    (intensity(e1), intensity(e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::sample_thermal;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// A small, fast configuration that still passes the sampling check.
    pub(crate) fn small_config() -> ExperimentConfig {
        let src = Grid::centered(600.0, 301).unwrap();
        let obj = Grid::centered(240.0, 161).unwrap();
        let det = Grid::centered(200.0, 81).unwrap();
        let geometry = SystemGeometry::new(0.532, 20_000.0, 25_000.0, 45_000.0).unwrap();
        let model = ObjectModel::Rect {
            center: 20.0,
            width: 60.0,
        };
        ExperimentConfig {
            geometry,
            source: SourceConfig::new(src, 1.0, 7).unwrap(),
            object_grid: obj,
            detector_grid: det,
            transmittance: model.transmittance(&obj).unwrap(),
            object: Some(model),
            plates: plate_pair(true),
            realizations: 64,
            shared_noise: false,
            chunk_size: 16,
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        assert!(cfg.validate().is_ok());
        cfg.realizations = 0;
        assert_eq!(
            cfg.validate().unwrap_err().config_code(),
            Some(ConfigCode::Realizations)
        );

        let mut cfg = small_config();
        cfg.detector_grid = Grid::new(5.0, 2.5, 81).unwrap();
        assert!(cfg.validate().is_err());

        let mut cfg = small_config();
        cfg.plates = [cfg.plates[1], cfg.plates[0]];
        assert!(cfg.validate().is_err());

        let mut cfg = small_config();
        cfg.source = SourceConfig::new(Grid::centered(600.0, 31).unwrap(), 1.0, 7).unwrap();
        assert_eq!(cfg.validate().unwrap_err().config_code(), Some(ConfigCode::Sampling));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn assemble_examples() {
        let on = PhasePlateSetting::with_plates(false, true);
        let off = PhasePlateSetting::with_plates(false, false);
        assert_eq!(assemble_complex_ft(&[1.0], &[0.0], &on).unwrap(), vec![c(1.0, 0.0)]);
        let z = assemble_complex_ft(&[1.0], &[0.0], &off).unwrap()[0];
        assert!((z - Complex64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert!((z - c(0.70710678, 0.70710678)).norm() < 1e-8);
        assert!(assemble_complex_ft(&[1.0, 2.0], &[0.0], &on).is_err());
    }

    #[test]
    fn fused_path_matches_stepwise_chain() {
        let mut cfg = small_config();
        cfg.realizations = 5;
        cfg.chunk_size = 2;
        cfg.shared_noise = true;
        let system = Interferometer::new(&cfg).unwrap();
        let channels: Vec<Channel> = cfg.plates.iter().map(|p| Channel::from_plates(p, 0)).collect();
        let fast = system.register(&channels, 0, cfg.realizations);

        let m = cfg.detector_grid.count();
        for (s, plate) in cfg.plates.iter().enumerate() {
            let mut i1 = vec![0.0; m];
            let mut i2 = vec![0.0; m];
            for n in 0..cfg.realizations {
                let e = sample_thermal(&cfg.source, realization_seed(7, n as u64, 0));
                let (e1, e2) = system.simulate_realization(&e, plate).unwrap();
                let (a, b) = port_intensities(&e1, &e2);
                for j in 0..m {
                    i1[j] += a[j];
                    i2[j] += b[j];
                }
            }
            let scale = i1.iter().chain(&i2).fold(0.0f64, |a, v| a.max(*v));
            for j in 0..m {
                assert!((fast[s].i1[j] - i1[j]).abs() <= 1e-10 * scale);
                assert!((fast[s].i2[j] - i2[j]).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn chunking_does_not_change_sums_beyond_rounding() {
        let mut a = small_config();
        a.chunk_size = 64;
        let mut b = small_config();
        b.chunk_size = 5;
        let ra = run_acquisition(&a).unwrap();
        let rb = run_acquisition(&b).unwrap();
        for (x, y) in ra.i1.iter().zip(&rb.i1) {
            assert!((x - y).abs() <= 1e-12 * x.abs());
        }
    }

    #[test]
    fn result_structure() {
        let r = run_acquisition(&small_config()).unwrap();
        assert_eq!(r.realizations_used, 64);
        assert!(r.i1.iter().chain(&r.i2).chain(&r.i1p).chain(&r.i2p).all(|v| *v >= 0.0));
        for j in 0..r.re_part.len() {
            assert_eq!(r.re_part[j], (r.i2[j] - r.i1[j]) / 2.0);
            assert_eq!(r.im_part[j], (r.i2p[j] - r.i1p[j]) / 2.0);
        }
    }

    #[test]
    fn oracle_linear_in_object() {
        let cfg = small_config();
        let base = coherent_mode_oracle(&cfg).unwrap();
        let k = c(-0.4, 1.7);
        let mut scaled = cfg.clone();
        scaled.set_transmittance(cfg.transmittance.scaled(k));
        let out = coherent_mode_oracle(&scaled).unwrap();
        let peak = base.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        for (a, b) in base.iter().zip(&out) {
            assert!((a * k - b).norm() <= 1e-12 * peak * k.norm());
        }

        let mut dark = cfg.clone();
        dark.set_object(ObjectModel::Opaque).unwrap();
        assert!(coherent_mode_oracle(&dark).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn inversion_of_zero_is_zero() {
        let det = Grid::centered(800.0, 801).unwrap();
        let target = Grid::centered(1000.0, 201).unwrap();
        let geo = SystemGeometry::standard();
        let r = invert_to_object(&vec![c(0.0, 0.0); 801], &det, &geo, &target).unwrap();
        assert!(r.field.samples().iter().all(|z| z.norm() == 0.0));
        assert!(invert_to_object(&[c(0.0, 0.0)], &det, &geo, &target).is_err());
    }

    #[test]
    fn inversion_reports_band_limit() {
        let det = Grid::centered(800.0, 801).unwrap();
        let geo = SystemGeometry::standard();
        let fine = Grid::centered(1000.0, 1001).unwrap();
        let r = invert_to_object(&vec![c(1.0, 0.0); 801], &det, &geo, &fine).unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("band-limited")));
        let coarse = Grid::centered(1000.0, 41).unwrap();
        let r = invert_to_object(&vec![c(1.0, 0.0); 801], &det, &geo, &coarse).unwrap();
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn inversion_locates_narrow_peak() {
        // Transform of a narrow rect at ξ₀ = 120 µm, via the shift theorem.
        let det = Grid::centered(800.0, 801).unwrap();
        let geo = SystemGeometry::standard();
        let model = ObjectModel::Rect {
            center: 120.0,
            width: 4.0,
        };
        let z: Vec<Complex64> = frequency_axis(&det, &geo)
            .into_iter()
            .map(|nu| model.analytic_ft(nu))
            .collect();
        let target = Grid::centered(1000.0, 1001).unwrap();
        let r = invert_to_object(&z, &det, &geo, &target).unwrap();
        let (imax, _) = r
            .field
            .samples()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((target.position(imax) - 120.0).abs() <= 1.0);
    }

    #[test]
    fn sweep_rejects_bad_counts() {
        let cfg = small_config();
        assert!(sweep_realizations(&cfg, &[10], (-100.0, 100.0)).is_err());
        assert!(sweep_realizations(&cfg, &[0, 10], (-100.0, 100.0)).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<SweepPoint> = [100usize, 400, 1600]
            .iter()
            .map(|&n| SweepPoint {
                realizations: n,
                relative_error: 3.0 / (n as f64).sqrt(),
            })
            .collect();
        assert!((loglog_slope(&pts) + 0.5).abs() < 1e-12);
    }
}
