//! Propagation and oracle physics checked against independent references:
//! Gaussian-beam optics, direct quadrature of the transform, and the shift
//! theorem.
//!
//! The kernel carries the 1/(jλd) prefactor of the two-dimensional Fresnel
//! integral while integrating over one transverse coordinate. The unitary 1-D
//! operator has 1/√(jλd) instead, so relative to it:
//!
//! - output energy is scaled by 1/(λd);
//! - two legs d1, d2 compose to the direct leg times √(d/(λ·d1·d2))·e^{−jπ/4}.

use std::f64::consts::PI;

use num_complex::Complex64;

use ftacq::analysis::{compare, fit_complex_scale, nrmse, relative_l2, window_indices};
use ftacq::experiment::{invert_to_object, single_arm_background, ExperimentConfig, Interferometer};
use ftacq::field::{ComplexField, Grid, SystemGeometry};
use ftacq::object::{conceived_object, ConceivedObjectParams, ObjectModel};
use ftacq::propagation::{build_transfer_matrix, propagate};

const LAMBDA: f64 = 0.532;

fn gaussian(grid: Grid, w0: f64) -> ComplexField {
    ComplexField::from_fn(grid, |x| Complex64::new((-(x * x) / (w0 * w0)).exp(), 0.0)).unwrap()
}

fn second_moment_width(f: &ComplexField) -> f64 {
    let xs = f.grid().positions();
    let (mut num, mut den) = (0.0, 0.0);
    for (x, z) in xs.iter().zip(f.samples()) {
        num += x * x * z.norm_sqr();
        den += z.norm_sqr();
    }
    2.0 * (num / den).sqrt()
}

#[test]
fn gaussian_beam_width_and_energy() {
    let geom = SystemGeometry::standard();
    let (w0, z) = (30.0, 20_000.0);
    let src = Grid::centered(400.0, 401).unwrap();
    let dst = Grid::centered(1000.0, 501).unwrap();
    let input = gaussian(src, w0);
    let t = build_transfer_matrix(&src, &dst, z, &geom).unwrap();
    let out = propagate(&input, &t).unwrap();

    let zr = PI * w0 * w0 / LAMBDA;
    let expected = w0 * (1.0 + (z / zr).powi(2)).sqrt();
    let got = second_moment_width(&out);
    assert!(((got - expected) / expected).abs() < 0.01, "width {got} vs {expected}");

    let ratio = out.energy() / input.energy() * LAMBDA * z;
    assert!((0.95..=1.05).contains(&ratio), "energy ratio {ratio}");
}

#[test]
fn propagation_composes() {
    let geom = SystemGeometry::standard();
    let src = Grid::centered(400.0, 401).unwrap();
    let mid = Grid::centered(800.0, 801).unwrap();
    let dst = Grid::centered(1000.0, 501).unwrap();
    let input = gaussian(src, 30.0);
    let a = build_transfer_matrix(&src, &mid, 8_000.0, &geom).unwrap();
    let b = build_transfer_matrix(&mid, &dst, 12_000.0, &geom).unwrap();
    let direct = build_transfer_matrix(&src, &dst, 20_000.0, &geom).unwrap();
    let two_step = propagate(&propagate(&input, &a).unwrap(), &b).unwrap();
    let (d1, d2) = (8_000.0, 12_000.0);
    let c = Complex64::from_polar(((d1 + d2) / (LAMBDA * d1 * d2)).sqrt(), -PI / 4.0);
    let one_step: Vec<Complex64> = propagate(&input, &direct)
        .unwrap()
        .samples()
        .iter()
        .map(|z| z * c)
        .collect();
    let err = relative_l2(two_step.samples(), &one_step).unwrap();
    assert!(err <= 1e-2, "semigroup error {err}");
}

#[test]
fn closed_form_matches_direct_quadrature() {
    let p = ConceivedObjectParams::default();
    let grid = Grid::centered(1000.0, 20_000).unwrap();
    let xs = grid.positions();
    let f: Vec<Complex64> = xs.iter().map(|&x| conceived_object(x, &p)).collect();
    let model = ObjectModel::Conceived(p);
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for i in 0..60 {
        let nu = -0.012 + i as f64 * 4e-4;
        let quad: Complex64 = xs
            .iter()
            .zip(&f)
            .map(|(&x, v)| v * Complex64::from_polar(1.0, -2.0 * PI * nu * x))
            .sum::<Complex64>()
            * grid.spacing();
        let exact = model.analytic_ft(nu);
        worst = worst.max((quad - exact).norm());
        peak = peak.max(exact.norm());
    }
    assert!(worst / peak <= 1e-3, "relative quadrature error {}", worst / peak);
}

fn default_with(model: ObjectModel) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::standard(42);
    cfg.set_object(model).unwrap();
    cfg
}

#[test]
fn asymmetric_object_fixes_the_sign_convention() {
    let cfg = default_with(ObjectModel::Rect {
        center: 100.0,
        width: 50.0,
    });
    let oracle = Interferometer::new(&cfg).unwrap().coherent_mode_oracle();
    let eta = cfg.detector_grid.positions();
    let window = (-400.0, 400.0);
    let right = compare(&oracle, &cfg.analytic_reference().unwrap(), &eta, window).unwrap();
    let mirrored: Vec<Complex64> = cfg
        .frequency_axis()
        .iter()
        .map(|&nu| cfg.object.unwrap().analytic_ft(-nu))
        .collect();
    let wrong = compare(&oracle, &mirrored, &eta, window).unwrap();
    assert!(right.nrmse <= 0.05, "nrmse {}", right.nrmse);
    assert!(
        wrong.nrmse > 0.5,
        "opposite convention unexpectedly fits: {}",
        wrong.nrmse
    );
}

#[test]
fn oracle_has_no_residual_chirp() {
    let cfg = ExperimentConfig::standard(42);
    let oracle = Interferometer::new(&cfg).unwrap().coherent_mode_oracle();
    let analytic = cfg.analytic_reference().unwrap();
    let idx = window_indices(&cfg.detector_grid.positions(), (-400.0, 400.0));
    let o: Vec<Complex64> = idx.iter().map(|&i| oracle[i]).collect();
    let a: Vec<Complex64> = idx.iter().map(|&i| analytic[i]).collect();
    let c = fit_complex_scale(&o, &a).unwrap();
    let peak = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (m, r) in o.iter().zip(&a) {
        if r.norm() > 0.3 * peak {
            worst = worst.max((m * (c * r).conj()).arg().abs());
        }
    }
    assert!(worst <= 0.1, "phase residual {worst} rad");
}

#[test]
fn opaque_object_gives_no_signal() {
    let mut cfg = default_with(ObjectModel::Opaque);
    cfg.realizations = 200;
    let system = Interferometer::new(&cfg).unwrap();
    let r = system.acquire().unwrap();
    let bg = r.i1.iter().chain(&r.i2).sum::<f64>() / (2 * r.i1.len()) as f64;
    assert!(bg > 0.0);
    for v in r.re_part.iter().chain(&r.im_part) {
        assert!(v.abs() <= 1e-12 * bg, "{v} vs background {bg}");
    }
}

#[test]
fn port_sum_equals_single_arm_background() {
    let mut cfg = ExperimentConfig::standard(5);
    cfg.realizations = 200;
    let system = Interferometer::new(&cfg).unwrap();
    let r = system.acquire().unwrap();
    let bg = single_arm_background(&system);
    for ((a, b), g) in r.i1.iter().zip(&r.i2).zip(&bg) {
        let half_sum = (a + b) / 2.0;
        assert!((half_sum - g).abs() <= 1e-10 * g, "{half_sum} vs {g}");
    }
}

#[test]
fn analytic_transform_inverts_to_object() {
    let geom = SystemGeometry::standard();
    let det = Grid::centered(1600.0, 1601).unwrap();
    let model = ObjectModel::Conceived(ConceivedObjectParams::default());
    let z: Vec<Complex64> = det
        .positions()
        .iter()
        .map(|&eta| model.analytic_ft(geom.detector_frequency(eta)))
        .collect();
    let target = Grid::centered(1000.0, 1001).unwrap();
    let rec = invert_to_object(&z, &det, &geom, &target).unwrap();
    let truth: Vec<Complex64> = target.positions().iter().map(|&x| model.value(x)).collect();
    let e = nrmse(rec.field.samples(), &truth).unwrap();
    assert!(e <= 0.1, "nrmse {e}");
}
