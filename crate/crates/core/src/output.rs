//! Result files: per-sample CSV tables and the run manifest.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which round-trips
//! every f64 exactly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::analysis::ComparisonReport;
use crate::error::{Error, Result};
use crate::experiment::{AcquisitionResult, Reconstruction};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const CONFIG_FILE: &str = "config.toml";

pub const RESULTS_HEADER: [&str; 11] = [
    "eta_um",
    "I1",
    "I2",
    "I1p",
    "I2p",
    "re_meas",
    "im_meas",
    "re_oracle",
    "im_oracle",
    "re_analytic",
    "im_analytic",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reference signals written beside a measurement, on the detector axis.
#[derive(Debug, Clone, PartialEq)]
pub struct References {
    /// Coherent-mode mutual intensity, same scale and phase as re/im_meas.
    pub oracle: Vec<Complex64>,
    /// Closed-form transform at ν = 2η/(λd2); `None` writes NaN.
    pub analytic: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_digest: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub wall_time: f64,
}

impl RunManifest {
    pub fn to_document(&self) -> String {
        format!(
            "config_digest = \"{}\"\nmaster_seed = {}\ntool_version = \"{}\"\nwall_time_s = {:?}\n",
            self.config_digest, self.master_seed, self.tool_version, self.wall_time
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e.to_string()))
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Write `results.csv` and `manifest.toml` into `dir`, creating it if needed.
pub fn write_results(
    result: &AcquisitionResult,
    references: &References,
    manifest: &RunManifest,
    dir: &Path,
) -> Result<()> {
    let m = result.detector_grid.count();
    if references.oracle.len() != m || references.analytic.as_ref().is_some_and(|a| a.len() != m) {
        return Err(Error::usage("reference arrays do not match the detector grid"));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let eta = result.detector_grid.positions();
    let rows = (0..m).map(|j| {
        let a = references
            .analytic
            .as_ref()
            .map_or(Complex64::new(f64::NAN, f64::NAN), |a| a[j]);
        vec![
            eta[j],
            result.i1[j],
            result.i2[j],
            result.i1p[j],
            result.i2p[j],
            result.re_part[j],
            result.im_part[j],
            references.oracle[j].re,
            references.oracle[j].im,
            a.re,
            a.im,
        ]
    });
    write_table(&dir.join(RESULTS_FILE), &RESULTS_HEADER, rows)?;
    let mpath = dir.join(MANIFEST_FILE);
    fs::write(&mpath, manifest.to_document()).map_err(io_err(&mpath))
}

/// A CSV table read back as named f64 columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::usage(format!("table has no column '{name}'")))
    }

    pub fn complex(&self, re: &str, im: &str) -> Result<Vec<Complex64>> {
        Ok(self
            .column(re)?
            .iter()
            .zip(self.column(im)?)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::io(path, std::io::Error::other(format!("bad number '{field}'"))))?;
            col.push(v);
        }
    }
    Ok(Table { header, columns })
}

/// Oracle and analytic references alone (no measurement).
pub fn write_references(eta: &[f64], references: &References, path: &Path) -> Result<()> {
    let header = ["eta_um", "re_oracle", "im_oracle", "re_analytic", "im_analytic"];
    let rows = eta.iter().enumerate().map(|(j, &e)| {
        let a = references
            .analytic
            .as_ref()
            .map_or(Complex64::new(f64::NAN, f64::NAN), |a| a[j]);
        vec![e, references.oracle[j].re, references.oracle[j].im, a.re, a.im]
    });
    write_table(path, &header, rows)
}

pub fn write_reconstruction(rec: &Reconstruction, path: &Path) -> Result<()> {
    let xi = rec.field.grid().positions();
    let rows = xi.iter().zip(rec.field.samples()).map(|(&x, z)| vec![x, z.re, z.im]);
    write_table(path, &["xi_um", "re", "im"], rows)
}

pub fn report_document(report: &ComparisonReport, against: &str) -> String {
    format!(
        "against = \"{against}\"\nfitted_scale_re = {}\nfitted_scale_im = {}\npearson_re = {}\npearson_im = {}\nnrmse = {}\nwindow_min_um = {}\nwindow_max_um = {}\n",
        fmt_f64(report.fitted_scale.re),
        fmt_f64(report.fitted_scale.im),
        fmt_f64(report.pearson_re),
        fmt_f64(report.pearson_im),
        fmt_f64(report.nrmse),
        fmt_f64(report.window.0),
        fmt_f64(report.window.1),
    )
}
