//! Command-line front end.
//!
//! ```text
//! ftacq acquire  --config default --seed 42 --out run1/
//! ftacq oracle   --config default --out refs.csv
//! ftacq compare  run1/ --against analytic
//! ftacq invert   run1/ --from measured
//! ftacq sweep-n  500,2000,8000,32000 --config default
//! ```
//!
//! `FTACQ_WORKERS` sets the number of worker threads. It changes speed only;
//! outputs are identical for any value.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::analysis::compare;
use crate::config::{default_config, parse_config, RunConfig, Value};
use crate::error::{Error, Result};
use crate::experiment::{assemble_complex_ft, invert_to_object, sweep_realizations, Interferometer};
use crate::field::Grid;
use crate::output::{
    read_table, report_document, write_reconstruction, write_references, write_results, References, RunManifest,
    CONFIG_FILE, RESULTS_FILE,
};

pub const WORKERS_ENV: &str = "FTACQ_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "ftacq",
    version,
    about = "Complex Fourier-transform acquisition with thermal light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// Configuration document, or `default` for the built-in one.
    #[arg(long, default_value = "default")]
    config: String,
    /// Master seed (overrides the document).
    #[arg(long)]
    seed: Option<u64>,
    /// Realization count (overrides the document).
    #[arg(long)]
    realizations: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Against {
    Analytic,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InvertFrom {
    Measured,
    Oracle,
    Analytic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte Carlo acquisition and write results.csv + manifest.toml.
    Acquire {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the coherent-mode and closed-form references.
    Oracle {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a run against a reference and persist the report.
    Compare {
        run: PathBuf,
        #[arg(long, value_enum, default_value = "analytic")]
        against: Against,
    },
    /// Invert a transform back to the object plane.
    Invert {
        run: PathBuf,
        #[arg(long, value_enum, default_value = "measured")]
        from: InvertFrom,
        /// Output CSV; defaults to <run>/reconstruction.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1000.0)]
        target_extent_um: f64,
        #[arg(long, default_value_t = 1001)]
        target_count: usize,
    },
    /// Convergence study: relative error against the oracle for several N.
    #[command(name = "sweep-n")]
    SweepN {
        /// Comma-separated realization counts.
        counts: String,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Optional CSV for the table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    let base = if args.config == "default" {
        default_config()
    } else {
        let path = Path::new(&args.config);
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_config(&text)?
    };
    let mut overrides = Vec::new();
    if let Some(seed) = args.seed {
        let seed = i64::try_from(seed).map_err(|_| Error::usage("seed must fit in 63 bits"))?;
        overrides.push(("seed", Value::Int(seed)));
    }
    if let Some(n) = args.realizations {
        let n = i64::try_from(n).map_err(|_| Error::usage("realization count too large"))?;
        overrides.push(("source.n_realizations", Value::Int(n)));
    }
    if overrides.is_empty() {
        Ok(base)
    } else {
        base.with_overrides(&overrides)
    }
}

fn load_run(dir: &Path) -> Result<(RunConfig, crate::output::Table)> {
    let cpath = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&cpath).map_err(|e| Error::io(&cpath, e))?;
    let cfg = parse_config(&text)?;
    let table = read_table(&dir.join(RESULTS_FILE))?;
    if table.rows() != cfg.experiment().detector_grid.count() {
        return Err(Error::usage(format!(
            "{} has {} rows but the detector grid has {}",
            RESULTS_FILE,
            table.rows(),
            cfg.experiment().detector_grid.count()
        )));
    }
    Ok((cfg, table))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn acquire(cfg: &RunConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let exp = cfg.experiment();
    let system = Interferometer::new(exp)?;
    let result = system.acquire()?;
    let refs = References {
        oracle: system.coherent_mode_oracle(),
        analytic: exp.analytic_reference(),
    };
    let manifest = RunManifest {
        config_digest: cfg.digest(),
        master_seed: exp.source.master_seed(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time: started.elapsed().as_secs_f64(),
    };
    write_results(&result, &refs, &manifest, out)?;
    write_file(&out.join(CONFIG_FILE), &cfg.canonical())?;
    println!(
        "acquired {} realizations x 2 settings in {:.1} s -> {}",
        result.realizations_used,
        manifest.wall_time,
        out.display()
    );
    Ok(())
}

fn oracle(cfg: &RunConfig, out: &Path) -> Result<()> {
    let exp = cfg.experiment();
    let system = Interferometer::new(exp)?;
    let refs = References {
        oracle: system.coherent_mode_oracle(),
        analytic: exp.analytic_reference(),
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_references(&exp.detector_grid.positions(), &refs, out)?;
    if let Some(analytic) = &refs.analytic {
        let report = compare(&refs.oracle, analytic, &exp.detector_grid.positions(), cfg.window())?;
        println!("oracle vs analytic: {}", summary(&report));
    }
    println!("references -> {}", out.display());
    Ok(())
}

fn summary(r: &crate::analysis::ComparisonReport) -> String {
    format!(
        "pearson_re {:.6} pearson_im {:.6} nrmse {:.6} scale {:.6e}{:+.6e}j window [{}, {}] um",
        r.pearson_re, r.pearson_im, r.nrmse, r.fitted_scale.re, r.fitted_scale.im, r.window.0, r.window.1
    )
}

fn compare_run(run: &Path, against: Against) -> Result<()> {
    let (cfg, table) = load_run(run)?;
    let exp = cfg.experiment();
    let eta = table.column("eta_um")?.to_vec();
    let (name, measured, reference) = match against {
        Against::Analytic => {
            let z = assemble_complex_ft(table.column("re_meas")?, table.column("im_meas")?, &exp.plates[0])?;
            ("analytic", z, table.complex("re_analytic", "im_analytic")?)
        }
        Against::Oracle => (
            "oracle",
            table.complex("re_meas", "im_meas")?,
            table.complex("re_oracle", "im_oracle")?,
        ),
    };
    if reference.iter().any(|z| z.re.is_nan()) {
        return Err(Error::usage(format!("run has no {name} reference")));
    }
    let report = compare(&measured, &reference, &eta, cfg.window())?;
    println!("{name}: {}", summary(&report));
    write_file(
        &run.join(format!("compare_{name}.toml")),
        &report_document(&report, name),
    )
}

fn invert(run: &Path, from: InvertFrom, out: Option<PathBuf>, extent: f64, count: usize) -> Result<()> {
    let (cfg, table) = load_run(run)?;
    let exp = cfg.experiment();
    let z: Vec<Complex64> = match from {
        InvertFrom::Measured => {
            assemble_complex_ft(table.column("re_meas")?, table.column("im_meas")?, &exp.plates[0])?
        }
        InvertFrom::Oracle => {
            assemble_complex_ft(table.column("re_oracle")?, table.column("im_oracle")?, &exp.plates[0])?
        }
        InvertFrom::Analytic => table.complex("re_analytic", "im_analytic")?,
    };
    let target = Grid::centered(extent, count)?;
    let rec = invert_to_object(&z, &exp.detector_grid, &exp.geometry, &target)?;
    for w in &rec.warnings {
        eprintln!("warning: {w}");
    }
    let out = out.unwrap_or_else(|| run.join("reconstruction.csv"));
    write_reconstruction(&rec, &out)?;
    println!("reconstruction -> {}", out.display());
    Ok(())
}

fn sweep(counts: &str, cfg: &RunConfig, out: Option<PathBuf>) -> Result<()> {
    let ns = counts
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::usage(format!("bad realization list '{counts}'")))?;
    let res = sweep_realizations(cfg.experiment(), &ns, cfg.window())?;
    println!("{:>10}  {:>14}", "N", "relative_error");
    for p in &res.points {
        println!("{:>10}  {:>14.6e}", p.realizations, p.relative_error);
    }
    println!("slope {:.4}", res.slope);
    if let Some(path) = out {
        let mut text = String::from("realizations,relative_error\n");
        for p in &res.points {
            text.push_str(&format!(
                "{},{}\n",
                p.realizations,
                crate::output::fmt_f64(p.relative_error)
            ));
        }
        write_file(&path, &text)?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Acquire { cfg, out } => acquire(&load_config(&cfg)?, &out),
        Command::Oracle { cfg, out } => oracle(&load_config(&cfg)?, &out),
        Command::Compare { run, against } => compare_run(&run, against),
        Command::Invert {
            run,
            from,
            out,
            target_extent_um,
            target_count,
        } => invert(&run, from, out, target_extent_um, target_count),
        Command::SweepN { counts, cfg, out } => sweep(&counts, &load_config(&cfg)?, out),
    }
}

fn worker_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::usage(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match worker_pool() {
        Ok(Some(pool)) => pool.install(|| dispatch(cli)),
        Ok(None) => dispatch(cli),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
