//! Run configuration documents.
//!
//! A document is a flat list of `dotted.key = value` lines (valid TOML; nested
//! tables are flattened to the same keys). Every key is optional; omitted keys
//! take the defaults listed in [`KEYS`]. The canonical form writes every key,
//! sorted, with normalized numbers, and is what the digest is computed over.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::elements::PhasePlateSetting;
use crate::error::{ConfigCode, Error, Result};
use crate::experiment::ExperimentConfig;
use crate::field::{Grid, SystemGeometry};
use crate::object::{ConceivedObjectParams, ObjectModel};
use crate::source::SourceConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Value {
    fn canonical(&self) -> String {
        match self {
            Value::Float(v) => format!("{v:?}"),
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Str(s) => format!("{s:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Bool,
    Str,
}

/// Every accepted key with its type and default.
pub const KEYS: &[(&str, &str)] = &[
    ("analysis.window_um", "400.0"),
    ("geometry.d1_um", "60000.0"),
    ("geometry.d2_um", "75000.0"),
    ("geometry.d_um", "135000.0"),
    ("geometry.wavelength_um", "0.532"),
    ("grids.detector.count", "801"),
    ("grids.detector.extent_um", "800.0"),
    ("grids.object.count", "1024"),
    ("grids.object.extent_um", "1200.0"),
    ("grids.source.count", "1536"),
    ("grids.source.extent_um", "3000.0"),
    ("object.band_offset_um", "150.0"),
    ("object.band_width_um", "105.0"),
    ("object.cos_freq_per_um", "0.05"),
    ("object.kind", "\"conceived\""),
    ("object.rect_center_um", "100.0"),
    ("object.rect_width_um", "50.0"),
    ("object.support_um", "1000.0"),
    ("plates.p_prime_on", "true"),
    ("plates.p_prime_phase_rad", "0.7853981633974483"),
    ("run.chunk_size", "256"),
    ("run.shared_noise", "false"),
    ("seed", "42"),
    ("source.mean_intensity", "1.0"),
    ("source.n_realizations", "20000"),
];

fn kind_of(key: &str) -> Option<Kind> {
    let default = KEYS.iter().find(|(k, _)| *k == key)?.1;
    Some(if default.starts_with('"') {
        Kind::Str
    } else if default == "true" || default == "false" {
        Kind::Bool
    } else if default.contains('.') {
        Kind::Float
    } else {
        Kind::Int
    })
}

fn schema(msg: impl Into<String>) -> Error {
    Error::config(ConfigCode::Schema, msg)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, toml::Value>) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out)?,
            other => {
                if out.insert(key.clone(), other.clone()).is_some() {
                    return Err(schema(format!("duplicate key '{key}'")));
                }
            }
        }
    }
    Ok(())
}

fn convert(key: &str, raw: &toml::Value) -> Result<Value> {
    let kind = kind_of(key).ok_or_else(|| schema(format!("unknown key '{key}'")))?;
    let bad = || schema(format!("key '{key}' has the wrong type: {raw}"));
    Ok(match (kind, raw) {
        (Kind::Float, toml::Value::Float(v)) => Value::Float(*v),
        (Kind::Float, toml::Value::Integer(v)) => Value::Float(*v as f64),
        (Kind::Int, toml::Value::Integer(v)) => Value::Int(*v),
        (Kind::Bool, toml::Value::Boolean(v)) => Value::Bool(*v),
        (Kind::Str, toml::Value::String(s)) => Value::Str(s.clone()),
        _ => return Err(bad()),
    })
}

/// A fully populated, validated document.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, Value>,
    experiment: ExperimentConfig,
    window_half_width: f64,
}

impl RunConfig {
    pub fn experiment(&self) -> &ExperimentConfig {
        &self.experiment
    }

    pub fn into_experiment(self) -> ExperimentConfig {
        self.experiment
    }

    /// Central comparison window (−w, w) on the detector axis.
    pub fn window(&self) -> (f64, f64) {
        (-self.window_half_width, self.window_half_width)
    }

    pub fn value(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    /// Every key, sorted, one `key = value` line each.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(s, "{k} = {}", v.canonical());
        }
        s
    }

    /// Hex SHA-256 of the canonical form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Same document with some keys replaced, revalidated.
    pub fn with_overrides(&self, overrides: &[(&str, Value)]) -> Result<RunConfig> {
        let mut values = self.values.clone();
        for (k, v) in overrides {
            let kind = kind_of(k).ok_or_else(|| schema(format!("unknown key '{k}'")))?;
            let v = match (kind, v) {
                (Kind::Float, Value::Int(i)) => Value::Float(*i as f64),
                (Kind::Float, Value::Float(_))
                | (Kind::Int, Value::Int(_))
                | (Kind::Bool, Value::Bool(_))
                | (Kind::Str, Value::Str(_)) => v.clone(),
                _ => return Err(schema(format!("key '{k}' has the wrong type: {v:?}"))),
            };
            values.insert(k.to_string(), v);
        }
        build(values)
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| schema(format!("malformed document: {}", e.message())))?;
    let mut raw = BTreeMap::new();
    flatten("", &table, &mut raw)?;

    let mut values = BTreeMap::new();
    for (k, default) in KEYS {
        let parsed: toml::Table = format!("v = {default}").parse().expect("valid default");
        values.insert(k.to_string(), convert(k, &parsed["v"])?);
    }
    for (k, v) in &raw {
        values.insert(k.clone(), convert(k, v)?);
    }
    build(values)
}

fn build(values: BTreeMap<String, Value>) -> Result<RunConfig> {
    let f = |k: &str| match values.get(k) {
        Some(Value::Float(v)) => *v,
        other => unreachable!("float key {k} holds {other:?}"),
    };
    let i = |k: &str| match values.get(k) {
        Some(Value::Int(v)) => *v,
        other => unreachable!("int key {k} holds {other:?}"),
    };
    let b = |k: &str| match values.get(k) {
        Some(Value::Bool(v)) => *v,
        other => unreachable!("bool key {k} holds {other:?}"),
    };
    let s = |k: &str| match values.get(k) {
        Some(Value::Str(v)) => v.clone(),
        other => unreachable!("string key {k} holds {other:?}"),
    };
    let count = |k: &str| -> Result<usize> {
        let v = i(k);
        usize::try_from(v).map_err(|_| Error::config(ConfigCode::Range, format!("{k} must be non-negative, got {v}")))
    };

    let n = i("source.n_realizations");
    if n <= 0 {
        return Err(Error::config(
            ConfigCode::Realizations,
            format!("source.n_realizations must be positive, got {n}"),
        ));
    }
    let seed = i("seed");
    if seed < 0 {
        return Err(Error::config(
            ConfigCode::Range,
            format!("seed must be non-negative, got {seed}"),
        ));
    }

    let geometry = SystemGeometry::new(
        f("geometry.wavelength_um"),
        f("geometry.d1_um"),
        f("geometry.d2_um"),
        f("geometry.d_um"),
    )?;
    let src = Grid::centered(f("grids.source.extent_um"), count("grids.source.count")?)?;
    let obj = Grid::centered(f("grids.object.extent_um"), count("grids.object.count")?)?;
    let det = Grid::centered(f("grids.detector.extent_um"), count("grids.detector.count")?)?;

    let model = match s("object.kind").as_str() {
        "conceived" => ObjectModel::Conceived(ConceivedObjectParams {
            cos_freq: f("object.cos_freq_per_um"),
            rect_offset: f("object.band_offset_um"),
            rect_width: f("object.band_width_um"),
            support_width: f("object.support_um"),
        }),
        "rect" => ObjectModel::Rect {
            center: f("object.rect_center_um"),
            width: f("object.rect_width_um"),
        },
        "opaque" => ObjectModel::Opaque,
        other => {
            return Err(schema(format!(
                "object.kind must be conceived, rect or opaque, got '{other}'"
            )))
        }
    };

    let p_on = b("plates.p_prime_on");
    let base = PhasePlateSetting::new(false, p_on, f("plates.p_prime_phase_rad"))?;
    let window_half_width = f("analysis.window_um");
    if !(window_half_width.is_finite() && window_half_width > 0.0) {
        return Err(Error::config(ConfigCode::Range, "analysis.window_um must be positive"));
    }

    let experiment = ExperimentConfig {
        geometry,
        source: SourceConfig::new(src, f("source.mean_intensity"), seed as u64)?,
        object_grid: obj,
        detector_grid: det,
        transmittance: model.transmittance(&obj)?,
        object: Some(model),
        plates: [base, base.with_j(true)],
        realizations: n as usize,
        shared_noise: b("run.shared_noise"),
        chunk_size: count("run.chunk_size")?,
    };
    experiment.validate()?;
    Ok(RunConfig {
        values,
        experiment,
        window_half_width,
    })
}

/// The built-in configuration (every key at its default).
pub fn default_config() -> RunConfig {
    parse_config("").expect("defaults are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DEFAULT_WINDOW_HALF_WIDTH;
    use crate::elements::COMPENSATION_PHASE;
    use crate::experiment::{DEFAULT_CHUNK_SIZE, DEFAULT_REALIZATIONS};

    #[test]
    fn keys_are_sorted_and_typed() {
        let keys: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert_eq!(kind_of("plates.p_prime_on"), Some(Kind::Bool));
        assert_eq!(kind_of("grids.detector.count"), Some(Kind::Int));
        assert_eq!(kind_of("geometry.d1_um"), Some(Kind::Float));
        assert_eq!(kind_of("object.kind"), Some(Kind::Str));
        assert_eq!(
            default_config().experiment().plates[0].p_prime_phase(),
            COMPENSATION_PHASE
        );
        assert_eq!(DEFAULT_REALIZATIONS, 20_000);
        assert_eq!(DEFAULT_CHUNK_SIZE, 256);
        assert_eq!(DEFAULT_WINDOW_HALF_WIDTH, 400.0);
    }

    #[test]
    fn empty_document_gives_standards() {
        let cfg = parse_config("").unwrap();
        let e = cfg.experiment();
        assert_eq!(e.geometry, SystemGeometry::standard());
        assert_eq!(e.realizations, 20_000);
        assert_eq!(e.source.master_seed(), 42);
        assert!(e.plates[0].p_prime_on);
        assert_eq!(e, &ExperimentConfig::standard(42));
        assert_eq!(cfg.window(), (-400.0, 400.0));
    }

    #[test]
    fn unequal_arms_rejected() {
        let err = parse_config("geometry.d_um = 100000").unwrap_err();
        assert_eq!(err.config_code(), Some(ConfigCode::ArmLength));
    }

    #[test]
    fn zero_realizations_rejected() {
        let err = parse_config("source.n_realizations = 0").unwrap_err();
        assert_eq!(err.config_code(), Some(ConfigCode::Realizations));
    }

    #[test]
    fn schema_errors() {
        for doc in [
            "geometry.d1 = 5",
            "geometry.d1_um = \"far\"",
            "plates.p_prime_on = 1",
            "this is not a document",
            "object.kind = \"sphere\"",
        ] {
            let err = parse_config(doc).unwrap_err();
            assert_eq!(err.config_code(), Some(ConfigCode::Schema), "{doc}");
        }
    }

    #[test]
    fn undersampled_grid_rejected() {
        let err = parse_config("grids.source.count = 40").unwrap_err();
        assert_eq!(err.config_code(), Some(ConfigCode::Sampling));
    }

    #[test]
    fn nested_tables_equal_dotted_keys() {
        let a = parse_config("geometry.d1_um = 50000\ngeometry.d_um = 125000\n").unwrap();
        let b = parse_config("[geometry]\nd1_um = 50000.0\nd_um = 125000\n").unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.experiment(), b.experiment());
    }

    #[test]
    fn canonical_round_trip() {
        let cfg = parse_config("seed = 7\nrun.shared_noise = true\nobject.kind = \"rect\"\n").unwrap();
        let again = parse_config(&cfg.canonical()).unwrap();
        assert_eq!(cfg.canonical(), again.canonical());
        assert_eq!(cfg.digest(), again.digest());
        assert_eq!(cfg.experiment(), again.experiment());
        assert_ne!(cfg.digest(), default_config().digest());
    }

    #[test]
    fn overrides() {
        let cfg = default_config()
            .with_overrides(&[("seed", Value::Int(9)), ("geometry.d1_um", Value::Int(60000))])
            .unwrap();
        assert_eq!(cfg.experiment().source.master_seed(), 9);
        assert!(default_config().with_overrides(&[("nope", Value::Int(1))]).is_err());
        let err = default_config()
            .with_overrides(&[("seed", Value::Bool(true))])
            .unwrap_err();
        assert_eq!(err.config_code(), Some(ConfigCode::Schema));
    }
}
