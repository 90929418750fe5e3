use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::bench::{EstimatorSpec, ExperimentSpec, ModelSpec};
use crate::error::{Error, Result};
use crate::estimators::FitConfig;

use super::FitArgs;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceChoice {
    #[default]
    Efficient,
    Sandwich,
}

/// A single-fit job: the `[fit]` section of a manifest, or `sdrme fit` flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitJob {
    pub data: PathBuf,
    pub model: ModelSpec,
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub variance: VarianceChoice,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Top-level manifest: exactly one of `[experiment]` or `[fit]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitJob>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Manifest {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("manifest", e.message()))?;
        Manifest::from_table(table, overrides)
    }

    pub fn from_preset(name: &str, overrides: &[String]) -> Result<Self> {
        let spec = ExperimentSpec::preset(name).ok_or_else(|| {
            Error::config(
                "preset",
                format!(
                    "unknown preset `{name}`; known: {}",
                    ExperimentSpec::PRESETS.join(", ")
                ),
            )
        })?;
        let mut table = Table::new();
        table.insert(
            "experiment".into(),
            Value::try_from(spec).map_err(|e| Error::config("preset", e.to_string()))?,
        );
        Manifest::from_table(table, overrides)
    }

    fn from_table(mut table: Table, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let manifest: Manifest =
            serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
                let path = e.path().to_string();
                Error::config(
                    if path == "." {
                        "manifest".to_string()
                    } else {
                        path
                    },
                    e.into_inner().message(),
                )
            })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.experiment, &self.fit) {
            (Some(e), None) => e.validate().map_err(|err| prefix("experiment", err)),
            (None, Some(f)) => {
                f.estimator
                    .validate()
                    .map_err(|err| prefix("fit.estimator", err))?;
                f.fit.validate().map_err(|err| prefix("fit.fit", err))
            }
            _ => Err(Error::config(
                "manifest",
                "exactly one of [experiment] or [fit] is required",
            )),
        }
    }
}

fn prefix(section: &str, err: Error) -> Error {
    match err {
        Error::InvalidConfig { field, message } => {
            Error::config(format!("{section}.{field}"), message)
        }
        other => other,
    }
}

pub fn load_manifest(path: &Path, overrides: &[String]) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    Manifest::from_toml_str(&text, overrides)
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies one `key=value` override. Keys are dotted paths; a path that
/// does not start with `experiment`, `fit` or `out_dir` is taken relative
/// to whichever of the first two the manifest has. `n` is shorthand for a
/// single sample size.
pub fn apply_override(table: &mut Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config("set", format!("expected key=value, got `{item}`")))?;
    let key = key.trim();
    let mut value = parse_value(raw.trim());
    let section = if table.contains_key("fit") {
        "fit"
    } else {
        "experiment"
    };
    let mut path: Vec<&str> = key.split('.').collect();
    if !matches!(path[0], "experiment" | "fit" | "out_dir") {
        path.insert(0, section);
    }
    if path == ["experiment", "n"] {
        path = vec!["experiment", "sample_sizes"];
        value = Value::Array(vec![value]);
    }
    set_path(table, &path, value)
        .map_err(|_| Error::config(key, "cannot set a field inside a non-table value"))
}

fn set_path(table: &mut Table, path: &[&str], value: Value) -> std::result::Result<(), ()> {
    let (last, parents) = path.split_last().ok_or(())?;
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or(())?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl FitJob {
    /// Merges `sdrme fit` flags over an optional manifest; flags win.
    pub fn from_args(args: &FitArgs) -> Result<Self> {
        let mut table: Table = match &args.manifest {
            Some(p) => std::fs::read_to_string(p)?
                .parse()
                .map_err(|e: toml::de::Error| Error::config("manifest", e.message()))?,
            None => Table::new(),
        };
        if !table.contains_key("fit") {
            table.insert("fit".into(), Value::Table(Table::new()));
        }
        let mut set = |path: &[&str], v: Value| {
            let mut full = vec!["fit"];
            full.extend_from_slice(path);
            set_path(&mut table, &full, v).map_err(|_| Error::config(path.join("."), "not a table"))
        };
        if let Some(d) = &args.data {
            set(&["data"], Value::String(d.display().to_string()))?;
        }
        if let Some(m) = &args.model {
            let mut t = Table::new();
            t.insert(
                "kind".into(),
                Value::String(m.to_ascii_lowercase().replace('-', "_")),
            );
            set(&["model"], Value::Table(t))?;
        }
        if let Some(e) = &args.estimator {
            set(
                &["estimator", "kind"],
                Value::String(e.to_ascii_lowercase()),
            )?;
        }
        let strings = [("generator", &args.generator), ("density", &args.density)];
        for (k, v) in strings {
            if let Some(v) = v {
                set(&["estimator", k], Value::String(v.to_ascii_lowercase()))?;
            }
        }
        let floats = [
            ("alpha", args.alpha),
            ("beta", args.beta),
            ("gamma", args.gamma),
            ("kappa", args.kappa),
        ];
        for (k, v) in floats {
            if let Some(v) = v {
                set(&["estimator", k], Value::Float(v))?;
            }
        }
        if let Some(o) = args.kernel_order {
            set(&["estimator", "kernel_order"], Value::Integer(o.into()))?;
        }
        if let Some(v) = &args.variance {
            set(&["variance"], Value::String(v.to_ascii_lowercase()))?;
        }
        if let Some(s) = args.seed {
            set(&["fit", "seed"], Value::Integer(s as i64))?;
        }
        let manifest = Manifest::from_table(table, &args.overrides)?;
        manifest
            .fit
            .ok_or_else(|| Error::config("fit", "missing [fit] section"))
    }
}
