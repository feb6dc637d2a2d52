//! Run configuration: TOML sections `[profiles]`, `[case]`, `[sweep]`,
//! `[output]`, every key defaulted. Validation errors are collected, not
//! reported first-failure.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stretchdiss::exact::{CaseConfig, CaseOverrides};
use stretchdiss::experiments::Profiles;
use stretchdiss::profiles::{
    BumpProfile, MollifiedTriangle, DEFAULT_BREAKPOINTS, DEFAULT_DELTA, DEFAULT_I_MAX,
};
use toml::{Table, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilesSection {
    pub delta: f64,
    pub i_max: usize,
    pub breakpoints: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSection {
    pub n: u32,
    pub alpha: f64,
    pub n_y: Option<usize>,
    pub dt: Option<f64>,
    pub coupling: f64,
    pub a0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub n: Vec<u32>,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub profiles: ProfilesSection,
    pub case: CaseSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            profiles: ProfilesSection {
                delta: DEFAULT_DELTA,
                i_max: DEFAULT_I_MAX,
                breakpoints: DEFAULT_BREAKPOINTS,
            },
            case: CaseSection {
                n: 4,
                alpha: 0.5,
                n_y: None,
                dt: None,
                coupling: 1.0,
                a0: 0.0,
            },
            sweep: SweepSection {
                n: vec![3, 4, 5, 6, 7, 8],
                workers: std::thread::available_parallelism()
                    .map_or(1, |n| n.get())
                    .min(8),
            },
            output: OutputSection { dir: "out".into() },
        }
    }
}

/// Every problem found while resolving a configuration.
#[derive(Debug, Default)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "configuration error: {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Values given on the command line; they win over the file and `--override`.
#[derive(Clone, Debug, Default)]
pub struct FlagValues {
    pub alpha: Option<f64>,
    pub n: Option<u32>,
    pub n_list: Option<Vec<u32>>,
    pub out: Option<String>,
    pub workers: Option<usize>,
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_level(v: &Value) -> Option<u32> {
    match v {
        Value::Integer(i) => u32::try_from(*i).ok(),
        _ => None,
    }
}

fn set_key(cfg: &mut Config, section: &str, key: &str, v: &Value, errs: &mut Vec<String>) {
    let path = if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    };
    let mut bad = |what: &str| errs.push(format!("{path}: {what}"));
    match (section, key) {
        ("profiles", "delta") => match as_float(v) {
            Some(x) => cfg.profiles.delta = x,
            None => bad("expected a number"),
        },
        ("profiles", "i_max") => match v.as_integer().and_then(|i| usize::try_from(i).ok()) {
            Some(x) => cfg.profiles.i_max = x,
            None => bad("expected a nonnegative integer"),
        },
        ("profiles", "breakpoints") => {
            let vals: Option<Vec<f64>> = v
                .as_array()
                .map(|a| a.iter().filter_map(as_float).collect());
            match vals {
                Some(b) if b.len() == 4 && v.as_array().is_some_and(|a| a.len() == 4) => {
                    cfg.profiles.breakpoints = [b[0], b[1], b[2], b[3]]
                }
                _ => bad("expected four numbers"),
            }
        }
        ("case", "n") | ("", "n") if !matches!(v, Value::Array(_)) => match as_level(v) {
            Some(x) => cfg.case.n = x,
            None => bad("n must be an integer"),
        },
        ("sweep", "n") | ("", "n") => match v.as_array() {
            Some(a) => {
                let levels: Vec<Option<u32>> = a.iter().map(as_level).collect();
                if levels.iter().all(Option::is_some) {
                    cfg.sweep.n = levels.into_iter().flatten().collect();
                } else {
                    bad("n must be an integer");
                }
            }
            None => bad("expected a list of integers"),
        },
        ("case", "alpha") | ("", "alpha") => match as_float(v) {
            Some(x) => cfg.case.alpha = x,
            None => bad("expected a number"),
        },
        ("case", "n_y") => match v.as_integer().and_then(|i| usize::try_from(i).ok()) {
            Some(x) => cfg.case.n_y = Some(x),
            None => bad("expected a positive integer"),
        },
        ("case", "dt") => match as_float(v) {
            Some(x) => cfg.case.dt = Some(x),
            None => bad("expected a number"),
        },
        ("case", "coupling") => match as_float(v) {
            Some(x) => cfg.case.coupling = x,
            None => bad("expected a number"),
        },
        ("case", "a0") => match as_float(v) {
            Some(x) => cfg.case.a0 = x,
            None => bad("expected a number"),
        },
        ("sweep", "workers") | ("", "workers") => {
            match v.as_integer().and_then(|i| usize::try_from(i).ok()) {
                Some(x) => cfg.sweep.workers = x,
                None => bad("expected a positive integer"),
            }
        }
        ("output", "dir") | ("", "out") => match v.as_str() {
            Some(x) => cfg.output.dir = x.to_string(),
            None => bad("expected a string"),
        },
        _ => bad("unknown key"),
    }
}

fn apply_table(cfg: &mut Config, table: &Table, errs: &mut Vec<String>) {
    for (k, v) in table {
        match (k.as_str(), v) {
            ("profiles" | "case" | "sweep" | "output", Value::Table(t)) => {
                for (key, val) in t {
                    set_key(cfg, k, key, val, errs);
                }
            }
            (s @ ("profiles" | "case" | "sweep" | "output"), _) => {
                errs.push(format!("{s}: expected a section"))
            }
            _ => set_key(cfg, "", k, v, errs),
        }
    }
}

/// Parses `KEY=VAL`; `KEY` is `section.key` or a top-level shorthand, `VAL`
/// a TOML value (bare words are taken as strings).
fn apply_override(cfg: &mut Config, arg: &str, errs: &mut Vec<String>) {
    let Some((key, val)) = arg.split_once('=') else {
        errs.push(format!("override `{arg}`: expected KEY=VAL"));
        return;
    };
    let key = key.trim();
    let val = val.trim();
    let value = format!("v = {val}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(val.to_string()));
    match key.split_once('.') {
        Some((section, k)) => set_key(cfg, section, k, &value, errs),
        None => set_key(cfg, "", key, &value, errs),
    }
}

/// Builds the resolved configuration; returns it with policy warnings.
pub fn parse_config(
    text: Option<&str>,
    overrides: &[String],
    flags: &FlagValues,
) -> Result<(Config, Vec<String>), ConfigErrors> {
    let mut cfg = Config::default();
    let mut errs = Vec::new();
    if let Some(text) = text {
        match text.parse::<Table>() {
            Ok(t) => apply_table(&mut cfg, &t, &mut errs),
            Err(e) => errs.push(format!("not valid TOML: {}", e.message())),
        }
    }
    for o in overrides {
        apply_override(&mut cfg, o, &mut errs);
    }
    if let Some(a) = flags.alpha {
        cfg.case.alpha = a;
    }
    if let Some(n) = flags.n {
        cfg.case.n = n;
    }
    if let Some(l) = &flags.n_list {
        cfg.sweep.n = l.clone();
    }
    if let Some(o) = &flags.out {
        cfg.output.dir = o.clone();
    }
    if let Some(w) = flags.workers {
        cfg.sweep.workers = w;
    }
    let warnings = validate(&cfg, &mut errs);
    if errs.is_empty() {
        Ok((cfg, warnings))
    } else {
        Err(ConfigErrors(errs))
    }
}

fn validate(cfg: &Config, errs: &mut Vec<String>) -> Vec<String> {
    let alpha = cfg.case.alpha;
    if !(alpha > 0.0 && alpha < 0.75) {
        errs.push("alpha must lie in (0, 3/4)".into());
    }
    if let Err(e) = MollifiedTriangle::<f64>::build(cfg.profiles.delta, cfg.profiles.i_max) {
        errs.push(format!("profiles: {e}"));
    }
    if let Err(e) = BumpProfile::<f64>::new(cfg.profiles.breakpoints) {
        errs.push(format!("profiles.breakpoints: {e}"));
    }
    if cfg.case.n < 2 {
        errs.push(format!("case.n must be at least 2, got {}", cfg.case.n));
    }
    if cfg.sweep.n.len() < 3 {
        errs.push("sweep.n needs at least 3 levels".into());
    }
    if cfg.sweep.n.windows(2).any(|w| w[0] >= w[1]) {
        errs.push("sweep.n must be strictly increasing".into());
    }
    if cfg.sweep.n.first().is_some_and(|&n| n < 2) {
        errs.push("sweep.n levels must be at least 2".into());
    }
    if cfg.sweep.workers == 0 {
        errs.push("sweep.workers must be at least 1".into());
    }
    if cfg.output.dir.is_empty() {
        errs.push("output.dir must not be empty".into());
    }
    let mut warnings = Vec::new();
    if errs.is_empty() {
        let o = cfg.overrides();
        let mut levels = cfg.sweep.n.clone();
        levels.push(cfg.case.n);
        levels.sort_unstable();
        levels.dedup();
        for n in levels {
            match CaseConfig::<f64>::with_overrides(n, alpha, &o) {
                Ok(c) => warnings.extend(c.warnings.into_iter().map(|w| format!("n = {n}: {w}"))),
                Err(e) => errs.push(format!("n = {n}: {e}")),
            }
        }
    }
    warnings
}

impl Config {
    pub fn overrides(&self) -> CaseOverrides {
        CaseOverrides {
            n_y: self.case.n_y,
            dt: self.case.dt,
            coupling: (self.case.coupling != 1.0).then_some(self.case.coupling),
            a0: (self.case.a0 != 0.0).then_some(self.case.a0),
        }
    }

    pub fn profiles(&self) -> stretchdiss::Result<Profiles> {
        Ok(Profiles {
            tri: MollifiedTriangle::build(self.profiles.delta, self.profiles.i_max)?,
            phi: BumpProfile::new(self.profiles.breakpoints)?,
        })
    }

    /// Canonical serialized form of the keys that determine results; the
    /// worker count and output directory are left out so that reruns
    /// elsewhere or with another pool size carry the same hash.
    pub fn canonical(&self) -> String {
        let doc = serde_json::json!({
            "profiles": self.profiles,
            "case": self.case,
            "sweep": { "n": self.sweep.n },
        });
        serde_json::to_string(&doc).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

/// Reproducibility stamp written next to every output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: Config,
    pub config_hash: String,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}
