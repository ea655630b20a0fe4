//! Experiment configuration.
//!
//! A config file is one flat JSON object whose values are strings, numbers or
//! booleans. Every key is also a command-line flag, and flags win over file
//! values. Recognised keys:
//!
//! | key                  | value                         | default          |
//! |----------------------|-------------------------------|------------------|
//! | `shape`              | `MxN`, e.g. `2x3`             | required         |
//! | `measure`            | `hs` or `induced:K`           | `hs`             |
//! | `samples`            | positive integer              | required         |
//! | `seed`               | 64-bit integer                | `0`              |
//! | `bins`               | bins per axis                 | `100`            |
//! | `workers`            | worker threads                | `1`              |
//! | `checkpoint_every`   | samples between checkpoints   | `1000000`        |
//! | `out`                | output directory              | none             |
//! | `symmetrize`         | boolean                       | `false`          |
//! | `ppt_method`         | `cholesky` or `eigenvalues`   | `cholesky`       |
//! | `ci_level`           | confidence level in (0, 1)    | `0.999`          |
//! | `ci_method`          | `wilson` or `wald`            | `wilson`         |
//! | `flatness_min_total` | minimum bin count for the test| `1000`           |
//! | `fit_min_total`      | minimum bin count for residuals | `100`          |
//! | `fit`                | `[AXIS:]a,b,lo,hi`, `;`-separated | shape default |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use seplab::invariants::PptMethod;
use seplab::matrix::Bipartition;
use seplab::states::{MeasureKind, MeasureSpec};
use seplab::stats::{AxisLabel, CiMethod, DEFAULT_BINS, DEFAULT_FLATNESS_MIN_TOTAL};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_CHECKPOINT_EVERY: u64 = 1_000_000;
pub const DEFAULT_CI_LEVEL: f64 = 0.999;
pub const DEFAULT_FIT_MIN_TOTAL: u64 = 100;

/// Flat key/value view of a config, as read from a file or the command line.
pub type ConfigPairs = BTreeMap<String, String>;

const KEYS: [&str; 15] = [
    "shape",
    "measure",
    "samples",
    "seed",
    "bins",
    "workers",
    "checkpoint_every",
    "out",
    "symmetrize",
    "ppt_method",
    "ci_level",
    "ci_method",
    "flatness_min_total",
    "fit_min_total",
    "fit",
];

/// Radial model `x^a (1 - x^2)^b` fitted on `axis` over `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSpec {
    pub axis: AxisLabel,
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
}

impl FitSpec {
    /// Parses `a,b,lo,hi`, optionally prefixed by `AXIS:`; `default_axis`
    /// applies when there is no prefix.
    pub fn parse_with_axis(s: &str, default_axis: AxisLabel) -> CliResult<Self> {
        let s = s.trim();
        let (axis, rest) = match s.split_once(':') {
            Some((axis, rest)) => (axis.trim().parse::<AxisLabel>()?, rest),
            None => (default_axis, s),
        };
        let nums = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Validation(format!("fit `{s}`: {e}")))?;
        let [a, b, lo, hi] = nums[..] else {
            return Err(CliError::Validation(format!("fit `{s}` needs four numbers a,b,lo,hi")));
        };
        if !(lo < hi) || !nums.iter().all(|v| v.is_finite()) {
            return Err(CliError::Validation(format!("fit `{s}`: need finite values and lo < hi")));
        }
        Ok(Self { axis, a, b, lo, hi })
    }
}

impl FromStr for FitSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Self::parse_with_axis(s, AxisLabel::RadiusA)
    }
}

impl fmt::Display for FitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{},{},{}", self.axis, self.a, self.b, self.lo, self.hi)
    }
}

/// Fits run when the config names none: the qubit radius law for any `2 x n`
/// shape, and the low-radius qutrit law for `2 x 3`.
pub fn default_fits(shape: Bipartition) -> Vec<FitSpec> {
    let mut fits = Vec::new();
    if shape.dim_a == 2 {
        let n = shape.dim_b as f64;
        fits.push(FitSpec {
            axis: AxisLabel::RadiusA,
            a: 2.0,
            b: 2.0 * (n * n - 1.0),
            lo: 0.0,
            hi: 1.0,
        });
        if shape.dim_b == 3 {
            fits.push(FitSpec {
                axis: AxisLabel::RadiusB,
                a: 7.0,
                b: 32.0,
                lo: 0.0,
                hi: 0.5,
            });
        }
    }
    fits
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub shape: Bipartition,
    pub measure: MeasureKind,
    pub samples: u64,
    pub seed: u64,
    pub bins: usize,
    pub workers: usize,
    pub checkpoint_every: u64,
    pub out_dir: Option<PathBuf>,
    pub symmetrize: bool,
    pub ppt_method: PptMethod,
    pub ci_level: f64,
    pub ci_method: CiMethod,
    pub flatness_min_total: u64,
    pub fit_min_total: u64,
    pub fits: Vec<FitSpec>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| CliError::Validation(format!("`{key}` = `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Validation(format!("`{key}` = `{value}` is not a boolean"))),
    }
}

fn parse_method(value: &str) -> CliResult<PptMethod> {
    match value.trim().to_ascii_lowercase().as_str() {
        "cholesky" => Ok(PptMethod::Cholesky),
        "eigenvalues" | "eig" => Ok(PptMethod::Eigenvalues),
        _ => Err(CliError::Validation(format!(
            "ppt_method `{value}` is neither `cholesky` nor `eigenvalues`"
        ))),
    }
}

fn method_name(m: PptMethod) -> &'static str {
    match m {
        PptMethod::Cholesky => "cholesky",
        PptMethod::Eigenvalues => "eigenvalues",
    }
}

/// Reads a flat JSON object into string pairs. Nested values are rejected.
pub fn read_config_file(path: &Path) -> CliResult<ConfigPairs> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> CliResult<ConfigPairs> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("config is not valid JSON: {e}")))?;
    let serde_json::Value::Object(map) = value else {
        return Err(CliError::Validation("config must be a JSON object".into()));
    };
    let mut pairs = ConfigPairs::new();
    for (k, v) in map {
        let s = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Null => continue,
            _ => {
                return Err(CliError::Validation(format!(
                    "config key `{k}` must be a string, number or boolean"
                )))
            }
        };
        pairs.insert(k, s);
    }
    Ok(pairs)
}

impl ExperimentConfig {
    /// Minimal valid config; everything else at its default.
    pub fn new(shape: Bipartition, measure: MeasureKind, samples: u64, seed: u64) -> CliResult<Self> {
        let cfg = Self {
            shape,
            measure,
            samples,
            seed,
            bins: DEFAULT_BINS,
            workers: 1,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
            out_dir: None,
            symmetrize: false,
            ppt_method: PptMethod::Cholesky,
            ci_level: DEFAULT_CI_LEVEL,
            ci_method: CiMethod::Wilson,
            flatness_min_total: DEFAULT_FLATNESS_MIN_TOTAL,
            fit_min_total: DEFAULT_FIT_MIN_TOTAL,
            fits: default_fits(shape),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_pairs(pairs: &ConfigPairs) -> CliResult<Self> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Validation(format!("unknown config key `{k}`")));
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let shape: Bipartition = parse("shape", get("shape").ok_or_else(|| missing("shape"))?)?;
        let measure = get("measure").map_or(Ok(MeasureKind::HilbertSchmidt), |v| parse("measure", v))?;
        let samples = parse("samples", get("samples").ok_or_else(|| missing("samples"))?)?;
        let seed = get("seed").map_or(Ok(0), |v| parse("seed", v))?;
        let mut cfg = Self {
            shape,
            measure,
            samples,
            seed,
            bins: get("bins").map_or(Ok(DEFAULT_BINS), |v| parse("bins", v))?,
            workers: get("workers").map_or(Ok(1), |v| parse("workers", v))?,
            checkpoint_every: get("checkpoint_every")
                .map_or(Ok(DEFAULT_CHECKPOINT_EVERY), |v| parse("checkpoint_every", v))?,
            out_dir: get("out").map(PathBuf::from),
            symmetrize: get("symmetrize").map_or(Ok(false), |v| parse_bool("symmetrize", v))?,
            ppt_method: get("ppt_method").map_or(Ok(PptMethod::Cholesky), parse_method)?,
            ci_level: get("ci_level").map_or(Ok(DEFAULT_CI_LEVEL), |v| parse("ci_level", v))?,
            ci_method: get("ci_method").map_or(Ok(CiMethod::Wilson), |v| parse("ci_method", v))?,
            flatness_min_total: get("flatness_min_total")
                .map_or(Ok(DEFAULT_FLATNESS_MIN_TOTAL), |v| parse("flatness_min_total", v))?,
            fit_min_total: get("fit_min_total")
                .map_or(Ok(DEFAULT_FIT_MIN_TOTAL), |v| parse("fit_min_total", v))?,
            fits: default_fits(shape),
        };
        if let Some(fits) = get("fit") {
            cfg.fits = fits
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(FitSpec::from_str)
                .collect::<CliResult<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`ExperimentConfig::from_pairs`].
    pub fn to_pairs(&self) -> ConfigPairs {
        let mut p = ConfigPairs::new();
        let mut put = |k: &str, v: String| {
            p.insert(k.to_string(), v);
        };
        put("shape", self.shape.to_string());
        put("measure", self.measure.to_string());
        put("samples", self.samples.to_string());
        put("seed", self.seed.to_string());
        put("bins", self.bins.to_string());
        put("workers", self.workers.to_string());
        put("checkpoint_every", self.checkpoint_every.to_string());
        if let Some(out) = &self.out_dir {
            put("out", out.display().to_string());
        }
        put("symmetrize", self.symmetrize.to_string());
        put("ppt_method", method_name(self.ppt_method).to_string());
        put("ci_level", self.ci_level.to_string());
        put("ci_method", format!("{:?}", self.ci_method).to_ascii_lowercase());
        put("flatness_min_total", self.flatness_min_total.to_string());
        put("fit_min_total", self.fit_min_total.to_string());
        put(
            "fit",
            self.fits.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
        );
        p
    }

    pub fn validate(&self) -> CliResult<()> {
        let invalid = |m: String| Err(CliError::Validation(m));
        if self.samples == 0 {
            return invalid("samples must be at least 1".into());
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1".into());
        }
        if self.bins == 0 {
            return invalid("bins must be at least 1".into());
        }
        if self.checkpoint_every == 0 {
            return invalid("checkpoint_every must be at least 1".into());
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return invalid(format!("ci_level {} not in (0, 1)", self.ci_level));
        }
        if self.symmetrize && self.shape.dim_a != self.shape.dim_b {
            return invalid(format!("symmetrize needs equal subsystem dimensions, got {}", self.shape));
        }
        let spec = self.measure_spec()?;
        self.shape.check(spec.n)?;
        Ok(())
    }

    pub fn measure_spec(&self) -> CliResult<MeasureSpec> {
        Ok(self.measure.spec(self.shape.dim())?)
    }

    /// Digest of the fields that determine the sampled counts. Workers,
    /// checkpoint spacing, output location and analysis settings are left out
    /// so they can change between a run and its resumption.
    pub fn hash(&self) -> String {
        let canonical = format!(
            "shape={};measure={};samples={};seed={};bins={};ppt_method={}",
            self.shape,
            self.measure,
            self.samples,
            self.seed,
            self.bins,
            method_name(self.ppt_method)
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

fn missing(key: &str) -> CliError {
    CliError::Validation(format!("missing required key `{key}`"))
}
