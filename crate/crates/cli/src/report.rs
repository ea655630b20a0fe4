//! Report assembly from merged counts, and export to a directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use seplab::pipeline::Tally;
use seplab::stats::{
    fit_scale, flatness_test_with, ratio_with_ci, AxisLabel, Flatness, FlatnessOptions,
    HistogramPair, JointHistogram, RatioEstimate, ScaleFit,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ConfigPairs, ExperimentConfig, FitSpec};
use crate::error::{CliError, CliResult};

pub const REPORT_FILE: &str = "report.json";
pub const JOINT_FILE: &str = "joint_r_R.csv";
pub const SYMMETRIZED_FILE: &str = "R_sym.csv";
pub const MANIFEST_FILE: &str = "MANIFEST";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisFlatness {
    pub axis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Flatness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitOutcome {
    pub axis: String,
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
    pub min_total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ScaleFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutOfRange {
    pub axis: String,
    pub underflow: u64,
    pub overflow: u64,
}

/// Everything in a report that is a function of the counts alone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportResults {
    pub complete: bool,
    pub n_total: u64,
    pub n_ppt: u64,
    pub overall: RatioEstimate,
    pub out_of_range: Vec<OutOfRange>,
    pub flatness: Vec<AxisFlatness>,
    pub fits: Vec<FitOutcome>,
    #[serde(skip)]
    pub histograms: Vec<HistogramPair>,
    #[serde(skip)]
    pub joint: JointHistogram,
    /// Radius histogram pooled over both parties, when symmetrizing.
    #[serde(skip)]
    pub symmetrized: Option<(JointHistogram, HistogramPair)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub wall_secs: f64,
    pub samples_per_sec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ConfigPairs,
    pub config_hash: String,
    pub results: ReportResults,
    pub timing: Timing,
}

pub fn flatness_for(h: &HistogramPair, name: &str, min_total: u64) -> AxisFlatness {
    let opts = FlatnessOptions {
        min_total,
        exclude_top_bin: true,
    };
    match flatness_test_with(h, opts) {
        Ok(f) => AxisFlatness {
            axis: name.to_string(),
            result: Some(f),
            note: None,
        },
        Err(e) => AxisFlatness {
            axis: name.to_string(),
            result: None,
            note: Some(e.to_string()),
        },
    }
}

pub fn fit_for(h: &HistogramPair, spec: &FitSpec, min_total: u64) -> FitOutcome {
    let fit = fit_scale(h, spec.a, spec.b, (spec.lo, spec.hi), min_total);
    FitOutcome {
        axis: spec.axis.name().to_string(),
        a: spec.a,
        b: spec.b,
        lo: spec.lo,
        hi: spec.hi,
        min_total,
        result: fit.as_ref().ok().copied(),
        note: fit.err().map(|e| e.to_string()),
    }
}

impl ExperimentReport {
    pub fn build(cfg: &ExperimentConfig, tally: &Tally, elapsed_secs: f64) -> CliResult<Self> {
        let overall = ratio_with_ci(tally.n_ppt, tally.n_total, cfg.ci_level, cfg.ci_method)?;
        let mut flatness: Vec<AxisFlatness> = tally
            .histograms
            .iter()
            .map(|h| flatness_for(h, h.axis.label.name(), cfg.flatness_min_total))
            .collect();
        let symmetrized = if cfg.symmetrize {
            let joint = tally.joint.symmetrized()?;
            let pooled = joint.marginal_y();
            flatness.push(flatness_for(&pooled, "R_sym", cfg.flatness_min_total));
            Some((joint, pooled))
        } else {
            None
        };
        let mut fits = Vec::new();
        for spec in &cfg.fits {
            match tally.histogram(spec.axis) {
                Some(h) => fits.push(fit_for(h, spec, cfg.fit_min_total)),
                None => {
                    return Err(CliError::Validation(format!(
                        "fit axis {} is not tracked for shape {}",
                        spec.axis, cfg.shape
                    )))
                }
            }
        }
        Ok(Self {
            config: cfg.to_pairs(),
            config_hash: cfg.hash(),
            results: ReportResults {
                complete: tally.n_total == cfg.samples,
                n_total: tally.n_total,
                n_ppt: tally.n_ppt,
                overall,
                out_of_range: tally
                    .histograms
                    .iter()
                    .map(|h| OutOfRange {
                        axis: h.axis.label.name().to_string(),
                        underflow: h.underflow,
                        overflow: h.overflow,
                    })
                    .collect(),
                flatness,
                fits,
                histograms: tally.histograms.clone(),
                joint: tally.joint.clone(),
                symmetrized,
            },
            timing: Timing {
                wall_secs: elapsed_secs,
                samples_per_sec: if elapsed_secs > 0.0 {
                    tally.n_total as f64 / elapsed_secs
                } else {
                    0.0
                },
            },
        })
    }

    pub fn histogram(&self, label: AxisLabel) -> Option<&HistogramPair> {
        self.results.histograms.iter().find(|h| h.axis.label == label)
    }

    pub fn flatness(&self, axis: &str) -> Option<&AxisFlatness> {
        self.results.flatness.iter().find(|f| f.axis == axis)
    }

    /// Short human summary for the terminal.
    pub fn summary(&self) -> String {
        let r = &self.results;
        let mut s = format!(
            "samples {} ppt {} p_hat {:.8} [{:.8}, {:.8}] ({:.3} {:?})\n",
            r.n_total, r.n_ppt, r.overall.p_hat, r.overall.ci_lo, r.overall.ci_hi, r.overall.level,
            r.overall.method
        );
        for f in &r.flatness {
            match (&f.result, &f.note) {
                (Some(x), _) => {
                    let _ = writeln!(s, "flatness {:<6} chi2 {:.3} dof {} p {:.4e}", f.axis, x.chi2, x.dof, x.p_value);
                }
                (None, note) => {
                    let _ = writeln!(s, "flatness {:<6} skipped: {}", f.axis, note.as_deref().unwrap_or(""));
                }
            }
        }
        for f in &r.fits {
            match (&f.result, &f.note) {
                (Some(x), _) => {
                    let _ = writeln!(
                        s,
                        "fit {} ~ x^{} (1-x^2)^{} on [{}, {}]: scale {:.4e}, max rel residual {:.4} over {} bins",
                        f.axis, f.a, f.b, f.lo, f.hi, x.scale, x.max_rel_residual, x.bins_checked
                    );
                }
                (None, note) => {
                    let _ = writeln!(s, "fit {} skipped: {}", f.axis, note.as_deref().unwrap_or(""));
                }
            }
        }
        let _ = writeln!(
            s,
            "wall {:.2} s, {:.0} samples/s",
            self.timing.wall_secs, self.timing.samples_per_sec
        );
        s
    }
}

fn write_file(dir: &Path, name: &str, contents: &str, written: &mut Vec<(String, String)>) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    written.push((name.to_string(), hex::encode(Sha256::digest(contents.as_bytes()))));
    Ok(())
}

/// Writes `report.json`, one CSV per axis, the joint CSV and a `MANIFEST` of
/// SHA-256 sums. Creates `dir` if needed; returns the paths written.
pub fn export(report: &ExperimentReport, dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let r = &report.results;
    let level = r.overall.level;
    let method = r.overall.method;
    let mut written = Vec::new();
    let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    write_file(dir, REPORT_FILE, &json, &mut written)?;
    for h in &r.histograms {
        write_file(dir, &format!("{}.csv", h.axis.label.name()), &h.to_csv(level, method), &mut written)?;
    }
    match &r.symmetrized {
        Some((joint, pooled)) => {
            write_file(dir, JOINT_FILE, &joint.to_csv(), &mut written)?;
            write_file(dir, SYMMETRIZED_FILE, &pooled.to_csv(level, method), &mut written)?;
        }
        None => write_file(dir, JOINT_FILE, &r.joint.to_csv(), &mut written)?,
    }
    let mut manifest = String::new();
    for (name, sum) in &written {
        let _ = writeln!(manifest, "{sum}  {name}");
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| CliError::io(&path, e))?;
    let mut paths: Vec<PathBuf> = written.iter().map(|(n, _)| dir.join(n)).collect();
    paths.push(path);
    Ok(paths)
}

/// Checks every entry of a `MANIFEST` against the files beside it.
pub fn verify_manifest(dir: &Path) -> CliResult<usize> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut n = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (sum, name) = line
            .split_once("  ")
            .ok_or_else(|| CliError::Validation(format!("bad manifest line `{line}`")))?;
        let file = dir.join(name);
        let bytes = fs::read(&file).map_err(|e| CliError::io(&file, e))?;
        if hex::encode(Sha256::digest(&bytes)) != sum {
            return Err(CliError::Validation(format!("checksum mismatch for {name}")));
        }
        n += 1;
    }
    Ok(n)
}
