//! Flatness tests and radial fits on previously exported CSVs.

use std::fs;
use std::path::Path;

use seplab::stats::{AxisLabel, HistogramPair};
use serde::Serialize;

use crate::config::FitSpec;
use crate::error::{CliError, CliResult};
use crate::report::{fit_for, flatness_for, AxisFlatness, FitOutcome, SYMMETRIZED_FILE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Analysis {
    pub flatness: Vec<AxisFlatness>,
    pub fits: Vec<FitOutcome>,
}

/// Axis histograms found in `dir`, in the usual axis order. The pooled
/// radius histogram, if present, comes last under the name `R_sym`.
pub fn load_histograms(dir: &Path) -> CliResult<Vec<(String, HistogramPair)>> {
    let mut out = Vec::new();
    let files = AxisLabel::ALL
        .iter()
        .map(|&l| (l.name().to_string(), format!("{}.csv", l.name()), l))
        .chain(std::iter::once(("R_sym".to_string(), SYMMETRIZED_FILE.to_string(), AxisLabel::RadiusB)));
    for (name, file, label) in files {
        let path = dir.join(&file);
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let h = HistogramPair::from_csv(label, &text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        out.push((name, h));
    }
    if out.is_empty() {
        return Err(CliError::Validation(format!(
            "no axis CSVs found in {}",
            dir.display()
        )));
    }
    Ok(out)
}

pub fn analyze_dir(
    dir: &Path,
    flatness_min_total: u64,
    fits: &[FitSpec],
    fit_min_total: u64,
) -> CliResult<Analysis> {
    let hists = load_histograms(dir)?;
    let flatness = hists
        .iter()
        .map(|(name, h)| flatness_for(h, name, flatness_min_total))
        .collect();
    let fits = fits
        .iter()
        .map(|spec| {
            hists
                .iter()
                .find(|(name, _)| name == spec.axis.name())
                .map(|(_, h)| fit_for(h, spec, fit_min_total))
                .ok_or_else(|| CliError::Validation(format!("no {}.csv in {}", spec.axis, dir.display())))
        })
        .collect::<CliResult<_>>()?;
    Ok(Analysis { flatness, fits })
}
