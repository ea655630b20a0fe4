//! Binned (total, PPT) counters over invariant axes, binomial ratio
//! estimates, a chi-square homogeneity test and radial-density fits.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::InvariantRecord;
use crate::special::{chi_square_sf, normal_quantile};

pub const DEFAULT_BINS: usize = 100;
pub const DEFAULT_FLATNESS_MIN_TOTAL: u64 = 1000;
pub const HISTOGRAM_CSV_HEADER: &str = "bin_lo,bin_hi,total,hits,p_hat,ci_lo,ci_hi";
pub const JOINT_CSV_HEADER: &str = "xbin,ybin,total,hits";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxisLabel {
    #[serde(rename = "r_A")]
    RadiusA,
    #[serde(rename = "R_B")]
    RadiusB,
    #[serde(rename = "c2_A")]
    C2A,
    #[serde(rename = "c2_B")]
    C2B,
    #[serde(rename = "c3_B")]
    C3B,
    #[serde(rename = "C002")]
    C002,
}

impl AxisLabel {
    pub const ALL: [AxisLabel; 6] = [
        AxisLabel::RadiusA,
        AxisLabel::RadiusB,
        AxisLabel::C2A,
        AxisLabel::C2B,
        AxisLabel::C3B,
        AxisLabel::C002,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxisLabel::RadiusA => "r_A",
            AxisLabel::RadiusB => "R_B",
            AxisLabel::C2A => "c2_A",
            AxisLabel::C2B => "c2_B",
            AxisLabel::C3B => "c3_B",
            AxisLabel::C002 => "C002",
        }
    }

    /// Default `(lo, hi)`: radii and Casimirs on `[0, 1]`, `c3` on `[-1, 1]`,
    /// the correlation invariant on `[0, 3]`.
    pub fn default_range(self) -> (f64, f64) {
        match self {
            AxisLabel::C3B => (-1.0, 1.0),
            AxisLabel::C002 => (0.0, 3.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn value(self, r: &InvariantRecord) -> Option<f64> {
        match self {
            AxisLabel::RadiusA => Some(r.r_a),
            AxisLabel::RadiusB => Some(r.r_b),
            AxisLabel::C2A => Some(r.c2_a),
            AxisLabel::C2B => Some(r.c2_b),
            AxisLabel::C3B => r.c3_b,
            AxisLabel::C002 => r.c002,
        }
    }
}

impl fmt::Display for AxisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AxisLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown axis `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: AxisLabel,
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(label: AxisLabel, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidAxis(format!("{label}: need lo < hi, got [{lo}, {hi}]")));
        }
        if bins == 0 {
            return Err(Error::InvalidAxis(format!("{label}: bins must be positive")));
        }
        Ok(Self { label, lo, hi, bins })
    }

    pub fn with_default_range(label: AxisLabel, bins: usize) -> Result<Self> {
        let (lo, hi) = label.default_range();
        Self::new(label, lo, hi, bins)
    }

    pub fn default_for(label: AxisLabel) -> Self {
        Self::with_default_range(label, DEFAULT_BINS).expect("default axis is valid")
    }

    /// Same bounds and bin count (labels may differ).
    pub fn same_binning(&self, other: &Axis) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.bins == other.bins
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + bin as f64 * w, self.lo + (bin + 1) as f64 * w)
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        let (a, b) = self.edges(bin);
        0.5 * (a + b)
    }

    /// Bin of `value`; the last bin is closed on the right.
    #[inline]
    pub fn bin_of(&self, value: f64) -> Locate {
        if value.is_nan() || value > self.hi {
            return Locate::Above;
        }
        if value < self.lo {
            return Locate::Below;
        }
        let idx = ((value - self.lo) * self.bins as f64 / (self.hi - self.lo)) as usize;
        Locate::Bin(idx.min(self.bins - 1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locate {
    Below,
    Bin(usize),
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CiMethod {
    Wald,
    #[default]
    Wilson,
}

impl FromStr for CiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wald" => Ok(CiMethod::Wald),
            "wilson" => Ok(CiMethod::Wilson),
            _ => Err(Error::Parse(format!("unknown interval method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
    pub method: CiMethod,
}

/// `hits / total` with a two-sided interval at confidence `level`.
pub fn ratio_with_ci(hits: u64, total: u64, level: f64, method: CiMethod) -> Result<RatioEstimate> {
    if total == 0 {
        return Err(Error::EmptyCell);
    }
    if hits > total {
        return Err(Error::DomainError(format!("hits {hits} exceed total {total}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::DomainError(format!("confidence level {level} not in (0, 1)")));
    }
    let n = total as f64;
    let p = hits as f64 / n;
    let z = normal_quantile(0.5 + 0.5 * level);
    let (lo, hi) = match method {
        CiMethod::Wald => {
            let half = z * (p * (1.0 - p) / n).sqrt();
            (p - half, p + half)
        }
        CiMethod::Wilson => {
            let z2 = z * z;
            let denom = 1.0 + z2 / n;
            let center = (p + z2 / (2.0 * n)) / denom;
            let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
            (center - half, center + half)
        }
    };
    Ok(RatioEstimate {
        p_hat: p,
        ci_lo: lo.clamp(0.0, p),
        ci_hi: hi.clamp(p, 1.0),
        level,
        method,
    })
}

/// Per-bin totals and PPT hits over one axis, plus out-of-range tallies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramPair {
    pub axis: Axis,
    pub total: Vec<u64>,
    pub hits: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl HistogramPair {
    pub fn new(axis: Axis) -> Self {
        Self {
            axis,
            total: vec![0; axis.bins],
            hits: vec![0; axis.bins],
            underflow: 0,
            overflow: 0,
        }
    }

    #[inline]
    pub fn accumulate(&mut self, value: f64, ppt: bool) {
        match self.axis.bin_of(value) {
            Locate::Bin(i) => {
                self.total[i] += 1;
                self.hits[i] += ppt as u64;
            }
            Locate::Below => self.underflow += 1,
            Locate::Above => self.overflow += 1,
        }
    }

    /// Number of `accumulate` calls absorbed, in range or not.
    pub fn count(&self) -> u64 {
        self.total.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn hits_in_range(&self) -> u64 {
        self.hits.iter().sum()
    }

    pub fn merge_from(&mut self, other: &HistogramPair) -> Result<()> {
        if self.axis != other.axis {
            return Err(Error::AxisMismatch);
        }
        for (a, b) in self.total.iter_mut().zip(&other.total) {
            *a += b;
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    /// Per-bin ratios; `None` for empty bins.
    pub fn ratios(&self, level: f64, method: CiMethod) -> Vec<Option<RatioEstimate>> {
        self.total
            .iter()
            .zip(&self.hits)
            .map(|(&t, &h)| ratio_with_ci(h, t, level, method).ok())
            .collect()
    }

    /// CSV export; ratio columns are empty for empty bins.
    pub fn to_csv(&self, level: f64, method: CiMethod) -> String {
        let mut out = String::from(HISTOGRAM_CSV_HEADER);
        out.push('\n');
        for (i, r) in self.ratios(level, method).into_iter().enumerate() {
            let (lo, hi) = self.axis.edges(i);
            let _ = write!(out, "{lo},{hi},{},{}", self.total[i], self.hits[i]);
            match r {
                Some(r) => {
                    let _ = writeln!(out, ",{},{},{}", r.p_hat, r.ci_lo, r.ci_hi);
                }
                None => out.push_str(",,,\n"),
            }
        }
        out
    }

    /// Rebuilds counts from [`HistogramPair::to_csv`] output. Out-of-range
    /// tallies are not part of the CSV and come back as zero.
    pub fn from_csv(label: AxisLabel, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        if header.trim() != HISTOGRAM_CSV_HEADER {
            return Err(Error::Parse(format!("unexpected header `{header}`")));
        }
        let mut edges = Vec::new();
        let mut total = Vec::new();
        let mut hits = Vec::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Parse(format!("row {n}: expected 7 fields, got {}", f.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {n}: {e}")));
            let int = |s: &str| s.trim().parse::<u64>().map_err(|e| Error::Parse(format!("row {n}: {e}")));
            edges.push((num(f[0])?, num(f[1])?));
            total.push(int(f[2])?);
            hits.push(int(f[3])?);
        }
        let (first, last) = match (edges.first(), edges.last()) {
            (Some(a), Some(b)) => (a.0, b.1),
            _ => return Err(Error::Parse("CSV has no bins".into())),
        };
        let axis = Axis::new(label, first, last, edges.len())?;
        if hits.iter().zip(&total).any(|(h, t)| h > t) {
            return Err(Error::Parse("hits exceed totals".into()));
        }
        Ok(Self {
            axis,
            total,
            hits,
            underflow: 0,
            overflow: 0,
        })
    }
}

/// `merge(h1, h2)` as a value.
pub fn merge(h1: &HistogramPair, h2: &HistogramPair) -> Result<HistogramPair> {
    let mut out = h1.clone();
    out.merge_from(h2)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessOptions {
    pub min_total: u64,
    /// Leave out the right-closed last bin, which holds the pure-state boundary.
    pub exclude_top_bin: bool,
}

impl Default for FlatnessOptions {
    fn default() -> Self {
        Self {
            min_total: DEFAULT_FLATNESS_MIN_TOTAL,
            exclude_top_bin: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flatness {
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square test that every bin with at least `min_total` samples
/// shares one PPT proportion.
pub fn flatness_test(h: &HistogramPair, min_total: u64) -> Result<Flatness> {
    flatness_test_with(
        h,
        FlatnessOptions {
            min_total,
            exclude_top_bin: false,
        },
    )
}

pub fn flatness_test_with(h: &HistogramPair, opts: FlatnessOptions) -> Result<Flatness> {
    let last = if opts.exclude_top_bin { h.total.len().saturating_sub(1) } else { h.total.len() };
    let cells: Vec<(f64, f64)> = h.total[..last]
        .iter()
        .zip(&h.hits[..last])
        .filter(|(&t, _)| t >= opts.min_total && t > 0)
        .map(|(&t, &k)| (t as f64, k as f64))
        .collect();
    if cells.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} bin(s) with at least {} samples",
            cells.len(),
            opts.min_total
        )));
    }
    let n: f64 = cells.iter().map(|c| c.0).sum();
    let k: f64 = cells.iter().map(|c| c.1).sum();
    let pooled = k / n;
    let dof = cells.len() - 1;
    if pooled == 0.0 || pooled == 1.0 {
        return Ok(Flatness {
            chi2: 0.0,
            dof,
            p_value: 1.0,
        });
    }
    let chi2: f64 = cells
        .iter()
        .map(|&(t, k)| {
            let dev = k - t * pooled;
            dev * dev / (t * pooled * (1.0 - pooled))
        })
        .sum();
    Ok(Flatness {
        chi2,
        dof,
        p_value: chi_square_sf(chi2, dof as f64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleFit {
    pub scale: f64,
    pub max_rel_residual: f64,
    /// Bins that entered the residual.
    pub bins_checked: usize,
}

/// Model density `x^a (1 - x^2)^b`, integrated over a bin by its midpoint.
pub fn radial_model(axis: &Axis, bin: usize, a: f64, b: f64) -> f64 {
    let x = axis.midpoint(bin);
    let base = 1.0 - x * x;
    if base <= 0.0 {
        return 0.0;
    }
    x.powf(a) * base.powf(b) * axis.width()
}

/// Least-squares scale of the radial model to `totals` over the bins lying in
/// `range`, and the largest relative residual among bins with at least
/// `min_total` counts.
pub fn fit_scale_counts(
    axis: &Axis,
    totals: &[f64],
    a: f64,
    b: f64,
    range: (f64, f64),
    min_total: f64,
) -> Result<ScaleFit> {
    if totals.len() != axis.bins {
        return Err(Error::ShapeMismatch {
            expected: axis.bins,
            actual: totals.len(),
        });
    }
    let eps = 1e-9 * axis.width();
    let in_range: Vec<(usize, f64)> = (0..axis.bins)
        .filter(|&i| {
            let (lo, hi) = axis.edges(i);
            lo >= range.0 - eps && hi <= range.1 + eps
        })
        .map(|i| (i, radial_model(axis, i, a, b)))
        .collect();
    let (num, den) = in_range
        .iter()
        .fold((0.0, 0.0), |(n, d), &(i, m)| (n + totals[i] * m, d + m * m));
    if in_range.is_empty() || den == 0.0 {
        return Err(Error::InsufficientData("no model mass in fit range".into()));
    }
    let scale = num / den;
    let residuals: Vec<f64> = in_range
        .iter()
        .filter(|&&(i, m)| totals[i] >= min_total && m > 0.0)
        .map(|&(i, m)| (totals[i] - scale * m).abs() / (scale * m))
        .collect();
    if residuals.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no bins in range with at least {min_total} counts"
        )));
    }
    Ok(ScaleFit {
        scale,
        max_rel_residual: residuals.iter().copied().fold(0.0, f64::max),
        bins_checked: residuals.len(),
    })
}

pub fn fit_scale(
    h: &HistogramPair,
    a: f64,
    b: f64,
    range: (f64, f64),
    min_total: u64,
) -> Result<ScaleFit> {
    let totals: Vec<f64> = h.total.iter().map(|&t| t as f64).collect();
    fit_scale_counts(&h.axis, &totals, a, b, range, min_total as f64)
}

/// Two-dimensional (total, hits) counts; `total[x * bins_y + y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub axis_x: Axis,
    pub axis_y: Axis,
    pub total: Vec<u64>,
    pub hits: Vec<u64>,
    pub outside: u64,
}

impl JointHistogram {
    pub fn new(axis_x: Axis, axis_y: Axis) -> Self {
        let n = axis_x.bins * axis_y.bins;
        Self {
            axis_x,
            axis_y,
            total: vec![0; n],
            hits: vec![0; n],
            outside: 0,
        }
    }

    #[inline]
    fn cell(&self, x: usize, y: usize) -> usize {
        x * self.axis_y.bins + y
    }

    #[inline]
    pub fn accumulate(&mut self, x: f64, y: f64, ppt: bool) {
        match (self.axis_x.bin_of(x), self.axis_y.bin_of(y)) {
            (Locate::Bin(i), Locate::Bin(j)) => {
                let c = self.cell(i, j);
                self.total[c] += 1;
                self.hits[c] += ppt as u64;
            }
            _ => self.outside += 1,
        }
    }

    pub fn count(&self) -> u64 {
        self.total.iter().sum::<u64>() + self.outside
    }

    pub fn get(&self, x: usize, y: usize) -> (u64, u64) {
        let c = self.cell(x, y);
        (self.total[c], self.hits[c])
    }

    pub fn merge_from(&mut self, other: &JointHistogram) -> Result<()> {
        if self.axis_x != other.axis_x || self.axis_y != other.axis_y {
            return Err(Error::AxisMismatch);
        }
        for (a, b) in self.total.iter_mut().zip(&other.total) {
            *a += b;
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        self.outside += other.outside;
        Ok(())
    }

    /// `J + J^T` on both layers; requires identical binning on the two axes.
    pub fn symmetrized(&self) -> Result<JointHistogram> {
        if !self.axis_x.same_binning(&self.axis_y) {
            return Err(Error::AxisMismatch);
        }
        let mut out = self.clone();
        let n = self.axis_x.bins;
        for i in 0..n {
            for j in 0..n {
                let (c, t) = (self.cell(i, j), self.cell(j, i));
                out.total[c] = self.total[c] + self.total[t];
                out.hits[c] = self.hits[c] + self.hits[t];
            }
        }
        out.outside = 2 * self.outside;
        Ok(out)
    }

    pub fn ratio(&self, x: usize, y: usize, level: f64, method: CiMethod) -> Result<RatioEstimate> {
        let (t, h) = self.get(x, y);
        ratio_with_ci(h, t, level, method)
    }

    /// Row-major per-cell ratios; `Err(EmptyCell)` for empty cells.
    pub fn ratios(&self, level: f64, method: CiMethod) -> Vec<Result<RatioEstimate>> {
        (0..self.axis_x.bins)
            .flat_map(|x| (0..self.axis_y.bins).map(move |y| (x, y)))
            .map(|(x, y)| self.ratio(x, y, level, method))
            .collect()
    }

    pub fn marginal_x(&self) -> HistogramPair {
        let mut h = HistogramPair::new(self.axis_x);
        for x in 0..self.axis_x.bins {
            for y in 0..self.axis_y.bins {
                let (t, k) = self.get(x, y);
                h.total[x] += t;
                h.hits[x] += k;
            }
        }
        h
    }

    pub fn marginal_y(&self) -> HistogramPair {
        let mut h = HistogramPair::new(self.axis_y);
        for x in 0..self.axis_x.bins {
            for y in 0..self.axis_y.bins {
                let (t, k) = self.get(x, y);
                h.total[y] += t;
                h.hits[y] += k;
            }
        }
        h
    }

    /// Triplet CSV listing nonempty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(JOINT_CSV_HEADER);
        out.push('\n');
        for x in 0..self.axis_x.bins {
            for y in 0..self.axis_y.bins {
                let (t, k) = self.get(x, y);
                if t > 0 {
                    let _ = writeln!(out, "{x},{y},{t},{k}");
                }
            }
        }
        out
    }
}
