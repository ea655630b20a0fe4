//! Sample -> invariants -> bins over a range of sample indices.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{InvariantContext, InvariantRecord, PptMethod, RecordScratch};
use crate::matrix::{Bipartition, DEFAULT_PPT_TOL};
use crate::stats::{Axis, AxisLabel, HistogramPair, JointHistogram};
use crate::states::{sample_state, MeasureSpec, SampleStream};

/// Axes tracked for a shape: radii and quadratic Casimirs of both parties,
/// `c3_B` when B is a qutrit, `C002` for two qubits.
pub fn axes_for(part: Bipartition, bins: usize) -> Result<Vec<Axis>> {
    let mut labels = vec![AxisLabel::RadiusA, AxisLabel::RadiusB, AxisLabel::C2A, AxisLabel::C2B];
    if part.dim_b == 3 {
        labels.push(AxisLabel::C3B);
    }
    if part.dim_a == 2 && part.dim_b == 2 {
        labels.push(AxisLabel::C002);
    }
    labels
        .into_iter()
        .map(|l| Axis::with_default_range(l, bins))
        .collect()
}

/// Mergeable counts produced by a pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub n_total: u64,
    pub n_ppt: u64,
    pub histograms: Vec<HistogramPair>,
    pub joint: JointHistogram,
}

impl Tally {
    pub fn empty(axes: &[Axis], joint_x: Axis, joint_y: Axis) -> Self {
        Self {
            n_total: 0,
            n_ppt: 0,
            histograms: axes.iter().map(|&a| HistogramPair::new(a)).collect(),
            joint: JointHistogram::new(joint_x, joint_y),
        }
    }

    #[inline]
    pub fn add(&mut self, r: &InvariantRecord) {
        self.n_total += 1;
        self.n_ppt += r.ppt as u64;
        for h in &mut self.histograms {
            if let Some(v) = h.axis.label.value(r) {
                h.accumulate(v, r.ppt);
            }
        }
        self.joint.accumulate(r.r_a, r.r_b, r.ppt);
    }

    pub fn merge_from(&mut self, other: &Tally) -> Result<()> {
        if self.histograms.len() != other.histograms.len() {
            return Err(Error::AxisMismatch);
        }
        for (a, b) in self.histograms.iter_mut().zip(&other.histograms) {
            a.merge_from(b)?;
        }
        self.joint.merge_from(&other.joint)?;
        self.n_total += other.n_total;
        self.n_ppt += other.n_ppt;
        Ok(())
    }

    pub fn histogram(&self, label: AxisLabel) -> Option<&HistogramPair> {
        self.histograms.iter().find(|h| h.axis.label == label)
    }
}

/// Everything needed to turn sample indices into records.
#[derive(Clone, Debug)]
pub struct Pipeline {
    measure: MeasureSpec,
    context: InvariantContext,
    seed: u64,
    axes: Vec<Axis>,
}

impl Pipeline {
    pub fn new(part: Bipartition, measure: MeasureSpec, seed: u64, bins: usize) -> Result<Self> {
        Self::with_method(part, measure, seed, bins, PptMethod::Cholesky)
    }

    pub fn with_method(
        part: Bipartition,
        measure: MeasureSpec,
        seed: u64,
        bins: usize,
        method: PptMethod,
    ) -> Result<Self> {
        part.check(measure.n)?;
        Ok(Self {
            measure,
            context: InvariantContext::new(part, DEFAULT_PPT_TOL, method)?,
            seed,
            axes: axes_for(part, bins)?,
        })
    }

    pub fn part(&self) -> Bipartition {
        self.context.part()
    }

    pub fn measure(&self) -> MeasureSpec {
        self.measure
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn empty_tally(&self) -> Tally {
        let x = self.axes[0];
        let y = self.axes[1];
        Tally::empty(&self.axes, x, y)
    }

    pub fn record_at(&self, index: u64, scratch: &mut RecordScratch) -> Result<InvariantRecord> {
        let rho = sample_state(self.measure, SampleStream::new(self.seed, index))?;
        self.context.record(&rho, scratch)
    }

    /// Processes `indices` into a fresh tally.
    pub fn run_range(&self, indices: Range<u64>) -> Result<Tally> {
        let mut tally = self.empty_tally();
        let mut scratch = RecordScratch::default();
        for i in indices {
            let r = self.record_at(i, &mut scratch)?;
            tally.add(&r);
        }
        Ok(tally)
    }
}
