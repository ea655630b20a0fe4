//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed: the `P(alpha)` series as a curve, an
//! incremental Monte Carlo run with per-bin PPT ratios, and a look at a
//! single sampled state. Everything here also builds natively so the logic
//! is covered by ordinary tests.

use seplab::formula::{p_alpha, DEFAULT_TOL};
use seplab::invariants::record;
use seplab::matrix::{hermitian_eigenvalues, partial_transpose, Bipartition, Subsystem, DEFAULT_PPT_TOL};
use seplab::pipeline::{Pipeline, Tally};
use seplab::states::{sample_state, MeasureSpec, SampleStream};
use wasm_bindgen::prelude::*;

fn js_err(e: seplab::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn measure(dim_a: usize, dim_b: usize, k: usize) -> seplab::Result<(Bipartition, MeasureSpec)> {
    let part = Bipartition::new(dim_a, dim_b)?;
    let n = part.dim();
    let spec = if k == n {
        MeasureSpec::hilbert_schmidt(n)?
    } else {
        MeasureSpec::induced(n, k)?
    };
    Ok((part, spec))
}

/// `P(alpha)` at `points` evenly spaced values in `[lo, hi]`.
pub fn formula_points(lo: f64, hi: f64, points: usize) -> seplab::Result<Vec<f64>> {
    let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    (0..points)
        .map(|i| p_alpha(lo + step * i as f64, DEFAULT_TOL).map(|s| s.value))
        .collect()
}

#[wasm_bindgen(js_name = formulaCurve)]
pub fn formula_curve(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    formula_points(lo, hi, points).map_err(js_err)
}

/// Incremental sampling run; the page calls `step` from animation frames.
#[wasm_bindgen]
pub struct MonteCarlo {
    pipeline: Pipeline,
    tally: Tally,
    next: u64,
}

#[wasm_bindgen]
impl MonteCarlo {
    /// `k` equal to `dim_a * dim_b` selects the Hilbert-Schmidt measure.
    /// The seed is a JS number and is truncated to an integer.
    #[wasm_bindgen(constructor)]
    pub fn new(dim_a: usize, dim_b: usize, k: usize, seed: f64, bins: usize) -> Result<MonteCarlo, JsError> {
        Self::create(dim_a, dim_b, k, seed as u64, bins).map_err(js_err)
    }

    /// Processes the next `count` sample indices.
    pub fn step(&mut self, count: u32) -> Result<(), JsError> {
        let end = self.next + count as u64;
        let part = self.pipeline.run_range(self.next..end).map_err(js_err)?;
        self.tally.merge_from(&part).map_err(js_err)?;
        self.next = end;
        Ok(())
    }

    #[wasm_bindgen(js_name = axisNames)]
    pub fn axis_names(&self) -> Vec<String> {
        self.tally.histograms.iter().map(|h| h.axis.label.name().to_string()).collect()
    }

    /// `[lo, hi]` of an axis.
    #[wasm_bindgen(js_name = axisRange)]
    pub fn axis_range(&self, axis: usize) -> Vec<f64> {
        self.tally.histograms.get(axis).map_or_else(Vec::new, |h| vec![h.axis.lo, h.axis.hi])
    }

    pub fn totals(&self, axis: usize) -> Vec<f64> {
        self.tally.histograms.get(axis).map_or_else(Vec::new, |h| h.total.iter().map(|&t| t as f64).collect())
    }

    /// Per-bin PPT fraction; NaN for empty bins.
    pub fn ratios(&self, axis: usize) -> Vec<f64> {
        self.tally.histograms.get(axis).map_or_else(Vec::new, |h| {
            h.total
                .iter()
                .zip(&h.hits)
                .map(|(&t, &k)| if t == 0 { f64::NAN } else { k as f64 / t as f64 })
                .collect()
        })
    }

    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> f64 {
        self.tally.n_total as f64
    }

    #[wasm_bindgen(js_name = pHat)]
    pub fn p_hat(&self) -> f64 {
        if self.tally.n_total == 0 {
            f64::NAN
        } else {
            self.tally.n_ppt as f64 / self.tally.n_total as f64
        }
    }
}

impl MonteCarlo {
    pub fn create(dim_a: usize, dim_b: usize, k: usize, seed: u64, bins: usize) -> seplab::Result<Self> {
        let (part, spec) = measure(dim_a, dim_b, k)?;
        let pipeline = Pipeline::new(part, spec, seed, bins)?;
        let tally = pipeline.empty_tally();
        Ok(Self { pipeline, tally, next: 0 })
    }

    pub fn tally(&self) -> &Tally {
        &self.tally
    }
}

/// One sampled state: `[ppt, r_A, R_B, c3_B, C002, pt eigenvalues...]`,
/// with NaN where an invariant does not apply.
pub fn inspect(dim_a: usize, dim_b: usize, k: usize, seed: u64, index: u64) -> seplab::Result<Vec<f64>> {
    let (part, spec) = measure(dim_a, dim_b, k)?;
    let rho = sample_state(spec, SampleStream::new(seed, index))?;
    let rec = record(&rho, part, DEFAULT_PPT_TOL)?;
    let pt = partial_transpose(&rho, part, Subsystem::B)?;
    let spectrum = hermitian_eigenvalues(&pt)?;
    let mut out = vec![
        rec.ppt as u8 as f64,
        rec.r_a,
        rec.r_b,
        rec.c3_b.unwrap_or(f64::NAN),
        rec.c002.unwrap_or(f64::NAN),
    ];
    out.extend_from_slice(spectrum.values());
    Ok(out)
}

#[wasm_bindgen(js_name = inspectState)]
pub fn inspect_state(dim_a: usize, dim_b: usize, k: usize, seed: f64, index: f64) -> Result<Vec<f64>, JsError> {
    inspect(dim_a, dim_b, k, seed as u64, index as u64).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_hits_known_values() {
        let v = formula_points(0.5, 2.0, 4).unwrap();
        assert!((v[0] - 29.0 / 64.0).abs() < 1e-12);
        assert!((v[1] - 8.0 / 33.0).abs() < 1e-12);
        assert!((v[3] - 26.0 / 323.0).abs() < 1e-12);
        assert!(formula_points(-1.0, 1.0, 3).is_err());
    }

    #[test]
    fn incremental_run_matches_pipeline() {
        let mut mc = MonteCarlo::create(2, 2, 4, 5, 20).unwrap();
        for _ in 0..4 {
            mc.step(250).unwrap();
        }
        let (part, spec) = measure(2, 2, 4).unwrap();
        let whole = Pipeline::new(part, spec, 5, 20).unwrap().run_range(0..1000).unwrap();
        assert_eq!(mc.tally(), &whole);
        assert_eq!(mc.axis_names()[4], "C002");
        assert_eq!(mc.totals(0).iter().sum::<f64>(), 1000.0);
        assert!(mc.ratios(0).iter().all(|r| r.is_nan() || (0.0..=1.0).contains(r)));
    }

    #[test]
    fn inspect_reports_consistent_flag() {
        for i in 0..200 {
            let v = inspect(2, 3, 6, 1, i).unwrap();
            let min_eig = v[5];
            assert_eq!(v[0] == 1.0, min_eig >= -DEFAULT_PPT_TOL);
            assert_eq!(v.len(), 5 + 6);
            assert!(v[4].is_nan() && !v[3].is_nan());
        }
        assert!(inspect(2, 3, 4, 1, 0).is_ok());
        assert!(inspect(2, 3, 0, 1, 0).is_err());
    }
}
