//! Reproducible random density matrices from the Ginibre construction.
//!
//! Every sample is keyed on `(master_seed, sample_index)`: the ChaCha8 key is
//! derived from the master seed and the stream id is the sample index, so a
//! sample never depends on which worker drew it or in what order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleStream {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SampleStream {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        Self {
            master_seed,
            sample_index,
        }
    }

    /// Generator for this sample alone.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.sample_index);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureLabel {
    HilbertSchmidt,
    Induced,
}

/// Induced measure on `n`-dimensional states from an `n x k` Ginibre matrix.
/// Hilbert-Schmidt is the `k = n` case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub n: usize,
    pub k: usize,
    pub label: MeasureLabel,
}

impl MeasureSpec {
    pub fn hilbert_schmidt(n: usize) -> Result<Self> {
        Self::new(n, n, MeasureLabel::HilbertSchmidt)
    }

    pub fn induced(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, MeasureLabel::Induced)
    }

    pub fn new(n: usize, k: usize, label: MeasureLabel) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidMeasure(format!(
                "dimensions must be positive (n = {n}, k = {k})"
            )));
        }
        if label == MeasureLabel::HilbertSchmidt && k != n {
            return Err(Error::InvalidMeasure(format!(
                "Hilbert-Schmidt requires k = n (n = {n}, k = {k})"
            )));
        }
        Ok(Self { n, k, label })
    }
}

/// Measure syntax used on the command line: `hs` or `induced:K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureKind {
    HilbertSchmidt,
    Induced { k: usize },
}

impl MeasureKind {
    pub fn spec(self, n: usize) -> Result<MeasureSpec> {
        match self {
            MeasureKind::HilbertSchmidt => MeasureSpec::hilbert_schmidt(n),
            MeasureKind::Induced { k } => MeasureSpec::induced(n, k),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureKind::HilbertSchmidt => write!(f, "hs"),
            MeasureKind::Induced { k } => write!(f, "induced:{k}"),
        }
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("hs") {
            return Ok(MeasureKind::HilbertSchmidt);
        }
        match s.split_once(':') {
            Some((name, k)) if name.eq_ignore_ascii_case("induced") => {
                let k = k
                    .parse()
                    .map_err(|e| Error::Parse(format!("measure `{s}`: {e}")))?;
                if k == 0 {
                    return Err(Error::InvalidMeasure("ancilla dimension must be positive".into()));
                }
                Ok(MeasureKind::Induced { k })
            }
            _ => Err(Error::Parse(format!(
                "measure `{s}` is neither `hs` nor `induced:K`"
            ))),
        }
    }
}

/// Rectangular `rows x cols` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GinibreMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl GinibreMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    /// `G G^dagger` (Hermitian, `rows x rows`).
    pub fn gram(&self) -> ComplexMatrix {
        let (n, k) = (self.rows, self.cols);
        let mut out = ComplexMatrix::zeros(n);
        let e = &self.entries;
        for i in 0..n {
            let ri = &e[i * k..(i + 1) * k];
            for j in i..n {
                let rj = &e[j * k..(j + 1) * k];
                let z: Complex64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum();
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
            out[(i, i)].im = 0.0;
        }
        out
    }
}

fn fill_gaussian(rng: &mut ChaCha8Rng, out: &mut [Complex64]) {
    for z in out {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = Complex64::new(re, im);
    }
}

/// `n x k` matrix of independent complex Gaussians with standard-normal real
/// and imaginary parts.
pub fn sample_ginibre(n: usize, k: usize, stream: SampleStream) -> GinibreMatrix {
    let mut entries = vec![Complex64::new(0.0, 0.0); n * k];
    fill_gaussian(&mut stream.rng(), &mut entries);
    GinibreMatrix {
        rows: n,
        cols: k,
        entries,
    }
}

/// `rho = G G^dagger / tr(G G^dagger)`.
pub fn sample_state(measure: MeasureSpec, stream: SampleStream) -> Result<DensityMatrix> {
    let (n, k) = (measure.n, measure.k);
    let mut rng = stream.rng();
    let mut g = GinibreMatrix {
        rows: n,
        cols: k,
        entries: vec![Complex64::new(0.0, 0.0); n * k],
    };
    for _ in 0..2 {
        fill_gaussian(&mut rng, &mut g.entries);
        let norm: f64 = g.entries.iter().map(|z| z.norm_sqr()).sum();
        if norm > 0.0 {
            let mut w = g.gram();
            let inv = 1.0 / w.trace().re;
            for z in w.entries_mut() {
                *z *= inv;
            }
            return Ok(DensityMatrix::new_unchecked(w));
        }
    }
    Err(Error::DegenerateSample(stream.sample_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hermitian_eigenvalues, purity};

    #[test]
    fn measure_validation() {
        assert!(MeasureSpec::hilbert_schmidt(6).is_ok());
        assert!(MeasureSpec::new(6, 9, MeasureLabel::HilbertSchmidt).is_err());
        assert!(MeasureSpec::induced(6, 0).is_err());
        assert!(MeasureSpec::induced(0, 3).is_err());
        assert_eq!("hs".parse::<MeasureKind>().unwrap(), MeasureKind::HilbertSchmidt);
        assert_eq!(
            "induced:9".parse::<MeasureKind>().unwrap(),
            MeasureKind::Induced { k: 9 }
        );
        assert!("induced:0".parse::<MeasureKind>().is_err());
        assert!("bures".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn deterministic_per_index() {
        let a = sample_ginibre(3, 4, SampleStream::new(7, 11));
        let b = sample_ginibre(3, 4, SampleStream::new(7, 11));
        let c = sample_ginibre(3, 4, SampleStream::new(7, 12));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.entries.len(), 12);
    }

    #[test]
    fn scalar_ginibre_moments() {
        let draws = 1_000_000u64;
        let (mut sum_re, mut sum_im, mut sum_sq) = (0.0, 0.0, 0.0);
        for i in 0..draws {
            let z = sample_ginibre(1, 1, SampleStream::new(3, i)).get(0, 0);
            sum_re += z.re;
            sum_im += z.im;
            sum_sq += z.norm_sqr();
        }
        let n = draws as f64;
        // Each mean has standard error 1/sqrt(n).
        assert!((sum_re / n).abs() < 4.0 / n.sqrt());
        assert!((sum_im / n).abs() < 4.0 / n.sqrt());
        assert!((sum_sq / n - 2.0).abs() < 0.02);
    }

    #[test]
    fn rectangular_entry_variance() {
        let draws = 100_000u64;
        let mut acc = 0.0;
        let mut count = 0usize;
        for i in 0..draws {
            let g = sample_ginibre(6, 9, SampleStream::new(5, i));
            assert_eq!((g.rows, g.cols), (6, 9));
            acc += g.entries.iter().map(|z| z.norm_sqr()).sum::<f64>();
            count += g.entries.len();
        }
        let var = acc / count as f64;
        assert!((var - 2.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn one_dimensional_state() {
        let m = MeasureSpec::induced(1, 5).unwrap();
        let rho = sample_state(m, SampleStream::new(1, 2)).unwrap();
        assert_eq!(rho.dim(), 1);
        assert!((rho.as_matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_states_are_valid() {
        for (n, k) in [(4, 4), (6, 6), (6, 9), (8, 8), (9, 9), (3, 2)] {
            let m = MeasureSpec::new(n, k, if n == k { MeasureLabel::HilbertSchmidt } else { MeasureLabel::Induced }).unwrap();
            for i in 0..200 {
                let rho = sample_state(m, SampleStream::new(42, i)).unwrap();
                let tr = rho.as_matrix().trace();
                assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-15);
                assert!(hermitian_eigenvalues(rho.as_matrix()).unwrap().min() >= -1e-12);
                DensityMatrix::new(rho.clone().into_matrix()).unwrap();
            }
        }
    }

    #[test]
    fn rank_deficient_induced_states() {
        // k < n gives rank-k states
        let m = MeasureSpec::induced(3, 2).unwrap();
        let rho = sample_state(m, SampleStream::new(9, 0)).unwrap();
        let s = hermitian_eigenvalues(rho.as_matrix()).unwrap();
        assert!(s.values()[0].abs() < 1e-12);
        assert!(purity(&rho) > 1.0 / 3.0);
    }
}
