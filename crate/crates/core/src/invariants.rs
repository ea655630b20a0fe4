//! su(d) generators, coherence vectors and the Casimir-type invariants of
//! reduced states.
//!
//! Basis order (fixed, component positions are part of the API): the
//! `d(d-1)/2` symmetric generators `|j><k| + |k><j|` for `j < k` in
//! lexicographic order, then the antisymmetric ones `-i|j><k| + i|k><j|` in
//! the same order, then the `d - 1` diagonal ones
//! `sqrt(2 / (l (l + 1))) * (sum_{j<l} |j><j| - l |l><l|)` for `l = 1..d`.
//! For `d = 2` this is `(sigma_x, sigma_y, sigma_z)`; for `d = 3` it is the
//! Gell-Mann sequence `(l1, l4, l6, l2, l5, l7, l3, l8)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    is_ppt, partial_trace_matrix, ppt_flag, Bipartition, ComplexMatrix, DensityMatrix, Subsystem,
};

pub const MIN_BASIS_DIM: usize = 2;
pub const MAX_BASIS_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorBasis {
    d: usize,
    generators: Vec<ComplexMatrix>,
}

impl GeneratorBasis {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Position of the standard Gell-Mann matrix `lambda_label` (1-based) in the
/// `d = 3` basis.
pub fn gell_mann_position(label: usize) -> Option<usize> {
    const ORDER: [usize; 8] = [1, 4, 6, 2, 5, 7, 3, 8];
    ORDER.iter().position(|&l| l == label)
}

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |j| ((j + 1)..d).map(move |k| (j, k)))
}

fn diagonal_weight(l: usize) -> f64 {
    (2.0 / (l * (l + 1)) as f64).sqrt()
}

/// Generalized Gell-Mann basis of su(d), normalized to `tr(l_a l_b) = 2 delta_ab`.
pub fn su_basis(d: usize) -> Result<GeneratorBasis> {
    if !(MIN_BASIS_DIM..=MAX_BASIS_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut generators = Vec::with_capacity(d * d - 1);
    for (j, k) in pairs(d) {
        let mut m = ComplexMatrix::zeros(d);
        m[(j, k)] = one;
        m[(k, j)] = one;
        generators.push(m);
    }
    for (j, k) in pairs(d) {
        let mut m = ComplexMatrix::zeros(d);
        m[(j, k)] = -i;
        m[(k, j)] = i;
        generators.push(m);
    }
    for l in 1..d {
        let w = diagonal_weight(l);
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = w;
        }
        diag[l] = -(l as f64) * w;
        generators.push(ComplexMatrix::from_real_diagonal(&diag));
    }
    Ok(GeneratorBasis { d, generators })
}

/// `sqrt(2 (d - 1) / d)`: the coherence-vector norm of a pure state.
pub fn pure_state_norm(d: usize) -> f64 {
    (2.0 * (d as f64 - 1.0) / d as f64).sqrt()
}

/// Generalized Bloch vector `n_a = tr(rho l_a)` with its normalized radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceVector {
    pub d: usize,
    pub n: Vec<f64>,
    pub radius: f64,
}

impl CoherenceVector {
    /// Squared radius: the quadratic Casimir in the normalization where pure
    /// states give 1.
    pub fn c2(&self) -> f64 {
        self.radius * self.radius
    }

    /// `n / sqrt(2 (d - 1) / d)`, which has unit length for pure states.
    pub fn unit_scaled(&self) -> Vec<f64> {
        let s = 1.0 / pure_state_norm(self.d);
        self.n.iter().map(|x| x * s).collect()
    }
}

/// Components of `tr(m l_a)` in basis order, computed from matrix entries.
pub(crate) fn coherence_components(m: &ComplexMatrix, out: &mut Vec<f64>) {
    let d = m.dim();
    out.clear();
    for (j, k) in pairs(d) {
        out.push(2.0 * m[(j, k)].re);
    }
    for (j, k) in pairs(d) {
        out.push(-2.0 * m[(j, k)].im);
    }
    let mut prefix = 0.0;
    for l in 1..d {
        prefix += m[(l - 1, l - 1)].re;
        out.push(diagonal_weight(l) * (prefix - l as f64 * m[(l, l)].re));
    }
}

fn vector_from_components(d: usize, n: Vec<f64>) -> CoherenceVector {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    CoherenceVector {
        d,
        radius: norm / pure_state_norm(d),
        n,
    }
}

pub fn coherence_vector(rho: &DensityMatrix, basis: &GeneratorBasis) -> Result<CoherenceVector> {
    if rho.dim() != basis.d {
        return Err(Error::ShapeMismatch {
            expected: basis.d,
            actual: rho.dim(),
        });
    }
    let mut n = Vec::with_capacity(basis.len());
    coherence_components(rho.as_matrix(), &mut n);
    Ok(vector_from_components(basis.d, n))
}

/// Totally symmetric structure constants `d_abc = tr({l_a, l_b} l_c) / 4`,
/// stored sparsely under sorted index triples.
#[derive(Clone, Debug, PartialEq)]
pub struct DTensor {
    d: usize,
    entries: BTreeMap<(usize, usize, usize), f64>,
}

const D_TENSOR_ZERO: f64 = 1e-13;

fn sorted3(a: usize, b: usize, c: usize) -> (usize, usize, usize) {
    let mut t = [a, b, c];
    t.sort_unstable();
    (t[0], t[1], t[2])
}

fn permutation_count(a: usize, b: usize, c: usize) -> f64 {
    if a == b && b == c {
        1.0
    } else if a == b || b == c || a == c {
        3.0
    } else {
        6.0
    }
}

impl DTensor {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Entry for any index order.
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.entries.get(&sorted3(a, b, c)).copied().unwrap_or(0.0)
    }

    /// Nonzero entries keyed by sorted index triples.
    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    /// `sum_abc d_abc x_a x_b x_c`.
    pub fn cubic_form(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|(&(a, b, c), &v)| permutation_count(a, b, c) * v * x[a] * x[b] * x[c])
            .sum()
    }
}

pub fn d_tensor(basis: &GeneratorBasis) -> DTensor {
    let g = basis.generators();
    let m = g.len();
    let mut entries = BTreeMap::new();
    for a in 0..m {
        for b in a..m {
            let ab = &g[a] * &g[b];
            let ba = &g[b] * &g[a];
            let anti = ab.add(&ba).expect("generators share a dimension");
            for (c, gc) in g.iter().enumerate().skip(b) {
                let v = 0.25 * anti.trace_product(gc).re;
                if v.abs() > D_TENSOR_ZERO {
                    entries.insert((a, b, c), v);
                }
            }
        }
    }
    DTensor {
        d: basis.d,
        entries,
    }
}

/// Cubic Casimir `d_abc m_a m_b m_c` on the unit-scaled coherence vector
/// `m = n / sqrt(2 (d - 1) / d)`; pure qutrits give `1/sqrt(3)`, qubits give 0.
pub fn cubic_casimir(v: &CoherenceVector, dt: &DTensor) -> Result<f64> {
    if v.d != dt.d {
        return Err(Error::ShapeMismatch {
            expected: dt.d,
            actual: v.d,
        });
    }
    Ok(dt.cubic_form(&v.unit_scaled()))
}

/// Sum of squares of the two-qubit Fano correlation matrix
/// `c_ij = tr(rho sigma_i (x) sigma_j)`.
pub fn fano_correlation_invariant(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::ShapeMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    Ok(correlation_matrix(rho.as_matrix())
        .iter()
        .flatten()
        .map(|c| c * c)
        .sum())
}

/// Two-qubit correlation matrix `c_ij = tr(m sigma_i (x) sigma_j)`.
pub fn correlation_matrix(m: &ComplexMatrix) -> [[f64; 3]; 3] {
    // sigma_i |b> = phase_i(b) |flip_i(b)>, so the trace reduces to four terms.
    fn act(i: usize, b: usize) -> (usize, Complex64) {
        match i {
            0 => (b ^ 1, Complex64::new(1.0, 0.0)),
            1 => (b ^ 1, if b == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) }),
            _ => (b, Complex64::new(if b == 0 { 1.0 } else { -1.0 }, 0.0)),
        }
    }
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // tr(m P) = sum_col (m P)_{col,col} = sum_col m[col', col] * phase
            // where P|col> = phase |col'>.
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    let (a2, pa) = act(i, a);
                    let (b2, pb) = act(j, b);
                    acc += m[(a * 2 + b, a2 * 2 + b2)] * pa * pb;
                }
            }
            *cell = acc.re;
        }
    }
    out
}

/// Per-sample invariants of a bipartite state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub r_a: f64,
    pub r_b: f64,
    pub c2_a: f64,
    pub c2_b: f64,
    pub c3_b: Option<f64>,
    pub c002: Option<f64>,
    pub ppt: bool,
}

/// How the PPT flag of a record is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PptMethod {
    /// Smallest eigenvalue of the partial transpose (Jacobi).
    Eigenvalues,
    /// Cholesky factorization of the shifted partial transpose.
    #[default]
    Cholesky,
}

/// Precomputed per-shape data for building [`InvariantRecord`]s.
#[derive(Clone, Debug)]
pub struct InvariantContext {
    part: Bipartition,
    cubic_b: Option<DTensor>,
    tol: f64,
    method: PptMethod,
}

/// Scratch buffers reused across records on one worker.
#[derive(Default)]
pub struct RecordScratch {
    components: Vec<f64>,
    matrix: Vec<Complex64>,
}

fn radius_of(components: &[f64], d: usize) -> f64 {
    if d == 1 {
        return 0.0;
    }
    components.iter().map(|x| x * x).sum::<f64>().sqrt() / pure_state_norm(d)
}

impl InvariantContext {
    pub fn new(part: Bipartition, tol: f64, method: PptMethod) -> Result<Self> {
        let cubic_b = if part.dim_b == 3 {
            Some(d_tensor(&su_basis(3)?))
        } else {
            None
        };
        Ok(Self {
            part,
            cubic_b,
            tol,
            method,
        })
    }

    pub fn part(&self) -> Bipartition {
        self.part
    }

    pub fn record(&self, rho: &DensityMatrix, scratch: &mut RecordScratch) -> Result<InvariantRecord> {
        let part = self.part;
        part.check(rho.dim())?;
        let m = rho.as_matrix();

        let red_a = partial_trace_matrix(m, part, Subsystem::A)?;
        coherence_components(&red_a, &mut scratch.components);
        let r_a = radius_of(&scratch.components, part.dim_a);

        let red_b = partial_trace_matrix(m, part, Subsystem::B)?;
        coherence_components(&red_b, &mut scratch.components);
        let r_b = radius_of(&scratch.components, part.dim_b);
        let c3_b = self.cubic_b.as_ref().map(|dt| {
            let s = 1.0 / pure_state_norm(3);
            for x in scratch.components.iter_mut() {
                *x *= s;
            }
            dt.cubic_form(&scratch.components)
        });

        let c002 = if part.dim_a == 2 && part.dim_b == 2 {
            Some(fano_correlation_invariant(rho)?)
        } else {
            None
        };

        let ppt = match self.method {
            PptMethod::Eigenvalues => is_ppt(rho, part, self.tol)?.ppt,
            PptMethod::Cholesky => ppt_flag(rho, part, self.tol, &mut scratch.matrix)?,
        };

        Ok(InvariantRecord {
            r_a,
            r_b,
            c2_a: r_a * r_a,
            c2_b: r_b * r_b,
            c3_b,
            c002,
            ppt,
        })
    }
}

/// Reduces `rho` to both subsystems and collects radii, Casimirs, the cubic
/// Casimir of a qutrit B, the two-qubit correlation invariant and the PPT flag.
pub fn record(rho: &DensityMatrix, part: Bipartition, tol: f64) -> Result<InvariantRecord> {
    InvariantContext::new(part, tol, PptMethod::Eigenvalues)?.record(rho, &mut RecordScratch::default())
}
