//! Dense complex matrices and the bipartite operations needed for the PPT test.
//!
//! Composite indices follow `i_a * dim_b + i_b`: subsystem A is the slow index.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Default threshold below which a partial-transpose eigenvalue counts as negative.
pub const DEFAULT_PPT_TOL: f64 = 1e-13;

const JACOBI_REL_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::ShapeMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Projector `|v><v|` onto an (unnormalized) vector.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (self.dim, other.dim);
        Self::from_fn(m * n, |r, c| {
            self[(r / n, c / n)] * other[(r % n, c % n)]
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute deviation `|m_ij - conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }

    /// Writes the plain-text fixture format: the dimension, then one `re im`
    /// line per entry in row-major order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.dim);
        for z in &self.entries {
            out.push_str(&format!("{:e} {:e}\n", z.re, z.im));
        }
        out
    }
}

impl FromStr for ComplexMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let dim: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing dimension line".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        let mut entries = Vec::with_capacity(dim * dim);
        for (n, line) in lines.enumerate() {
            let mut parts = line.split_whitespace();
            let mut next = |what: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("entry {n}: missing {what}")))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("entry {n}: {e}")))
            };
            let re = next("real part")?;
            let im = next("imaginary part")?;
            entries.push(Complex64::new(re, im));
        }
        Self::from_row_major(dim, entries)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const PSD_TOL: f64 = 1e-10;

    /// Validates all density-matrix invariants.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let dev = m.hermitian_deviation();
        if dev > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermitian deviation {dev:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > Self::TRACE_TOL || tr.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let spec = hermitian_eigenvalues(&m)?;
        if spec.min() < -Self::PSD_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {:.3e}",
                spec.min()
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix whose invariants hold by construction.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]))
    }

    /// Normalized projector onto `v`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        Ok(Self(
            ComplexMatrix::projector(v).scale(Complex64::new(1.0 / norm, 0.0)),
        ))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(probs))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Convex combination `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &Self, p: f64) -> Result<Self> {
        let a = self.0.scale(Complex64::new(p, 0.0));
        let b = other.0.scale(Complex64::new(1.0 - p, 0.0));
        Self::new(a.add(&b)?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.0
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density{:?}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Factorization `dim = dim_a * dim_b` of a composite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Bipartition {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        Ok(Self { dim_a, dim_b })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                actual: dim,
            });
        }
        Ok(())
    }

    pub fn subsystem_dim(&self, s: Subsystem) -> usize {
        match s {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.dim_a, self.dim_b)
    }
}

impl FromStr for Bipartition {
    type Err = Error;

    /// Parses `"2x3"`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .trim()
            .split_once(['x', 'X', '*'])
            .ok_or_else(|| Error::Parse(format!("shape `{s}` is not of the form MxN")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("shape `{s}`: {e}")))
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

/// Eigenvalues in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// All eigenvalues of a Hermitian matrix, ascending, by cyclic complex Jacobi
/// rotations.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Spectrum> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { deviation });
    }
    let mut a = m.entries.clone();
    let mut values = jacobi_in_place(&mut a, m.dim);
    values.sort_by(f64::total_cmp);
    Ok(Spectrum { values })
}

/// Diagonalizes the Hermitian row-major buffer `a` in place and returns the
/// (unsorted) diagonal.
fn jacobi_in_place(a: &mut [Complex64], n: usize) -> Vec<f64> {
    // Symmetrize so rounding in the input cannot leak into the rotations.
    for i in 0..n {
        a[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            let z = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            a[i * n + j] = z;
            a[j * n + i] = z.conj();
        }
    }
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = JACOBI_REL_TOL * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if (2.0 * off).sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(a, n, p, q);
            }
        }
    }
    (0..n).map(|i| a[i * n + i].re).collect()
}

/// One Jacobi step annihilating the `(p, q)` entry. With `g = |g| e^{i phi}`
/// the rotation is `U = diag(1, e^{-i phi}) * [[c, s], [-s, c]]` acting on
/// columns `p, q`.
#[inline]
fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let g = a[p * n + q];
    let abs_g = g.norm();
    if abs_g == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let w = g.conj() / abs_g;
    let theta = (aqq - app) / (2.0 * abs_g);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let wq = w * akq;
        let new_kp = akp * c - wq * s;
        let new_kq = akp * s + wq * c;
        a[k * n + p] = new_kp;
        a[k * n + q] = new_kq;
        a[p * n + k] = new_kp.conj();
        a[q * n + k] = new_kq.conj();
    }
    a[p * n + p] = Complex64::new(app - t * abs_g, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * abs_g, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
}

/// Partial transpose of `m` on one subsystem. Accepts any square matrix of
/// matching dimension; Hermiticity and trace are preserved.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    part: Bipartition,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    part.check(m.dim)?;
    let mut out = ComplexMatrix::zeros(m.dim);
    partial_transpose_into(m.entries(), part, subsystem, out.entries_mut());
    Ok(out)
}

pub(crate) fn partial_transpose_into(
    src: &[Complex64],
    part: Bipartition,
    subsystem: Subsystem,
    dst: &mut [Complex64],
) {
    let (da, db) = (part.dim_a, part.dim_b);
    let d = da * db;
    for i in 0..da {
        for j in 0..db {
            let row = i * db + j;
            for k in 0..da {
                for l in 0..db {
                    let col = k * db + l;
                    let (sr, sc) = match subsystem {
                        Subsystem::B => (i * db + l, k * db + j),
                        Subsystem::A => (k * db + j, i * db + l),
                    };
                    dst[row * d + col] = src[sr * d + sc];
                }
            }
        }
    }
}

/// `rho^{T_A}` or `rho^{T_B}`.
pub fn partial_transpose(
    rho: &DensityMatrix,
    part: Bipartition,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    partial_transpose_matrix(rho.as_matrix(), part, subsystem)
}

/// Reduced state on `keep`.
pub fn partial_trace(rho: &DensityMatrix, part: Bipartition, keep: Subsystem) -> Result<DensityMatrix> {
    partial_trace_matrix(rho.as_matrix(), part, keep).map(DensityMatrix::new_unchecked)
}

pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    part: Bipartition,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    part.check(m.dim)?;
    let (da, db) = (part.dim_a, part.dim_b);
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, |i, k| {
            (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, |j, l| {
            (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
        }),
    };
    Ok(out)
}

/// `tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    hs_norm_sqr(rho.as_matrix())
}

/// `tr(M^2)` for Hermitian `M`, which equals the squared Frobenius norm.
pub fn hs_norm_sqr(m: &ComplexMatrix) -> f64 {
    m.entries.iter().map(|z| z.norm_sqr()).sum()
}

/// Result of the Peres-Horodecki test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptTest {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

/// Smallest eigenvalue of `rho^{T_B}` and whether it clears `-tol`.
pub fn is_ppt(rho: &DensityMatrix, part: Bipartition, tol: f64) -> Result<PptTest> {
    let pt = partial_transpose(rho, part, Subsystem::B)?;
    let min_eigenvalue = hermitian_eigenvalues(&pt)?.min();
    Ok(PptTest {
        ppt: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// PPT flag only, via a Cholesky factorization of `rho^{T_B} + tol I`.
///
/// Agrees with [`is_ppt`] except on a measure-zero band of width ~1e-16
/// around the threshold. `scratch` must hold at least `2 * dim^2` entries.
pub fn ppt_flag(rho: &DensityMatrix, part: Bipartition, tol: f64, scratch: &mut Vec<Complex64>) -> Result<bool> {
    let d = rho.dim();
    part.check(d)?;
    scratch.clear();
    scratch.resize(d * d, Complex64::new(0.0, 0.0));
    partial_transpose_into(rho.as_matrix().entries(), part, Subsystem::B, scratch);
    for i in 0..d {
        scratch[i * d + i].re += tol;
    }
    Ok(cholesky_in_place(scratch, d))
}

/// Lower Cholesky factor of a Hermitian matrix, in place; `false` as soon as a
/// pivot is not strictly positive.
pub(crate) fn cholesky_in_place(a: &mut [Complex64], n: usize) -> bool {
    for j in 0..n {
        let mut diag = a[j * n + j].re;
        for k in 0..j {
            diag -= a[j * n + k].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let ljj = diag.sqrt();
        a[j * n + j] = Complex64::new(ljj, 0.0);
        let inv = 1.0 / ljj;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = v * inv;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn singlet() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn two_by_two() -> Bipartition {
        Bipartition::new(2, 2).unwrap()
    }

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::from_real_diagonal(&[0.75, 0.25]);
        let s = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(s.values(), &[0.25, 0.75]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = ComplexMatrix::from_row_major(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let s = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(s.values()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.values()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pauli_y_spectrum() {
        let m = ComplexMatrix::from_row_major(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let s = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(s.values()[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.values()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_row_major(2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn singlet_partial_transpose_spectrum() {
        let pt = partial_transpose(&singlet(), two_by_two(), Subsystem::B).unwrap();
        let s = hermitian_eigenvalues(&pt).unwrap();
        for (got, want) in s.values().iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn diagonal_state_is_fixed_by_partial_transpose() {
        let rho = DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.15, 0.05, 0.2]).unwrap();
        let part = Bipartition::new(2, 3).unwrap();
        for s in [Subsystem::A, Subsystem::B] {
            let pt = partial_transpose(&rho, part, s).unwrap();
            assert_eq!(&pt, rho.as_matrix());
        }
    }

    #[test]
    fn product_state_partial_transpose() {
        let rho_a = DensityMatrix::new(
            ComplexMatrix::from_row_major(2, vec![c(0.6, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.)]).unwrap(),
        )
        .unwrap();
        let rho_b = DensityMatrix::new(ComplexMatrix::from_row_major(
            3,
            vec![
                c(0.5, 0.), c(0.1, 0.1), c(0.0, -0.05),
                c(0.1, -0.1), c(0.3, 0.), c(0.02, 0.0),
                c(0.0, 0.05), c(0.02, 0.0), c(0.2, 0.),
            ],
        ).unwrap())
        .unwrap();
        let part = Bipartition::new(2, 3).unwrap();
        let pt = partial_transpose(&rho_a.kron(&rho_b), part, Subsystem::B).unwrap();
        let want = rho_a.as_matrix().kron(&rho_b.as_matrix().transpose());
        assert!(pt.max_abs_diff(&want) < 1e-15);

        let reduced = partial_trace(&rho_a.kron(&rho_b), part, Subsystem::B).unwrap();
        assert!(reduced.as_matrix().max_abs_diff(rho_b.as_matrix()) < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let rho = DensityMatrix::maximally_mixed(6);
        let part = two_by_two();
        assert!(matches!(
            partial_transpose(&rho, part, Subsystem::B),
            Err(Error::ShapeMismatch { expected: 4, actual: 6 })
        ));
        assert!(partial_trace(&rho, part, Subsystem::A).is_err());
        assert!(is_ppt(&rho, part, DEFAULT_PPT_TOL).is_err());
    }

    #[test]
    fn partial_traces() {
        let mixed = DensityMatrix::maximally_mixed(6);
        let part = Bipartition::new(2, 3).unwrap();
        let a = partial_trace(&mixed, part, Subsystem::A).unwrap();
        assert!(a.as_matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).as_matrix()) < 1e-15);

        let a = partial_trace(&singlet(), two_by_two(), Subsystem::A).unwrap();
        let half = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        assert!(a.as_matrix().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn trivial_subsystems_act_as_full_operations() {
        let rho = DensityMatrix::new(
            ComplexMatrix::from_row_major(2, vec![c(0.6, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.)]).unwrap(),
        )
        .unwrap();
        let part = Bipartition::new(1, 2).unwrap();
        let pt = partial_transpose(&rho, part, Subsystem::B).unwrap();
        assert_eq!(pt, rho.as_matrix().transpose());
        let tr = partial_trace(&rho, part, Subsystem::A).unwrap();
        assert_abs_diff_eq!(tr.as_matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn purities() {
        assert_abs_diff_eq!(purity(&DensityMatrix::maximally_mixed(5)), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(purity(&singlet()), 1.0, epsilon = 1e-15);
        let d = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        assert_abs_diff_eq!(purity(&d), 5.0 / 8.0, epsilon = 1e-15);
    }

    #[test]
    fn ppt_examples() {
        let t = is_ppt(&DensityMatrix::maximally_mixed(4), two_by_two(), DEFAULT_PPT_TOL).unwrap();
        assert!(t.ppt);
        assert_abs_diff_eq!(t.min_eigenvalue, 0.25, epsilon = 1e-15);

        let t = is_ppt(&singlet(), two_by_two(), DEFAULT_PPT_TOL).unwrap();
        assert!(!t.ppt);
        assert_abs_diff_eq!(t.min_eigenvalue, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn werner_threshold() {
        let mixed = DensityMatrix::maximally_mixed(4);
        let mut scratch = Vec::new();
        for (p, expected) in [(0.5, false), (0.25, true), (0.3, true), (0.34, false)] {
            let w = singlet().mix(&mixed, p).unwrap();
            let t = is_ppt(&w, two_by_two(), DEFAULT_PPT_TOL).unwrap();
            assert_eq!(t.ppt, expected, "p = {p}");
            assert_abs_diff_eq!(t.min_eigenvalue, (1.0 - 3.0 * p) / 4.0, epsilon = 1e-14);
            assert_eq!(ppt_flag(&w, two_by_two(), DEFAULT_PPT_TOL, &mut scratch).unwrap(), expected);
        }
    }

    #[test]
    fn density_matrix_validation() {
        let not_unit = ComplexMatrix::from_real_diagonal(&[0.5, 0.6]);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative).is_err());
        let skew = ComplexMatrix::from_row_major(2, vec![c(0.5, 0.), c(0.1, 0.), c(0.2, 0.), c(0.5, 0.)]).unwrap();
        assert!(DensityMatrix::new(skew).is_err());
    }

    #[test]
    fn text_fixture_round_trip() {
        let text = "2\n0.5 0\n0 -0.25\n0 0.25\n0.5 0\n";
        let m: ComplexMatrix = text.parse().unwrap();
        assert_eq!(m[(0, 1)], c(0.0, -0.25));
        let back: ComplexMatrix = m.to_text().parse().unwrap();
        assert_eq!(back, m);
        assert!("3\n1 0\n".parse::<ComplexMatrix>().is_err());
        assert!("x\n".parse::<ComplexMatrix>().is_err());
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("2x3".parse::<Bipartition>().unwrap(), Bipartition::new(2, 3).unwrap());
        assert!("2by3".parse::<Bipartition>().is_err());
        assert!("0x3".parse::<Bipartition>().is_err());
    }
}
