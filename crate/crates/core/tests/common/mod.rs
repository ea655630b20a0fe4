#![allow(dead_code)]

use seplab::matrix::ComplexMatrix;
use seplab::states::{sample_ginibre, SampleStream};
use seplab::Complex64;

/// Haar-ish random unitary from Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary(d: usize, seed: u64, index: u64) -> ComplexMatrix {
    let g = sample_ginibre(d, d, SampleStream::new(seed, index));
    let mut cols: Vec<Vec<Complex64>> = (0..d).map(|j| (0..d).map(|i| g.get(i, j)).collect()).collect();
    for j in 0..d {
        for k in 0..j {
            let proj: Complex64 = (0..d).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..d {
                let v = cols[k][i];
                cols[j][i] -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(d, |i, j| cols[j][i])
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(d: usize, seed: u64, index: u64) -> ComplexMatrix {
    let g = sample_ginibre(d, d, SampleStream::new(seed, index));
    ComplexMatrix::from_fn(d, |i, j| (g.get(i, j) + g.get(j, i).conj()) * 0.5)
}

/// Number of eigenvalues of Hermitian `m` strictly below `x`, from the
/// inertia of `m - x I` (Sylvester's law, LDL^dagger without pivoting).
pub fn count_below(m: &ComplexMatrix, x: f64) -> usize {
    let n = m.dim();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut d = vec![0.0f64; n];
    let mut negatives = 0;
    for j in 0..n {
        let mut dj = m[(j, j)].re - x;
        for k in 0..j {
            dj -= l[j * n + k].norm_sqr() * d[k];
        }
        if dj == 0.0 {
            dj = -1e-300;
        }
        d[j] = dj;
        if dj < 0.0 {
            negatives += 1;
        }
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[i * n + k] * d[k] * l[j * n + k].conj();
            }
            l[i * n + j] = v / dj;
        }
    }
    negatives
}

/// Eigenvalues by bisection on the inertia count.
pub fn bisection_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let bound = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(m, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-15 * bound {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
