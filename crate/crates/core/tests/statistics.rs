mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seplab::matrix::{hermitian_eigenvalues, purity, ComplexMatrix};
use seplab::special::{chi_square_sf, ln_gamma};
use seplab::states::{sample_state, MeasureSpec, SampleStream};
use seplab::stats::{
    flatness_test, merge, ratio_with_ci, Axis, AxisLabel, CiMethod, HistogramPair,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn chi_square_tail_matches_reference() {
    for dof in 1..=200u32 {
        let reference = ChiSquared::new(dof as f64).unwrap();
        for &scale in &[0.05, 0.3, 0.7, 1.0, 1.3, 2.0, 3.5] {
            let x = scale * dof as f64;
            let ours = chi_square_sf(x, dof as f64);
            let theirs = reference.sf(x);
            assert!((ours - theirs).abs() <= 1e-10, "dof {dof} x {x}: {ours} vs {theirs}");
        }
    }
}

#[test]
fn ln_gamma_matches_reference() {
    for i in 1..2000 {
        let x = i as f64 * 0.137;
        let want = statrs::function::gamma::ln_gamma(x);
        assert!((ln_gamma(x) - want).abs() <= 1e-12 * want.abs().max(1.0), "x = {x}");
    }
}

fn synthetic_histogram(rng: &mut ChaCha8Rng, bins: usize, per_bin: u64, p: f64) -> HistogramPair {
    let axis = Axis::new(AxisLabel::RadiusA, 0.0, 1.0, bins).unwrap();
    let mut h = HistogramPair::new(axis);
    for b in 0..bins {
        let v = (b as f64 + 0.5) / bins as f64;
        for _ in 0..per_bin {
            h.accumulate(v, rng.random::<f64>() < p);
        }
    }
    h
}

#[test]
fn flatness_null_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let replicates = 400;
    let mut chi2_sum = 0.0;
    let mut small_p = 0;
    for _ in 0..replicates {
        let h = synthetic_histogram(&mut rng, 10, 2000, 0.3);
        let f = flatness_test(&h, 1000).unwrap();
        assert_eq!(f.dof, 9);
        chi2_sum += f.chi2;
        small_p += (f.p_value < 0.1) as u32;
    }
    // E[chi2] = 9, sd of the mean = sqrt(18 / 400) ~ 0.21
    let mean = chi2_sum / replicates as f64;
    assert!((mean - 9.0).abs() < 1.0, "mean chi2 {mean}");
    // Uniform p-values: about 40 of 400 below 0.1 (sd ~ 6).
    assert!((15..=70).contains(&small_p), "{small_p} p-values below 0.1");
}

#[test]
fn hilbert_schmidt_mean_purity() {
    // Induced-measure mean purity (n + k) / (n k + 1).
    for (n, samples, want) in [(4usize, 200_000u64, 8.0 / 17.0), (6, 1_000_000, 12.0 / 37.0)] {
        let measure = MeasureSpec::hilbert_schmidt(n).unwrap();
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..samples {
            let p = purity(&sample_state(measure, SampleStream::new(2003, i)).unwrap());
            s += p;
            s2 += p * p;
        }
        let m = s / samples as f64;
        let se = ((s2 / samples as f64 - m * m) / samples as f64).sqrt();
        assert!((m - want).abs() <= 3.0 * se, "n = {n}: {m} vs {want} (se {se})");
    }
}

#[test]
fn qubit_mean_purity_from_uniform_ball() {
    // HS qubits are uniform in the Bloch ball: E[r^2] = 3/5, purity (1 + r^2) / 2 = 4/5.
    let measure = MeasureSpec::hilbert_schmidt(2).unwrap();
    let samples = 400_000u64;
    let mean: f64 = (0..samples)
        .map(|i| purity(&sample_state(measure, SampleStream::new(2100, i)).unwrap()))
        .sum::<f64>()
        / samples as f64;
    assert!((mean - 0.8).abs() < 1e-3, "{mean}");
}

/// Two-sample Pearson chi-square over a common binning.
fn two_sample_p_value(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut chi2 = 0.0;
    let mut used = 0;
    for (&x, &y) in a.iter().zip(b) {
        let t = (x + y) as f64;
        if t == 0.0 {
            continue;
        }
        used += 1;
        let ea = t * na / (na + nb);
        let eb = t * nb / (na + nb);
        chi2 += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    chi_square_sf(chi2, (used - 1) as f64)
}

#[test]
fn sampling_is_unitarily_invariant_in_distribution() {
    let measure = MeasureSpec::hilbert_schmidt(4).unwrap();
    let u = common::random_unitary(4, 2200, 0);
    let samples = 100_000u64;
    let bins = 20;
    let mut entry_plain = vec![0u64; bins];
    let mut entry_rotated = vec![0u64; bins];
    let mut eig_plain = vec![0u64; bins];
    let mut eig_rotated = vec![0u64; bins];
    let bin = |x: f64, hi: f64| ((x / hi * bins as f64) as usize).min(bins - 1);
    for i in 0..samples {
        let rho = sample_state(measure, SampleStream::new(2300, i)).unwrap();
        let sigma = sample_state(measure, SampleStream::new(2301, i)).unwrap();
        let rotated: ComplexMatrix = &(&u * sigma.as_matrix()) * &u.adjoint();
        entry_plain[bin(rho.as_matrix()[(0, 0)].re, 1.0)] += 1;
        entry_rotated[bin(rotated[(0, 0)].re, 1.0)] += 1;
        eig_plain[bin(hermitian_eigenvalues(rho.as_matrix()).unwrap().max(), 1.0)] += 1;
        eig_rotated[bin(hermitian_eigenvalues(&rotated).unwrap().max(), 1.0)] += 1;
    }
    assert!(two_sample_p_value(&entry_plain, &entry_rotated) > 0.01);
    assert!(two_sample_p_value(&eig_plain, &eig_rotated) > 0.01);
}

fn arb_histogram() -> impl Strategy<Value = HistogramPair> {
    prop::collection::vec((0u64..1000, 0u64..1000), 8).prop_map(|cells| {
        let axis = Axis::new(AxisLabel::C3B, -1.0, 1.0, 8).unwrap();
        let mut h = HistogramPair::new(axis);
        for (i, (a, b)) in cells.into_iter().enumerate() {
            h.total[i] = a.max(b);
            h.hits[i] = a.min(b);
        }
        h
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn merge_is_commutative_and_associative(a in arb_histogram(), b in arb_histogram(), c in arb_histogram()) {
        prop_assert_eq!(merge(&a, &b).unwrap(), merge(&b, &a).unwrap());
        let left = merge(&merge(&a, &b).unwrap(), &c).unwrap();
        let right = merge(&a, &merge(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left.count(), a.count() + b.count() + c.count());
    }

    #[test]
    fn accumulate_conserves_counts(values in prop::collection::vec((-2.0f64..2.0, any::<bool>()), 0..300)) {
        let mut h = HistogramPair::new(Axis::default_for(AxisLabel::RadiusA));
        for &(v, p) in &values {
            h.accumulate(v, p);
        }
        prop_assert_eq!(h.count(), values.len() as u64);
        prop_assert!(h.hits.iter().zip(&h.total).all(|(k, t)| k <= t));
    }

    #[test]
    fn intervals_bracket_the_estimate(total in 1u64..10_000_000, frac in 0.0f64..=1.0, level in 0.5f64..0.9999) {
        let hits = ((total as f64) * frac) as u64;
        for method in [CiMethod::Wald, CiMethod::Wilson] {
            let r = ratio_with_ci(hits, total, level, method).unwrap();
            prop_assert!(r.ci_lo <= r.p_hat && r.p_hat <= r.ci_hi);
            prop_assert!(r.ci_lo >= 0.0 && r.ci_hi <= 1.0);
        }
    }
}
