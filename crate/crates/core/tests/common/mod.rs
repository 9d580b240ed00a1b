#![allow(dead_code)]

use blaschke_core::catalog::Surface;
use blaschke_core::linalg::symmetric_eigen;
use blaschke_core::{invariants_at, DerivStrategy, PointInvariants, SpaceFormOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_points(bx: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| bx.iter().map(|&(a, b)| rng.gen_range(a..b)).collect())
        .collect()
}

pub fn invariants(s: &Surface<f64>, points: &[Vec<f64>], strategy: DerivStrategy<f64>) -> Vec<PointInvariants<f64>> {
    points
        .iter()
        .map(|x| invariants_at(&s.immersion, x, strategy, SpaceFormOptions::default()).unwrap())
        .collect()
}

pub fn eigenvalues(t: &blaschke_core::linalg::SymTensor2<f64>) -> Vec<f64> {
    symmetric_eigen(&t.to_mat()).0
}

pub fn expand(values: &[(f64, usize)]) -> Vec<f64> {
    let mut v: Vec<f64> = values
        .iter()
        .flat_map(|&(x, m)| std::iter::repeat(x).take(m))
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Distance between two spectra allowing a global sign flip of the second.
pub fn max_diff_up_to_sign(got: &[f64], want: &[f64]) -> f64 {
    let mut neg: Vec<f64> = want.iter().map(|x| -x).collect();
    neg.sort_by(|a, b| a.partial_cmp(b).unwrap());
    max_diff(got, want).min(max_diff(got, &neg))
}
