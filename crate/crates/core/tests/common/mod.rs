#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sage_core::{ConvexSet, Signomial};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn toy() -> (Signomial, ConvexSet) {
    let f = Signomial::new(
        vec![vec![1.5, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
        vec![1.0, -1.0, -1.0],
    )
    .unwrap();
    let x = ConvexSet::Polyhedron {
        w: vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ],
        b: vec![1.0, -1.0, 1.0, 1.0],
    };
    (f, x)
}

/// Random signomial with `ℓ ≤ 4` terms in `n ≤ 2` variables and a finite box
/// inside `[-2, 2]^n`. Exponents are multiples of 1/2 in `[-1, 1]`, so
/// lattice rows collide often.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Signomial, ConvexSet) {
    let n = rng.random_range(1..=2);
    let ell = rng.random_range(2..=4);
    let exponents: Vec<Vec<f64>> = (0..ell)
        .map(|_| {
            (0..n)
                .map(|_| rng.random_range(-2..=2) as f64 * 0.5)
                .collect()
        })
        .collect();
    let coeffs: Vec<f64> = (0..ell).map(|_| rng.random_range(-1.5..1.5)).collect();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        lower.push(a.min(b));
        upper.push(a.max(b).max(a.min(b) + 0.1).min(2.0));
    }
    let f = Signomial::new(exponents, coeffs).unwrap();
    (f, ConvexSet::Box { lower, upper })
}

/// Dense tensor grid over a box with `per_axis` points per side, followed
/// by a few shrinking refinement passes around the best point. Independent of the
/// library's own oracle.
pub fn dense_box_min(
    eval: impl Fn(&[f64]) -> f64,
    lower: &[f64],
    upper: &[f64],
    per_axis: usize,
) -> f64 {
    let n = lower.len();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let scan = |lo: &[f64], hi: &[f64], best: &mut (f64, Vec<f64>)| {
        let total = per_axis.pow(n as u32);
        for code in 0..total {
            let mut rest = code;
            let x: Vec<f64> = (0..n)
                .map(|d| {
                    let k = rest % per_axis;
                    rest /= per_axis;
                    lo[d] + (hi[d] - lo[d]) * k as f64 / (per_axis - 1) as f64
                })
                .collect();
            let v = eval(&x);
            if v < best.0 {
                *best = (v, x);
            }
        }
    };
    scan(lower, upper, &mut best);
    let mut h: Vec<f64> = (0..n)
        .map(|d| (upper[d] - lower[d]) / (per_axis - 1) as f64)
        .collect();
    for _ in 0..4 {
        let lo: Vec<f64> = (0..n).map(|d| (best.1[d] - h[d]).max(lower[d])).collect();
        let hi: Vec<f64> = (0..n).map(|d| (best.1[d] + h[d]).min(upper[d])).collect();
        scan(&lo, &hi, &mut best);
        for x in h.iter_mut() {
            *x *= 2.0 / (per_axis - 1) as f64;
        }
    }
    best.0
}

pub fn box_bounds(set: &ConvexSet) -> (Vec<f64>, Vec<f64>) {
    match set {
        ConvexSet::Box { lower, upper } => (lower.clone(), upper.clone()),
        other => panic!("expected a box, got {other:?}"),
    }
}
