#![allow(dead_code)]

use contestlab_core::costs::{BaseCost, ContestEnvironment};
use contestlab_core::kernels::Contest;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly decreasing scales in `[0.5, 4]` with gaps of at least 0.05.
pub fn thetas(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..k).map(|_| rng.gen_range(0.5..4.0)).collect();
        t.sort_by(|a, b| b.total_cmp(a));
        if t.windows(2).all(|w| w[0] - w[1] > 0.05) {
            return t;
        }
    }
}

pub fn probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Strictly increasing prizes from 0 with top prize 1.
pub fn contest(rng: &mut ChaCha8Rng, n: usize) -> Contest {
    let steps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = steps.iter().sum();
    let mut v = vec![0.0];
    for s in steps {
        v.push(v.last().unwrap() + s / total);
    }
    *v.last_mut().unwrap() = 1.0;
    Contest::new(v).unwrap()
}

/// Monotone prizes summing to `budget`, drawn uniformly over increments.
pub fn full_budget_prizes(rng: &mut ChaCha8Rng, n: usize, budget: f64) -> Vec<f64> {
    let shares: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = shares.iter().sum();
    let mut prizes = vec![0.0; n + 1];
    for (j, share) in shares.iter().enumerate() {
        let d = share / s * budget / (n - j) as f64;
        for p in prizes.iter_mut().skip(j + 1) {
            *p += d;
        }
    }
    prizes
}

pub fn environment(rng: &mut ChaCha8Rng, n: usize, k: usize, base: &BaseCost) -> ContestEnvironment {
    let t = thetas(rng, k);
    let p = probs(rng, k);
    ContestEnvironment::parametric_with(n, &t, base, &p).unwrap()
}

pub fn random_linear(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    k_range: std::ops::RangeInclusive<usize>,
) -> ContestEnvironment {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(k_range);
    environment(rng, n, k, &BaseCost::Linear)
}

pub fn hand_instance() -> (ContestEnvironment, Contest) {
    (ContestEnvironment::linear(2, &[2.0, 1.0], &[0.5, 0.5]).unwrap(), Contest::new(vec![0.0, 0.0, 1.0]).unwrap())
}
