//! Shared helpers for the integration suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xfpt_core::survival::halfline_inverse_transform;

/// One-sample Kolmogorov–Smirnov distance between sorted samples and the CDF
/// `1 - survival`, restricted to `t < clip` (censoring-aware: the empirical
/// CDF uses the full sample count).
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], survival: F, clip: f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &t) in sorted.iter().enumerate() {
        if t >= clip {
            break;
        }
        let f = 1.0 - survival(t);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// 99% KS critical value for sample size n.
pub fn ks_crit_99(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Exact half-line FPT samples (inverse transform), sorted.
pub fn exact_halfline_samples(n: usize, length: f64, diffusivity: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            halfline_inverse_transform(u, length, diffusivity)
        })
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
