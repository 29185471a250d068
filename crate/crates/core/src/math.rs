//! Scalar helpers shared across modules.

/// Logistic sigmoid, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(t))`.
#[inline]
pub fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

/// `ln(sum(exp(x)))` over a nonempty slice. Entries may be `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Normalized exponentials of `logits`.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(logits);
    logits.iter().map(|&z| (z - lse).exp()).collect()
}

/// `(beta / 2) * (1 + e^-beta) / (1 - e^-beta)`, the distortion of Maximal
/// Lotteries and NLHF. Written as `(beta/2) * coth(beta/2)` to stay accurate
/// as `beta -> 0`.
pub fn nlhf_bound(beta: f64) -> f64 {
    let h = 0.5 * beta;
    if h < 1e-4 {
        // x coth x = 1 + x^2/3 - x^4/45 + ...
        1.0 + h * h / 3.0 - h.powi(4) / 45.0
    } else {
        h / h.tanh()
    }
}

/// Slope of the secant of the sigmoid on `[0, beta]`: `(sigma(beta) - 1/2) / beta`.
pub fn ell_beta(beta: f64) -> f64 {
    (sigmoid(beta) - 0.5) / beta
}

/// Slope of the sigmoid at the origin.
pub const SIGMOID_SLOPE_AT_ZERO: f64 = 0.25;

/// Total variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// SplitMix64 finalizer; derives independent 64-bit seeds from `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(700.0) <= 1.0 && sigmoid(700.0) > 0.999);
        assert!(sigmoid(-700.0) >= 0.0 && sigmoid(-700.0).is_finite());
        for t in [-30.0, -1.5, 0.3, 12.0] {
            assert!((sigmoid(t) + sigmoid(-t) - 1.0).abs() < 1e-15);
            assert!((log_sigmoid(t) - sigmoid(t).ln()).abs() < 1e-12);
        }
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_handles_large_and_infinite_entries() {
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        let p = softmax(&[0.0, f64::NEG_INFINITY, 0.0]);
        assert_eq!(p, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn nlhf_bound_matches_both_forms() {
        for beta in [1e-3f64, 0.5, 1.0, 4.6, 20.0] {
            let direct = beta / 2.0 * (1.0 + (-beta).exp()) / (1.0 - (-beta).exp());
            assert!((nlhf_bound(beta) - direct).abs() < 1e-12 * direct);
        }
        assert!((nlhf_bound(1e-6) - 1.0).abs() < 1e-6);
        assert!((nlhf_bound(4.60) - 2.34).abs() < 0.01);
        // L / ell_beta is the same quantity.
        assert!((SIGMOID_SLOPE_AT_ZERO / ell_beta(3.0) - nlhf_bound(3.0)).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
