use std::f64::consts::PI;

/// Sharp dyadic shell of a frequency magnitude: 1 for `|k| < 2`, else the `N` with `N <= |k| < 2N`.
pub fn sharp_shell(k: f64) -> u64 {
    let k = k.abs();
    if k < 2.0 {
        return 1;
    }
    let mut n: u64 = 2;
    while (2 * n) as f64 <= k {
        n *= 2;
    }
    n
}

/// Raised-cosine taper in `log2|k|`; the weights over all dyadic `n` sum to one.
pub fn smooth_shell_weight(k: f64, n: u64) -> f64 {
    let k = k.abs();
    if n == 1 {
        if k <= 1.0 {
            return 1.0;
        }
        if k >= 2.0 {
            return 0.0;
        }
        return (0.5 * PI * k.log2()).cos().powi(2);
    }
    if k == 0.0 {
        return 0.0;
    }
    let t = (k / n as f64).log2();
    if t.abs() >= 1.0 {
        0.0
    } else {
        (0.5 * PI * t).cos().powi(2)
    }
}

/// Dyadic levels `1, 2, 4, …` up to the first one covering `kmax`.
pub fn dyadic_levels(kmax: f64) -> Vec<u64> {
    let mut out = vec![1u64];
    let mut n = 1u64;
    while ((2 * n) as f64) < 2.0 * kmax.max(1.0) {
        n *= 2;
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_partition() {
        assert_eq!(sharp_shell(0.0), 1);
        assert_eq!(sharp_shell(1.99), 1);
        assert_eq!(sharp_shell(2.0), 2);
        assert_eq!(sharp_shell(3.99), 2);
        assert_eq!(sharp_shell(4.0), 4);
        assert_eq!(sharp_shell(63.0), 32);
        assert_eq!(sharp_shell(64.0), 64);
    }

    #[test]
    fn smooth_weights_sum_to_one() {
        for i in 0..2000 {
            let k = i as f64 * 0.037;
            let s: f64 = dyadic_levels(k).iter().map(|&n| smooth_shell_weight(k, n)).sum();
            assert!((s - 1.0).abs() < 1e-12, "k = {k}: {s}");
            let nonzero = dyadic_levels(k)
                .iter()
                .filter(|&&n| smooth_shell_weight(k, n) > 0.0)
                .count();
            assert!(nonzero <= 2);
        }
    }
}
