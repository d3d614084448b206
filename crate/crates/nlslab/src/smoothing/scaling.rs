use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::SpectralField;

/// Mass-critical rescaling `u_λ(x) = λ^{-d/2} u(x/λ)` onto the torus scaled by `lambda`.
///
/// Integer mode `n` keeps its index and gains the factor `λ^{d/2}`, so the L² norm is unchanged.
pub fn rescale(u: &SpectralField, lambda: f64) -> Result<SpectralField> {
    let g = u.geometry();
    let target = g.with_lambda(g.lambda() * lambda)?;
    let factor = lambda.powf(g.dim() as f64 / 2.0);
    let coef: Vec<Complex64> = u.coefficients().iter().map(|c| c * factor).collect();
    SpectralField::from_coefficients(&target, u.cutoff(), coef)
}

/// Tunables of the iteration budget.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BudgetOptions {
    /// Extra `λ` exponent in 1d.
    pub epsilon: f64,
    /// Local time scale `λ^{-δ}` in 2d.
    pub delta: f64,
    /// Exponent lost in the iteration count (the "−" in `N^{3−}`).
    pub slack: f64,
}

impl Default for BudgetOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            delta: 0.1,
            slack: 0.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingPlan {
    pub d: usize,
    pub s: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub slack: f64,
    pub n: f64,
    pub lambda_exponent: f64,
    pub lambda: f64,
    pub per_step_time: f64,
    pub step_count_exponent: f64,
    pub step_count: f64,
    /// Existence time on the rescaled torus.
    pub rescaled_horizon: f64,
    /// Exponent of `N` in the existence time on the unit torus.
    pub total_existence_exponent: f64,
    pub total_time: f64,
    pub global: bool,
    /// `s` at which `total_existence_exponent` vanishes for these tunables.
    pub zero_crossing: f64,
}

pub fn gwp_budget(d: usize, s: f64, n: f64, opts: BudgetOptions) -> Result<ScalingPlan> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} not in (0, 1)")));
    }
    if !(n >= 1.0) {
        return Err(invalid("N", format!("{n} < 1")));
    }
    let BudgetOptions {
        epsilon,
        delta,
        slack,
    } = opts;
    match d {
        1 => {
            let lambda_exponent = (1.0 - s) / s + epsilon;
            let lambda = n.powf(lambda_exponent);
            let per_step_time = lambda / n;
            let step_count_exponent = 3.0 - slack;
            let step_count = n.powf(step_count_exponent);
            let rescaled_horizon = per_step_time * step_count;
            // lambda^{-2} N^{3-slack} lambda / N
            let total_existence_exponent = 3.0 - 1.0 / s - epsilon - slack;
            Ok(ScalingPlan {
                d,
                s,
                epsilon,
                delta,
                slack,
                n,
                lambda_exponent,
                lambda,
                per_step_time,
                step_count_exponent,
                step_count,
                rescaled_horizon,
                total_existence_exponent,
                total_time: rescaled_horizon / (lambda * lambda),
                global: total_existence_exponent > 0.0,
                zero_crossing: 1.0 / (3.0 - epsilon - slack),
            })
        }
        2 => {
            let lambda_exponent = (1.0 - s) / s;
            let lambda = n.powf(lambda_exponent);
            let per_step_time = lambda.powf(-delta);
            let rescaled_horizon = n.powf(1.0 - slack) * lambda.sqrt();
            let step_count = rescaled_horizon / per_step_time;
            let step_count_exponent = 1.0 - slack + lambda_exponent * (0.5 + delta);
            let total_existence_exponent = 2.5 - 1.5 / s - slack;
            Ok(ScalingPlan {
                d,
                s,
                epsilon: 0.0,
                delta,
                slack,
                n,
                lambda_exponent,
                lambda,
                per_step_time,
                step_count_exponent,
                step_count,
                rescaled_horizon,
                total_existence_exponent,
                total_time: rescaled_horizon / (lambda * lambda),
                global: total_existence_exponent > 0.0,
                zero_crossing: 1.5 / (2.5 - slack),
            })
        }
        _ => Err(invalid("dimension", format!("{d} is not 1 or 2"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{NormKind, TorusGeometry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thresholds() {
        let no_loss = BudgetOptions {
            epsilon: 0.0,
            delta: 0.1,
            slack: 0.0,
        };
        let p = gwp_budget(1, 1.0 / 3.0, 64.0, no_loss).unwrap();
        assert!(p.total_existence_exponent.abs() < 1e-12);
        assert!(!p.global);
        assert!((p.zero_crossing - 1.0 / 3.0).abs() < 1e-15);
        let p = gwp_budget(2, 0.6, 64.0, no_loss).unwrap();
        assert!(p.total_existence_exponent.abs() < 1e-12);
        let p = gwp_budget(2, 2.0 / 3.0, 64.0, no_loss).unwrap();
        assert!((p.total_existence_exponent - 0.25).abs() < 1e-12);
        assert!(gwp_budget(1, 1.2, 4.0, no_loss).is_err());
    }

    #[test]
    fn budget_consistency() {
        let opts = BudgetOptions::default();
        for d in [1, 2] {
            let p = gwp_budget(d, 0.7, 32.0, opts).unwrap();
            let t = p.total_time.ln() / 32f64.ln();
            assert!((t - p.total_existence_exponent).abs() < 1e-9);
            let c = p.step_count.ln() / 32f64.ln();
            assert!((c - p.step_count_exponent).abs() < 1e-9);
        }
    }

    #[test]
    fn rescale_invariance() {
        let g = TorusGeometry::new(2, &[0.9], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = SpectralField::random(&g, 4, &mut rng, |_| 1.0);
        let v = rescale(&u, 7.5).unwrap();
        let (a, b) = (u.norm(NormKind::L2), v.norm(NormKind::L2));
        assert!((a - b).abs() < 1e-12 * a);
        assert_eq!(rescale(&u, 1.0).unwrap(), u);
        let w = SpectralField::plane_wave(&g, 4, [3, -2], Complex64::new(0.5, 0.1)).unwrap();
        let ws = rescale(&w, 4.0).unwrap();
        let ratio = ws.norm(NormKind::DotHs(0.6)) / w.norm(NormKind::DotHs(0.6));
        assert!((ratio - 4f64.powf(-0.6)).abs() < 1e-12);
    }
}
