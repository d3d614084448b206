//! The integrated energy identity `E_I²(t) − E_I²(0) = ∫_0^t s·Λ_n(M̄_n) + Λ_{n+p-1}(M̄_big)`.
//!
//! On the Galerkin flow the collapsed `p`-slot group of `X_j` carries `P_K(|u|^{p-1}u)`, so
//! `Σ_j (−1)^j Λ_{n+p-1}(X_j D) = (n/2)·(Λ_n(D; even slot ← P_K F) − Λ_n(D; odd slot ← P_K F))`
//! with `D = ∏m + D_σ̃`. That reduced sum is exact; the brute `Γ_{n+p-1}` sum and its
//! Monte-Carlo estimate are kept as independent checks.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lambda::{direct_sum, monte_carlo_sum};
use super::{energy, mass, EnergyEvaluator};
use crate::error::{invalid, Error, Result};
use crate::resonance::{KVec, SymbolParams, TupleValues};
use crate::spectral::{power_nonlinearity, Mode, SpectralField};

/// Largest number of free-slot combinations the brute `Γ_{n+p-1}` sum may visit.
pub const BRUTE_GUARD: f64 = 2e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum BigTermMethod {
    /// Slot substitution of the projected nonlinearity (exact on any lattice).
    Reduced,
    /// Exhaustive `Γ_{n+p-1}` sum; falls back to Monte-Carlo above [`BRUTE_GUARD`].
    Brute { fallback_samples: usize, seed: u64 },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub value: Complex64,
    pub std_err: f64,
    pub samples: usize,
}

/// All identity terms at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentitySample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub e_i1: f64,
    /// `s·Λ_n(σ̃_n)`
    pub correction: f64,
    pub e_i2: f64,
    /// `Λ_n(M̄_n)`, without the sign.
    pub lambda_mbar_n: f64,
    /// `Λ_{n+p-1}(M̄_big)`
    pub lambda_mbar_big: f64,
    /// Standard error of `lambda_mbar_big`; zero when it was summed exactly.
    pub big_std_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSeries {
    pub samples: Vec<IdentitySample>,
    pub residual: Vec<f64>,
    /// True when any big term is a Monte-Carlo estimate.
    pub monte_carlo: bool,
}

impl ResidualSeries {
    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, r| a.max(r.abs()))
    }

    pub fn last_residual(&self) -> f64 {
        self.residual.last().copied().unwrap_or(0.0)
    }
}

fn gated_big_symbol<'a>(
    u: &'a SpectralField,
    params: &SymbolParams,
) -> impl Fn(&[Mode], &[KVec]) -> Result<Complex64> + Sync + 'a {
    let n = params.base_arity();
    let w = params.collapse_width();
    let params = *params;
    move |modes: &[Mode], k: &[KVec]| {
        let mut acc = 0.0;
        let mut buf = Vec::with_capacity(n);
        for j in 1..=n {
            let merged = modes[j - 1..j - 1 + w]
                .iter()
                .fold([0i64; 2], |a, m| [a[0] + m[0], a[1] + m[1]]);
            if u.index(merged).is_none() {
                continue;
            }
            buf.clear();
            buf.extend_from_slice(&k[..j - 1]);
            buf.push(k[j - 1..j - 1 + w].iter().fold([0.0; 2], |a, x| [a[0] + x[0], a[1] + x[1]]));
            buf.extend_from_slice(&k[j - 1 + w..]);
            let v = TupleValues::from_entries(&buf, &params);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (v.prod_m + v.sigma_tilde()?);
        }
        Ok(Complex64::new(acc, 0.0))
    }
}

fn big_fields<'a>(u: &'a SpectralField, params: &SymbolParams) -> Vec<&'a SpectralField> {
    vec![u; params.base_arity() + params.collapse_width() - 1]
}

/// `Σ_j (−1)^j Λ_{n+p-1}(X_j D; u)` over the whole lattice `Γ_{n+p-1}`, keeping only tuples whose
/// merged group lies in the lattice. Display value: multiply by `i/n` for `Λ(M̄_big)`.
pub fn big_term_brute(u: &SpectralField, params: &SymbolParams) -> Result<Complex64> {
    let support = u.coefficients().iter().filter(|c| c.norm_sqr() > 0.0).count() as f64;
    let visits = support.powi((params.base_arity() + params.collapse_width() - 2) as i32);
    if visits > BRUTE_GUARD {
        return Err(Error::Budget {
            count: visits,
            guard: BRUTE_GUARD,
        });
    }
    direct_sum(&big_fields(u, params), gated_big_symbol(u, params))
}

/// Monte-Carlo estimate of [`big_term_brute`].
pub fn big_term_monte_carlo(u: &SpectralField, params: &SymbolParams, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (value, std_err) = monte_carlo_sum(&big_fields(u, params), gated_big_symbol(u, params), samples, &mut rng)?;
    Ok(MonteCarloEstimate {
        value,
        std_err,
        samples,
    })
}

impl EnergyEvaluator {
    /// Every term of the identity at one time.
    pub fn identity_sample(&self, t: f64, u: &SpectralField, method: BigTermMethod) -> Result<IdentitySample> {
        let p = *self.params();
        let n = p.base_arity() as f64;
        let s = self.sign().value();
        let nonlinear = power_nonlinearity(u, p.collapse_width());
        let sums = self.table().sums(u, Some(&nonlinear))?;
        let e_i1 = self.e_i1_checked(u, &sums)?;
        let correction = s * sums.correction.re / n;
        let i_over_n = Complex64::new(0.0, 1.0 / n);
        let (big, big_std_err) = match method {
            BigTermMethod::Reduced => (n / 2.0 * (sums.boundary_even - sums.boundary_odd), 0.0),
            BigTermMethod::Brute { fallback_samples, seed } => match big_term_brute(u, &p) {
                Ok(v) => (v, 0.0),
                Err(Error::Budget { .. }) => {
                    let e = big_term_monte_carlo(u, &p, fallback_samples, seed)?;
                    (e.value, e.std_err)
                }
                Err(e) => return Err(e),
            },
            BigTermMethod::MonteCarlo { samples, seed } => {
                let e = big_term_monte_carlo(u, &p, samples, seed)?;
                (e.value, e.std_err)
            }
        };
        Ok(IdentitySample {
            t,
            mass: mass(u),
            energy: energy(u, self.sign()),
            e_i1,
            correction,
            e_i2: e_i1 + correction,
            lambda_mbar_n: (i_over_n * sums.resonant).re,
            lambda_mbar_big: (i_over_n * big).re,
            big_std_err: big_std_err / n,
        })
    }
}

/// Cumulative integral of uniformly spaced samples, fourth order at every node.
pub(crate) fn cumulative_simpson(h: f64, f: &[f64]) -> Vec<f64> {
    let len = f.len();
    let mut out = vec![0.0; len];
    if len < 2 {
        return out;
    }
    if len == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    out[1] = if len >= 4 {
        h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
    } else {
        h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
    };
    for i in (2..len).step_by(2) {
        out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    }
    for i in (3..len).step_by(2) {
        out[i] = out[i - 3] + 3.0 * h / 8.0 * (f[i - 3] + 3.0 * f[i - 2] + 3.0 * f[i - 1] + f[i]);
    }
    out
}

/// `r(t) = E_I¹(t) − [E_I¹(0) − s(Λ_n(σ̃)(t) − Λ_n(σ̃)(0)) + ∫_0^t s·Λ(M̄_n) + Λ(M̄_big)]` on a
/// uniformly sampled trajectory of the Galerkin flow.
pub fn energy_identity_residual(
    times: &[f64],
    fields: &[SpectralField],
    evaluator: &EnergyEvaluator,
    method: BigTermMethod,
) -> Result<ResidualSeries> {
    if times.len() != fields.len() || times.is_empty() {
        return Err(invalid("trajectory", "needs matching, nonempty time and field lists"));
    }
    let h = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) || h <= 0.0 {
            return Err(invalid("trajectory", "sample times must be uniformly spaced and increasing"));
        }
    }
    let samples: Vec<IdentitySample> = times
        .iter()
        .zip(fields)
        .map(|(&t, u)| evaluator.identity_sample(t, u, method))
        .collect::<Result<_>>()?;
    let s = evaluator.sign().value();
    let rate: Vec<f64> = samples.iter().map(|x| s * x.lambda_mbar_n + x.lambda_mbar_big).collect();
    let integral = cumulative_simpson(h, &rate);
    let e0 = samples[0].e_i2;
    let residual = samples
        .iter()
        .zip(&integral)
        .map(|(x, i)| x.e_i2 - e0 - i)
        .collect();
    let monte_carlo = samples.iter().any(|x| x.big_std_err > 0.0)
        || matches!(method, BigTermMethod::MonteCarlo { .. });
    Ok(ResidualSeries {
        samples,
        residual,
        monte_carlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::Sign;
    use crate::spectral::TorusGeometry;

    #[test]
    fn cumulative_simpson_is_fourth_order() {
        let f = |t: f64| t.powi(3) - 2.0 * t;
        let exact = |t: f64| t.powi(4) / 4.0 - t * t;
        for len in [4usize, 7, 12] {
            let h = 0.1;
            let v: Vec<f64> = (0..len).map(|i| f(i as f64 * h)).collect();
            let c = cumulative_simpson(h, &v);
            for (i, x) in c.iter().enumerate() {
                assert!((x - exact(i as f64 * h)).abs() < 1e-14, "len {len} node {i}");
            }
        }
        let c = cumulative_simpson(0.5, &[0.0, 0.25, 1.0]);
        assert!((c[1] - 0.5f64.powi(3) / 3.0).abs() < 1e-15 && (c[2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_big_term_matches_brute_sum() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 1.0, 0.5, 3.0).unwrap();
        let u = SpectralField::from_modes(
            &g,
            2,
            &[([2, 0], Complex64::new(0.6, 0.2)), ([-1, 0], Complex64::new(-0.3, 0.5)), ([0, 0], 0.4.into())],
        )
        .unwrap();
        let ev = EnergyEvaluator::new(&u, &p, Sign::Defocusing).unwrap();
        let reduced = ev.identity_sample(0.0, &u, BigTermMethod::Reduced).unwrap();
        let brute = ev
            .identity_sample(0.0, &u, BigTermMethod::Brute { fallback_samples: 10, seed: 0 })
            .unwrap();
        assert_eq!(brute.big_std_err, 0.0);
        let scale = reduced.lambda_mbar_big.abs().max(1e-300);
        assert!((reduced.lambda_mbar_big - brute.lambda_mbar_big).abs() <= 1e-11 * scale);
        assert!(reduced.lambda_mbar_big != 0.0);
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 1.0, 0.5, 4.0).unwrap();
        let z = SpectralField::zeros(&g, 3);
        let ev = EnergyEvaluator::new(&z, &p, Sign::Focusing).unwrap();
        let r = energy_identity_residual(&[0.0, 0.1, 0.2], &vec![z; 3], &ev, BigTermMethod::Reduced).unwrap();
        assert!(r.residual.iter().all(|&x| x == 0.0));
        assert!(!r.monte_carlo);
    }
}
