//! Mass, energy, the I-energies and the energy identity for the truncated flow.
//!
//! With `s = ±1` the sign of the nonlinearity (`+1` defocusing):
//!
//! * `E_I¹ = Λ_2(σ_2) + s·Λ_n(σ_n)`
//! * `E_I² = E_I¹ + s·Λ_n(σ̃_n)`
//! * `d/dt E_I² = s·Λ_n(M̄_n) + Λ_{n+p-1}(M̄_big)`
//!
//! where `n = 2 + 4/d`, `p = 1 + 4/d` and every symbol carries the prefactor of
//! [`crate::resonance::SymbolSpec::prefactor`].

mod identity;
mod lambda;
mod table;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::resonance::{SymbolName, SymbolParams, SymbolSpec};
use crate::smoothing::apply_i;
use crate::spectral::{integrate_abs_power, NormKind, SpectralField};

pub use identity::{
    big_term_brute, big_term_monte_carlo, energy_identity_residual, BigTermMethod, IdentitySample,
    MonteCarloEstimate, ResidualSeries, BRUTE_GUARD,
};
pub use lambda::{lambda_direct, lambda_eval, Strategy};
pub use table::{LambdaTable, TableSums, TABLE_GUARD};

/// Relative tolerance of the two routes to `E(Iu)`.
pub const TWO_PATH_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "focusing" => Ok(Sign::Focusing),
            "defocusing" => Ok(Sign::Defocusing),
            _ => Err(invalid("sign", format!("{s:?} is not focusing or defocusing"))),
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Focusing => "focusing",
            Sign::Defocusing => "defocusing",
        })
    }
}

pub fn mass(f: &SpectralField) -> f64 {
    f.norm(NormKind::L2).powi(2)
}

/// `½‖∇u‖² (kinetic, by Plancherel)`.
pub fn kinetic(f: &SpectralField) -> f64 {
    0.5 * f.norm(NormKind::DotHs(1.0)).powi(2)
}

/// `d/(4+2d) ∫ |u|^{2+4/d}` on an alias-free grid.
pub fn potential(f: &SpectralField) -> f64 {
    let d = f.dim();
    d as f64 / (4.0 + 2.0 * d as f64) * integrate_abs_power(f, 2 + 4 / d)
}

pub fn energy(f: &SpectralField, sign: Sign) -> f64 {
    kinetic(f) + sign.value() * potential(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub e_i1: f64,
    /// `s·Λ_n(σ̃_n)`; zero at level 1.
    pub correction: f64,
    pub e_i2: f64,
    pub sign: Sign,
}

/// Reusable evaluator of the I-energies for one lattice and one smoothing symbol.
#[derive(Clone, Debug)]
pub struct EnergyEvaluator {
    table: LambdaTable,
    sign: Sign,
}

impl EnergyEvaluator {
    pub fn new(field: &SpectralField, params: &SymbolParams, sign: Sign) -> Result<Self> {
        Ok(Self {
            table: LambdaTable::build(field.geometry(), field.cutoff(), params)?,
            sign,
        })
    }

    pub fn table(&self) -> &LambdaTable {
        &self.table
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn params(&self) -> &SymbolParams {
        self.table.params()
    }

    /// `Λ_2(σ_2)` by direct summation, prefactor included.
    pub fn lambda2(&self, f: &SpectralField) -> Result<f64> {
        let spec = SymbolSpec::new(SymbolName::Sigma2, *self.params())?;
        Ok(lambda_eval(&spec, &[f, f], Strategy::Direct)?.re)
    }

    fn n(&self) -> f64 {
        self.params().base_arity() as f64
    }

    /// `E(Iu)` computed as `Λ_2(σ_2) + s·Λ_n(σ_n)`, checked against `energy(apply_I(u))`.
    pub fn e_i1_checked(&self, f: &SpectralField, sums: &TableSums) -> Result<f64> {
        let via_lambda = self.lambda2(f)? + self.sign.value() * sums.potential.re / self.n();
        let smoothed = apply_i(f, &self.params().symbol);
        let k = kinetic(&smoothed);
        let v = potential(&smoothed);
        let direct = k + self.sign.value() * v;
        let scale = k + v;
        if (via_lambda - direct).abs() > TWO_PATH_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Consistency(format!(
                "E(Iu) = {direct:e} directly but {via_lambda:e} from the Λ decomposition"
            )));
        }
        Ok(via_lambda)
    }

    pub fn report(&self, t: f64, f: &SpectralField, level: u8) -> Result<EnergyReport> {
        if level != 1 && level != 2 {
            return Err(invalid("level", format!("{level} is not 1 or 2")));
        }
        let sums = self.table.sums(f, None)?;
        let e_i1 = self.e_i1_checked(f, &sums)?;
        let correction = if level == 2 {
            self.sign.value() * sums.correction.re / self.n()
        } else {
            0.0
        };
        Ok(EnergyReport {
            t,
            mass: mass(f),
            energy: energy(f, self.sign),
            e_i1,
            correction,
            e_i2: e_i1 + correction,
            sign: self.sign,
        })
    }
}

/// One-shot I-energy report with the default gap factor 4.
pub fn modified_energy(f: &SpectralField, level: u8, n: f64, s: f64, sign: Sign) -> Result<EnergyReport> {
    let params = SymbolParams::new(f.dim(), n, s, 4.0)?;
    EnergyEvaluator::new(f, &params, sign)?.report(0.0, f, level)
}

/// `Λ_n(c·D_σ̃)` by direct summation through the quotient route `−M̃_n/α_n`.
///
/// Resonant tuples with `Ω = 0` have no quotient; there `σ̃` is `−∏m` by continuity of the
/// resonant branch.
pub fn correction_via_quotient(f: &SpectralField, params: &SymbolParams) -> Result<Complex64> {
    use crate::resonance::{sigma_tilde_via_quotient, FrequencyTuple};
    let n = params.base_arity();
    let fields = vec![f; n];
    lambda_direct(&fields, |k| {
        let t = FrequencyTuple::new(params.dim, k.to_vec())?;
        match sigma_tilde_via_quotient(&t, params)? {
            Some(v) => Ok(v),
            None => {
                let prod: f64 = k.iter().map(|&x| params.symbol.at(x)).product();
                Ok(Complex64::new(-prod / n as f64, 0.0))
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGeometry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn mass_and_energy_of_plane_wave() {
        let g = TorusGeometry::circle(1.0).unwrap();
        assert_eq!(mass(&SpectralField::zeros(&g, 3)), 0.0);
        let u = SpectralField::plane_wave(&g, 3, [1, 0], 1.0.into()).unwrap();
        assert!((mass(&u) - 2.0 * PI).abs() < 1e-13);
        assert!((energy(&u, Sign::Defocusing) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((energy(&u, Sign::Focusing) - 2.0 * PI / 3.0).abs() < 1e-13);
        assert!((mass(&u.free_evolve(0.7)) - mass(&u)).abs() < 1e-12);
    }

    #[test]
    fn below_threshold_fields_have_no_correction() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = SpectralField::random(&g, 3, &mut rng, |_| 0.3);
        for sign in [Sign::Defocusing, Sign::Focusing] {
            let r = modified_energy(&u, 2, 3.5, 0.5, sign).unwrap();
            assert!((r.e_i1 - r.energy).abs() < 1e-12 * r.energy.abs().max(1.0));
            assert_eq!(r.correction, 0.0);
            assert_eq!(r.e_i2, r.e_i1 + r.correction);
        }
    }

    #[test]
    fn correction_two_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (g, cutoff) in [
            (TorusGeometry::circle(1.0).unwrap(), 4usize),
            (TorusGeometry::new(2, &[0.83], 1.0).unwrap(), 3),
        ] {
            let p = SymbolParams::new(g.dim(), 1.5, 0.5, 3.0).unwrap();
            let u = SpectralField::random(&g, cutoff, &mut rng, |_| 0.2);
            let ev = EnergyEvaluator::new(&u, &p, Sign::Defocusing).unwrap();
            let table = ev.report(0.0, &u, 2).unwrap().correction;
            let quotient = correction_via_quotient(&u, &p).unwrap();
            assert!(quotient.im.abs() <= 1e-10 * quotient.norm().max(1e-300));
            assert!((table - quotient.re).abs() <= 1e-10 * table.abs(), "{table} vs {quotient}");
            assert!(table != 0.0);
        }
    }

    #[test]
    fn sign_parses() {
        assert_eq!("focusing".parse::<Sign>().unwrap(), Sign::Focusing);
        assert!("both".parse::<Sign>().is_err());
        assert_eq!(Sign::Defocusing.to_string(), "defocusing");
    }
}
