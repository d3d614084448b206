//! Named multilinear symbols.
//!
//! Every symbol is evaluated in its display normalization `D` and carries a constant prefactor
//! `c`; the multilinear functional uses `c·D`. This table is the single place where prefactors
//! are fixed:
//!
//! | symbol            | display value `D`                                    | `c`     |
//! |-------------------|------------------------------------------------------|---------|
//! | `Omega4/6`        | `Ω_n`                                                | 1       |
//! | `AlphaN`          | `α_n = −iΩ_n`                                        | 1       |
//! | `M4`, `M6`        | `S = Σ (−1)^{i+1} m²(k_i)|k_i|²`                     | `i/n`   |
//! | `Sigma2`          | `m(k1)m(k2) k1·k2`                                   | `−1/2`  |
//! | `Sigma4/6`        | `∏ m(k_i)`                                           | `1/n`   |
//! | `SigmaTilde4/6`   | `−∏m·χ_Υ + (S/Ω)·χ_{Υ∩NR}`                          | `1/n`   |
//! | `MTilde6`         | `−∏m·Ω·χ_Υ + S·χ_{Υ∩NR}`                            | `i/n`   |
//! | `MBar4`, `MBar6`  | `S·χ_{Υ∩R}`                                          | `i/n`   |
//! | `MBar6_2d/MBar10` | `Σ_j (−1)^j X_j(∏m + D[SigmaTilde])`                 | `i/n`   |
//!
//! Here `n` is the arity of the underlying quartic (2d) or sextic (1d) symbol. The sign of the
//! nonlinearity is not part of any symbol; the energy layer multiplies the potential-type terms
//! by it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classify::{classify4, classify6, Classification, Thresholds, Verdict};
use super::tuple::{dot, norm_sq, omega_of, FrequencyTuple, KVec};
use crate::error::{invalid, Error, Result};
use crate::smoothing::SmoothingSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolName {
    Omega4,
    Omega6,
    AlphaN,
    M4,
    M6,
    Sigma2,
    Sigma4,
    Sigma6,
    SigmaTilde4,
    SigmaTilde6,
    MTilde6,
    MBar6,
    MBar4,
    #[serde(rename = "MBar6_2d")]
    MBar6TwoD,
    MBar10,
}

/// Everything a symbol depends on besides the tuple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolParams {
    pub dim: usize,
    pub symbol: SmoothingSymbol,
    pub thresholds: Thresholds,
}

impl SymbolParams {
    pub fn new(dim: usize, n: f64, s: f64, gap: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid("dimension", format!("{dim} is not 1 or 2")));
        }
        Ok(Self {
            dim,
            symbol: SmoothingSymbol::for_regularity(n, s)?,
            thresholds: Thresholds::new(gap)?,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.symbol.threshold()
    }

    /// Arity of the potential term: 6 in 1d, 4 in 2d.
    pub fn base_arity(&self) -> usize {
        2 + 4 / self.dim
    }

    /// Number of consecutive arguments merged by `X_j`.
    pub fn collapse_width(&self) -> usize {
        1 + 4 / self.dim
    }
}

/// Scalars of a base tuple shared by all symbols.
#[derive(Clone, Copy, Debug)]
pub struct TupleValues {
    pub prod_m: f64,
    pub weighted: f64,
    pub omega: f64,
    pub class: Classification,
}

impl TupleValues {
    /// `k` has the base arity; `m` holds the symbol values at the entries.
    pub fn new(k: &[KVec], m: &[f64], params: &SymbolParams) -> Self {
        let n = params.threshold();
        let th = &params.thresholds;
        let class = if k.len() == 6 {
            classify6(std::array::from_fn(|i| k[i][0]), n, th)
        } else {
            classify4([k[0], k[1], k[2], k[3]], n, th)
        };
        let mut weighted = 0.0;
        let mut omega = 0.0;
        let mut prod_m = 1.0;
        for (i, (&x, &mi)) in k.iter().zip(m).enumerate() {
            let q = norm_sq(x);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            weighted += sign * mi * mi * q;
            omega += sign * q;
            prod_m *= mi;
        }
        Self {
            prod_m,
            weighted,
            omega,
            class,
        }
    }

    pub fn from_entries(k: &[KVec], params: &SymbolParams) -> Self {
        let m: Vec<f64> = k.iter().map(|&x| params.symbol.at(x)).collect();
        Self::new(k, &m, params)
    }

    /// Display value of the correction symbol.
    pub fn sigma_tilde(&self) -> Result<f64> {
        match self.class.verdict {
            Verdict::BelowThreshold => Ok(0.0),
            Verdict::Resonant(_) => Ok(-self.prod_m),
            Verdict::NonResonant(_) => {
                if self.omega == 0.0 {
                    return Err(Error::Classification {
                        tuple: format!("{:?}", self.class),
                    });
                }
                Ok(-self.prod_m + self.weighted / self.omega)
            }
        }
    }

    pub fn m_tilde(&self) -> f64 {
        match self.class.verdict {
            Verdict::BelowThreshold => 0.0,
            Verdict::Resonant(_) => -self.prod_m * self.omega,
            Verdict::NonResonant(_) => -self.prod_m * self.omega + self.weighted,
        }
    }

    pub fn m_bar(&self) -> f64 {
        if self.class.verdict.is_resonant() {
            self.weighted
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolSpec {
    pub name: SymbolName,
    pub params: SymbolParams,
}

impl SymbolSpec {
    pub fn new(name: SymbolName, params: SymbolParams) -> Result<Self> {
        use SymbolName::*;
        let two_d_only = matches!(name, Omega4 | M4 | Sigma4 | SigmaTilde4 | MBar4 | MBar6TwoD);
        let one_d_only = matches!(name, Omega6 | M6 | Sigma6 | SigmaTilde6 | MTilde6 | MBar6 | MBar10);
        if (two_d_only && params.dim != 2) || (one_d_only && params.dim != 1) {
            return Err(invalid("symbol", format!("{name:?} is not defined in dimension {}", params.dim)));
        }
        Ok(Self { name, params })
    }

    /// Required tuple length; `None` for `AlphaN`, which accepts any even length.
    pub fn arity(&self) -> Option<usize> {
        use SymbolName::*;
        Some(match self.name {
            AlphaN => return None,
            Sigma2 => 2,
            Omega4 | M4 | Sigma4 | SigmaTilde4 | MBar4 => 4,
            Omega6 | M6 | Sigma6 | SigmaTilde6 | MTilde6 | MBar6 | MBar6TwoD => 6,
            MBar10 => 10,
        })
    }

    /// The constant `c` with `Λ(symbol) = Λ(c·D)`.
    pub fn prefactor(&self) -> Complex64 {
        use SymbolName::*;
        let n = self.params.base_arity() as f64;
        match self.name {
            Omega4 | Omega6 | AlphaN => Complex64::new(1.0, 0.0),
            Sigma2 => Complex64::new(-0.5, 0.0),
            Sigma4 | Sigma6 | SigmaTilde4 | SigmaTilde6 => Complex64::new(1.0 / n, 0.0),
            M4 | M6 | MTilde6 | MBar4 | MBar6 | MBar6TwoD | MBar10 => Complex64::new(0.0, 1.0 / n),
        }
    }

    /// Display value `D` on a tuple.
    pub fn eval(&self, t: &FrequencyTuple) -> Result<Complex64> {
        if let Some(a) = self.arity() {
            if t.len() != a {
                return Err(invalid("tuple", format!("{:?} needs {a} entries, got {}", self.name, t.len())));
            }
        }
        if t.dim() != self.params.dim {
            return Err(invalid("tuple", "dimension differs from the symbol's"));
        }
        self.eval_entries(t.entries())
    }

    /// `c·D`.
    pub fn eval_scaled(&self, t: &FrequencyTuple) -> Result<Complex64> {
        Ok(self.prefactor() * self.eval(t)?)
    }

    pub(crate) fn eval_entries(&self, k: &[KVec]) -> Result<Complex64> {
        use SymbolName::*;
        let p = &self.params;
        let re = |x: f64| Ok(Complex64::new(x, 0.0));
        match self.name {
            Omega4 | Omega6 => re(omega_of(k)),
            AlphaN => Ok(Complex64::new(0.0, -omega_of(k))),
            Sigma2 => re(p.symbol.at(k[0]) * p.symbol.at(k[1]) * dot(k[0], k[1])),
            Sigma4 | Sigma6 => re(k.iter().map(|&x| p.symbol.at(x)).product()),
            M4 | M6 => re(TupleValues::from_entries(k, p).weighted),
            SigmaTilde4 | SigmaTilde6 => re(TupleValues::from_entries(k, p).sigma_tilde()?),
            MTilde6 => re(TupleValues::from_entries(k, p).m_tilde()),
            MBar4 | MBar6 => re(TupleValues::from_entries(k, p).m_bar()),
            MBar6TwoD | MBar10 => {
                let n = p.base_arity();
                let w = p.collapse_width();
                let mut acc = 0.0;
                let mut buf = Vec::with_capacity(n);
                for j in 1..=n {
                    collapse_into(k, j, w, &mut buf);
                    let v = TupleValues::from_entries(&buf, p);
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * (v.prod_m + v.sigma_tilde()?);
                }
                re(acc)
            }
        }
    }
}

fn collapse_into(k: &[KVec], j: usize, width: usize, out: &mut Vec<KVec>) {
    out.clear();
    out.extend_from_slice(&k[..j - 1]);
    let mut s = [0.0, 0.0];
    for x in &k[j - 1..j - 1 + width] {
        s[0] += x[0];
        s[1] += x[1];
    }
    out.push(s);
    out.extend_from_slice(&k[j - 1 + width..]);
}

/// `X_j(base)`: the base symbol with arguments `j … j+w−1` merged, `w = 1 + 4/d`.
#[derive(Clone, Copy, Debug)]
pub struct XSubstituted {
    pub base: SymbolSpec,
    pub j: usize,
    pub width: usize,
}

pub fn x_substitute(base: SymbolSpec, j: usize) -> Result<XSubstituted> {
    let n = base
        .arity()
        .ok_or_else(|| invalid("symbol", "AlphaN has no fixed arity"))?;
    if j == 0 || j > n {
        return Err(invalid("index", format!("j = {j} outside 1..={n}")));
    }
    Ok(XSubstituted {
        base,
        j,
        width: base.params.collapse_width(),
    })
}

impl XSubstituted {
    pub fn arity(&self) -> usize {
        self.base.arity().unwrap_or(0) + self.width - 1
    }

    /// Display value of the base symbol at the collapsed tuple.
    pub fn eval(&self, t: &FrequencyTuple) -> Result<Complex64> {
        if t.len() != self.arity() {
            return Err(invalid("tuple", format!("X_{} needs {} entries", self.j, self.arity())));
        }
        self.base.eval(&t.collapse(self.j, self.width)?)
    }
}

/// `σ̃_n` including its prefactor; zero off `Υ`.
pub fn sigma_tilde(t: &FrequencyTuple, params: &SymbolParams) -> Result<Complex64> {
    let name = if params.dim == 1 {
        SymbolName::SigmaTilde6
    } else {
        SymbolName::SigmaTilde4
    };
    SymbolSpec::new(name, *params)?.eval_scaled(t)
}

/// Second route to `σ̃_n = −M̃_n/α_n`, assembled from the multiplier and `α_n`.
///
/// `None` where `α_n` vanishes (resonant tuples with `Ω = 0`), since the quotient is then only
/// defined by continuity.
pub fn sigma_tilde_via_quotient(t: &FrequencyTuple, params: &SymbolParams) -> Result<Option<Complex64>> {
    let n = params.base_arity();
    if t.len() != n {
        return Err(invalid("tuple", format!("need {n} entries")));
    }
    let k = t.entries();
    let m: Vec<f64> = k.iter().map(|&x| params.symbol.at(x)).collect();
    let th = &params.thresholds;
    let verdict = if n == 6 {
        classify6(std::array::from_fn(|i| k[i][0]), params.threshold(), th).verdict
    } else {
        classify4([k[0], k[1], k[2], k[3]], params.threshold(), th).verdict
    };
    if !verdict.is_upsilon() {
        return Ok(Some(Complex64::new(0.0, 0.0)));
    }
    // M^1 = (i/n) Σ ± m²|k|², M^2 = σ_n α_n, both written out termwise.
    let i_over_n = Complex64::new(0.0, 1.0 / n as f64);
    let mut m1 = Complex64::new(0.0, 0.0);
    let mut a = Complex64::new(0.0, 0.0);
    for (j, (&x, &mj)) in k.iter().zip(&m).enumerate() {
        let sq = x[0] * x[0] + x[1] * x[1];
        if j % 2 == 0 {
            m1 += i_over_n * mj * mj * sq;
            a -= Complex64::new(0.0, sq);
        } else {
            m1 -= i_over_n * mj * mj * sq;
            a += Complex64::new(0.0, sq);
        }
    }
    let sigma: f64 = m.iter().product::<f64>() / n as f64;
    let m2 = a * sigma;
    let m_tilde = if verdict.is_nonresonant() { m1 + m2 } else { m2 };
    if a.im == 0.0 {
        if verdict.is_nonresonant() {
            return Err(Error::Classification { tuple: t.describe() });
        }
        return Ok(None);
    }
    Ok(Some(-m_tilde / a))
}

/// Multiplier `Σ (−1)^{i+1} m²(k_i)|k_i|²`.
pub fn m_multiplier(t: &FrequencyTuple, params: &SymbolParams) -> Result<f64> {
    if t.len() != 4 && t.len() != 6 {
        return Err(invalid("tuple", "multiplier needs n in {4, 6}"));
    }
    Ok(TupleValues::from_entries(t.entries(), params).weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::tuple::sohinger_tuple;

    fn p1(n: f64) -> SymbolParams {
        SymbolParams::new(1, n, 0.4, 4.0).unwrap()
    }

    #[test]
    fn multiplier_reduces_to_omega_below_threshold() {
        let t = FrequencyTuple::from_ints(&[3, -2, 1, -1, 0, -1]).unwrap();
        assert_eq!(m_multiplier(&t, &p1(4.0)).unwrap(), crate::resonance::omega(&t));
        let t = FrequencyTuple::from_ints(&sohinger_tuple(2)).unwrap();
        assert_eq!(m_multiplier(&t, &p1(16.0)).unwrap(), 0.0);
    }

    #[test]
    fn multiplier_termwise() {
        let p = p1(4.0);
        let t = FrequencyTuple::from_ints(&[16, -3, -2, -5, 1, -7]).unwrap();
        let m = |x: f64| p.symbol.value(x);
        let expect = m(16.0).powi(2) * 256.0 - 9.0 + 4.0 - m(5.0).powi(2) * 25.0 + 1.0 - m(7.0).powi(2) * 49.0;
        assert!((m_multiplier(&t, &p).unwrap() - expect).abs() < 1e-12);
        assert!((m(16.0) - (0.25f64).powf(0.6)).abs() < 1e-15);
    }

    #[test]
    fn sigma_tilde_vanishes_off_upsilon() {
        let t = FrequencyTuple::from_ints(&[3, -2, 1, -1, 0, -1]).unwrap();
        assert_eq!(sigma_tilde(&t, &p1(4.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mbar10_needs_ten_entries() {
        let s = SymbolSpec::new(SymbolName::MBar10, p1(2.0)).unwrap();
        let t = FrequencyTuple::from_ints(&[1, -1, 1, -1, 1, -1]).unwrap();
        assert!(s.eval(&t).is_err());
        assert!(SymbolSpec::new(SymbolName::M4, p1(2.0)).is_err());
    }

    #[test]
    fn x_substitute_constant_and_range() {
        let p = SymbolParams::new(1, 1e6, 0.5, 4.0).unwrap();
        let s6 = SymbolSpec::new(SymbolName::Sigma6, p).unwrap();
        let x = x_substitute(s6, 1).unwrap();
        let t = FrequencyTuple::from_ints(&[1, 2, 3, -4, 5, -6, 7, -8, 9, -9]).unwrap();
        assert_eq!(x.eval(&t).unwrap(), Complex64::new(1.0, 0.0));
        assert!(x_substitute(s6, 7).is_err());
        assert!(x_substitute(s6, 0).is_err());
    }
}
