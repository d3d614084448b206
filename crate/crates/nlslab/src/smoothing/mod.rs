//! The smoothing symbol `m`, the operator `I`, mass-critical rescaling and the iteration budget.

pub mod jet;
mod scaling;

use std::ops::{Add, Mul, Sub};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::SpectralField;
use jet::Jet;

pub use scaling::{gwp_budget, rescale, BudgetOptions, ScalingPlan};

/// Vanishing derivatives at both ends of the transition step.
const STEP_ORDER: usize = 8;
const STEP_DEGREE: usize = 2 * STEP_ORDER + 1;

/// `m(ξ) = 1` for `|ξ| <= N`, `(N/|ξ|)^α` for `|ξ| >= 2N`, C^8 in between.
///
/// With `t = log2(|ξ|/N)` the symbol is `2^{-α h(t)}`, where `h = 0` for `t <= 0`, `h(t) = t`
/// for `t >= 1`, and on `[0, 1]` the slope `h'` rises from 0 to 1 over `[0, a]` through a
/// degree-17 smoothstep, plus an `(a/2)·S'(t)` bump restoring `h(1) = 1`. Keeping
/// `max h' <= 1/α` makes `m(ξ)|ξ|` nondecreasing; `a` is chosen from `α` for that.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingSymbol {
    n: f64,
    alpha: f64,
    ramp: f64,
}

impl SmoothingSymbol {
    pub fn new(n: f64, alpha: f64) -> Result<Self> {
        if !(n.is_finite() && n >= 1.0) {
            return Err(invalid("N", format!("{n} is not a finite value >= 1")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(invalid("alpha", format!("{alpha} is not a finite value >= 0")));
        }
        let ramp = if alpha > 0.0 && alpha < 1.0 {
            (0.9 * 2.0 * (1.0 / alpha - 1.0) / step_slope_max()).min(0.5)
        } else {
            0.5
        };
        Ok(Self { n, alpha, ramp })
    }

    /// The I-operator symbol for regularity `s`, i.e. `α = 1 - s`.
    pub fn for_regularity(n: f64, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(invalid("s", format!("{s} not in (0, 1)")));
        }
        Self::new(n, 1.0 - s)
    }

    pub fn threshold(&self) -> f64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ramp(&self) -> f64 {
        self.ramp
    }

    /// `m` at frequency magnitude `r = |ξ|`.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.n || self.alpha == 0.0 {
            return 1.0;
        }
        let t = (r / self.n).log2();
        if t >= 1.0 {
            return (self.n / r).powf(self.alpha);
        }
        (-self.alpha * std::f64::consts::LN_2 * self.profile(t)).exp()
    }

    /// `m(ξ)` for a physical frequency vector.
    pub fn at(&self, k: [f64; 2]) -> f64 {
        self.value((k[0] * k[0] + k[1] * k[1]).sqrt())
    }

    fn profile<T: Scalar>(&self, t: T) -> T {
        let a = self.ramp;
        let tv = t.val();
        if tv <= 0.0 {
            T::cst(0.0)
        } else if tv >= 1.0 {
            t
        } else if tv < a {
            step_integral(t.scl(1.0 / a)).scl(a) + step(t).scl(0.5 * a)
        } else {
            t - T::cst(0.5 * a) + step(t).scl(0.5 * a)
        }
    }

    /// Taylor jet of `m` about `r > 0`.
    pub fn jet(&self, r: f64) -> Jet {
        let x = Jet::variable(r);
        if self.alpha == 0.0 || r <= self.n {
            return Jet::constant(1.0);
        }
        let t = (x.ln() - Jet::constant(self.n.ln())).scale(1.0 / std::f64::consts::LN_2);
        self.profile(t)
            .scale(-self.alpha * std::f64::consts::LN_2)
            .exp()
    }

    /// Largest `|∂^a m(ξ)| |ξ|^a / m(ξ)` over a log grid of the transition annulus, `a = 0..=8`.
    pub fn derivative_constants(&self, samples: usize) -> SymbolSelfCheck {
        let lo = self.n * 1.000_001;
        let hi = self.n * 2.0 * 0.999_999;
        let mut max_c = vec![0.0f64; jet::ORDER + 1];
        for i in 0..samples.max(2) {
            let r = lo * (hi / lo).powf(i as f64 / (samples.max(2) - 1) as f64);
            let j = self.jet(r);
            let m = j.value();
            for (a, c) in max_c.iter_mut().enumerate() {
                *c = c.max(j.derivative(a).abs() * r.powi(a as i32) / m);
            }
        }
        SymbolSelfCheck {
            order: jet::ORDER,
            annulus: [lo, hi],
            samples: samples.max(2),
            max_constants: max_c,
        }
    }
}

/// Derivative-bound report for the transition annulus.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolSelfCheck {
    pub order: usize,
    pub annulus: [f64; 2],
    pub samples: usize,
    pub max_constants: Vec<f64>,
}

/// `m(ξ)` for a physical frequency vector.
pub fn m_value(xi: [f64; 2], sym: &SmoothingSymbol) -> f64 {
    sym.at(xi)
}

/// `(I f)^(k) = m(k) f̂(k)`.
pub fn apply_i(f: &SpectralField, sym: &SmoothingSymbol) -> SpectralField {
    f.apply_symbol(|k| sym.at(k).into())
}

trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn cst(c: f64) -> Self;
    fn val(&self) -> f64;
    fn scl(self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn val(&self) -> f64 {
        *self
    }
    fn scl(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Jet {
    fn cst(c: f64) -> Self {
        Jet::constant(c)
    }
    fn val(&self) -> f64 {
        self.value()
    }
    fn scl(self, s: f64) -> Self {
        self.scale(s)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn pow<T: Scalar>(x: T, n: usize) -> T {
    let mut acc = T::cst(1.0);
    for _ in 0..n {
        acc = acc * x;
    }
    acc
}

fn bernstein<T: Scalar>(x: T, k: usize, n: usize) -> T {
    (pow(x, k) * pow(T::cst(1.0) - x, n - k)).scl(binomial(n, k))
}

/// Smoothstep with vanishing derivatives of orders 1..=8 at 0 and 1 (Bernstein form).
fn step<T: Scalar>(x: T) -> T {
    let mut acc = T::cst(0.0);
    for k in STEP_ORDER + 1..=STEP_DEGREE {
        acc = acc + bernstein(x, k, STEP_DEGREE);
    }
    acc
}

/// `∫_0^x step`.
fn step_integral<T: Scalar>(x: T) -> T {
    let n = STEP_DEGREE + 1;
    let mut acc = T::cst(0.0);
    for j in STEP_ORDER + 2..=n {
        acc = acc + bernstein(x, j, n).scl((j - STEP_ORDER - 1) as f64);
    }
    acc.scl(1.0 / n as f64)
}

fn step_slope_max() -> f64 {
    binomial(STEP_DEGREE, STEP_ORDER) * (STEP_ORDER + 1) as f64 / 4f64.powi(STEP_ORDER as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints() {
        assert_eq!(step(0.0), 0.0);
        assert!((step(1.0) - 1.0).abs() < 1e-14);
        assert!((step(0.5) - 0.5).abs() < 1e-14);
        assert!((step_integral(1.0) - 0.5).abs() < 1e-14);
        // S'(1/2) from the closed form c·4^{-r}
        let d = (step(0.5 + 1e-6) - step(0.5 - 1e-6)) / 2e-6;
        assert!((d - step_slope_max()).abs() < 1e-6);
    }

    #[test]
    fn reference_values() {
        let m = SmoothingSymbol::new(8.0, 0.5).unwrap();
        assert_eq!(m.value(3.0), 1.0);
        assert_eq!(m.value(8.0), 1.0);
        assert!((m.value(32.0) - 0.5).abs() < 1e-15);
        assert!((m.value(16.0) - 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn profile_matches_outer_branches_smoothly() {
        let m = SmoothingSymbol::for_regularity(4.0, 0.4).unwrap();
        let outer = |r: f64| {
            if r < 6.0 {
                Jet::constant(1.0)
            } else {
                let x = Jet::variable(r);
                (x.ln().scale(-m.alpha()) + Jet::constant(m.alpha() * 4f64.ln())).exp()
            }
        };
        let mismatch = |r: f64, a: usize| {
            (m.jet(r).derivative(a) - outer(r).derivative(a)).abs() * r.powi(a as i32)
        };
        // Derivatives of order <= 8 agree in the limit; the gap closes at least linearly.
        for (seam, dir) in [(4.0, 1.0), (8.0, -1.0)] {
            for a in 0..=8 {
                let far = mismatch(seam * (1.0 + dir * 1e-6), a);
                let near = mismatch(seam * (1.0 + dir * 1e-7), a);
                assert!(near < 1e-6 || near < far / 5.0, "order {a} at {seam}: {far} {near}");
            }
        }
    }

    #[test]
    fn jet_value_agrees_with_direct_value() {
        let m = SmoothingSymbol::for_regularity(2.0, 0.35).unwrap();
        for i in 1..200 {
            let r = 2.0 + i as f64 * 0.01;
            assert!((m.jet(r).value() - m.value(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_constants_finite() {
        let m = SmoothingSymbol::for_regularity(16.0, 0.4).unwrap();
        let rep = m.derivative_constants(400);
        assert_eq!(rep.max_constants.len(), 9);
        assert!(rep.max_constants.iter().all(|c| c.is_finite()));
        assert!((rep.max_constants[0] - 1.0).abs() < 1e-12);
    }
}
