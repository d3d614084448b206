//! Truncated Taylor arithmetic, used to differentiate the smoothing symbol exactly.

use std::ops::{Add, Mul, Neg, Sub};

pub const ORDER: usize = 8;

/// Taylor coefficients `c_0 … c_ORDER` of a function of one variable about a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [f64; ORDER + 1]);

impl Jet {
    pub fn constant(c: f64) -> Self {
        let mut a = [0.0; ORDER + 1];
        a[0] = c;
        Jet(a)
    }

    /// The identity function about `x0`.
    pub fn variable(x0: f64) -> Self {
        let mut a = [0.0; ORDER + 1];
        a[0] = x0;
        a[1] = 1.0;
        Jet(a)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `d^k/dx^k` at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k] * fact
    }

    pub fn scale(self, s: f64) -> Self {
        let mut a = self.0;
        a.iter_mut().for_each(|x| *x *= s);
        Jet(a)
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Jet::constant(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    pub fn exp(self) -> Self {
        let a = self.0;
        let mut b = [0.0; ORDER + 1];
        b[0] = a[0].exp();
        for k in 1..=ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * a[j] * b[k - j];
            }
            b[k] = s / k as f64;
        }
        Jet(b)
    }

    pub fn ln(self) -> Self {
        let a = self.0;
        let mut b = [0.0; ORDER + 1];
        b[0] = a[0].ln();
        for k in 1..=ORDER {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * b[j] * a[k - j];
            }
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Jet(b)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut a = self.0;
        a.iter_mut().zip(o.0).for_each(|(x, y)| *x += y);
        Jet(a)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; ORDER + 1];
        for i in 0..=ORDER {
            for j in 0..=ORDER - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ln_derivatives() {
        let x = Jet::variable(0.7);
        let e = x.exp();
        for k in 0..=ORDER {
            assert!((e.derivative(k) - 0.7f64.exp()).abs() < 1e-12);
        }
        let l = x.ln();
        // d^k ln x = (-1)^{k+1} (k-1)! / x^k
        for k in 1..=ORDER {
            let fact: f64 = (1..k).map(|i| i as f64).product();
            let expect = if k % 2 == 1 { 1.0 } else { -1.0 } * fact / 0.7f64.powi(k as i32);
            assert!((l.derivative(k) - expect).abs() < 1e-9 * expect.abs());
        }
        let r = (x.ln().scale(3.0)).exp() - x.powi(3);
        assert!(r.0.iter().all(|c| c.abs() < 1e-12));
    }
}
