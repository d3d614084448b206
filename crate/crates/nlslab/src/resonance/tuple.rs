use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::spectral::{mode_freq, sharp_shell, Mode, TorusGeometry};

/// Physical frequency; the second component is zero in 1d.
pub type KVec = [f64; 2];

pub fn dot(a: KVec, b: KVec) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm_sq(a: KVec) -> f64 {
    dot(a, a)
}

pub fn add(a: KVec, b: KVec) -> KVec {
    [a[0] + b[0], a[1] + b[1]]
}

/// A point of `Γ_n`: odd positions (1-based) carry `u`, even positions `ū`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTuple {
    dim: usize,
    k: Vec<KVec>,
}

impl FrequencyTuple {
    pub fn new(dim: usize, k: Vec<KVec>) -> Result<Self> {
        if !matches!(k.len(), 2 | 4 | 6 | 8 | 10) {
            return Err(invalid("tuple", format!("length {} not in {{2,4,6,8,10}}", k.len())));
        }
        if dim != 1 && dim != 2 {
            return Err(invalid("dimension", format!("{dim} is not 1 or 2")));
        }
        let s = k.iter().fold([0.0, 0.0], |acc, &x| add(acc, x));
        let scale = k.iter().map(|&x| norm_sq(x).sqrt()).fold(1.0, f64::max);
        if s[0].abs() > 1e-9 * scale || s[1].abs() > 1e-9 * scale {
            return Err(invalid("tuple", format!("entries sum to {s:?}, not zero")));
        }
        if dim == 1 && k.iter().any(|x| x[1] != 0.0) {
            return Err(invalid("tuple", "1d tuple with a second component"));
        }
        Ok(Self { dim, k })
    }

    /// Integer frequencies on the unit circle.
    pub fn from_ints(k: &[i64]) -> Result<Self> {
        Self::new(1, k.iter().map(|&x| [x as f64, 0.0]).collect())
    }

    pub fn from_modes(geom: &TorusGeometry, modes: &[Mode]) -> Result<Self> {
        Self::new(geom.dim(), modes.iter().map(|&m| mode_freq(geom, m)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn entries(&self) -> &[KVec] {
        &self.k
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.k.iter().map(|&x| norm_sq(x).sqrt()).collect()
    }

    pub fn shells(&self) -> Vec<u64> {
        self.magnitudes().into_iter().map(sharp_shell).collect()
    }

    /// Decreasing rearrangement of the shells, `N_1* >= N_2* >= …`.
    pub fn sorted_shells(&self) -> Vec<u64> {
        let mut s = self.shells();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Collapse `width` consecutive entries starting at 1-based position `j` into their sum.
    pub fn collapse(&self, j: usize, width: usize) -> Result<Self> {
        if j == 0 || j + width - 1 > self.k.len() {
            return Err(invalid("index", format!("slot {j} with width {width} out of range")));
        }
        let mut out = Vec::with_capacity(self.k.len() + 1 - width);
        out.extend_from_slice(&self.k[..j - 1]);
        out.push(self.k[j - 1..j - 1 + width].iter().fold([0.0, 0.0], |a, &b| add(a, b)));
        out.extend_from_slice(&self.k[j - 1 + width..]);
        Self::new(self.dim, out)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .k
            .iter()
            .map(|x| {
                if self.dim == 1 {
                    format!("{}", x[0])
                } else {
                    format!("({},{})", x[0], x[1])
                }
            })
            .collect();
        format!("[{}]", parts.join(", "))
    }
}

/// `Ω_n = Σ (−1)^{i+1} |k_i|²` (1-based `i`).
pub fn omega(t: &FrequencyTuple) -> f64 {
    omega_of(t.entries())
}

pub fn omega_of(k: &[KVec]) -> f64 {
    k.iter()
        .enumerate()
        .map(|(i, &x)| if i % 2 == 0 { norm_sq(x) } else { -norm_sq(x) })
        .sum()
}

/// `α_n = i Σ (−1)^j |k_j|²`, assembled independently of [`omega`].
pub fn alpha(t: &FrequencyTuple) -> Complex64 {
    let mut acc = 0.0;
    for (j, &x) in t.entries().iter().enumerate() {
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * norm_sq(x);
    }
    Complex64::new(0.0, acc)
}

/// Sohinger's resonant sextuple, scaled by `k`.
pub fn sohinger_tuple(k: i64) -> [i64; 6] {
    [5 * k, -3 * k, 6 * k, -2 * k, k, -7 * k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_examples() {
        let t = FrequencyTuple::from_ints(&sohinger_tuple(1)).unwrap();
        assert_eq!(omega(&t), 0.0);
        let t = FrequencyTuple::from_ints(&[1, -1, 1, -1, 1, -1]).unwrap();
        assert_eq!(omega(&t), 0.0);
        let t = FrequencyTuple::from_ints(&[64, -32, -16, -16, 0, 0]).unwrap();
        assert_eq!(omega(&t), 3072.0);
        assert_eq!(alpha(&t), Complex64::new(0.0, -3072.0));
    }

    #[test]
    fn rejects_off_hyperplane() {
        assert!(FrequencyTuple::from_ints(&[1, 2, 3, 4]).is_err());
        assert!(FrequencyTuple::from_ints(&[1, -1, 0]).is_err());
    }

    #[test]
    fn collapse_to_gamma_two() {
        let t = FrequencyTuple::from_ints(&[4, -1, 2, -3, 5, -7]).unwrap();
        let c = t.collapse(2, 5).unwrap();
        assert_eq!(c.entries(), &[[4.0, 0.0], [-4.0, 0.0]]);
        assert!(t.collapse(3, 5).is_err());
    }
}
