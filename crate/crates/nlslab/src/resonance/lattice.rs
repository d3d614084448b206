//! Enumeration of `Γ_n` on a truncated integer lattice, one representative per orbit of the
//! permutations within the odd slots and within the even slots.
//!
//! Odd entries are sorted nonincreasing, even entries likewise (2d modes compare by their
//! row-major index). The orbit size is the number of distinct reorderings of each side.

use crate::spectral::Mode;

/// Distinct orderings of a sorted list.
fn arrangements<T: PartialEq>(v: &[T]) -> u64 {
    let mut total: u64 = (1..=v.len() as u64).product();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        total /= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    total
}

/// Canonical sextuples `(a1, b1, a2, b2, a3, b3)` with `a1 >= a2 >= a3`, `b1 >= b2 >= b3`,
/// all in `[-k, k]`, visited for a fixed leading entry `a1`.
pub fn for_each_sextuple(k: i64, a1: i64, mut f: impl FnMut([i64; 6], u64)) {
    for a2 in -k..=a1 {
        for a3 in -k..=a2 {
            let sa = a1 + a2 + a3;
            let pa = arrangements(&[a1, a2, a3]);
            for b1 in -k..=k {
                let r = sa + b1;
                // b3 = -(r + b2) must lie in [-k, b2]
                let lo = (-k).max(-k - r).max((-r + 1).div_euclid(2));
                let hi = b1.min(k - r);
                for b2 in lo..=hi {
                    let b3 = -(r + b2);
                    let pb = arrangements(&[b1, b2, b3]);
                    f([a1, b1, a2, b2, a3, b3], pa * pb);
                }
            }
        }
    }
}

/// Leading entries in enumeration order, the unit of parallel work.
pub fn sextuple_leads(k: i64) -> Vec<i64> {
    (-k..=k).collect()
}

/// Number of canonical sextuples visited, roughly `(2k+1)^5 / 36`.
pub fn sextuple_estimate(k: i64) -> f64 {
    (2.0 * k as f64 + 1.0).powi(5) / 36.0
}

/// Exact count of `Γ_6 ∩ [-k, k]^6` by polynomial convolution, independent of the enumerator.
pub fn gamma_count(k: i64, n: usize) -> u128 {
    let width = (2 * k + 1) as usize;
    let mut poly = vec![1u128];
    for _ in 0..n - 1 {
        let mut next = vec![0u128; poly.len() + width - 1];
        for (i, &c) in poly.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for j in 0..width {
                next[i + j] += c;
            }
        }
        poly = next;
    }
    // poly[i] counts sums equal to i - (n-1)k; the last entry must equal minus that sum.
    let offset = (n as i64 - 1) * k;
    (-k..=k).map(|last| poly[(-last + offset) as usize]).sum()
}

/// 2d lattice helper: modes with `|n_a| <= k` in row-major order.
#[derive(Clone, Copy, Debug)]
pub struct Square {
    pub k: i64,
}

impl Square {
    pub fn side(&self) -> i64 {
        2 * self.k + 1
    }

    pub fn len(&self) -> usize {
        (self.side() * self.side()) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mode(&self, i: usize) -> Mode {
        let s = self.side();
        [i as i64 / s - self.k, i as i64 % s - self.k]
    }

    pub fn index(&self, m: Mode) -> Option<usize> {
        if m[0].abs() > self.k || m[1].abs() > self.k {
            return None;
        }
        Some(((m[0] + self.k) * self.side() + m[1] + self.k) as usize)
    }
}

/// Canonical quadruples `(a1, b1, a2, b2)` of mode indices with `a1 >= a2`, `b1 >= b2`,
/// for a fixed leading index `a1`.
pub fn for_each_quadruple(sq: Square, a1: usize, mut f: impl FnMut([usize; 4], u64)) {
    let ma = sq.mode(a1);
    for a2 in 0..=a1 {
        let mb = sq.mode(a2);
        let pa = if a1 == a2 { 1 } else { 2 };
        for b1 in 0..sq.len() {
            let mc = sq.mode(b1);
            let md = [-(ma[0] + mb[0] + mc[0]), -(ma[1] + mb[1] + mc[1])];
            if let Some(b2) = sq.index(md) {
                if b2 <= b1 {
                    let pb = if b1 == b2 { 1 } else { 2 };
                    f([a1, b1, a2, b2], pa * pb);
                }
            }
        }
    }
}

pub fn quadruple_estimate(k: i64) -> f64 {
    ((2.0 * k as f64 + 1.0).powi(2)).powi(3) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sextuple_orbits_cover_gamma6() {
        for k in [1, 2, 3, 5] {
            let mut total = 0u128;
            for a1 in sextuple_leads(k) {
                for_each_sextuple(k, a1, |t, w| {
                    assert_eq!(t.iter().sum::<i64>(), 0);
                    assert!(t.iter().all(|x| x.abs() <= k));
                    total += w as u128;
                });
            }
            assert_eq!(total, gamma_count(k, 6));
        }
    }

    #[test]
    fn brute_gamma_count() {
        let k = 2i64;
        let mut c = 0u128;
        for a in -k..=k {
            for b in -k..=k {
                for d in -k..=k {
                    if (a + b + d).abs() <= k {
                        c += 1;
                    }
                }
            }
        }
        assert_eq!(gamma_count(k, 4), c);
    }

    #[test]
    fn quadruple_orbits_cover_gamma4() {
        let sq = Square { k: 2 };
        let mut total = 0u64;
        for a1 in 0..sq.len() {
            for_each_quadruple(sq, a1, |_, w| total += w);
        }
        let mut brute = 0u64;
        for a in 0..sq.len() {
            for b in 0..sq.len() {
                for c in 0..sq.len() {
                    let (x, y, z) = (sq.mode(a), sq.mode(b), sq.mode(c));
                    if sq.index([-(x[0] + y[0] + z[0]), -(x[1] + y[1] + z[1])]).is_some() {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(total, brute);
    }
}
