use serde::{Deserialize, Serialize};

use super::tuple::{norm_sq, FrequencyTuple, KVec};
use crate::error::{invalid, Error, Result};

/// Gap factor `G` behind the comparisons `A ≪ B ⇔ A <= B/G` and `A ∼ B ⇔ B/G < A <= G·B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub gap: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { gap: 4.0 }
    }
}

impl Thresholds {
    pub fn new(gap: f64) -> Result<Self> {
        if !(gap.is_finite() && gap > 1.0) {
            return Err(invalid("gap_factor", format!("{gap} must exceed 1")));
        }
        Ok(Self { gap })
    }

    pub fn much_less(&self, a: f64, b: f64) -> bool {
        a <= b / self.gap
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResonantCase {
    I,
    II,
    III,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// Top conjugated frequency far below the top unconjugated one.
    N2LlN1,
    /// Three high frequencies over three low ones.
    N3GgN4,
    /// Two comparable highs of opposite sign with a large sum.
    Bilinear,
    /// Four comparable highs split three to one, separated by signs or sizes.
    Signs,
    /// 2d: both highs on the same side of the conjugation pattern.
    Atilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    BelowThreshold,
    Resonant(ResonantCase),
    NonResonant(Rule),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::BelowThreshold => "below-threshold",
            Verdict::Resonant(ResonantCase::I) => "resonant-i",
            Verdict::Resonant(ResonantCase::II) => "resonant-ii",
            Verdict::Resonant(ResonantCase::III) => "resonant-iii",
            Verdict::NonResonant(Rule::N2LlN1) => "Lemma41-N2llN1",
            Verdict::NonResonant(Rule::N3GgN4) => "Lemma41-N3ggN4",
            Verdict::NonResonant(Rule::Bilinear) => "Lemma42-bilinear",
            Verdict::NonResonant(Rule::Signs) => "Lemma43-signs",
            Verdict::NonResonant(Rule::Atilde) => "2d-Atilde",
        }
    }

    pub fn all_labels(n: usize) -> Vec<Verdict> {
        use Verdict::*;
        if n == 4 {
            vec![BelowThreshold, Resonant(ResonantCase::I), NonResonant(Rule::Atilde)]
        } else {
            vec![
                BelowThreshold,
                Resonant(ResonantCase::I),
                Resonant(ResonantCase::II),
                Resonant(ResonantCase::III),
                NonResonant(Rule::N2LlN1),
                NonResonant(Rule::N3GgN4),
                NonResonant(Rule::Bilinear),
                NonResonant(Rule::Signs),
            ]
        }
    }

    pub fn is_upsilon(&self) -> bool {
        !matches!(self, Verdict::BelowThreshold)
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self, Verdict::Resonant(_))
    }

    pub fn is_nonresonant(&self) -> bool {
        matches!(self, Verdict::NonResonant(_))
    }
}

/// The quantities behind a verdict.
///
/// `lhs`/`rhs` is the structural comparison last examined (for instance `|k1+k2|` against
/// `(N3*)²/N1*`). For non-resonant verdicts `main - err <= |Ω|` is a certified lower bound and
/// `scale` is the size the corresponding lemma promises for `|Ω|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub lhs: f64,
    pub rhs: f64,
    pub main: f64,
    pub err: f64,
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub witness: Witness,
}

/// Classify a tuple of `Γ_6` (1d) or `Γ_4` (2d) relative to the threshold `n`.
pub fn classify(t: &FrequencyTuple, n: f64, th: &Thresholds) -> Result<Classification> {
    match t.len() {
        6 if t.dim() == 1 => {
            let e = t.entries();
            Ok(classify6([e[0][0], e[1][0], e[2][0], e[3][0], e[4][0], e[5][0]], n, th))
        }
        6 => Err(Error::Unsupported("six-frequency classification is one-dimensional".into())),
        4 => {
            let e = t.entries();
            Ok(classify4([e[0], e[1], e[2], e[3]], n, th))
        }
        other => Err(invalid("tuple", format!("classification needs n in {{4, 6}}, got {other}"))),
    }
}

fn size(x: f64) -> f64 {
    x.abs().max(1.0)
}

fn order_desc(a: &f64, b: &f64) -> std::cmp::Ordering {
    b.abs().total_cmp(&a.abs()).then(b.total_cmp(a))
}

/// A main term certifies `|Ω| >= main - err >= main/2 > 0`.
fn certified(main: f64, err: f64) -> bool {
    main > 0.0 && main >= 2.0 * err
}

/// 1d sextuple classifier. Entries alternate `u, ū, u, ū, u, ū`.
pub fn classify6(x: [f64; 6], n: f64, th: &Thresholds) -> Classification {
    let top = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut w = Witness {
        lhs: top,
        rhs: n,
        ..Witness::default()
    };
    if top <= n {
        return Classification {
            verdict: Verdict::BelowThreshold,
            witness: w,
        };
    }
    let mut odd = [x[0], x[2], x[4]];
    let mut even = [x[1], x[3], x[5]];
    odd.sort_by(order_desc);
    even.sort_by(order_desc);
    // Ω only changes sign when the two sides swap, so let the larger top lead.
    if even[0].abs() > odd[0].abs() {
        std::mem::swap(&mut odd, &mut even);
    }
    let [k1, k3, k5] = odd;
    let [k2, k4, k6] = even;
    let mut all = [(k1, 0u8), (k2, 1), (k3, 0), (k4, 1), (k5, 0), (k6, 1)];
    all.sort_by(|a, b| order_desc(&a.0, &b.0).then(a.1.cmp(&b.1)));
    let s: [f64; 6] = std::array::from_fn(|i| size(all[i].0));
    let ll = |a: f64, b: f64| th.much_less(a, b);
    let nonres = |rule, w| Classification {
        verdict: Verdict::NonResonant(rule),
        witness: w,
    };

    if ll(size(k2), size(k1)) {
        let main = k1 * k1 + k3 * k3 + k5 * k5;
        let err = k2 * k2 + k4 * k4 + k6 * k6;
        w = Witness {
            lhs: size(k2),
            rhs: size(k1),
            main,
            err,
            scale: s[0] * s[0],
        };
        if certified(main, err) {
            return nonres(Rule::N2LlN1, w);
        }
    }

    if ll(s[3], s[2]) {
        let ones = all[..3].iter().filter(|e| e.1 == 1).count();
        if ones == 1 || ones == 2 {
            let lone = if ones == 1 { 1 } else { 0 };
            let pair: Vec<f64> = all[..3].iter().filter(|e| e.1 != lone).map(|e| e.0).collect();
            let (a, b) = (pair[0], pair[1]);
            let mut same = 0.0;
            let mut other = 0.0;
            for e in &all[3..] {
                if e.1 != lone {
                    same += e.0 * e.0;
                } else {
                    other += e.0 * e.0;
                }
            }
            let e_b: f64 = all[3..].iter().map(|e| e.0.abs()).sum();
            let main = 2.0 * a.abs() * b.abs();
            let err = 2.0 * (a + b).abs() * e_b + e_b * e_b + same.max(other);
            w = Witness {
                lhs: s[3],
                rhs: s[2],
                main,
                err,
                scale: s[0] * s[2],
            };
            if certified(main, err) {
                return nonres(Rule::N3GgN4, w);
            }
        }
    }

    if all[0].1 != all[1].1 && ll(s[2], s[0]) && k1 * k2 < 0.0 {
        let n12 = (k1 + k2).abs();
        let bound = s[2] * s[2] / s[0];
        let main = (k1 - k2).abs() * n12;
        let err = (k3 * k3 + k5 * k5).max(k4 * k4 + k6 * k6);
        w = Witness {
            lhs: n12,
            rhs: bound,
            main,
            err,
            scale: s[0] * n12,
        };
        if n12 > th.gap * bound && certified(main, err) {
            return nonres(Rule::Bilinear, w);
        }
    }

    if !ll(s[3], s[0]) && ll(s[4], s[0]) {
        let ones = all[..4].iter().filter(|e| e.1 == 1).count();
        if ones == 1 || ones == 3 {
            let lone = if ones == 1 { 1 } else { 0 };
            let single = all[..4].iter().find(|e| e.1 == lone).unwrap().0;
            let t: Vec<f64> = all[..4].iter().filter(|e| e.1 != lone).map(|e| e.0).collect();
            let (r1, r2) = (all[4].0, all[5].0);
            let rest = r1 * r1 + r2 * r2;
            let e_b = r1.abs() + r2.abs();
            if t.iter().all(|&v| v > 0.0) || t.iter().all(|&v| v < 0.0) {
                let main = 2.0 * (t[0] * t[1] + t[0] * t[2] + t[1] * t[2]).abs();
                let err = 2.0 * (t[0] + t[1] + t[2]).abs() * e_b + e_b * e_b + rest;
                w = Witness {
                    lhs: s[3],
                    rhs: s[0],
                    main,
                    err,
                    scale: s[0] * s[0],
                };
                if certified(main, err) {
                    return nonres(Rule::Signs, w);
                }
            }
            let (i, gap) = t
                .iter()
                .map(|v| (v.abs() - single.abs()).abs())
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if gap <= s[0] / th.gap {
                let main: f64 = (0..3).filter(|&j| j != i).map(|j| t[j] * t[j]).sum();
                let err = gap * (single.abs() + t[i].abs()) + rest;
                w = Witness {
                    lhs: gap,
                    rhs: s[0],
                    main,
                    err,
                    scale: s[0] * s[0],
                };
                if certified(main, err) {
                    return nonres(Rule::Signs, w);
                }
            }
        }
    }

    let case = if !ll(s[4], s[0]) {
        ResonantCase::III
    } else if !ll(s[3], s[0]) {
        ResonantCase::II
    } else {
        ResonantCase::I
    };
    Classification {
        verdict: Verdict::Resonant(case),
        witness: w,
    }
}

fn vec_desc(a: &KVec, b: &KVec) -> std::cmp::Ordering {
    norm_sq(*b)
        .total_cmp(&norm_sq(*a))
        .then(b[0].total_cmp(&a[0]))
        .then(b[1].total_cmp(&a[1]))
}

/// 2d quadruple classifier. Entries alternate `u, ū, u, ū`.
pub fn classify4(k: [KVec; 4], n: f64, th: &Thresholds) -> Classification {
    let mags = k.map(|v| norm_sq(v).sqrt());
    let top = mags.iter().fold(0.0f64, |a, &b| a.max(b));
    if top <= n {
        return Classification {
            verdict: Verdict::BelowThreshold,
            witness: Witness {
                lhs: top,
                rhs: n,
                ..Witness::default()
            },
        };
    }
    let mut odd = [k[0], k[2]];
    let mut even = [k[1], k[3]];
    odd.sort_by(vec_desc);
    even.sort_by(vec_desc);
    if norm_sq(even[0]) > norm_sq(odd[0]) {
        std::mem::swap(&mut odd, &mut even);
    }
    let m1 = size(norm_sq(odd[0]).sqrt());
    let m3 = size(norm_sq(odd[1]).sqrt());
    let m2 = size(norm_sq(even[0]).sqrt());
    let main = norm_sq(odd[0]) + norm_sq(odd[1]);
    let err = norm_sq(even[0]) + norm_sq(even[1]);
    let witness = Witness {
        lhs: m2,
        rhs: m3,
        main,
        err,
        scale: m1 * m1,
    };
    let verdict = if !th.much_less(m3, m1) && th.much_less(m2, m3) && certified(main, err) {
        Verdict::NonResonant(Rule::Atilde)
    } else {
        Verdict::Resonant(ResonantCase::I)
    };
    Classification { verdict, witness }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::tuple::{omega_of, sohinger_tuple};

    fn c6(x: [i64; 6], n: f64, g: f64) -> Classification {
        classify6(x.map(|v| v as f64), n, &Thresholds::new(g).unwrap())
    }

    #[test]
    fn worked_examples() {
        let c = c6([64, -63, 16, -16, -1, 0], 16.0, 4.0);
        assert_eq!(c.verdict, Verdict::Resonant(ResonantCase::I));
        assert_eq!(c.witness.lhs, 1.0);
        assert_eq!(c.witness.rhs, 4.0);

        let c = c6([64, -32, -16, -16, 0, 0], 16.0, 2.0);
        assert_eq!(c.verdict, Verdict::NonResonant(Rule::N2LlN1));
        let c = c6([64, -32, -16, -16, 0, 0], 16.0, 4.0);
        assert!(c.verdict.is_nonresonant());
        assert!(c.witness.main - c.witness.err <= 3072.0);

        let c = c6(sohinger_tuple(8), 8.0, 4.0);
        assert_eq!(c.verdict, Verdict::Resonant(ResonantCase::III));
    }

    #[test]
    fn below_threshold() {
        let c = c6([3, -2, 1, -1, 0, -1], 4.0, 4.0);
        assert_eq!(c.verdict, Verdict::BelowThreshold);
    }

    #[test]
    fn certificates_hold_on_small_lattice() {
        let th = Thresholds::default();
        let r = 9i64;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        for e in -r..=r {
                            let f = -(a + b + c + d + e);
                            if f.abs() > r {
                                continue;
                            }
                            let x = [a, b, c, d, e, f].map(|v| v as f64);
                            let cl = classify6(x, 2.0, &th);
                            if cl.verdict.is_nonresonant() {
                                let k: Vec<KVec> = x.iter().map(|&v| [v, 0.0]).collect();
                                let om = omega_of(&k).abs();
                                assert!(om >= cl.witness.main - cl.witness.err, "{x:?}");
                                assert!(om > 0.0);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn two_dimensional_atilde() {
        let th = Thresholds::default();
        let c = classify4([[9.0, 0.0], [-1.0, 0.0], [-8.0, 1.0], [0.0, -1.0]], 4.0, &th);
        assert_eq!(c.verdict, Verdict::NonResonant(Rule::Atilde));
        let c = classify4([[9.0, 0.0], [-9.0, 0.0], [1.0, 1.0], [-1.0, -1.0]], 4.0, &th);
        assert_eq!(c.verdict, Verdict::Resonant(ResonantCase::I));
    }
}
