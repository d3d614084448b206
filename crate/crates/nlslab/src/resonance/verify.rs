use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::census::{check_guard, ModeTable};
use super::classify::{classify4, classify6};
use super::lattice::{for_each_quadruple, for_each_sextuple, quadruple_estimate, sextuple_estimate, Square};
use super::symbols::SymbolParams;
use crate::error::{invalid, Result};
use crate::spectral::TorusGeometry;

/// Regions with a claimed size bound on the multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundRegion {
    /// Resonant sextuples whose two highs sit in opposite slots: `|M̄6| ≲ m(N1*)N1*·m(N3*)N3*`.
    #[serde(rename = "i")]
    I,
    /// Two opposite highs with `|k1+k2| ≲ (N3*)²/N1*` and `N3* ≪ N`: `|M̄6| ≲ (N3*)²`.
    #[serde(rename = "ii")]
    II,
    /// Four comparable highs pairing off to within `N5*`: `|M̄6| ≲ m(N1*)N1*·N5*`.
    #[serde(rename = "iii")]
    III,
    /// Four comparable highs with comparable pair sums `N12 ≫ N5*`: `|M̄6| ≲ m(N1*)N1*·N12`.
    #[serde(rename = "iv")]
    IV,
    /// Non-resonant sextuples: `|M6| ≲ |Ω6|`.
    #[serde(rename = "nonresonant")]
    NonResonant,
    #[serde(rename = "2d-resonant")]
    TwoDResonant,
    #[serde(rename = "2d-nonresonant")]
    TwoDNonresonant,
    #[serde(rename = "sigma6")]
    Sigma6,
    #[serde(rename = "sigma4")]
    Sigma4,
}

impl BoundRegion {
    pub const ONE_D: [BoundRegion; 6] = [
        BoundRegion::I,
        BoundRegion::II,
        BoundRegion::III,
        BoundRegion::IV,
        BoundRegion::NonResonant,
        BoundRegion::Sigma6,
    ];
    pub const TWO_D: [BoundRegion; 3] = [
        BoundRegion::TwoDResonant,
        BoundRegion::TwoDNonresonant,
        BoundRegion::Sigma4,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            BoundRegion::I => "i",
            BoundRegion::II => "ii",
            BoundRegion::III => "iii",
            BoundRegion::IV => "iv",
            BoundRegion::NonResonant => "nonresonant",
            BoundRegion::TwoDResonant => "2d-resonant",
            BoundRegion::TwoDNonresonant => "2d-nonresonant",
            BoundRegion::Sigma6 => "sigma6",
            BoundRegion::Sigma4 => "sigma4",
        }
    }

    pub fn parse(tag: &str) -> Result<Self> {
        Self::ONE_D
            .iter()
            .chain(Self::TWO_D.iter())
            .copied()
            .find(|r| r.tag() == tag)
            .ok_or_else(|| invalid("region", format!("unknown case tag {tag:?}")))
    }

    pub fn dim(&self) -> usize {
        if Self::TWO_D.contains(self) {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxRatioReport {
    pub region: String,
    pub threshold: f64,
    pub kmax: i64,
    pub gap: f64,
    pub s: f64,
    /// Canonical tuples in the region.
    pub count: u64,
    pub sup_ratio: f64,
    pub witness: Vec<i64>,
    /// Set when the region holds no tuple at these parameters.
    pub warning: Option<String>,
}

#[derive(Clone)]
struct Sup {
    count: u64,
    sup: f64,
    witness: Vec<i64>,
}

impl Sup {
    fn new() -> Self {
        Self {
            count: 0,
            sup: 0.0,
            witness: Vec::new(),
        }
    }

    fn push(&mut self, ratio: f64, witness: impl FnOnce() -> Vec<i64>) {
        self.count += 1;
        if ratio > self.sup || self.witness.is_empty() {
            self.sup = self.sup.max(ratio);
            self.witness = witness();
        }
    }

    fn merge(mut self, o: &Sup) -> Sup {
        self.count += o.count;
        if o.sup > self.sup {
            self.sup = o.sup;
            self.witness = o.witness.clone();
        } else if self.witness.is_empty() {
            self.witness = o.witness.clone();
        }
        self
    }
}

fn merge_all(parts: Vec<Vec<Sup>>, len: usize) -> Vec<Sup> {
    parts.into_iter().fold(vec![Sup::new(); len], |acc, p| {
        acc.into_iter().zip(&p).map(|(a, b)| a.merge(b)).collect()
    })
}

/// Sup of `|symbol|/bound` over every region of the geometry's dimension, in one sweep.
pub fn verify_all(geom: &TorusGeometry, kmax: i64, params: &SymbolParams) -> Result<Vec<MaxRatioReport>> {
    if geom.dim() != params.dim {
        return Err(invalid("dimension", "geometry and symbol parameters disagree"));
    }
    let (regions, sups): (&[BoundRegion], Vec<Sup>) = if params.dim == 1 {
        check_guard(sextuple_estimate(kmax))?;
        (&BoundRegion::ONE_D, sweep_1d(geom, kmax, params))
    } else {
        check_guard(quadruple_estimate(kmax))?;
        (&BoundRegion::TWO_D, sweep_2d(geom, kmax, params))
    };
    Ok(regions
        .iter()
        .zip(sups)
        .map(|(r, s)| MaxRatioReport {
            region: r.tag().to_string(),
            threshold: params.threshold(),
            kmax,
            gap: params.thresholds.gap,
            s: 1.0 - params.symbol.alpha(),
            count: s.count,
            sup_ratio: s.sup,
            witness: s.witness,
            warning: (s.count == 0).then(|| format!("region {} is empty at these parameters", r.tag())),
        })
        .collect())
}

pub fn verify_multiplier_bounds(
    region: BoundRegion,
    geom: &TorusGeometry,
    kmax: i64,
    params: &SymbolParams,
) -> Result<MaxRatioReport> {
    if region.dim() != params.dim {
        return Err(invalid("region", format!("{} needs dimension {}", region.tag(), region.dim())));
    }
    Ok(verify_all(geom, kmax, params)?
        .into_iter()
        .find(|r| r.region == region.tag())
        .expect("every region is reported"))
}

fn sweep_1d(geom: &TorusGeometry, k: i64, params: &SymbolParams) -> Vec<Sup> {
    let table = ModeTable::circle(geom, k, params);
    let n = params.threshold();
    let g = params.thresholds.gap;
    let parts: Vec<Vec<Sup>> = (-k..=k)
        .into_par_iter()
        .map(|a1| {
            let mut sups = vec![Sup::new(); BoundRegion::ONE_D.len()];
            for_each_sextuple(k, a1, |t, _| {
                let idx = t.map(|v| (v + k) as usize);
                let x = idx.map(|i| table.freq[i][0]);
                let cl = classify6(x, n, &params.thresholds);
                let weighted: f64 = idx
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| if i % 2 == 0 { table.weighted[j] } else { -table.weighted[j] })
                    .sum();
                let wit = || t.to_vec();
                sups[5].push(idx.iter().map(|&i| table.m[i]).product::<f64>(), wit);
                if cl.verdict.is_nonresonant() {
                    let omega: f64 = x
                        .iter()
                        .enumerate()
                        .map(|(i, v)| if i % 2 == 0 { v * v } else { -v * v })
                        .sum();
                    sups[4].push(weighted.abs() / omega.abs(), wit);
                    return;
                }
                if !cl.verdict.is_resonant() {
                    return;
                }
                let mut order: [usize; 6] = std::array::from_fn(|i| i);
                order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
                let val = |r: usize| x[order[r]];
                let size = |r: usize| x[order[r]].abs().max(1.0);
                let parity = |r: usize| order[r] % 2;
                let m_size = |r: usize| table.m_size[idx[order[r]]];
                let mbar = weighted.abs();

                // The resonant set proper has its two highest entries in opposite slots;
                // same-slot highs are the `N2 << N1` configuration at a looser gap.
                if parity(0) != parity(1) {
                    sups[0].push(mbar / (m_size(0) * m_size(2)), wit);
                }

                if parity(0) != parity(1)
                    && size(2) <= n / g
                    && (val(0) + val(1)).abs() <= size(2) * size(2) / size(0)
                {
                    sups[1].push(mbar / (size(2) * size(2)), wit);
                }

                let odd_high = (0..4).filter(|&r| parity(r) == 0).count();
                if size(3) > size(0) / g && odd_high == 2 {
                    let o: Vec<f64> = (0..4).filter(|&r| parity(r) == 0).map(val).collect();
                    let e: Vec<f64> = (0..4).filter(|&r| parity(r) == 1).map(val).collect();
                    let p = [(o[0] + e[0]).abs(), (o[1] + e[1]).abs()];
                    let q = [(o[0] + e[1]).abs(), (o[1] + e[0]).abs()];
                    let pair = if p[0].max(p[1]) <= q[0].max(q[1]) { p } else { q };
                    let n12 = pair[0].max(pair[1]);
                    let low = pair[0].min(pair[1]);
                    if n12 <= size(4) {
                        sups[2].push(mbar / (m_size(0) * size(4)), wit);
                    } else if low > n12 / g && size(4) <= low / g {
                        sups[3].push(mbar / (m_size(0) * n12), wit);
                    }
                }
            });
            sups
        })
        .collect();
    merge_all(parts, BoundRegion::ONE_D.len())
}

fn sweep_2d(geom: &TorusGeometry, k: i64, params: &SymbolParams) -> Vec<Sup> {
    let sq = Square { k };
    let table = ModeTable::square(geom, sq, params);
    let parts: Vec<Vec<Sup>> = (0..sq.len())
        .into_par_iter()
        .map(|a1| {
            let mut sups = vec![Sup::new(); BoundRegion::TWO_D.len()];
            for_each_quadruple(sq, a1, |t, _| {
                let kv = t.map(|i| table.freq[i]);
                let cl = classify4(kv, params.threshold(), &params.thresholds);
                let wit = || t.iter().flat_map(|&i| sq.mode(i)).collect();
                let weighted =
                    table.weighted[t[0]] - table.weighted[t[1]] + table.weighted[t[2]] - table.weighted[t[3]];
                sups[2].push(t.iter().map(|&i| table.m[i]).product::<f64>(), wit);
                let tops = [table.mag[t[0]].max(1.0), table.mag[t[1]].max(1.0)];
                let comparable = !params.thresholds.much_less(tops[0].min(tops[1]), tops[0].max(tops[1]));
                if cl.verdict.is_resonant() && comparable {
                    let bound = super::census::resonant_bound(&t.map(|i| table.mag[i]), &t.map(|i| table.m_size[i]));
                    sups[0].push(weighted.abs() / bound, wit);
                } else if cl.verdict.is_nonresonant() {
                    let q = |i: usize| kv[i][0] * kv[i][0] + kv[i][1] * kv[i][1];
                    let omega = q(0) - q(1) + q(2) - q(3);
                    sups[1].push(weighted.abs() / omega.abs(), wit);
                }
            });
            sups
        })
        .collect();
    merge_all(parts, BoundRegion::TWO_D.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_bounds_are_one() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 4.0, 0.5, 4.0).unwrap();
        let r = verify_multiplier_bounds(BoundRegion::Sigma6, &g, 10, &p).unwrap();
        assert_eq!(r.sup_ratio, 1.0);
        let g2 = TorusGeometry::new(2, &[1.0], 1.0).unwrap();
        let p2 = SymbolParams::new(2, 2.0, 0.7, 4.0).unwrap();
        let r = verify_multiplier_bounds(BoundRegion::Sigma4, &g2, 3, &p2).unwrap();
        assert_eq!(r.sup_ratio, 1.0);
    }

    #[test]
    fn regions_populated_and_finite() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 4.0, 0.5, 3.0).unwrap();
        for r in verify_all(&g, 16, &p).unwrap() {
            assert!(r.sup_ratio.is_finite(), "{r:?}");
            assert!(r.count > 0, "{r:?}");
        }
    }

    #[test]
    fn region_tags_round_trip() {
        for r in BoundRegion::ONE_D.iter().chain(BoundRegion::TWO_D.iter()) {
            assert_eq!(BoundRegion::parse(r.tag()).unwrap(), *r);
        }
        assert!(BoundRegion::parse("v").is_err());
    }
}
