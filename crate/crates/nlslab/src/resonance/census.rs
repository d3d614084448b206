use rayon::prelude::*;
use serde::Serialize;

use super::classify::{classify4, classify6, Verdict};
use super::lattice::{
    for_each_quadruple, for_each_sextuple, gamma_count, quadruple_estimate, sextuple_estimate,
    sextuple_leads, Square,
};
use super::symbols::SymbolParams;
use super::tuple::KVec;
use crate::error::{invalid, Error, Result};
use crate::spectral::{mode_freq, TorusGeometry};

/// Largest number of canonical tuples any exhaustive sweep may visit.
pub const TUPLE_GUARD: f64 = 1e9;

/// Per-mode values reused across every tuple of a sweep.
#[derive(Clone, Debug)]
pub(crate) struct ModeTable {
    pub freq: Vec<KVec>,
    pub mag: Vec<f64>,
    pub m: Vec<f64>,
    /// `m(k)²|k|²`
    pub weighted: Vec<f64>,
    /// `m(k)·max(|k|, 1)`
    pub m_size: Vec<f64>,
}

impl ModeTable {
    pub fn new(freq: Vec<KVec>, params: &SymbolParams) -> Self {
        let mag: Vec<f64> = freq.iter().map(|k| (k[0] * k[0] + k[1] * k[1]).sqrt()).collect();
        let m: Vec<f64> = mag.iter().map(|&r| params.symbol.value(r)).collect();
        let weighted = m.iter().zip(&mag).map(|(m, r)| m * m * r * r).collect();
        let m_size = m.iter().zip(&mag).map(|(m, r)| m * r.max(1.0)).collect();
        Self {
            freq,
            mag,
            m,
            weighted,
            m_size,
        }
    }

    /// 1d table indexed by `n + k`.
    pub fn circle(geom: &TorusGeometry, k: i64, params: &SymbolParams) -> Self {
        Self::new((-k..=k).map(|n| mode_freq(geom, [n, 0])).collect(), params)
    }

    pub fn square(geom: &TorusGeometry, sq: Square, params: &SymbolParams) -> Self {
        Self::new((0..sq.len()).map(|i| mode_freq(geom, sq.mode(i))).collect(), params)
    }
}

pub(crate) fn check_guard(estimate: f64) -> Result<()> {
    if estimate > TUPLE_GUARD {
        return Err(Error::Budget {
            count: estimate,
            guard: TUPLE_GUARD,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassStats {
    pub class: String,
    /// Lattice tuples, counting every reordering.
    pub count: u64,
    /// Canonical representatives visited.
    pub canonical: u64,
    pub min_abs_omega: f64,
    /// Non-resonant: `|M|/|Ω|`. Resonant: `|M|/(m(N1*)N1*·m(N3*)N3*)`. Below threshold: `|M − Ω|`.
    pub max_ratio: f64,
    /// Non-resonant only: smallest `|Ω|/scale`, the measured constant of the promised lower bound.
    pub min_constant: f64,
    pub witness_tuple: Vec<i64>,
}

impl ClassStats {
    fn new(v: Verdict) -> Self {
        Self {
            class: v.label().to_string(),
            count: 0,
            canonical: 0,
            min_abs_omega: f64::INFINITY,
            max_ratio: 0.0,
            min_constant: f64::INFINITY,
            witness_tuple: Vec::new(),
        }
    }

    fn merge(&mut self, o: &ClassStats) {
        self.count += o.count;
        self.canonical += o.canonical;
        self.min_abs_omega = self.min_abs_omega.min(o.min_abs_omega);
        self.min_constant = self.min_constant.min(o.min_constant);
        if o.max_ratio > self.max_ratio {
            self.max_ratio = o.max_ratio;
            self.witness_tuple = o.witness_tuple.clone();
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SohingerRow {
    pub scale: i64,
    pub tuple: Vec<i64>,
    pub omega: f64,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub dim: usize,
    pub threshold: f64,
    pub kmax: i64,
    pub gap: f64,
    pub s: f64,
    pub lambda: f64,
    pub gamma: Vec<f64>,
    pub total: u64,
    /// Independent count of the lattice points of `Γ_n`.
    pub expected_total: u64,
    pub classes: Vec<ClassStats>,
    /// Largest `|M|/|Ω|` over all non-resonant tuples.
    pub nonresonant_constant: f64,
    pub violation_count: u64,
    pub violations: Vec<String>,
    pub sohinger: Vec<SohingerRow>,
}

impl CensusReport {
    pub fn is_total(&self) -> bool {
        self.total == self.expected_total
    }

    pub fn passed(&self) -> bool {
        self.is_total()
            && self.violation_count == 0
            && self.sohinger.iter().all(|r| r.omega == 0.0 && r.verdict.starts_with("resonant"))
    }

    pub fn class(&self, label: &str) -> Option<&ClassStats> {
        self.classes.iter().find(|c| c.class == label)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "class",
            "count",
            "min_abs_omega",
            "max_ratio",
            "witness_tuple",
            "canonical",
            "min_constant",
        ])?;
        for c in &self.classes {
            out.write_record([
                c.class.clone(),
                c.count.to_string(),
                format_stat(c.min_abs_omega),
                format_stat(c.max_ratio),
                format!("{:?}", c.witness_tuple),
                c.canonical.to_string(),
                format_stat(c.min_constant),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn format_stat(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        String::new()
    }
}

struct Acc {
    stats: Vec<ClassStats>,
    violation_count: u64,
    violations: Vec<String>,
}

const MAX_LISTED: usize = 20;

impl Acc {
    fn new(labels: &[Verdict]) -> Self {
        Self {
            stats: labels.iter().map(|&v| ClassStats::new(v)).collect(),
            violation_count: 0,
            violations: Vec::new(),
        }
    }

    fn violation(&mut self, msg: String) {
        self.violation_count += 1;
        if self.violations.len() < MAX_LISTED {
            self.violations.push(msg);
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        for (a, b) in self.stats.iter_mut().zip(&o.stats) {
            a.merge(b);
        }
        self.violation_count += o.violation_count;
        for v in o.violations {
            if self.violations.len() < MAX_LISTED {
                self.violations.push(v);
            }
        }
        self
    }
}

fn slot(labels: &[Verdict], v: Verdict) -> usize {
    labels.iter().position(|&l| l == v).expect("verdict listed")
}

/// Exhaustive classification of `Γ_6` (1d) or `Γ_4` (2d) on the lattice with `|n_a| <= kmax`.
///
/// Parallel over the leading canonical entry; partial results are merged in enumeration order,
/// so the report does not depend on the thread count.
pub fn resonance_census(geom: &TorusGeometry, kmax: i64, params: &SymbolParams) -> Result<CensusReport> {
    if geom.dim() != params.dim {
        return Err(invalid("dimension", "geometry and symbol parameters disagree"));
    }
    if kmax < 1 {
        return Err(invalid("Kmax", format!("{kmax} < 1")));
    }
    let n_arity = params.base_arity();
    let labels = Verdict::all_labels(n_arity);
    let acc = if params.dim == 1 {
        check_guard(sextuple_estimate(kmax))?;
        census_1d(geom, kmax, params, &labels)
    } else {
        check_guard(quadruple_estimate(kmax))?;
        census_2d(geom, kmax, params, &labels)
    };
    let total: u64 = acc.stats.iter().map(|c| c.count).sum();
    let expected_total = if params.dim == 1 {
        gamma_count(kmax, 6) as u64
    } else {
        gamma_count_2d(kmax)
    };
    let nonresonant_constant = acc
        .stats
        .iter()
        .filter(|c| labels[slot_of(&labels, &c.class)].is_nonresonant())
        .map(|c| c.max_ratio)
        .fold(0.0, f64::max);
    let sohinger = if params.dim == 1 {
        (1..=kmax / 7)
            .map(|k| {
                let t = super::tuple::sohinger_tuple(k);
                let x = t.map(|v| mode_freq(geom, [v, 0])[0]);
                let c = classify6(x, params.threshold(), &params.thresholds);
                let omega: i64 = t.iter().enumerate().map(|(i, v)| if i % 2 == 0 { v * v } else { -v * v }).sum();
                SohingerRow {
                    scale: k,
                    tuple: t.to_vec(),
                    omega: omega as f64 / (geom.lambda() * geom.lambda()),
                    verdict: c.verdict.label().to_string(),
                }
            })
            .filter(|r| r.verdict != "below-threshold")
            .collect()
    } else {
        Vec::new()
    };
    Ok(CensusReport {
        dim: params.dim,
        threshold: params.threshold(),
        kmax,
        gap: params.thresholds.gap,
        s: 1.0 - params.symbol.alpha(),
        lambda: geom.lambda(),
        gamma: geom.gamma().to_vec(),
        total,
        expected_total,
        classes: acc.stats,
        nonresonant_constant,
        violation_count: acc.violation_count,
        violations: acc.violations,
        sohinger,
    })
}

fn slot_of(labels: &[Verdict], label: &str) -> usize {
    labels.iter().position(|l| l.label() == label).unwrap()
}

/// Records one tuple; `omega` is exact on integer lattices.
#[allow(clippy::too_many_arguments)]
fn record(
    acc: &mut Acc,
    labels: &[Verdict],
    cl: super::classify::Classification,
    omega: f64,
    weighted: f64,
    resonant_bound: f64,
    orbit: u64,
    witness: impl Fn() -> Vec<i64>,
) {
    let i = slot(labels, cl.verdict);
    let ratio = match cl.verdict {
        Verdict::BelowThreshold => (weighted - omega).abs(),
        Verdict::Resonant(_) => weighted.abs() / resonant_bound,
        Verdict::NonResonant(_) => {
            let w = &cl.witness;
            if omega == 0.0 {
                acc.violation(format!("{:?}: non-resonant with Ω = 0", witness()));
            } else if omega.abs() < (w.main - w.err) * (1.0 - 1e-12) {
                acc.violation(format!(
                    "{:?}: |Ω| = {} below certified {}",
                    witness(),
                    omega.abs(),
                    w.main - w.err
                ));
            }
            weighted.abs() / omega.abs()
        }
    };
    if matches!(cl.verdict, Verdict::BelowThreshold) && ratio > 1e-9 * omega.abs().max(1.0) {
        acc.violation(format!("{:?}: multiplier differs from Ω below threshold", witness()));
    }
    let st = &mut acc.stats[i];
    st.count += orbit;
    st.canonical += 1;
    st.min_abs_omega = st.min_abs_omega.min(omega.abs());
    if cl.verdict.is_nonresonant() {
        st.min_constant = st.min_constant.min(omega.abs() / cl.witness.scale);
    }
    if ratio > st.max_ratio || st.witness_tuple.is_empty() {
        if ratio > st.max_ratio {
            st.max_ratio = ratio;
        }
        st.witness_tuple = witness();
    }
}

/// `m(N1*)N1*·m(N3*)N3*` from per-entry values of `m·size`, sorted by magnitude.
pub(crate) fn resonant_bound(mags: &[f64], m_size: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..mags.len()).collect();
    idx.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    m_size[idx[0]] * m_size[idx[2]]
}

fn census_1d(geom: &TorusGeometry, k: i64, params: &SymbolParams, labels: &[Verdict]) -> Acc {
    let table = ModeTable::circle(geom, k, params);
    let integer = geom.is_integer_lattice();
    let inv_l2 = 1.0 / (geom.lambda() * geom.lambda());
    let parts: Vec<Acc> = sextuple_leads(k)
        .into_par_iter()
        .map(|a1| {
            let mut acc = Acc::new(labels);
            for_each_sextuple(k, a1, |t, orbit| {
                let idx = t.map(|v| (v + k) as usize);
                let x = idx.map(|i| table.freq[i][0]);
                let cl = classify6(x, params.threshold(), &params.thresholds);
                let scale = if integer { 1.0 } else { inv_l2 };
                let omega = t
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if i % 2 == 0 { v * v } else { -v * v })
                    .sum::<i64>() as f64
                    * scale;
                let weighted: f64 = idx
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| if i % 2 == 0 { table.weighted[j] } else { -table.weighted[j] })
                    .sum();
                let rb = if cl.verdict.is_resonant() {
                    let mags = idx.map(|i| table.mag[i]);
                    let ms = idx.map(|i| table.m_size[i]);
                    resonant_bound(&mags, &ms)
                } else {
                    1.0
                };
                record(&mut acc, labels, cl, omega, weighted, rb, orbit, || t.to_vec());
            });
            acc
        })
        .collect();
    parts.into_iter().fold(Acc::new(labels), Acc::merge)
}

fn census_2d(geom: &TorusGeometry, k: i64, params: &SymbolParams, labels: &[Verdict]) -> Acc {
    let sq = Square { k };
    let table = ModeTable::square(geom, sq, params);
    let parts: Vec<Acc> = (0..sq.len())
        .into_par_iter()
        .map(|a1| {
            let mut acc = Acc::new(labels);
            for_each_quadruple(sq, a1, |t, orbit| {
                let kv = t.map(|i| table.freq[i]);
                let cl = classify4(kv, params.threshold(), &params.thresholds);
                let q = |i: usize| kv[i][0] * kv[i][0] + kv[i][1] * kv[i][1];
                let omega = q(0) - q(1) + q(2) - q(3);
                let weighted = table.weighted[t[0]] - table.weighted[t[1]] + table.weighted[t[2]]
                    - table.weighted[t[3]];
                let rb = if cl.verdict.is_resonant() {
                    resonant_bound(&t.map(|i| table.mag[i]), &t.map(|i| table.m_size[i]))
                } else {
                    1.0
                };
                record(&mut acc, labels, cl, omega, weighted, rb, orbit, || {
                    t.iter().flat_map(|&i| sq.mode(i)).collect()
                });
            });
            acc
        })
        .collect();
    parts.into_iter().fold(Acc::new(labels), Acc::merge)
}

/// Lattice points of `Γ_4` in 2d: the 1d count per axis, multiplied.
fn gamma_count_2d(k: i64) -> u64 {
    let c = gamma_count(k, 4) as u64;
    c * c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_census_is_total_and_clean() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 4.0, 0.5, 4.0).unwrap();
        let r = resonance_census(&g, 8, &p).unwrap();
        assert!(r.is_total(), "{} vs {}", r.total, r.expected_total);
        assert_eq!(r.violation_count, 0, "{:?}", r.violations);
        assert_eq!(r.sohinger.len(), 1);
        assert!(r.passed());
        let nr = r.class("Lemma41-N2llN1").unwrap();
        assert!(nr.count > 0 && nr.min_constant > 0.0);
    }

    #[test]
    fn deterministic_across_pools() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 4.0, 0.5, 3.0).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| resonance_census(&g, 10, &p).unwrap());
        let b = resonance_census(&g, 10, &p).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn census_2d_total() {
        let g = TorusGeometry::new(2, &[0.8], 1.0).unwrap();
        let p = SymbolParams::new(2, 2.0, 0.7, 4.0).unwrap();
        let r = resonance_census(&g, 3, &p).unwrap();
        assert!(r.is_total());
        assert_eq!(r.violation_count, 0, "{:?}", r.violations);
    }

    #[test]
    fn guard_refuses_huge_sweeps() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 4.0, 0.5, 4.0).unwrap();
        assert!(matches!(resonance_census(&g, 200, &p), Err(Error::Budget { .. })));
    }
}
