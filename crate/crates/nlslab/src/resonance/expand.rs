//! Fourier-series expansion of multipliers localized to a box of frequency intervals.
//!
//! Each slot variable is normalized to `u = (k − c)/L ∈ [−½, ½]^d`. The slot factor is
//! extended from the box to a `2π`-periodic function of `u` by a Sobolev-regularized least
//! squares trigonometric fit, and the coefficients are
//!
//! `m(ξ) = ∏L · (2π)^{−nd} ∫_{[−π,π]^{nd}} e^{−iξ·u} F(u) du`,
//!
//! so that `F(u) = (1/∏L) Σ_ξ m(ξ) e^{iξ·u}` and a constant `c` has the single coefficient
//! `∏L·c`.

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use super::symbols::{SymbolName, SymbolSpec, TupleValues};
use super::tuple::{norm_sq, FrequencyTuple, KVec};
use crate::error::{invalid, Error, Result};
use crate::spectral::{mode_freq, sharp_shell, Mode, TorusGeometry};

/// Relative disagreement allowed between the two quadrature resolutions.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Guard on the number of lattice tuples enumerated inside a box.
pub const BOX_TUPLE_GUARD: f64 = 2e7;

const SOBOLEV_WEIGHT: i32 = 8;
const REGULARIZATION: f64 = 1e-28;
const RANDOM_POINTS: usize = 200;
/// Lattice tuples compared against the symbol, evenly strided.
const LATTICE_CHECKS: usize = 400;

/// Frequency intervals `I_1 … I_n` on a lattice; `centers[i]` and `lengths[i]` are physical.
///
/// `shells[i]` is the dyadic shell of the center, and every side obeys `L <= 4·N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplierBox {
    geometry: TorusGeometry,
    centers: Vec<KVec>,
    lengths: Vec<KVec>,
    shells: Vec<u64>,
}

impl MultiplierBox {
    pub fn new(geometry: &TorusGeometry, centers: Vec<KVec>, lengths: Vec<KVec>) -> Result<Self> {
        let d = geometry.dim();
        if centers.is_empty() || centers.len() != lengths.len() {
            return Err(invalid("box", "centers and lengths must be nonempty and of equal count"));
        }
        let mut shells = Vec::with_capacity(centers.len());
        for (c, l) in centers.iter().zip(&lengths) {
            if (0..d).any(|a| !(l[a].is_finite() && l[a] > 0.0 && c[a].is_finite())) {
                return Err(invalid("box", format!("interval {c:?} / {l:?} is degenerate")));
            }
            let n = sharp_shell(norm_sq(*c).sqrt());
            if (0..d).any(|a| l[a] > 4.0 * n as f64) {
                return Err(invalid("box", format!("length {l:?} exceeds 4·N = {}", 4 * n)));
            }
            shells.push(n);
        }
        Ok(Self {
            geometry: geometry.clone(),
            centers,
            lengths,
            shells,
        })
    }

    /// One-dimensional box from `(center, length)` pairs.
    pub fn intervals(geometry: &TorusGeometry, slots: &[(f64, f64)]) -> Result<Self> {
        let centers = slots.iter().map(|s| [s.0, 0.0]).collect();
        let lengths = slots.iter().map(|s| [s.1, 1.0]).collect();
        Self::new(geometry, centers, lengths)
    }

    pub fn arity(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn shells(&self) -> &[u64] {
        &self.shells
    }

    /// `∏ L_i` over slots and axes.
    pub fn volume(&self) -> f64 {
        let d = self.dim();
        self.lengths.iter().map(|l| l[..d].iter().product::<f64>()).product()
    }

    fn point(&self, slot: usize, u: KVec) -> KVec {
        let (c, l) = (self.centers[slot], self.lengths[slot]);
        let mut k = [0.0; 2];
        for a in 0..self.dim() {
            k[a] = c[a] + l[a] * u[a];
        }
        k
    }

    fn normalize(&self, slot: usize, k: KVec) -> KVec {
        let (c, l) = (self.centers[slot], self.lengths[slot]);
        let mut u = [0.0; 2];
        for a in 0..self.dim() {
            u[a] = (k[a] - c[a]) / l[a];
        }
        u
    }

    fn contains(&self, slot: usize, k: KVec) -> bool {
        let u = self.normalize(slot, k);
        const SLACK: f64 = 1e-12;
        u[..self.dim()].iter().all(|x| x.abs() <= 0.5 + SLACK)
    }

    fn slot_modes(&self, slot: usize) -> Vec<Mode> {
        let d = self.dim();
        let range = |a: usize| {
            let p = self.geometry.period_scale(a);
            let lo = ((self.centers[slot][a] - 0.5 * self.lengths[slot][a]) * p).floor() as i64 - 1;
            let hi = ((self.centers[slot][a] + 0.5 * self.lengths[slot][a]) * p).ceil() as i64 + 1;
            lo..=hi
        };
        let second = if d == 2 { range(1) } else { 0..=0 };
        let mut out = Vec::new();
        for m0 in range(0) {
            for m1 in second.clone() {
                let m = [m0, m1];
                if self.contains(slot, mode_freq(&self.geometry, m)) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Calls `f` on every lattice tuple of `Γ_n` inside the box.
    pub fn for_each_lattice_tuple(&self, mut f: impl FnMut(&[KVec]) -> Result<()>) -> Result<usize> {
        let n = self.arity();
        let modes: Vec<Vec<Mode>> = (0..n).map(|i| self.slot_modes(i)).collect();
        let count: f64 = modes[..n - 1].iter().map(|m| m.len() as f64).product();
        if count > BOX_TUPLE_GUARD {
            return Err(Error::Budget {
                count,
                guard: BOX_TUPLE_GUARD,
            });
        }
        let last: std::collections::HashSet<Mode> = modes[n - 1].iter().copied().collect();
        let mut idx = vec![0usize; n - 1];
        let mut k = vec![[0.0; 2]; n];
        let mut visited = 0;
        if modes.iter().any(|m| m.is_empty()) {
            return Ok(0);
        }
        loop {
            let mut sum = [0i64; 2];
            for (i, &j) in idx.iter().enumerate() {
                let m = modes[i][j];
                sum[0] += m[0];
                sum[1] += m[1];
                k[i] = mode_freq(&self.geometry, m);
            }
            let closing = [-sum[0], -sum[1]];
            if last.contains(&closing) {
                k[n - 1] = mode_freq(&self.geometry, closing);
                f(&k)?;
                visited += 1;
            }
            let mut slot = 0;
            loop {
                if slot == n - 1 {
                    return Ok(visited);
                }
                idx[slot] += 1;
                if idx[slot] < modes[slot].len() {
                    break;
                }
                idx[slot] = 0;
                slot += 1;
            }
        }
    }
}

/// How the slot factors combine into the symbol.
#[derive(Clone, Debug)]
enum Structure {
    /// `Σ_i ε_i g(k_i)`.
    Sum(Vec<f64>),
    /// `∏_i g(k_i)`.
    Product,
}

fn structure(spec: &SymbolSpec) -> Result<(Structure, bool, Box<dyn Fn(KVec) -> f64 + Sync>)> {
    use SymbolName::*;
    let n = spec.arity().unwrap_or(0);
    let alternating: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let sym = spec.params.symbol;
    Ok(match spec.name {
        Omega4 | Omega6 => (Structure::Sum(alternating), false, Box::new(norm_sq)),
        M4 | M6 => (
            Structure::Sum(alternating),
            false,
            Box::new(move |k| sym.at(k).powi(2) * norm_sq(k)),
        ),
        MBar4 | MBar6 => (
            Structure::Sum(alternating),
            true,
            Box::new(move |k| sym.at(k).powi(2) * norm_sq(k)),
        ),
        Sigma4 | Sigma6 => (Structure::Product, false, Box::new(move |k| sym.at(k))),
        other => {
            return Err(Error::Unsupported(format!(
                "{other:?} has no separable smooth form on a box"
            )))
        }
    })
}

/// Trigonometric extension of one slot factor: `base + Σ_a x_a e^{ia·u}` over `|a|² <= radius_sq`.
struct SlotFit {
    base: f64,
    freqs: Vec<[i64; 2]>,
    coeffs: Vec<Complex64>,
}

impl SlotFit {
    fn new(dim: usize, radius_sq: i64, base: f64) -> Self {
        let half = (radius_sq as f64).sqrt().floor() as i64;
        let second = if dim == 2 { -half..=half } else { 0..=0 };
        let freqs: Vec<[i64; 2]> = (-half..=half)
            .flat_map(|a| second.clone().map(move |b| [a, b]))
            .filter(|a| a[0] * a[0] + a[1] * a[1] <= radius_sq)
            .collect();
        Self {
            base,
            coeffs: vec![Complex64::new(0.0, 0.0); freqs.len()],
            freqs,
        }
    }

    fn zero_index(&self) -> usize {
        self.freqs.iter().position(|a| *a == [0, 0]).expect("zero frequency")
    }

    fn eval_fit(&self, u: KVec) -> Complex64 {
        self.freqs
            .iter()
            .zip(&self.coeffs)
            .map(|(a, &x)| x * Complex64::from_polar(1.0, a[0] as f64 * u[0] + a[1] as f64 * u[1]))
            .sum()
    }
}

fn chebyshev(count: usize) -> Vec<f64> {
    (0..count)
        .map(|j| 0.5 * (PI * (j as f64 + 0.5) / count as f64).cos())
        .collect()
}

fn fit_slot(dim: usize, radius_sq: i64, g: impl Fn(KVec) -> f64) -> SlotFit {
    let base = g([0.0, 0.0]);
    let mut fit = SlotFit::new(dim, radius_sq, base);
    let nodes = chebyshev(if dim == 1 { 64 } else { 40 });
    let points: Vec<KVec> = if dim == 1 {
        nodes.iter().map(|&x| [x, 0.0]).collect()
    } else {
        nodes.iter().flat_map(|&x| nodes.iter().map(move |&y| [x, y])).collect()
    };
    let unknowns = fit.freqs.len();
    let rhs: Vec<f64> = points.iter().map(|&u| g(u) - base).collect();
    let scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return fit;
    }
    let weights: Vec<f64> = fit
        .freqs
        .iter()
        .map(|a| {
            (1.0 + (a[0] * a[0] + a[1] * a[1]) as f64).powi(SOBOLEV_WEIGHT / 2)
        })
        .collect();
    let a = DMatrix::from_fn(points.len(), unknowns, |p, j| {
        let f = fit.freqs[j];
        let u = points[p];
        Complex64::from_polar(1.0, f[0] as f64 * u[0] + f[1] as f64 * u[1]) / weights[j]
    });
    let b = DVector::from_iterator(points.len(), rhs.iter().map(|&v| Complex64::new(v / scale, 0.0)));
    let svd = a.svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let v_t = svd.v_t.expect("right singular vectors");
    let mut proj = u.adjoint() * b;
    for (p, &s) in proj.iter_mut().zip(svd.singular_values.iter()) {
        *p *= s / (s * s + REGULARIZATION);
    }
    let x = v_t.adjoint() * proj;
    fit.coeffs = x
        .iter()
        .zip(&weights)
        .map(|(&c, &w)| c * scale / w)
        .collect();
    fit
}

/// Normalized Fourier coefficients of the fitted part over `[−π, π]^d` by tensor Gauss–Legendre.
fn quadrature_coefficients(fit: &SlotFit, dim: usize, nodes: usize) -> Result<Vec<Complex64>> {
    let rule = GaussLegendre::new(nodes).map_err(|e| invalid("quadrature", e.to_string()))?;
    let pairs: Vec<(f64, f64)> = rule
        .iter()
        .map(|(x, w)| (PI * *x, PI * *w / (2.0 * PI)))
        .collect();
    let grid: Vec<(KVec, f64)> = if dim == 1 {
        pairs.iter().map(|&(x, w)| ([x, 0.0], w)).collect()
    } else {
        pairs
            .iter()
            .flat_map(|&(x, wx)| pairs.iter().map(move |&(y, wy)| ([x, y], wx * wy)))
            .collect()
    };
    let values: Vec<Complex64> = grid.iter().map(|&(u, w)| fit.eval_fit(u) * w).collect();
    Ok(fit
        .freqs
        .iter()
        .map(|a| {
            grid.iter()
                .zip(&values)
                .map(|((u, _), &v)| v * Complex64::from_polar(1.0, -(a[0] as f64 * u[0] + a[1] as f64 * u[1])))
                .sum()
        })
        .collect())
}

/// Slot coefficients at two resolutions; `base` is added to the zero frequency afterwards.
fn slot_coefficients(fit: &SlotFit, dim: usize) -> Result<(Vec<Complex64>, f64)> {
    let half = fit.freqs.iter().map(|a| a[0].abs()).max().unwrap_or(0) as usize;
    let coarse_nodes = (8 * half + 8).max(2);
    if fit.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
        let mut c = fit.coeffs.clone();
        c[fit.zero_index()] += fit.base;
        return Ok((c, 0.0));
    }
    let coarse = quadrature_coefficients(fit, dim, coarse_nodes)?;
    let fine = quadrature_coefficients(fit, dim, 2 * coarse_nodes)?;
    let peak = fine.iter().fold(fit.base.abs(), |a, c| a.max(c.norm()));
    let diff = coarse
        .iter()
        .zip(&fine)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
    let rel = diff / peak.max(f64::MIN_POSITIVE);
    if rel > QUADRATURE_TOLERANCE {
        return Err(Error::Quadrature(rel));
    }
    let mut c = fine;
    c[fit.zero_index()] += fit.base;
    Ok((c, rel))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coefficient {
    /// Slot-major integer frequencies, `d` per slot.
    pub xi: Vec<i64>,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// `(r, max |m(ξ)|)` with `r = max_j |ξ_j|`.
    pub shell_maxima: Vec<(u32, f64)>,
    /// Least-squares slope `p` of `log max|m| ≈ −p·log⟨r⟩` over `r >= 2`; `None` when fewer
    /// than two shells carry nonzero coefficients.
    pub slope: Option<f64>,
    /// `sup |symbol|` over the sampled box points.
    pub sup_symbol: f64,
    /// `max |m(ξ)| / (∏L · sup|symbol|)`.
    pub max_normalized: f64,
    /// `Σ|m(ξ)| / ∏L` divided by `sup|symbol|`.
    pub abs_sum_ratio: f64,
    /// Max reconstruction error at random interior points, relative to `sup|symbol|`.
    pub reconstruction_error: f64,
    /// Same on the lattice tuples of the box, against the symbol itself.
    pub lattice_error: f64,
    pub lattice_tuples: usize,
    pub quadrature_disagreement: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierExpansion {
    pub symbol: SymbolName,
    pub trunc: u32,
    pub volume: f64,
    pub coefficients: Vec<Coefficient>,
    pub report: DecayReport,
}

impl FourierExpansion {
    /// `(1/∏L) Σ m(ξ) e^{iξ·u}` at physical slot frequencies `k`.
    pub fn reconstruct(&self, bx: &MultiplierBox, k: &[KVec]) -> Complex64 {
        let d = bx.dim();
        let half = self.coefficients.iter().flat_map(|c| c.xi.iter()).map(|a| a.abs()).max().unwrap_or(0);
        let width = (2 * half + 1) as usize;
        // phases[j·width + a + half] = e^{i a u_j}
        let mut phases = Vec::with_capacity(k.len() * d * width);
        for (i, &x) in k.iter().enumerate() {
            let u = bx.normalize(i, x);
            for &uj in &u[..d] {
                phases.extend((-half..=half).map(|a| Complex64::from_polar(1.0, a as f64 * uj)));
            }
        }
        let s: Complex64 = self
            .coefficients
            .iter()
            .map(|c| {
                c.xi.iter().enumerate().fold(c.value, |acc, (j, &a)| {
                    if a == 0 {
                        acc
                    } else {
                        acc * phases[j * width + (a + half) as usize]
                    }
                })
            })
            .sum();
        s / self.volume
    }
}

/// Expand `spec` on `bx`, keeping coefficients with `⟨ξ⟩ <= trunc`.
///
/// Resonant-part symbols (`MBar4`, `MBar6`) are only smooth where every lattice tuple of the
/// box is resonant; any other verdict is an error.
pub fn fourier_expand(spec: &SymbolSpec, bx: &MultiplierBox, trunc: u32) -> Result<FourierExpansion> {
    if trunc < 1 {
        return Err(invalid("trunc", "must be at least 1"));
    }
    let n = spec
        .arity()
        .ok_or_else(|| Error::Unsupported("symbols of variable arity".into()))?;
    if bx.arity() != n || bx.dim() != spec.params.dim {
        return Err(invalid("box", format!("needs {n} slots in dimension {}", spec.params.dim)));
    }
    let (shape, gated, g) = structure(spec)?;
    let d = bx.dim();
    let radius_sq = (trunc as i64).pow(2) - 1;
    let half = (radius_sq as f64).sqrt().floor() as i64;

    let mut gate_error = None;
    let mut lattice_values = Vec::new();
    let lattice_tuples = bx.for_each_lattice_tuple(|k| {
        if gated {
            let v = TupleValues::from_entries(k, &spec.params);
            if !v.class.verdict.is_resonant() && gate_error.is_none() {
                let t = FrequencyTuple::new(d, k.to_vec())?;
                gate_error = Some(format!("{} is {}", t.describe(), v.class.verdict.label()));
            }
        }
        lattice_values.push((k.to_vec(), spec.eval_entries(k)?));
        Ok(())
    })?;
    if let Some(msg) = gate_error {
        return Err(invalid("box", format!("resonant-part symbol is not smooth here: {msg}")));
    }

    let mut slot_tables = Vec::with_capacity(n);
    let mut disagreement = 0.0f64;
    for i in 0..n {
        let fit = fit_slot(d, radius_sq, |u| g(bx.point(i, u)));
        let (c, rel) = slot_coefficients(&fit, d)?;
        disagreement = disagreement.max(rel);
        let entries: Vec<([i64; 2], Complex64)> = fit.freqs.iter().copied().zip(c).collect();
        slot_tables.push(entries);
    }

    let volume = bx.volume();
    let zero_xi = vec![0i64; n * d];
    let mut coefficients = Vec::new();
    match &shape {
        Structure::Sum(eps) => {
            let mut zero = Complex64::new(0.0, 0.0);
            for (i, table) in slot_tables.iter().enumerate() {
                for &(a, c) in table {
                    if a == [0, 0] {
                        zero += eps[i] * c;
                        continue;
                    }
                    if (a[0] * a[0] + a[1] * a[1]) > radius_sq || c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut xi = zero_xi.clone();
                    xi[i * d..i * d + d].copy_from_slice(&a[..d]);
                    coefficients.push(Coefficient {
                        xi,
                        value: volume * eps[i] * c,
                    });
                }
            }
            coefficients.insert(
                0,
                Coefficient {
                    xi: zero_xi,
                    value: volume * zero,
                },
            );
        }
        Structure::Product => {
            let nonzero: Vec<Vec<([i64; 2], Complex64)>> = slot_tables
                .iter()
                .map(|t| t.iter().copied().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect())
                .collect();
            let mut xi = zero_xi;
            product_terms(&nonzero, 0, d, radius_sq, Complex64::new(volume, 0.0), &mut xi, &mut coefficients);
        }
    }

    let mut expansion = FourierExpansion {
        symbol: spec.name,
        trunc,
        volume,
        coefficients,
        report: DecayReport {
            shell_maxima: Vec::new(),
            slope: None,
            sup_symbol: 0.0,
            max_normalized: 0.0,
            abs_sum_ratio: 0.0,
            reconstruction_error: 0.0,
            lattice_error: 0.0,
            lattice_tuples,
            quadrature_disagreement: disagreement,
        },
    };

    let smooth = |k: &[KVec]| match &shape {
        Structure::Sum(eps) => k.iter().zip(eps).map(|(&x, e)| e * g(x)).sum::<f64>(),
        Structure::Product => k.iter().map(|&x| g(x)).product::<f64>(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut samples: Vec<(Vec<KVec>, f64)> = (0..RANDOM_POINTS)
        .map(|_| {
            let k: Vec<KVec> = (0..n)
                .map(|i| {
                    let mut u = [0.0; 2];
                    for x in u.iter_mut().take(d) {
                        *x = rng.gen_range(-0.5..=0.5);
                    }
                    bx.point(i, u)
                })
                .collect();
            let v = smooth(&k);
            (k, v)
        })
        .collect();
    samples.push(((0..n).map(|i| bx.centers[i]).collect(), smooth(&bx.centers)));
    let sup = samples
        .iter()
        .map(|(_, v)| v.abs())
        .chain(lattice_values.iter().map(|(_, v)| v.norm()))
        .fold(0.0f64, f64::max);
    let scale = sup.max(f64::MIN_POSITIVE);
    let recon = samples
        .par_iter()
        .map(|(k, v)| (expansion.reconstruct(bx, k) - v).norm())
        .reduce(|| 0.0, f64::max);
    let stride = lattice_values.len().div_ceil(LATTICE_CHECKS).max(1);
    let lattice = lattice_values
        .iter()
        .step_by(stride)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(k, v)| (expansion.reconstruct(bx, k) - v).norm())
        .reduce(|| 0.0, f64::max);

    let mut shells = vec![0.0f64; half as usize + 1];
    for c in &expansion.coefficients {
        let r = c.xi.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0) as usize;
        shells[r] = shells[r].max(c.value.norm());
    }
    let shell_maxima: Vec<(u32, f64)> = shells.iter().enumerate().map(|(r, &m)| (r as u32, m)).collect();
    let fit_points: Vec<(f64, f64)> = shell_maxima
        .iter()
        .filter(|(r, m)| *r >= 2 && *m > 0.0)
        .map(|&(r, m)| ((1.0 + (r * r) as f64).sqrt().ln(), m.ln()))
        .collect();

    let report = &mut expansion.report;
    report.slope = decay_slope(&fit_points);
    report.shell_maxima = shell_maxima;
    report.sup_symbol = sup;
    report.max_normalized = expansion
        .coefficients
        .iter()
        .map(|c| c.value.norm())
        .fold(0.0, f64::max)
        / (volume * scale);
    report.abs_sum_ratio = expansion.coefficients.iter().map(|c| c.value.norm()).sum::<f64>() / volume / scale;
    report.reconstruction_error = recon / scale;
    report.lattice_error = lattice / scale;
    Ok(expansion)
}

fn product_terms(
    slots: &[Vec<([i64; 2], Complex64)>],
    i: usize,
    d: usize,
    budget: i64,
    acc: Complex64,
    xi: &mut Vec<i64>,
    out: &mut Vec<Coefficient>,
) {
    if i == slots.len() {
        out.push(Coefficient {
            xi: xi.clone(),
            value: acc,
        });
        return;
    }
    for &(a, c) in &slots[i] {
        let cost = a[0] * a[0] + a[1] * a[1];
        if cost > budget {
            continue;
        }
        xi[i * d..i * d + d].copy_from_slice(&a[..d]);
        product_terms(slots, i + 1, d, budget - cost, acc * c, xi, out);
    }
    xi[i * d..i * d + d].iter_mut().for_each(|x| *x = 0);
}

fn decay_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::SymbolParams;

    fn circle() -> TorusGeometry {
        TorusGeometry::circle(1.0).unwrap()
    }

    /// Case-(i) resonant box: a high pair with nearly cancelling sum, four comparable low slots.
    pub(crate) fn case_i_box() -> MultiplierBox {
        MultiplierBox::intervals(
            &circle(),
            &[(64.0, 8.0), (-64.0, 8.0), (14.0, 2.0), (-14.0, 2.0), (13.0, 2.0), (-13.0, 2.0)],
        )
        .unwrap()
    }

    #[test]
    fn constant_symbol_has_only_the_zero_coefficient() {
        let params = SymbolParams::new(1, 1e6, 0.5, 4.0).unwrap();
        let spec = SymbolSpec::new(SymbolName::Sigma6, params).unwrap();
        let bx = case_i_box();
        let e = fourier_expand(&spec, &bx, 8).unwrap();
        assert_eq!(e.coefficients.len(), 1);
        assert!(e.coefficients[0].xi.iter().all(|&x| x == 0));
        assert!((e.coefficients[0].value.re - bx.volume()).abs() < 1e-12 * bx.volume());
        assert!(e.report.reconstruction_error < 1e-12);
        assert_eq!(e.report.slope, None);
    }

    #[test]
    fn resonant_box_expansion_is_accurate_and_decays() {
        let params = SymbolParams::new(1, 16.0, 0.5, 4.0).unwrap();
        let spec = SymbolSpec::new(SymbolName::MBar6, params).unwrap();
        let bx = case_i_box();
        let e = fourier_expand(&spec, &bx, 8).unwrap();
        let r = &e.report;
        assert!(r.lattice_tuples > 0);
        assert!(r.reconstruction_error < 1e-6, "{r:?}");
        assert!(r.lattice_error < 1e-6, "{r:?}");
        assert!(r.slope.unwrap() >= 6.0, "{r:?}");
        assert!(r.quadrature_disagreement <= QUADRATURE_TOLERANCE);
    }

    #[test]
    fn gate_rejects_non_resonant_boxes() {
        let params = SymbolParams::new(1, 16.0, 0.5, 4.0).unwrap();
        let spec = SymbolSpec::new(SymbolName::MBar6, params).unwrap();
        // |k1 + k2| is far from zero, so the bilinear rule fires.
        let bx = MultiplierBox::intervals(
            &circle(),
            &[(64.0, 4.0), (-40.0, 4.0), (-10.0, 2.0), (-8.0, 2.0), (-3.0, 2.0), (-3.0, 2.0)],
        )
        .unwrap();
        assert!(matches!(fourier_expand(&spec, &bx, 8), Err(Error::Invalid { .. })));
    }

    #[test]
    fn separable_and_product_symbols_reconstruct() {
        // Every slot sits beyond the transition annulus, where the symbol is a pure power.
        let params = SymbolParams::new(1, 1.5, 0.5, 4.0).unwrap();
        let bx = MultiplierBox::intervals(
            &circle(),
            &[(24.0, 8.0), (-20.0, 8.0), (10.0, 4.0), (-6.0, 4.0), (-12.0, 4.0), (4.0, 2.0)],
        )
        .unwrap();
        for name in [SymbolName::Omega6, SymbolName::M6] {
            let spec = SymbolSpec::new(name, params).unwrap();
            let e = fourier_expand(&spec, &bx, 8).unwrap();
            assert!(e.report.reconstruction_error < 1e-6, "{name:?}: {:?}", e.report);
            assert!(e.report.lattice_error < 1e-6, "{name:?}: {:?}", e.report);
        }
    }

    #[test]
    fn product_symbol_with_two_varying_factors() {
        // Low slots lie below the threshold, so only the two high factors vary.
        let params = SymbolParams::new(1, 16.0, 0.5, 4.0).unwrap();
        let spec = SymbolSpec::new(SymbolName::Sigma6, params).unwrap();
        let e = fourier_expand(&spec, &case_i_box(), 8).unwrap();
        assert!(e.report.reconstruction_error < 1e-6, "{:?}", e.report);
        assert!(e.coefficients.iter().all(|c| c.xi[2..].iter().all(|&x| x == 0)));
    }

    #[test]
    fn two_dimensional_box() {
        let g = TorusGeometry::new(2, &[0.8], 1.0).unwrap();
        let params = SymbolParams::new(2, 2.0, 0.5, 4.0).unwrap();
        let spec = SymbolSpec::new(SymbolName::M4, params).unwrap();
        let bx = MultiplierBox::new(
            &g,
            vec![[8.0, 2.5], [-8.0, -2.5], [6.0, 1.25], [-6.0, -1.25]],
            vec![[2.0, 2.0]; 4],
        )
        .unwrap();
        let e = fourier_expand(&spec, &bx, 8).unwrap();
        assert!(e.report.reconstruction_error < 1e-6, "{:?}", e.report);
        assert!(e.report.lattice_tuples > 0);
    }

    #[test]
    fn oversized_intervals_are_rejected() {
        assert!(MultiplierBox::intervals(&circle(), &[(1.0, 9.0), (-1.0, 1.0)]).is_err());
        assert!(MultiplierBox::intervals(&circle(), &[(3.0, 9.0), (-3.0, 1.0)]).is_err());
        assert_eq!(case_i_box().shells(), &[64, 64, 8, 8, 8, 8]);
        assert!(MultiplierBox::intervals(&circle(), &[(1.0, 0.0), (-1.0, 1.0)]).is_err());
    }

    #[test]
    fn unsupported_symbols_error() {
        let params = SymbolParams::new(1, 16.0, 0.5, 4.0).unwrap();
        let spec = SymbolSpec::new(SymbolName::SigmaTilde6, params).unwrap();
        assert!(matches!(fourier_expand(&spec, &case_i_box(), 8), Err(Error::Unsupported(_))));
    }
}
