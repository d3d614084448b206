//! Empirical Strichartz constants on `T_λ` (1d).
//!
//! Bilinear row: `‖e^{itΔ}f₁ · e^{itΔ}f₂‖_{L²_{t,x}([0,T]×T_λ)}` for unit-L² data with
//! `supp f̂₁ ⊂ [M, 2M)` and `supp f̂₂ ⊂ [−2M, −M)`. Linear row: `‖e^{itΔ}f₁‖_{L⁶_{t,x}}`.
//!
//! Samples are coherent wave packets with random amplitude profile, phase, position and
//! crossing time `t* ∈ [0, T]`; incoherent data never realize the constant. Each band is
//! stored demodulated around its center so the grid only resolves the band width.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::Serialize;
use std::f64::consts::TAU;

use super::log_log_slope;
use crate::error::{invalid, Result};
use crate::spectral::{fft_nd, simpson_weights, smooth_size};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrichartzConfig {
    pub lambda: f64,
    pub n: f64,
    pub m_values: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Defaults to `λ/N`.
    pub t_end: Option<f64>,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        Self {
            lambda: 64.0,
            n: 256.0,
            m_values: vec![4.0, 8.0, 16.0, 32.0],
            samples: 200,
            seed: 1,
            t_end: None,
        }
    }
}

impl StrichartzConfig {
    pub fn horizon(&self) -> f64 {
        self.t_end.unwrap_or(self.lambda / self.n)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return Err(invalid("strichartz.lambda", format!("{} < 1", self.lambda)));
        }
        if !(self.n >= 1.0) {
            return Err(invalid("strichartz.n", format!("{} < 1", self.n)));
        }
        if self.samples == 0 {
            return Err(invalid("strichartz.samples", "must be at least 1"));
        }
        if let Some(m) = self.m_values.iter().find(|&&m| !(m > 0.0 && (m * self.lambda) >= 1.0)) {
            return Err(invalid("strichartz.m", format!("band [{m}, {}) holds no lattice mode", 2.0 * m)));
        }
        let t = self.horizon();
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("strichartz.t_end", format!("{t} must be positive")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrichartzRow {
    pub n: f64,
    pub m: f64,
    pub lambda: f64,
    pub t: f64,
    /// `bilinear` or `linear-l6`.
    pub norm: String,
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
    pub time_steps: usize,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub name: String,
    pub measured: f64,
    pub exact: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrichartzReport {
    pub rows: Vec<StrichartzRow>,
    pub calibration: Vec<CalibrationRow>,
    /// Log-log slope of the sampled maxima of the bilinear norm against `M`.
    pub slope_max: Option<f64>,
    pub slope_mean: Option<f64>,
    pub predicted_slope: f64,
}

/// Modes of one band as `(integer index, coefficient)`; physical frequency is `index/λ`.
type Band = Vec<(i64, Complex64)>;

struct Norms {
    bilinear: f64,
    l6: f64,
    time_steps: usize,
    grid: usize,
}

/// Fastest time frequency among `|u₁|⁶` and `|u₁u₂|²`: `3(k²_max − k²_min)` over the bands.
fn time_steps(bands: [&Band; 2], lambda: f64, t_end: f64) -> usize {
    let spread = bands
        .iter()
        .map(|b| {
            let sq = b.iter().map(|(a, _)| (*a as f64 / lambda).powi(2));
            let hi = sq.clone().fold(0.0, f64::max);
            let lo = sq.fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .fold(0.0, f64::max);
    let steps = (3.0 * spread * t_end).ceil() as usize;
    let steps = steps.max(64);
    steps + steps % 2
}

fn center(b: &Band) -> i64 {
    let lo = b.iter().map(|m| m.0).min().unwrap_or(0);
    let hi = b.iter().map(|m| m.0).max().unwrap_or(0);
    (lo + hi).div_euclid(2)
}

/// Bilinear `L²_{t,x}` and linear `L⁶_{t,x}` norms of the free evolutions of two bands.
fn band_norms(f1: &Band, f2: &Band, lambda: f64, t_end: f64) -> Result<Norms> {
    band_norms_with_steps(f1, f2, lambda, t_end, time_steps([f1, f2], lambda, t_end))
}

fn band_norms_with_steps(f1: &Band, f2: &Band, lambda: f64, t_end: f64, steps: usize) -> Result<Norms> {
    let volume = TAU * lambda;
    let w = 1.0 / volume;
    let width = |b: &Band| {
        let c = center(b);
        b.iter().map(|m| (m.0 - c).abs()).max().unwrap_or(0) as usize
    };
    let half = width(f1).max(width(f2));
    let grid = smooth_size(6 * half + 2);
    let h = t_end / steps as f64;
    let weights = simpson_weights(steps + 1, h)?;
    let prepare = |b: &Band| {
        let c = center(b);
        let slots: Vec<usize> = b.iter().map(|m| (m.0 - c).rem_euclid(grid as i64) as usize).collect();
        let rot: Vec<Complex64> = b
            .iter()
            .map(|m| Complex64::from_polar(1.0, -(m.0 as f64 / lambda).powi(2) * h))
            .collect();
        let cur: Vec<Complex64> = b.iter().map(|m| m.1).collect();
        (slots, rot, cur)
    };
    let (s1, r1, mut c1) = prepare(f1);
    let (s2, r2, mut c2) = prepare(f2);
    let mut u1 = vec![Complex64::new(0.0, 0.0); grid];
    let mut u2 = vec![Complex64::new(0.0, 0.0); grid];
    let cell = volume / grid as f64;
    let (mut bil, mut six) = (0.0, 0.0);
    for wt in &weights {
        u1.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        u2.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (&i, &c) in s1.iter().zip(&c1) {
            u1[i] = c * w;
        }
        for (&i, &c) in s2.iter().zip(&c2) {
            u2[i] = c * w;
        }
        fft_nd(&mut u1, [grid, 1], FftDirection::Inverse);
        fft_nd(&mut u2, [grid, 1], FftDirection::Inverse);
        let (mut b, mut s) = (0.0, 0.0);
        for (a, c) in u1.iter().zip(&u2) {
            let p = a.norm_sqr();
            b += p * c.norm_sqr();
            s += p * p * p;
        }
        bil += wt * b * cell;
        six += wt * s * cell;
        c1.iter_mut().zip(&r1).for_each(|(c, r)| *c *= r);
        c2.iter_mut().zip(&r2).for_each(|(c, r)| *c *= r);
    }
    Ok(Norms {
        bilinear: bil.sqrt(),
        l6: six.powf(1.0 / 6.0),
        time_steps: steps,
        grid,
    })
}

fn unit_l2(mut b: Band, lambda: f64) -> Band {
    let w = 1.0 / (TAU * lambda);
    let norm = (w * b.iter().map(|m| m.1.norm_sqr()).sum::<f64>()).sqrt();
    b.iter_mut().for_each(|m| m.1 /= norm);
    b
}

/// Lattice indices with physical frequency in `[lo, hi)`.
fn band_indices(lo: f64, hi: f64, lambda: f64) -> Vec<i64> {
    let a = (lo * lambda).ceil() as i64;
    let b = (hi * lambda).ceil() as i64;
    (a..b).collect()
}

fn packet(indices: &[i64], lambda: f64, x0: f64, rng: &mut ChaCha8Rng) -> Band {
    let theta = rng.gen::<f64>() * TAU;
    let b = indices
        .iter()
        .map(|&a| {
            let amp = rng.gen_range(0.5..1.0);
            (a, Complex64::from_polar(amp, theta - a as f64 / lambda * x0))
        })
        .collect();
    unit_l2(b, lambda)
}

fn sample_pair(m: f64, lambda: f64, t_end: f64, rng: &mut ChaCha8Rng) -> (Band, Band) {
    let i1 = band_indices(m, 2.0 * m, lambda);
    let i2: Vec<i64> = band_indices(-2.0 * m, -m, lambda);
    let k1 = i1.iter().sum::<i64>() as f64 / i1.len() as f64 / lambda;
    let k2 = i2.iter().sum::<i64>() as f64 / i2.len() as f64 / lambda;
    let volume = TAU * lambda;
    let x1 = rng.gen::<f64>() * volume;
    let crossing = rng.gen::<f64>() * t_end;
    // Group velocities 2k₁ and 2k₂ bring the packets together at `crossing`.
    let x2 = (x1 + 2.0 * (k1 - k2) * crossing).rem_euclid(volume);
    (packet(&i1, lambda, x1, rng), packet(&i2, lambda, x2, rng))
}

/// Single-mode rows with closed forms: `|c₁||c₂|(2πλT)^{1/2}` and `|c|(2πλT)^{1/6}`.
pub fn calibration(lambda: f64, t_end: f64) -> Result<Vec<CalibrationRow>> {
    let volume = TAU * lambda;
    let c1 = Complex64::new(0.3, 1.1);
    let c2 = Complex64::new(-0.7, 0.2);
    let a = (3.0 * lambda) as i64 + 1;
    let f1: Band = vec![(a, c1 * volume)];
    let f2: Band = vec![(-2 * a + 1, c2 * volume)];
    let got = band_norms(&f1, &f2, lambda, t_end)?;
    let row = |name: &str, measured: f64, exact: f64| CalibrationRow {
        name: name.to_string(),
        measured,
        exact,
        rel_error: (measured - exact).abs() / exact,
    };
    Ok(vec![
        row(
            "two-single-modes-bilinear",
            got.bilinear,
            c1.norm() * c2.norm() * (volume * t_end).sqrt(),
        ),
        row("plane-wave-l6", got.l6, c1.norm() * (volume * t_end).powf(1.0 / 6.0)),
    ])
}

pub fn run_strichartz_probe(cfg: &StrichartzConfig) -> Result<StrichartzReport> {
    cfg.validate()?;
    let t_end = cfg.horizon();
    let mut rows = Vec::new();
    for (mi, &m) in cfg.m_values.iter().enumerate() {
        let results: Vec<Norms> = (0..cfg.samples)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((mi as u64) << 32) | s as u64);
                let (f1, f2) = sample_pair(m, cfg.lambda, t_end, &mut rng);
                band_norms(&f1, &f2, cfg.lambda, t_end)
            })
            .collect::<Result<_>>()?;
        let count = results.len() as f64;
        let row = |name: &str, pick: fn(&Norms) -> f64| StrichartzRow {
            n: cfg.n,
            m,
            lambda: cfg.lambda,
            t: t_end,
            norm: name.to_string(),
            max: results.iter().map(pick).fold(0.0, f64::max),
            mean: results.iter().map(pick).sum::<f64>() / count,
            samples: results.len(),
            time_steps: results[0].time_steps,
            grid: results[0].grid,
        };
        rows.push(row("bilinear", |r| r.bilinear));
        rows.push(row("linear-l6", |r| r.l6));
    }
    let bilinear: Vec<&StrichartzRow> = rows.iter().filter(|r| r.norm == "bilinear").collect();
    let slope_max = log_log_slope(&bilinear.iter().map(|r| (r.m, r.max)).collect::<Vec<_>>());
    let slope_mean = log_log_slope(&bilinear.iter().map(|r| (r.m, r.mean)).collect::<Vec<_>>());
    Ok(StrichartzReport {
        rows,
        calibration: calibration(cfg.lambda, t_end)?,
        slope_max,
        slope_mean,
        predicted_slope: -0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn calibration_rows_are_exact() {
        for (lambda, t) in [(64.0, 0.25), (3.0, 1.0)] {
            for row in calibration(lambda, t).unwrap() {
                assert!(row.rel_error < 1e-10, "{row:?}");
            }
        }
    }

    #[test]
    fn bands_are_unit_l2_and_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (f1, f2) = sample_pair(4.0, 8.0, 0.1, &mut rng);
        let w = 1.0 / (TAU * 8.0);
        for (b, lo, hi) in [(&f1, 4.0, 8.0), (&f2, -8.0, -4.0)] {
            assert!((w * b.iter().map(|m| m.1.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(b.iter().all(|m| (m.0 as f64 / 8.0) >= lo && (m.0 as f64 / 8.0) < hi));
        }
        assert_eq!(f1.len(), 32);
    }

    #[test]
    fn crossing_packets_beat_separated_ones() {
        // At fixed data, the bilinear norm peaks when the packets meet inside the window.
        let lambda = 16.0;
        let t_end = 0.25;
        let i1 = band_indices(4.0, 8.0, lambda);
        let i2 = band_indices(-8.0, -4.0, lambda);
        let flat = |idx: &[i64], x0: f64| -> Band {
            unit_l2(idx.iter().map(|&a| (a, Complex64::from_polar(1.0, -(a as f64) / lambda * x0))).collect(), lambda)
        };
        let meet = band_norms(&flat(&i1, 0.0), &flat(&i2, 12.0 * 0.1), lambda, t_end).unwrap();
        let apart = band_norms(&flat(&i1, 0.0), &flat(&i2, 40.0), lambda, t_end).unwrap();
        assert!(meet.bilinear > 3.0 * apart.bilinear, "{} vs {}", meet.bilinear, apart.bilinear);
    }

    #[test]
    fn quadrature_is_converged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (f1, f2) = sample_pair(4.0, 16.0, 0.25, &mut rng);
        let coarse = band_norms(&f1, &f2, 16.0, 0.25).unwrap();
        let fine = band_norms_with_steps(&f1, &f2, 16.0, 0.25, 8 * coarse.time_steps).unwrap();
        assert!((fine.bilinear - coarse.bilinear).abs() < 1e-4 * fine.bilinear);
        assert!((fine.l6 - coarse.l6).abs() < 1e-4 * fine.l6);
    }

    #[test]
    fn single_point_grid_has_no_slope() {
        let cfg = StrichartzConfig {
            lambda: 8.0,
            n: 32.0,
            m_values: vec![2.0],
            samples: 3,
            ..Default::default()
        };
        let r = run_strichartz_probe(&cfg).unwrap();
        assert_eq!(r.slope_max, None);
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = StrichartzConfig::default();
        cfg.samples = 0;
        assert!(run_strichartz_probe(&cfg).is_err());
        let cfg = StrichartzConfig {
            m_values: vec![0.001],
            ..Default::default()
        };
        assert!(run_strichartz_probe(&cfg).is_err());
    }

    #[test]
    fn packet_is_localized_near_its_position() {
        let lambda = 8.0;
        let idx = band_indices(2.0, 4.0, lambda);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x0 = 10.0;
        let b = packet(&idx, lambda, x0, &mut rng);
        let w = 1.0 / (TAU * lambda);
        let at = |x: f64| -> f64 {
            b.iter()
                .map(|m| m.1 * w * Complex64::from_polar(1.0, m.0 as f64 / lambda * x))
                .sum::<Complex64>()
                .norm()
        };
        assert!(at(x0) > 4.0 * at(x0 + PI * lambda));
    }
}
