use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::TorusGeometry;
use super::shells::{sharp_shell, smooth_shell_weight};
use crate::error::{invalid, Result};

/// Integer mode index; the second component is zero in 1d.
pub type Mode = [i64; 2];

/// Norm selector for [`SpectralField::norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    L2,
    Hs(f64),
    DotHs(f64),
}

/// Fourier coefficients `f̂(k) = ∫ e^{-ik·x} f(x) dx` on the truncated lattice `|n_i| <= K`.
///
/// Storage is row-major with axis 0 outermost and offset `n + K` on each axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    geom: TorusGeometry,
    cutoff: usize,
    coef: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(geom: &TorusGeometry, cutoff: usize) -> Self {
        let side = 2 * cutoff + 1;
        let len = side.pow(geom.dim() as u32);
        Self {
            geom: geom.clone(),
            cutoff,
            coef: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(geom: &TorusGeometry, cutoff: usize, f: impl Fn(Mode) -> Complex64) -> Self {
        let mut out = Self::zeros(geom, cutoff);
        for i in 0..out.coef.len() {
            out.coef[i] = f(out.mode_of(i));
        }
        out
    }

    /// Field with the listed coefficients `f̂(n)`; every mode must lie in the lattice.
    pub fn from_modes(
        geom: &TorusGeometry,
        cutoff: usize,
        modes: &[(Mode, Complex64)],
    ) -> Result<Self> {
        let mut out = Self::zeros(geom, cutoff);
        for &(m, c) in modes {
            let i = out
                .index(m)
                .ok_or_else(|| invalid("mode", format!("{m:?} outside cutoff {cutoff}")))?;
            out.coef[i] += c;
        }
        Ok(out)
    }

    pub fn from_coefficients(
        geom: &TorusGeometry,
        cutoff: usize,
        coef: Vec<Complex64>,
    ) -> Result<Self> {
        let out = Self::zeros(geom, cutoff);
        if coef.len() != out.coef.len() {
            return Err(invalid(
                "coefficients",
                format!("expected {} values, got {}", out.coef.len(), coef.len()),
            ));
        }
        if coef.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(invalid("coefficients", "non-finite value"));
        }
        Ok(Self { coef, ..out })
    }

    /// The physical plane wave `amp · e^{ik·x}` for integer mode `mode`.
    pub fn plane_wave(
        geom: &TorusGeometry,
        cutoff: usize,
        mode: Mode,
        amp: Complex64,
    ) -> Result<Self> {
        Self::from_modes(geom, cutoff, &[(mode, amp * geom.volume())])
    }

    /// Independent complex Gaussian coefficients scaled by `envelope(k)` (physical frequency).
    pub fn random<R: Rng + ?Sized>(
        geom: &TorusGeometry,
        cutoff: usize,
        rng: &mut R,
        envelope: impl Fn([f64; 2]) -> f64,
    ) -> Self {
        let mut out = Self::zeros(geom, cutoff);
        for i in 0..out.coef.len() {
            let k = out.freq(out.mode_of(i));
            let (a, b) = gaussian_pair(rng);
            out.coef[i] = Complex64::new(a, b) * envelope(k);
        }
        out
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geom
    }

    pub fn dim(&self) -> usize {
        self.geom.dim()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coef
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coef
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coef
    }

    pub fn index(&self, m: Mode) -> Option<usize> {
        let k = self.cutoff as i64;
        let side = self.side() as i64;
        if m[0].abs() > k {
            return None;
        }
        if self.dim() == 1 {
            return (m[1] == 0).then_some((m[0] + k) as usize);
        }
        if m[1].abs() > k {
            return None;
        }
        Some(((m[0] + k) * side + (m[1] + k)) as usize)
    }

    pub fn mode_of(&self, i: usize) -> Mode {
        let k = self.cutoff as i64;
        let side = self.side();
        if self.dim() == 1 {
            [i as i64 - k, 0]
        } else {
            [(i / side) as i64 - k, (i % side) as i64 - k]
        }
    }

    pub fn get(&self, m: Mode) -> Complex64 {
        self.index(m).map_or(Complex64::new(0.0, 0.0), |i| self.coef[i])
    }

    pub fn set(&mut self, m: Mode, c: Complex64) -> Result<()> {
        let i = self
            .index(m)
            .ok_or_else(|| invalid("mode", format!("{m:?} outside cutoff {}", self.cutoff)))?;
        self.coef[i] = c;
        Ok(())
    }

    /// Physical frequency of an integer mode on this geometry.
    pub fn freq(&self, m: Mode) -> [f64; 2] {
        mode_freq(&self.geom, m)
    }

    pub fn freq_sq(&self, m: Mode) -> f64 {
        let k = self.freq(m);
        k[0] * k[0] + k[1] * k[1]
    }

    /// Coefficients of the complex conjugate function: `ĝ(k) = conj(f̂(-k))`.
    pub fn conj_field(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.coef.len() {
            let m = self.mode_of(i);
            out.coef[i] = self.get([-m[0], -m[1]]).conj();
        }
        out
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let w = self.geom.weight();
        let mut acc = 0.0;
        for (i, c) in self.coef.iter().enumerate() {
            let k2 = self.freq_sq(self.mode_of(i));
            let weight = match kind {
                NormKind::L2 => 1.0,
                NormKind::Hs(s) => (1.0 + k2).powf(s),
                NormKind::DotHs(s) => {
                    if k2 == 0.0 {
                        0.0
                    } else {
                        k2.powf(s)
                    }
                }
            };
            acc += weight * c.norm_sqr();
        }
        (w * acc).sqrt()
    }

    /// Multiply every coefficient by `symbol(k)` evaluated at the physical frequency.
    pub fn apply_symbol(&self, symbol: impl Fn([f64; 2]) -> Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..out.coef.len() {
            let k = self.freq(self.mode_of(i));
            out.coef[i] *= symbol(k);
        }
        out
    }

    pub fn project_set(&self, keep: impl Fn(Mode) -> bool) -> Self {
        let mut out = self.clone();
        for i in 0..out.coef.len() {
            if !keep(self.mode_of(i)) {
                out.coef[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Littlewood–Paley projection to the dyadic shell `n`.
    pub fn lp_project(&self, n: u64, sharp: bool) -> Self {
        let mut out = self.clone();
        for i in 0..out.coef.len() {
            let k = self.freq_sq(self.mode_of(i)).sqrt();
            let factor = if sharp {
                if sharp_shell(k) == n {
                    1.0
                } else {
                    0.0
                }
            } else {
                smooth_shell_weight(k, n)
            };
            out.coef[i] *= factor;
        }
        out
    }

    /// Free Schrödinger flow `e^{itΔ}`: `f̂(k) ↦ e^{-it|k|²} f̂(k)`.
    pub fn free_evolve(&self, t: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.coef.len() {
            let k2 = self.freq_sq(self.mode_of(i));
            out.coef[i] *= Complex64::from_polar(1.0, -t * k2);
        }
        out
    }

    /// Copy onto a lattice with another cutoff, dropping modes that do not fit.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut out = Self::zeros(&self.geom, cutoff);
        for i in 0..self.coef.len() {
            if let Some(j) = out.index(self.mode_of(i)) {
                out.coef[j] = self.coef[i];
            }
        }
        out
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.coef.iter_mut().for_each(|c| *c *= a);
        out
    }

    pub fn axpy(&mut self, a: Complex64, other: &Self) {
        debug_assert_eq!(self.coef.len(), other.coef.len());
        for (x, y) in self.coef.iter_mut().zip(&other.coef) {
            *x += a * y;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coef
            .iter()
            .zip(&other.coef)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coef.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest physical frequency magnitude carrying a nonzero coefficient.
    pub fn support_radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for (i, c) in self.coef.iter().enumerate() {
            if c.norm_sqr() > 0.0 {
                r = r.max(self.freq_sq(self.mode_of(i)).sqrt());
            }
        }
        r
    }

    /// Binary checkpoint: u64 LE header length, JSON header, then LE complex values.
    pub fn write_to<W: Write>(&self, mut w: W, precision: Precision) -> Result<()> {
        let header = FieldHeader {
            geometry: self.geom.clone(),
            cutoff: self.cutoff,
            layout: "row-major, axis 0 outermost, offset n+K per axis".to_string(),
            precision,
            count: self.coef.len(),
        };
        let bytes = serde_json::to_vec(&header)?;
        w.write_all(&(bytes.len() as u64).to_le_bytes())?;
        w.write_all(&bytes)?;
        for c in &self.coef {
            match precision {
                Precision::Complex64 => {
                    w.write_all(&(c.re as f32).to_le_bytes())?;
                    w.write_all(&(c.im as f32).to_le_bytes())?;
                }
                Precision::Complex128 => {
                    w.write_all(&c.re.to_le_bytes())?;
                    w.write_all(&c.im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len) as usize;
        if len > 1 << 20 {
            return Err(invalid("checkpoint", "header too long"));
        }
        let mut hbytes = vec![0u8; len];
        r.read_exact(&mut hbytes)?;
        let h: FieldHeader = serde_json::from_slice(&hbytes)?;
        let geom = TorusGeometry::new(h.geometry.dim(), h.geometry.gamma(), h.geometry.lambda())?;
        let mut coef = Vec::with_capacity(h.count);
        for _ in 0..h.count {
            let c = match h.precision {
                Precision::Complex64 => {
                    let mut b = [0u8; 4];
                    r.read_exact(&mut b)?;
                    let re = f32::from_le_bytes(b) as f64;
                    r.read_exact(&mut b)?;
                    Complex64::new(re, f32::from_le_bytes(b) as f64)
                }
                Precision::Complex128 => {
                    let mut b = [0u8; 8];
                    r.read_exact(&mut b)?;
                    let re = f64::from_le_bytes(b);
                    r.read_exact(&mut b)?;
                    Complex64::new(re, f64::from_le_bytes(b))
                }
            };
            coef.push(c);
        }
        Self::from_coefficients(&geom, h.cutoff, coef)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Complex64,
    Complex128,
}

#[derive(Serialize, Deserialize)]
struct FieldHeader {
    geometry: TorusGeometry,
    cutoff: usize,
    layout: String,
    precision: Precision,
    count: usize,
}

pub fn mode_freq(geom: &TorusGeometry, m: Mode) -> [f64; 2] {
    let k0 = m[0] as f64 / geom.period_scale(0);
    let k1 = if geom.dim() == 2 {
        m[1] as f64 / geom.period_scale(1)
    } else {
        0.0
    };
    [k0, k1]
}

fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    (r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin())
}

impl std::fmt::Display for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "SpectralField(d={}, K={}, lambda={})",
            self.dim(),
            self.cutoff,
            self.geom.lambda()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle() -> TorusGeometry {
        TorusGeometry::circle(1.0).unwrap()
    }

    #[test]
    fn single_mode_norms() {
        let u = SpectralField::plane_wave(&circle(), 3, [1, 0], Complex64::new(1.0, 0.0)).unwrap();
        assert!((u.get([1, 0]).re - 2.0 * PI).abs() < 1e-14);
        let l2 = u.norm(NormKind::L2);
        assert!((l2 * l2 - 2.0 * PI).abs() < 1e-12);
        let h1 = u.norm(NormKind::Hs(1.0));
        assert!((h1 * h1 - 4.0 * PI).abs() < 1e-12);
        assert_eq!(SpectralField::zeros(&circle(), 4).norm(NormKind::L2), 0.0);
    }

    #[test]
    fn index_round_trip_2d() {
        let g = TorusGeometry::new(2, &[0.75], 2.0).unwrap();
        let f = SpectralField::zeros(&g, 3);
        for i in 0..f.len() {
            assert_eq!(f.index(f.mode_of(i)), Some(i));
        }
        assert_eq!(f.index([4, 0]), None);
        let k = f.freq([2, 3]);
        assert_eq!(k, [1.0, 2.0]);
    }

    #[test]
    fn free_evolve_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField::random(&circle(), 6, &mut rng, |_| 1.0);
        let a = f.free_evolve(0.3).free_evolve(0.45);
        let b = f.free_evolve(0.75);
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert_eq!(f.free_evolve(0.0), f);
    }

    #[test]
    fn shell_one_on_lambda_four() {
        let g = TorusGeometry::circle(4.0).unwrap();
        let f = SpectralField::from_fn(&g, 20, |_| Complex64::new(1.0, 0.0));
        let p = f.lp_project(1, true);
        let kept: Vec<i64> = (0..p.len())
            .filter(|&i| p.coefficients()[i].norm() > 0.0)
            .map(|i| p.mode_of(i)[0])
            .collect();
        assert_eq!(kept.iter().map(|n| n.abs()).max(), Some(7));
        assert_eq!(kept.len(), 15);
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = TorusGeometry::new(2, &[0.8], 1.5).unwrap();
        let f = SpectralField::random(&g, 2, &mut rng, |_| 1.0);
        let mut buf = Vec::new();
        f.write_to(&mut buf, Precision::Complex128).unwrap();
        let back = SpectralField::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let mut buf = Vec::new();
        f.write_to(&mut buf, Precision::Complex64).unwrap();
        let back = SpectralField::read_from(buf.as_slice()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-5);
    }
}
