use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::field::SpectralField;
use super::geometry::TorusGeometry;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized in-place FFT along every axis of a row-major array.
pub fn fft_nd(buf: &mut [Complex64], shape: [usize; 2], direction: FftDirection) {
    let [m0, m1] = shape;
    debug_assert_eq!(buf.len(), m0 * m1);
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if m1 > 1 {
            let f = p.plan_fft(m1, direction);
            f.process(buf);
        }
        if m0 > 1 {
            let f = p.plan_fft(m0, direction);
            if m1 == 1 {
                f.process(buf);
            } else {
                let mut col = vec![Complex64::new(0.0, 0.0); m0];
                for j in 0..m1 {
                    for i in 0..m0 {
                        col[i] = buf[i * m1 + j];
                    }
                    f.process(&mut col);
                    for i in 0..m0 {
                        buf[i * m1 + j] = col[i];
                    }
                }
            }
        }
    });
}

/// Smallest 5-smooth integer `>= n`.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Points per axis for which a degree-`p` product of cutoff-`k` fields is alias free.
pub fn alias_free_size(p: usize, k: usize) -> usize {
    (2 * k + 1) * (p + 1).div_ceil(2)
}

/// Samples of a field on a uniform grid over one period cell.
#[derive(Clone, Debug)]
pub struct PhysicalGrid {
    geom: TorusGeometry,
    shape: [usize; 2],
    values: Vec<Complex64>,
}

impl PhysicalGrid {
    pub fn new(geom: &TorusGeometry, shape: [usize; 2], values: Vec<Complex64>) -> Result<Self> {
        if values.len() != shape[0] * shape[1] || (geom.dim() == 1 && shape[1] != 1) {
            return Err(Error::Invalid {
                field: "grid",
                reason: format!("shape {shape:?} does not match {} values", values.len()),
            });
        }
        Ok(Self {
            geom: geom.clone(),
            shape,
            values,
        })
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geom
    }

    /// Physical coordinates of grid point `i`.
    pub fn point(&self, i: usize) -> [f64; 2] {
        let [m0, m1] = self.shape;
        let (i0, i1) = (i / m1, i % m1);
        let h0 = 2.0 * std::f64::consts::PI * self.geom.period_scale(0) / m0 as f64;
        let x1 = if self.geom.dim() == 2 {
            2.0 * std::f64::consts::PI * self.geom.period_scale(1) * i1 as f64 / m1 as f64
        } else {
            0.0
        };
        [h0 * i0 as f64, x1]
    }

    /// Rectangle-rule integral, exact for trigonometric polynomials resolved by the grid.
    pub fn integrate(&self) -> Complex64 {
        let cell = self.geom.volume() / self.values.len() as f64;
        self.values.iter().sum::<Complex64>() * cell
    }

    pub fn integrate_with(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        let cell = self.geom.volume() / self.values.len() as f64;
        self.values.iter().map(|&z| f(z)).sum::<f64>() * cell
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            geom: self.geom.clone(),
            shape: self.shape,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn mul_assign(&mut self, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a *= b;
        }
    }
}

fn grid_shape(dim: usize, m: usize) -> [usize; 2] {
    if dim == 1 {
        [m, 1]
    } else {
        [m, m]
    }
}

/// Exact trigonometric interpolation of `f` on `(2K+1)·oversample` points per axis.
pub fn to_physical(f: &SpectralField, oversample: usize) -> Result<PhysicalGrid> {
    if oversample == 0 {
        return Err(Error::GridTooSmall {
            need: f.side(),
            got: 0,
        });
    }
    to_physical_size(f, f.side() * oversample)
}

/// As [`to_physical`] with an explicit number of points per axis.
pub fn to_physical_size(f: &SpectralField, m: usize) -> Result<PhysicalGrid> {
    if m < f.side() {
        return Err(Error::GridTooSmall {
            need: f.side(),
            got: m,
        });
    }
    let shape = grid_shape(f.dim(), m);
    let mut buf = vec![Complex64::new(0.0, 0.0); shape[0] * shape[1]];
    for (i, &c) in f.coefficients().iter().enumerate() {
        buf[wrap_index(f.mode_of(i), shape)] = c;
    }
    fft_nd(&mut buf, shape, FftDirection::Inverse);
    let w = f.geometry().weight();
    buf.iter_mut().for_each(|z| *z *= w);
    PhysicalGrid::new(f.geometry(), shape, buf)
}

/// Fourier coefficients of grid data restricted to the cutoff-`cutoff` lattice.
pub fn from_physical(grid: &PhysicalGrid, cutoff: usize) -> Result<SpectralField> {
    let side = 2 * cutoff + 1;
    let shape = grid.shape;
    if shape[0] < side || (grid.geom.dim() == 2 && shape[1] < side) {
        return Err(Error::GridTooSmall {
            need: side,
            got: shape[0].min(if grid.geom.dim() == 2 { shape[1] } else { shape[0] }),
        });
    }
    let mut buf = grid.values.clone();
    fft_nd(&mut buf, shape, FftDirection::Forward);
    let cell = grid.geom.volume() / buf.len() as f64;
    let mut out = SpectralField::zeros(&grid.geom, cutoff);
    for i in 0..out.len() {
        let m = out.mode_of(i);
        out.coefficients_mut()[i] = buf[wrap_index(m, shape)] * cell;
    }
    Ok(out)
}

fn wrap_index(m: [i64; 2], shape: [usize; 2]) -> usize {
    let i0 = m[0].rem_euclid(shape[0] as i64) as usize;
    let i1 = m[1].rem_euclid(shape[1] as i64) as usize;
    i0 * shape[1] + i1
}

/// A factor of a pointwise product: the field, conjugated or not.
#[derive(Clone, Copy)]
pub struct Factor<'a> {
    pub field: &'a SpectralField,
    pub conj: bool,
}

impl<'a> Factor<'a> {
    pub fn plain(field: &'a SpectralField) -> Self {
        Self { field, conj: false }
    }

    pub fn conj(field: &'a SpectralField) -> Self {
        Self { field, conj: true }
    }
}

fn product_grid(factors: &[Factor<'_>], m: usize) -> Result<PhysicalGrid> {
    let first = factors.first().ok_or_else(|| Error::Invalid {
        field: "factors",
        reason: "empty product".into(),
    })?;
    let mut acc: Option<PhysicalGrid> = None;
    for fac in factors {
        if fac.field.geometry() != first.field.geometry() {
            return Err(Error::Invalid {
                field: "factors",
                reason: "mixed geometries".into(),
            });
        }
        let mut g = to_physical_size(fac.field, m)?;
        if fac.conj {
            g.values.iter_mut().for_each(|z| *z = z.conj());
        }
        match acc.as_mut() {
            None => acc = Some(g),
            Some(a) => a.mul_assign(&g),
        }
    }
    Ok(acc.expect("nonempty"))
}

/// Projection of a pointwise product of fields onto the cutoff-`cutoff` lattice, alias free.
pub fn product(factors: &[Factor<'_>], cutoff: usize) -> Result<SpectralField> {
    let kmax = factors.iter().map(|f| f.field.cutoff()).max().unwrap_or(0).max(cutoff);
    let m = smooth_size(alias_free_size(factors.len(), kmax));
    from_physical(&product_grid(factors, m)?, cutoff)
}

/// `∫ ∏ factors dx`, computed on an alias-free grid.
pub fn integrate_product(factors: &[Factor<'_>]) -> Result<Complex64> {
    let kmax = factors.iter().map(|f| f.field.cutoff()).max().unwrap_or(0);
    let m = smooth_size(alias_free_size(factors.len(), kmax));
    Ok(product_grid(factors, m)?.integrate())
}

/// `P_K(|u|^{p-1} u)` for odd `p`, exact on the truncated lattice.
pub fn power_nonlinearity(u: &SpectralField, p: usize) -> SpectralField {
    debug_assert!(p % 2 == 1);
    let m = smooth_size(alias_free_size(p, u.cutoff()));
    let g = to_physical_size(u, m).expect("grid size exceeds the lattice");
    let half = ((p - 1) / 2) as i32;
    let g = g.map(|z| z * z.norm_sqr().powi(half));
    from_physical(&g, u.cutoff()).expect("grid size exceeds the lattice")
}

/// `∫ |u|^p dx` for even `p`, exact for the truncated field.
pub fn integrate_abs_power(u: &SpectralField, p: usize) -> f64 {
    debug_assert!(p % 2 == 0);
    let m = smooth_size(alias_free_size(p, u.cutoff()));
    let g = to_physical_size(u, m).expect("grid size exceeds the lattice");
    let half = (p / 2) as i32;
    g.integrate_with(|z| z.norm_sqr().powi(half))
}
