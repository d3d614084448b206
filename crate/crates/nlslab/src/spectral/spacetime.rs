use super::field::SpectralField;
use super::grid::{alias_free_size, integrate_abs_power, smooth_size, to_physical_size};
use crate::error::{invalid, Result};

/// Composite Simpson weights for `len >= 3` uniform samples of spacing `h`; an even sample
/// count closes with a 3/8 panel.
pub fn simpson_weights(len: usize, h: f64) -> Result<Vec<f64>> {
    if len < 3 {
        return Err(invalid("samples", format!("Simpson needs at least 3 samples, got {len}")));
    }
    let mut w = vec![0.0; len];
    let simpson_end = if len % 2 == 1 { len - 1 } else { len - 4 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if len % 2 == 0 {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + j] += 3.0 * h / 8.0 * c;
        }
    }
    Ok(w)
}

/// `(∫_0^T ∫ |u|^p dx dt)^{1/p}` for fields sampled uniformly on `[0, T]`.
///
/// Even integer `p` is integrated exactly in space; other exponents use a grid oversampled
/// four times.
pub fn lp_spacetime_norm(samples: &[SpectralField], p: f64, t_end: f64) -> Result<f64> {
    if samples.len() < 4 {
        return Err(invalid("samples", format!("need at least 4 time samples, got {}", samples.len())));
    }
    if !(p.is_finite() && p >= 2.0) {
        return Err(invalid("p", format!("{p} is not in [2, ∞)")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(invalid("T", format!("{t_end} must be positive")));
    }
    let weights = simpson_weights(samples.len(), t_end / (samples.len() - 1) as f64)?;
    let even = p.fract() == 0.0 && (p as usize) % 2 == 0;
    let mut total = 0.0;
    for (f, w) in samples.iter().zip(&weights) {
        let slice = if even {
            integrate_abs_power(f, p as usize)
        } else {
            let m = smooth_size(alias_free_size(p.ceil() as usize, f.cutoff()).max(4 * f.side()));
            to_physical_size(f, m)?.integrate_with(|z| z.norm().powf(p))
        };
        total += w * slice;
    }
    Ok(total.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGeometry;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn trajectory(u: &SpectralField, t_end: f64, count: usize) -> Vec<SpectralField> {
        (0..count)
            .map(|j| u.free_evolve(t_end * j as f64 / (count - 1) as f64))
            .collect()
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for len in [3usize, 4, 5, 8, 11] {
            let h = 1.0 / (len - 1) as f64;
            let w = simpson_weights(len, h).unwrap();
            let s: f64 = w.iter().enumerate().map(|(i, w)| w * (i as f64 * h).powi(3)).sum();
            assert!((s - 0.25).abs() < 1e-14, "{len}");
        }
        assert!(simpson_weights(2, 1.0).is_err());
    }

    #[test]
    fn plane_wave_l6() {
        let g = TorusGeometry::circle(3.0).unwrap();
        let c = Complex64::new(0.6, -0.8) * 1.7;
        let u = SpectralField::plane_wave(&g, 4, [2, 0], c).unwrap();
        let t_end = 0.4;
        let norm = lp_spacetime_norm(&trajectory(&u, t_end, 9), 6.0, t_end).unwrap();
        let exact = c.norm() * (2.0 * PI * 3.0 * t_end).powf(1.0 / 6.0);
        assert!((norm - exact).abs() < 1e-12 * exact);
        let odd = lp_spacetime_norm(&trajectory(&u, t_end, 9), 3.0, t_end).unwrap();
        assert!((odd - c.norm() * (2.0 * PI * 3.0 * t_end).powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_field_and_short_trajectories() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let z = SpectralField::zeros(&g, 3);
        assert_eq!(lp_spacetime_norm(&vec![z.clone(); 5], 6.0, 1.0).unwrap(), 0.0);
        assert!(lp_spacetime_norm(&vec![z.clone(); 3], 6.0, 1.0).is_err());
        assert!(lp_spacetime_norm(&vec![z; 5], 1.5, 1.0).is_err());
    }

    #[test]
    fn two_mode_field_converges_under_refinement() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let mut u = SpectralField::zeros(&g, 4);
        u.set([1, 0], Complex64::new(2.0, 0.0)).unwrap();
        u.set([-3, 0], Complex64::new(0.0, 1.5)).unwrap();
        let t_end = 1.0;
        let coarse = lp_spacetime_norm(&trajectory(&u, t_end, 101), 6.0, t_end).unwrap();
        let dense = lp_spacetime_norm(&trajectory(&u, t_end, 401), 6.0, t_end).unwrap();
        assert!((coarse - dense).abs() < 1e-3 * dense);
    }
}
