use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Rescaled torus `T_λ × T_{γλ}` (or the circle `T_λ` when `dim == 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    dim: usize,
    gamma: Vec<f64>,
    lambda: f64,
}

impl TorusGeometry {
    pub fn new(dim: usize, gamma: &[f64], lambda: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid("dimension", format!("{dim} is not 1 or 2")));
        }
        if gamma.len() != dim - 1 {
            return Err(invalid(
                "gamma",
                format!("expected {} ratio(s), got {}", dim - 1, gamma.len()),
            ));
        }
        for &g in gamma {
            if !(g > 0.5 && g <= 1.0) {
                return Err(invalid("gamma", format!("{g} not in (1/2, 1]")));
            }
        }
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(invalid("lambda", format!("{lambda} is not a finite value >= 1")));
        }
        Ok(Self {
            dim,
            gamma: gamma.to_vec(),
            lambda,
        })
    }

    pub fn circle(lambda: f64) -> Result<Self> {
        Self::new(1, &[], lambda)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Period of `axis` in units of 2π.
    pub fn period_scale(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.lambda
        } else {
            self.gamma[axis - 1] * self.lambda
        }
    }

    /// Dual lattice spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.period_scale(axis)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| 2.0 * PI * self.period_scale(a)).product()
    }

    /// Weight of the normalized counting measure on the dual lattice, `1/volume`.
    pub fn weight(&self) -> f64 {
        1.0 / self.volume()
    }

    /// Same anisotropy with a different scale.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.dim, &self.gamma, lambda)
    }

    pub fn is_integer_lattice(&self) -> bool {
        self.lambda == 1.0 && self.gamma.iter().all(|&g| g == 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_weight() {
        let g = TorusGeometry::circle(1.0).unwrap();
        assert_eq!(g.weight(), 1.0 / (2.0 * PI));
    }

    #[test]
    fn anisotropic_weight() {
        let g = TorusGeometry::new(2, &[0.75], 4.0).unwrap();
        let expect = 1.0 / (2.0 * PI * 4.0) / (2.0 * PI * 3.0);
        assert!((g.weight() - expect).abs() < 1e-18);
        assert_eq!(g.period_scale(1), 3.0);
    }

    #[test]
    fn rejects_bad_gamma() {
        let err = TorusGeometry::new(2, &[0.4], 1.0).unwrap_err();
        assert!(err.to_string().contains("gamma"));
        assert!(TorusGeometry::new(1, &[], 0.5).is_err());
        assert!(TorusGeometry::new(3, &[1.0, 1.0], 1.0).is_err());
    }
}
