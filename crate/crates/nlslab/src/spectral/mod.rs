//! Lattice geometry, Fourier coefficients, norms and frequency projections on `T^d_λ`.
//!
//! Conventions: `f̂(k) = ∫ e^{-ik·x} f dx`, `f = w Σ_k f̂(k) e^{ik·x}` with `w = 1/volume`,
//! so `‖f‖² = w Σ |f̂(k)|²` holds exactly.

mod field;
mod geometry;
mod grid;
mod shells;
mod spacetime;

pub use field::{mode_freq, Mode, NormKind, Precision, SpectralField};
pub use geometry::TorusGeometry;
pub use grid::{
    alias_free_size, fft_nd, from_physical, integrate_abs_power, integrate_product,
    power_nonlinearity, product, smooth_size, to_physical, to_physical_size, Factor,
    PhysicalGrid,
};
pub use spacetime::{lp_spacetime_norm, simpson_weights};
pub use shells::{dyadic_levels, sharp_shell, smooth_shell_weight};
