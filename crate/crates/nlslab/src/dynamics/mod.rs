//! Time integration of the Galerkin-truncated NLS `i u_t + Δu = s|u|^{4/d}u` on the lattice.

use num_complex::Complex64;
use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energies::{energy, mass, Sign};
use crate::error::{invalid, Error, Result};
use crate::spectral::{
    alias_free_size, from_physical, power_nonlinearity, smooth_size, to_physical_size, Mode, SpectralField,
    TorusGeometry,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Strang,
    /// Strang with the unprojected pointwise phase; first order against the Galerkin system.
    StrangPhase,
    Rk4Galerkin,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strang" => Ok(Integrator::Strang),
            "strang-phase" => Ok(Integrator::StrangPhase),
            "rk4-galerkin" | "rk4" => Ok(Integrator::Rk4Galerkin),
            _ => Err(invalid("integrator", format!("{s:?} is not strang, strang-phase or rk4-galerkin"))),
        }
    }
}

/// One excited mode with its physical amplitude: the field gains `amp·e^{ik·x}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitude {
    pub mode: Mode,
    pub amp: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialData {
    Modes { modes: Vec<ModeAmplitude> },
    /// `|û(k)| ∝ ⟨k⟩^{-s-d/2-0.01}` with uniform phases on the whole lattice, scaled to `mass`.
    RandomHs { s: f64, mass: f64, seed: u64 },
    /// `count` distinct lattice modes with complex Gaussian coefficients, scaled to `mass`.
    RandomSparse { count: usize, mass: f64, seed: u64 },
}

/// Mass of the small-data preset.
pub const SMALL_MASS: f64 = 0.01;

impl InitialData {
    pub fn build(&self, geom: &TorusGeometry, cutoff: usize) -> Result<SpectralField> {
        let f = match self {
            InitialData::Modes { modes } => {
                let list: Vec<(Mode, Complex64)> =
                    modes.iter().map(|m| (m.mode, m.amp * geom.volume())).collect();
                return SpectralField::from_modes(geom, cutoff, &list);
            }
            InitialData::RandomHs { s, mass: target, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let decay = -s - geom.dim() as f64 / 2.0 - 0.01;
                let f = SpectralField::from_fn(geom, cutoff, |_| Complex64::new(0.0, 0.0));
                let mut f = f;
                for i in 0..f.len() {
                    let k2 = f.freq_sq(f.mode_of(i));
                    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
                    f.coefficients_mut()[i] = Complex64::from_polar((1.0 + k2).powf(decay / 2.0), phase);
                }
                normalized(f, *target)?
            }
            InitialData::RandomSparse { count, mass: target, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut f = SpectralField::zeros(geom, cutoff);
                if *count == 0 || *count > f.len() {
                    return Err(invalid("count", format!("{count} modes on a lattice of {}", f.len())));
                }
                let pick = sample(&mut rng, f.len(), *count).into_vec();
                let g = SpectralField::random(geom, cutoff, &mut rng, |_| 1.0);
                for i in pick {
                    f.coefficients_mut()[i] = g.coefficients()[i];
                }
                normalized(f, *target)?
            }
        };
        Ok(f)
    }
}

fn normalized(f: SpectralField, target: f64) -> Result<SpectralField> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(invalid("mass", format!("{target} is not a finite nonnegative value")));
    }
    let m = mass(&f);
    if m == 0.0 {
        return Ok(f);
    }
    Ok(f.scale((target / m).sqrt().into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub geometry: TorusGeometry,
    pub cutoff: usize,
    pub initial: InitialData,
    pub sign: Sign,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    /// Off: free flow only.
    pub nonlinear: bool,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("{} is not positive", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(invalid("t_end", format!("{} is shorter than dt = {}", self.t_end, self.dt)));
        }
        if self.sample_stride == 0 {
            return Err(invalid("sample_stride", "must be at least 1"));
        }
        Ok(())
    }
}

/// `min(0.1/max|k|², λ/(1000 N))`, the second term only when a threshold is given.
pub fn default_dt(geom: &TorusGeometry, cutoff: usize, threshold: Option<f64>) -> f64 {
    let f = SpectralField::zeros(geom, cutoff);
    let kmax2 = (0..f.len()).map(|i| f.freq_sq(f.mode_of(i))).fold(1.0, f64::max);
    let linear = 0.1 / kmax2;
    match threshold {
        Some(n) => linear.min(geom.lambda() / (n * 1000.0)),
        None => linear,
    }
}

/// Power `p` with `|u|^{p-1}u = |u|^{4/d}u`.
fn power(u: &SpectralField) -> usize {
    1 + 4 / u.dim()
}

/// `−i|k|²û − s·i·P_K(|u|^{4/d}u)^`.
pub fn galerkin_rhs(u: &SpectralField, sign: Sign) -> SpectralField {
    galerkin_rhs_with(u, sign, true)
}

fn galerkin_rhs_with(u: &SpectralField, sign: Sign, nonlinear: bool) -> SpectralField {
    let mut out = u.clone();
    for i in 0..out.len() {
        let k2 = u.freq_sq(u.mode_of(i));
        out.coefficients_mut()[i] *= Complex64::new(0.0, -k2);
    }
    if nonlinear {
        let f = power_nonlinearity(u, power(u));
        out.axpy(Complex64::new(0.0, -sign.value()), &f);
    }
    out
}

pub fn rk4_step(u: &SpectralField, dt: f64, sign: Sign) -> SpectralField {
    rk4_step_with(u, dt, sign, true)
}

fn rk4_step_with(u: &SpectralField, dt: f64, sign: Sign, nonlinear: bool) -> SpectralField {
    let f = |v: &SpectralField| galerkin_rhs_with(v, sign, nonlinear);
    let stage = |k: &SpectralField, c: f64| {
        let mut v = u.clone();
        v.axpy((c * dt).into(), k);
        v
    };
    let k1 = f(u);
    let k2 = f(&stage(&k1, 0.5));
    let k3 = f(&stage(&k2, 0.5));
    let k4 = f(&stage(&k3, 1.0));
    let mut out = u.clone();
    out.axpy((dt / 6.0).into(), &k1);
    out.axpy((dt / 3.0).into(), &k2);
    out.axpy((dt / 3.0).into(), &k3);
    out.axpy((dt / 6.0).into(), &k4);
    out
}

/// Exact flow of `i u_t = s|u|^{4/d}u` on the oversampled grid, projected back to the lattice.
fn nonlinear_phase(u: &SpectralField, dt: f64, sign: Sign) -> SpectralField {
    let m = smooth_size(alias_free_size(power(u), u.cutoff()));
    let g = to_physical_size(u, m).expect("grid exceeds the lattice");
    let half = (2 / u.dim()) as i32;
    let s = sign.value();
    let g = g.map(|z| z * Complex64::from_polar(1.0, -s * dt * z.norm_sqr().powi(half)));
    from_physical(&g, u.cutoff()).expect("grid exceeds the lattice")
}

/// Largest nonlinear phase `dt·|u|^{4/d}` one RK4 substep of the nonlinear sub-flow may take.
const SUBSTEP_PHASE: f64 = 0.02;

/// Flow of the projected equation `i u_t = s·P_K(|u|^{4/d}u)` by RK4 substeps.
///
/// Substeps are sized from the bound `sup|u| <= w Σ|û|` so the phase per substep stays below
/// [`SUBSTEP_PHASE`]; on a single mode the error is then below `1e-10` of the phase.
fn projected_nonlinear_flow(u: &SpectralField, dt: f64, sign: Sign) -> SpectralField {
    let sup = u.geometry().weight() * u.coefficients().iter().map(|c| c.norm()).sum::<f64>();
    let phase = dt.abs() * sup.powi(4 / u.dim() as i32);
    let n = (phase / SUBSTEP_PHASE).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let f = |v: &SpectralField| power_nonlinearity(v, power(v)).scale(Complex64::new(0.0, -sign.value()));
    let mut v = u.clone();
    for _ in 0..n {
        let stage = |k: &SpectralField, c: f64| {
            let mut w = v.clone();
            w.axpy((c * h).into(), k);
            w
        };
        let k1 = f(&v);
        let k2 = f(&stage(&k1, 0.5));
        let k3 = f(&stage(&k2, 0.5));
        let k4 = f(&stage(&k3, 1.0));
        v.axpy((h / 6.0).into(), &k1);
        v.axpy((h / 3.0).into(), &k2);
        v.axpy((h / 3.0).into(), &k3);
        v.axpy((h / 6.0).into(), &k4);
    }
    v
}

/// Half free step, flow of the projected nonlinearity, half free step.
pub fn strang_step(u: &SpectralField, dt: f64, sign: Sign) -> SpectralField {
    let half = u.free_evolve(0.5 * dt);
    projected_nonlinear_flow(&half, dt, sign).free_evolve(0.5 * dt)
}

/// Half free step, pointwise phase `u·exp(−s·i·dt·|u|^{4/d})` on the oversampled grid, truncation,
/// half free step. Exact on plane waves; the truncation makes it first order against the
/// Galerkin system.
pub fn strang_phase_step(u: &SpectralField, dt: f64, sign: Sign) -> SpectralField {
    let half = u.free_evolve(0.5 * dt);
    nonlinear_phase(&half, dt, sign).free_evolve(0.5 * dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    pub monitor: Vec<MonitorRecord>,
    /// Step actually used: `t_end / round(t_end / dt)`.
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &SpectralField {
        self.fields.last().expect("trajectory holds the initial state")
    }
}

/// Integrate to `t_end`, sampling the initial state and every `sample_stride` steps (and the
/// final step). Aborts with the last finite state if coefficients blow up.
pub fn evolve(cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let u0 = cfg.initial.build(&cfg.geometry, cfg.cutoff)?;
    evolve_from(u0, cfg)
}

/// As [`evolve`] from an explicit initial field (its geometry and cutoff win over the config's).
pub fn evolve_from(u0: SpectralField, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let record = |step: usize, u: &SpectralField| MonitorRecord {
        step,
        t: step as f64 * dt,
        mass: mass(u),
        energy: if cfg.nonlinear { energy(u, cfg.sign) } else { crate::energies::kinetic(u) },
    };
    let mut u = u0;
    let mut out = Trajectory {
        times: vec![0.0],
        fields: vec![u.clone()],
        monitor: vec![record(0, &u)],
        dt,
    };
    for step in 1..=steps {
        let next = match (cfg.integrator, cfg.nonlinear) {
            (_, false) => u.free_evolve(dt),
            (Integrator::Strang, true) => strang_step(&u, dt, cfg.sign),
            (Integrator::StrangPhase, true) => strang_phase_step(&u, dt, cfg.sign),
            (Integrator::Rk4Galerkin, true) => rk4_step(&u, dt, cfg.sign),
        };
        if !next.is_finite() {
            return Err(Error::NonFinite {
                t: step as f64 * dt,
                last_good: Box::new(u),
            });
        }
        u = next;
        if step % cfg.sample_stride == 0 || step == steps {
            out.times.push(step as f64 * dt);
            out.fields.push(u.clone());
            out.monitor.push(record(step, &u));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Factor;

    fn circle() -> TorusGeometry {
        TorusGeometry::circle(1.0).unwrap()
    }

    fn config(initial: InitialData, integrator: Integrator, dt: f64, t_end: f64) -> EvolutionConfig {
        EvolutionConfig {
            geometry: circle(),
            cutoff: 4,
            initial,
            sign: Sign::Defocusing,
            integrator,
            dt,
            t_end,
            sample_stride: 1,
            nonlinear: true,
        }
    }

    #[test]
    fn single_mode_rhs_is_a_phase_rotation() {
        let c = Complex64::new(0.4, -0.3);
        let u = SpectralField::plane_wave(&circle(), 4, [2, 0], c).unwrap();
        for sign in [Sign::Defocusing, Sign::Focusing] {
            let r = galerkin_rhs(&u, sign);
            let expect = Complex64::new(0.0, -(4.0 + sign.value() * c.norm_sqr().powi(2))) * u.get([2, 0]);
            assert!((r.get([2, 0]) - expect).norm() < 1e-13);
            assert!(r.coefficients().iter().enumerate().all(|(i, z)| i == 6 || z.norm() < 1e-13));
        }
    }

    #[test]
    fn quintic_matches_five_fold_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = circle();
        let mut u = SpectralField::random(&g, 4, &mut rng, |_| 0.3);
        u.set([4, 0], 0.0.into()).unwrap();
        let fast = power_nonlinearity(&u, 5);
        let w = g.weight();
        let mut slow = SpectralField::zeros(&g, 4);
        let r = -4i64..=4;
        for a in r.clone() {
            for b in r.clone() {
                for c in r.clone() {
                    for d in r.clone() {
                        for e in r.clone() {
                            // u ū u ū u: conjugated factors contribute conj(û(-k))
                            let k = a - b + c - d + e;
                            if k.abs() > 4 {
                                continue;
                            }
                            let v = u.get([a, 0]) * u.get([b, 0]).conj() * u.get([c, 0]) * u.get([d, 0]).conj() * u.get([e, 0]);
                            let i = slow.index([k, 0]).unwrap();
                            slow.coefficients_mut()[i] += v * w.powi(4);
                        }
                    }
                }
            }
        }
        assert!(fast.max_abs_diff(&slow) < 1e-12, "{}", fast.max_abs_diff(&slow));
        let alt = crate::spectral::product(
            &[Factor::plain(&u), Factor::conj(&u), Factor::plain(&u), Factor::conj(&u), Factor::plain(&u)],
            4,
        )
        .unwrap();
        assert!(fast.max_abs_diff(&alt) < 1e-12);
    }

    #[test]
    fn rhs_respects_conjugation_and_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = circle();
        let u = SpectralField::random(&g, 4, &mut rng, |_| 0.3);
        // conj(u) solves the time-reversed equation: rhs(ū) = −conj(rhs(u))
        let lhs = galerkin_rhs(&u.conj_field(), Sign::Defocusing);
        let rhs = galerkin_rhs(&u, Sign::Defocusing).conj_field().scale((-1.0).into());
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        // even data stays even
        let reflect = |f: &SpectralField| SpectralField::from_fn(&g, 4, |m| f.get([-m[0], 0]));
        let mut even = u.clone();
        even.axpy(1.0.into(), &reflect(&u));
        let r = galerkin_rhs(&even, Sign::Focusing);
        assert!(r.max_abs_diff(&reflect(&r)) < 1e-13);
    }

    #[test]
    fn strang_reproduces_plane_wave() {
        let c = Complex64::new(0.7, 0.2);
        let init = InitialData::Modes {
            modes: vec![ModeAmplitude { mode: [3, 0], amp: c }],
        };
        let phase = -(9.0 + c.norm_sqr().powi(2));
        let exact = SpectralField::plane_wave(&circle(), 4, [3, 0], c * Complex64::from_polar(1.0, phase)).unwrap();
        for integrator in [Integrator::Strang, Integrator::StrangPhase] {
            let tr = evolve(&config(init.clone(), integrator, 1e-3, 1.0)).unwrap();
            assert!(tr.last().max_abs_diff(&exact) / circle().volume() < 1e-10, "{integrator:?}");
        }
    }

    #[test]
    fn strang_conserves_mass_per_step() {
        let init = InitialData::RandomSparse { count: 5, mass: 1.0, seed: 3 };
        let u = init.build(&circle(), 4).unwrap();
        let v = strang_step(&u, 0.01, Sign::Focusing);
        assert!((mass(&v) - mass(&u)).abs() < 1e-12);
        // the truncated pointwise phase loses the out-of-lattice mass, at second order per step
        let loss = |dt: f64| mass(&u) - mass(&strang_phase_step(&u, dt, Sign::Focusing));
        assert!(loss(0.02) > 0.0 && loss(0.02) / loss(0.01) > 3.5);
        let pw = SpectralField::plane_wave(&circle(), 4, [1, 0], 0.9.into()).unwrap();
        assert!((mass(&strang_phase_step(&pw, 0.1, Sign::Focusing)) - mass(&pw)).abs() < 1e-12);
    }

    #[test]
    fn free_flow_switch_matches_propagator() {
        let init = InitialData::RandomSparse { count: 6, mass: 2.0, seed: 1 };
        let mut cfg = config(init, Integrator::Rk4Galerkin, 0.01, 0.3);
        cfg.nonlinear = false;
        let tr = evolve(&cfg).unwrap();
        let u0 = &tr.fields[0];
        assert!(tr.last().max_abs_diff(&u0.free_evolve(0.3)) < 1e-12);
        assert_eq!(tr.times.len(), 31);
    }

    #[test]
    fn random_profiles_hit_the_requested_mass() {
        let g = TorusGeometry::new(2, &[0.9], 2.0).unwrap();
        for init in [
            InitialData::RandomHs { s: 0.4, mass: SMALL_MASS, seed: 2 },
            InitialData::RandomSparse { count: 7, mass: 3.0, seed: 2 },
        ] {
            let f = init.build(&g, 3).unwrap();
            let target = match init {
                InitialData::RandomHs { mass, .. } | InitialData::RandomSparse { mass, .. } => mass,
                _ => unreachable!(),
            };
            assert!((mass(&f) - target).abs() < 1e-12 * target.max(1.0));
        }
        assert_eq!(
            InitialData::RandomHs { s: 0.4, mass: 1.0, seed: 5 }.build(&g, 3).unwrap(),
            InitialData::RandomHs { s: 0.4, mass: 1.0, seed: 5 }.build(&g, 3).unwrap()
        );
    }

    #[test]
    fn blow_up_returns_last_good_state() {
        let init = InitialData::RandomSparse { count: 5, mass: 1e6, seed: 3 };
        let cfg = config(init, Integrator::Rk4Galerkin, 0.1, 10.0);
        match evolve(&cfg) {
            Err(Error::NonFinite { last_good, .. }) => assert!(last_good.is_finite()),
            other => panic!("expected a non-finite abort, got {:?}", other.map(|t| t.times.len())),
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let init = InitialData::RandomSparse { count: 5, mass: 1.0, seed: 3 };
        assert!(evolve(&config(init.clone(), Integrator::Strang, 0.0, 1.0)).is_err());
        assert!(evolve(&config(init, Integrator::Strang, 0.1, 0.01)).is_err());
        assert!(default_dt(&circle(), 6, Some(4.0)) <= 0.1 / 36.0);
    }
}
