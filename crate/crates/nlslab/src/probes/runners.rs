//! One runner per CLI subcommand: read the config, run, fill a [`RunReport`].

use num_complex::Complex64;

use super::config::Config;
use super::conservation::{run_almost_conservation, run_energy_track, ConservationConfig};
use super::report::{num, RunReport};
use super::strichartz::{run_strichartz_probe, StrichartzConfig};
use crate::dynamics::{default_dt, evolve, EvolutionConfig, InitialData, Integrator, ModeAmplitude, SMALL_MASS};
use crate::energies::{BigTermMethod, Sign};
use crate::error::{Error, Result};
use crate::resonance::{resonance_census, verify_all, SymbolParams};
use crate::smoothing::{gwp_budget, BudgetOptions};
use crate::spectral::{Precision, TorusGeometry};

/// Largest spread `max/min` of a constant across a sweep that still counts as stable.
pub const STABILITY_FACTOR: f64 = 2.0;

/// Tolerance of the closed-form budget thresholds.
pub const CROSSING_TOLERANCE: f64 = 1e-12;

pub const COMMANDS: [&str; 7] = [
    "simulate",
    "energy-track",
    "strichartz",
    "census",
    "verify",
    "budget",
    "conservation",
];

/// Run `command` with `cfg`; unknown config keys are an error once the runner has read its own.
pub fn run(command: &str, cfg: &Config) -> Result<RunReport> {
    let mut report = match command {
        "simulate" => simulate(cfg)?,
        "energy-track" => energy_track(cfg)?,
        "strichartz" => strichartz(cfg)?,
        "census" => census(cfg)?,
        "verify" => verify(cfg)?,
        "budget" => budget(cfg)?,
        "conservation" => conservation(cfg)?,
        other => return Err(Error::Config(format!("unknown command {other}"))),
    };
    // global keys handled by the binary; read here so they are echoed and not rejected
    cfg.get_opt::<String>("output_dir")?;
    cfg.get_opt::<usize>("threads")?;
    cfg.finish()?;
    report.config = cfg.echo();
    Ok(report)
}

fn geometry(cfg: &Config, prefix: &str, default_dim: usize) -> Result<TorusGeometry> {
    let dim = cfg.get(&format!("{prefix}.dim"), default_dim)?;
    let lambda = cfg.get(&format!("{prefix}.lambda"), 1.0)?;
    let gamma = if dim == 2 {
        cfg.get_list(&format!("{prefix}.gamma"), &[1.0])?
    } else {
        Vec::new()
    };
    TorusGeometry::new(dim, &gamma, lambda)
}

fn default_s(dim: usize) -> f64 {
    if dim == 1 {
        0.4
    } else {
        0.7
    }
}

fn seed(cfg: &Config) -> Result<u64> {
    cfg.get("seed", 1u64)
}

fn pass_fail(ok: bool) -> String {
    if ok { "true" } else { "false" }.to_string()
}

/// `max/min` over positive finite values; `None` when fewer than two.
fn spread(values: &[f64]) -> Option<f64> {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
    if v.len() < 2 {
        return None;
    }
    let hi = v.iter().copied().fold(f64::MIN, f64::max);
    let lo = v.iter().copied().fold(f64::MAX, f64::min);
    Some(hi / lo)
}

/// Mode list `kx ky re im, kx ky re im, ...` with physical amplitudes.
fn parse_modes(text: &str) -> Result<Vec<ModeAmplitude>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let parts: Vec<&str> = entry.split_whitespace().collect();
            let bad = || Error::Config(format!("mode entry {entry:?} is not `kx ky re im`"));
            if parts.len() != 4 {
                return Err(bad());
            }
            let kx = parts[0].parse::<i64>().map_err(|_| bad())?;
            let ky = parts[1].parse::<i64>().map_err(|_| bad())?;
            let re = parts[2].parse::<f64>().map_err(|_| bad())?;
            let im = parts[3].parse::<f64>().map_err(|_| bad())?;
            Ok(ModeAmplitude {
                mode: [kx, ky],
                amp: Complex64::new(re, im),
            })
        })
        .collect()
}

fn initial_data(cfg: &Config, prefix: &str, dim: usize, default_kind: &str) -> Result<InitialData> {
    let kind: String = cfg.get(&format!("{prefix}.initial"), default_kind.to_string())?;
    let mass = cfg.get(&format!("{prefix}.mass"), SMALL_MASS)?;
    match kind.as_str() {
        "hs" => Ok(InitialData::RandomHs {
            s: cfg.get(&format!("{prefix}.data_s"), default_s(dim))?,
            mass,
            seed: seed(cfg)?,
        }),
        "sparse" => Ok(InitialData::RandomSparse {
            count: cfg.get(&format!("{prefix}.count"), 6usize)?,
            mass,
            seed: seed(cfg)?,
        }),
        "modes" => {
            let text: String = cfg.get(&format!("{prefix}.modes"), String::new())?;
            Ok(InitialData::Modes {
                modes: parse_modes(&text)?,
            })
        }
        other => Err(Error::Config(format!("{prefix}.initial: {other:?} is not hs, sparse or modes"))),
    }
}

fn evolution(cfg: &Config, prefix: &str, defaults: (usize, usize, &str, f64)) -> Result<EvolutionConfig> {
    let (dim, cutoff, kind, t_end) = defaults;
    let geometry = geometry(cfg, prefix, dim)?;
    let cutoff = cfg.get(&format!("{prefix}.cutoff"), cutoff)?;
    let initial = initial_data(cfg, prefix, geometry.dim(), kind)?;
    let dt_default = default_dt(&geometry, cutoff, None);
    Ok(EvolutionConfig {
        cutoff,
        initial,
        sign: cfg.get(&format!("{prefix}.sign"), Sign::Defocusing)?,
        integrator: cfg.get(&format!("{prefix}.integrator"), "strang".to_string())?.parse::<Integrator>()?,
        dt: cfg.get(&format!("{prefix}.dt"), dt_default)?,
        t_end: cfg.get(&format!("{prefix}.t_end"), t_end)?,
        sample_stride: cfg.get(&format!("{prefix}.sample_stride"), 10usize)?,
        nonlinear: cfg.get(&format!("{prefix}.nonlinear"), true)?,
        geometry,
    })
}

pub fn simulate(cfg: &Config) -> Result<RunReport> {
    let evo = evolution(cfg, "simulate", (1, 16, "hs", 1.0))?;
    let checkpoint: bool = cfg.get("simulate.checkpoint", true)?;
    let traj = evolve(&evo)?;
    let mut r = RunReport::new("simulate");
    r.seeds.push(seed(cfg)?);
    let t = r.table("monitor", &["step", "t", "mass", "energy"]);
    for m in &traj.monitor {
        t.push(vec![m.step.to_string(), num(m.t), num(m.mass), num(m.energy)]);
    }
    let m0 = traj.monitor[0].mass;
    let drift = traj.monitor.iter().fold(0.0f64, |a, m| a.max((m.mass - m0).abs()));
    let rel = drift / m0.max(f64::MIN_POSITIVE);
    match evo.integrator {
        Integrator::Rk4Galerkin => r.note(format!("mass drift {rel:.3e} (relative, O(dt⁴) for rk4)")),
        _ => r.check("mass-conservation", rel < 1e-10, format!("relative mass drift {rel:.3e}")),
    }
    let e0 = traj.monitor[0].energy;
    let edrift = traj.monitor.iter().fold(0.0f64, |a, m| a.max((m.energy - e0).abs()));
    r.note(format!("dt used {}, energy drift {edrift:.3e}", traj.dt));
    if checkpoint {
        let mut bytes = Vec::new();
        traj.last().write_to(&mut bytes, Precision::Complex128)?;
        r.attach("final.field", bytes);
    }
    Ok(r)
}

fn big_term_method(cfg: &Config) -> Result<BigTermMethod> {
    let name: String = cfg.get("track.big_term", "reduced".to_string())?;
    let samples = cfg.get("track.mc_samples", 200_000usize)?;
    let seed = seed(cfg)?;
    match name.as_str() {
        "reduced" => Ok(BigTermMethod::Reduced),
        "brute" => Ok(BigTermMethod::Brute {
            fallback_samples: samples,
            seed,
        }),
        "monte-carlo" => Ok(BigTermMethod::MonteCarlo { samples, seed }),
        other => Err(Error::Config(format!("track.big_term: {other:?} is not reduced, brute or monte-carlo"))),
    }
}

pub fn energy_track(cfg: &Config) -> Result<RunReport> {
    let mut evo = evolution(cfg, "track", (1, 6, "sparse", 0.1))?;
    evo.sample_stride = cfg.get("track.sample_stride", 1usize)?;
    let params = SymbolParams::new(
        evo.geometry.dim(),
        cfg.get("track.n", 2.0)?,
        cfg.get("track.s", default_s(evo.geometry.dim()))?,
        cfg.get("resonance.gap_factor", 4.0)?,
    )?;
    let method = big_term_method(cfg)?;
    let track = run_energy_track(&evo, &params, method)?;
    let mut r = RunReport::new("energy-track");
    r.seeds.push(seed(cfg)?);
    let t = r.table(
        "energy_track",
        &[
            "t",
            "mass",
            "energy",
            "e_i1",
            "correction",
            "e_i2",
            "lambda_mbar_n",
            "lambda_mbar_n4",
            "residual",
        ],
    );
    for (x, res) in track.series.samples.iter().zip(&track.series.residual) {
        t.push(vec![
            num(x.t),
            num(x.mass),
            num(x.energy),
            num(x.e_i1),
            num(x.correction),
            num(x.e_i2),
            num(x.lambda_mbar_n),
            num(x.lambda_mbar_big),
            num(*res),
        ]);
    }
    if track.series.monte_carlo {
        let err = track.series.samples.iter().fold(0.0f64, |a, x| a.max(x.big_std_err));
        r.flag(format!("big term estimated by Monte-Carlo, largest standard error {err:.3e}"));
    }
    if track.dropped > 0 {
        r.flag("final off-stride sample dropped to keep uniform spacing");
    }
    let max_res = track.series.max_abs_residual();
    r.check("residual-finite", max_res.is_finite(), format!("max |r(t)| = {max_res:.3e}"));
    r.note(format!("dt used {}", track.dt));
    Ok(r)
}

pub fn strichartz(cfg: &Config) -> Result<RunReport> {
    let d = StrichartzConfig::default();
    let sc = StrichartzConfig {
        lambda: cfg.get("strichartz.lambda", d.lambda)?,
        n: cfg.get("strichartz.n", d.n)?,
        m_values: cfg.get_list("strichartz.m", &d.m_values)?,
        samples: cfg.get("strichartz.samples", d.samples)?,
        seed: seed(cfg)?,
        t_end: cfg.get_opt("strichartz.t_end")?,
    };
    let tolerance = cfg.get("strichartz.slope_tolerance", 0.1)?;
    let rep = run_strichartz_probe(&sc)?;
    let mut r = RunReport::new("strichartz");
    r.seeds.push(sc.seed);
    let t = r.table(
        "strichartz",
        &["n", "m", "lambda", "t", "norm", "max", "mean", "samples", "time_steps", "grid"],
    );
    for x in &rep.rows {
        t.push(vec![
            num(x.n),
            num(x.m),
            num(x.lambda),
            num(x.t),
            x.norm.clone(),
            num(x.max),
            num(x.mean),
            x.samples.to_string(),
            x.time_steps.to_string(),
            x.grid.to_string(),
        ]);
    }
    let t = r.table("calibration", &["name", "measured", "exact", "rel_error"]);
    for c in &rep.calibration {
        t.push(vec![c.name.clone(), num(c.measured), num(c.exact), num(c.rel_error)]);
    }
    let t = r.table("fit", &["statistic", "slope", "predicted"]);
    t.push(vec!["max".into(), rep.slope_max.map_or(String::new(), num), num(rep.predicted_slope)]);
    t.push(vec!["mean".into(), rep.slope_mean.map_or(String::new(), num), num(rep.predicted_slope)]);
    let worst = rep.calibration.iter().fold(0.0f64, |a, c| a.max(c.rel_error));
    r.check("calibration", worst < 1e-10, format!("largest relative error {worst:.3e}"));
    match rep.slope_max {
        Some(s) => r.check(
            "bilinear-slope",
            (s - rep.predicted_slope).abs() <= tolerance,
            format!("slope of max over samples {s:.4} vs {} ± {tolerance}", rep.predicted_slope),
        ),
        None => r.flag("single M value: no slope fitted, raw table only"),
    }
    Ok(r)
}

pub fn census(cfg: &Config) -> Result<RunReport> {
    let geom = geometry(cfg, "census", 1)?;
    let dim = geom.dim();
    let ns = cfg.get_list("census.n", &[4.0, 8.0])?;
    let kmaxes = cfg.get_list("census.kmax", &[if dim == 1 { 32i64 } else { 16 }])?;
    let gaps = cfg.get_list("census.gaps", &[3.0, 4.0, 6.0])?;
    let s = cfg.get("census.s", default_s(dim))?;
    let mut r = RunReport::new("census");
    let mut classes = Vec::new();
    let mut totals = Vec::new();
    let mut sohinger = Vec::new();
    let mut stability = Vec::new();
    let mut checks = Vec::new();
    for &n in &ns {
        for &kmax in &kmaxes {
            let mut constants = Vec::new();
            for &gap in &gaps {
                let rep = resonance_census(&geom, kmax, &SymbolParams::new(dim, n, s, gap)?)?;
                let key = vec![num(n), kmax.to_string(), num(gap)];
                for c in &rep.classes {
                    let mut row = key.clone();
                    row.extend([
                        c.class.clone(),
                        c.count.to_string(),
                        c.canonical.to_string(),
                        num(c.min_abs_omega),
                        num(c.max_ratio),
                        num(c.min_constant),
                        format!("{:?}", c.witness_tuple),
                    ]);
                    classes.push(row);
                }
                let mut row = key.clone();
                row.extend([
                    rep.total.to_string(),
                    rep.expected_total.to_string(),
                    rep.violation_count.to_string(),
                    num(rep.nonresonant_constant),
                ]);
                totals.push(row);
                for x in &rep.sohinger {
                    let mut row = key.clone();
                    row.extend([x.scale.to_string(), format!("{:?}", x.tuple), num(x.omega), x.verdict.clone()]);
                    sohinger.push(row);
                }
                let witness = rep
                    .violations
                    .first()
                    .map_or(String::new(), |v| format!(", first witness {v:?}"));
                checks.push((
                    format!("census N={n} Kmax={kmax} G={gap}"),
                    rep.passed(),
                    format!(
                        "total {} of {}, {} violations{witness}",
                        rep.total, rep.expected_total, rep.violation_count
                    ),
                ));
                constants.push(rep.nonresonant_constant);
            }
            let sp = spread(&constants);
            let stable = sp.is_none_or(|x| x <= STABILITY_FACTOR);
            stability.push(vec![
                num(n),
                kmax.to_string(),
                num(constants.iter().copied().fold(f64::MAX, f64::min)),
                num(constants.iter().copied().fold(f64::MIN, f64::max)),
                sp.map_or(String::new(), num),
                pass_fail(stable),
            ]);
            checks.push((
                format!("nonresonant-constant-stability N={n} Kmax={kmax}"),
                stable,
                format!("max/min over G = {}", sp.map_or("n/a".into(), |x| format!("{x:.3}"))),
            ));
        }
    }
    let cols = ["n", "kmax", "gap"];
    let mut add = |name: &str, extra: &[&str], rows: Vec<Vec<String>>| {
        let all: Vec<&str> = cols.iter().chain(extra).copied().collect();
        let t = r.table(name, &all);
        rows.into_iter().for_each(|x| t.push(x));
    };
    add(
        "classes",
        &["class", "count", "canonical", "min_abs_omega", "max_ratio", "min_constant", "witness_tuple"],
        classes,
    );
    add("totals", &["total", "expected_total", "violations", "nonresonant_constant"], totals);
    add("sohinger", &["scale", "tuple", "omega", "verdict"], sohinger);
    let t = r.table("constant_stability", &["n", "kmax", "min", "max", "spread", "stable"]);
    stability.into_iter().for_each(|x| t.push(x));
    for (name, ok, detail) in checks {
        r.check(&name, ok, detail);
    }
    Ok(r)
}

pub fn verify(cfg: &Config) -> Result<RunReport> {
    let geom = geometry(cfg, "verify", 1)?;
    let dim = geom.dim();
    let ns = cfg.get_list("verify.n", &[4.0, 8.0, 16.0])?;
    let kmax = cfg.get("verify.kmax", if dim == 1 { 32i64 } else { 16 })?;
    let gaps = cfg.get_list("verify.gaps", &[3.0, 4.0, 6.0])?;
    let s = cfg.get("verify.s", default_s(dim))?;
    let mut r = RunReport::new("verify");
    let mut rows = Vec::new();
    // region -> [(n, gap, sup)]
    let mut by_region: Vec<(String, Vec<(f64, f64, f64)>)> = Vec::new();
    for &n in &ns {
        for &gap in &gaps {
            for x in verify_all(&geom, kmax, &SymbolParams::new(dim, n, s, gap)?)? {
                rows.push(vec![
                    num(n),
                    kmax.to_string(),
                    num(gap),
                    x.region.clone(),
                    x.count.to_string(),
                    num(x.sup_ratio),
                    format!("{:?}", x.witness),
                    x.warning.clone().unwrap_or_default(),
                ]);
                if let Some(w) = &x.warning {
                    r.flag(format!("region {} at N={n} G={gap}: {w}", x.region));
                }
                match by_region.iter_mut().find(|(name, _)| *name == x.region) {
                    Some((_, v)) => v.push((n, gap, x.sup_ratio)),
                    None => by_region.push((x.region.clone(), vec![(n, gap, x.sup_ratio)])),
                }
            }
        }
    }
    let t = r.table(
        "bounds",
        &["n", "kmax", "gap", "region", "count", "sup_ratio", "witness", "warning"],
    );
    rows.into_iter().for_each(|x| t.push(x));
    let mut stab = Vec::new();
    for (region, pts) in &by_region {
        let sups: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let finite = sups.iter().all(|x| x.is_finite());
        let sp = spread(&sups);
        let stable = finite && sp.is_none_or(|x| x <= STABILITY_FACTOR);
        // growth: at some G the sup rises strictly along the N grid by more than the factor
        let growth = gaps.iter().any(|&g| {
            let line: Vec<f64> = pts.iter().filter(|p| p.1 == g).map(|p| p.2).collect();
            line.len() >= 2
                && line.windows(2).all(|w| w[1] > w[0])
                && line[line.len() - 1] > STABILITY_FACTOR * line[0]
        });
        stab.push(vec![
            region.clone(),
            num(sups.iter().copied().fold(f64::MAX, f64::min)),
            num(sups.iter().copied().fold(f64::MIN, f64::max)),
            sp.map_or(String::new(), num),
            pass_fail(stable),
            pass_fail(growth),
        ]);
        let worst = pts
            .iter()
            .max_by(|a, b| a.2.total_cmp(&b.2))
            .map_or(String::new(), |p| format!(" (max at N={}, G={})", p.0, p.1));
        r.check(
            &format!("{region}-finite-and-stable"),
            stable,
            format!("max/min over (N, G) = {}{worst}", sp.map_or("n/a".into(), |x| format!("{x:.3}"))),
        );
        r.check(&format!("{region}-no-growth"), finite && !growth, "sup ratio along N at fixed G");
    }
    let t = r.table("stability", &["region", "min", "max", "spread", "stable", "growth_flag"]);
    stab.into_iter().for_each(|x| t.push(x));
    Ok(r)
}

/// Root of the (increasing) total existence exponent in `s`, by bisection.
fn numeric_crossing(d: usize, opts: BudgetOptions) -> Result<f64> {
    let f = |s: f64| gwp_budget(d, s, 2.0, opts).map(|p| p.total_existence_exponent);
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-3);
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::Consistency(format!("no sign change of the {d}d exponent on (0, 1)")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn budget(cfg: &Config) -> Result<RunReport> {
    let default_s: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let s_values = cfg.get_list("budget.s", &default_s)?;
    let n = cfg.get("budget.n", 1024.0)?;
    let opts = BudgetOptions {
        epsilon: cfg.get("budget.epsilon", BudgetOptions::default().epsilon)?,
        delta: cfg.get("budget.delta", BudgetOptions::default().delta)?,
        slack: cfg.get("budget.slack", BudgetOptions::default().slack)?,
    };
    let lossless = BudgetOptions {
        epsilon: 0.0,
        slack: 0.0,
        ..opts
    };
    let mut r = RunReport::new("budget");
    let mut rows = Vec::new();
    let mut monotone = [true, true];
    for d in [1usize, 2] {
        let mut prev = f64::NEG_INFINITY;
        for &s in &s_values {
            let p = gwp_budget(d, s, n, opts)?;
            if p.total_existence_exponent <= prev {
                monotone[d - 1] = false;
            }
            prev = p.total_existence_exponent;
            rows.push(vec![
                d.to_string(),
                num(s),
                num(p.n),
                num(p.lambda_exponent),
                num(p.lambda),
                num(p.per_step_time),
                num(p.step_count_exponent),
                num(p.step_count),
                num(p.rescaled_horizon),
                num(p.total_existence_exponent),
                num(p.total_time),
                pass_fail(p.global),
            ]);
        }
    }
    let t = r.table(
        "budget",
        &[
            "d",
            "s",
            "n",
            "lambda_exponent",
            "lambda",
            "per_step_time",
            "step_count_exponent",
            "step_count",
            "rescaled_horizon",
            "total_existence_exponent",
            "total_time",
            "global",
        ],
    );
    rows.into_iter().for_each(|x| t.push(x));
    let mut crossings = Vec::new();
    for (d, expected) in [(1usize, 1.0 / 3.0), (2, 3.0 / 5.0)] {
        let configured = gwp_budget(d, 0.5, n, opts)?.zero_crossing;
        let closed = gwp_budget(d, 0.5, n, lossless)?.zero_crossing;
        let at = gwp_budget(d, expected, n, lossless)?.total_existence_exponent;
        let numeric = numeric_crossing(d, opts)?;
        crossings.push((d, expected, closed, at, configured, numeric));
    }
    let t = r.table(
        "crossings",
        &["d", "expected", "lossless_closed_form", "exponent_at_expected", "configured_closed_form", "configured_bisection"],
    );
    for c in &crossings {
        t.push(vec![c.0.to_string(), num(c.1), num(c.2), num(c.3), num(c.4), num(c.5)]);
    }
    for (d, expected, closed, at, configured, numeric) in crossings {
        r.check(
            &format!("{d}d-threshold"),
            (closed - expected).abs() < CROSSING_TOLERANCE && at.abs() < CROSSING_TOLERANCE,
            format!("lossless crossing {closed} (expected {expected}), exponent there {at:.1e}"),
        );
        r.check(
            &format!("{d}d-crossing-routes"),
            (configured - numeric).abs() < 1e-10,
            format!("closed form {configured} vs bisection {numeric}"),
        );
        r.check(&format!("{d}d-monotone-in-s"), monotone[d - 1], "total exponent increases along the s grid");
    }
    Ok(r)
}

pub fn conservation(cfg: &Config) -> Result<RunReport> {
    let dim = cfg.get("conservation.dim", 1usize)?;
    let preset = if dim == 1 {
        ConservationConfig::preset_1d()
    } else {
        ConservationConfig::preset_2d()
    };
    let geometry = if cfg.contains("conservation.lambda") || cfg.contains("conservation.gamma") {
        geometry(cfg, "conservation", dim)?
    } else {
        preset.geometry.clone()
    };
    let cc = ConservationConfig {
        geometry,
        cutoff: cfg.get("conservation.cutoff", preset.cutoff)?,
        n_values: cfg.get_list("conservation.n", &preset.n_values)?,
        s: cfg.get("conservation.s", preset.s)?,
        gap: cfg.get("resonance.gap_factor", preset.gap)?,
        initial: if cfg.contains("conservation.initial") {
            initial_data(cfg, "conservation", dim, "hs")?
        } else {
            let mass = cfg.get("conservation.mass", SMALL_MASS)?;
            InitialData::RandomHs {
                s: preset.s,
                mass,
                seed: seed(cfg)?,
            }
        },
        sign: cfg.get("conservation.sign", preset.sign)?,
        integrator: cfg
            .get("conservation.integrator", "rk4-galerkin".to_string())?
            .parse()?,
        dt: cfg.get_opt("conservation.dt")?,
        t_end: cfg.get("conservation.t_end", preset.t_end)?,
        samples: cfg.get("conservation.samples", preset.samples)?,
        max_steps: cfg.get("conservation.max_steps", preset.max_steps)?,
        delta: cfg.get("budget.delta", preset.delta)?,
    };
    let rep = run_almost_conservation(&cc)?;
    let mut r = RunReport::new("conservation");
    r.seeds.push(seed(cfg)?);
    let t = r.table(
        "growth",
        &[
            "n",
            "t_nominal",
            "t_achieved",
            "capped",
            "sup_de_i1",
            "sup_de_i2",
            "sup_correction",
            "boundary_ratio",
            "energy_drift",
        ],
    );
    for x in &rep.rows {
        t.push(vec![
            num(x.n),
            num(x.t_nominal),
            num(x.t_achieved),
            pass_fail(x.capped),
            num(x.sup_de_i1),
            num(x.sup_de_i2),
            num(x.sup_correction),
            num(x.boundary_ratio),
            num(x.energy_drift),
        ]);
    }
    for x in rep.rows.iter().filter(|x| x.capped) {
        r.flag(format!("N={}: horizon capped at t = {} by the step guard", x.n, x.t_achieved));
    }
    r.note(format!(
        "dt {} over {} steps; E_I² increment slope in N: {}",
        rep.dt,
        rep.steps,
        rep.slope_e_i2.map_or("n/a".into(), |s| format!("{s:.3}"))
    ));
    let de2: Vec<String> = rep.rows.iter().map(|x| format!("{:.3e}", x.sup_de_i2)).collect();
    r.check("e_i2-increment-decreasing", rep.e_i2_decreasing, format!("sup |ΔE_I²| = {}", de2.join(", ")));
    let last = rep.rows.last().expect("nonempty grid");
    r.check(
        "e_i2-below-e_i1",
        rep.e_i2_below_e_i1,
        format!("N={}: |ΔE_I²| {:.3e} vs |ΔE_I¹| {:.3e}", last.n, last.sup_de_i2, last.sup_de_i1),
    );
    r.check(
        "boundary-ratio-decreasing",
        rep.boundary_ratio_decreasing,
        rep.rows
            .iter()
            .map(|x| format!("{:.3e}", x.boundary_ratio))
            .collect::<Vec<_>>()
            .join(", "),
    );
    Ok(r)
}
