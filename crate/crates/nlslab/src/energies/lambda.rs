//! The multilinear functionals `Λ_n(M; f_1, …, f_n) = w^{n-1} Σ_{Γ_n} M(k) f̂_1(k_1) conj(f̂_2(-k_2)) …`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::resonance::{KVec, SymbolName, SymbolSpec, TUPLE_GUARD};
use crate::smoothing::apply_i;
use crate::spectral::{integrate_product, mode_freq, Factor, Mode, SpectralField, TorusGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Direct,
    Physical,
}

/// Nonzero entries of one slot: the integer mode and the value entering the product.
struct Slot {
    modes: Vec<Mode>,
    values: Vec<Complex64>,
}

fn slot(f: &SpectralField, conj: bool) -> Slot {
    let mut modes = Vec::new();
    let mut values = Vec::new();
    for (i, &c) in f.coefficients().iter().enumerate() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let m = f.mode_of(i);
        if conj {
            // conj(f̂(-k)) is nonzero at k = -m
            modes.push([-m[0], -m[1]]);
            values.push(c.conj());
        } else {
            modes.push(m);
            values.push(c);
        }
    }
    Slot { modes, values }
}

fn common_geometry(fields: &[&SpectralField]) -> Result<TorusGeometry> {
    let first = fields.first().ok_or_else(|| invalid("fields", "no fields"))?;
    if fields.iter().any(|f| f.geometry() != first.geometry()) {
        return Err(invalid("fields", "mixed geometries"));
    }
    Ok(first.geometry().clone())
}

/// Exact sum over `Γ_n ∩ lattice` restricted to the supports of the fields.
///
/// `term` receives the integer modes and physical frequencies of one tuple. The first `n-1`
/// slots are free; the last is fixed by the constraint. The sum parallelizes over the leading
/// slot and reduces in order.
pub(crate) fn direct_sum(
    fields: &[&SpectralField],
    term: impl Fn(&[Mode], &[KVec]) -> Result<Complex64> + Sync,
) -> Result<Complex64> {
    let n = fields.len();
    if n < 2 || n % 2 != 0 {
        return Err(invalid("fields", format!("need an even count >= 2, got {n}")));
    }
    let geom = common_geometry(fields)?;
    let slots: Vec<Slot> = fields
        .iter()
        .enumerate()
        .map(|(j, f)| slot(f, j % 2 == 1))
        .collect();
    let visits: f64 = slots[..n - 1].iter().map(|s| s.modes.len() as f64).product();
    if visits > TUPLE_GUARD {
        return Err(Error::Budget {
            count: visits,
            guard: TUPLE_GUARD,
        });
    }
    if slots.iter().any(|s| s.modes.is_empty()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let last = fields[n - 1];
    let last_conj = (n - 1) % 2 == 1;

    let partial: Result<Vec<Complex64>> = (0..slots[0].modes.len())
        .into_par_iter()
        .map(|lead| {
            let mut pos = vec![0usize; n - 1];
            pos[0] = lead;
            let mut modes = vec![[0i64; 2]; n];
            let mut freqs = vec![[0.0f64; 2]; n];
            let mut acc = Complex64::new(0.0, 0.0);
            loop {
                let mut sum = [0i64; 2];
                let mut prod = Complex64::new(1.0, 0.0);
                for j in 0..n - 1 {
                    let m = slots[j].modes[pos[j]];
                    modes[j] = m;
                    sum[0] += m[0];
                    sum[1] += m[1];
                    prod *= slots[j].values[pos[j]];
                }
                let m = [-sum[0], -sum[1]];
                let v = if last_conj {
                    last.get([sum[0], sum[1]]).conj()
                } else {
                    last.get(m)
                };
                if v != Complex64::new(0.0, 0.0) {
                    modes[n - 1] = m;
                    for j in 0..n {
                        freqs[j] = mode_freq(&geom, modes[j]);
                    }
                    acc += term(&modes, &freqs)? * prod * v;
                }
                // odometer over slots 1..n-1
                let mut j = n - 2;
                loop {
                    if j == 0 {
                        return Ok(acc);
                    }
                    pos[j] += 1;
                    if pos[j] < slots[j].modes.len() {
                        break;
                    }
                    pos[j] = 0;
                    j -= 1;
                }
            }
        })
        .collect();
    let total: Complex64 = partial?.into_iter().sum();
    Ok(total * geom.weight().powi(n as i32 - 1))
}

/// Unbiased Monte-Carlo estimate of [`direct_sum`]: free slots drawn uniformly from the supports.
pub(crate) fn monte_carlo_sum<R: Rng>(
    fields: &[&SpectralField],
    term: impl Fn(&[Mode], &[KVec]) -> Result<Complex64>,
    samples: usize,
    rng: &mut R,
) -> Result<(Complex64, f64)> {
    let n = fields.len();
    if n < 2 || n % 2 != 0 || samples < 2 {
        return Err(invalid("monte carlo", "need an even field count and at least two samples"));
    }
    let geom = common_geometry(fields)?;
    let slots: Vec<Slot> = fields
        .iter()
        .enumerate()
        .map(|(j, f)| slot(f, j % 2 == 1))
        .collect();
    if slots.iter().any(|s| s.modes.is_empty()) {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let volume: f64 = slots[..n - 1].iter().map(|s| s.modes.len() as f64).product();
    let last = fields[n - 1];
    let mut modes = vec![[0i64; 2]; n];
    let mut freqs = vec![[0.0f64; 2]; n];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let mut total = [0i64; 2];
        let mut prod = Complex64::new(1.0, 0.0);
        for j in 0..n - 1 {
            let i = rng.gen_range(0..slots[j].modes.len());
            modes[j] = slots[j].modes[i];
            total[0] += modes[j][0];
            total[1] += modes[j][1];
            prod *= slots[j].values[i];
        }
        let v = if (n - 1) % 2 == 1 {
            last.get(total).conj()
        } else {
            last.get([-total[0], -total[1]])
        };
        let mut x = Complex64::new(0.0, 0.0);
        if v != Complex64::new(0.0, 0.0) {
            modes[n - 1] = [-total[0], -total[1]];
            for j in 0..n {
                freqs[j] = mode_freq(&geom, modes[j]);
            }
            x = term(&modes, &freqs)? * prod * v * volume;
        }
        sum += x;
        sum_sq += x.norm_sqr();
    }
    let s = samples as f64;
    let mean = sum / s;
    let var = ((sum_sq / s - mean.norm_sqr()) * s / (s - 1.0)).max(0.0);
    let w = geom.weight().powi(n as i32 - 1);
    Ok((mean * w, (var / s).sqrt() * w))
}

/// `Λ_n` of an arbitrary symbol given on physical frequencies, by exact lattice summation.
pub fn lambda_direct(
    fields: &[&SpectralField],
    symbol: impl Fn(&[KVec]) -> Result<Complex64> + Sync,
) -> Result<Complex64> {
    direct_sum(fields, |_, k| symbol(k))
}

/// `Λ_n(c·D; fields)` for a named symbol, prefactor included.
pub fn lambda_eval(spec: &SymbolSpec, fields: &[&SpectralField], strategy: Strategy) -> Result<Complex64> {
    let n = fields.len();
    match spec.arity() {
        Some(a) if a != n => {
            return Err(invalid("fields", format!("{:?} takes {a} fields, got {n}", spec.name)));
        }
        None if n % 2 != 0 || n == 0 => {
            return Err(invalid("fields", format!("{:?} needs an even count", spec.name)));
        }
        _ => {}
    }
    let geom = common_geometry(fields)?;
    if geom.dim() != spec.params.dim {
        return Err(invalid("fields", "dimension differs from the symbol's"));
    }
    match strategy {
        Strategy::Direct => Ok(spec.prefactor() * lambda_direct(fields, |k| spec.eval_entries(k))?),
        Strategy::Physical => physical(spec, fields),
    }
}

fn physical(spec: &SymbolSpec, fields: &[&SpectralField]) -> Result<Complex64> {
    let sym = &spec.params.symbol;
    let smoothed: Vec<SpectralField> = fields.iter().map(|f| apply_i(f, sym)).collect();
    match spec.name {
        SymbolName::Sigma2 => {
            // −½ m m k1·k2 on Γ_2 is ½ m²|k|², i.e. ½ Σ_c ∫ ∂_c(I f1) conj(∂_c(I f2))
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..spec.params.dim {
                let d = |f: &SpectralField| f.apply_symbol(|k| Complex64::new(0.0, k[c]));
                let (a, b) = (d(&smoothed[0]), d(&smoothed[1]));
                acc += integrate_product(&[Factor::plain(&a), Factor::conj(&b)])?;
            }
            Ok(0.5 * acc)
        }
        SymbolName::Sigma4 | SymbolName::Sigma6 => {
            let factors: Vec<Factor<'_>> = smoothed
                .iter()
                .enumerate()
                .map(|(j, f)| if j % 2 == 0 { Factor::plain(f) } else { Factor::conj(f) })
                .collect();
            Ok(spec.prefactor() * integrate_product(&factors)?)
        }
        other => Err(Error::Unsupported(format!(
            "{other:?} does not factor as a product of one-slot symbols"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::SymbolParams;
    use crate::spectral::TorusGeometry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn spec(name: SymbolName, dim: usize, n: f64) -> SymbolSpec {
        SymbolSpec::new(name, SymbolParams::new(dim, n, 0.5, 4.0).unwrap()).unwrap()
    }

    #[test]
    fn sigma2_of_plane_wave() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let u = SpectralField::plane_wave(&g, 3, [1, 0], 1.0.into()).unwrap();
        let s = spec(SymbolName::Sigma2, 1, 1.0);
        for strategy in [Strategy::Direct, Strategy::Physical] {
            let v = lambda_eval(&s, &[&u, &u], strategy).unwrap();
            assert!((v - PI).norm() < 1e-13, "{strategy:?}: {v}");
        }
    }

    #[test]
    fn sigma6_of_zero_and_random_eight_modes() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let s = spec(SymbolName::Sigma6, 1, 2.0);
        let z = SpectralField::zeros(&g, 4);
        let zs = [&z; 6];
        assert_eq!(lambda_eval(&s, &zs, Strategy::Direct).unwrap(), Complex64::new(0.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u = SpectralField::random(&g, 4, &mut rng, |_| 1.0);
        u.set([-4, 0], 0.0.into()).unwrap();
        let us = [&u; 6];
        let a = lambda_eval(&s, &us, Strategy::Direct).unwrap();
        let b = lambda_eval(&s, &us, Strategy::Physical).unwrap();
        assert!((a - b).norm() <= 1e-9 * b.norm(), "{a} vs {b}");
    }

    #[test]
    fn physical_rejects_non_product_symbols() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let u = SpectralField::plane_wave(&g, 2, [1, 0], 1.0.into()).unwrap();
        let s = spec(SymbolName::M6, 1, 2.0);
        assert!(matches!(
            lambda_eval(&s, &[&u; 6], Strategy::Physical),
            Err(Error::Unsupported(_))
        ));
        assert!(lambda_eval(&s, &[&u; 4], Strategy::Direct).is_err());
    }

    #[test]
    fn distinct_fields_follow_the_conjugation_pattern() {
        let g = TorusGeometry::new(2, &[0.77], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<SpectralField> = (0..4).map(|_| SpectralField::random(&g, 2, &mut rng, |_| 1.0)).collect();
        let s = spec(SymbolName::Sigma4, 2, 1.5);
        let refs: Vec<&SpectralField> = f.iter().collect();
        let a = lambda_eval(&s, &refs, Strategy::Direct).unwrap();
        let b = lambda_eval(&s, &refs, Strategy::Physical).unwrap();
        assert!((a - b).norm() <= 1e-10 * b.norm());
    }
}
