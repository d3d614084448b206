//! Precomputed canonical tuples of `Γ_n` on a truncated lattice with their symbol values.
//!
//! Every symbol used by the energies is symmetric within the odd and within the even slots,
//! so a sum over `Γ_n` is a sum over canonical representatives weighted by orbit size. The
//! table stores the representatives once and evaluates all energy functionals of a field in
//! one pass.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::resonance::lattice::{for_each_quadruple, for_each_sextuple, quadruple_estimate, sextuple_estimate, Square};
use crate::resonance::{KVec, SymbolParams, TupleValues, Verdict};
use crate::spectral::{mode_freq, SpectralField, TorusGeometry};

/// Largest table the evaluator will allocate (entries).
pub const TABLE_GUARD: f64 = 1.2e7;

const BELOW: u8 = 0;
const RESONANT: u8 = 1;
const NONRESONANT: u8 = 2;

const CHUNK: usize = 1 << 14;

/// Sums over the table, display values only (no prefactors, no sign), weight `w^{n-1}` applied.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TableSums {
    /// `Λ_n(∏m)`
    pub potential: Complex64,
    /// `Λ_n(D_σ̃)`
    pub correction: Complex64,
    /// `Λ_n(S·χ_R)`
    pub resonant: Complex64,
    /// `Λ_n(∏m + D_σ̃)` with one odd slot replaced by the substituted field
    pub boundary_odd: Complex64,
    /// the same with one even slot replaced
    pub boundary_even: Complex64,
}

impl std::ops::Add for TableSums {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            potential: self.potential + o.potential,
            correction: self.correction + o.correction,
            resonant: self.resonant + o.resonant,
            boundary_odd: self.boundary_odd + o.boundary_odd,
            boundary_even: self.boundary_even + o.boundary_even,
        }
    }
}

impl TableSums {
    fn scale(self, w: f64) -> Self {
        Self {
            potential: self.potential * w,
            correction: self.correction * w,
            resonant: self.resonant * w,
            boundary_odd: self.boundary_odd * w,
            boundary_even: self.boundary_even * w,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LambdaTable {
    params: SymbolParams,
    geom: TorusGeometry,
    cutoff: usize,
    arity: usize,
    idx: Vec<u16>,
    orbit_odd: Vec<u8>,
    orbit_even: Vec<u8>,
    class: Vec<u8>,
    prod_m: Vec<f64>,
    /// `S` on resonant tuples, `S/Ω` on non-resonant ones.
    q: Vec<f64>,
}

#[derive(Default)]
struct Builder {
    idx: Vec<u16>,
    orbit_odd: Vec<u8>,
    orbit_even: Vec<u8>,
    class: Vec<u8>,
    prod_m: Vec<f64>,
    q: Vec<f64>,
}

fn orbit(v: &[usize]) -> u8 {
    let mut s = v.to_vec();
    s.sort_unstable();
    let mut total: u32 = (1..=s.len() as u32).product();
    let mut i = 0;
    while i < s.len() {
        let j = s[i..].iter().take_while(|&&x| x == s[i]).count();
        total /= (1..=j as u32).product::<u32>();
        i += j;
    }
    total as u8
}

impl Builder {
    fn push(&mut self, idx: &[usize], freq: &[KVec], m: &[f64], params: &SymbolParams) -> Result<()> {
        let v = TupleValues::new(freq, m, params);
        let (class, q) = match v.class.verdict {
            Verdict::BelowThreshold => (BELOW, 0.0),
            Verdict::Resonant(_) => (RESONANT, v.weighted),
            Verdict::NonResonant(_) => {
                if v.omega == 0.0 {
                    return Err(Error::Classification {
                        tuple: format!("{freq:?}"),
                    });
                }
                (NONRESONANT, v.weighted / v.omega)
            }
        };
        let odd: Vec<usize> = idx.iter().step_by(2).copied().collect();
        let even: Vec<usize> = idx.iter().skip(1).step_by(2).copied().collect();
        self.idx.extend(idx.iter().map(|&i| i as u16));
        self.orbit_odd.push(orbit(&odd));
        self.orbit_even.push(orbit(&even));
        self.class.push(class);
        self.prod_m.push(v.prod_m);
        self.q.push(q);
        Ok(())
    }

    fn append(&mut self, o: Builder) {
        self.idx.extend(o.idx);
        self.orbit_odd.extend(o.orbit_odd);
        self.orbit_even.extend(o.orbit_even);
        self.class.extend(o.class);
        self.prod_m.extend(o.prod_m);
        self.q.extend(o.q);
    }
}

impl LambdaTable {
    /// All canonical tuples of `Γ_6` (1d) or `Γ_4` (2d) with entries in the cutoff-`cutoff` lattice.
    pub fn build(geom: &TorusGeometry, cutoff: usize, params: &SymbolParams) -> Result<Self> {
        if geom.dim() != params.dim {
            return Err(crate::error::invalid("geometry", "dimension differs from the symbol parameters"));
        }
        let k = cutoff as i64;
        let estimate = if geom.dim() == 1 {
            sextuple_estimate(k)
        } else {
            quadruple_estimate(k)
        };
        if estimate > TABLE_GUARD {
            return Err(Error::Budget {
                count: estimate,
                guard: TABLE_GUARD,
            });
        }
        let side = 2 * cutoff + 1;
        let len = side.pow(geom.dim() as u32);
        let sq = Square { k };
        let mode = |i: usize| if geom.dim() == 1 { [i as i64 - k, 0] } else { sq.mode(i) };
        let freq: Vec<KVec> = (0..len).map(|i| mode_freq(geom, mode(i))).collect();
        let m: Vec<f64> = freq.iter().map(|&x| params.symbol.at(x)).collect();

        let parts: Result<Vec<Builder>> = (0..len)
            .into_par_iter()
            .map(|lead| {
                let mut b = Builder::default();
                let mut err = None;
                let mut visit = |idx: &[usize]| {
                    if err.is_some() {
                        return;
                    }
                    let f: Vec<KVec> = idx.iter().map(|&i| freq[i]).collect();
                    let mm: Vec<f64> = idx.iter().map(|&i| m[i]).collect();
                    if let Err(e) = b.push(idx, &f, &mm, params) {
                        err = Some(e);
                    }
                };
                if geom.dim() == 1 {
                    for_each_sextuple(k, lead as i64 - k, |t, _| {
                        let idx = t.map(|v| (v + k) as usize);
                        visit(&idx);
                    });
                } else {
                    for_each_quadruple(sq, lead, |t, _| visit(&t));
                }
                match err {
                    Some(e) => Err(e),
                    None => Ok(b),
                }
            })
            .collect();
        let mut all = Builder::default();
        for p in parts? {
            all.append(p);
        }
        Ok(Self {
            params: *params,
            geom: geom.clone(),
            cutoff,
            arity: params.base_arity(),
            idx: all.idx,
            orbit_odd: all.orbit_odd,
            orbit_even: all.orbit_even,
            class: all.class,
            prod_m: all.prod_m,
            q: all.q,
        })
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn params(&self) -> &SymbolParams {
        &self.params
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Canonical tuples per class: below threshold, resonant, non-resonant.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for &x in &self.class {
            c[x as usize] += 1;
        }
        c
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.geometry() != &self.geom || f.cutoff() != self.cutoff {
            return Err(crate::error::invalid(
                "field",
                format!("table is for cutoff {} on {:?}", self.cutoff, self.geom),
            ));
        }
        Ok(())
    }

    /// Every table functional of `u`; the boundary sums substitute `g` into one slot.
    pub fn sums(&self, u: &SpectralField, g: Option<&SpectralField>) -> Result<TableSums> {
        self.check(u)?;
        if let Some(g) = g {
            self.check(g)?;
        }
        let odd_vals = u.coefficients();
        let len = odd_vals.len();
        // even slots read conj(û(-k)); -mode has index len-1-i in both layouts
        let even_vals: Vec<Complex64> = (0..len).map(|i| odd_vals[len - 1 - i].conj()).collect();
        let zero = vec![Complex64::new(0.0, 0.0); len];
        let g_odd = g.map_or(&zero[..], |g| g.coefficients());
        let g_even: Vec<Complex64> = (0..len).map(|i| g_odd[len - 1 - i].conj()).collect();
        let n = self.arity;
        let h = (n / 2) as f64;

        let chunks = self.len().div_ceil(CHUNK);
        let parts: Vec<TableSums> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = TableSums::default();
                let mut vo = [Complex64::new(0.0, 0.0); 3];
                let mut ve = vo;
                let mut go = vo;
                let mut ge = vo;
                for e in c * CHUNK..((c + 1) * CHUNK).min(self.len()) {
                    let t = &self.idx[e * n..(e + 1) * n];
                    for s in 0..n / 2 {
                        let a = t[2 * s] as usize;
                        let b = t[2 * s + 1] as usize;
                        vo[s] = odd_vals[a];
                        ve[s] = even_vals[b];
                        go[s] = g_odd[a];
                        ge[s] = g_even[b];
                    }
                    let h_ = n / 2;
                    let po: Complex64 = vo[..h_].iter().product();
                    let pe: Complex64 = ve[..h_].iter().product();
                    let oo = self.orbit_odd[e] as f64;
                    let oe = self.orbit_even[e] as f64;
                    let plain = po * pe * (oo * oe);
                    let pm = self.prod_m[e];
                    let (corr, res, boundary) = match self.class[e] {
                        BELOW => (0.0, 0.0, pm),
                        RESONANT => (-pm, self.q[e], 0.0),
                        _ => (-pm + self.q[e], 0.0, self.q[e]),
                    };
                    acc.potential += plain * pm;
                    acc.correction += plain * corr;
                    acc.resonant += plain * res;
                    if g.is_some() && boundary != 0.0 {
                        let so = substituted(&vo[..h_], &go[..h_]);
                        let se = substituted(&ve[..h_], &ge[..h_]);
                        acc.boundary_odd += so * pe * (boundary * oo * oe / h);
                        acc.boundary_even += po * se * (boundary * oo * oe / h);
                    }
                }
                acc
            })
            .collect();
        let total = parts.into_iter().fold(TableSums::default(), |a, b| a + b);
        Ok(total.scale(self.geom.weight().powi(n as i32 - 1)))
    }
}

/// `Σ_i g_i ∏_{j≠i} v_j`
fn substituted(v: &[Complex64], g: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..v.len() {
        let mut p = g[i];
        for (j, &x) in v.iter().enumerate() {
            if j != i {
                p *= x;
            }
        }
        acc += p;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energies::lambda::lambda_direct;
    use crate::resonance::lattice::gamma_count;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orbits_cover_the_lattice() {
        let g = TorusGeometry::circle(1.0).unwrap();
        let p = SymbolParams::new(1, 2.0, 0.5, 4.0).unwrap();
        let t = LambdaTable::build(&g, 3, &p).unwrap();
        let total: u128 = (0..t.len())
            .map(|e| t.orbit_odd[e] as u128 * t.orbit_even[e] as u128)
            .sum();
        assert_eq!(total, gamma_count(3, 6));
    }

    #[test]
    fn table_matches_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (g, cutoff, n) in [
            (TorusGeometry::circle(1.0).unwrap(), 3usize, 1.5),
            (TorusGeometry::new(2, &[std::f64::consts::FRAC_1_SQRT_2], 1.0).unwrap(), 2, 1.2),
        ] {
            let p = SymbolParams::new(g.dim(), n, 0.5, 3.0).unwrap();
            let t = LambdaTable::build(&g, cutoff, &p).unwrap();
            let u = SpectralField::random(&g, cutoff, &mut rng, |_| 1.0);
            let v = SpectralField::random(&g, cutoff, &mut rng, |_| 1.0);
            let s = t.sums(&u, Some(&v)).unwrap();
            let ar = p.base_arity();
            let fields = vec![&u; ar];
            let tv = |k: &[KVec]| TupleValues::from_entries(k, &p);
            let pot = lambda_direct(&fields, |k| Ok(tv(k).prod_m.into())).unwrap();
            let corr = lambda_direct(&fields, |k| Ok(tv(k).sigma_tilde()?.into())).unwrap();
            let res = lambda_direct(&fields, |k| Ok(tv(k).m_bar().into())).unwrap();
            let big = |k: &[KVec]| -> Result<Complex64> {
                let x = tv(k);
                Ok((x.prod_m + x.sigma_tilde()?).into())
            };
            let mut odd = fields.clone();
            odd[0] = &v;
            let mut even = fields.clone();
            even[1] = &v;
            let bo = lambda_direct(&odd, big).unwrap();
            let be = lambda_direct(&even, big).unwrap();
            for (a, b) in [
                (s.potential, pot),
                (s.correction, corr),
                (s.resonant, res),
                (s.boundary_odd, bo),
                (s.boundary_even, be),
            ] {
                assert!((a - b).norm() <= 1e-11 * (1.0 + b.norm()), "{a} vs {b}");
            }
        }
    }
}
