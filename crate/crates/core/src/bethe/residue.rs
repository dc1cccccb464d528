//! Totally asymmetric case `q = 0`, where the contour integrals reduce to
//! finitely many residues and the boundary parameters may exceed 1.

use super::BSeries;
use crate::error::{domain, Error, Result};
use crate::qspecial::ABParameters;
use crate::re;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `K Π_j (z − r_j)^{e_j}` with real roots, held exactly. Residues of such
/// products at nearby poles cancel strongly, so they are evaluated in
/// rational arithmetic on the exact binary values of the parameters.
#[derive(Clone, Debug)]
struct Factored {
    constant: BigRational,
    roots: Vec<(BigRational, i64)>,
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn powi(x: &BigRational, e: i64) -> BigRational {
    let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

impl Factored {
    fn pow(&self, k: i64) -> Self {
        Self {
            constant: powi(&self.constant, k),
            roots: self.roots.iter().map(|(r, e)| (r.clone(), e * k)).collect(),
        }
    }

    fn times_root(mut self, r: BigRational, e: i64) -> Self {
        self.roots.push((r, e));
        self
    }

    /// Residue at the root `z0`.
    fn residue(&self, z0: &BigRational) -> BigRational {
        let order: i64 = self.roots.iter().filter(|(r, _)| r == z0).map(|(_, e)| e).sum();
        if order >= 0 {
            return BigRational::zero();
        }
        let need = (-order - 1) as usize;
        // Taylor series in t = z − z0 of the regular part.
        let mut series = vec![BigRational::zero(); need + 1];
        series[0] = self.constant.clone();
        for (r, e) in self.roots.iter().filter(|(r, _)| r != z0) {
            let d = z0 - r;
            let inv = d.recip();
            // (d + t)^e = d^e Σ_n binom(e, n) (t/d)^n
            let mut factor = Vec::with_capacity(need + 1);
            let mut coeff = powi(&d, *e);
            for n in 0..=need {
                factor.push(coeff.clone());
                coeff = coeff * int(e - n as i64) / int(n as i64 + 1) * &inv;
            }
            let mut next = vec![BigRational::zero(); need + 1];
            for (i, si) in series.iter().enumerate() {
                if si.is_zero() {
                    continue;
                }
                for (j, fj) in factor.iter().enumerate().take(need + 1 - i) {
                    next[i + j] += si * fj;
                }
            }
            series = next;
        }
        series.swap_remove(need)
    }
}

/// `F` at `q = 0`:
/// `−(z+1)^{2L+2} (z−1)² z^{−L−2} Π_{s≠0} z / ((1 − s z)(z − s))`.
fn tasep_f(l: usize, ab: &ABParameters) -> Result<(Factored, Vec<BigRational>)> {
    let l = l as i64;
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut f = Factored {
        constant: -one.clone(),
        roots: vec![(-one.clone(), 2 * l + 2), (one.clone(), 2), (zero.clone(), -l - 2)],
    };
    let mut inside = vec![zero.clone()];
    let mut floats = vec![-1.0, 1.0, 0.0];
    for s in ab.all() {
        if s == 0.0 {
            continue;
        }
        if !s.is_finite() || (s.abs() - 1.0).abs() < 1e-12 {
            return domain(format!("boundary parameter {s} sits on a zero of F"));
        }
        let es = exact(s);
        f.constant *= -es.recip();
        f.roots.push((zero.clone(), 1));
        f.roots.push((es.recip(), -1));
        f.roots.push((es.clone(), -1));
        floats.extend([1.0 / s, s]);
        if !inside.contains(&es) {
            inside.push(es);
        }
    }
    for (i, a) in floats.iter().enumerate() {
        for b in &floats[..i] {
            if a != b && (a - b).abs() < 1e-12 {
                return Err(Error::Pole(format!("poles {a} and {b} nearly coincide")));
            }
        }
    }
    Ok((f, inside))
}

/// `μ(B)` and `E(B)` for `q = 0` from residues at `Γ = {0} ∪ {s ≠ 0}`:
/// `μ_k = −(1/2k) Σ_Γ Res F^k/z`, `E_k = −(1/2k) Σ_Γ Res F^k/(1+z)²`.
pub fn tasep_residue_mode(l: usize, ab: &ABParameters, n_max: usize) -> Result<(BSeries, BSeries)> {
    if l == 0 {
        return domain("L must be at least 1");
    }
    if n_max > super::series::MAX_ORDER {
        return domain(format!("order {n_max} exceeds {}", super::series::MAX_ORDER));
    }
    let (f, inside) = tasep_f(l, ab)?;
    let mut mu = vec![re(0.0)];
    let mut e = vec![re(0.0)];
    let to_c = |x: BigRational| re(x.to_f64().unwrap_or(f64::NAN));
    for k in 1..=n_max {
        let fk = f.pow(k as i64);
        let over_z = fk.clone().times_root(BigRational::zero(), -1);
        let over_pole = fk.times_root(-BigRational::one(), -2);
        let c = int(-1) / int(2 * k as i64);
        let sum = |g: &Factored| inside.iter().map(|z0| g.residue(z0)).fold(BigRational::zero(), |a, b| a + b);
        mu.push(to_c(sum(&over_z) * &c));
        e.push(to_c(sum(&over_pole) * &c));
    }
    Ok((BSeries { coeffs: mu }, BSeries { coeffs: e }))
}
