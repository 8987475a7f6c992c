//! Differentiation of trigonometric barycentric models.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::trigbary::{canonicalize, cst_unchecked, strip_distance, Parity, TrigModel};

/// Highest supported derivative order.
pub const MAX_ORDER: usize = 4;

/// Minimum distance to the support for [`derivative_at`].
pub const SUPPORT_EXCLUSION: f64 = 1e-8;

/// |cos((z_j − z_k)/2)| below which the even recurrence switches form.
const RECIPROCAL_GUARD: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial with real coefficients, lowest degree first.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect())
    }

    /// `(1 + x²)·self`
    fn times_one_plus_sq(&self) -> Poly {
        let mut out = vec![0.0; self.0.len() + 2];
        for (k, &a) in self.0.iter().enumerate() {
            out[k] += a;
            out[k + 2] += a;
        }
        Poly(out)
    }

    fn times_x(&self) -> Poly {
        let mut out = vec![0.0; self.0.len() + 1];
        out[1..].copy_from_slice(&self.0);
        Poly(out)
    }

    fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0)).collect())
    }

    fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|a| a * s).collect())
    }

    fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
    }
}

/// `tan⁽ⁿ⁾ = P_n(tan)`.
fn tan_polys(n: usize) -> Vec<Poly> {
    let mut out = vec![Poly(vec![0.0, 1.0])];
    for k in 0..n {
        let next = out[k].derivative().times_one_plus_sq();
        out.push(next);
    }
    out
}

/// `cot⁽ⁿ⁾ = Q_n(cot)`.
fn cot_polys(n: usize) -> Vec<Poly> {
    let mut out = vec![Poly(vec![0.0, 1.0])];
    for k in 0..n {
        let next = out[k].derivative().times_one_plus_sq().scale(-1.0);
        out.push(next);
    }
    out
}

/// `csc⁽ⁿ⁾ = csc·R_n(cot)`.
fn csc_polys(n: usize) -> Vec<Poly> {
    let mut out = vec![Poly(vec![1.0])];
    for k in 0..n {
        let r = &out[k];
        let next = r.times_x().scale(-1.0).add(&r.derivative().times_one_plus_sq().scale(-1.0));
        out.push(next);
    }
    out
}

/// Derivatives `dⁿ/dξⁿ cst((ξ − z_j)/2)` for `n = 0..=p`, at `u = (ξ − z_j)/2`.
fn cst_derivatives(parity: Parity, u: Complex64, p: usize) -> Vec<Complex64> {
    let cot = cst_unchecked(Parity::Even, u);
    let half = |n: usize| 0.5f64.powi(n as i32);
    match parity {
        Parity::Odd => {
            let csc = cst_unchecked(Parity::Odd, u);
            csc_polys(p).iter().enumerate().map(|(n, r)| half(n) * csc * r.eval(cot)).collect()
        }
        Parity::Even => cot_polys(p).iter().enumerate().map(|(n, q)| half(n) * q.eval(cot)).collect(),
    }
}

/// Derivatives of the reciprocal `1/cst((ξ − z_k)/2)` (sin or tan) for `n = 0..=p`.
fn reciprocal_derivatives(parity: Parity, u: Complex64, p: usize) -> Vec<Complex64> {
    let half = |n: usize| 0.5f64.powi(n as i32);
    match parity {
        Parity::Odd => {
            let (s, c) = (u.sin(), u.cos());
            (0..=p)
                .map(|n| half(n) * [s, c, -s, -c][n % 4])
                .collect()
        }
        Parity::Even => {
            let t = u.tan();
            tan_polys(p).iter().enumerate().map(|(n, q)| half(n) * q.eval(t)).collect()
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The `p`-th differentiation matrix on a model's support grid.
#[derive(Clone, Debug)]
pub struct DiffMatrix {
    pub order: usize,
    pub entries: Mat<Complex64>,
}

impl DiffMatrix {
    /// `D·f`.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let m = self.entries.nrows();
        (0..m).map(|j| (0..m).map(|k| self.entries[(j, k)] * f[k]).sum()).collect()
    }
}

/// `D^(p)` for `1 ≤ p ≤ 4`.
pub fn diff_matrix(model: &TrigModel, p: usize) -> Result<DiffMatrix> {
    if p == 0 || p > MAX_ORDER {
        return Err(Error::UnsupportedOrder(p));
    }
    let z = model.support();
    let w = model.weights();
    let parity = model.parity();
    let m = z.len();
    if let Some(j) = w.iter().position(|wj| wj.norm() == 0.0) {
        return Err(Error::InvalidModel(format!("zero weight at support index {j}")));
    }

    // u^{(q)} at z_j for the reciprocal centred at z_k; the diagonal holds k = j
    let recip: Vec<Vec<Vec<Complex64>>> = (0..m)
        .map(|j| (0..m).map(|k| reciprocal_derivatives(parity, 0.5 * (z[j] - z[k]), p)).collect())
        .collect();

    // antipodal pairs make tan((z_j − z_k)/2) blow up in the even reciprocal
    let singular = |j: usize, k: usize| {
        parity == Parity::Even && (0.5 * (z[j] - z[k])).cos().norm() < RECIPROCAL_GUARD
    };
    // derivatives of cst((ξ − z_k)/2)·u_j(ξ) at z_j, used for those pairs
    let product = |j: usize, k: usize| -> Vec<Complex64> {
        let cs = cst_derivatives(parity, 0.5 * (z[j] - z[k]), p);
        (0..=p)
            .map(|q| (0..=q).map(|r| binomial(q, r) * cs[q - r] * recip[j][j][r]).sum())
            .collect()
    };

    let mut prev = Mat::<Complex64>::identity(m, m);
    let mut mats = vec![prev.clone()];
    for order in 1..=p {
        let mut d = Mat::<Complex64>::zeros(m, m);
        for j in 0..m {
            let mut off = vec![ZERO; m];
            for k in (0..m).filter(|&k| k != j && !singular(j, k)) {
                let mut acc = ZERO;
                for q in 1..=order {
                    let lower = &mats[order - q];
                    acc += binomial(order, q)
                        * (w[k] / w[j] * lower[(j, j)] * recip[j][j][q] - lower[(j, k)] * recip[j][k][q]);
                }
                off[k] = cst_unchecked(parity, 0.5 * (z[j] - z[k])) * acc;
            }
            // ℓ_k = (w_k/w_j)·cst_k·u_j·ℓ_j, and cst_k·u_j vanishes at z_j
            for k in (0..m).filter(|&k| k != j && singular(j, k)) {
                let g = product(j, k);
                let rest: Complex64 = (1..=order)
                    .map(|q| binomial(order, q) * g[q] * mats[order - q][(j, j)])
                    .sum();
                off[k] = w[k] / w[j] * rest;
            }
            let partial: Complex64 = off.iter().sum();
            for k in 0..m {
                d[(j, k)] = off[k];
            }
            d[(j, j)] = -partial;
        }
        prev = d;
        mats.push(prev.clone());
    }
    Ok(DiffMatrix { order: p, entries: prev })
}

/// `r^{(p)}(z)` away from the support, for `1 ≤ p ≤ 4`.
pub fn derivative_at(model: &TrigModel, z: Complex64, p: usize) -> Result<Complex64> {
    if p == 0 || p > MAX_ORDER {
        return Err(Error::UnsupportedOrder(p));
    }
    let z = canonicalize(z)?;
    if model.support().iter().any(|&zj| strip_distance(z, zj) < SUPPORT_EXCLUSION) {
        return Err(Error::TooCloseToSupport(format!("{z}")));
    }
    let derivs: Vec<Vec<Complex64>> = model
        .support()
        .iter()
        .map(|&zj| cst_derivatives(model.parity(), 0.5 * (z - zj), p))
        .collect();
    let weights = model.weights();
    let denom: Complex64 = weights.iter().zip(&derivs).map(|(w, d)| w * d[0]).sum();
    let r = model.eval(z);
    // r^{(0..=p)}
    let mut rd = vec![r];
    for order in 1..=p {
        let mut num = ZERO;
        for q in 0..order {
            let c = binomial(order, q);
            for ((w, d), &f) in weights.iter().zip(&derivs).zip(model.fvals()) {
                let g = if q == 0 { f - r } else { -rd[q] };
                num += c * w * d[order - q] * g;
            }
        }
        rd.push(num / denom);
    }
    Ok(rd[p])
}
