//! Poles, zeros and residues of trigonometric barycentric models.
//!
//! The numerator and denominator sums become ordinary rational functions
//! after a change of variable: `ẑ = e^{iz}` for odd parity and
//! `t = tan(z/2)` for even parity. Their roots are the finite eigenvalues of
//! arrowhead pencils `A v = λ diag(0, I) v`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{sort_eigenvalues, DeflationSolver, PencilSolver, SingularHeadPencil};
use crate::trigbary::{canonicalize_finite, cst_unchecked, strip_distance, Parity, TrigModel, COMPLEX_INFINITY};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// |z_j − π| below which the even transform switches to the π special case.
pub const PI_THRESHOLD: f64 = 1e-12;

/// Support points closer than this to π (but outside the threshold) are refused.
pub const NEAR_PI_BAND: f64 = 1e-6;

/// Roots further than this from the real axis are treated as far-field roots.
const FAR_ROOT_IM: f64 = 30.0;

/// Relative residual a candidate root must satisfy.
const ROOT_RESIDUAL: f64 = 1e-6;

/// Relative size of `d′(p)` below which a pole counts as non-simple.
const SIMPLE_TOL: f64 = 1e-10;

const POLISH_STEPS: usize = 3;

/// Newton steps longer than this mean the eigenvalue was not near a root.
const POLISH_MAX_STEP: f64 = 1e-6;

/// Minimum pole separation for a trustworthy partial-fraction expansion.
const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    OddExp,
    EvenTan,
    EvenTanPiSpecial,
}

/// A model rewritten in the transformed variable.
///
/// For `EvenTanPiSpecial` index 0 holds the support point at π; its shifted
/// support is infinite and its shifted weight is the raw weight `w_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedBarycentric {
    pub kind: TransformKind,
    pub shifted_support: Vec<Complex64>,
    pub shifted_weights: Vec<Complex64>,
    /// Data values, permuted like the support.
    pub fvals: Vec<Complex64>,
    /// Pencil head for the zeros: 0, `c_n`, or `−f_1 w_1`.
    pub head_num: Complex64,
    /// Pencil head for the poles: 0, `c_d`, or `−w_1`.
    pub head_den: Complex64,
    /// `c_n` (even parity only).
    pub const_num: Complex64,
    /// `c_d` (even parity only).
    pub const_den: Complex64,
}

impl TransformedBarycentric {
    fn pencil(&self, numerator: bool) -> Result<SingularHeadPencil> {
        let m = self.shifted_support.len();
        let payload: Vec<Complex64> = self
            .shifted_weights
            .iter()
            .zip(&self.fvals)
            .map(|(&w, &f)| if numerator { f * w } else { w })
            .collect();
        let head = if numerator { self.head_num } else { self.head_den };
        match self.kind {
            TransformKind::OddExp | TransformKind::EvenTan => {
                SingularHeadPencil::arrowhead(head, &payload, &vec![ONE; m], &self.shifted_support)
            }
            TransformKind::EvenTanPiSpecial => {
                let c = if numerator { self.const_num } else { self.const_den };
                // unknowns (v0, v1, v_2..): v0 = λ v1, v_j = v1 / (λ − t_j)
                let a = Mat::from_fn(m + 1, m + 1, |i, j| match (i, j) {
                    (0, 0) => head,
                    (0, 1) => c,
                    (0, j) => payload[j - 1],
                    (1, 0) => ONE,
                    (i, 1) if i >= 2 => ONE,
                    (i, j) if i == j && i >= 2 => self.shifted_support[i - 1],
                    _ => ZERO,
                });
                SingularHeadPencil::dense(a)
            }
        }
    }

    fn back_map(&self, lambda: Complex64) -> Complex64 {
        match self.kind {
            TransformKind::OddExp => -I * lambda.ln(),
            TransformKind::EvenTan | TransformKind::EvenTanPiSpecial => 2.0 * lambda.atan(),
        }
    }
}

/// Rewrites the model in the transformed variable.
pub fn transform(model: &TrigModel) -> Result<TransformedBarycentric> {
    let z = model.support();
    let w = model.weights();
    let f = model.fvals();
    match model.parity() {
        Parity::Odd => Ok(TransformedBarycentric {
            kind: TransformKind::OddExp,
            shifted_support: z.iter().map(|&zj| (I * zj).exp()).collect(),
            shifted_weights: z.iter().zip(w).map(|(&zj, &wj)| wj * (0.5 * I * zj).exp()).collect(),
            fvals: f.to_vec(),
            head_num: ZERO,
            head_den: ZERO,
            const_num: ZERO,
            const_den: ZERO,
        }),
        Parity::Even => {
            let pi = Complex64::new(PI, 0.0);
            let special = z.iter().position(|&zj| (zj - pi).norm() < PI_THRESHOLD);
            if let Some(zj) = z
                .iter()
                .find(|&&zj| (zj - pi).norm() >= PI_THRESHOLD && (zj - pi).norm() < NEAR_PI_BAND)
            {
                return Err(Error::NearPiSupport(format!("{zj}")));
            }
            let mut order: Vec<usize> = (0..z.len()).collect();
            if let Some(s) = special {
                order.remove(s);
                order.insert(0, s);
            }
            let mut shifted_support = Vec::with_capacity(z.len());
            let mut shifted_weights = Vec::with_capacity(z.len());
            let mut fvals = Vec::with_capacity(z.len());
            let (mut c_n, mut c_d) = (ZERO, ZERO);
            for (pos, &j) in order.iter().enumerate() {
                fvals.push(f[j]);
                if special.is_some() && pos == 0 {
                    shifted_support.push(COMPLEX_INFINITY);
                    shifted_weights.push(w[j]);
                    continue;
                }
                let t = (0.5 * z[j]).tan();
                if !t.is_finite() {
                    return Err(Error::NearPiSupport(format!("{}", z[j])));
                }
                let wt = w[j] * (1.0 + t * t);
                // w̃ t / (1 + t²) is just w t
                c_n += f[j] * w[j] * t;
                c_d += w[j] * t;
                shifted_support.push(t);
                shifted_weights.push(wt);
            }
            let (kind, head_num, head_den) = match special {
                Some(s) => (TransformKind::EvenTanPiSpecial, -f[s] * w[s], -w[s]),
                None => (TransformKind::EvenTan, c_n, c_d),
            };
            Ok(TransformedBarycentric {
                kind,
                shifted_support,
                shifted_weights,
                fvals,
                head_num,
                head_den,
                const_num: c_n,
                const_den: c_d,
            })
        }
    }
}

/// Poles, zeros and residues of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleZeroReport {
    /// Canonical strip, ascending real part then imaginary part.
    pub poles: Vec<Complex64>,
    pub zeros: Vec<Complex64>,
    /// Classical residues `Res_{z=p} r`; NaN for a pole that is not simple.
    pub residues: Vec<Complex64>,
    /// Constant of the partial-fraction expansion; NaN when the far field degenerates.
    pub pf_constant: Complex64,
    /// Eigenvalues dropped by the residual check.
    pub rejected: usize,
}

/// Numerator and denominator sums with their absolute term sizes.
fn sums(model: &TrigModel, z: Complex64) -> (Complex64, Complex64, f64, f64) {
    let (mut n, mut d, mut sn, mut sd) = (ZERO, ZERO, 0.0, 0.0);
    for ((&zj, &fj), &wj) in model.support().iter().zip(model.fvals()).zip(model.weights()) {
        let t = wj * cst_unchecked(model.parity(), 0.5 * (z - zj));
        n += fj * t;
        d += t;
        sn += (fj * t).norm();
        sd += t.norm();
    }
    (n, d, sn, sd)
}

/// `d′(z)` and the sum of the absolute values of its terms.
fn denominator_derivative(model: &TrigModel, z: Complex64) -> (Complex64, f64) {
    sum_derivative(model, z, false)
}

/// Derivative of the numerator or denominator sum, with its term sizes.
fn sum_derivative(model: &TrigModel, z: Complex64, numerator: bool) -> (Complex64, f64) {
    let mut dp = ZERO;
    let mut size = 0.0;
    for ((&zj, &fj), &wj) in model.support().iter().zip(model.fvals()).zip(model.weights()) {
        let u = 0.5 * (z - zj);
        let s = u.sin().inv();
        let term = match model.parity() {
            Parity::Odd => -s * (u.cos() * s),
            Parity::Even => -s * s,
        };
        let c = if numerator { wj * fj } else { wj };
        dp += 0.5 * c * term;
        size += 0.5 * (c * term).norm();
    }
    (dp, size)
}

/// A few Newton steps on the chosen sum, kept only while the residual drops.
fn polish(model: &TrigModel, mut z: Complex64, numerator: bool) -> Complex64 {
    let value = |z: Complex64| {
        let (n, d, _, _) = sums(model, z);
        if numerator { n } else { d }
    };
    let mut v = value(z);
    for _ in 0..POLISH_STEPS {
        let (dv, _) = sum_derivative(model, z, numerator);
        let step = v / dv;
        if !step.is_finite() || step.norm() > POLISH_MAX_STEP {
            break;
        }
        let next = z - step;
        let nv = value(next);
        if !(nv.norm() < v.norm()) {
            break;
        }
        z = next;
        v = nv;
    }
    z
}

fn is_root(value: Complex64, size: f64) -> bool {
    value.is_finite() && size.is_finite() && value.norm() <= ROOT_RESIDUAL * size
}

/// Roots of the numerator (`numerator = true`) or denominator sum.
fn roots(
    model: &TrigModel,
    tb: &TransformedBarycentric,
    solver: &dyn PencilSolver,
    numerator: bool,
) -> Result<(Vec<Complex64>, usize)> {
    let gep = solver.solve(&tb.pencil(numerator)?)?;
    let mut candidates: Vec<Complex64> = gep
        .finite_eigenvalues
        .iter()
        .map(|&l| tb.back_map(l))
        .filter(|z| z.is_finite() && z.im.abs() <= FAR_ROOT_IM)
        .map(canonicalize_finite)
        .map(|z| canonicalize_finite(polish(model, z, numerator)))
        .collect();
    // the sum at π equals c, which the tan variable only reaches at infinity
    if tb.kind == TransformKind::EvenTan && gep.discarded_count >= 2 {
        candidates.push(Complex64::new(PI, 0.0));
    }
    let mut kept = Vec::with_capacity(candidates.len());
    let mut rejected = 0;
    for z in candidates {
        let (n, d, sn, sd) = sums(model, z);
        let ok = if numerator { is_root(n, sn) } else { is_root(d, sd) };
        if ok {
            kept.push(z);
        } else {
            rejected += 1;
        }
    }
    sort_eigenvalues(&mut kept);
    Ok((kept, rejected))
}

/// Poles, zeros and residues, using the deflation backend.
pub fn poles_and_zeros(model: &TrigModel) -> Result<PoleZeroReport> {
    poles_and_zeros_with(model, &DeflationSolver)
}

/// Poles, zeros and residues with an explicit pencil backend.
pub fn poles_and_zeros_with(model: &TrigModel, solver: &dyn PencilSolver) -> Result<PoleZeroReport> {
    let pf_constant = pf_constant(model).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    if model.order() < 2 {
        return Ok(PoleZeroReport {
            poles: Vec::new(),
            zeros: Vec::new(),
            residues: Vec::new(),
            pf_constant,
            rejected: 0,
        });
    }
    let tb = transform(model)?;
    let (poles, rej_p) = roots(model, &tb, solver, false)?;
    let (zeros, rej_z) = roots(model, &tb, solver, true)?;
    let residues = poles
        .iter()
        .map(|&p| residue(model, p).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
        .collect();
    Ok(PoleZeroReport { poles, zeros, residues, pf_constant, rejected: rej_p + rej_z })
}

fn residue(model: &TrigModel, p: Complex64) -> Result<Complex64> {
    if !p.is_finite() {
        return Err(Error::NonFinitePoint);
    }
    let (n, _, _, _) = sums(model, p);
    let (dp, size) = denominator_derivative(model, p);
    if !dp.is_finite() || dp.norm() <= SIMPLE_TOL * size {
        return Err(Error::NonSimplePole(format!("{p}")));
    }
    Ok(n / dp)
}

/// Classical residues `n(p)/d′(p)` at the given poles.
pub fn residues(model: &TrigModel, poles: &[Complex64]) -> Result<Vec<Complex64>> {
    poles.iter().map(|&p| residue(model, p)).collect()
}

fn pf_constant(model: &TrigModel) -> Result<Complex64> {
    if model.order() == 1 {
        return Ok(model.fvals()[0]);
    }
    let ff = model.far_field()?;
    Ok(match model.parity() {
        Parity::Odd => 0.5 * (ff.f_plus + ff.f_minus),
        Parity::Even => ff.f_plus,
    })
}

/// `r(z) ≈ Σ q_k cot((z − p_k)/2) + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialFractions {
    pub poles: Vec<Complex64>,
    /// `q_k`, half the classical residues.
    pub coefficients: Vec<Complex64>,
    pub constant: Complex64,
    /// Set when two poles are closer than 1e-6; the expansion is then unreliable.
    pub clustered: bool,
}

impl PartialFractions {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.poles
            .iter()
            .zip(&self.coefficients)
            .map(|(&p, &q)| q * cst_unchecked(Parity::Even, 0.5 * (z - p)))
            .sum::<Complex64>()
            + self.constant
    }
}

/// Converts a model to partial fractions.
pub fn partial_fractions(model: &TrigModel) -> Result<PartialFractions> {
    let constant = pf_constant(model)?;
    if model.order() < 2 {
        return Ok(PartialFractions { poles: Vec::new(), coefficients: Vec::new(), constant, clustered: false });
    }
    let report = poles_and_zeros(model)?;
    let res = residues(model, &report.poles)?;
    let poles = report.poles;
    let clustered = poles
        .iter()
        .enumerate()
        .any(|(i, &a)| poles[i + 1..].iter().any(|&b| strip_distance(a, b) < CLUSTER_TOL));
    Ok(PartialFractions {
        coefficients: res.iter().map(|r| 0.5 * r).collect(),
        poles,
        constant,
        clustered,
    })
}

/// Least-squares fit of the tapered law `d_k = β exp(σ(√K − √k))`,
/// `k = 1` being the nearest point and `K` the farthest one used.
#[derive(Clone, Debug, PartialEq)]
pub struct TaperFit {
    pub corner: Complex64,
    /// Ascending distances to the corner.
    pub distances: Vec<f64>,
    pub beta: f64,
    pub sigma: f64,
    pub r_squared: f64,
}

/// Fits the tapered law to the `k_max` points nearest to `corner` within unit
/// distance (in the strip metric).
pub fn taper_fit(points: &[Complex64], corner: Complex64, k_max: usize) -> Result<TaperFit> {
    let mut d: Vec<f64> = points
        .iter()
        .map(|&p| strip_distance(p, corner))
        .filter(|&x| x <= 1.0 && x > 0.0)
        .collect();
    d.sort_by(f64::total_cmp);
    d.truncate(k_max);
    if d.len() < 4 {
        return Err(Error::InsufficientCluster(d.len()));
    }
    let n = d.len() as f64;
    let xs: Vec<f64> = (1..=d.len()).map(|k| (k as f64).sqrt()).collect();
    let ys: Vec<f64> = d.iter().map(|x| x.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let sigma = -slope;
    let beta = (intercept + slope * n.sqrt()).exp();
    Ok(TaperFit { corner, distances: d, beta, sigma, r_squared })
}
