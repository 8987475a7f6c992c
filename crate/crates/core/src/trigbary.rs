//! Trigonometric barycentric rational functions.
//!
//! A model of order `m` is
//!
//! ```text
//!          m                                m
//!  r(z) =  Σ  f_j w_j cst((z - z_j)/2)  /   Σ  w_j cst((z - z_j)/2)
//!         j=1                              j=1
//! ```
//!
//! with `cst = csc` for odd parity and `cst = cot` for even parity. Every
//! such `r` is 2π-periodic and interpolates `f_j` at `z_j` for any nonzero
//! weights. Points are kept in the canonical strip `0 ≤ Re z < 2π`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Distance (in the strip) below which evaluation snaps to the support value.
pub const SUPPORT_SNAP: f64 = 1e-13;

/// Distance to a multiple of π below which `cst` refuses to evaluate.
pub const SINGULARITY_GUARD: f64 = 1e-14;

/// |Im u| beyond which `cst` switches to its exponential representation.
const EXP_SWITCH: f64 = 20.0;

/// |Im z| margin beyond which `evaluate` uses the rescaled far-field sums.
const FAR_SWITCH: f64 = 40.0;

/// Returned by `evaluate` when the denominator vanishes exactly.
pub const COMPLEX_INFINITY: Complex64 = Complex64::new(f64::INFINITY, f64::INFINITY);

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Basis choice: `csc` (odd) or `cot` with zero constant (even).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Parity {
    #[default]
    Odd,
    Even,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Odd => f.write_str("odd"),
            Parity::Even => f.write_str("even"),
        }
    }
}

impl FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(Error::InvalidConfig(format!("unknown parity '{other}'"))),
        }
    }
}

/// Projects `z` onto the strip `0 ≤ Re z < 2π`.
pub fn canonicalize(z: Complex64) -> Result<Complex64> {
    if !z.is_finite() {
        return Err(Error::NonFinitePoint);
    }
    Ok(canonicalize_finite(z))
}

pub(crate) fn canonicalize_finite(z: Complex64) -> Complex64 {
    let shifted = z.re - TWO_PI * (z.re / TWO_PI).floor();
    // rounding can land exactly on 2π for tiny negative inputs
    let re = if (0.0..TWO_PI).contains(&shifted) { shifted } else { 0.0 };
    Complex64::new(re, z.im)
}

/// Distance between two points modulo the period 2π in the real direction.
pub fn strip_distance(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    let re = d.re - TWO_PI * (d.re / TWO_PI).round();
    re.hypot(d.im)
}

/// `csc(u)` for odd parity, `cot(u)` for even parity.
pub fn cst(parity: Parity, u: Complex64) -> Result<Complex64> {
    if !u.is_finite() {
        return Err(Error::NonFinitePoint);
    }
    let k = (u.re / PI).round();
    if (u - Complex64::new(k * PI, 0.0)).norm() < SINGULARITY_GUARD {
        return Err(Error::BasisSingularity(format!("{u}")));
    }
    Ok(cst_unchecked(parity, u))
}

pub(crate) fn cst_unchecked(parity: Parity, u: Complex64) -> Complex64 {
    if u.im > EXP_SWITCH {
        // e^{iu} is small here
        match parity {
            Parity::Odd => {
                let e = (I * u).exp();
                2.0 * I * e / (e * e - 1.0)
            }
            Parity::Even => {
                let e2 = (2.0 * I * u).exp();
                I * (1.0 + 2.0 / (e2 - 1.0))
            }
        }
    } else if u.im < -EXP_SWITCH {
        match parity {
            Parity::Odd => {
                let e = (-I * u).exp();
                2.0 * I * e / (1.0 - e * e)
            }
            Parity::Even => {
                let s = (-2.0 * I * u).exp();
                I * (1.0 + s) / (1.0 - s)
            }
        }
    } else {
        match parity {
            Parity::Odd => u.sin().inv(),
            Parity::Even => u.cos() / u.sin(),
        }
    }
}

/// A finite set of samples `(z_k, f_k)` projected onto the period strip.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: Vec<Complex64>,
    values: Vec<Complex64>,
}

impl SampleSet {
    /// Canonicalizes the points and rejects duplicates.
    pub fn new(points: Vec<Complex64>, values: Vec<Complex64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidSamples(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.len() < 2 {
            return Err(Error::InvalidSamples(format!(
                "need at least 2 samples, got {}",
                points.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(k));
        }
        let points = points
            .into_iter()
            .map(canonicalize)
            .collect::<Result<Vec<_>>>()?;

        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            let (za, zb) = (points[a], points[b]);
            za.re.total_cmp(&zb.re).then(za.im.total_cmp(&zb.im))
        });
        let duplicates: Vec<(usize, usize)> = order
            .windows(2)
            .filter(|w| points[w[0]] == points[w[1]])
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .collect();
        if !duplicates.is_empty() {
            return Err(Error::DuplicatePoints(duplicates));
        }
        Ok(Self { points, values })
    }

    /// Samples `f` at the given points.
    pub fn from_fn(points: Vec<Complex64>, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        let values = points.iter().map(|&z| f(z)).collect();
        Self::new(points, values)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// max |f| over the samples.
    pub fn scale(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Limits of a model as `z → ±i∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FarField {
    pub f_plus: Complex64,
    pub f_minus: Complex64,
}

impl FarField {
    pub fn new(f_plus: Complex64, f_minus: Complex64) -> Self {
        Self { f_plus, f_minus }
    }

    pub fn uniform(value: Complex64) -> Self {
        Self::new(value, value)
    }

    pub fn is_finite(&self) -> bool {
        self.f_plus.is_finite() && self.f_minus.is_finite()
    }
}

/// A trigonometric barycentric rational function.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigModel {
    parity: Parity,
    support: Vec<Complex64>,
    fvals: Vec<Complex64>,
    weights: Vec<Complex64>,
    err_history: Vec<f64>,
    scale: f64,
    converged: bool,
    cleanup_warning: bool,
}

impl TrigModel {
    /// Builds a model from support data; weights are rescaled to unit norm
    /// and support points are projected onto the strip.
    pub fn new(
        parity: Parity,
        support: Vec<Complex64>,
        fvals: Vec<Complex64>,
        weights: Vec<Complex64>,
    ) -> Result<Self> {
        let norm = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidModel("weights must be finite and not all zero".into()));
        }
        let weights = weights.into_iter().map(|w| w / norm).collect();
        let support = support
            .into_iter()
            .map(canonicalize)
            .collect::<Result<Vec<_>>>()?;
        let scale = fvals.iter().map(|f| f.norm()).fold(0.0, f64::max);
        Self::from_parts(parity, support, fvals, weights, Vec::new(), scale)
    }

    /// Reassembles a model without touching the stored numbers. Weights must
    /// already have unit norm and support points must lie in the strip.
    pub fn from_parts(
        parity: Parity,
        support: Vec<Complex64>,
        fvals: Vec<Complex64>,
        weights: Vec<Complex64>,
        err_history: Vec<f64>,
        scale: f64,
    ) -> Result<Self> {
        let m = support.len();
        if m == 0 {
            return Err(Error::InvalidModel("empty support".into()));
        }
        if fvals.len() != m || weights.len() != m {
            return Err(Error::InvalidModel(format!(
                "length mismatch: {} support, {} values, {} weights",
                m,
                fvals.len(),
                weights.len()
            )));
        }
        if support.iter().chain(&fvals).chain(&weights).any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("non-finite entry".into()));
        }
        if let Some(z) = support.iter().find(|z| !(0.0..TWO_PI).contains(&z.re)) {
            return Err(Error::InvalidModel(format!("support point {z} outside the strip")));
        }
        let norm_sqr: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "weights have squared norm {norm_sqr}, expected 1"
            )));
        }
        for i in 0..m {
            for j in i + 1..m {
                if support[i] == support[j] {
                    return Err(Error::CoincidentSupport(i, j));
                }
            }
        }
        Ok(Self {
            parity,
            support,
            fvals,
            weights,
            err_history,
            scale,
            converged: true,
            cleanup_warning: false,
        })
    }

    pub(crate) fn with_fit_status(mut self, converged: bool) -> Self {
        self.converged = converged;
        self
    }

    pub(crate) fn with_cleanup_warning(mut self, warning: bool) -> Self {
        self.cleanup_warning = warning;
        self
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn support(&self) -> &[Complex64] {
        &self.support
    }

    pub fn fvals(&self) -> &[Complex64] {
        &self.fvals
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Number of support points.
    pub fn order(&self) -> usize {
        self.support.len()
    }

    /// Max sample residual after each greedy step (empty for hand-built models).
    pub fn err_history(&self) -> &[f64] {
        &self.err_history
    }

    /// Reference magnitude for relative errors (max |f| over the samples).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `false` when the fit stopped on an order cap before reaching tolerance.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Set when cleanup would have removed every support point.
    pub fn cleanup_warning(&self) -> bool {
        self.cleanup_warning
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        evaluate(self, z)
    }

    pub fn eval_batch(&self, zs: &[Complex64]) -> Vec<Complex64> {
        evaluate_batch(self, zs)
    }

    pub fn far_field(&self) -> Result<FarField> {
        far_field(self)
    }

    /// Index of the support point nearest to `z` in the strip metric.
    pub fn nearest_support(&self, z: Complex64) -> usize {
        let mut best = (0, f64::INFINITY);
        for (j, &zj) in self.support.iter().enumerate() {
            let d = strip_distance(z, zj);
            if d < best.1 {
                best = (j, d);
            }
        }
        best.0
    }

    /// Numerator and denominator sums at a canonical point away from the
    /// support. Far from the real axis both are rescaled by a common factor.
    pub(crate) fn numer_denom(&self, z: Complex64) -> (Complex64, Complex64) {
        let (min_im, max_im) = self
            .support
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.im), hi.max(s.im)));
        let mut n = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        let upper = z.im - max_im > FAR_SWITCH;
        let lower = z.im - min_im < -FAR_SWITCH;
        for ((&zj, &fj), &wj) in self.support.iter().zip(&self.fvals).zip(&self.weights) {
            let term = match (self.parity, upper, lower) {
                // csc((z - zj)/2)·e^{-iz/2}
                (Parity::Odd, true, _) => {
                    2.0 * I * (-0.5 * I * zj).exp() / ((I * (z - zj)).exp() - 1.0)
                }
                // csc((z - zj)/2)·e^{iz/2}
                (Parity::Odd, _, true) => {
                    2.0 * I * (0.5 * I * zj).exp() / (1.0 - (-I * (z - zj)).exp())
                }
                _ => cst_unchecked(self.parity, 0.5 * (z - zj)),
            };
            let wt = wj * term;
            n += wt * fj;
            d += wt;
        }
        (n, d)
    }
}

/// Evaluates `r(z)`. Returns `f_j` exactly within [`SUPPORT_SNAP`] of a
/// support point and [`COMPLEX_INFINITY`] when the denominator is exactly zero.
pub fn evaluate(model: &TrigModel, z: Complex64) -> Complex64 {
    if !z.is_finite() {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    let z = canonicalize_finite(z);
    for (&zj, &fj) in model.support.iter().zip(&model.fvals) {
        if strip_distance(z, zj) < SUPPORT_SNAP {
            return fj;
        }
    }
    let (n, d) = model.numer_denom(z);
    if d == Complex64::new(0.0, 0.0) {
        return COMPLEX_INFINITY;
    }
    n / d
}

pub fn evaluate_batch(model: &TrigModel, zs: &[Complex64]) -> Vec<Complex64> {
    zs.iter().map(|&z| evaluate(model, z)).collect()
}

/// Limits of `r` at `±i∞`.
pub fn far_field(model: &TrigModel) -> Result<FarField> {
    let ratio = |phase: f64| -> Result<Complex64> {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        let mut size = 0.0;
        for ((&zj, &fj), &wj) in model.support.iter().zip(&model.fvals).zip(&model.weights) {
            let t = wj * (phase * I * zj * 0.5).exp();
            num += fj * t;
            den += t;
            size += t.norm();
        }
        if den.norm() <= 1e-15 * size || den.norm() == 0.0 {
            return Err(Error::DegenerateFarField);
        }
        Ok(num / den)
    };
    match model.parity {
        Parity::Odd => Ok(FarField::new(ratio(-1.0)?, ratio(1.0)?)),
        Parity::Even => Ok(FarField::uniform(ratio(0.0)?)),
    }
}

/// Weights `a_j = Π_{k≠j} csc((z_k - z_j)/2)` (unit-normalized) that turn the
/// barycentric form into the trigonometric interpolating polynomial.
///
/// The products are accumulated in log-magnitude form so that long grids do
/// not overflow. `parity` does not enter the product; it only records which
/// basis the weights are meant for.
pub fn interpolatory_weights(_parity: Parity, support: &[Complex64]) -> Result<Vec<Complex64>> {
    let m = support.len();
    if m == 0 {
        return Err(Error::InvalidModel("empty support".into()));
    }
    let mut logs = Vec::with_capacity(m);
    for j in 0..m {
        let mut log_mag = 0.0;
        let mut phase = 0.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            if strip_distance(support[k], support[j]) < SINGULARITY_GUARD {
                return Err(Error::CoincidentSupport(j.min(k), j.max(k)));
            }
            let s = (0.5 * (support[k] - support[j])).sin();
            log_mag -= s.norm().ln();
            phase -= s.arg();
        }
        logs.push((log_mag, phase));
    }
    let top = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<Complex64> = logs
        .iter()
        .map(|&(lm, ph)| Complex64::from_polar((lm - top).exp(), ph))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(raw.into_iter().map(|a| a / norm).collect())
}
