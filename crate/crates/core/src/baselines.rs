//! Reference methods: classic (polynomial-barycentric) AAA and FFT-based
//! trigonometric interpolation on a uniform grid.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::solver::{greedy_fit, CauchyKernel, FitConfig};
use crate::trigbary::{SampleSet, TWO_PI};

/// Points this close to a support point evaluate to its data value.
const SNAP: f64 = 1e-13;

/// Tolerance for recognizing the uniform grid `2πn/M`.
const GRID_TOL: f64 = 1e-12;

/// `r(z) = Σ w_j f_j/(z − z_j) / Σ w_j/(z − z_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AaaModel {
    pub support: Vec<Complex64>,
    pub fvals: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub err_history: Vec<f64>,
    pub converged: bool,
}

impl AaaModel {
    pub fn order(&self) -> usize {
        self.support.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if !z.is_finite() {
            return Complex64::new(f64::NAN, f64::NAN);
        }
        let mut n = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for ((&zj, &fj), &wj) in self.support.iter().zip(&self.fvals).zip(&self.weights) {
            if (z - zj).norm() < SNAP {
                return fj;
            }
            let t = wj / (z - zj);
            n += t * fj;
            d += t;
        }
        n / d
    }
}

/// Classic AAA on the samples' points, using the same greedy loop and
/// stopping rules as the trigonometric fit. Parity and cleanup are ignored.
pub fn aaa_fit(samples: &SampleSet, config: &FitConfig) -> Result<AaaModel> {
    aaa_fit_points(samples.points(), samples.values(), config)
}

/// Classic AAA on arbitrary (unprojected) points.
pub fn aaa_fit_points(points: &[Complex64], values: &[Complex64], config: &FitConfig) -> Result<AaaModel> {
    config.validate()?;
    if points.len() != values.len() || points.len() < 2 {
        return Err(Error::InvalidSamples(format!("{} points, {} values", points.len(), values.len())));
    }
    if points.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinitePoint);
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(k));
    }
    let g = greedy_fit(points, values, &CauchyKernel, config.rel_tol, config.max_order, None)?;
    Ok(AaaModel {
        support: g.support.iter().map(|&j| points[j]).collect(),
        fvals: g.support.iter().map(|&j| values[j]).collect(),
        weights: g.weights,
        err_history: g.err_history,
        converged: g.converged,
    })
}

/// DFT coefficients of uniform samples, evaluated in the balanced
/// (least-oscillation) form and optionally truncated.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierInterpolant {
    /// `F_k = (1/M) Σ_n f_n e^{−2πi nk/M}`.
    pub coefficients: Vec<Complex64>,
    /// Highest retained frequency, at most `M/2`.
    pub order: usize,
}

impl FourierInterpolant {
    pub fn grid_size(&self) -> usize {
        self.coefficients.len()
    }

    /// The same coefficients truncated at another order.
    pub fn truncated(&self, order: usize) -> Result<Self> {
        let big_m = self.grid_size();
        if order > big_m / 2 {
            return Err(Error::OrderTooLarge { m: order, samples: big_m });
        }
        Ok(Self { coefficients: self.coefficients.clone(), order })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let big_m = self.grid_size();
        let f = &self.coefficients;
        let pairs = self.order.min((big_m - 1) / 2);
        let e = (Complex64::new(0.0, 1.0) * z).exp();
        let e_inv = e.inv();
        let (mut up, mut down) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let mut sum = f[0];
        for k in 1..=pairs {
            up *= e;
            down *= e_inv;
            sum += f[k] * up + f[big_m - k] * down;
        }
        if big_m.is_multiple_of(2) && self.order == big_m / 2 {
            sum += f[big_m / 2] * (0.5 * big_m as f64 * z).cos();
        }
        sum
    }
}

/// FFT interpolant of samples on the grid `2πn/M` (any order of points),
/// truncated at `order ≤ M/2`.
pub fn fft_interpolant(samples: &SampleSet, order: usize) -> Result<FourierInterpolant> {
    let big_m = samples.len();
    if order > big_m / 2 {
        return Err(Error::OrderTooLarge { m: order, samples: big_m });
    }
    let mut data = vec![Complex64::new(f64::NAN, 0.0); big_m];
    let mut seen = vec![false; big_m];
    for (&z, &f) in samples.points().iter().zip(samples.values()) {
        let pos = z.re * big_m as f64 / TWO_PI;
        let n = (pos.round() as usize) % big_m;
        let expected = TWO_PI * n as f64 / big_m as f64;
        let off = (z.re - expected).abs().min((z.re - expected - TWO_PI).abs());
        if off > GRID_TOL || z.im.abs() > GRID_TOL || seen[n] {
            return Err(Error::NonUniformGrid(format!("point {z} is not 2πn/{big_m}")));
        }
        seen[n] = true;
        data[n] = f;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(big_m).process(&mut data);
    let scale = 1.0 / big_m as f64;
    Ok(FourierInterpolant { coefficients: data.into_iter().map(|c| c * scale).collect(), order })
}
