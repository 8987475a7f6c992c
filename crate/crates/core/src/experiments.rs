//! Sample generators, test functions and error tables used by the
//! comparison experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::FourierInterpolant;
use crate::error::{Error, Result};
use crate::polezero::poles_and_zeros;
use crate::trigbary::{TrigModel, TWO_PI};

/// Named functions used in the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFunction {
    /// `tanh(60 cos z)`
    Tanh60Cos,
    /// `exp(sin z)`
    ExpSin,
    /// `exp(z)`
    Exp,
    /// `log(2 + cos⁴ z)`
    LogCos4,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] =
        [TestFunction::Tanh60Cos, TestFunction::ExpSin, TestFunction::Exp, TestFunction::LogCos4];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Tanh60Cos => "tanh60cos",
            TestFunction::ExpSin => "expsin",
            TestFunction::Exp => "exp",
            TestFunction::LogCos4 => "logcos4",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn eval(self, z: Complex64) -> Complex64 {
        match self {
            TestFunction::Tanh60Cos => (60.0 * z.cos()).tanh(),
            TestFunction::ExpSin => z.sin().exp(),
            TestFunction::Exp => z.exp(),
            TestFunction::LogCos4 => (2.0 + z.cos().powi(4)).ln(),
        }
    }
}

/// `2πk/n`, `k = 0..n`.
pub fn equispaced(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::new(TWO_PI * k as f64 / n as f64, 0.0)).collect()
}

/// Uniform random points in `[0, 2π) × [−h, h]`, drawn from ChaCha8 seeded with `seed`.
pub fn random_rectangle(n: usize, half_height: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let re = rng.random_range(0.0..TWO_PI);
            let im = rng.random_range(-half_height..=half_height);
            Complex64::new(re, im)
        })
        .collect()
}

/// `e^{2πik/n}`, points on the unit circle of the complex plane.
pub fn unit_circle(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, TWO_PI * k as f64 / n as f64))
        .collect()
}

/// `(m, max error)` rows.
pub type ErrorTable = Vec<(usize, f64)>;

/// Max error of truncated Fourier interpolants at each order, measured on
/// the given points against exact values.
pub fn fourier_error_table(
    interpolant: &FourierInterpolant,
    orders: &[usize],
    points: &[Complex64],
    exact: &[Complex64],
) -> Result<ErrorTable> {
    orders
        .iter()
        .map(|&m| {
            let t = interpolant.truncated(m)?;
            Ok((m, max_error(|z| t.eval(z), points, exact)))
        })
        .collect()
}

/// The recorded greedy history, indexed by order.
pub fn history_table(history: &[f64]) -> ErrorTable {
    history.iter().enumerate().map(|(i, &e)| (i + 1, e)).collect()
}

pub fn max_error(f: impl Fn(Complex64) -> Complex64, points: &[Complex64], exact: &[Complex64]) -> f64 {
    points
        .iter()
        .zip(exact)
        .map(|(&z, &v)| {
            let e = (f(z) - v).norm();
            if e.is_nan() {
                f64::INFINITY
            } else {
                e
            }
        })
        .fold(0.0, f64::max)
}

/// Number of poles whose residue magnitude is below `tol`.
pub fn small_residue_count(model: &TrigModel, tol: f64) -> Result<usize> {
    let report = poles_and_zeros(model)?;
    Ok(report.residues.iter().filter(|r| !(r.norm() >= tol)).count())
}
