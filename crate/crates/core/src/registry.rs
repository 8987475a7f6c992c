//! Approximation strategies selectable by name at runtime.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::baselines::{aaa_fit, fft_interpolant, AaaModel, FourierInterpolant};
use crate::error::{Error, Result};
use crate::solver::{fit, FitConfig};
use crate::trigbary::{Parity, SampleSet, TrigModel};

/// A fitted approximation.
pub trait Approximant: Send + Sync {
    fn eval(&self, z: Complex64) -> Complex64;

    /// Number of support points or retained frequencies.
    fn order(&self) -> usize;

    /// Max sample residual per order, as recorded by the fit.
    fn err_history(&self) -> &[f64];
}

/// A fitting method.
pub trait Approximator: Send + Sync {
    fn name(&self) -> &'static str;

    fn fit(&self, samples: &SampleSet, config: &FitConfig) -> Result<Box<dyn Approximant>>;
}

impl Approximant for TrigModel {
    fn eval(&self, z: Complex64) -> Complex64 {
        TrigModel::eval(self, z)
    }

    fn order(&self) -> usize {
        TrigModel::order(self)
    }

    fn err_history(&self) -> &[f64] {
        TrigModel::err_history(self)
    }
}

impl Approximant for AaaModel {
    fn eval(&self, z: Complex64) -> Complex64 {
        AaaModel::eval(self, z)
    }

    fn order(&self) -> usize {
        AaaModel::order(self)
    }

    fn err_history(&self) -> &[f64] {
        &self.err_history
    }
}

/// A truncated Fourier interpolant with its sample residual.
struct FourierFit {
    interpolant: FourierInterpolant,
    history: Vec<f64>,
}

impl Approximant for FourierFit {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.interpolant.eval(z)
    }

    fn order(&self) -> usize {
        self.interpolant.order
    }

    fn err_history(&self) -> &[f64] {
        &self.history
    }
}

/// Trigonometric AAA with a fixed parity.
pub struct TrigAaa(pub Parity);

impl Approximator for TrigAaa {
    fn name(&self) -> &'static str {
        match self.0 {
            Parity::Odd => "aaatrig-odd",
            Parity::Even => "aaatrig-even",
        }
    }

    fn fit(&self, samples: &SampleSet, config: &FitConfig) -> Result<Box<dyn Approximant>> {
        let config = FitConfig { parity: self.0, ..config.clone() };
        Ok(Box::new(fit(samples, &config)?))
    }
}

/// Classic AAA.
pub struct ClassicAaa;

impl Approximator for ClassicAaa {
    fn name(&self) -> &'static str {
        "aaa"
    }

    fn fit(&self, samples: &SampleSet, config: &FitConfig) -> Result<Box<dyn Approximant>> {
        Ok(Box::new(aaa_fit(samples, config)?))
    }
}

/// FFT interpolation truncated at `max_order` (capped at `M/2`).
pub struct Fourier;

impl Approximator for Fourier {
    fn name(&self) -> &'static str {
        "fft"
    }

    fn fit(&self, samples: &SampleSet, config: &FitConfig) -> Result<Box<dyn Approximant>> {
        let interpolant = fft_interpolant(samples, config.max_order.min(samples.len() / 2))?;
        let err = samples
            .points()
            .iter()
            .zip(samples.values())
            .map(|(&z, &f)| (interpolant.eval(z) - f).norm())
            .fold(0.0, f64::max);
        Ok(Box::new(FourierFit { interpolant, history: vec![err] }))
    }
}

/// Name-indexed collection of approximators.
pub struct Registry {
    entries: BTreeMap<String, Box<dyn Approximator>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    /// `aaatrig-odd`, `aaatrig-even`, `aaa` and `fft`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(TrigAaa(Parity::Odd)));
        r.register(Box::new(TrigAaa(Parity::Even)));
        r.register(Box::new(ClassicAaa));
        r.register(Box::new(Fourier));
        r
    }

    /// Adds a strategy, replacing any previous one with the same name.
    pub fn register(&mut self, approximator: Box<dyn Approximator>) {
        self.entries.insert(approximator.name().to_string(), approximator);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Approximator> {
        self.entries
            .get(name)
            .map(|a| a.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigbary::TWO_PI;

    #[test]
    fn builtins_fit_by_name() {
        let reg = Registry::with_builtins();
        assert_eq!(reg.names(), vec!["aaa", "aaatrig-even", "aaatrig-odd", "fft"]);
        let pts: Vec<Complex64> = (0..64).map(|k| Complex64::new(TWO_PI * k as f64 / 64.0, 0.0)).collect();
        let s = SampleSet::from_fn(pts, |z| z.sin().exp()).unwrap();
        let z = Complex64::new(0.77, 0.0);
        for name in reg.names() {
            let model = reg.get(name).unwrap().fit(&s, &FitConfig::default()).unwrap();
            assert!((model.eval(z) - z.sin().exp()).norm() < 1e-9, "{name}");
            assert!(model.order() >= 1);
            assert!(!model.err_history().is_empty());
        }
        assert!(matches!(reg.get("nope"), Err(Error::UnknownStrategy(_))));
    }
}
