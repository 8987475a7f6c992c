pub mod baselines;
pub mod calculus;
pub mod error;
pub mod experiments;
pub mod lightning;
pub mod numerics;
pub mod polezero;
pub mod registry;
pub mod solver;
pub mod trigbary;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use registry::{Approximant, Approximator, Registry};
pub use solver::{fit, FitConfig};
pub use trigbary::{FarField, Parity, SampleSet, TrigModel};
