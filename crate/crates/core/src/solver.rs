//! The adaptive fitting loop.
//!
//! Support points are promoted greedily from the samples; after each
//! promotion the weights are the smallest right singular vector of the
//! trigonometric Loewner matrix built on the remaining samples.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::min_singular_direction;
use crate::polezero::{poles_and_zeros, residues};
use crate::trigbary::{cst_unchecked, strip_distance, FarField, Parity, SampleSet, TrigModel, SUPPORT_SNAP};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Settings for [`fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub parity: Parity,
    /// Stop once the max sample residual is below `rel_tol · max|f|`.
    pub rel_tol: f64,
    pub max_order: usize,
    pub cleanup: bool,
    /// Residues below `cleanup_tol · max|f|` mark spurious poles.
    pub cleanup_tol: f64,
    pub far_field_constraint: Option<FarField>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            parity: Parity::Odd,
            rel_tol: 1e-13,
            max_order: 100,
            cleanup: true,
            cleanup_tol: 1e-13,
            far_field_constraint: None,
        }
    }
}

impl FitConfig {
    pub fn with_parity(parity: Parity) -> Self {
        Self { parity, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidConfig(format!("rel_tol must be >= 0, got {}", self.rel_tol)));
        }
        if !(self.cleanup_tol >= 0.0) || !self.cleanup_tol.is_finite() {
            return Err(Error::InvalidConfig(format!("cleanup_tol must be >= 0, got {}", self.cleanup_tol)));
        }
        if self.max_order == 0 {
            return Err(Error::InvalidConfig("max_order must be >= 1".into()));
        }
        if let Some(ff) = &self.far_field_constraint {
            if !ff.is_finite() {
                return Err(Error::InvalidConfig("far-field target must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Basis function of a barycentric family.
pub(crate) trait Kernel {
    fn eval(&self, z: Complex64, zj: Complex64) -> Complex64;
}

/// `cst((z - z_j)/2)`.
pub(crate) struct TrigKernel(pub Parity);

impl Kernel for TrigKernel {
    fn eval(&self, z: Complex64, zj: Complex64) -> Complex64 {
        cst_unchecked(self.0, 0.5 * (z - zj))
    }
}

/// `1/(z - z_j)`.
pub(crate) struct CauchyKernel;

impl Kernel for CauchyKernel {
    fn eval(&self, z: Complex64, zj: Complex64) -> Complex64 {
        (z - zj).inv()
    }
}

/// The least-squares matrix `A = S_F C - C S_f` on the non-support samples,
/// optionally followed by far-field constraint rows.
#[derive(Clone, Debug)]
pub struct LeastSquaresSystem {
    pub matrix: Mat<Complex64>,
    /// Sample indices of the Loewner rows, in row order.
    pub active_rows: Vec<usize>,
    /// Diagonal of `S_F`: data values on the active rows.
    pub sample_values: Vec<Complex64>,
    /// Diagonal of `S_f`: data values at the support points.
    pub support_values: Vec<Complex64>,
    pub support_points: Vec<Complex64>,
    /// The (trigonometric) Cauchy block `C`.
    pub cauchy: Mat<Complex64>,
    /// Number of appended constraint rows at the bottom of `matrix`.
    pub constraint_rows: usize,
}

impl LeastSquaresSystem {
    fn build(
        points: &[Complex64],
        values: &[Complex64],
        active_rows: Vec<usize>,
        support_points: Vec<Complex64>,
        support_values: Vec<Complex64>,
        kernel: &dyn Kernel,
    ) -> Self {
        let rows = active_rows.len();
        let m = support_points.len();
        let cauchy = Mat::from_fn(rows, m, |r, c| kernel.eval(points[active_rows[r]], support_points[c]));
        let sample_values: Vec<Complex64> = active_rows.iter().map(|&k| values[k]).collect();
        let matrix = Mat::from_fn(rows, m, |r, c| (sample_values[r] - support_values[c]) * cauchy[(r, c)]);
        Self {
            matrix,
            active_rows,
            sample_values,
            support_values,
            support_points,
            cauchy,
            constraint_rows: 0,
        }
    }
}

/// Trigonometric Loewner matrix for the given support indices.
pub fn assemble_loewner(samples: &SampleSet, support: &[usize], parity: Parity) -> Result<LeastSquaresSystem> {
    let big_m = samples.len();
    let m = support.len();
    if m == 0 {
        return Err(Error::InvalidConfig("empty support".into()));
    }
    if 2 * m > big_m {
        return Err(Error::OrderTooLarge { m, samples: big_m });
    }
    let mut is_support = vec![false; big_m];
    for &j in support {
        if j >= big_m {
            return Err(Error::InvalidConfig(format!("support index {j} out of range")));
        }
        if std::mem::replace(&mut is_support[j], true) {
            return Err(Error::InvalidConfig(format!("support index {j} repeated")));
        }
    }
    let active: Vec<usize> = (0..big_m).filter(|&k| !is_support[k]).collect();
    let pts = samples.points();
    let vals = samples.values();
    Ok(LeastSquaresSystem::build(
        pts,
        vals,
        active,
        support.iter().map(|&j| pts[j]).collect(),
        support.iter().map(|&j| vals[j]).collect(),
        &TrigKernel(parity),
    ))
}

/// Appends the far-field rows: two for odd parity, one for even.
pub fn append_far_field_rows(system: LeastSquaresSystem, target: FarField, parity: Parity) -> LeastSquaresSystem {
    let rows: Vec<Vec<Complex64>> = far_field_rows(&system.support_points, &system.support_values, target, parity);
    let old = system.matrix.nrows();
    let m = system.matrix.ncols();
    let matrix = Mat::from_fn(old + rows.len(), m, |r, c| {
        if r < old {
            system.matrix[(r, c)]
        } else {
            rows[r - old][c]
        }
    });
    LeastSquaresSystem {
        matrix,
        constraint_rows: system.constraint_rows + rows.len(),
        ..system
    }
}

fn far_field_rows(
    support: &[Complex64],
    fvals: &[Complex64],
    target: FarField,
    parity: Parity,
) -> Vec<Vec<Complex64>> {
    match parity {
        Parity::Odd => vec![
            support
                .iter()
                .zip(fvals)
                .map(|(&z, &f)| (target.f_plus - f) * (-0.5 * I * z).exp())
                .collect(),
            support
                .iter()
                .zip(fvals)
                .map(|(&z, &f)| (target.f_minus - f) * (0.5 * I * z).exp())
                .collect(),
        ],
        Parity::Even => vec![fvals.iter().map(|&f| target.f_plus - f).collect()],
    }
}

/// Result of the generic greedy loop.
pub(crate) struct GreedyFit {
    pub support: Vec<usize>,
    pub weights: Vec<Complex64>,
    pub err_history: Vec<f64>,
    pub converged: bool,
}

type ExtraRows<'a> = &'a dyn Fn(&[Complex64], &[Complex64]) -> Vec<Vec<Complex64>>;

/// Greedy support selection shared by the trigonometric and classic fits.
pub(crate) fn greedy_fit(
    points: &[Complex64],
    values: &[Complex64],
    kernel: &dyn Kernel,
    rel_tol: f64,
    max_order: usize,
    extra_rows: Option<ExtraRows<'_>>,
) -> Result<GreedyFit> {
    let big_m = points.len();
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cap = max_order.min(big_m / 2);
    let mean = values.iter().sum::<Complex64>() / big_m as f64;
    let mut approx = vec![mean; big_m];
    let mut is_support = vec![false; big_m];
    let mut support: Vec<usize> = Vec::new();
    // columns of the Cauchy block over all samples (support rows unused)
    let mut columns: Vec<Vec<Complex64>> = Vec::new();
    let mut weights = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..cap {
        let mut pick = None;
        let mut worst = f64::NEG_INFINITY;
        for k in 0..big_m {
            if is_support[k] {
                continue;
            }
            let r = (values[k] - approx[k]).norm();
            let r = if r.is_nan() { f64::INFINITY } else { r };
            if r > worst {
                worst = r;
                pick = Some(k);
            }
        }
        let j = pick.expect("cap keeps at least half the samples free");
        is_support[j] = true;
        support.push(j);
        let zj = points[j];
        columns.push(
            (0..big_m)
                .map(|k| if is_support[k] { Complex64::new(0.0, 0.0) } else { kernel.eval(points[k], zj) })
                .collect(),
        );
        // a newly promoted point must not leave stale entries in older columns
        for col in columns.iter_mut() {
            col[j] = Complex64::new(0.0, 0.0);
        }

        let active: Vec<usize> = (0..big_m).filter(|&k| !is_support[k]).collect();
        debug_assert_eq!(active.len() + support.len(), big_m);
        let m = support.len();
        let fsup: Vec<Complex64> = support.iter().map(|&s| values[s]).collect();
        let zsup: Vec<Complex64> = support.iter().map(|&s| points[s]).collect();
        let extra = extra_rows.map(|f| f(&zsup, &fsup)).unwrap_or_default();
        let rows = active.len() + extra.len();
        let a = Mat::from_fn(rows, m, |r, c| {
            if r < active.len() {
                let k = active[r];
                (values[k] - fsup[c]) * columns[c][k]
            } else {
                extra[r - active.len()][c]
            }
        });
        weights = min_singular_direction(&a)?;

        let mut err = 0.0f64;
        for k in 0..big_m {
            if is_support[k] {
                approx[k] = values[k];
                continue;
            }
            let mut n = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for c in 0..m {
                let t = weights[c] * columns[c][k];
                n += t * fsup[c];
                d += t;
            }
            approx[k] = n / d;
            let e = (values[k] - approx[k]).norm();
            err = if e.is_nan() { f64::INFINITY } else { err.max(e) };
        }
        history.push(err);
        if err <= rel_tol * scale {
            converged = true;
            break;
        }
    }

    Ok(GreedyFit { support, weights, err_history: history, converged })
}

/// Removes support points whose weight is exactly zero. They add nothing to
/// either sum, and a nullspace of dimension above one produces them.
fn drop_zero_weights(
    support: Vec<Complex64>,
    fvals: Vec<Complex64>,
    weights: Vec<Complex64>,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    if weights.iter().all(|w| *w != Complex64::new(0.0, 0.0)) {
        return (support, fvals, weights);
    }
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for ((z, f), w) in support.into_iter().zip(fvals).zip(weights) {
        if w != Complex64::new(0.0, 0.0) {
            out.0.push(z);
            out.1.push(f);
            out.2.push(w);
        }
    }
    out
}

/// Fits a trigonometric rational approximant to the samples.
pub fn fit(samples: &SampleSet, config: &FitConfig) -> Result<TrigModel> {
    config.validate()?;
    if samples.len() < 4 {
        return Err(Error::InvalidSamples(format!("need at least 4 samples, got {}", samples.len())));
    }
    let parity = config.parity;
    let constraint = config.far_field_constraint;
    let rows_fn = move |z: &[Complex64], f: &[Complex64]| far_field_rows(z, f, constraint.unwrap(), parity);
    let extra: Option<ExtraRows<'_>> = if constraint.is_some() { Some(&rows_fn) } else { None };
    let g = greedy_fit(
        samples.points(),
        samples.values(),
        &TrigKernel(parity),
        config.rel_tol,
        config.max_order,
        extra,
    )?;
    let (support, fvals, weights) = drop_zero_weights(
        g.support.iter().map(|&j| samples.points()[j]).collect(),
        g.support.iter().map(|&j| samples.values()[j]).collect(),
        g.weights,
    );
    let model = TrigModel::from_parts(parity, support, fvals, weights, g.err_history, samples.scale())?
    .with_fit_status(g.converged);
    if config.cleanup {
        cleanup(&model, samples, config)
    } else {
        Ok(model)
    }
}

/// Solves for weights on a fixed support, using every sample that is not a
/// support point. Returns the weights and the max residual on those samples.
pub(crate) fn solve_on_support(
    samples: &SampleSet,
    support: &[Complex64],
    fvals: &[Complex64],
    config: &FitConfig,
) -> Result<(Vec<Complex64>, f64)> {
    let pts = samples.points();
    let vals = samples.values();
    let active: Vec<usize> = (0..samples.len())
        .filter(|&k| support.iter().all(|&s| strip_distance(pts[k], s) >= SUPPORT_SNAP))
        .collect();
    if active.len() < support.len() {
        return Err(Error::OrderTooLarge { m: support.len(), samples: samples.len() });
    }
    let mut system = LeastSquaresSystem::build(
        pts,
        vals,
        active,
        support.to_vec(),
        fvals.to_vec(),
        &TrigKernel(config.parity),
    );
    if let Some(target) = config.far_field_constraint {
        system = append_far_field_rows(system, target, config.parity);
    }
    let weights = min_singular_direction(&system.matrix)?;
    let mut err = 0.0f64;
    for (r, &k) in system.active_rows.iter().enumerate() {
        let mut n = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for c in 0..support.len() {
            let t = weights[c] * system.cauchy[(r, c)];
            n += t * fvals[c];
            d += t;
        }
        let e = (vals[k] - n / d).norm();
        err = if e.is_nan() { f64::INFINITY } else { err.max(e) };
    }
    Ok((weights, err))
}

/// Outcome of a cleanup pass, for diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CleanupReport {
    pub spurious_poles: Vec<Complex64>,
    pub removed_support: Vec<usize>,
}

/// Removes support points next to poles with negligible residue, then
/// re-solves the least-squares problem once on the reduced support.
pub fn cleanup(model: &TrigModel, samples: &SampleSet, config: &FitConfig) -> Result<TrigModel> {
    cleanup_with_report(model, samples, config).map(|(m, _)| m)
}

pub fn cleanup_with_report(
    model: &TrigModel,
    samples: &SampleSet,
    config: &FitConfig,
) -> Result<(TrigModel, CleanupReport)> {
    let unchanged = |model: &TrigModel| {
        (model.clone(), CleanupReport { spurious_poles: Vec::new(), removed_support: Vec::new() })
    };
    if model.order() < 2 {
        return Ok(unchanged(model));
    }
    let scale = samples.scale();
    let Ok(report) = poles_and_zeros(model) else {
        return Ok(unchanged(model));
    };
    let mut spurious = Vec::new();
    for &p in &report.poles {
        match residues(model, &[p]) {
            Ok(res) if res[0].norm() < config.cleanup_tol * scale => spurious.push(p),
            _ => {}
        }
    }
    if spurious.is_empty() {
        return Ok(unchanged(model));
    }
    // each spurious pole claims the nearest support point not yet removed
    let mut remove: Vec<usize> = Vec::new();
    for &p in &spurious {
        let nearest = (0..model.order())
            .filter(|j| !remove.contains(j))
            .min_by(|&a, &b| {
                strip_distance(p, model.support()[a]).total_cmp(&strip_distance(p, model.support()[b]))
            });
        if let Some(j) = nearest {
            remove.push(j);
        }
    }
    remove.sort_unstable();
    if remove.len() >= model.order() {
        let (m, r) = unchanged(model);
        return Ok((m.with_cleanup_warning(true), r));
    }
    let keep: Vec<usize> = (0..model.order()).filter(|j| !remove.contains(j)).collect();
    let support: Vec<Complex64> = keep.iter().map(|&j| model.support()[j]).collect();
    let fvals: Vec<Complex64> = keep.iter().map(|&j| model.fvals()[j]).collect();
    let cfg = FitConfig { parity: model.parity(), ..config.clone() };
    let (weights, err) = solve_on_support(samples, &support, &fvals, &cfg)?;
    let (support, fvals, weights) = drop_zero_weights(support, fvals, weights);

    let m_new = support.len();
    let mut history: Vec<f64> = model.err_history().iter().copied().take(m_new - 1).collect();
    history.push(err);
    let cleaned = TrigModel::from_parts(model.parity(), support, fvals, weights, history, scale)?
        .with_fit_status(err <= config.rel_tol * scale);
    Ok((cleaned, CleanupReport { spurious_poles: spurious, removed_support: remove }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigbary::TWO_PI;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn equispaced(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| c(TWO_PI * k as f64 / n as f64, 0.0)).collect()
    }

    #[test]
    fn loewner_three_point_example() {
        let samples = SampleSet::new(
            vec![c(0.0, 0.0), c(PI / 2.0, 0.0), c(PI, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let sys = assemble_loewner(&samples, &[1], Parity::Odd).unwrap();
        let r2 = 2f64.sqrt();
        let expected = [c(-r2, r2), c(-r2, -r2)];
        assert_eq!(sys.active_rows, vec![0, 2]);
        for (r, e) in expected.iter().enumerate() {
            assert!((sys.matrix[(r, 0)] - e).norm() < 1e-14, "{} vs {}", sys.matrix[(r, 0)], e);
        }
    }

    #[test]
    fn loewner_constant_data_is_zero_and_factorizes() {
        let samples = SampleSet::from_fn(equispaced(10), |_| c(2.0, -1.0)).unwrap();
        let sys = assemble_loewner(&samples, &[0, 3, 7], Parity::Even).unwrap();
        for i in 0..sys.matrix.nrows() {
            for j in 0..3 {
                assert_eq!(sys.matrix[(i, j)], c(0.0, 0.0));
            }
        }

        let samples = SampleSet::from_fn(equispaced(12), |z| (z.sin() * 2.0).exp()).unwrap();
        let sys = assemble_loewner(&samples, &[1, 4, 9], Parity::Odd).unwrap();
        for r in 0..sys.matrix.nrows() {
            for j in 0..3 {
                let factored = sys.sample_values[r] * sys.cauchy[(r, j)] - sys.cauchy[(r, j)] * sys.support_values[j];
                let entry = sys.matrix[(r, j)];
                assert!((entry - factored).norm() <= 1e-14 * entry.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn loewner_order_cap() {
        let samples = SampleSet::from_fn(equispaced(5), |z| z.cos()).unwrap();
        assert!(matches!(
            assemble_loewner(&samples, &[0, 1, 2], Parity::Odd),
            Err(Error::OrderTooLarge { m: 3, samples: 5 })
        ));
    }

    #[test]
    fn far_field_row_examples() {
        let samples = SampleSet::new(
            vec![c(0.0, 0.0), c(PI, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)],
            vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.3, 0.0), c(0.2, 0.0), c(0.1, 0.0)],
        )
        .unwrap();
        let sys = assemble_loewner(&samples, &[0, 1], Parity::Even).unwrap();
        let rows = sys.matrix.nrows();
        let sys = append_far_field_rows(sys, FarField::uniform(c(0.0, 0.0)), Parity::Even);
        assert_eq!(sys.matrix.nrows(), rows + 1);
        assert_eq!(sys.matrix[(rows, 0)], c(-1.0, 0.0));
        assert_eq!(sys.matrix[(rows, 1)], c(1.0, 0.0));

        let sys = assemble_loewner(&samples, &[0, 1], Parity::Odd).unwrap();
        let sys = append_far_field_rows(sys, FarField::new(c(0.0, 1.0), c(0.0, -1.0)), Parity::Odd);
        assert_eq!(sys.constraint_rows, 2);
        let expected = [
            [c(-1.0, 1.0), c(1.0, 1.0) * c(0.0, -1.0)],
            [c(-1.0, -1.0), c(1.0, -1.0) * c(0.0, 1.0)],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert!((sys.matrix[(rows + i, j)] - e).norm() < 1e-15);
            }
        }

        let sys = assemble_loewner(&samples, &[2], Parity::Odd).unwrap();
        let sys = append_far_field_rows(sys, FarField::uniform(c(0.3, 0.0)), Parity::Odd);
        let n = sys.matrix.nrows();
        assert_eq!(sys.matrix[(n - 1, 0)], c(0.0, 0.0));
        assert_eq!(sys.matrix[(n - 2, 0)], c(0.0, 0.0));
    }

    #[test]
    fn constant_data_fits_at_order_one() {
        let samples = SampleSet::from_fn(equispaced(20), |_| c(3.0, 4.0)).unwrap();
        let model = fit(&samples, &FitConfig::default()).unwrap();
        assert_eq!(model.order(), 1);
        assert!(model.err_history()[0] < 1e-14);
        assert!(model.converged());
        assert!((model.eval(c(1.234, 0.5)) - c(3.0, 4.0)).norm() < 1e-14);
    }

    #[test]
    fn small_sample_sets_are_rejected() {
        let samples = SampleSet::from_fn(equispaced(3), |z| z.cos()).unwrap();
        assert!(matches!(fit(&samples, &FitConfig::default()), Err(Error::InvalidSamples(_))));
        let bad = FitConfig { rel_tol: -1.0, ..FitConfig::default() };
        let samples = SampleSet::from_fn(equispaced(8), |z| z.cos()).unwrap();
        assert!(matches!(fit(&samples, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn greedy_picks_lowest_index_on_ties() {
        // values symmetric about the mean: every residual ties at step one
        let pts = equispaced(8);
        let vals: Vec<_> = (0..8).map(|k| if k % 2 == 0 { c(1.0, 0.0) } else { c(-1.0, 0.0) }).collect();
        let samples = SampleSet::new(pts, vals).unwrap();
        let cfg = FitConfig { max_order: 1, cleanup: false, ..FitConfig::default() };
        let model = fit(&samples, &cfg).unwrap();
        assert_eq!(model.support()[0], samples.points()[0]);
        assert!(!model.converged());
    }

    #[test]
    fn cleanup_is_identity_without_small_residues() {
        // r = −cot((z − π/2)/2) has a single pole of residue −2
        let samples = SampleSet::from_fn(equispaced(40).into_iter().map(|z| z + 0.05).collect(), |z| -(0.5 * (z - PI / 2.0)).tan().inv()).unwrap();
        let model = TrigModel::new(
            Parity::Odd,
            vec![c(0.0, 0.0), c(PI, 0.0)],
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let cfg = FitConfig::default();
        let cleaned = cleanup(&model, &samples, &cfg).unwrap();
        assert_eq!(cleaned, model);
    }
}
