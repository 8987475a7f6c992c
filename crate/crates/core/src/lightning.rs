//! Periodic lightning solver for Laplace problems with corner singularities,
//! and compression of its solution with the trigonometric fit.
//!
//! The ansatz is
//!
//! ```text
//! f(z) = Σ a_j cot((z − z_j)/2) + Σ b_k φ_k(tan((z − z*)/2))
//! ```
//!
//! where the `z_j` cluster at the corners and the `φ_k` are polynomials of
//! degree `k` made discretely orthonormal on the collocation points by an
//! Arnoldi process.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::solver::{fit, FitConfig};
use crate::trigbary::{cst_unchecked, Parity, SampleSet, TrigModel, TWO_PI};

/// Relative singular value below which a least-squares direction is dropped.
const SVD_CUTOFF: f64 = 1e-15;

/// A boundary corner and the unit direction that points away from the flow
/// domain, along the bisector of the exterior angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub point: Complex64,
    pub outward: Complex64,
}

/// `sigma_scale` used when none is given: `4/√n`.
pub fn default_sigma_scale(n: usize) -> f64 {
    4.0 / (n as f64).sqrt()
}

/// `n` poles per corner at distances `L·exp(σ(√n − √k))`, `k = 1..=n`,
/// with `σ = −sigma_scale`.
pub fn place_poles(corners: &[Corner], n: usize, sigma_scale: f64, length: f64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one pole per corner".into()));
    }
    if !(sigma_scale > 0.0) || !(length > 0.0) {
        return Err(Error::InvalidConfig("sigma_scale and length must be positive".into()));
    }
    let sigma = -sigma_scale;
    let root_n = (n as f64).sqrt();
    Ok(corners
        .iter()
        .flat_map(|c| {
            (1..=n).map(move |k| {
                let d = length * (sigma * (root_n - (k as f64).sqrt())).exp();
                c.point + d * c.outward
            })
        })
        .collect())
}

/// Orthonormal polynomial basis in a variable `t`, built by Arnoldi on the
/// collocation values and replayed at new points.
#[derive(Clone, Debug)]
pub struct ArnoldiBasis {
    /// Upper Hessenberg recurrence, `(degree + 1) × degree`.
    pub hessenberg: Mat<Complex64>,
    pub degree: usize,
}

impl ArnoldiBasis {
    /// Returns the basis and its values at the nodes (`N × (degree + 1)`).
    pub fn build(nodes: &[Complex64], degree: usize) -> (Self, Mat<Complex64>) {
        let n = nodes.len();
        let mut q = Mat::<Complex64>::zeros(n, degree + 1);
        let mut h = Mat::<Complex64>::zeros(degree + 1, degree);
        for r in 0..n {
            q[(r, 0)] = Complex64::new(1.0, 0.0);
        }
        let root_n = (n as f64).sqrt();
        for k in 0..degree {
            let mut v: Vec<Complex64> = (0..n).map(|r| nodes[r] * q[(r, k)]).collect();
            // modified Gram–Schmidt, twice for stability
            for _ in 0..2 {
                for j in 0..=k {
                    let dot: Complex64 = (0..n).map(|r| q[(r, j)].conj() * v[r]).sum::<Complex64>() / n as f64;
                    h[(j, k)] += dot;
                    for (r, vr) in v.iter_mut().enumerate() {
                        *vr -= dot * q[(r, j)];
                    }
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() / root_n;
            h[(k + 1, k)] = Complex64::new(norm, 0.0);
            for (r, vr) in v.iter().enumerate() {
                q[(r, k + 1)] = vr / norm;
            }
        }
        (Self { hessenberg: h, degree }, q)
    }

    /// Basis values `φ_0..φ_degree` at `t`.
    pub fn eval(&self, t: Complex64) -> Vec<Complex64> {
        let mut w = vec![Complex64::new(1.0, 0.0)];
        for k in 0..self.degree {
            let mut v = t * w[k];
            for (j, wj) in w.iter().enumerate() {
                v -= self.hessenberg[(j, k)] * wj;
            }
            w.push(v / self.hessenberg[(k + 1, k)]);
        }
        w
    }
}

/// A solved lightning expansion.
#[derive(Clone, Debug)]
pub struct LightningModel {
    pub newman_poles: Vec<Complex64>,
    pub newman_coeffs: Vec<Complex64>,
    pub runge_center: Complex64,
    /// `b_0..b_{n_2}`; `b_0` multiplies the constant.
    pub runge_coeffs: Vec<Complex64>,
    pub arnoldi_basis: ArnoldiBasis,
    /// Max |Im f − target| over the collocation points.
    pub boundary_residual: f64,
}

impl LightningModel {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let newman: Complex64 = self
            .newman_poles
            .iter()
            .zip(&self.newman_coeffs)
            .map(|(&p, &a)| a * cst_unchecked(Parity::Even, 0.5 * (z - p)))
            .sum();
        let t = runge_variable(z, self.runge_center);
        let runge: Complex64 = self
            .arnoldi_basis
            .eval(t)
            .iter()
            .zip(&self.runge_coeffs)
            .map(|(phi, b)| phi * b)
            .sum();
        newman + runge
    }

    pub fn pole_count(&self) -> usize {
        self.newman_poles.len()
    }
}

fn runge_variable(z: Complex64, center: Complex64) -> Complex64 {
    (0.5 * (z - center)).tan()
}

/// Solves `Im f = target` in the least-squares sense on the collocation points.
pub fn solve_dirichlet(
    boundary: &[(Complex64, f64)],
    poles: &[Complex64],
    runge_center: Complex64,
    runge_degree: usize,
) -> Result<LightningModel> {
    let n1 = poles.len();
    let n2 = runge_degree;
    // real unknowns: Re/Im of each a_j, Re/Im of b_1..b_n2, and Im b_0
    let cols = 2 * n1 + 2 * n2 + 1;
    if boundary.len() < cols {
        return Err(Error::InvalidConfig(format!(
            "{} collocation points for {} real unknowns",
            boundary.len(),
            cols
        )));
    }
    if boundary.iter().any(|(z, v)| !z.is_finite() || !v.is_finite()) {
        return Err(Error::NonFinitePoint);
    }
    let nodes: Vec<Complex64> = boundary.iter().map(|&(z, _)| runge_variable(z, runge_center)).collect();
    let (basis, q) = ArnoldiBasis::build(&nodes, n2);

    let rows = boundary.len();
    // Im(c·φ) = Re(c)·Im(φ) + Im(c)·Re(φ)
    let mut a = Mat::<f64>::zeros(rows, cols);
    for (r, &(z, _)) in boundary.iter().enumerate() {
        for (j, &p) in poles.iter().enumerate() {
            let phi = cst_unchecked(Parity::Even, 0.5 * (z - p));
            a[(r, 2 * j)] = phi.im;
            a[(r, 2 * j + 1)] = phi.re;
        }
        for k in 1..=n2 {
            let phi = q[(r, k)];
            a[(r, 2 * n1 + 2 * (k - 1))] = phi.im;
            a[(r, 2 * n1 + 2 * (k - 1) + 1)] = phi.re;
        }
        a[(r, cols - 1)] = 1.0;
    }
    let b: Vec<f64> = boundary.iter().map(|&(_, v)| v).collect();
    let x = least_squares(&a, &b)?;

    let newman_coeffs = (0..n1).map(|j| Complex64::new(x[2 * j], x[2 * j + 1])).collect();
    let mut runge_coeffs = vec![Complex64::new(0.0, x[cols - 1])];
    runge_coeffs.extend((0..n2).map(|k| Complex64::new(x[2 * n1 + 2 * k], x[2 * n1 + 2 * k + 1])));
    let mut model = LightningModel {
        newman_poles: poles.to_vec(),
        newman_coeffs,
        runge_center,
        runge_coeffs,
        arnoldi_basis: basis,
        boundary_residual: 0.0,
    };
    model.boundary_residual = boundary
        .iter()
        .map(|&(z, v)| (model.eval(z).im - v).abs())
        .fold(0.0, f64::max);
    Ok(model)
}

/// Column-scaled truncated-SVD least squares.
fn least_squares(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let (rows, cols) = (a.nrows(), a.ncols());
    let scales: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt())
        .collect();
    if let Some(j) = scales.iter().position(|&s| s == 0.0 || !s.is_finite()) {
        return Err(Error::RankDeficient(if scales[j] == 0.0 { f64::INFINITY } else { f64::NAN }));
    }
    let scaled = Mat::from_fn(rows, cols, |i, j| a[(i, j)] / scales[j]);
    let svd = scaled
        .thin_svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let smax = s[0];
    let smin = s[cols - 1];
    if smax == 0.0 || smin <= f64::EPSILON * f64::EPSILON * smax {
        return Err(Error::RankDeficient(if smin == 0.0 { f64::INFINITY } else { smax / smin }));
    }
    let mut y = vec![0.0; cols];
    for k in 0..cols {
        if s[k] <= SVD_CUTOFF * smax {
            continue;
        }
        let utb: f64 = (0..rows).map(|i| u[(i, k)] * b[i]).sum();
        let coef = utb / s[k];
        for (j, yj) in y.iter_mut().enumerate() {
            *yj += v[(j, k)] * coef;
        }
    }
    Ok(y.iter().zip(&scales).map(|(y, s)| y / s).collect())
}

/// Compresses a lightning solution by fitting an odd-parity model to its
/// values at the given boundary samples.
pub fn compress(lm: &LightningModel, boundary_samples: &[Complex64], config: &FitConfig) -> Result<TrigModel> {
    let samples = SampleSet::from_fn(boundary_samples.to_vec(), |z| lm.eval(z))?;
    fit(&samples, &FitConfig { parity: Parity::Odd, ..config.clone() })
}

/// Settings for the semicircle demo.
#[derive(Clone, Debug, PartialEq)]
pub struct LightningConfig {
    pub poles_per_corner: usize,
    pub runge_degree: usize,
    /// `None` selects [`default_sigma_scale`], which clusters too weakly for
    /// the demo to reach a small residual.
    pub sigma_scale: Option<f64>,
    /// Collocation points per unknown pole.
    pub points_per_pole: usize,
    pub compression_samples: usize,
    /// Relative tolerance of the compressing fit.
    pub compression_tol: f64,
}

impl Default for LightningConfig {
    fn default() -> Self {
        Self {
            poles_per_corner: 60,
            runge_degree: 20,
            sigma_scale: Some(4.0),
            points_per_pole: 30,
            compression_samples: 1000,
            compression_tol: 3e-4,
        }
    }
}

/// Flow past a periodic array of half-disks: in each period window the
/// obstacle is `{|z| ≤ 1/2, Im z ≥ 0}`, with corners at `±1/2`. The
/// uniform flow is `iz` and the stream function `Im[f + iz]` vanishes on the
/// central obstacle.
#[derive(Clone, Copy, Debug, Default)]
pub struct SemicircleArray;

impl SemicircleArray {
    pub const RADIUS: f64 = 0.5;

    pub fn corners(&self) -> [Corner; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [
            Corner { point: Complex64::new(Self::RADIUS, 0.0), outward: Complex64::new(-s, s) },
            Corner { point: Complex64::new(-Self::RADIUS, 0.0), outward: Complex64::new(s, s) },
        ]
    }

    /// Strictly inside an obstacle (any period copy).
    pub fn in_obstacle(&self, z: Complex64) -> bool {
        let x = z.re - TWO_PI * (z.re / TWO_PI).round();
        let local = Complex64::new(x, z.im);
        local.im > 0.0 && local.norm() < Self::RADIUS
    }

    /// On or outside every obstacle.
    pub fn in_flow(&self, z: Complex64) -> bool {
        let x = z.re - TWO_PI * (z.re / TWO_PI).round();
        let local = Complex64::new(x, z.im);
        !(local.im >= 0.0 && local.norm() <= Self::RADIUS)
    }

    /// Points along the central obstacle's boundary, clustered toward the
    /// corners with a tapered law. Returned in the window `Re z ∈ [−1/2, 1/2]`.
    pub fn boundary_points(&self, per_edge: usize, min_distance: f64) -> Vec<Complex64> {
        let r = Self::RADIUS;
        let params = clustered_unit_interval(per_edge, min_distance);
        let mut pts = Vec::with_capacity(2 * params.len());
        // flat side, from −r to r
        for &s in &params {
            pts.push(Complex64::new(-r + 2.0 * r * s, 0.0));
        }
        // arc, from angle 0 to π
        for &s in &params {
            pts.push(Complex64::from_polar(r, PI * s));
        }
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        pts.dedup_by(|a, b| (*a - *b).norm() < 1e-15);
        pts
    }

    /// Dirichlet data for the stream function: `Im f = −Re z`.
    pub fn boundary_data(&self, points: &[Complex64]) -> Vec<(Complex64, f64)> {
        points.iter().map(|&z| (z, -z.re)).collect()
    }

    /// Centre of the Runge variable: `tan((z − z*)/2)` has its pole inside the obstacle.
    pub fn runge_center(&self) -> Complex64 {
        Complex64::new(PI, 0.2)
    }

    /// A fixed grid of points in the flow domain away from the boundary.
    pub fn interior_grid(&self, n: usize) -> Vec<Complex64> {
        let side = (n as f64).sqrt().ceil() as usize;
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        while out.len() < n {
            let i = k % side;
            let j = k / side;
            k += 1;
            let z = Complex64::new(-PI + TWO_PI * (i as f64 + 0.5) / side as f64, -1.5 + 3.0 * (j as f64 + 0.5) / side as f64);
            let x = z.re - TWO_PI * (z.re / TWO_PI).round();
            // keep clear of the obstacle boundary
            if Complex64::new(x, z.im.max(0.0)).norm() > Self::RADIUS + 0.05 {
                out.push(z);
            }
            if k > 100 * n {
                break;
            }
        }
        out
    }
}

/// Parameters in `[0, 1]`, tapered toward both ends down to `min_distance`.
fn clustered_unit_interval(n: usize, min_distance: f64) -> Vec<f64> {
    let half = n / 2;
    let mut s = Vec::with_capacity(2 * half + 1);
    let root = (half as f64).sqrt();
    let span = (0.5f64 / min_distance).ln();
    for k in 1..=half {
        // from min_distance up to 1/2 on the √k scale
        let d = min_distance * (span * ((k as f64).sqrt() - 1.0) / (root - 1.0).max(1.0)).exp();
        s.push(d.min(0.5));
        s.push(1.0 - d.min(0.5));
    }
    s.push(0.0);
    s.push(1.0);
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    s
}

/// Output of the demo.
#[derive(Clone, Debug)]
pub struct LightningDemo {
    pub lightning: LightningModel,
    /// Max |Im f − target| on a denser boundary set than the collocation points.
    pub verified_residual: f64,
    pub compressed: TrigModel,
    /// Max |compressed − lightning| over the interior grid.
    pub interior_error: f64,
    pub interior_grid: Vec<Complex64>,
}

/// Solves the semicircle problem and compresses the solution.
pub fn semicircle_demo(config: &LightningConfig) -> Result<LightningDemo> {
    let geo = SemicircleArray;
    let n = config.poles_per_corner;
    let sigma_scale = config.sigma_scale.unwrap_or_else(|| default_sigma_scale(n));
    let poles = place_poles(&geo.corners(), n, sigma_scale, SemicircleArray::RADIUS)?;
    if let Some(p) = poles.iter().find(|&&p| !geo.in_obstacle(p)) {
        return Err(Error::PoleInsideDomain(format!("{p}")));
    }
    let d_min = poles
        .iter()
        .zip(geo.corners().iter().flat_map(|c| std::iter::repeat_n(c.point, n)))
        .map(|(p, c)| (p - c).norm())
        .fold(f64::INFINITY, f64::min);
    let unknowns = 2 * poles.len() + 2 * config.runge_degree + 1;
    let per_edge = (config.points_per_pole * poles.len() / 2).max(unknowns);
    let points = geo.boundary_points(per_edge, 0.1 * d_min);
    let lightning = solve_dirichlet(&geo.boundary_data(&points), &poles, geo.runge_center(), config.runge_degree)?;

    let check = geo.boundary_points(4 * per_edge + 1, 0.037 * d_min);
    let verified_residual = geo
        .boundary_data(&check)
        .iter()
        .map(|&(z, v)| (lightning.eval(z).im - v).abs())
        .fold(0.0, f64::max);

    // a corner singularity of order r^(2/3) is resolved to ε at distance ε^(3/2)
    let samples = geo.boundary_points(
        config.compression_samples / 2,
        config.compression_tol.powf(1.5).max(0.1 * d_min),
    );
    let compressed = compress(&lightning, &samples, &FitConfig { rel_tol: config.compression_tol, ..FitConfig::default() })?;
    let interior_grid = geo.interior_grid(200);
    let interior_error = interior_grid
        .iter()
        .map(|&z| (compressed.eval(z) - lightning.eval(z)).norm())
        .fold(0.0, f64::max);
    Ok(LightningDemo { lightning, verified_residual, compressed, interior_error, interior_grid })
}

/// `(z, f(z))` on a rectangular grid over one period window, skipping
/// points inside the obstacle.
pub fn field_grid(lm: &LightningModel, nx: usize, ny: usize, y_range: (f64, f64)) -> Vec<(Complex64, Complex64)> {
    let geo = SemicircleArray;
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let x = -PI + TWO_PI * i as f64 / nx as f64;
            let y = y_range.0 + (y_range.1 - y_range.0) * j as f64 / (ny.max(2) - 1) as f64;
            let z = Complex64::new(x, y);
            if geo.in_flow(z) {
                out.push((z, lm.eval(z)));
            }
        }
    }
    out
}
