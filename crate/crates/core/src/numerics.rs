//! Dense linear algebra used by the fitting loop and the pole/zero solver.
//!
//! Pencils here always have the form `A v = λ B v` with `B = diag(0, 1, …, 1)`.
//! Two interchangeable solvers are provided behind [`PencilSolver`]:
//! a complex QZ factorization and a Schur-complement deflation that removes
//! the singular head of `B` before a standard eigensolve.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues with `|β| ≤ BETA_TOL · max|β|` are treated as infinite.
pub const BETA_TOL: f64 = 1e-12;

/// Eigenvalues with `|λ|` above this are treated as infinite.
pub const LAMBDA_MAX: f64 = 1e13;

/// Relative size below which a pencil head counts as zero during deflation.
const HEAD_TOL: f64 = 1e-14;

/// Singular values within this fraction of the largest of the smallest one
/// span the null space [`min_singular_direction`] chooses from.
const NULL_TOL: f64 = 1e-14;

/// Right singular vector of the smallest singular value of `a` (rows ≥ cols).
///
/// When that value is numerically repeated the vector is the normalized
/// projection of `(1, …, 1)` onto the repeated subspace. A bare basis vector
/// of that subspace often has exact zeros, which would silently drop support
/// points from the approximant.
///
/// The phase is fixed so that the largest-magnitude entry is real and
/// positive, which makes repeated fits bit-for-bit reproducible.
pub fn min_singular_direction(a: &Mat<Complex64>) -> Result<Vec<Complex64>> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if cols == 0 || rows < cols {
        return Err(Error::LinearAlgebra(format!(
            "expected rows >= cols >= 1, got {rows}x{cols}"
        )));
    }
    for j in 0..cols {
        for i in 0..rows {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFiniteMatrix);
            }
        }
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let mut idx = 0;
    for k in 1..cols {
        if s[k].re <= s[idx].re {
            idx = k;
        }
    }
    let v = svd.V();
    let s_max = (0..cols).map(|k| s[k].re).fold(0.0, f64::max);
    let null: Vec<usize> = (0..cols).filter(|&k| s[k].re - s[idx].re <= NULL_TOL * s_max).collect();
    let mut w: Vec<Complex64> = if null.len() > 1 {
        let mut w = vec![Complex64::new(0.0, 0.0); cols];
        for &k in &null {
            let coeff: Complex64 = (0..cols).map(|i| v[(i, k)].conj()).sum();
            for (i, x) in w.iter_mut().enumerate() {
                *x += coeff * v[(i, k)];
            }
        }
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            w.iter_mut().for_each(|x| *x /= norm);
            w
        } else {
            (0..cols).map(|i| v[(i, idx)]).collect()
        }
    } else {
        (0..cols).map(|i| v[(i, idx)]).collect()
    };
    let pivot = w
        .iter()
        .copied()
        .fold(Complex64::new(0.0, 0.0), |acc, x| if x.norm() > acc.norm() { x } else { acc });
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for x in &mut w {
            *x *= phase;
        }
    }
    Ok(w)
}

/// Smallest singular value of `a`.
pub fn min_singular_value(a: &Mat<Complex64>) -> Result<f64> {
    let s = a
        .singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    Ok(s.into_iter().fold(f64::INFINITY, f64::min))
}

/// Finite eigenvalues of a singular-head pencil.
#[derive(Clone, Debug, PartialEq)]
pub struct GepResult {
    pub finite_eigenvalues: Vec<Complex64>,
    pub discarded_count: usize,
}

impl GepResult {
    fn new(mut finite: Vec<Complex64>, discarded_count: usize) -> Self {
        sort_eigenvalues(&mut finite);
        Self { finite_eigenvalues: finite, discarded_count }
    }
}

/// Ascending real part, ties broken by imaginary part.
pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// `A v = λ diag(0, I) v`, stored densely.
#[derive(Clone, Debug)]
pub struct SingularHeadPencil {
    a: Mat<Complex64>,
}

impl SingularHeadPencil {
    /// Arrowhead pencil
    ///
    /// ```text
    /// [ head  p_1 … p_m ]
    /// [ c_1   d_1       ]
    /// [  ⋮        ⋱     ]
    /// [ c_m         d_m ]
    /// ```
    pub fn arrowhead(
        head: Complex64,
        payload: &[Complex64],
        column: &[Complex64],
        diagonal: &[Complex64],
    ) -> Result<Self> {
        let m = payload.len();
        if column.len() != m || diagonal.len() != m {
            return Err(Error::NotArrowhead(format!(
                "payload {}, column {}, diagonal {}",
                m,
                column.len(),
                diagonal.len()
            )));
        }
        let a = Mat::from_fn(m + 1, m + 1, |i, j| match (i, j) {
            (0, 0) => head,
            (0, j) => payload[j - 1],
            (i, 0) => column[i - 1],
            (i, j) if i == j => diagonal[i - 1],
            _ => Complex64::new(0.0, 0.0),
        });
        Ok(Self { a })
    }

    /// Any square `A` of size ≥ 1.
    pub fn dense(a: Mat<Complex64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::LinearAlgebra(format!(
                "pencil matrix must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(Self { a })
    }

    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &Mat<Complex64> {
        &self.a
    }

    /// The implied `B = diag(0, 1, …, 1)`.
    pub fn b(&self) -> Mat<Complex64> {
        let n = self.size();
        Mat::from_fn(n, n, |i, j| {
            if i == j && i > 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    fn check_finite(&self) -> Result<()> {
        let n = self.size();
        for j in 0..n {
            for i in 0..n {
                if !self.a[(i, j)].is_finite() {
                    return Err(Error::NonFiniteMatrix);
                }
            }
        }
        Ok(())
    }
}

/// A generalized eigensolver for singular-head pencils.
pub trait PencilSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, pencil: &SingularHeadPencil) -> Result<GepResult>;
}

/// Complex QZ on the full pencil.
#[derive(Clone, Copy, Debug, Default)]
pub struct QzSolver;

impl PencilSolver for QzSolver {
    fn name(&self) -> &'static str {
        "qz"
    }

    fn solve(&self, pencil: &SingularHeadPencil) -> Result<GepResult> {
        pencil.check_finite()?;
        let n = pencil.size();
        let b = pencil.b();
        let gevd = pencil
            .a
            .generalized_eigen(&b)
            .map_err(|e| Error::LinearAlgebra(format!("QZ failed: {e:?}")))?;
        let alpha = gevd.S_a().column_vector();
        let beta = gevd.S_b().column_vector();
        let beta_max = (0..n).map(|i| beta[i].norm()).fold(0.0, f64::max);
        let mut finite = Vec::with_capacity(n);
        for i in 0..n {
            if beta[i].norm() <= BETA_TOL * beta_max {
                continue;
            }
            let lambda = alpha[i] / beta[i];
            if lambda.is_finite() && lambda.norm() <= LAMBDA_MAX {
                finite.push(lambda);
            }
        }
        let discarded = n - finite.len();
        Ok(GepResult::new(finite, discarded))
    }
}

/// Removes the singular head by Schur complement, reducing to a standard
/// eigenproblem. A zero head is handled by a Householder rotation that
/// exposes the next head, one infinite eigenvalue per step.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeflationSolver;

impl PencilSolver for DeflationSolver {
    fn name(&self) -> &'static str {
        "deflation"
    }

    fn solve(&self, pencil: &SingularHeadPencil) -> Result<GepResult> {
        pencil.check_finite()?;
        let n = pencil.size();
        let a = &pencil.a;
        let scale = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::SingularPencil);
        }

        let mut head = a[(0, 0)];
        let mut payload: Vec<Complex64> = (1..n).map(|j| a[(0, j)]).collect();
        let mut column: Vec<Complex64> = (1..n).map(|i| a[(i, 0)]).collect();
        let mut block = Mat::from_fn(n - 1, n - 1, |i, j| a[(i + 1, j + 1)]);
        let mut discarded = 0;

        loop {
            let k = payload.len();
            if head.norm() > HEAD_TOL * scale {
                if k == 0 {
                    return Ok(GepResult::new(Vec::new(), discarded + 1));
                }
                // v0 = -p·v1 / head  ⇒  (K - c pᵀ / head) v1 = λ v1
                let reduced = Mat::from_fn(k, k, |i, j| block[(i, j)] - column[i] * payload[j] / head);
                let eig = reduced
                    .eigenvalues()
                    .map_err(|e| Error::LinearAlgebra(format!("eigensolve failed: {e:?}")))?;
                let total = eig.len();
                let finite: Vec<Complex64> = eig
                    .into_iter()
                    .filter(|l| l.is_finite() && l.norm() <= LAMBDA_MAX)
                    .collect();
                discarded += 1 + total - finite.len();
                return Ok(GepResult::new(finite, discarded));
            }

            // Zero head: the first row is the algebraic constraint p·v1 = 0.
            let p_norm = payload.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if k == 0 || p_norm <= HEAD_TOL * scale {
                return Err(Error::SingularPencil);
            }
            discarded += 1;
            if k == 1 {
                // v1 = 0 leaves only v0, with no dynamic rows left.
                return Ok(GepResult::new(Vec::new(), discarded + 1));
            }

            // Householder H with H·conj(p) ∝ e1, so that v1 = H y forces y_0 = 0.
            let x: Vec<Complex64> = payload.iter().map(|p| p.conj()).collect();
            let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
            let alpha = -phase * p_norm;
            let mut v = x.clone();
            v[0] -= alpha;
            let v_norm_sqr: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let apply = |y: &[Complex64]| -> Vec<Complex64> {
                // (I - 2 v vᴴ / vᴴv) y
                let dot: Complex64 = v.iter().zip(y).map(|(vi, yi)| vi.conj() * yi).sum();
                let s = 2.0 * dot / v_norm_sqr;
                y.iter().zip(&v).map(|(yi, vi)| yi - s * vi).collect()
            };

            let hc = apply(&column);
            // H K H, applied column-wise then row-wise
            let mut hk = Mat::zeros(k, k);
            for j in 0..k {
                let col: Vec<Complex64> = (0..k).map(|i| block[(i, j)]).collect();
                let t = apply(&col);
                for i in 0..k {
                    hk[(i, j)] = t[i];
                }
            }
            let mut hkh = Mat::zeros(k, k);
            for i in 0..k {
                // row i of (HK) times H = conj(H (HK)ᴴ row) since H is Hermitian
                let row: Vec<Complex64> = (0..k).map(|j| hk[(i, j)].conj()).collect();
                let t = apply(&row);
                for j in 0..k {
                    hkh[(i, j)] = t[j].conj();
                }
            }

            head = hc[0];
            payload = (1..k).map(|j| hkh[(0, j)]).collect();
            column = hc[1..].to_vec();
            block = Mat::from_fn(k - 1, k - 1, |i, j| hkh[(i + 1, j + 1)]);
        }
    }
}

/// Names accepted by [`pencil_solver`].
pub const PENCIL_SOLVERS: [&str; 2] = ["qz", "deflation"];

/// Looks up a pencil solver by name.
pub fn pencil_solver(name: &str) -> Result<Box<dyn PencilSolver>> {
    match name {
        "qz" => Ok(Box::new(QzSolver)),
        "deflation" => Ok(Box::new(DeflationSolver)),
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}

/// Finite eigenvalues of an arrowhead pencil given as dense `A` and `B`.
///
/// `A` must have ones below its head in the first column and be diagonal in
/// its trailing block; `B` must equal `diag(0, 1, …, 1)`.
pub fn generalized_eig_arrow(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Result<GepResult> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n || n == 0 {
        return Err(Error::NotArrowhead("shape mismatch".into()));
    }
    check_b(b)?;
    let one = Complex64::new(1.0, 0.0);
    for i in 1..n {
        if a[(i, 0)] != one {
            return Err(Error::NotArrowhead(format!("A[{i},0] = {} is not 1", a[(i, 0)])));
        }
        for j in 1..n {
            if i != j && a[(i, j)] != Complex64::new(0.0, 0.0) {
                return Err(Error::NotArrowhead(format!("A[{i},{j}] is off the arrow")));
            }
        }
    }
    QzSolver.solve(&SingularHeadPencil::dense(a.clone())?)
}

/// Finite eigenvalues of `A v = λ B v` for any dense `A` with `B = diag(0, I)`.
pub fn generalized_eig(a: &Mat<Complex64>, b: &Mat<Complex64>, solver: &dyn PencilSolver) -> Result<GepResult> {
    if b.nrows() != a.nrows() || b.ncols() != a.ncols() {
        return Err(Error::NotArrowhead("shape mismatch".into()));
    }
    check_b(b)?;
    solver.solve(&SingularHeadPencil::dense(a.clone())?)
}

fn check_b(b: &Mat<Complex64>) -> Result<()> {
    let n = b.nrows();
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j && i > 0 { 1.0 } else { 0.0 };
            if b[(i, j)] != Complex64::new(expected, 0.0) {
                return Err(Error::NotArrowhead(format!("B[{i},{j}] must be {expected}")));
            }
        }
    }
    Ok(())
}
