//! Dense matrix support sized for the sampler: dimensions here are the
//! number of modeled variables plus nominal latents (rarely more than a few
//! dozen), so a simple row-major layout with hand-rolled Cholesky is both
//! fast enough and lets factorization failures name the offending pivot.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let lhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for j in 0..rhs.cols {
                    out_row[j] += a * lhs_row[j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// self += v vᵀ (rank-one update used for scatter matrices).
    pub fn add_outer(&mut self, v: &[f64]) {
        assert_eq!(self.rows, v.len());
        assert_eq!(self.cols, v.len());
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let row = self.row_mut(i);
            for j in 0..v.len() {
                row[j] += vi * v[j];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric positive-definite (or at least factorizable) square matrix.
///
/// Construction validates symmetry to 1e-10 (relative to the largest entry)
/// and stores the exactly symmetrized average; positive definiteness is
/// checked where it matters, at factorization time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: Mat,
}

const SYMMETRY_TOL: f64 = 1e-10;

impl SpdMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        let scale = m.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if worst > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { max_asymmetry: worst });
        }
        Ok(Self::symmetrized(m))
    }

    /// Exact symmetrization without a tolerance check, for matrices that are
    /// symmetric by construction up to rounding (scatter sums, inverses).
    pub fn symmetrized(mut m: Mat) -> Self {
        assert_eq!(m.rows, m.cols);
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        SpdMatrix { m }
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix { m: Mat::identity(n) }
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Mat::identity(n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        SpdMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.rows
    }

    pub fn mat(&self) -> &Mat {
        &self.m
    }

    pub fn into_mat(self) -> Mat {
        self.m
    }

    pub fn add(&self, other: &SpdMatrix) -> Result<SpdMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let mut m = self.m.clone();
        for i in 0..m.data.len() {
            m.data[i] += other.m.data[i];
        }
        Ok(SpdMatrix { m })
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for SpdMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.m[idx]
    }
}

/// Lower-triangular Cholesky factor L with L Lᵀ = A.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Mat,
}

/// Default diagonal jitter scale applied once before declaring failure:
/// rescaled inverse-Wishart draws can be numerically borderline.
pub const DEFAULT_JITTER: f64 = 1e-10;

fn try_factor(a: &Mat, jitter: f64) -> core::result::Result<Mat, usize> {
    let n = a.rows;
    let mut max_diag = 0.0f64;
    for i in 0..n {
        max_diag = max_diag.max(a[(i, i)].abs());
    }
    let threshold = 1e-12 * max_diag.max(1.0);
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)] + jitter;
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= threshold {
            return Err(j);
        }
        let dj = math::sqrt(d);
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Cholesky factorization with a single jitter retry.
///
/// On a failing pivot the factorization is retried once with
/// `jitter_scale * trace / d` added to the diagonal; if it still fails, the
/// error names the pivot index of the retried attempt.
pub fn cholesky_psd_with(m: &SpdMatrix, jitter_scale: f64) -> Result<Cholesky> {
    match try_factor(&m.m, 0.0) {
        Ok(l) => Ok(Cholesky { l }),
        Err(_) => {
            let jitter = jitter_scale * m.trace() / m.dim() as f64;
            match try_factor(&m.m, jitter.max(0.0)) {
                Ok(l) => Ok(Cholesky { l }),
                Err(pivot) => Err(Error::NotPositiveDefinite { pivot }),
            }
        }
    }
}

pub fn cholesky_psd(m: &SpdMatrix) -> Result<Cholesky> {
    cholesky_psd_with(m, DEFAULT_JITTER)
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.l.rows
    }

    pub fn lower(&self) -> &Mat {
        &self.l
    }

    /// L v (maps iid standard normals to correlated draws).
    pub fn mul_lower_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = dot(&self.l.row(i)[..=i], &v[..=i]);
        }
        out
    }

    /// Solves A x = b with A = L Lᵀ.
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves Lᵀ x = b (so x ~ N(0, A⁻¹) when b is iid standard normal).
    pub fn solve_lt_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// L⁻¹, lower triangular.
    pub fn lower_inverse(&self) -> Mat {
        lower_triangular_inverse(&self.l)
    }

    /// A⁻¹ = L⁻ᵀ L⁻¹.
    pub fn inverse(&self) -> SpdMatrix {
        let linv = self.lower_inverse();
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        // out = linvᵀ linv, exploiting the triangular structure.
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in j..n {
                    s += linv[(k, i)] * linv[(k, j)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        SpdMatrix { m: out }
    }
}

/// Inverse of a lower-triangular matrix by forward substitution.
pub(crate) fn lower_triangular_inverse(l: &Mat) -> Mat {
    let n = l.rows;
    let mut inv = Mat::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s / l[(i, i)];
        }
    }
    inv
}

/// Rescales a covariance matrix to a correlation matrix with an exactly
/// unit diagonal.
pub fn cov_to_corr(m: &SpdMatrix) -> Result<SpdMatrix> {
    let n = m.dim();
    let mut inv_sd = Vec::with_capacity(n);
    for i in 0..n {
        let d = m[(i, i)];
        if d <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "cov_to_corr needs a positive diagonal; entry {i} is {d}"
            )));
        }
        inv_sd.push(1.0 / math::sqrt(d));
    }
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let r = (m[(i, j)] * inv_sd[i] * inv_sd[j]).clamp(-1.0, 1.0);
            out[(i, j)] = r;
            out[(j, i)] = r;
        }
    }
    Ok(SpdMatrix { m: out })
}
