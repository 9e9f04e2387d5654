//! Dense symmetric / PSD kernels that everything else builds on.
//!
//! Matrices are row-major `f64`. The vectorization convention used across
//! the crate is row-major as well: `vec(X)[i * cols + j] == X[i, j]`, so a
//! flat gradient slice and its matrix view share the same buffer. Under this
//! convention `(A ⊗ I_r) vec(X) == vec(A · X)` for the left Kronecker factor,
//! which is what [`kron_left_apply`] exploits.

use crate::error::{invalid, Result};
use nalgebra::DMatrix;

/// Eigenvalues this far below `max(1, λ_max)` (relatively) still count as PSD
/// and are clamped to zero on construction of a [`PsdMatrix`].
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Relative eigenvalue cutoff below which pseudo-inverse powers treat a
/// direction as singular.
pub const PINV_CUTOFF_REL: f64 = 1e-12;

/// Dense rectangular matrix, row-major.
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

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Flat row-major view; identical to `vec(X)` under the crate convention.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `X Xᵀ` as a symmetric matrix.
    pub fn gram_left(&self) -> SymMatrix {
        let mut s = SymMatrix::zeros(self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(i, k) * self.get(j, k);
                }
                s.set_sym(i, j, acc);
            }
        }
        s
    }

    /// `Xᵀ X` as a symmetric matrix.
    pub fn gram_right(&self) -> SymMatrix {
        let mut s = SymMatrix::zeros(self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = 0.0;
                for k in 0..self.rows {
                    acc += self.get(k, i) * self.get(k, j);
                }
                s.set_sym(i, j, acc);
            }
        }
        s
    }

    /// Largest singular value, via the smaller Gram matrix.
    pub fn op_norm(&self) -> f64 {
        let gram = if self.rows <= self.cols { self.gram_left() } else { self.gram_right() };
        let eig = sym_eig(&gram).expect("finite matrix");
        eig.values[0].max(0.0).sqrt()
    }
}

/// Dense symmetric matrix. Construction symmetrizes as `(A + Aᵀ)/2` so the
/// stored entries satisfy `a[i][j] == a[j][i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = SymMatrix::zeros(dim);
        for (i, v) in diag.iter().enumerate() {
            m.data[i * dim + i] = *v;
        }
        m
    }

    /// Symmetrize arbitrary square data.
    pub fn from_mat(m: &Mat) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(invalid("symmetric matrix must be square"));
        }
        let dim = m.rows();
        let mut s = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                s.set_sym(i, j, 0.5 * (m.get(i, j) + m.get(j, i)));
            }
        }
        Ok(s)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        SymMatrix::from_mat(&Mat::from_rows(rows)).expect("square input")
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                s.set_sym(i, j, 0.5 * (f(i, j) + f(j, i)));
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `⟨A, B⟩ = Tr(AᵀB)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s * other`, in place.
    pub fn add_scaled(&mut self, other: &SymMatrix, s: f64) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Rank-one update `self += s * v vᵀ`.
    pub fn add_outer(&mut self, v: &[f64], s: f64) {
        assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.data[i * self.dim + j] += s * v[i] * v[j];
            }
        }
    }

    pub fn shift_diag(&mut self, s: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += s;
        }
    }

    pub fn to_mat(&self) -> Mat {
        Mat { rows: self.dim, cols: self.dim, data: self.data.clone() }
    }

    /// `A x` for a vector.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn min_eig(&self) -> Result<f64> {
        Ok(*sym_eig(self)?.values.last().expect("nonempty"))
    }
}

/// Sorted eigendecomposition of a symmetric matrix: `A = V diag(values) Vᵀ`
/// with `values` descending and `V` orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) Vᵀ` as a symmetric matrix.
    pub fn map_to_sym(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.values.len();
        let mut out = SymMatrix::zeros(d);
        for (k, lam) in self.values.iter().enumerate() {
            let fl = f(*lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..d {
                let vi = self.vectors.get(i, k);
                if vi == 0.0 {
                    continue;
                }
                for j in i..d {
                    let v = out.get(i, j) + fl * vi * self.vectors.get(j, k);
                    out.set_sym(i, j, v);
                }
            }
        }
        out
    }

    /// `V diag(f(λ)) Vᵀ x` without materializing the matrix.
    pub fn map_apply(&self, f: impl Fn(f64) -> f64, x: &[f64]) -> Vec<f64> {
        let d = self.values.len();
        assert_eq!(x.len(), d);
        let mut out = vec![0.0; d];
        for (k, lam) in self.values.iter().enumerate() {
            let fl = f(*lam);
            if fl == 0.0 {
                continue;
            }
            let mut proj = 0.0;
            for i in 0..d {
                proj += self.vectors.get(i, k) * x[i];
            }
            let c = fl * proj;
            for i in 0..d {
                out[i] += c * self.vectors.get(i, k);
            }
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(invalid("sym_eig: non-finite entries"));
    }
    let d = a.dim();
    if d == 0 {
        return Err(invalid("sym_eig: empty matrix"));
    }
    let na = DMatrix::from_fn(d, d, |i, j| a.get(i, j));
    let se = na.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(d, d, |i, j| se.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Symmetric matrix with a certified nonnegative spectrum and a cached
/// eigendecomposition. Eigenvalues within `PSD_CLAMP_TOL · max(1, λ_max)` of
/// zero from below are clamped to zero; anything more negative is rejected.
#[derive(Debug, Clone)]
pub struct PsdMatrix {
    base: SymMatrix,
    eig: EigenDecomposition,
}

impl PsdMatrix {
    pub fn new(base: SymMatrix) -> Result<Self> {
        let mut eig = sym_eig(&base)?;
        let max = eig.values.first().copied().unwrap_or(0.0);
        let floor = -PSD_CLAMP_TOL * max.max(1.0);
        for v in eig.values.iter_mut() {
            if *v < floor {
                return Err(invalid(format!(
                    "matrix is not PSD: eigenvalue {v:.3e} below tolerance {floor:.3e}"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(PsdMatrix { base, eig })
    }

    /// Build directly from nonnegative eigenvalues and orthonormal vectors,
    /// materializing the base matrix. No re-decomposition.
    pub fn from_eigenpairs(mut values: Vec<f64>, vectors: Mat) -> Self {
        // Keep descending order; callers may hand back mapped spectra.
        let d = values.len();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).expect("finite"));
        let sorted_vecs = Mat::from_fn(d, d, |i, j| vectors.get(i, order[j]));
        values = order.iter().map(|&k| values[k]).collect();
        let eig = EigenDecomposition { values, vectors: sorted_vecs };
        let base = eig.map_to_sym(|l| l);
        PsdMatrix { base, eig }
    }

    pub fn identity(dim: usize) -> Self {
        PsdMatrix::new(SymMatrix::identity(dim)).expect("identity is PSD")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        PsdMatrix::new(SymMatrix::diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.base
    }

    pub fn eig(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn trace(&self) -> f64 {
        self.base.trace()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.base.get(i, j)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.base.apply(x)
    }

    /// `A† x`: inverse on the range, zero on the kernel (relative cutoff
    /// `PINV_CUTOFF_REL · λ_max`).
    pub fn pinv_apply(&self, x: &[f64]) -> Vec<f64> {
        let cutoff = PINV_CUTOFF_REL * self.eig.values.first().copied().unwrap_or(0.0);
        self.eig
            .map_apply(|l| if l > cutoff { 1.0 / l } else { 0.0 }, x)
    }

    pub fn sqrt(&self) -> PsdMatrix {
        psd_power(self, Power::Half)
    }

    pub fn inv_sqrt(&self) -> PsdMatrix {
        psd_power(self, Power::NegHalf)
    }

    pub fn pinv(&self) -> PsdMatrix {
        psd_power(self, Power::Inverse)
    }
}

/// The matrix powers the optimizers need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Power {
    /// `A^{1/2}`
    Half,
    /// `A^{-1/2}` (pseudo-inverse convention)
    NegHalf,
    /// `A^{1/4}`
    Quarter,
    /// `A^{-1/4}` (pseudo-inverse convention)
    NegQuarter,
    /// `A^{-1}` (pseudo-inverse convention)
    Inverse,
}

impl Power {
    pub fn exponent(self) -> f64 {
        match self {
            Power::Half => 0.5,
            Power::NegHalf => -0.5,
            Power::Quarter => 0.25,
            Power::NegQuarter => -0.25,
            Power::Inverse => -1.0,
        }
    }
}

/// `V λ^p Vᵀ` with the pseudo-inverse convention for negative powers:
/// eigenvalues at or below `PINV_CUTOFF_REL · λ_max` map to zero.
pub fn psd_power(a: &PsdMatrix, p: Power) -> PsdMatrix {
    let exp = p.exponent();
    let lam_max = a.eig.values.first().copied().unwrap_or(0.0);
    let cutoff = PINV_CUTOFF_REL * lam_max;
    let values: Vec<f64> = a
        .eig
        .values
        .iter()
        .map(|&l| {
            if exp < 0.0 {
                if l > cutoff {
                    l.powf(exp)
                } else {
                    0.0
                }
            } else {
                l.max(0.0).powf(exp)
            }
        })
        .collect();
    PsdMatrix::from_eigenpairs(values, a.eig.vectors.clone())
}

/// Semi-definite ordering test: `A ⪯ B` iff `λ_min(B − A) ≥ −tol`.
pub fn loewner_leq(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(invalid(format!(
            "loewner_leq: dimension mismatch {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(b.sub(a).min_eig()? >= -tol)
}

/// `(H_L ⊗ I_{d_R}) vec(G)` computed as `H_L · G`, without materializing the
/// Kronecker product.
pub fn kron_left_apply(hl: &PsdMatrix, g: &Mat) -> Result<Mat> {
    if hl.dim() != g.rows() {
        return Err(invalid(format!(
            "kron_left_apply: left factor is {}x{} but G has {} rows",
            hl.dim(),
            hl.dim(),
            g.rows()
        )));
    }
    Ok(hl.as_sym().to_mat().matmul(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sym_eig_identity() {
        let eig = sym_eig(&SymMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(eig.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sym_eig_two_by_two() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 with eigenvectors (1,±1)/√2.
        let a = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let eig = sym_eig(&a).unwrap();
        assert_abs_diff_eq!(eig.values[0], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-10);
        let v0 = (eig.vectors.get(0, 0), eig.vectors.get(1, 0));
        assert_abs_diff_eq!((v0.0 + v0.1).abs(), 2.0f64.sqrt(), epsilon = 1e-10);
        // Orthonormality and reconstruction.
        let v = &eig.vectors;
        let vtv = v.transpose().matmul(v);
        assert!(vtv.sub(&Mat::identity(2)).max_abs() <= 1e-8);
        let recon = Mat::from_fn(2, 2, |i, j| {
            (0..2).map(|k| eig.values[k] * v.get(i, k) * v.get(j, k)).sum()
        });
        assert!(recon.sub(&a.to_mat()).frob_norm() <= 1e-8 * a.frob_norm().max(1.0));
    }

    #[test]
    fn sym_eig_sorts_descending() {
        let eig = sym_eig(&SymMatrix::diagonal(&[0.0, 5.0])).unwrap();
        assert_eq!(eig.values, vec![5.0, 0.0]);
    }

    #[test]
    fn sym_eig_rejects_non_finite() {
        let a = SymMatrix::from_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]);
        assert!(matches!(sym_eig(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn psd_power_diagonal_cases() {
        let a = PsdMatrix::diagonal(&[4.0, 9.0]).unwrap();
        let r = psd_power(&a, Power::Half);
        assert_abs_diff_eq!(r.get(0, 0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.get(1, 1), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.trace(), 5.0, epsilon = 1e-12);

        // Pseudo-inverse convention on the singular direction.
        let b = PsdMatrix::diagonal(&[4.0, 0.0]).unwrap();
        let r = psd_power(&b, Power::NegHalf);
        assert_abs_diff_eq!(r.get(0, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.get(1, 1), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_power_dense_sqrt() {
        let a = PsdMatrix::new(SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let r = a.sqrt();
        assert_abs_diff_eq!(r.get(0, 0), 1.36603, epsilon = 1e-5);
        assert_abs_diff_eq!(r.get(0, 1), 0.36603, epsilon = 1e-5);
        assert_abs_diff_eq!(r.get(1, 1), 1.36603, epsilon = 1e-5);
    }

    #[test]
    fn psd_rejects_indefinite() {
        let a = SymMatrix::diagonal(&[1.0, -0.5]);
        assert!(PsdMatrix::new(a).is_err());
        // Tiny negative dust is clamped instead.
        let b = SymMatrix::diagonal(&[1.0, -1e-12]);
        let p = PsdMatrix::new(b).unwrap();
        assert_eq!(p.eigenvalues()[1], 0.0);
    }

    #[test]
    fn loewner_ordering() {
        let i2 = SymMatrix::identity(2);
        assert!(loewner_leq(&i2, &i2.scale(2.0), 1e-9).unwrap());
        let a = SymMatrix::diagonal(&[1.0, 0.0]);
        let b = SymMatrix::diagonal(&[0.0, 1.0]);
        assert!(!loewner_leq(&a, &b, 1e-9).unwrap());
        assert!(loewner_leq(&a, &a, 1e-9).unwrap());
        let bad = SymMatrix::identity(3);
        assert!(loewner_leq(&a, &bad, 1e-9).is_err());
    }

    #[test]
    fn kron_left_apply_row_scaling() {
        let hl = PsdMatrix::diagonal(&[2.0, 3.0]).unwrap();
        let g = Mat::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let out = kron_left_apply(&hl, &g).unwrap();
        assert_eq!(out.as_slice(), &[2.0, 2.0, 3.0, 3.0]);

        let id = PsdMatrix::identity(2);
        assert_eq!(kron_left_apply(&id, &g).unwrap().as_slice(), g.as_slice());

        let wrong = Mat::zeros(3, 2);
        assert!(kron_left_apply(&hl, &wrong).is_err());
    }

    #[test]
    fn kron_left_apply_matches_explicit_kronecker() {
        // Explicit (H_L ⊗ I) on vec(G) under the row-major convention.
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let raw = SymMatrix::from_fn(3, |_, _| next());
        let hl = {
            let mut m = raw.clone();
            // Shift to PSD.
            let min = m.min_eig().unwrap();
            m.shift_diag(min.abs() + 0.1);
            PsdMatrix::new(m).unwrap()
        };
        let g = Mat::from_fn(3, 2, |_, _| next());
        let (dl, dr) = (3, 2);
        let mut kron = Mat::zeros(dl * dr, dl * dr);
        for a in 0..dl {
            for b in 0..dl {
                for k in 0..dr {
                    kron.set(a * dr + k, b * dr + k, hl.get(a, b));
                }
            }
        }
        let direct = kron_left_apply(&hl, &g).unwrap();
        let expect = kron.matmul(&Mat::from_vec(dl * dr, 1, g.as_slice().to_vec()).unwrap());
        let diff: f64 = direct
            .as_slice()
            .iter()
            .zip(expect.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-12, "max abs diff {diff}");
    }

    #[test]
    fn op_norm_of_diagonal() {
        let g = Mat::from_rows(&[&[3.0, 0.0], &[0.0, -4.0]]);
        assert_abs_diff_eq!(g.op_norm(), 4.0, epsilon = 1e-10);
    }
}
