//! Dense square complex matrices with explicit tolerances.
//!
//! Storage is row-major. Every predicate that compares floating-point
//! results takes a [`Tolerance`]; the exact operations (`adjoint`,
//! construction, block extraction) never round.

use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by matrix arithmetic and parsing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}

/// Comparison thresholds shared by every numeric predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Singular values below `rank_cutoff * s1` count as zero.
    pub rank_cutoff: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_abs: 1e-9,
            eps_rel: 1e-9,
            rank_cutoff: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(eps_abs: f64, eps_rel: f64, rank_cutoff: f64) -> Result<Self, MatrixError> {
        let tol = Tolerance {
            eps_abs,
            eps_rel,
            rank_cutoff,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<(), MatrixError> {
        for (name, v) in [
            ("eps_abs", self.eps_abs),
            ("eps_rel", self.eps_rel),
            ("rank_cutoff", self.rank_cutoff),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(MatrixError::InvalidTolerance(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.rank_cutoff >= 1.0 {
            return Err(MatrixError::InvalidTolerance(format!(
                "rank_cutoff is relative to the largest singular value and must be < 1, got {}",
                self.rank_cutoff
            )));
        }
        Ok(())
    }
}

/// Singular values in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SValues {
    pub values: Vec<f64>,
}

impl SValues {
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// A dense `n x n` complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

/// Wire form: `{"n": 2, "entries": [[re, im], ...]}` in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = MatrixError;

    fn try_from(j: MatrixJson) -> Result<Self, Self::Error> {
        let entries = j.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        CMatrix::try_from_entries(j.n, entries)
    }
}

impl From<CMatrix> for MatrixJson {
    fn from(m: CMatrix) -> Self {
        MatrixJson {
            n: m.n,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn try_from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Malformed("dimension must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(MatrixError::Malformed(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(MatrixError::Malformed(format!("entry {k} is not finite")));
        }
        Ok(CMatrix { n, data: entries })
    }

    /// Real row-major entries; convenient for tests and builders.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::Malformed("rows must form a square".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        CMatrix::try_from_entries(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose. Exact: `adjoint(adjoint(a)) == a` bitwise.
    pub fn adjoint(&self) -> Self {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix, MatrixError> {
        self.check_dim(other)?;
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(CMatrix { n, data: out })
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix, MatrixError> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(CMatrix { n: self.n, data })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix, MatrixError> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(CMatrix { n: self.n, data })
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self^k`, with `self^0 = I`.
    pub fn pow(&self, k: usize) -> CMatrix {
        let mut acc = CMatrix::identity(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn svalues(&self) -> Result<SValues, MatrixError> {
        let svd = self
            .to_nalgebra()
            .try_svd(false, false, f64::EPSILON, 10_000)
            .ok_or_else(|| MatrixError::NumericalFailure("SVD did not converge".into()))?;
        let mut values: Vec<f64> = svd.singular_values.iter().map(|s| s.max(0.0)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MatrixError::NumericalFailure("non-finite singular value".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SValues { values })
    }

    /// Number of singular values above `max(rank_cutoff * s1, eps_abs)`.
    pub fn rank(&self, tol: &Tolerance) -> Result<usize, MatrixError> {
        let sv = self.svalues()?;
        let threshold = (tol.rank_cutoff * sv.largest()).max(tol.eps_abs);
        Ok(sv.values.iter().filter(|&&s| s > threshold).count())
    }

    pub fn op_norm(&self) -> Result<f64, MatrixError> {
        Ok(self.svalues()?.largest())
    }

    pub fn determinant(&self) -> Complex64 {
        self.to_nalgebra().determinant()
    }

    /// `max |a - b| <= eps_abs + eps_rel * max(|a|_F, |b|_F)`.
    pub fn approx_eq(&self, other: &CMatrix, tol: &Tolerance) -> Result<bool, MatrixError> {
        self.check_dim(other)?;
        let scale = self.frobenius_norm().max(other.frobenius_norm());
        let threshold = tol.eps_abs + tol.eps_rel * scale;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a - b).norm() <= threshold))
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> Result<f64, MatrixError> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// The `size x size` principal block starting at `(start, start)`.
    pub fn block(&self, start: usize, size: usize) -> Result<CMatrix, MatrixError> {
        if size == 0 || start + size > self.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: start + size,
            });
        }
        Ok(CMatrix::from_fn(size, |i, j| self[(start + i, start + j)]))
    }

    /// Block-diagonal direct sum of the given matrices.
    pub fn direct_sum(parts: &[CMatrix]) -> Result<CMatrix, MatrixError> {
        let n: usize = parts.iter().map(|p| p.n).sum();
        if n == 0 {
            return Err(MatrixError::Malformed("empty direct sum".into()));
        }
        let mut out = CMatrix::zeros(n);
        let mut off = 0;
        for p in parts {
            for i in 0..p.n {
                for j in 0..p.n {
                    out[(off + i, off + j)] = p[(i, j)];
                }
            }
            off += p.n;
        }
        Ok(out)
    }

    fn check_dim(&self, other: &CMatrix) -> Result<(), MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on dimension mismatch; use [`CMatrix::mul`] for a checked product.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix::mul(self, rhs).expect("dimension mismatch in matrix product")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn adjoint_of_shift() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let b = CMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(a.adjoint(), b);
        assert_eq!(CMatrix::identity(3).adjoint(), CMatrix::identity(3));
    }

    #[test]
    fn square_of_upper_triangular() {
        let a = CMatrix::from_real_rows(&[&[2.0, 3.0], &[0.0, 5.0]]).unwrap();
        let expected = CMatrix::from_real_rows(&[&[4.0, 21.0], &[0.0, 25.0]]).unwrap();
        assert_eq!(&a * &a, expected);
    }

    #[test]
    fn nilpotent_square_is_zero() {
        let j = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((&j * &j).is_exact_zero());
    }

    #[test]
    fn mismatched_product_is_error() {
        let err = CMatrix::identity(2).mul(&CMatrix::identity(3)).unwrap_err();
        assert_eq!(err, MatrixError::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn svalues_known() {
        let a = CMatrix::from_real_rows(&[&[0.0, 0.5], &[1.0, 0.0]]).unwrap();
        let sv = a.svalues().unwrap();
        assert!((sv.values[0] - 1.0).abs() < 1e-12);
        assert!((sv.values[1] - 0.5).abs() < 1e-12);
        let z = CMatrix::zeros(2).svalues().unwrap();
        assert_eq!(z.values, vec![0.0, 0.0]);
    }

    #[test]
    fn ranks_of_nilpotent_powers() {
        let tol = Tolerance::default();
        let j3 = CMatrix::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]])
            .unwrap();
        assert_eq!(CMatrix::zeros(3).rank(&tol).unwrap(), 0);
        assert_eq!(j3.rank(&tol).unwrap(), 2);
        assert_eq!((&j3 * &j3).rank(&tol).unwrap(), 1);
    }

    #[test]
    fn approx_eq_behaviour() {
        let tol = Tolerance::default();
        let i = CMatrix::identity(2);
        let mut p = i.clone();
        p[(0, 1)] = c(1e-12, 0.0);
        assert!(i.approx_eq(&p, &tol).unwrap());
        let j = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(!j.approx_eq(&j.adjoint(), &tol).unwrap());
    }

    #[test]
    fn determinant_of_triangular() {
        let a = CMatrix::from_real_rows(&[&[2.0, 3.0], &[0.0, 5.0]]).unwrap();
        assert!((a.determinant() - c(10.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn json_rejects_bad_shapes() {
        assert!(serde_json::from_str::<CMatrix>(r#"{"n":2,"entries":[[1,0],[0,0],[0,0]]}"#).is_err());
        assert!(serde_json::from_str::<CMatrix>(r#"{"n":0,"entries":[]}"#).is_err());
        assert!(serde_json::from_str::<CMatrix>(r#"{"n":1,"entries":[[1,0]],"x":1}"#).is_err());
        let m: CMatrix = serde_json::from_str(r#"{"n":1,"entries":[[1.5,-2]]}"#).unwrap();
        assert_eq!(m[(0, 0)], c(1.5, -2.0));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-9, 1e-9, 1e-10).is_ok());
        assert!(Tolerance::new(0.0, 1e-9, 1e-10).is_err());
        assert!(Tolerance::new(1e-9, f64::NAN, 1e-10).is_err());
    }

    #[test]
    fn direct_sum_and_block() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = CMatrix::diag(&[c(0.0, 1.0)]);
        let s = CMatrix::direct_sum(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.block(0, 2).unwrap(), a);
        assert_eq!(s.block(2, 1).unwrap(), b);
        assert_eq!(s[(0, 2)], c(0.0, 0.0));
    }
}
