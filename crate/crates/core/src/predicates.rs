//! Structural predicates on a single matrix.
//!
//! The analytic tests (partial isometry, nilpotency, ...) are tolerance
//! based. Jordan and shift recognition are exact parses: they read the
//! matrix as an input format, not as a measurement.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{CMatrix, MatrixError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecParseError {
    #[error("empty specification")]
    Empty,
    #[error("bad complex number {0:?}")]
    BadComplex(String),
    #[error("bad block {0:?}: expected lambda:size")]
    BadBlock(String),
    #[error("block size must be positive in {0:?}")]
    ZeroSize(String),
}

/// `A` is within tolerance of the zero matrix.
pub fn is_zero(a: &CMatrix, tol: &Tolerance) -> bool {
    a.max_abs() <= tol.eps_abs
}

pub fn is_selfadjoint(a: &CMatrix, tol: &Tolerance) -> bool {
    a.approx_eq(&a.adjoint(), tol).unwrap_or(false)
}

pub fn is_normal(a: &CMatrix, tol: &Tolerance) -> bool {
    let s = a.adjoint();
    (&s * a).approx_eq(&(a * &s), tol).unwrap_or(false)
}

pub fn is_unitary(a: &CMatrix, tol: &Tolerance) -> bool {
    (&a.adjoint() * a)
        .approx_eq(&CMatrix::identity(a.n()), tol)
        .unwrap_or(false)
}

/// `A A* A = A`.
pub fn is_partial_isometry(a: &CMatrix, tol: &Tolerance) -> bool {
    (&(a * &a.adjoint()) * a).approx_eq(a, tol).unwrap_or(false)
}

/// `P^2 = P` and `P* = P`.
pub fn is_projection(p: &CMatrix, tol: &Tolerance) -> bool {
    is_selfadjoint(p, tol) && (p * p).approx_eq(p, tol).unwrap_or(false)
}

/// Every singular value lies within `eps_abs` of 0 or 1.
pub fn svalues_in_zero_one(a: &CMatrix, tol: &Tolerance) -> Result<bool, MatrixError> {
    Ok(a.svalues()?
        .values
        .iter()
        .all(|&s| s <= tol.eps_abs || (s - 1.0).abs() <= tol.eps_abs))
}

/// `A^k` is a partial isometry for `k = 1..=n`.
pub fn is_power_partial_isometry(a: &CMatrix, tol: &Tolerance) -> bool {
    let mut p = a.clone();
    for k in 1..=a.n() {
        if !is_partial_isometry(&p, tol) {
            return false;
        }
        if k < a.n() {
            p = &p * a;
        }
    }
    true
}

/// `(A*A) A = A`.
pub fn is_quasi_isometry(a: &CMatrix, tol: &Tolerance) -> bool {
    (&(&a.adjoint() * a) * a).approx_eq(a, tol).unwrap_or(false)
}

/// Smallest `k <= n` with `A^k = 0`, or `None` when `A^n` is nonzero.
pub fn nilpotency_degree(a: &CMatrix, tol: &Tolerance) -> Option<usize> {
    let mut p = a.clone();
    for k in 1..=a.n() {
        if is_zero(&p, tol) {
            return Some(k);
        }
        p = &p * a;
    }
    None
}

/// `rank A == rank A^2`, i.e. `ker A == ker A^2`.
pub fn kernel_dichotomy(a: &CMatrix, tol: &Tolerance) -> Result<bool, MatrixError> {
    Ok(a.rank(tol)? == (a * a).rank(tol)?)
}

pub fn modulus_is_one(z: Complex64, tol: &Tolerance) -> bool {
    (z.norm() - 1.0).abs() <= tol.eps_abs
}

pub fn modulus_is_zero(z: Complex64, tol: &Tolerance) -> bool {
    z.norm() <= tol.eps_abs
}

/// One Jordan block `J_size(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub lambda: Complex64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanSpec {
    pub blocks: Vec<JordanBlock>,
}

impl JordanSpec {
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// A Jordan matrix is normal exactly when it is diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(|b| b.size == 1)
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i`, `-i` or polar `r@theta`.
pub fn parse_complex(s: &str) -> Result<Complex64, SpecParseError> {
    let bad = || SpecParseError::BadComplex(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((r, th)) = t.split_once('@') {
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let th: f64 = th.trim().parse().map_err(|_| bad())?;
        return finite(Complex64::from_polar(r, th)).ok_or_else(bad);
    }
    let imag_coeff = |u: &str| -> Result<f64, SpecParseError> {
        match u {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => u.parse().map_err(|_| bad()),
        }
    };
    let z = if let Some(body) = t.strip_suffix('i') {
        // Split at the last sign that is not a leading sign or an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                Complex64::new(re, imag_coeff(&body[k..])?)
            }
            None => Complex64::new(0.0, imag_coeff(body)?),
        }
    } else {
        Complex64::new(t.parse().map_err(|_| bad())?, 0.0)
    };
    finite(z).ok_or_else(bad)
}

fn finite(z: Complex64) -> Option<Complex64> {
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

/// Inverse of [`parse_complex`] for non-polar values.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

impl FromStr for JordanSpec {
    type Err = SpecParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Err(SpecParseError::Empty);
        }
        let blocks = s
            .split(',')
            .map(|part| {
                let (l, n) = part
                    .rsplit_once(':')
                    .ok_or_else(|| SpecParseError::BadBlock(part.to_string()))?;
                let size: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| SpecParseError::BadBlock(part.to_string()))?;
                if size == 0 {
                    return Err(SpecParseError::ZeroSize(part.to_string()));
                }
                Ok(JordanBlock {
                    lambda: parse_complex(l)?,
                    size,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JordanSpec { blocks })
    }
}

impl fmt::Display for JordanSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{}:{}", format_complex(b.lambda), b.size))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Exact parse of a block-diagonal Jordan matrix.
pub fn recognize_jordan(a: &CMatrix) -> Option<JordanSpec> {
    let n = a.n();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if j != i && j != i + 1 && a[(i, j)] != zero {
                return None;
            }
        }
    }
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < n {
        let lambda = a[(start, start)];
        let mut end = start + 1;
        while end < n {
            let sup = a[(end - 1, end)];
            if sup == zero {
                break;
            }
            if sup != one || a[(end, end)] != lambda {
                return None;
            }
            end += 1;
        }
        blocks.push(JordanBlock {
            lambda,
            size: end - start,
        });
        start = end;
    }
    Some(JordanSpec { blocks })
}

/// Weights of a lower weighted shift, `T e_j = alpha_j e_{j+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub weights: Vec<Complex64>,
}

/// Exact parse of subdiagonal-only structure.
pub fn recognize_shift(a: &CMatrix) -> Option<ShiftSpec> {
    let n = a.n();
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j + 1 && a[(i, j)] != zero {
                return None;
            }
        }
    }
    Some(ShiftSpec {
        weights: (0..n - 1).map(|j| a[(j + 1, j)]).collect(),
    })
}

/// Split of a partially isometric Jordan matrix into a diagonal unitary
/// part and a direct sum of nilpotent shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanPiSplit {
    pub unitary_lambdas: Vec<Complex64>,
    pub shift_sizes: Vec<usize>,
}

/// Index of the first block that is neither `1x1` with `|lambda|` in
/// `{0, 1}` nor nilpotent.
pub fn first_non_pi_block(spec: &JordanSpec, tol: &Tolerance) -> Option<usize> {
    spec.blocks.iter().position(|b| !block_is_pi(b, tol))
}

fn block_is_pi(b: &JordanBlock, tol: &Tolerance) -> bool {
    if b.size == 1 {
        modulus_is_zero(b.lambda, tol) || modulus_is_one(b.lambda, tol)
    } else {
        modulus_is_zero(b.lambda, tol)
    }
}

pub fn jordan_pi_decomposition(spec: &JordanSpec, tol: &Tolerance) -> Option<JordanPiSplit> {
    if first_non_pi_block(spec, tol).is_some() {
        return None;
    }
    let mut split = JordanPiSplit {
        unitary_lambdas: Vec::new(),
        shift_sizes: Vec::new(),
    };
    for b in &spec.blocks {
        if b.size == 1 && modulus_is_one(b.lambda, tol) {
            split.unitary_lambdas.push(b.lambda);
        } else {
            split.shift_sizes.push(b.size);
        }
    }
    Some(split)
}

/// Index of the first block that is not `1x1` with `|lambda|` in `{0, 1}`.
pub fn first_non_unitary_plus_zero_block(spec: &JordanSpec, tol: &Tolerance) -> Option<usize> {
    spec.blocks.iter().position(|b| {
        !(b.size == 1 && (modulus_is_zero(b.lambda, tol) || modulus_is_one(b.lambda, tol)))
    })
}

/// Sizes of the finest partition into contiguous diagonal blocks whose
/// off-diagonal coupling is exactly zero.
pub fn block_partition(a: &CMatrix) -> Vec<usize> {
    let n = a.n();
    let zero = Complex64::new(0.0, 0.0);
    let mut sizes = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        let split = k == n
            || (0..k).all(|i| (k..n).all(|j| a[(i, j)] == zero && a[(j, i)] == zero));
        if split {
            sizes.push(k - start);
            start = k;
        }
    }
    sizes
}
