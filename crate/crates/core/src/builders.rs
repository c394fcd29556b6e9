//! Constructors for the matrix families used throughout the crate and the
//! named gallery that drives the demo and the acceptance suite.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::Decision;
use crate::matrix::CMatrix;
use crate::predicates::JordanSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("lambda must be nonzero")]
    ZeroLambda,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("unknown gallery entry {0:?}")]
    UnknownEntry(String),
}

/// Block-diagonal Jordan matrix; superdiagonal ones inside each block.
pub fn build_jordan(spec: &JordanSpec) -> CMatrix {
    let n = spec.dimension();
    let mut m = CMatrix::zeros(n.max(1));
    let mut off = 0;
    for b in &spec.blocks {
        for k in 0..b.size {
            m[(off + k, off + k)] = b.lambda;
            if k + 1 < b.size {
                m[(off + k, off + k + 1)] = Complex64::new(1.0, 0.0);
            }
        }
        off += b.size;
    }
    m
}

/// Lower weighted shift of dimension `weights.len() + 1`.
pub fn build_shift(weights: &[Complex64]) -> CMatrix {
    let mut m = CMatrix::zeros(weights.len() + 1);
    for (j, &w) in weights.iter().enumerate() {
        m[(j + 1, j)] = w;
    }
    m
}

/// Constant-weight shift `W` with weight `1/conj(lambda)`, so that
/// `lambda (I + W*) = J_n(lambda)`.
pub fn build_const_shift_w(lambda: Complex64, n: usize) -> Result<CMatrix, BuildError> {
    if lambda.norm() == 0.0 {
        return Err(BuildError::ZeroLambda);
    }
    if n == 0 {
        return Err(BuildError::ZeroDimension);
    }
    let w = Complex64::new(1.0, 0.0) / lambda.conj();
    Ok(build_shift(&vec![w; n - 1]))
}

/// Entries uniform in the unit square `[-1, 1] + i[-1, 1]`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Unitary from Gram-Schmidt on the columns of a random matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let a = random_matrix(rng, n);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut degenerate = false;
        for j in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|i| a[(i, j)]).collect();
            for q in &cols {
                let dot: Complex64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        if !degenerate {
            return CMatrix::from_fn(n, |i, j| cols[j][i]);
        }
    }
}

/// Expected answer for one property of a gallery entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Expectation {
    Yes,
    No,
    Unspecified,
}

impl Expectation {
    pub fn matches(self, got: Decision) -> bool {
        match self {
            Expectation::Yes => got == Decision::Yes,
            Expectation::No => got == Decision::No,
            Expectation::Unspecified => true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub name: String,
    pub matrix: CMatrix,
    pub expected_si: Expectation,
    pub expected_simple: Expectation,
    pub note: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn jordan(s: &str) -> CMatrix {
    build_jordan(&s.parse().expect("static spec"))
}

fn real(rows: &[&[f64]]) -> CMatrix {
    CMatrix::from_real_rows(rows).expect("static matrix")
}

/// The curated gallery.
pub fn gallery() -> Vec<GalleryEntry> {
    use Expectation::*;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let entry = |name: &str, matrix: CMatrix, si, simple, note: &str| GalleryEntry {
        name: name.to_string(),
        matrix,
        expected_si: si,
        expected_simple: simple,
        note: note.to_string(),
    };
    vec![
        entry(
            "E1",
            real(&[
                &[0.0, r, 0.0, r],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 0.0],
            ]),
            No,
            No,
            "nilpotent partial isometry of degree 3 with |T^2| < 1",
        ),
        entry("J3-shift", jordan("0:3"), Yes, No, "J_3(0): nilpotent power partial isometry"),
        entry("J2-0", jordan("0:2"), Yes, No, "J_2(0): degree-2 nilpotent partial isometry"),
        entry("J2-1", jordan("1:2"), No, No, "Jordan block with |lambda| = 1 and N = 2"),
        entry("J3-1", jordan("1:3"), No, No, "Jordan block with |lambda| = 1 and N = 3"),
        entry("J2-i", jordan("i:2"), No, No, "Jordan block with lambda = i and N = 2"),
        entry(
            "group-2x2",
            real(&[&[0.0, 0.5], &[2.0, 0.0]]),
            Yes,
            Yes,
            "invertible, not selfadjoint, not Jordan; S(A, A*) is a finite group",
        ),
        entry(
            "norm-one-not-pi",
            real(&[&[0.0, 0.5], &[1.0, 0.0]]),
            No,
            No,
            "|A| = 1 but A*A is not a projection",
        ),
        entry(
            "J3-plus-2I2",
            CMatrix::direct_sum(&[jordan("0:3"), CMatrix::diag(&[c(2.0, 0.0), c(2.0, 0.0)])])
                .expect("static sum"),
            No,
            No,
            "direct sum of two SI generators whose sum is not SI",
        ),
        entry(
            "nonneg-2x2",
            real(&[&[2.0, 3.0], &[0.0, 5.0]]),
            No,
            No,
            "all nonzero entries real and greater than 1",
        ),
        entry("diag-i", CMatrix::diag(&[c(0.0, 1.0)]), Yes, Yes, "1x1 unitary of order 4"),
        entry(
            "diag-unitary",
            CMatrix::diag(&[c(0.0, 1.0), Complex64::from_polar(1.0, 1.0)]),
            Yes,
            Yes,
            "diagonal unitary with an irrational rotation",
        ),
        entry(
            "selfadjoint-2I",
            CMatrix::diag(&[c(2.0, 0.0), c(2.0, 0.0)]),
            Yes,
            Unspecified,
            "selfadjoint generator",
        ),
        entry(
            "infinite-shift-trunc",
            build_shift(&[c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0)]),
            No,
            No,
            "4x4 truncation of the shift with weights (1/2, 1, 1, ...)",
        ),
    ]
}

pub fn gallery_entry(name: &str) -> Result<GalleryEntry, BuildError> {
    gallery()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| BuildError::UnknownEntry(name.to_string()))
}
