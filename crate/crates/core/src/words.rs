//! Words over `{T, T*}` and bounded enumeration of the semigroup they
//! generate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::{build_const_shift_w, BuildError};
use crate::matrix::{CMatrix, MatrixError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("words must be nonempty")]
    Empty,
    #[error("bad word {0:?}: expected letters g and g*")]
    BadLetter(String),
}

/// `G` stands for the generator, `GStar` for its adjoint. `G < GStar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    G,
    GStar,
}

impl Letter {
    pub fn flip(self) -> Letter {
        match self {
            Letter::G => Letter::GStar,
            Letter::GStar => Letter::G,
        }
    }
}

/// Nonempty word, ordered shortlex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Result<Word, WordError> {
        if letters.is_empty() {
            return Err(WordError::Empty);
        }
        Ok(Word(letters))
    }

    pub fn g() -> Word {
        Word(vec![Letter::G])
    }

    pub fn g_star() -> Word {
        Word(vec![Letter::GStar])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Reverse and flip each letter; `eval(star(w)) == adjoint(eval(w))`.
    pub fn star(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.flip()).collect())
    }

    pub fn push(&self, l: Letter) -> Word {
        let mut v = self.0.clone();
        v.push(l);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn g_count(&self) -> usize {
        self.0.iter().filter(|&&l| l == Letter::G).count()
    }

    pub fn eval(&self, t: &CMatrix) -> CMatrix {
        let ts = t.adjoint();
        self.eval_with(t, &ts)
    }

    /// Evaluate with a precomputed adjoint.
    pub fn eval_with(&self, t: &CMatrix, ts: &CMatrix) -> CMatrix {
        let pick = |l: Letter| if l == Letter::G { t } else { ts };
        let mut acc = pick(self.0[0]).clone();
        for &l in &self.0[1..] {
            acc = &acc * pick(l);
        }
        acc
    }

    /// All words of exactly length `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> Vec<Word> {
        (0..1usize << len)
            .map(|bits| {
                Word(
                    (0..len)
                        .map(|k| {
                            if bits >> (len - 1 - k) & 1 == 0 {
                                Letter::G
                            } else {
                                Letter::GStar
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// Every word of length `1..=max_len` in shortlex order.
    pub fn all_up_to(max_len: usize) -> Vec<Word> {
        (1..=max_len).flat_map(Word::all_of_length).collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            f.write_str(match l {
                Letter::G => "g",
                Letter::GStar => "g*",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut letters = Vec::new();
        let mut chars = s.trim().chars().peekable();
        while let Some(ch) = chars.next() {
            if ch != 'g' {
                return Err(WordError::BadLetter(s.to_string()));
            }
            if chars.peek() == Some(&'*') {
                chars.next();
                letters.push(Letter::GStar);
            } else {
                letters.push(Letter::G);
            }
        }
        Word::new(letters)
    }
}

impl TryFrom<String> for Word {
    type Error = WordError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

/// Grid spacing for fingerprints, relative to the power-of-two scale.
pub const FINGERPRINT_GRID: f64 = 1e-6;

/// Offset (in log2 units) of the scale boundaries. Keeping them away from
/// exact powers of two keeps matrices with entries of modulus 1, 2, 4, ...
/// away from a scale jump.
const SCALE_OFFSET: f64 = 0.3;

/// Quantized matrix used as a hash key. Entries are divided by a power of
/// two chosen from the largest entry modulus, then rounded to
/// [`FINGERPRINT_GRID`]. The exponent is part of the key, so scalar
/// multiples such as `2I` and `4I` stay distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub n: usize,
    pub exponent: i32,
    pub cells: Vec<i64>,
}

impl Fingerprint {
    pub fn of(m: &CMatrix) -> Fingerprint {
        let max = m.max_abs();
        let exponent = if max > 1.0 {
            (max.log2() - SCALE_OFFSET).ceil().max(0.0) as i32
        } else {
            0
        };
        let scale = 2f64.powi(-exponent) / FINGERPRINT_GRID;
        let mut cells = Vec::with_capacity(2 * m.n() * m.n());
        for z in m.entries() {
            cells.push((z.re * scale).round() as i64);
            cells.push((z.im * scale).round() as i64);
        }
        Fingerprint {
            n: m.n(),
            exponent,
            cells,
        }
    }

    /// 64-bit FNV-1a digest, printed as 16 hex digits.
    pub fn hex(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(&(self.n as u64).to_le_bytes());
        feed(&self.exponent.to_le_bytes());
        for c in &self.cells {
            feed(&c.to_le_bytes());
        }
        format!("{h:016x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationCaps {
    pub element_cap: usize,
    /// Candidates whose largest entry modulus exceeds this are dropped.
    pub norm_cap: f64,
    pub parallel: bool,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps {
            element_cap: 100_000,
            norm_cap: 1e12,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TableEntry {
    pub matrix: CMatrix,
    pub witness: Word,
    pub fingerprint: Fingerprint,
}

/// Deduplicated elements of `S(T, T*)` with shortlex-minimal witnesses.
///
/// Entries are stored in witness order, so index order is shortlex order.
#[derive(Debug, Clone)]
pub struct SemigroupTable {
    pub generator: CMatrix,
    pub max_len: usize,
    pub entries: Vec<TableEntry>,
    index: HashMap<Fingerprint, Vec<usize>>,
    /// The element cap or norm cap stopped growth.
    pub truncated: bool,
    /// One further level of products added nothing new.
    pub closed: bool,
    /// Fingerprint hits that failed the approximate-equality audit.
    pub collisions: usize,
}

impl SemigroupTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of a stored element approximately equal to `m`.
    pub fn find(&self, m: &CMatrix, tol: &Tolerance) -> Option<usize> {
        let fp = Fingerprint::of(m);
        self.index.get(&fp).and_then(|ids| {
            ids.iter()
                .copied()
                .find(|&i| self.entries[i].matrix.approx_eq(m, tol).unwrap_or(false))
        })
    }

    pub fn contains_fingerprint(&self, fp: &Fingerprint) -> bool {
        self.index.contains_key(fp)
    }

    pub fn by_witness(&self, w: &Word) -> Option<&TableEntry> {
        self.entries.iter().find(|e| &e.witness == w)
    }

    /// Dump lines `len=<k> word=<w> norm=<op norm> fp=<hex>`.
    pub fn dump(&self) -> Result<String, MatrixError> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "len={} word={} norm={:.12e} fp={}\n",
                e.witness.len(),
                e.witness,
                e.matrix.op_norm()?,
                e.fingerprint.hex()
            ));
        }
        Ok(out)
    }

    fn contains(&self, m: &CMatrix, fp: &Fingerprint, tol: &Tolerance) -> bool {
        self.index.get(fp).is_some_and(|ids| {
            ids.iter()
                .any(|&i| self.entries[i].matrix.approx_eq(m, tol).unwrap_or(false))
        })
    }

    /// Appends a new element; the caller has checked it is absent.
    fn insert(&mut self, matrix: CMatrix, witness: Word, fingerprint: Fingerprint) {
        let id = self.entries.len();
        let ids = self.index.entry(fingerprint.clone()).or_default();
        if !ids.is_empty() {
            self.collisions += 1;
        }
        ids.push(id);
        self.entries.push(TableEntry {
            matrix,
            witness,
            fingerprint,
        });
    }
}

struct Candidate {
    witness: Word,
    matrix: CMatrix,
    fingerprint: Option<Fingerprint>,
}

fn within_cap(m: &CMatrix, cap: f64) -> bool {
    m.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) && m.max_abs() <= cap
}

fn extend(frontier: &[(Word, CMatrix)], t: &CMatrix, ts: &CMatrix, caps: &EnumerationCaps) -> Vec<Candidate> {
    let make = |(w, m): &(Word, CMatrix), l: Letter| {
        let matrix = m * if l == Letter::G { t } else { ts };
        let fingerprint = within_cap(&matrix, caps.norm_cap).then(|| Fingerprint::of(&matrix));
        Candidate {
            witness: w.push(l),
            matrix,
            fingerprint,
        }
    };
    let pairs: Vec<(&(Word, CMatrix), Letter)> = frontier
        .iter()
        .flat_map(|f| [(f, Letter::G), (f, Letter::GStar)])
        .collect();
    if caps.parallel {
        pairs.par_iter().map(|&(f, l)| make(f, l)).collect()
    } else {
        pairs.iter().map(|&(f, l)| make(f, l)).collect()
    }
}

/// Breadth-first closure of `{T, T*}` under multiplication up to word
/// length `max_len`.
///
/// Level `k` extends the elements first reached at level `k - 1`, in
/// witness order, by `g` then `g*`. The minimal witness of any element has
/// a minimal-witness prefix, so first insertion yields the shortlex-minimal
/// witness. Products may be computed in parallel; insertion is serial and in
/// candidate order, so the table does not depend on scheduling.
pub fn enumerate(t: &CMatrix, max_len: usize, caps: &EnumerationCaps, tol: &Tolerance) -> SemigroupTable {
    let ts = t.adjoint();
    let mut table = SemigroupTable {
        generator: t.clone(),
        max_len,
        entries: Vec::new(),
        index: HashMap::new(),
        truncated: false,
        closed: false,
        collisions: 0,
    };
    let mut candidates = vec![
        Candidate {
            witness: Word::g(),
            fingerprint: within_cap(t, caps.norm_cap).then(|| Fingerprint::of(t)),
            matrix: t.clone(),
        },
        Candidate {
            witness: Word::g_star(),
            fingerprint: within_cap(&ts, caps.norm_cap).then(|| Fingerprint::of(&ts)),
            matrix: ts.clone(),
        },
    ];
    for level in 1..=max_len + 1 {
        let probing = level > max_len;
        let mut frontier = Vec::new();
        for c in std::mem::take(&mut candidates) {
            let Some(fp) = c.fingerprint else {
                if probing {
                    // Reachable beyond max_len and outside every stored element.
                    return table;
                }
                table.truncated = true;
                continue;
            };
            if table.contains(&c.matrix, &fp, tol) {
                continue;
            }
            if probing {
                return table;
            }
            if table.entries.len() >= caps.element_cap {
                table.truncated = true;
                return table;
            }
            table.insert(c.matrix.clone(), c.witness.clone(), fp);
            frontier.push((c.witness, c.matrix));
        }
        if frontier.is_empty() {
            break;
        }
        if !probing {
            candidates = extend(&frontier, t, &ts, caps);
        }
    }
    table.closed = !table.truncated;
    table
}

/// Distinct nonzero diagonal values of `w` evaluated at the constant shift
/// `W` with weight `1/conj(lambda)` on dimension `n`.
pub fn word_diag_values(lambda: Complex64, n: usize, w: &Word, tol: &Tolerance) -> Result<Vec<Complex64>, BuildError> {
    let shift = build_const_shift_w(lambda, n)?;
    let m = w.eval(&shift);
    let mut out: Vec<Complex64> = Vec::new();
    for i in 0..n {
        let d = m[(i, i)];
        if d.norm() > tol.eps_abs && !out.iter().any(|v| (v - d).norm() <= tol.eps_abs + tol.eps_rel * d.norm()) {
            out.push(d);
        }
    }
    Ok(out)
}
