//! Bounded brute-force search for `W* = X W Y` and for principal-ideal
//! membership of the generators.
//!
//! Everything here is evidence at the chosen bounds. A solution is a proof
//! that it exists; absence of a solution proves nothing on its own.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::matrix::{CMatrix, MatrixError, Tolerance};
use crate::words::{enumerate, EnumerationCaps, Fingerprint, SemigroupTable, Word, WordError};

/// A factor in `X W Y`: either the empty product or a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Factor {
    Identity,
    Word(Word),
}

impl Factor {
    pub fn len(&self) -> usize {
        match self {
            Factor::Identity => 0,
            Factor::Word(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Factor::Identity)
    }

    pub fn eval(&self, t: &CMatrix) -> CMatrix {
        match self {
            Factor::Identity => CMatrix::identity(t.n()),
            Factor::Word(w) => w.eval(t),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Identity => f.write_str("I"),
            Factor::Word(w) => write!(f, "{w}"),
        }
    }
}

impl FromStr for Factor {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "I" {
            Ok(Factor::Identity)
        } else {
            Ok(Factor::Word(s.parse()?))
        }
    }
}

impl TryFrom<String> for Factor {
    type Error = WordError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Factor> for String {
    fn from(f: Factor) -> String {
        f.to_string()
    }
}

/// `X M Y` matches a target, with the observed max-entry residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub x: Factor,
    pub y: Factor,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearSolution {
    pub w: Word,
    pub x: Factor,
    pub y: Factor,
    pub residual: f64,
}

/// Search limits. Defaults are the standard bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleBounds {
    /// Longest word `W` examined.
    pub w_max: usize,
    /// Longest factor word `X`, `Y` in the table.
    pub factor_max_len: usize,
    pub element_cap: usize,
    pub norm_cap: f64,
    pub parallel: bool,
    /// Stop scanning after the first failing word.
    pub stop_at_first_failure: bool,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            w_max: 4,
            factor_max_len: 8,
            element_cap: 100_000,
            norm_cap: 1e12,
            parallel: true,
            stop_at_first_failure: false,
        }
    }
}

impl OracleBounds {
    pub fn caps(&self) -> EnumerationCaps {
        EnumerationCaps {
            element_cap: self.element_cap,
            norm_cap: self.norm_cap,
            parallel: self.parallel,
        }
    }

    pub fn table(&self, t: &CMatrix, tol: &Tolerance) -> SemigroupTable {
        enumerate(t, self.factor_max_len.max(self.w_max), &self.caps(), tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Si,
    Simplicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordStatus {
    Solved,
    Unsolved,
}

/// Per-word result. In SI mode `x, y` solve `W* = X W Y`. In simplicity
/// mode they give `T = X W Y` and `adjoint` gives `T* = X W Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordOutcome {
    pub word: Word,
    pub status: WordStatus,
    pub x: Option<Factor>,
    pub y: Option<Factor>,
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjoint: Option<Factorization>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum Overall {
    #[serde(rename = "ALL-SOLVED")]
    AllSolved,
    #[serde(rename = "FAILURE-WITNESS")]
    FailureWitness { word: Word },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub mode: ScanMode,
    pub bounds: OracleBounds,
    pub outcomes: Vec<WordOutcome>,
    pub overall: Overall,
    pub table_truncated: bool,
    pub table_closed: bool,
}

impl OracleReport {
    pub fn all_solved(&self) -> bool {
        self.overall == Overall::AllSolved
    }

    pub fn failure_word(&self) -> Option<&Word> {
        match &self.overall {
            Overall::FailureWitness { word } => Some(word),
            Overall::AllSolved => None,
        }
    }

    /// Every solved outcome re-evaluated from its words. Returns the
    /// largest residual observed, or `None` if some record is inconsistent
    /// (missing factors or a residual above `max_residual`).
    pub fn reverify(&self, t: &CMatrix, max_residual: f64) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for o in &self.outcomes {
            if o.status != WordStatus::Solved {
                continue;
            }
            let m = o.word.eval(t);
            let (x, y) = (o.x.as_ref()?, o.y.as_ref()?);
            let target = match self.mode {
                ScanMode::Si => m.adjoint(),
                ScanMode::Simplicity => t.clone(),
            };
            worst = worst.max(residual(&m, x, y, &target, t).ok()?);
            if self.mode == ScanMode::Simplicity {
                let a = o.adjoint.as_ref()?;
                worst = worst.max(residual(&m, &a.x, &a.y, &t.adjoint(), t).ok()?);
            }
        }
        (worst <= max_residual).then_some(worst)
    }

    /// All solutions in SI mode, as standalone records.
    pub fn solutions(&self) -> Vec<BilinearSolution> {
        if self.mode != ScanMode::Si {
            return Vec::new();
        }
        self.outcomes
            .iter()
            .filter_map(|o| match (&o.status, &o.x, &o.y, o.residual) {
                (WordStatus::Solved, Some(x), Some(y), Some(r)) => Some(BilinearSolution {
                    w: o.word.clone(),
                    x: x.clone(),
                    y: y.clone(),
                    residual: r,
                }),
                _ => None,
            })
            .collect()
    }
}

fn residual(m: &CMatrix, x: &Factor, y: &Factor, target: &CMatrix, t: &CMatrix) -> Result<f64, MatrixError> {
    let p = x.eval(t).mul(m)?.mul(&y.eval(t))?;
    p.max_abs_diff(target)
}

/// Candidate factors `I, table...` grouped by word length.
struct Pool<'a> {
    factors: Vec<(Factor, &'a CMatrix)>,
    /// `by_len[k]` is the index range of factors of length `k`.
    by_len: Vec<std::ops::Range<usize>>,
}

impl<'a> Pool<'a> {
    fn new(table: &'a SemigroupTable, identity: &'a CMatrix) -> Pool<'a> {
        let mut factors = vec![(Factor::Identity, identity)];
        factors.extend(table.entries.iter().map(|e| (Factor::Word(e.witness.clone()), &e.matrix)));
        let max_len = factors.iter().map(|f| f.0.len()).max().unwrap_or(0);
        // Table entries are in shortlex order, so each length is contiguous.
        let mut by_len = Vec::with_capacity(max_len + 1);
        let mut start = 0;
        for k in 0..=max_len {
            let end = start + factors[start..].iter().take_while(|f| f.0.len() == k).count();
            by_len.push(start..end);
            start = end;
        }
        Pool { factors, by_len }
    }
}

/// Entry visiting order: largest target entries first, so mismatches are
/// usually detected on the first comparison.
fn probe_order(target: &CMatrix) -> Vec<(usize, usize)> {
    let n = target.n();
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    cells.sort_by(|&a, &b| target[b].norm().total_cmp(&target[a].norm()));
    cells
}

/// First `(X, Y)` in the pool, ordered by `|X| + |Y|` then `X` then `Y`
/// shortlex, with `X m Y` approximately equal to `target`.
pub fn find_factorization(
    m: &CMatrix,
    target: &CMatrix,
    table: &SemigroupTable,
    tol: &Tolerance,
) -> Option<Factorization> {
    let n = m.n();
    let identity = CMatrix::identity(n);
    let pool = Pool::new(table, &identity);
    let xm: Vec<CMatrix> = pool.factors.iter().map(|(_, x)| *x * m).collect();
    let xm_norm: Vec<f64> = xm.iter().map(|p| p.frobenius_norm()).collect();
    let y_norm: Vec<f64> = pool.factors.iter().map(|(_, y)| y.frobenius_norm()).collect();
    let target_norm = target.frobenius_norm();
    let order = probe_order(target);
    let max_len = pool.by_len.len() - 1;

    for total in 0..=2 * max_len {
        for lx in total.saturating_sub(max_len)..=total.min(max_len) {
            let ly = total - lx;
            for xi in pool.by_len[lx].clone() {
                let a = &xm[xi];
                // |X m Y|_F <= |X m|_F |Y|_F bounds the approx_eq threshold.
                for yi in pool.by_len[ly].clone() {
                    let y = pool.factors[yi].1;
                    let thr = tol.eps_abs + tol.eps_rel * target_norm.max(xm_norm[xi] * y_norm[yi]);
                    let plausible = order.iter().all(|&(i, j)| {
                        let mut s = num_complex::Complex64::new(0.0, 0.0);
                        for k in 0..n {
                            s += a[(i, k)] * y[(k, j)];
                        }
                        (s - target[(i, j)]).norm() <= thr
                    });
                    if !plausible {
                        continue;
                    }
                    let p = a * y;
                    if p.approx_eq(target, tol).unwrap_or(false) {
                        return Some(Factorization {
                            x: pool.factors[xi].0.clone(),
                            y: pool.factors[yi].0.clone(),
                            residual: p.max_abs_diff(target).unwrap_or(f64::INFINITY),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Solve `eval(w)* = X eval(w) Y` over `table ∪ {I}`.
pub fn solve_bilinear(t: &CMatrix, w: &Word, table: &SemigroupTable, tol: &Tolerance) -> Option<BilinearSolution> {
    let m = w.eval(t);
    find_factorization(&m, &m.adjoint(), table, tol).map(|f| BilinearSolution {
        w: w.clone(),
        x: f.x,
        y: f.y,
        residual: f.residual,
    })
}

/// Table elements whose minimal witness has length at most `w_max`; one
/// representative per element.
fn scan_words(table: &SemigroupTable, w_max: usize) -> Vec<(Word, CMatrix)> {
    table
        .entries
        .iter()
        .filter(|e| e.witness.len() <= w_max)
        .map(|e| (e.witness.clone(), e.matrix.clone()))
        .collect()
}

fn run_scan(
    words: &[(Word, CMatrix)],
    bounds: &OracleBounds,
    f: impl Fn(&Word, &CMatrix) -> WordOutcome + Sync,
) -> Vec<WordOutcome> {
    if !bounds.stop_at_first_failure {
        return if bounds.parallel {
            words.par_iter().map(|(w, m)| f(w, m)).collect()
        } else {
            words.iter().map(|(w, m)| f(w, m)).collect()
        };
    }
    let chunk = if bounds.parallel { rayon::current_num_threads().max(1) } else { 1 };
    let mut out = Vec::new();
    for group in words.chunks(chunk) {
        let part: Vec<WordOutcome> = if bounds.parallel {
            group.par_iter().map(|(w, m)| f(w, m)).collect()
        } else {
            group.iter().map(|(w, m)| f(w, m)).collect()
        };
        if let Some(k) = part.iter().position(|o| o.status == WordStatus::Unsolved) {
            out.extend(part.into_iter().take(k + 1));
            return out;
        }
        out.extend(part);
    }
    out
}

fn overall_of(outcomes: &[WordOutcome]) -> Overall {
    outcomes
        .iter()
        .find(|o| o.status == WordStatus::Unsolved)
        .map(|o| Overall::FailureWitness { word: o.word.clone() })
        .unwrap_or(Overall::AllSolved)
}

/// Runs [`solve_bilinear`] for every element with a witness of length at
/// most `bounds.w_max`.
pub fn si_scan(t: &CMatrix, bounds: &OracleBounds, table: &SemigroupTable, tol: &Tolerance) -> OracleReport {
    debug_assert_eq!(t.n(), table.generator.n());
    let words = scan_words(table, bounds.w_max);
    let outcomes = run_scan(&words, bounds, |w, m| match find_factorization(m, &m.adjoint(), table, tol) {
        Some(f) => WordOutcome {
            word: w.clone(),
            status: WordStatus::Solved,
            x: Some(f.x),
            y: Some(f.y),
            residual: Some(f.residual),
            adjoint: None,
        },
        None => WordOutcome {
            word: w.clone(),
            status: WordStatus::Unsolved,
            x: None,
            y: None,
            residual: None,
            adjoint: None,
        },
    });
    OracleReport {
        mode: ScanMode::Si,
        bounds: *bounds,
        overall: overall_of(&outcomes),
        outcomes,
        table_truncated: table.truncated,
        table_closed: table.closed,
    }
}

/// For every word `W`, checks that both `T` and `T*` lie in the bounded
/// principal ideal `(W)`.
pub fn simplicity_scan(t: &CMatrix, bounds: &OracleBounds, table: &SemigroupTable, tol: &Tolerance) -> OracleReport {
    let words = scan_words(table, bounds.w_max);
    let ts = t.adjoint();
    let outcomes = run_scan(&words, bounds, |w, m| {
        let direct = find_factorization(m, t, table, tol);
        let adjoint = direct.as_ref().and_then(|_| find_factorization(m, &ts, table, tol));
        match (direct, adjoint) {
            (Some(d), Some(a)) => WordOutcome {
                word: w.clone(),
                status: WordStatus::Solved,
                x: Some(d.x),
                y: Some(d.y),
                residual: Some(d.residual),
                adjoint: Some(a),
            },
            _ => WordOutcome {
                word: w.clone(),
                status: WordStatus::Unsolved,
                x: None,
                y: None,
                residual: None,
                adjoint: None,
            },
        }
    });
    OracleReport {
        mode: ScanMode::Simplicity,
        bounds: *bounds,
        overall: overall_of(&outcomes),
        outcomes,
        table_truncated: table.truncated,
        table_closed: table.closed,
    }
}

/// Every product `X eval(w) Y` with `X, Y` in `table ∪ {I}`.
pub fn ideal_elements(t: &CMatrix, w: &Word, table: &SemigroupTable) -> Vec<CMatrix> {
    let m = w.eval(t);
    let identity = CMatrix::identity(t.n());
    let pool = Pool::new(table, &identity);
    let mut out = Vec::with_capacity(pool.factors.len() * pool.factors.len());
    for (_, x) in &pool.factors {
        let xm = *x * &m;
        for (_, y) in &pool.factors {
            out.push(&xm * *y);
        }
    }
    out
}

/// Fingerprints of the bounded principal ideal `(w)`.
pub fn ideal_saturate(t: &CMatrix, w: &Word, table: &SemigroupTable) -> HashSet<Fingerprint> {
    ideal_elements(t, w, table).iter().map(Fingerprint::of).collect()
}

/// Pairs `(element witness, inverse witness)` when the table shows the
/// semigroup is a group: the identity is stored and every stored element
/// has a stored two-sided inverse.
pub fn group_inverse_witnesses(table: &SemigroupTable, tol: &Tolerance) -> Option<Vec<(Word, Word)>> {
    let n = table.generator.n();
    let identity = CMatrix::identity(n);
    table.find(&identity, tol)?;
    let mut pairs = Vec::with_capacity(table.len());
    for e in &table.entries {
        let inv = table.entries.iter().find(|f| {
            (&e.matrix * &f.matrix).approx_eq(&identity, tol).unwrap_or(false)
                && (&f.matrix * &e.matrix).approx_eq(&identity, tol).unwrap_or(false)
        })?;
        pairs.push((e.witness.clone(), inv.witness.clone()));
    }
    Some(pairs)
}

pub fn group_detect(table: &SemigroupTable, tol: &Tolerance) -> bool {
    group_inverse_witnesses(table, tol).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_jordan, gallery_entry};
    use num_complex::Complex64;

    fn bounds() -> OracleBounds {
        OracleBounds::default()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn factor_round_trip() {
        for s in ["I", "g", "gg*g"] {
            assert_eq!(s.parse::<Factor>().unwrap().to_string(), s);
        }
        assert!("h".parse::<Factor>().is_err());
    }

    #[test]
    fn nilpotent_generator_solution() {
        let j = build_jordan(&"0:2".parse().unwrap());
        let table = bounds().table(&j, &tol());
        let s = solve_bilinear(&j, &Word::g(), &table, &tol()).unwrap();
        assert_eq!(s.x.to_string(), "g*");
        assert_eq!(s.y.to_string(), "g*");
    }

    #[test]
    fn selfadjoint_generator_identity_solution() {
        let t = CMatrix::diag(&[Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0)]);
        let table = bounds().table(&t, &tol());
        let s = solve_bilinear(&t, &Word::g(), &table, &tol()).unwrap();
        assert_eq!((s.x, s.y), (Factor::Identity, Factor::Identity));
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn e1_square_unsolvable() {
        let t = gallery_entry("E1").unwrap().matrix;
        let table = bounds().table(&t, &tol());
        assert!(solve_bilinear(&t, &"gg".parse().unwrap(), &table, &tol()).is_none());
        let r = si_scan(&t, &bounds(), &table, &tol());
        assert_eq!(r.failure_word().map(|w| w.to_string()), Some("gg".to_string()));
    }

    #[test]
    fn group_detection() {
        let g = gallery_entry("group-2x2").unwrap().matrix;
        let table = bounds().table(&g, &tol());
        let pairs = group_inverse_witnesses(&table, &tol()).unwrap();
        assert_eq!(pairs.len(), table.len());
        let j = build_jordan(&"0:2".parse().unwrap());
        assert!(!group_detect(&bounds().table(&j, &tol()), &tol()));
        let d = CMatrix::diag(&[Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)]);
        assert!(group_detect(&bounds().table(&d, &tol()), &tol()));
    }

    #[test]
    fn ideal_of_zero() {
        let j = build_jordan(&"0:2".parse().unwrap());
        let table = bounds().table(&j, &tol());
        let ideal = ideal_saturate(&j, &"gg".parse().unwrap(), &table);
        assert_eq!(ideal.len(), 1);
        assert!(ideal.contains(&Fingerprint::of(&CMatrix::zeros(2))));
    }

    #[test]
    fn unit_ideal_is_whole_group() {
        let d = CMatrix::diag(&[Complex64::new(0.0, 1.0)]);
        let table = bounds().table(&d, &tol());
        for w in ["g", "gg", "g*g"] {
            assert_eq!(ideal_saturate(&d, &w.parse().unwrap(), &table).len(), 4);
        }
    }

    #[test]
    fn report_json_round_trip() {
        let g = gallery_entry("group-2x2").unwrap().matrix;
        let table = bounds().table(&g, &tol());
        let r = si_scan(&g, &bounds(), &table, &tol());
        let s = serde_json::to_string(&r).unwrap();
        let back: OracleReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.outcomes, r.outcomes);
        assert_eq!(back.overall, r.overall);
    }
}
