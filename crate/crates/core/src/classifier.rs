//! Rule-based decision procedure with re-checkable certificates.
//!
//! Rules run in a fixed order. Every rule that reaches a conclusion is
//! recorded in the trace; the first one decides. Disagreement between
//! concluding rules is reported as INCONCLUSIVE with oracle evidence rather
//! than resolved silently.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{CMatrix, MatrixError, Tolerance};
use crate::oracle::{group_inverse_witnesses, si_scan, simplicity_scan, OracleBounds, OracleReport};
use crate::predicates::{
    block_partition, first_non_pi_block, first_non_unitary_plus_zero_block, is_partial_isometry,
    is_power_partial_isometry, is_quasi_isometry, is_selfadjoint, jordan_pi_decomposition,
    nilpotency_degree, recognize_jordan, recognize_shift, JordanSpec,
};
use crate::words::{SemigroupTable, Word};

/// Largest residual accepted when re-verifying recorded oracle solutions.
pub const REVERIFY_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("unknown certificate tag {0:?}")]
    UnknownCertificateTag(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Decision {
    Yes,
    No,
    Inconclusive,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Decision::Yes => "YES",
            Decision::No => "NO",
            Decision::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Jordan block singled out by a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffendingBlock {
    pub index: usize,
    pub lambda: Complex64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum Certificate {
    SelfadjointGenerator {},
    PowerPartialIsometry {
        max_power_checked: usize,
    },
    /// For each stored element, a stored inverse.
    GroupSimple {
        inverse_witnesses: Vec<(Word, Word)>,
    },
    #[serde(rename = "JordanPI")]
    JordanPi {
        unitary_lambdas: Vec<Complex64>,
        shift_sizes: Vec<usize>,
    },
    #[serde(rename = "JordanNotPI")]
    JordanNotPi {
        offending_block: OffendingBlock,
    },
    KernelDichotomyFail {
        rank_a: usize,
        rank_a2: usize,
    },
    DetModulus {
        value: f64,
    },
    #[serde(rename = "NormOneNotPI")]
    NormOneNotPi {
        offending_s_value: f64,
    },
    NonnegEntries {
        min_nonzero_entry: f64,
    },
    NilpDeg3SmallSquare {
        norm_t2: f64,
    },
    UnitaryDirectSumZero {},
    DirectSumComponent {
        index: usize,
        inner_certificate: Box<Certificate>,
    },
    OracleEvidence {
        report: Box<OracleReport>,
    },
    /// `(T*T) T = T`.
    QuasiIsometry {},
    /// `rank T^2 < rank T`, so `T` is not in the ideal generated by `T^2`.
    RankDrop {
        rank_a: usize,
        rank_a2: usize,
    },
    JordanNotUnitaryPlusZero {
        offending_block: OffendingBlock,
    },
    /// Invertible nonselfadjoint generator: simple exactly when SI.
    InverseEquivalence {
        si_certificate: Box<Certificate>,
    },
}

pub const CERTIFICATE_TAGS: &[&str] = &[
    "SelfadjointGenerator",
    "PowerPartialIsometry",
    "GroupSimple",
    "JordanPI",
    "JordanNotPI",
    "KernelDichotomyFail",
    "DetModulus",
    "NormOneNotPI",
    "NonnegEntries",
    "NilpDeg3SmallSquare",
    "UnitaryDirectSumZero",
    "DirectSumComponent",
    "OracleEvidence",
    "QuasiIsometry",
    "RankDrop",
    "JordanNotUnitaryPlusZero",
    "InverseEquivalence",
];

/// What a valid certificate establishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    SiYes,
    SiNo,
    /// Simple, hence also SI.
    SimpleYes,
    SimpleNo,
    Evidence,
}

impl Certificate {
    pub fn tag(&self) -> &'static str {
        match self {
            Certificate::SelfadjointGenerator {} => "SelfadjointGenerator",
            Certificate::PowerPartialIsometry { .. } => "PowerPartialIsometry",
            Certificate::GroupSimple { .. } => "GroupSimple",
            Certificate::JordanPi { .. } => "JordanPI",
            Certificate::JordanNotPi { .. } => "JordanNotPI",
            Certificate::KernelDichotomyFail { .. } => "KernelDichotomyFail",
            Certificate::DetModulus { .. } => "DetModulus",
            Certificate::NormOneNotPi { .. } => "NormOneNotPI",
            Certificate::NonnegEntries { .. } => "NonnegEntries",
            Certificate::NilpDeg3SmallSquare { .. } => "NilpDeg3SmallSquare",
            Certificate::UnitaryDirectSumZero {} => "UnitaryDirectSumZero",
            Certificate::DirectSumComponent { .. } => "DirectSumComponent",
            Certificate::OracleEvidence { .. } => "OracleEvidence",
            Certificate::QuasiIsometry {} => "QuasiIsometry",
            Certificate::RankDrop { .. } => "RankDrop",
            Certificate::JordanNotUnitaryPlusZero { .. } => "JordanNotUnitaryPlusZero",
            Certificate::InverseEquivalence { .. } => "InverseEquivalence",
        }
    }

    pub fn claim(&self) -> Claim {
        use Certificate::*;
        match self {
            SelfadjointGenerator {} | PowerPartialIsometry { .. } | JordanPi { .. } => Claim::SiYes,
            GroupSimple { .. } | QuasiIsometry {} | UnitaryDirectSumZero {} | InverseEquivalence { .. } => {
                Claim::SimpleYes
            }
            JordanNotPi { .. }
            | KernelDichotomyFail { .. }
            | DetModulus { .. }
            | NormOneNotPi { .. }
            | NonnegEntries { .. }
            | NilpDeg3SmallSquare { .. }
            | DirectSumComponent { .. } => Claim::SiNo,
            RankDrop { .. } | JordanNotUnitaryPlusZero { .. } => Claim::SimpleNo,
            OracleEvidence { .. } => Claim::Evidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub si: Decision,
    pub simple: Decision,
    pub certificate: Certificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simple_certificate: Option<Certificate>,
    pub rule_trace: Vec<String>,
}

/// Quantities shared by the rules, computed once.
struct Facts {
    n: usize,
    selfadjoint: bool,
    pi: bool,
    ppi: bool,
    rank_a: usize,
    rank_a2: usize,
    nil_degree: Option<usize>,
    det_modulus: f64,
    svalues: Vec<f64>,
    jordan: Option<JordanSpec>,
    shift: bool,
    quasi: bool,
}

impl Facts {
    fn new(a: &CMatrix, tol: &Tolerance) -> Result<Facts, MatrixError> {
        let sq = a * a;
        let sv = a.svalues()?;
        Ok(Facts {
            n: a.n(),
            selfadjoint: is_selfadjoint(a, tol),
            pi: is_partial_isometry(a, tol),
            ppi: is_power_partial_isometry(a, tol),
            rank_a: a.rank(tol)?,
            rank_a2: sq.rank(tol)?,
            nil_degree: nilpotency_degree(a, tol),
            det_modulus: a.determinant().norm(),
            svalues: sv.values,
            jordan: recognize_jordan(a),
            shift: recognize_shift(a).is_some() || recognize_shift(&a.adjoint()).is_some(),
            quasi: is_quasi_isometry(a, tol),
        })
    }

    fn invertible(&self) -> bool {
        self.rank_a == self.n
    }

    fn op_norm(&self) -> f64 {
        self.svalues.first().copied().unwrap_or(0.0)
    }

    fn rank_fail(&self) -> Certificate {
        Certificate::KernelDichotomyFail {
            rank_a: self.rank_a,
            rank_a2: self.rank_a2,
        }
    }

    fn ppi_cert(&self) -> Certificate {
        Certificate::PowerPartialIsometry {
            max_power_checked: self.n,
        }
    }
}

struct Fired {
    rule: String,
    decision: Decision,
    certificate: Option<Certificate>,
}

fn fired(rule: &str, decision: Decision, certificate: Certificate) -> Fired {
    Fired {
        rule: rule.to_string(),
        decision,
        certificate: Some(certificate),
    }
}

fn marker(rule: &str) -> Fired {
    Fired {
        rule: rule.to_string(),
        decision: Decision::Inconclusive,
        certificate: None,
    }
}

fn offending(spec: &JordanSpec, index: usize) -> OffendingBlock {
    let b = spec.blocks[index];
    OffendingBlock {
        index,
        lambda: b.lambda,
        size: b.size,
    }
}

fn offending_s_value(svalues: &[f64], tol: &Tolerance) -> Option<f64> {
    svalues
        .iter()
        .copied()
        .find(|&s| s > tol.eps_abs && (s - 1.0).abs() > tol.eps_abs)
}

/// Minimum entry modulus when every nonzero entry is real and `> 1`, or
/// every nonzero entry is real and `< -1`.
fn entry_growth_minimum(a: &CMatrix) -> Option<f64> {
    let nz: Vec<Complex64> = a.entries().iter().copied().filter(|z| z.re != 0.0 || z.im != 0.0).collect();
    if nz.is_empty() || nz.iter().any(|z| z.im != 0.0) {
        return None;
    }
    let all_big = nz.iter().all(|z| z.re > 1.0);
    let all_neg = nz.iter().all(|z| z.re < -1.0);
    (all_big || all_neg).then(|| nz.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min))
}

/// Rules R0 through R12: cheap structural tests on a single matrix.
fn structural_rules(a: &CMatrix, f: &Facts, tol: &Tolerance) -> Result<Vec<Fired>, MatrixError> {
    use Decision::*;
    let mut out = Vec::new();
    let sa = f.selfadjoint;
    if sa {
        out.push(fired("R0", Yes, Certificate::SelfadjointGenerator {}));
    }
    if f.ppi {
        out.push(fired("R1", Yes, f.ppi_cert()));
    }
    if !sa && f.rank_a != f.rank_a2 && !f.pi {
        out.push(fired("R2", No, f.rank_fail()));
    }
    let nonzero_nilpotent = matches!(f.nil_degree, Some(d) if d >= 2);
    if !sa && nonzero_nilpotent && !f.pi {
        out.push(fired("R3", No, f.rank_fail()));
    }
    if f.nil_degree == Some(2) {
        out.push(if f.pi { fired("R4", Yes, f.ppi_cert()) } else { fired("R4", No, f.rank_fail()) });
    }
    if f.shift && !sa {
        out.push(if f.pi { fired("R5", Yes, f.ppi_cert()) } else { fired("R5", No, f.rank_fail()) });
    }
    if f.nil_degree == Some(3) && f.pi {
        let norm_t2 = (a * a).op_norm()?;
        if norm_t2 < 1.0 - tol.eps_abs {
            out.push(fired("R6", No, Certificate::NilpDeg3SmallSquare { norm_t2 }));
        }
    }
    if !sa && f.invertible() && (f.det_modulus - 1.0).abs() > tol.eps_abs {
        out.push(fired(
            "R7",
            No,
            Certificate::DetModulus {
                value: f.det_modulus,
            },
        ));
    }
    if let Some(spec) = &f.jordan {
        if !spec.is_diagonal() {
            out.push(match jordan_pi_decomposition(spec, tol) {
                Some(split) => fired(
                    "R8",
                    Yes,
                    Certificate::JordanPi {
                        unitary_lambdas: split.unitary_lambdas,
                        shift_sizes: split.shift_sizes,
                    },
                ),
                None => {
                    let k = first_non_pi_block(spec, tol).expect("split failed on some block");
                    fired(
                        "R8",
                        No,
                        Certificate::JordanNotPi {
                            offending_block: offending(spec, k),
                        },
                    )
                }
            });
        }
        if !sa && f.invertible() {
            out.push(match first_non_pi_block(spec, tol) {
                None => fired("R9", Yes, f.ppi_cert()),
                Some(k) => fired(
                    "R9",
                    No,
                    Certificate::JordanNotPi {
                        offending_block: offending(spec, k),
                    },
                ),
            });
        }
        if let [b] = spec.blocks.as_slice() {
            if b.size >= 2 {
                let m = b.lambda.norm();
                if m >= 1.0 {
                    out.push(fired(
                        "R10",
                        No,
                        Certificate::JordanNotPi {
                            offending_block: offending(spec, 0),
                        },
                    ));
                } else if m > 1.0 - tol.eps_abs {
                    out.push(marker("R10:boundary"));
                }
            }
        }
    }
    if !sa && (f.op_norm() - 1.0).abs() <= tol.eps_abs && !f.pi {
        if let Some(s) = offending_s_value(&f.svalues, tol) {
            out.push(fired("R11", No, Certificate::NormOneNotPi { offending_s_value: s }));
        }
    }
    if !sa {
        if let Some(min) = entry_growth_minimum(a) {
            out.push(fired("R12", No, Certificate::NonnegEntries { min_nonzero_entry: min }));
        }
    }
    Ok(out)
}

/// First concluding decision of a rule list, or `None` when nothing
/// concluded or concluding rules disagree.
fn first_conclusive(rules: &[Fired]) -> Option<(Decision, Certificate)> {
    let mut concl = rules.iter().filter(|r| r.decision != Decision::Inconclusive);
    let first = concl.next()?;
    if concl.any(|r| r.decision != first.decision) {
        return None;
    }
    Some((first.decision, first.certificate.clone().expect("concluding rule has certificate")))
}

fn has_conflict(rules: &[Fired]) -> bool {
    let mut concl = rules.iter().filter(|r| r.decision != Decision::Inconclusive);
    match concl.next() {
        Some(first) => concl.any(|r| r.decision != first.decision),
        None => false,
    }
}

struct SiOutcome {
    decision: Decision,
    certificate: Certificate,
    trace: Vec<String>,
    simple_yes: Option<Certificate>,
    table: Option<SemigroupTable>,
}

fn run_si(a: &CMatrix, f: &Facts, tol: &Tolerance, bounds: &OracleBounds) -> Result<SiOutcome, MatrixError> {
    let mut rules = structural_rules(a, f, tol)?;

    // R13: a summand that is not SI makes the sum not SI. The converse fails.
    let sizes = block_partition(a);
    if sizes.len() >= 2 {
        let mut start = 0;
        for (index, &size) in sizes.iter().enumerate() {
            let block = a.block(start, size)?;
            start += size;
            let bf = Facts::new(&block, tol)?;
            if let Some((Decision::No, inner)) = first_conclusive(&structural_rules(&block, &bf, tol)?) {
                rules.push(fired(
                    "R13",
                    Decision::No,
                    Certificate::DirectSumComponent {
                        index,
                        inner_certificate: Box::new(inner),
                    },
                ));
                break;
            }
        }
    }

    let mut table = None;
    let mut simple_yes = None;
    if f.invertible() {
        let t = bounds.table(a, tol);
        if let Some(inverse_witnesses) = group_inverse_witnesses(&t, tol) {
            let c = Certificate::GroupSimple { inverse_witnesses };
            simple_yes = Some(c.clone());
            rules.push(fired("R14", Decision::Yes, c));
        }
        table = Some(t);
    }
    if f.quasi {
        let c = Certificate::QuasiIsometry {};
        simple_yes.get_or_insert(c.clone());
        rules.push(fired("R15", Decision::Yes, c));
    }

    let mut trace: Vec<String> = rules.iter().map(|r| r.rule.clone()).collect();
    if let Some((decision, certificate)) = first_conclusive(&rules) {
        return Ok(SiOutcome {
            decision,
            certificate,
            trace,
            simple_yes: if decision == Decision::Yes { simple_yes } else { None },
            table,
        });
    }
    if has_conflict(&rules) {
        trace.push("conflict".into());
    }
    let t = table.unwrap_or_else(|| bounds.table(a, tol));
    let report = si_scan(a, bounds, &t, tol);
    trace.push("R16".into());
    Ok(SiOutcome {
        decision: Decision::Inconclusive,
        certificate: Certificate::OracleEvidence {
            report: Box::new(report),
        },
        trace,
        simple_yes: None,
        table: Some(t),
    })
}

fn facts(a: &CMatrix, tol: &Tolerance) -> Result<Facts, ClassifyError> {
    tol.validate()?;
    Ok(Facts::new(a, tol)?)
}

/// SI decision only. `simple` is YES when a group or quasi-isometry rule
/// fired and INCONCLUSIVE otherwise; no simplicity search is run.
pub fn classify_si(a: &CMatrix, tol: &Tolerance, bounds: &OracleBounds) -> Result<Verdict, ClassifyError> {
    let f = facts(a, tol)?;
    let si = run_si(a, &f, tol, bounds)?;
    Ok(Verdict {
        si: si.decision,
        simple: if si.simple_yes.is_some() { Decision::Yes } else { Decision::Inconclusive },
        certificate: si.certificate,
        simple_certificate: si.simple_yes,
        rule_trace: si.trace,
    })
}

/// Full classification: SI rules, then simplicity rules.
pub fn classify_simple(a: &CMatrix, tol: &Tolerance, bounds: &OracleBounds) -> Result<Verdict, ClassifyError> {
    use Decision::*;
    let f = facts(a, tol)?;
    let si = run_si(a, &f, tol, bounds)?;
    let mut rules = Vec::new();
    if f.rank_a2 < f.rank_a {
        rules.push(fired(
            "S1",
            No,
            Certificate::RankDrop {
                rank_a: f.rank_a,
                rank_a2: f.rank_a2,
            },
        ));
    }
    if let Some(c) = &si.simple_yes {
        rules.push(fired("S2", Yes, c.clone()));
    }
    if !f.selfadjoint {
        if let Some(spec) = &f.jordan {
            rules.push(match first_non_unitary_plus_zero_block(spec, tol) {
                None => fired("S3", Yes, Certificate::UnitaryDirectSumZero {}),
                Some(k) => fired(
                    "S3",
                    No,
                    Certificate::JordanNotUnitaryPlusZero {
                        offending_block: offending(spec, k),
                    },
                ),
            });
        }
        if f.invertible() && si.decision == Yes {
            rules.push(fired(
                "S4",
                Yes,
                Certificate::InverseEquivalence {
                    si_certificate: Box::new(si.certificate.clone()),
                },
            ));
        }
    }
    if si.decision == No {
        rules.push(fired("S5", No, si.certificate.clone()));
    }

    let mut trace = si.trace.clone();
    trace.extend(rules.iter().map(|r| r.rule.clone()));
    let (simple, simple_certificate) = match first_conclusive(&rules) {
        Some(d) => d,
        None => {
            if has_conflict(&rules) {
                trace.push("conflict".into());
            }
            let table = si.table.unwrap_or_else(|| bounds.table(a, tol));
            trace.push("S6".into());
            let report = simplicity_scan(a, bounds, &table, tol);
            (
                Inconclusive,
                Certificate::OracleEvidence {
                    report: Box::new(report),
                },
            )
        }
    };

    let mut verdict = Verdict {
        si: si.decision,
        simple,
        certificate: si.certificate,
        simple_certificate: Some(simple_certificate),
        rule_trace: trace,
    };
    // Simple semigroups are SI.
    if verdict.simple == Yes && verdict.si != Yes {
        if verdict.si == No {
            verdict.simple = Inconclusive;
            verdict.rule_trace.push("conflict".into());
        } else {
            verdict.si = Yes;
            verdict.certificate = verdict.simple_certificate.clone().expect("set above");
            verdict.rule_trace.push("simple-implies-si".into());
        }
    }
    Ok(verdict)
}

fn close(a: f64, b: f64, tol: &Tolerance) -> bool {
    (a - b).abs() <= tol.eps_abs + tol.eps_rel * a.abs().max(b.abs())
}

fn block_matches(spec: &JordanSpec, ob: &OffendingBlock, tol: &Tolerance) -> bool {
    spec.blocks
        .get(ob.index)
        .is_some_and(|b| b.size == ob.size && (b.lambda - ob.lambda).norm() <= tol.eps_abs)
}

/// Recomputes a certificate's hypotheses from `a`. `false` means the
/// certificate does not hold for this matrix.
pub fn validate_certificate(a: &CMatrix, c: &Certificate, tol: &Tolerance) -> Result<bool, ClassifyError> {
    use Certificate::*;
    tol.validate()?;
    let n = a.n();
    let sa = is_selfadjoint(a, tol);
    let invertible = || -> Result<bool, MatrixError> { Ok(a.rank(tol)? == n) };
    let ok = match c {
        SelfadjointGenerator {} => sa,
        PowerPartialIsometry { max_power_checked } => {
            *max_power_checked >= n && is_power_partial_isometry(a, tol)
        }
        GroupSimple { inverse_witnesses } => {
            let id = CMatrix::identity(n);
            let pair_ok = |(w, v): &(Word, Word)| {
                let (p, q) = (w.eval(a), v.eval(a));
                (&p * &q).approx_eq(&id, tol).unwrap_or(false) && (&q * &p).approx_eq(&id, tol).unwrap_or(false)
            };
            inverse_witnesses.iter().any(|(w, _)| *w == Word::g()) && inverse_witnesses.iter().all(pair_ok)
        }
        JordanPi {
            unitary_lambdas,
            shift_sizes,
        } => match recognize_jordan(a).and_then(|s| jordan_pi_decomposition(&s, tol)) {
            Some(split) => {
                split.shift_sizes == *shift_sizes
                    && split.unitary_lambdas.len() == unitary_lambdas.len()
                    && split
                        .unitary_lambdas
                        .iter()
                        .zip(unitary_lambdas)
                        .all(|(x, y)| (x - y).norm() <= tol.eps_abs)
            }
            None => false,
        },
        JordanNotPi { offending_block } => match recognize_jordan(a) {
            Some(spec) => {
                let hypothesis = !spec.is_diagonal() || (!sa && invertible()?);
                let b = spec.blocks.get(offending_block.index);
                hypothesis
                    && block_matches(&spec, offending_block, tol)
                    && b.is_some_and(|b| {
                        let single = JordanSpec { blocks: vec![*b] };
                        first_non_pi_block(&single, tol).is_some()
                    })
            }
            None => false,
        },
        KernelDichotomyFail { rank_a, rank_a2 } => {
            !sa && !is_partial_isometry(a, tol)
                && rank_a != rank_a2
                && a.rank(tol)? == *rank_a
                && (a * a).rank(tol)? == *rank_a2
        }
        DetModulus { value } => {
            let d = a.determinant().norm();
            !sa && invertible()? && close(d, *value, tol) && (d - 1.0).abs() > tol.eps_abs
        }
        NormOneNotPi { offending_s_value } => {
            let sv = a.svalues()?;
            let s = *offending_s_value;
            !sa && !is_partial_isometry(a, tol)
                && (sv.largest() - 1.0).abs() <= tol.eps_abs
                && s > tol.eps_abs
                && (s - 1.0).abs() > tol.eps_abs
                && sv.values.iter().any(|&v| close(v, s, tol))
        }
        NonnegEntries { min_nonzero_entry } => {
            !sa && entry_growth_minimum(a).is_some_and(|m| close(m, *min_nonzero_entry, tol))
        }
        NilpDeg3SmallSquare { norm_t2 } => {
            let actual = (a * a).op_norm()?;
            nilpotency_degree(a, tol) == Some(3)
                && is_partial_isometry(a, tol)
                && close(actual, *norm_t2, tol)
                && actual < 1.0 - tol.eps_abs
        }
        UnitaryDirectSumZero {} => {
            !sa && recognize_jordan(a).is_some_and(|s| first_non_unitary_plus_zero_block(&s, tol).is_none())
        }
        DirectSumComponent {
            index,
            inner_certificate,
        } => {
            let sizes = block_partition(a);
            if sizes.len() < 2 || *index >= sizes.len() || inner_certificate.claim() != Claim::SiNo {
                false
            } else {
                let start: usize = sizes[..*index].iter().sum();
                let block = a.block(start, sizes[*index])?;
                validate_certificate(&block, inner_certificate, tol)?
            }
        }
        OracleEvidence { report } => report.reverify(a, REVERIFY_RESIDUAL).is_some(),
        QuasiIsometry {} => is_quasi_isometry(a, tol),
        RankDrop { rank_a, rank_a2 } => {
            rank_a2 < rank_a && a.rank(tol)? == *rank_a && (a * a).rank(tol)? == *rank_a2
        }
        JordanNotUnitaryPlusZero { offending_block } => match recognize_jordan(a) {
            Some(spec) => {
                let b = spec.blocks.get(offending_block.index);
                !sa && block_matches(&spec, offending_block, tol)
                    && b.is_some_and(|b| {
                        let single = JordanSpec { blocks: vec![*b] };
                        first_non_unitary_plus_zero_block(&single, tol).is_some()
                    })
            }
            None => false,
        },
        InverseEquivalence { si_certificate } => {
            matches!(si_certificate.claim(), Claim::SiYes | Claim::SimpleYes)
                && !sa
                && invertible()?
                && validate_certificate(a, si_certificate, tol)?
        }
    };
    Ok(ok)
}

/// Parses a certificate from JSON, distinguishing unknown tags from
/// malformed payloads, then validates it.
pub fn validate_certificate_json(a: &CMatrix, json: &str, tol: &Tolerance) -> Result<bool, ClassifyError> {
    let value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| ClassifyError::MalformedCertificate(e.to_string()))?;
    let tag = value
        .get("tag")
        .and_then(|t| t.as_str())
        .ok_or_else(|| ClassifyError::MalformedCertificate("missing tag".into()))?;
    if !CERTIFICATE_TAGS.contains(&tag) {
        return Err(ClassifyError::UnknownCertificateTag(tag.to_string()));
    }
    let c: Certificate =
        serde_json::from_value(value).map_err(|e| ClassifyError::MalformedCertificate(e.to_string()))?;
    validate_certificate(a, &c, tol)
}

/// Product of per-factor minimum nonzero entries. Every factor must have
/// all nonzero entries real and greater than 1.
pub fn min_nonzero_entry_bound(factors: &[CMatrix]) -> Result<f64, ClassifyError> {
    let mut bound = 1.0;
    for (k, m) in factors.iter().enumerate() {
        let mut min = f64::INFINITY;
        for z in m.entries() {
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            if z.im != 0.0 || z.re <= 1.0 {
                return Err(ClassifyError::PreconditionViolated(format!(
                    "factor {k} has nonzero entry {z} that is not real and > 1"
                )));
            }
            min = min.min(z.re);
        }
        if min.is_infinite() {
            return Err(ClassifyError::PreconditionViolated(format!("factor {k} is zero")));
        }
        bound *= min;
    }
    if factors.is_empty() {
        return Err(ClassifyError::PreconditionViolated("no factors".into()));
    }
    Ok(bound)
}
