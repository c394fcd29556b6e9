//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use si_semigroup::builders::{build_const_shift_w, build_jordan, build_shift, gallery, random_matrix, random_unitary};
use si_semigroup::classifier::{classify_si, Decision};
use si_semigroup::cli::{demo_rows, RunConfig};
use si_semigroup::matrix::{CMatrix, Tolerance};
use si_semigroup::oracle::{ideal_elements, si_scan, simplicity_scan, OracleBounds, OracleReport};
use si_semigroup::predicates::{
    is_partial_isometry, is_power_partial_isometry, is_quasi_isometry, is_selfadjoint, jordan_pi_decomposition,
    JordanBlock, JordanSpec,
};
use si_semigroup::words::{enumerate, word_diag_values, EnumerationCaps, Word};

const DEMO_TIME_LIMIT: Duration = Duration::from_secs(60);
const LEMMA_MARGIN: f64 = 1e-9;
const GK_MARGIN: f64 = 1e-9;
const DIAG_TOL: f64 = 1e-9;
const SVALUE_TOL: f64 = 1e-9;
const NORM_BAND: f64 = 1e-9;
const RESIDUAL_LIMIT: f64 = 1e-8;
const SEED: u64 = 0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Matrices and oracle reports gathered along the way for the
/// cross-cutting criteria 7 and 8.
#[derive(Default)]
struct Collected {
    si_yes: Vec<CMatrix>,
    reports: Vec<(CMatrix, OracleReport)>,
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn std_bounds() -> OracleBounds {
    OracleBounds::default()
}

fn fast_bounds() -> OracleBounds {
    OracleBounds {
        stop_at_first_failure: true,
        ..OracleBounds::default()
    }
}

/// Conclusive decision agrees with the oracle scan at the given bounds.
fn oracle_agrees(a: &CMatrix, decision: Decision, bounds: &OracleBounds, tol: &Tolerance, col: &mut Collected) -> bool {
    let table = bounds.table(a, tol);
    let report = si_scan(a, bounds, &table, tol);
    let ok = match decision {
        Decision::Yes => report.all_solved(),
        Decision::No => !report.all_solved(),
        Decision::Inconclusive => false,
    };
    col.reports.push((a.clone(), report));
    ok
}

fn ac1(col: &mut Collected) -> Outcome {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_si-semigroup"))
        .args(["--format", "text", "demo"])
        .output()
        .expect("run demo binary");
    let elapsed = start.elapsed();

    let cfg = RunConfig {
        tol: Tolerance::default(),
        bounds: std_bounds(),
        format: si_semigroup::cli::Format::Json,
        seed: SEED,
    };
    let rows = demo_rows(&gallery(), &cfg).expect("demo rows");
    let want: &[(&str, Decision, Option<Decision>)] = &[
        ("E1", Decision::No, None),
        ("J3-shift", Decision::Yes, None),
        ("J2-1", Decision::No, None),
        ("J3-1", Decision::No, None),
        ("J2-i", Decision::No, None),
        ("group-2x2", Decision::Yes, Some(Decision::Yes)),
        ("J3-plus-2I2", Decision::No, None),
        ("nonneg-2x2", Decision::No, None),
        ("diag-i", Decision::Yes, Some(Decision::Yes)),
    ];
    let mut bad = Vec::new();
    for (name, si, simple) in want {
        match rows.iter().find(|r| r.name == *name) {
            Some(r) if r.got_si == *si && simple.is_none_or(|s| s == r.got_simple) => {}
            _ => bad.push(name.to_string()),
        }
    }
    for r in &rows {
        if !r.pass {
            bad.push(format!("{} (row)", r.name));
        }
        if r.got_si == Decision::Yes {
            col.si_yes.push(gallery().into_iter().find(|e| e.name == r.name).unwrap().matrix);
        }
    }
    for e in gallery() {
        let table = cfg.bounds.table(&e.matrix, &cfg.tol);
        col.reports.push((e.matrix.clone(), si_scan(&e.matrix, &cfg.bounds, &table, &cfg.tol)));
        col.reports.push((e.matrix.clone(), simplicity_scan(&e.matrix, &cfg.bounds, &table, &cfg.tol)));
    }
    let pass = status.status.success() && bad.is_empty() && elapsed < DEMO_TIME_LIMIT;
    Outcome {
        pass,
        detail: format!(
            "demo exit={:?} rows={} mismatches={:?} time={:.2}s (limit {}s)",
            status.status.code(),
            rows.len(),
            bad,
            elapsed.as_secs_f64(),
            DEMO_TIME_LIMIT.as_secs()
        ),
    }
}

/// All tuples over `alphabet` of length `len`.
fn tuples<T: Copy>(alphabet: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                alphabet.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

fn ac2(col: &mut Collected) -> Outcome {
    let tol = Tolerance::default();
    let alphabet = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.5, 0.0), c(-0.5, 0.0), c(0.0, 1.0)];
    let bounds = fast_bounds();
    let mut count = 0;
    let mut mismatches = Vec::new();
    for n in 1..=5 {
        for w in tuples(&alphabet, n - 1) {
            let t = build_shift(&w);
            count += 1;
            let v = classify_si(&t, &tol, &bounds).expect("classify");
            let pi = is_partial_isometry(&t, &tol);
            let ppi = is_power_partial_isometry(&t, &tol);
            let yes = v.si == Decision::Yes;
            let conclusive = v.si != Decision::Inconclusive;
            if !(conclusive && yes == pi && pi == ppi && oracle_agrees(&t, v.si, &bounds, &tol, col)) {
                mismatches.push(format!("{w:?}"));
            }
            if yes {
                col.si_yes.push(t);
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty() && count >= 500,
        detail: format!("{count} shifts, {} mismatches {:?}", mismatches.len(), mismatches.iter().take(3).collect::<Vec<_>>()),
    }
}

/// Compositions of `total` into positive parts.
fn compositions(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    (1..=total)
        .flat_map(|first| {
            compositions(total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn ac3(col: &mut Collected) -> Outcome {
    let tol = Tolerance::default();
    let lambdas = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.5, 0.0)];
    let bounds = fast_bounds();
    let mut count = 0;
    let mut mismatches = Vec::new();
    for total in 1..=4 {
        for sizes in compositions(total) {
            if sizes.iter().all(|&s| s == 1) {
                continue; // diagonal, hence normal
            }
            for ls in tuples(&lambdas, sizes.len()) {
                let spec = JordanSpec {
                    blocks: sizes.iter().zip(&ls).map(|(&size, &lambda)| JordanBlock { lambda, size }).collect(),
                };
                let t = build_jordan(&spec);
                count += 1;
                let v = classify_si(&t, &tol, &bounds).expect("classify");
                let split = jordan_pi_decomposition(&spec, &tol).is_some();
                let yes = v.si == Decision::Yes;
                if !(v.si != Decision::Inconclusive && yes == split && oracle_agrees(&t, v.si, &bounds, &tol, col)) {
                    mismatches.push(spec.to_string());
                }
                if yes {
                    col.si_yes.push(t);
                }
            }
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!("{count} non-normal Jordan specs, {} mismatches {:?}", mismatches.len(), mismatches.iter().take(3).collect::<Vec<_>>()),
    }
}

fn ac4() -> Outcome {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let bounds = std_bounds();
    let mut worst = f64::INFINITY;
    let mut samples = 0usize;
    let mut configs = 0;
    let mut ok = true;
    for lambda in [c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)] {
        for big_n in [2, 3, 4] {
            let w = build_const_shift_w(lambda, big_n).unwrap();
            let t = CMatrix::identity(big_n).add(&w.adjoint()).unwrap();
            let table = enumerate(&t, bounds.factor_max_len, &bounds.caps(), &tol);
            let pool: Vec<CMatrix> = std::iter::once(CMatrix::identity(big_n))
                .chain(table.entries.iter().map(|e| e.matrix.clone()))
                .collect();
            for n in [1, 2] {
                for m in [1, 2] {
                    configs += 1;
                    let word: Word = format!("{}{}", "g".repeat(n), "g*".repeat(m)).parse().unwrap();
                    let core = word.eval(&t);
                    let bound = 1.0 + (n * m) as f64 / lambda.norm_sqr();
                    let mut check = |x: &CMatrix, y: &CMatrix| {
                        let e = (&(x * &core) * y)[(0, 0)].re;
                        worst = worst.min(e - bound);
                        e >= bound - LEMMA_MARGIN
                    };
                    ok &= check(&pool[0], &pool[0]);
                    for _ in 0..2000 {
                        let x = &pool[rng.random_range(0..pool.len())];
                        let y = &pool[rng.random_range(0..pool.len())];
                        ok &= check(x, y);
                    }
                    samples += 2001;
                    // The exhaustive ideal for the smallest case as well.
                    if big_n == 2 && n == 1 && m == 1 {
                        for e in ideal_elements(&t, &word, &table) {
                            ok &= e[(0, 0)].re >= bound - LEMMA_MARGIN;
                            samples += 1;
                        }
                    }
                }
            }
        }
    }
    Outcome {
        pass: ok && configs == 36,
        detail: format!("{configs} configurations, {samples} ideal elements, min slack {worst:.3e}"),
    }
}

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let m = rng.random_range(1..=4);
        let n = rng.random_range(1..=6);
        let factors: Vec<CMatrix> = (0..m).map(|_| random_matrix(&mut rng, n)).collect();
        let product = factors.iter().skip(1).fold(factors[0].clone(), |acc, f| &acc * f);
        let lhs = product.svalues().unwrap().values;
        let per: Vec<Vec<f64>> = factors.iter().map(|f| f.svalues().unwrap().values).collect();
        let (mut sl, mut sr) = (0.0, 0.0);
        for k in 0..n {
            sl += lhs[k];
            sr += per.iter().map(|s| s[k]).product::<f64>();
            worst = worst.max(sl - sr);
            if sl - sr > GK_MARGIN {
                violations += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("1000 tuples, {violations} violations, max margin {worst:.3e}"),
    }
}

fn ac6() -> Outcome {
    let tol = Tolerance::default();
    let lambdas = [c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0) / 2f64.sqrt(), c(0.0, 1.0), c(1.0, 1.0)];
    let words = Word::all_up_to(6);
    let mut checked = 0;
    let mut bad = Vec::new();
    for lambda in lambdas {
        for big_n in 1..=5 {
            for w in &words {
                let vals = word_diag_values(lambda, big_n, w, &tol).unwrap();
                checked += 1;
                let p = w.g_count();
                let balanced = 2 * p == w.len();
                let expected = lambda.norm().powi(-2 * p as i32);
                let ok = vals.len() <= 1
                    && (!balanced || vals.iter().all(|v| (v - c(expected, 0.0)).norm() <= DIAG_TOL));
                if !ok {
                    bad.push(format!("lambda={lambda} N={big_n} w={w}: {vals:?}"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{checked} (lambda, N, word) cases, {} failures {:?}", bad.len(), bad.iter().take(2).collect::<Vec<_>>()),
    }
}

fn ac7(col: &Collected) -> Outcome {
    let tol = Tolerance::default();
    let mut considered = 0;
    let mut violations = 0;
    for a in &col.si_yes {
        let norm = a.op_norm().unwrap();
        if is_selfadjoint(a, &tol) || (norm - 1.0).abs() > NORM_BAND {
            continue;
        }
        considered += 1;
        let sv = a.svalues().unwrap();
        if !sv.values.iter().all(|&s| s.abs() <= SVALUE_TOL || (s - 1.0).abs() <= SVALUE_TOL) {
            violations += 1;
        }
    }
    Outcome {
        pass: violations == 0 && considered > 0,
        detail: format!("{considered} SI nonselfadjoint norm-one matrices, {violations} violations"),
    }
}

fn ac8(col: &Collected) -> Outcome {
    let tol = Tolerance::default();
    let mut solutions = 0;
    let mut failed = 0;
    let mut worst: f64 = 0.0;
    for (a, r) in &col.reports {
        solutions += r.outcomes.iter().filter(|o| o.x.is_some()).count();
        match r.reverify(a, RESIDUAL_LIMIT) {
            Some(w) => worst = worst.max(w),
            None => failed += 1,
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut generators: Vec<CMatrix> = gallery().into_iter().map(|e| e.matrix).collect();
    generators.push(random_matrix(&mut rng, 3).scale(c(0.6, 0.0)));
    generators.push(random_unitary(&mut rng, 4));
    let mut dump_mismatch = 0;
    for g in &generators {
        let serial = EnumerationCaps {
            parallel: false,
            ..EnumerationCaps::default()
        };
        let parallel = EnumerationCaps {
            parallel: true,
            ..EnumerationCaps::default()
        };
        let a = enumerate(g, 8, &serial, &tol).dump().unwrap();
        let b = enumerate(g, 8, &parallel, &tol).dump().unwrap();
        if a != b {
            dump_mismatch += 1;
        }
        let sp = OracleBounds { parallel: false, ..std_bounds() };
        let pp = OracleBounds { parallel: true, ..std_bounds() };
        let ts = sp.table(g, &tol);
        let tp = pp.table(g, &tol);
        if si_scan(g, &sp, &ts, &tol).outcomes != si_scan(g, &pp, &tp, &tol).outcomes {
            dump_mismatch += 1;
        }
    }
    Outcome {
        pass: failed == 0 && dump_mismatch == 0 && solutions > 0,
        detail: format!(
            "{} reports, {solutions} solutions, {failed} failed reverification, max residual {worst:.3e}; {} generators, {dump_mismatch} serial/parallel differences",
            col.reports.len(),
            generators.len()
        ),
    }
}

fn permutation(p: &[usize]) -> CMatrix {
    let mut m = CMatrix::zeros(p.len());
    for (j, &i) in p.iter().enumerate() {
        m[(i, j)] = c(1.0, 0.0);
    }
    m
}

fn ac9(col: &mut Collected) -> Outcome {
    let tol = Tolerance::default();
    let bounds = std_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut cases: Vec<(String, CMatrix)> = Vec::new();
    for n in 1..=5 {
        let d: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        cases.push((format!("diag-unitary-{n}"), CMatrix::diag(&d)));
    }
    for p in [&[1, 0][..], &[1, 2, 0], &[0, 2, 1], &[3, 0, 1, 2], &[1, 0, 3, 2, 4]] {
        cases.push((format!("perm-{p:?}"), permutation(p)));
    }
    for n in 2..=6 {
        cases.push((format!("unitary-{n}"), random_unitary(&mut rng, n)));
    }
    for (k, n) in [(1, 3), (2, 3), (2, 4), (3, 5), (4, 6)] {
        let u = random_unitary(&mut rng, k);
        let v = random_unitary(&mut rng, n);
        let inner = CMatrix::direct_sum(&[u, CMatrix::zeros(n - k)]).unwrap();
        cases.push((format!("V(U+0)V*-{k}-{n}"), &(&v * &inner) * &v.adjoint()));
    }
    let mut bad = Vec::new();
    for (name, t) in &cases {
        let table = bounds.table(t, &tol);
        let r = simplicity_scan(t, &bounds, &table, &tol);
        if !(is_quasi_isometry(t, &tol) && r.all_solved()) {
            bad.push(name.clone());
        }
        col.reports.push((t.clone(), r));
    }
    let trunc = build_shift(&[c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
    let trunc_fails = !is_quasi_isometry(&trunc, &tol);
    Outcome {
        pass: cases.len() == 20 && bad.is_empty() && trunc_fails,
        detail: format!(
            "{} quasi-isometries, failures {:?}; truncated shift (1/2,1,1) fails (T*T)T = T: {trunc_fails}",
            cases.len(),
            bad
        ),
    }
}

fn main() {
    let mut col = Collected::default();
    let mut all = true;
    let start = Instant::now();
    let mut report = |id: &str, title: &str, o: Outcome| {
        all &= o.pass;
        println!("{id} {} {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    let o1 = ac1(&mut col);
    let o2 = ac2(&mut col);
    let o3 = ac3(&mut col);
    let o4 = ac4();
    let o5 = ac5();
    let o6 = ac6();
    let o7 = ac7(&col);
    // Criterion 9 runs before 8 so that its simplicity reports are reverified too.
    let o9 = ac9(&mut col);
    let o8 = ac8(&col);
    report("AC1", "gallery reproduction", o1);
    report("AC2", "weighted shifts: SI <=> PI <=> PPI", o2);
    report("AC3", "Jordan matrices: SI <=> PI split", o3);
    report("AC4", "ideal (1,1)-entry lower bound", o4);
    report("AC5", "singular-value product inequality", o5);
    report("AC6", "diagonal rigidity of shift words", o6);
    report("AC7", "norm-one SI matrices have s-values in {0,1}", o7);
    report("AC8", "oracle soundness and determinism", o8);
    report("AC9", "quasi-isometries are simple", o9);
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
