//! Problem data model, the native text format, strictly feasible instance
//! generation, and solution/trace serialization.
//!
//! The native format is line oriented. Matrices are written as counts of
//! `i j value` triples over the upper triangle (`0 <= i <= j < n`); each
//! triple sets both `(i,j)` and `(j,i)`. Floats are printed with 17
//! significant digits so every `f64` round-trips bit exactly.
//!
//! ```text
//! n 2
//! m 1
//! b 2.0000000000000000e0
//! A0 3
//! 0 0 1.0000000000000000e0
//! 0 1 0.0000000000000000e0
//! 1 1 1.0000000000000000e0
//! A1 3
//! ...
//! X0 3          (optional)
//! ...
//! eta0 1.0000000000000000e0   (optional)
//! ```

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::ipm::IterationRecord;
use crate::rng::uniform_pm1;
use crate::scalar::{real, Scalar};
use crate::symmat::{frob_inner, lambda_min_sym, SymMat};

/// Primal SDP data: minimize `<A0, X>` over `<Ai, X> = b_i`, `X` psd.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem<F> {
    pub n: usize,
    pub m: usize,
    pub a0: SymMat<F>,
    pub a: Vec<SymMat<F>>,
    pub b: Vec<F>,
    /// Optional strictly feasible starting point.
    pub x0: Option<SymMat<F>>,
    /// Optional path parameter at `x0`, when the start is a central point.
    pub eta0: Option<F>,
}

impl<F: Scalar> SdpProblem<F> {
    pub fn new(a0: SymMat<F>, a: Vec<SymMat<F>>, b: Vec<F>) -> Result<Self> {
        let n = a0.dim();
        let m = a.len();
        if m == 0 {
            return Err(Error::DimMismatch(
                "at least one constraint is required".to_string(),
            ));
        }
        if b.len() != m {
            return Err(Error::DimMismatch(format!(
                "b has length {} but there are {} constraints",
                b.len(),
                m
            )));
        }
        if let Some(bad) = a.iter().position(|ai| ai.dim() != n) {
            return Err(Error::DimMismatch(format!(
                "constraint matrix {} has dimension {} != {}",
                bad + 1,
                a[bad].dim(),
                n
            )));
        }
        Ok(SdpProblem {
            n,
            m,
            a0,
            a,
            b,
            x0: None,
            eta0: None,
        })
    }

    pub fn objective(&self, x: &SymMat<F>) -> F {
        frob_inner(&self.a0, x)
    }

    pub fn constraint_values(&self, x: &SymMat<F>) -> Vec<F> {
        self.a.iter().map(|ai| frob_inner(ai, x)).collect()
    }

    /// Largest relative constraint violation `|<Ai,X> - b_i| / (1 + |b_i|)`.
    pub fn feasibility_error(&self, x: &SymMat<F>) -> F {
        self.constraint_values(x)
            .iter()
            .zip(self.b.iter())
            .fold(F::zero(), |acc, (&v, &bi)| {
                acc.max((v - bi).abs() / (F::one() + bi.abs()))
            })
    }
}

/// Generates a strictly feasible instance whose identity start lies exactly
/// on the central path at parameter `eta0`.
///
/// Constraint matrices have entries uniform in `[-1, 1)` from the seeded
/// generator, `b_i = tr(A_i)` so the identity is feasible, and the objective
/// is `A0 = (I + sum y_i A_i) / eta0` for a random multiplier vector `y`.
/// The output is a pure function of `(n, m, eta0, seed)`.
pub fn generate_instance<F: Scalar>(n: usize, m: usize, eta0: F, seed: u64) -> SdpProblem<F> {
    assert!(n >= 2, "n must be at least 2");
    assert!(m >= 1, "m must be at least 1");
    assert!(eta0 > F::zero(), "eta0 must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<SymMat<F>> = (0..m)
        .map(|_| SymMat::from_fn(n, |_, _| real(uniform_pm1(&mut rng))))
        .collect();
    let b: Vec<F> = a.iter().map(|ai| ai.trace()).collect();
    let y: Vec<F> = (0..m).map(|_| real(uniform_pm1(&mut rng))).collect();
    let mut a0 = SymMat::identity(n);
    for (yi, ai) in y.iter().zip(a.iter()) {
        a0.add_scaled(*yi, ai);
    }
    let a0 = a0.scaled(F::one() / eta0);
    let mut p = SdpProblem::new(a0, a, b).expect("construction is consistent");
    p.x0 = Some(SymMat::identity(n));
    p.eta0 = Some(eta0);
    p
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// A defect discovered by [`validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    NonFinite { matrix: String },
    NonFiniteRhs { index: usize },
    X0NotPd,
    X0Infeasible { constraint: usize, violation: f64 },
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Finding::NonFinite { matrix } => write!(f, "non-finite entry in {matrix}"),
            Finding::NonFiniteRhs { index } => write!(f, "non-finite b[{index}]"),
            Finding::X0NotPd => write!(f, "X0 is not positive definite"),
            Finding::X0Infeasible {
                constraint,
                violation,
            } => write!(f, "X0 violates constraint {constraint} by {violation:e}"),
        }
    }
}

/// Validation outcome: defects plus whether the identity start is usable.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub findings: Vec<Finding>,
    /// True when `<Ai, I> = b_i` holds for all constraints within `1e-8`
    /// relative, so the solver may start from the identity.
    pub identity_start: bool,
}

pub fn validate_problem<F: Scalar>(p: &SdpProblem<F>) -> ValidationSummary {
    let mut findings = Vec::new();
    let finite = |m: &SymMat<F>| m.packed().iter().all(|v| v.is_finite());
    if !finite(&p.a0) {
        findings.push(Finding::NonFinite {
            matrix: "A0".to_string(),
        });
    }
    for (i, ai) in p.a.iter().enumerate() {
        if !finite(ai) {
            findings.push(Finding::NonFinite {
                matrix: format!("A{}", i + 1),
            });
        }
    }
    for (i, bi) in p.b.iter().enumerate() {
        if !bi.is_finite() {
            findings.push(Finding::NonFiniteRhs { index: i });
        }
    }
    let tol = real::<F>(1e-8);
    if let Some(x0) = &p.x0 {
        if lambda_min_sym(x0) <= F::zero() {
            findings.push(Finding::X0NotPd);
        }
        for (i, (&v, &bi)) in p.constraint_values(x0).iter().zip(p.b.iter()).enumerate() {
            let viol = (v - bi).abs() / (F::one() + bi.abs());
            if viol > tol {
                findings.push(Finding::X0Infeasible {
                    constraint: i + 1,
                    violation: viol.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    let eye = SymMat::identity(p.n);
    let identity_start = p
        .constraint_values(&eye)
        .iter()
        .zip(p.b.iter())
        .all(|(&v, &bi)| (v - bi).abs() <= tol * (F::one() + bi.abs()));
    ValidationSummary {
        findings,
        identity_start,
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    Degenerate,
    Unbounded,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::Degenerate => "Degenerate",
            SolveStatus::Unbounded => "Unbounded",
        }
    }
}

/// Final solve summary, including the iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport<F> {
    pub x_final: SymMat<F>,
    pub objective: F,
    /// Last computed duality gap (infinite when never available).
    pub gap: F,
    pub gap_valid: bool,
    pub outer_iters: usize,
    pub predictor_count: usize,
    pub corrector_count: usize,
    pub status: SolveStatus,
}

// ---------------------------------------------------------------------------
// Text encoding
// ---------------------------------------------------------------------------

/// 17 significant digits: round-trips every finite `f64` bit exactly.
pub(crate) fn fmt_float<F: Scalar>(v: F) -> String {
    format!("{:.16e}", v.to_f64().unwrap_or(f64::NAN))
}

fn write_matrix<F: Scalar>(out: &mut String, header: &str, m: &SymMat<F>) {
    let entries = m.dim() * (m.dim() + 1) / 2;
    out.push_str(header);
    out.push(' ');
    out.push_str(&entries.to_string());
    out.push('\n');
    for (i, j, v) in m.iter_upper() {
        out.push_str(&format!("{i} {j} {}\n", fmt_float(v)));
    }
}

/// Serializes a problem in the native format. Deterministic: fixed field
/// order, all upper-triangle entries, 17-significant-digit floats.
pub fn write_problem<F: Scalar>(p: &SdpProblem<F>) -> String {
    let mut out = String::new();
    out.push_str(&format!("n {}\n", p.n));
    out.push_str(&format!("m {}\n", p.m));
    out.push('b');
    for bi in &p.b {
        out.push(' ');
        out.push_str(&fmt_float(*bi));
    }
    out.push('\n');
    write_matrix(&mut out, "A0", &p.a0);
    for (i, ai) in p.a.iter().enumerate() {
        write_matrix(&mut out, &format!("A{}", i + 1), ai);
    }
    if let Some(x0) = &p.x0 {
        write_matrix(&mut out, "X0", x0);
    }
    if let Some(eta0) = p.eta0 {
        out.push_str(&format!("eta0 {}\n", fmt_float(eta0)));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-empty line as `(1-based line number, content)`.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
        }
        None
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn parse_float<F: Scalar>(line: usize, tok: &str) -> Result<F> {
    match tok.parse::<f64>() {
        Ok(v) => Ok(real(v)),
        Err(_) => parse_err(line, format!("invalid float '{tok}'")),
    }
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Result<usize> {
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

fn expect_keyword_line<'a>(lines: &mut Lines<'a>, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
    let (ln, l) = match lines.next_line() {
        Some(x) => x,
        None => return parse_err(0, format!("unexpected end of input, expected '{keyword}'")),
    };
    let mut toks = l.split_whitespace();
    let head = toks.next().unwrap_or("");
    if head != keyword {
        return parse_err(ln, format!("expected '{keyword}', found '{head}'"));
    }
    Ok((ln, toks.collect()))
}

fn parse_matrix<F: Scalar>(
    lines: &mut Lines<'_>,
    header_line: usize,
    count_tok: &str,
    n: usize,
    what: &str,
) -> Result<SymMat<F>> {
    let count = parse_usize(header_line, count_tok, "entry count")?;
    let mut m = SymMat::zeros(n);
    let mut seen = vec![false; n * (n + 1) / 2];
    for _ in 0..count {
        let (ln, l) = match lines.next_line() {
            Some(x) => x,
            None => return parse_err(header_line, format!("{what}: missing entries")),
        };
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return parse_err(ln, format!("{what}: expected 'i j value'"));
        }
        let i = parse_usize(ln, toks[0], "row index")?;
        let j = parse_usize(ln, toks[1], "column index")?;
        if i > j {
            return Err(Error::AsymmetricEntry { line: ln });
        }
        if j >= n {
            return parse_err(ln, format!("{what}: index {j} out of range for n={n}"));
        }
        let slot = i * n - i * (i + 1) / 2 + j;
        if seen[slot] {
            return parse_err(ln, format!("{what}: duplicate entry ({i}, {j})"));
        }
        seen[slot] = true;
        m.set(i, j, parse_float(ln, toks[2])?);
    }
    Ok(m)
}

/// Parses the native problem format.
pub fn parse_problem<F: Scalar>(text: &str) -> Result<SdpProblem<F>> {
    let mut lines = Lines::new(text);

    let (ln, toks) = expect_keyword_line(&mut lines, "n")?;
    if toks.len() != 1 {
        return parse_err(ln, "expected 'n <dim>'");
    }
    let n = parse_usize(ln, toks[0], "dimension")?;
    if n == 0 {
        return parse_err(ln, "n must be positive");
    }

    let (ln, toks) = expect_keyword_line(&mut lines, "m")?;
    if toks.len() != 1 {
        return parse_err(ln, "expected 'm <count>'");
    }
    let m = parse_usize(ln, toks[0], "constraint count")?;

    let (ln, toks) = expect_keyword_line(&mut lines, "b")?;
    if toks.len() != m {
        return Err(Error::DimMismatch(format!(
            "b has {} entries but m = {m} (line {ln})",
            toks.len()
        )));
    }
    let b = toks
        .iter()
        .map(|t| parse_float(ln, t))
        .collect::<Result<Vec<F>>>()?;

    let (ln, toks) = expect_keyword_line(&mut lines, "A0")?;
    if toks.len() != 1 {
        return parse_err(ln, "expected 'A0 <count>'");
    }
    let a0 = parse_matrix(&mut lines, ln, toks[0], n, "A0")?;

    let mut a = Vec::with_capacity(m);
    for i in 1..=m {
        let key = format!("A{i}");
        let (ln, toks) = expect_keyword_line(&mut lines, &key)?;
        if toks.len() != 1 {
            return parse_err(ln, format!("expected '{key} <count>'"));
        }
        a.push(parse_matrix(&mut lines, ln, toks[0], n, &key)?);
    }

    let mut problem = SdpProblem::new(a0, a, b)?;

    // optional trailing sections, in order: X0 then eta0
    while let Some((ln, l)) = lines.next_line() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[0] {
            "X0" if problem.x0.is_none() && problem.eta0.is_none() => {
                if toks.len() != 2 {
                    return parse_err(ln, "expected 'X0 <count>'");
                }
                problem.x0 = Some(parse_matrix(&mut lines, ln, toks[1], n, "X0")?);
            }
            "eta0" if problem.eta0.is_none() => {
                if toks.len() != 2 {
                    return parse_err(ln, "expected 'eta0 <value>'");
                }
                let eta0: F = parse_float(ln, toks[1])?;
                if !(eta0 > F::zero()) {
                    return parse_err(ln, "eta0 must be positive");
                }
                problem.eta0 = Some(eta0);
            }
            other => return parse_err(ln, format!("unexpected field '{other}'")),
        }
    }
    Ok(problem)
}

// ---------------------------------------------------------------------------
// Trace and report streams
// ---------------------------------------------------------------------------

fn opt_float<F: Scalar>(v: Option<F>) -> String {
    match v {
        Some(x) => fmt_float(x),
        None => "-".to_string(),
    }
}

/// One line per outer iteration, fixed key order, `-` for absent fields.
pub fn write_trace<F: Scalar>(records: &[IterationRecord<F>]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "iter {} phase {} objective {} decrement_fw {} gap {} gap_valid {} s_star {} t_step {} f_fw_decrease {}\n",
            r.iter,
            r.phase.as_str(),
            fmt_float(r.objective),
            fmt_float(r.decrement_fw),
            opt_float(r.gap),
            r.gap_valid,
            opt_float(r.s_star),
            opt_float(r.t_step),
            opt_float(r.f_fw_decrease),
        ));
    }
    out
}

/// Serializes a solution report; deterministic byte-for-byte.
pub fn write_report<F: Scalar>(r: &SolutionReport<F>) -> String {
    let mut out = String::new();
    out.push_str(&format!("status {}\n", r.status.as_str()));
    out.push_str(&format!("objective {}\n", fmt_float(r.objective)));
    out.push_str(&format!("gap {}\n", fmt_float(r.gap)));
    out.push_str(&format!("gap_valid {}\n", r.gap_valid));
    out.push_str(&format!("outer_iters {}\n", r.outer_iters));
    out.push_str(&format!("predictor_count {}\n", r.predictor_count));
    out.push_str(&format!("corrector_count {}\n", r.corrector_count));
    out.push_str(&format!("n {}\n", r.x_final.dim()));
    write_matrix(&mut out, "X", &r.x_final);
    out
}

/// Parses the output of [`write_report`].
pub fn parse_report<F: Scalar>(text: &str) -> Result<SolutionReport<F>> {
    let mut lines = Lines::new(text);
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (ln, toks) = expect_keyword_line(&mut lines, key)?;
        if toks.len() != 1 {
            return parse_err(ln, format!("expected '{key} <value>'"));
        }
        Ok((ln, toks[0].to_string()))
    };
    let (ln, status) = field("status")?;
    let status = match status.as_str() {
        "Optimal" => SolveStatus::Optimal,
        "MaxIterations" => SolveStatus::MaxIterations,
        "Degenerate" => SolveStatus::Degenerate,
        "Unbounded" => SolveStatus::Unbounded,
        other => return parse_err(ln, format!("unknown status '{other}'")),
    };
    let (ln, tok) = field("objective")?;
    let objective = parse_float(ln, &tok)?;
    let (ln, tok) = field("gap")?;
    let gap = parse_float(ln, &tok)?;
    let (ln, tok) = field("gap_valid")?;
    let gap_valid = match tok.as_str() {
        "true" => true,
        "false" => false,
        other => return parse_err(ln, format!("invalid boolean '{other}'")),
    };
    let (ln, tok) = field("outer_iters")?;
    let outer_iters = parse_usize(ln, &tok, "iteration count")?;
    let (ln, tok) = field("predictor_count")?;
    let predictor_count = parse_usize(ln, &tok, "predictor count")?;
    let (ln, tok) = field("corrector_count")?;
    let corrector_count = parse_usize(ln, &tok, "corrector count")?;
    let (ln, tok) = field("n")?;
    let n = parse_usize(ln, &tok, "dimension")?;
    let (ln, toks) = expect_keyword_line(&mut lines, "X")?;
    if toks.len() != 1 {
        return parse_err(ln, "expected 'X <count>'");
    }
    let x_final = parse_matrix(&mut lines, ln, toks[0], n, "X")?;
    Ok(SolutionReport {
        x_final,
        objective,
        gap,
        gap_valid,
        outer_iters,
        predictor_count,
        corrector_count,
        status,
    })
}
