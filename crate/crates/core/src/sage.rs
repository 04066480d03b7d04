//! Conditional AGE / SAGE membership and certificates.
//!
//! A coefficient vector `c` over exponent rows `A` lies in the conditional AGE
//! cone for index `i` and set `X` exactly when `c_j >= 0` for `j != i` and
//! there are `v >= 0`, `λ` with
//!
//! ```text
//! σ_X(λ) + D(v, c_{\i}) - Σ v  <=  c_i
//! Σ_{j≠i} v_j (A_j - A_i) + λ  =  0
//! ```
//!
//! where `D(v, c) = Σ v_j ln(v_j / c_j)` (natural log, `0·ln 0 = 0`). A SAGE
//! certificate at level `p` splits the coefficients of
//! `(Σ_j exp(A_j x))^p · Sig(c, A)` over the rows of `E_{p+1}(A)` into such
//! AGE pieces.
//!
//! Membership is decided by minimizing a slack `s` added to every entropy
//! inequality; the input is reported a member when `s* <= feas_tol`.
//!
//! Indices are zero-based throughout, including in certificate JSON.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{
    AffineExpr, ClarabelBackend, ConicError, ConicProgram, SolveOptions, SolveResult, SolveStatus,
    SolverBackend, Var,
};
use crate::convexset::{ConvexSet, SetError};
use crate::signomial::{dot, ModulationMap, Signomial, SignomialError};

#[derive(Debug, Error)]
pub enum SageError {
    #[error(transparent)]
    Signomial(#[from] SignomialError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solver reported {status:?} (primal residual {residual:e})")]
    Numerical { status: SolveStatus, residual: f64 },
    #[error("slack program unbounded below; the set looks empty")]
    EmptySet,
    #[error("certificate does not match the problem: {0}")]
    StructuralMismatch(String),
}

/// Options shared by the membership and bound routines.
#[derive(Clone)]
pub struct SageOptions {
    pub solve: SolveOptions,
    /// Instantiate AGE blocks only for negative coefficients plus one
    /// designated index.
    pub presolve: bool,
    pub backend: Arc<dyn SolverBackend>,
}

impl Default for SageOptions {
    fn default() -> Self {
        SageOptions {
            solve: SolveOptions::default(),
            presolve: true,
            backend: Arc::new(ClarabelBackend),
        }
    }
}

impl std::fmt::Debug for SageOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SageOptions")
            .field("solve", &self.solve)
            .field("presolve", &self.presolve)
            .field("backend", &self.backend.name())
            .finish()
    }
}

/// Outcome of a membership test together with the optimal slack.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership<W> {
    Feasible { witness: W, slack: f64 },
    Infeasible { slack: f64 },
}

impl<W> Membership<W> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Membership::Feasible { .. })
    }

    pub fn slack(&self) -> f64 {
        match self {
            Membership::Feasible { slack, .. } | Membership::Infeasible { slack } => *slack,
        }
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Membership::Feasible { witness, .. } => Some(witness),
            Membership::Infeasible { .. } => None,
        }
    }
}

/// Dual witness for one conditional AGE inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeWitness {
    pub index: usize,
    /// One entry per row other than `index`, in row order.
    pub v: Vec<f64>,
    pub lam: Vec<f64>,
    /// `t >= σ_X(λ)`.
    pub support_bound: f64,
}

/// One AGE summand of a SAGE certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateBlock {
    #[serde(rename = "i")]
    pub index: usize,
    #[serde(rename = "c")]
    pub coeffs: Vec<f64>,
    pub v: Vec<f64>,
    pub lam: Vec<f64>,
    pub t: f64,
}

impl CertificateBlock {
    pub fn witness(&self) -> AgeWitness {
        AgeWitness {
            index: self.index,
            v: self.v.clone(),
            lam: self.lam.clone(),
            support_bound: self.t,
        }
    }
}

/// Decomposition of a modulated signomial into conditional AGE pieces.
///
/// `shift` is set for certificates produced by the bound computation: the
/// certified signomial is then `f - shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SageCertificate {
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    /// Rows of `E_{p+1}(A)` the block coefficients refer to.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exponents: Vec<Vec<f64>>,
    pub blocks: Vec<CertificateBlock>,
    /// Largest recomputed constraint violation.
    pub residual: f64,
}

impl SageCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// `D(v, c) = Σ v_j ln(v_j / c_j)` with `0·ln(0/c) = 0` and `+∞` when
/// `v_j > 0 = c_j`.
pub fn relative_entropy(v: &[f64], c: &[f64]) -> f64 {
    v.iter()
        .zip(c)
        .map(|(vj, cj)| {
            if *vj <= 0.0 {
                0.0
            } else if *cj <= 0.0 {
                f64::INFINITY
            } else {
                vj * (vj / cj).ln()
            }
        })
        .sum()
}

/// `{i : c_i < 0}` plus one designated index: the zero-exponent row when
/// present, else `0`. Sorted ascending.
pub fn presolve_negative_indices(c: &[f64], rows: &[Vec<f64>]) -> Vec<usize> {
    let designated = rows
        .iter()
        .position(|r| r.iter().all(|x| *x == 0.0))
        .unwrap_or(0);
    let mut out: Vec<usize> = (0..c.len()).filter(|&i| c[i] < 0.0).collect();
    if !out.contains(&designated) {
        out.push(designated);
        out.sort_unstable();
    }
    out
}

pub(crate) struct BlockVars {
    index: usize,
    coeffs: Vec<AffineExpr>,
    v: Vec<Option<Var>>,
    lam: Vec<Var>,
    t: Var,
}

fn is_const_zero(e: &AffineExpr) -> bool {
    e.terms.is_empty() && e.constant == 0.0
}

/// Appends the conditional AGE constraints for row `i` with coefficient
/// expressions `coeffs` (constants or variables).
fn add_age_block(
    prog: &mut ConicProgram,
    rows: &[Vec<f64>],
    i: usize,
    coeffs: Vec<AffineExpr>,
    set: &ConvexSet,
    slack: Option<Var>,
) -> Result<BlockVars, SageError> {
    let n = rows[i].len();
    let mut v = vec![None; rows.len()];
    let mut tie = AffineExpr::zero();
    for j in (0..rows.len()).filter(|&j| j != i) {
        if is_const_zero(&coeffs[j]) {
            continue;
        }
        if !coeffs[j].terms.is_empty() {
            prog.add_ge(coeffs[j].clone());
        }
        let vj = prog.new_var();
        let uj = prog.new_var();
        prog.add_relative_entropy_epigraph(
            AffineExpr::var(vj),
            coeffs[j].clone(),
            AffineExpr::var(uj),
        );
        tie = tie.add_term(uj, 1.0).add_term(vj, -1.0);
        v[j] = Some(vj);
    }
    let lam = prog.new_vars(n);
    let t = prog.new_var();
    set.support_epigraph(&lam, t, prog)?;

    tie = tie.add_term(t, 1.0).plus(&coeffs[i].clone().negated());
    if let Some(s) = slack {
        tie = tie.add_term(s, -1.0);
    }
    prog.add_le(tie);

    for k in 0..n {
        let mut e = AffineExpr::var(lam[k]);
        for (j, vj) in v.iter().enumerate() {
            if let Some(vj) = vj {
                e = e.add_term(*vj, rows[j][k] - rows[i][k]);
            }
        }
        prog.add_eq(e);
    }
    Ok(BlockVars {
        index: i,
        coeffs,
        v,
        lam,
        t,
    })
}

// Reads a block back, clamping the entropy variables into their domain and
// projecting λ onto the domain of σ_X.
fn read_block(res: &SolveResult, b: &BlockVars, set: &ConvexSet) -> CertificateBlock {
    let coeffs: Vec<f64> = b.coeffs.iter().map(|e| e.eval(&res.primal)).collect();
    let v: Vec<f64> =
        b.v.iter()
            .enumerate()
            .filter(|(j, _)| *j != b.index)
            .map(|(j, vj)| match vj {
                Some(var) if coeffs[j] > 0.0 => res.value(*var).max(0.0),
                _ => 0.0,
            })
            .collect();
    let lam = project_to_support_domain(set, res.values(&b.lam));
    CertificateBlock {
        index: b.index,
        coeffs,
        v,
        lam,
        t: res.value(b.t),
    }
}

/// Snaps `λ` onto the domain of `σ_X` for sets whose domain is a proper
/// cone (infinite box sides, full space), removing solver round-off.
fn project_to_support_domain(set: &ConvexSet, mut lam: Vec<f64>) -> Vec<f64> {
    match set {
        ConvexSet::FullSpace { .. } => lam.iter_mut().for_each(|x| *x = 0.0),
        ConvexSet::Box { lower, upper } => {
            for ((l, lo), hi) in lam.iter_mut().zip(lower).zip(upper) {
                if hi.is_infinite() {
                    *l = l.min(0.0);
                }
                if lo.is_infinite() {
                    *l = l.max(0.0);
                }
            }
        }
        _ => {}
    }
    lam
}

pub(crate) fn check_status(res: &SolveResult) -> Result<(), SageError> {
    match res.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Unbounded => Err(SageError::EmptySet),
        status => Err(SageError::Numerical {
            status,
            residual: res.primal_residual,
        }),
    }
}

/// Conditional AGE membership of `c` for row `i`.
///
/// A negative entry of `c` away from `i` puts `c` outside the cone by
/// definition and returns `Infeasible` with infinite slack.
pub fn age_membership(
    c: &[f64],
    rows: &[Vec<f64>],
    i: usize,
    set: &ConvexSet,
    opts: &SageOptions,
) -> Result<Membership<AgeWitness>, SageError> {
    if c.len() != rows.len() || rows.is_empty() {
        return Err(SageError::DimensionMismatch(format!(
            "{} coefficients for {} rows",
            c.len(),
            rows.len()
        )));
    }
    if i >= rows.len() {
        return Err(SageError::DimensionMismatch(format!(
            "index {i} out of range for {} rows",
            rows.len()
        )));
    }
    let n = set.validate()?;
    if rows.iter().any(|r| r.len() != n) {
        return Err(SageError::DimensionMismatch(format!(
            "exponent rows must have length {n}"
        )));
    }
    if c.iter().enumerate().any(|(j, cj)| j != i && *cj < 0.0) {
        return Ok(Membership::Infeasible {
            slack: f64::INFINITY,
        });
    }

    let mut prog = ConicProgram::new();
    let s = prog.new_var();
    let coeffs = c.iter().map(|x| AffineExpr::constant(*x)).collect();
    let block = add_age_block(&mut prog, rows, i, coeffs, set, Some(s))?;
    prog.minimize(AffineExpr::var(s));
    let res = prog.solve(opts.backend.as_ref(), &opts.solve)?;
    check_status(&res)?;

    let slack = res.value(s);
    if slack > opts.solve.feas_tol {
        return Ok(Membership::Infeasible { slack });
    }
    let read = read_block(&res, &block, set);
    Ok(Membership::Feasible {
        witness: read.witness(),
        slack,
    })
}

/// The data a level-`p` SAGE program is built from.
pub(crate) struct LevelData {
    map: ModulationMap,
    /// Target coefficients `M c` on the lattice rows.
    target: Vec<f64>,
}

impl LevelData {
    pub(crate) fn new(f: &Signomial, p: usize) -> Self {
        let map = ModulationMap::new(f.exponents(), p);
        let target = map.apply(f.coeffs());
        LevelData { map, target }
    }

    fn rows(&self) -> &[Vec<f64>] {
        &self.map.lattice.rows
    }
}

/// Builds the joint program: one AGE block per index in `blocks`, coupled by
/// `Σ_i c^(i)_r = target_r(z)`. Rows with an identically-zero target are
/// fixed to zero outside their own block.
pub(crate) fn build_sage_program(
    prog: &mut ConicProgram,
    rows: &[Vec<f64>],
    target: &[AffineExpr],
    block_indices: &[usize],
    set: &ConvexSet,
    slack: Option<Var>,
) -> Result<Vec<BlockVars>, SageError> {
    let ell = rows.len();
    let mut sums: Vec<AffineExpr> = target.iter().map(|e| e.clone().negated()).collect();
    let mut blocks = Vec::with_capacity(block_indices.len());
    for &i in block_indices {
        let coeffs: Vec<AffineExpr> = (0..ell)
            .map(|r| {
                if r != i && is_const_zero(&target[r]) {
                    AffineExpr::zero()
                } else {
                    let var = prog.new_var();
                    sums[r] = std::mem::take(&mut sums[r]).add_term(var, 1.0);
                    AffineExpr::var(var)
                }
            })
            .collect();
        blocks.push(add_age_block(prog, rows, i, coeffs, set, slack)?);
    }
    for (r, e) in sums.into_iter().enumerate() {
        if e.terms.is_empty() {
            if e.constant != 0.0 {
                // Nonzero target but no block carries this row: impossible
                // only if presolve dropped a needed index.
                return Err(SageError::StructuralMismatch(format!(
                    "row {r} has target {} but no block variable",
                    -e.constant
                )));
            }
            continue;
        }
        prog.add_eq(e);
    }
    Ok(blocks)
}

pub(crate) fn check_dims(f: &Signomial, set: &ConvexSet) -> Result<usize, SageError> {
    let n = set.validate()?;
    if f.dim() != n {
        return Err(SageError::DimensionMismatch(format!(
            "signomial in R^{} but set in R^{n}",
            f.dim()
        )));
    }
    Ok(n)
}

/// Level-`p` conditional SAGE membership of `f` on `set`.
///
/// `f` is canonicalized first, so the modulator `(Σ_j exp(A_j · x))^p`
/// runs over its distinct exponent rows.
pub fn sage_membership(
    f: &Signomial,
    set: &ConvexSet,
    p: usize,
    opts: &SageOptions,
) -> Result<Membership<SageCertificate>, SageError> {
    check_dims(f, set)?;
    // Duplicate rows would otherwise be counted twice by the modulator.
    let f = &f.canonicalize();
    let level = LevelData::new(f, p);
    let rows = level.rows();
    let block_indices: Vec<usize> = if opts.presolve {
        presolve_negative_indices(&level.target, rows)
    } else {
        (0..rows.len()).collect()
    };

    let mut prog = ConicProgram::new();
    let s = prog.new_var();
    let target: Vec<AffineExpr> = level
        .target
        .iter()
        .map(|x| AffineExpr::constant(*x))
        .collect();
    let blocks = build_sage_program(&mut prog, rows, &target, &block_indices, set, Some(s))?;
    prog.minimize(AffineExpr::var(s));
    let res = prog.solve(opts.backend.as_ref(), &opts.solve)?;
    check_status(&res)?;

    let slack = res.value(s);
    if slack > opts.solve.feas_tol {
        return Ok(Membership::Infeasible { slack });
    }
    let cert = assemble_certificate(&res, &blocks, rows, &level.target, set, p, None)?;
    Ok(Membership::Feasible {
        witness: cert,
        slack,
    })
}

pub(crate) fn assemble_certificate(
    res: &SolveResult,
    blocks: &[BlockVars],
    rows: &[Vec<f64>],
    target: &[f64],
    set: &ConvexSet,
    level: usize,
    shift: Option<f64>,
) -> Result<SageCertificate, SageError> {
    let mut cert = SageCertificate {
        level,
        shift,
        exponents: rows.to_vec(),
        blocks: blocks.iter().map(|b| read_block(res, b, set)).collect(),
        residual: 0.0,
    };
    let checks = constraint_checks(&cert, rows, target, set, 0.0)?;
    cert.residual = checks.iter().map(|c| c.violation).fold(0.0, f64::max);
    Ok(cert)
}

/// A single named check in a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Block position within the certificate, when block-specific.
    pub block: Option<usize>,
    /// Amount by which the constraint is violated (0 when satisfied).
    pub violation: f64,
    /// Smallest sampled value, for the sampling checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimum: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    /// `false` when the set is unbounded and the sampling leg was skipped.
    pub sampled: bool,
    pub passed: bool,
}

impl VerificationReport {
    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(|c| c.violation).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: 1e-6,
            samples: 200,
            seed: 0,
        }
    }
}

fn check(name: &str, block: Option<usize>, violation: f64, tol: f64) -> CheckResult {
    let violation = if violation.is_nan() {
        f64::INFINITY
    } else {
        violation.max(0.0)
    };
    CheckResult {
        name: name.to_string(),
        block,
        violation,
        minimum: None,
        passed: violation <= tol,
    }
}

fn sampled_check(name: &str, block: Option<usize>, minimum: f64, tol: f64) -> CheckResult {
    CheckResult {
        minimum: Some(minimum),
        ..check(name, block, -minimum, tol)
    }
}

/// Recomputes every algebraic constraint of the certificate.
fn constraint_checks(
    cert: &SageCertificate,
    rows: &[Vec<f64>],
    target: &[f64],
    set: &ConvexSet,
    tol: f64,
) -> Result<Vec<CheckResult>, SageError> {
    let ell = rows.len();
    let n = set.validate()?;
    let mut out = Vec::new();

    let coupling = (0..ell)
        .map(|r| (cert.blocks.iter().map(|b| b.coeffs[r]).sum::<f64>() - target[r]).abs())
        .fold(0.0, f64::max);
    out.push(check(
        "coupling sum equals modulated coefficients",
        None,
        coupling,
        tol,
    ));

    for (k, b) in cert.blocks.iter().enumerate() {
        let i = b.index;
        let others: Vec<usize> = (0..ell).filter(|&j| j != i).collect();
        let c_rest: Vec<f64> = others.iter().map(|&j| b.coeffs[j]).collect();

        let neg_c = c_rest.iter().map(|x| -x).fold(0.0, f64::max);
        out.push(check(
            "coefficients off the index are nonnegative",
            Some(k),
            neg_c,
            tol,
        ));
        let neg_v = b.v.iter().map(|x| -x).fold(0.0, f64::max);
        out.push(check("v is nonnegative", Some(k), neg_v, tol));

        let d = relative_entropy(&b.v, &c_rest);
        let tie = b.t + d - b.v.iter().sum::<f64>() - b.coeffs[i];
        out.push(check("t + D(v, c) - sum(v) <= c_i", Some(k), tie, tol));

        let mut balance: f64 = 0.0;
        for (dim, lam_d) in b.lam.iter().enumerate().take(n) {
            let s: f64 = others
                .iter()
                .zip(&b.v)
                .map(|(&j, vj)| vj * (rows[j][dim] - rows[i][dim]))
                .sum::<f64>()
                + lam_d;
            balance = balance.max(s.abs());
        }
        out.push(check(
            "exponent balance (A_j - A_i)^T v + lam = 0",
            Some(k),
            balance,
            tol,
        ));

        let sigma = set.support_value(&b.lam)?;
        out.push(check(
            "support function sigma(lam) <= t",
            Some(k),
            sigma - b.t,
            tol,
        ));
    }
    Ok(out)
}

fn check_structure(cert: &SageCertificate, rows: &[Vec<f64>], n: usize) -> Result<(), SageError> {
    let ell = rows.len();
    let bad = |m: String| Err(SageError::StructuralMismatch(m));
    if !cert.exponents.is_empty() && cert.exponents != rows {
        return bad(format!(
            "certificate exponents do not match E_{}(A)",
            cert.level + 1
        ));
    }
    for (k, b) in cert.blocks.iter().enumerate() {
        if b.index >= ell {
            return bad(format!("block {k}: index {} >= {ell}", b.index));
        }
        if b.coeffs.len() != ell {
            return bad(format!(
                "block {k}: {} coefficients, expected {ell}",
                b.coeffs.len()
            ));
        }
        if b.v.len() + 1 != ell {
            return bad(format!(
                "block {k}: v has length {}, expected {}",
                b.v.len(),
                ell - 1
            ));
        }
        if b.lam.len() != n {
            return bad(format!(
                "block {k}: lam has length {}, expected {n}",
                b.lam.len()
            ));
        }
    }
    Ok(())
}

/// Lattice rows and target coefficients a certificate must decompose.
pub(crate) fn certified_target(
    f: &Signomial,
    level: usize,
    shift: Option<f64>,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    match shift {
        None => {
            let data = LevelData::new(f, level);
            (data.map.lattice.rows.clone(), data.target)
        }
        Some(lambda) => {
            let (g, k) = f.ensure_constant_term();
            let map = ModulationMap::new(g.exponents(), level);
            let mut c = g.coeffs().to_vec();
            c[k] -= lambda;
            let target = map.apply(&c);
            (map.lattice.rows, target)
        }
    }
}

/// Re-checks a certificate against `f` and `set`.
///
/// Besides the algebraic constraints, bounded sets are sampled: every AGE
/// piece, divided by its own exponential `exp(Ã_i · x)`, and `f - shift`
/// must stay above `-tol` at all sample points. Those normalized forms have
/// the same sign as the raw summands but stay on the scale of the
/// certificate residual.
pub fn verify_certificate(
    cert: &SageCertificate,
    f: &Signomial,
    set: &ConvexSet,
    opts: &VerifyOptions,
) -> Result<VerificationReport, SageError> {
    let n = check_dims(f, set)?;
    let f = &f.canonicalize();
    let (rows, target) = certified_target(f, cert.level, cert.shift);
    check_structure(cert, &rows, n)?;
    let mut checks = constraint_checks(cert, &rows, &target, set, opts.tol)?;

    let points = match set.sample_points(opts.samples, opts.seed) {
        Ok(p) => Some(p),
        Err(SetError::Unbounded) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(points) = &points {
        for (k, b) in cert.blocks.iter().enumerate() {
            let i = b.index;
            let mut worst = f64::INFINITY;
            for x in points {
                let base = dot(&rows[i], x);
                let h: f64 = rows
                    .iter()
                    .zip(&b.coeffs)
                    .map(|(r, c)| c * (dot(r, x) - base).exp())
                    .sum();
                worst = worst.min(h);
            }
            checks.push(sampled_check(
                "sampled AGE piece minimum >= 0",
                Some(k),
                worst,
                opts.tol,
            ));
        }
        let shift = cert.shift.unwrap_or(0.0);
        let mut worst = f64::INFINITY;
        for x in points {
            worst = worst.min(f.evaluate(x)? - shift);
        }
        checks.push(sampled_check(
            "sampled signomial minimum >= 0",
            None,
            worst,
            opts.tol,
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        checks,
        sampled: points.is_some(),
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Signomial, ConvexSet) {
        let f = Signomial::new(
            vec![vec![1.5, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            vec![1.0, -1.0, -1.0],
        )
        .unwrap();
        let x = ConvexSet::Polyhedron {
            w: vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            b: vec![1.0, -1.0, 1.0, 1.0],
        };
        (f, x)
    }

    #[test]
    fn entropy_conventions() {
        assert_eq!(relative_entropy(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_eq!(relative_entropy(&[1.0], &[0.0]), f64::INFINITY);
        let e = std::f64::consts::E;
        assert!((relative_entropy(&[1.0], &[e]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn presolve_examples() {
        let rows = vec![vec![1.5, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        assert_eq!(
            presolve_negative_indices(&[1.0, -1.0, -1.0], &rows),
            vec![0, 1, 2]
        );
        assert_eq!(presolve_negative_indices(&[1.0, 2.0, 0.0], &rows), vec![0]);
        let with_const = vec![vec![1.0], vec![0.0], vec![-1.0]];
        assert_eq!(
            presolve_negative_indices(&[1.0, 2.0, 3.0], &with_const),
            vec![1]
        );
        assert_eq!(
            presolve_negative_indices(&[-1.0, 2.0, 3.0], &with_const),
            vec![0, 1]
        );
    }

    #[test]
    fn am_gm_age_on_full_space() {
        let rows = vec![vec![1.0], vec![-1.0], vec![0.0]];
        let m = age_membership(
            &[1.0, 1.0, -2.0],
            &rows,
            2,
            &ConvexSet::full_space(1),
            &SageOptions::default(),
        )
        .unwrap();
        let w = m.witness().expect("AM/GM instance is AGE");
        assert!((w.v[0] - 1.0).abs() < 1e-6, "{:?}", w.v);
        assert!((w.v[1] - 1.0).abs() < 1e-6, "{:?}", w.v);
        assert_eq!(w.lam, vec![0.0]);
    }

    #[test]
    fn nonnegative_age_is_trivial() {
        let rows = vec![vec![1.0], vec![-1.0], vec![0.0]];
        let m = age_membership(
            &[1.0, 0.5, 2.0],
            &rows,
            0,
            &ConvexSet::unit_box(1, -1.0, 1.0),
            &SageOptions::default(),
        )
        .unwrap();
        assert!(m.is_feasible());
    }

    #[test]
    fn exp_minus_three_is_not_age() {
        let rows = vec![vec![1.0], vec![0.0]];
        let m = age_membership(
            &[1.0, -3.0],
            &rows,
            1,
            &ConvexSet::full_space(1),
            &SageOptions::default(),
        )
        .unwrap();
        assert!(!m.is_feasible());
        assert!(m.slack() > 1.0);
    }

    #[test]
    fn negative_off_index_is_outside_cone() {
        let rows = vec![vec![1.0], vec![0.0]];
        let m = age_membership(
            &[-1.0, 3.0],
            &rows,
            1,
            &ConvexSet::full_space(1),
            &SageOptions::default(),
        )
        .unwrap();
        assert_eq!(
            m,
            Membership::Infeasible {
                slack: f64::INFINITY
            }
        );
    }

    #[test]
    fn age_dimension_errors() {
        let rows = vec![vec![1.0], vec![0.0]];
        let opts = SageOptions::default();
        assert!(age_membership(&[1.0], &rows, 0, &ConvexSet::full_space(1), &opts).is_err());
        assert!(age_membership(&[1.0, 1.0], &rows, 5, &ConvexSet::full_space(1), &opts).is_err());
        assert!(age_membership(&[1.0, 1.0], &rows, 0, &ConvexSet::full_space(2), &opts).is_err());
    }

    #[test]
    fn toy_level_zero_fails_level_one_succeeds() {
        let (f, x) = toy();
        let opts = SageOptions::default();
        let m0 = sage_membership(&f, &x, 0, &opts).unwrap();
        assert!(!m0.is_feasible(), "slack {}", m0.slack());
        let m1 = sage_membership(&f, &x, 1, &opts).unwrap();
        assert!(m1.is_feasible(), "slack {}", m1.slack());
        let cert = m1.witness().unwrap();
        assert!(cert.residual < 1e-6, "residual {}", cert.residual);
        let report = verify_certificate(cert, &f, &x, &VerifyOptions::default()).unwrap();
        assert!(
            report.passed,
            "{:#?}",
            report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn corrupted_certificate_fails_verification() {
        let (f, x) = toy();
        let m1 = sage_membership(&f, &x, 1, &SageOptions::default()).unwrap();
        let mut cert = m1.witness().unwrap().clone();
        cert.blocks[0].v[0] += 1.0;
        let report = verify_certificate(&cert, &f, &x, &VerifyOptions::default()).unwrap();
        assert!(!report.passed);
        assert!(report.failures().any(|c| c.block == Some(0)));
    }

    #[test]
    fn positive_coefficients_certify_at_every_level() {
        let f = Signomial::new(vec![vec![1.0, 0.0], vec![0.0, -2.0]], vec![0.5, 3.0]).unwrap();
        let x = ConvexSet::unit_box(2, -1.0, 1.0);
        for p in 0..3 {
            let m = sage_membership(&f, &x, p, &SageOptions::default()).unwrap();
            let cert = m.witness().expect("positive signomial is SAGE");
            let r = verify_certificate(cert, &f, &x, &VerifyOptions::default()).unwrap();
            assert!(r.passed);
        }
    }

    #[test]
    fn structural_mismatch_detected() {
        let (f, x) = toy();
        let m1 = sage_membership(&f, &x, 1, &SageOptions::default()).unwrap();
        let mut cert = m1.witness().unwrap().clone();
        cert.level = 0;
        assert!(matches!(
            verify_certificate(&cert, &f, &x, &VerifyOptions::default()),
            Err(SageError::StructuralMismatch(_))
        ));
    }

    #[test]
    fn certificate_json_roundtrip_is_bit_exact() {
        let (f, x) = toy();
        let m1 = sage_membership(&f, &x, 1, &SageOptions::default()).unwrap();
        let cert = m1.witness().unwrap();
        let text = cert.to_json();
        let back = SageCertificate::from_json(&text).unwrap();
        assert_eq!(&back, cert);
        assert_eq!(back.to_json(), text);
    }
}
