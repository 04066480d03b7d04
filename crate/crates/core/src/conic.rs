//! Solver-agnostic conic programs over the zero, nonnegative, second-order
//! and exponential cones, plus the backend contract used to solve them.
//!
//! The exponential cone is `cl{(x, y, z) : y > 0, y·exp(x/y) <= z}`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("variable index {index} out of range for {num_vars} variables")]
    BadVariable { index: usize, num_vars: usize },
    #[error("backend failure: {0}")]
    BackendFailure(String),
    #[error("unknown solver backend `{0}`")]
    UnknownBackend(String),
    #[error("malformed program JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Handle to a decision variable of a [`ConicProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Var(pub usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// `Σ coeff·z[index] + constant`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        AffineExpr {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn var(v: Var) -> Self {
        AffineExpr {
            terms: vec![(v.0, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(v: Var, coeff: f64) -> Self {
        AffineExpr {
            terms: vec![(v.0, coeff)],
            constant: 0.0,
        }
    }

    pub fn sum_of(vars: &[Var]) -> Self {
        AffineExpr {
            terms: vars.iter().map(|v| (v.0, 1.0)).collect(),
            constant: 0.0,
        }
    }

    pub fn add_term(mut self, v: Var, coeff: f64) -> Self {
        if coeff != 0.0 {
            self.terms.push((v.0, coeff));
        }
        self
    }

    pub fn add_constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    pub fn plus(mut self, other: &AffineExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }

    pub fn scaled(mut self, alpha: f64) -> Self {
        for (_, c) in self.terms.iter_mut() {
            *c *= alpha;
        }
        self.constant *= alpha;
        self
    }

    pub fn negated(self) -> Self {
        self.scaled(-1.0)
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(i, c)| c * z[*i]).sum::<f64>() + self.constant
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|(i, _)| *i).max()
    }
}

/// Sparse row `Σ coeff·z[index]` compared against `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearRow {
    fn from_expr(e: AffineExpr) -> Self {
        LinearRow {
            terms: e.terms,
            rhs: -e.constant,
        }
    }

    fn lhs(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(i, c)| c * z[*i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocCone {
    pub t: AffineExpr,
    pub u: Vec<AffineExpr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub expr: AffineExpr,
}

/// Linear objective over linear equalities/inequalities, exponential-cone
/// triples and second-order cones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub num_vars: usize,
    pub objective: Objective,
    /// `terms · z = rhs`
    pub lin_eq: Vec<LinearRow>,
    /// `terms · z <= rhs`
    pub lin_ineq: Vec<LinearRow>,
    pub exp_cones: Vec<[AffineExpr; 3]>,
    pub soc_cones: Vec<SocCone>,
}

impl Default for ConicProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl ConicProgram {
    pub fn new() -> Self {
        ConicProgram {
            num_vars: 0,
            objective: Objective {
                sense: Sense::Minimize,
                expr: AffineExpr::zero(),
            },
            lin_eq: Vec::new(),
            lin_ineq: Vec::new(),
            exp_cones: Vec::new(),
            soc_cones: Vec::new(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars - 1)
    }

    pub fn new_vars(&mut self, count: usize) -> Vec<Var> {
        (0..count).map(|_| self.new_var()).collect()
    }

    pub fn minimize(&mut self, expr: AffineExpr) {
        self.objective = Objective {
            sense: Sense::Minimize,
            expr,
        };
    }

    pub fn maximize(&mut self, expr: AffineExpr) {
        self.objective = Objective {
            sense: Sense::Maximize,
            expr,
        };
    }

    /// `expr == 0`
    pub fn add_eq(&mut self, expr: AffineExpr) {
        self.lin_eq.push(LinearRow::from_expr(expr));
    }

    /// `expr <= 0`
    pub fn add_le(&mut self, expr: AffineExpr) {
        self.lin_ineq.push(LinearRow::from_expr(expr));
    }

    /// `expr >= 0`
    pub fn add_ge(&mut self, expr: AffineExpr) {
        self.add_le(expr.negated());
    }

    pub fn add_exp_cone(&mut self, x: AffineExpr, y: AffineExpr, z: AffineExpr) {
        self.exp_cones.push([x, y, z]);
    }

    /// `‖u‖₂ <= t`
    pub fn add_soc(&mut self, t: AffineExpr, u: Vec<AffineExpr>) {
        self.soc_cones.push(SocCone { t, u });
    }

    /// `v·ln(v/c) <= u`, as the exponential-cone triple `(-u, v, c)`.
    ///
    /// The closure of the cone gives `v = 0` whenever `c = 0`, with the
    /// `0·ln 0 = 0` convention.
    pub fn add_relative_entropy_epigraph(&mut self, v: AffineExpr, c: AffineExpr, u: AffineExpr) {
        self.add_exp_cone(u.negated(), v, c);
    }

    /// Checks that every referenced variable is declared.
    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.num_vars;
        let rows = self.lin_eq.iter().chain(&self.lin_ineq);
        let mut max = rows.flat_map(|r| r.terms.iter().map(|(i, _)| *i)).max();
        let exprs = self
            .exp_cones
            .iter()
            .flat_map(|c| c.iter())
            .chain(
                self.soc_cones
                    .iter()
                    .flat_map(|s| std::iter::once(&s.t).chain(&s.u)),
            )
            .chain(std::iter::once(&self.objective.expr));
        for e in exprs {
            max = max.max(e.max_index());
        }
        match max {
            Some(i) if i >= n => Err(ConicError::BadVariable {
                index: i,
                num_vars: n,
            }),
            _ => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("conic program serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ConicError> {
        let prog: ConicProgram = serde_json::from_str(s)?;
        prog.validate()?;
        Ok(prog)
    }

    pub fn objective_value(&self, z: &[f64]) -> f64 {
        self.objective.expr.eval(z)
    }

    /// Largest absolute violation of any constraint at `z`.
    pub fn primal_residual(&self, z: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.lin_eq {
            worst = worst.max((row.lhs(z) - row.rhs).abs());
        }
        for row in &self.lin_ineq {
            worst = worst.max(row.lhs(z) - row.rhs);
        }
        for [x, y, w] in &self.exp_cones {
            worst = worst.max(exp_cone_violation(x.eval(z), y.eval(z), w.eval(z)));
        }
        for soc in &self.soc_cones {
            let norm = soc.u.iter().map(|e| e.eval(z).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(norm - soc.t.eval(z));
        }
        worst.max(0.0)
    }

    pub fn solve(
        &self,
        backend: &dyn SolverBackend,
        opts: &SolveOptions,
    ) -> Result<SolveResult, ConicError> {
        backend.solve(self, opts)
    }
}

/// Violation of `(x, y, z) ∈ K_exp`: the smallest of the shifts in `z`
/// (`y·exp(x/y) - z`) or in `x` (`x - y·ln(z/y)`) that restore membership,
/// and the violation of the `y = 0` face `{x <= 0, y = 0, z >= 0}`.
pub fn exp_cone_violation(x: f64, y: f64, z: f64) -> f64 {
    let face = x.max(0.0).max(y.abs()).max(-z);
    if y <= 0.0 {
        return face;
    }
    let mut direct = (y * (x / y).exp() - z).max(0.0);
    if z > 0.0 {
        direct = direct.min((x - y * (z / y).ln()).max(0.0));
    }
    if direct.is_finite() {
        direct.min(face)
    } else {
        face
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Meaningful only for [`SolveStatus::Optimal`].
    pub objective_value: f64,
    pub primal: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SolveResult {
    pub fn value(&self, v: Var) -> f64 {
        self.primal[v.0]
    }

    pub fn values(&self, vars: &[Var]) -> Vec<f64> {
        vars.iter().map(|v| self.primal[v.0]).collect()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolveOptions {
    /// Bound on the constraint residual of an optimal point, scaled by
    /// `max(1, ‖z‖∞)`.
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// A conic solver. Implementations must be deterministic for fixed options
/// and callable concurrently on distinct programs.
pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, prog: &ConicProgram, opts: &SolveOptions) -> Result<SolveResult, ConicError>;
}

/// Interior-point backend built on the `clarabel` crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelBackend;

/// Looks a backend up by name (`"clarabel"` is the only one shipped).
pub fn backend_by_name(name: &str) -> Result<Box<dyn SolverBackend>, ConicError> {
    match name {
        "clarabel" => Ok(Box::new(ClarabelBackend)),
        other => Err(ConicError::UnknownBackend(other.to_string())),
    }
}

struct Triplets {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
}

impl Triplets {
    // Appends a row so that the slack `s = b - A z` equals `sign · expr`.
    fn push(&mut self, expr_terms: &[(usize, f64)], constant: f64, sign: f64) {
        let r = self.b.len();
        for (i, c) in expr_terms {
            if *c != 0.0 {
                self.rows.push(r);
                self.cols.push(*i);
                self.vals.push(-sign * c);
            }
        }
        self.b.push(sign * constant);
    }
}

impl SolverBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, prog: &ConicProgram, opts: &SolveOptions) -> Result<SolveResult, ConicError> {
        prog.validate()?;
        let n = prog.num_vars;
        let mut t = Triplets {
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
            b: Vec::new(),
        };
        let mut cones: Vec<SupportedConeT<f64>> = Vec::new();

        for row in &prog.lin_eq {
            t.push(&row.terms, -row.rhs, 1.0);
        }
        if !prog.lin_eq.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(prog.lin_eq.len()));
        }
        // a·z <= rhs  <=>  rhs - a·z >= 0
        for row in &prog.lin_ineq {
            t.push(&row.terms, -row.rhs, -1.0);
        }
        if !prog.lin_ineq.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(prog.lin_ineq.len()));
        }
        for soc in &prog.soc_cones {
            t.push(&soc.t.terms, soc.t.constant, 1.0);
            for u in &soc.u {
                t.push(&u.terms, u.constant, 1.0);
            }
            cones.push(SupportedConeT::SecondOrderConeT(1 + soc.u.len()));
        }
        for triple in &prog.exp_cones {
            for e in triple {
                t.push(&e.terms, e.constant, 1.0);
            }
            cones.push(SupportedConeT::ExponentialConeT());
        }

        let m = t.b.len();
        let a = CscMatrix::new_from_triplets(m, n, t.rows, t.cols, t.vals);
        let p = CscMatrix::zeros((n, n));
        let sign = match prog.objective.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut q = vec![0.0; n];
        for (i, c) in &prog.objective.expr.terms {
            q[*i] += sign * c;
        }

        let mut best: Option<SolveResult> = None;
        for settings in settings_ladder(opts) {
            let mut solver = DefaultSolver::new(&p, &q, &a, &t.b, &cones, settings)
                .map_err(|e| ConicError::BackendFailure(format!("{e:?}")))?;
            solver.solve();
            let result = classify(prog, &solver.solution, opts);
            if result.status != SolveStatus::NumericalTrouble {
                return Ok(result);
            }
            if best
                .as_ref()
                .is_none_or(|b| result.primal_residual < b.primal_residual)
            {
                best = Some(result);
            }
        }
        Ok(best.expect("ladder is non-empty"))
    }
}

/// Settings tried in order until one run is conclusive. The first aims well
/// past the requested tolerances and accepts an early "almost solved" exit
/// only at the requested ones; the later ones trade accuracy targets for
/// robustness when the first stalls.
fn settings_ladder(opts: &SolveOptions) -> Vec<DefaultSettings<f64>> {
    let base = DefaultSettings {
        verbose: false,
        max_iter: opts.max_iter,
        max_threads: 1,
        ..DefaultSettings::default()
    };
    vec![
        DefaultSettings {
            tol_feas: opts.feas_tol * 1e-3,
            tol_gap_abs: opts.gap_tol * 1e-6,
            tol_gap_rel: opts.gap_tol * 1e-6,
            reduced_tol_feas: opts.feas_tol,
            reduced_tol_gap_abs: opts.gap_tol,
            reduced_tol_gap_rel: opts.gap_tol,
            ..base.clone()
        },
        DefaultSettings {
            tol_feas: opts.feas_tol * 1e-2,
            tol_gap_abs: opts.gap_tol * 1e-2,
            tol_gap_rel: opts.gap_tol * 1e-2,
            reduced_tol_feas: opts.feas_tol,
            reduced_tol_gap_abs: opts.gap_tol,
            reduced_tol_gap_rel: opts.gap_tol,
            ..base.clone()
        },
        DefaultSettings {
            tol_feas: opts.feas_tol * 1e-2,
            tol_gap_abs: opts.gap_tol,
            tol_gap_rel: opts.gap_tol,
            equilibrate_enable: false,
            static_regularization_constant: 1e-7,
            iterative_refinement_reltol: 1e-14,
            iterative_refinement_abstol: 1e-14,
            iterative_refinement_max_iter: 30,
            ..base
        },
    ]
}

fn classify(
    prog: &ConicProgram,
    sol: &clarabel::solver::DefaultSolution<f64>,
    opts: &SolveOptions,
) -> SolveResult {
    let primal = sol.x.clone();
    let primal_residual = prog.primal_residual(&primal);
    // Residuals are judged relative to the size of the iterate, as the
    // backend's own stopping rule does.
    let scale = primal.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            if primal_residual <= opts.feas_tol * scale && primal.iter().all(|x| x.is_finite()) {
                SolveStatus::Optimal
            } else {
                SolveStatus::NumericalTrouble
            }
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        _ => SolveStatus::NumericalTrouble,
    };
    SolveResult {
        status,
        objective_value: prog.objective_value(&primal),
        primal,
        primal_residual,
        dual_residual: sol.r_dual,
    }
}
