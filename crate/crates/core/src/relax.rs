//! Lower bounds `f_p = sup { λ : f - λ ∈ SAGE^(p)(A, X) }` on `inf_X f`.
//!
//! Subtracting `λ` touches only the constant row, and modulation is linear in
//! the coefficients, so the modulated target is `M c - λ M e_k` with `M` the
//! [`ModulationMap`] and `k` the constant row. A single conic solve with `λ`
//! as a free variable therefore gives the bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{AffineExpr, ConicProgram, SolveStatus};
use crate::convexset::{ConvexSet, SetError};
use crate::sage::{
    assemble_certificate, build_sage_program, check_dims, SageCertificate, SageError, SageOptions,
};
use crate::signomial::{ModulationMap, Signomial, SignomialError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Optimal,
    /// `f - λ` is not certifiable for any `λ`; the bound is `-∞`.
    InfeasibleAllLambda,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub level: usize,
    /// Present only when `status` is `Optimal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub status: BoundStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SageCertificate>,
}

/// Rows that may carry a negative target for some `λ`.
fn relaxation_blocks(gc: &[f64], gk: &[f64], designated: usize) -> Vec<usize> {
    (0..gc.len())
        .filter(|&r| gc[r] < 0.0 || gk[r] != 0.0 || r == designated)
        .collect()
}

/// Level-`p` SAGE lower bound on `inf_{x ∈ X} f(x)`, for the canonical
/// form of `f`.
pub fn sage_bound(
    f: &Signomial,
    set: &ConvexSet,
    p: usize,
    opts: &SageOptions,
) -> Result<BoundResult, SageError> {
    check_dims(f, set)?;
    let f = &f.canonicalize();
    let (g, k) = f.ensure_constant_term();
    let map = ModulationMap::new(g.exponents(), p);
    let rows = &map.lattice.rows;
    let gc = map.apply(g.coeffs());
    let gk = map.column(k);
    let zero_row = map
        .lattice
        .find(&vec![0.0; f.dim()])
        .expect("lattice of a signomial with a constant row contains zero");

    let mut prog = ConicProgram::new();
    let lambda = prog.new_var();
    let target: Vec<AffineExpr> = gc
        .iter()
        .zip(&gk)
        .map(|(c, w)| AffineExpr::constant(*c).add_term(lambda, -w))
        .collect();
    let block_indices = if opts.presolve {
        relaxation_blocks(&gc, &gk, zero_row)
    } else {
        (0..rows.len()).collect()
    };
    let blocks = build_sage_program(&mut prog, rows, &target, &block_indices, set, None)?;
    prog.maximize(AffineExpr::var(lambda));
    let res = prog.solve(opts.backend.as_ref(), &opts.solve)?;

    let status = match res.status {
        SolveStatus::Optimal => BoundStatus::Optimal,
        SolveStatus::Infeasible => BoundStatus::InfeasibleAllLambda,
        SolveStatus::Unbounded => BoundStatus::Unbounded,
        SolveStatus::NumericalTrouble => BoundStatus::NumericalTrouble,
    };
    if status != BoundStatus::Optimal {
        return Ok(BoundResult {
            level: p,
            bound: None,
            status,
            certificate: None,
        });
    }
    let bound = res.value(lambda);
    let shifted: Vec<f64> = gc.iter().zip(&gk).map(|(c, w)| c - bound * w).collect();
    let cert = assemble_certificate(&res, &blocks, rows, &shifted, set, p, Some(bound))?;
    Ok(BoundResult {
        level: p,
        bound: Some(bound),
        status,
        certificate: Some(cert),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub level: usize,
    pub previous: f64,
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyScan {
    /// One entry per level actually solved, ordered by `p`.
    pub levels: Vec<BoundResult>,
    pub stopped_early: bool,
    /// Levels whose bound fell below the previous optimal bound by more
    /// than `1e-6`.
    pub violations: Vec<MonotonicityViolation>,
}

/// Monotonicity slack used by [`hierarchy_scan`].
pub const MONOTONE_TOL: f64 = 1e-6;

/// Default early-stop gap for [`hierarchy_scan`].
pub const DEFAULT_STOP_GAP: f64 = 1e-7;

/// Default deepest level for scans.
pub const DEFAULT_MAX_LEVEL: usize = 3;

/// Runs [`sage_bound`] for `p = 0..=p_max`, stopping once two successive
/// optimal bounds differ by less than `stop_gap`. A level that fails
/// numerically is recorded and the scan continues.
pub fn hierarchy_scan(
    f: &Signomial,
    set: &ConvexSet,
    p_max: usize,
    stop_gap: f64,
    opts: &SageOptions,
) -> Result<HierarchyScan, SageError> {
    let mut levels: Vec<BoundResult> = Vec::new();
    let mut violations = Vec::new();
    let mut previous: Option<f64> = None;
    let mut stopped_early = false;
    for p in 0..=p_max {
        let r = sage_bound(f, set, p, opts)?;
        let current = r.bound;
        levels.push(r);
        if let (Some(prev), Some(cur)) = (previous, current) {
            if cur < prev - MONOTONE_TOL {
                violations.push(MonotonicityViolation {
                    level: p,
                    previous: prev,
                    current: cur,
                });
            }
            if (cur - prev).abs() < stop_gap && p < p_max {
                stopped_early = true;
                break;
            }
        }
        if current.is_some() {
            previous = current;
        }
    }
    Ok(HierarchyScan {
        levels,
        stopped_early,
        violations,
    })
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid oracle supports n <= 3, got n = {0}")]
    DimensionCap(usize),
    #[error("grid oracle needs a bounded set")]
    Unbounded,
    #[error("resolution must be positive and finite")]
    BadResolution,
    #[error("no grid point fell inside the set")]
    NoPoints,
    #[error(transparent)]
    Set(SetError),
    #[error(transparent)]
    Signomial(#[from] SignomialError),
}

impl From<SetError> for OracleError {
    fn from(e: SetError) -> Self {
        match e {
            SetError::Unbounded => OracleError::Unbounded,
            other => OracleError::Set(other),
        }
    }
}

const ORACLE_COARSE_POINTS: usize = 20_000;
const ORACLE_KEEP: usize = 10;
const ORACLE_CONTAINS_TOL: f64 = 1e-9;

/// Brute-force upper estimate of `inf_{x ∈ X} f(x)` for bounded `X` in at
/// most three dimensions.
///
/// Evaluates `f` on a coarse grid over the bounding box (including the box
/// faces), on [`ConvexSet::sample_points`], then repeatedly zooms a 9-point
/// per-axis grid around the best points with the spacing divided by four,
/// until the spacing drops below `resolution`. Only points inside `X` count,
/// so the result is always attained by some feasible point.
pub fn grid_oracle(f: &Signomial, set: &ConvexSet, resolution: f64) -> Result<f64, OracleError> {
    let n = set.validate()?;
    if n > 3 {
        return Err(OracleError::DimensionCap(n));
    }
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(OracleError::BadResolution);
    }
    let (lo, hi) = set.bounding_box()?;
    let per_axis = ((ORACLE_COARSE_POINTS as f64).powf(1.0 / n as f64).floor() as usize).max(2);
    let widths: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| b - a).collect();
    let counts: Vec<usize> = widths
        .iter()
        .map(|w| if *w < 1e-12 { 1 } else { per_axis })
        .collect();

    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let consider = |x: Vec<f64>, best: &mut Vec<(f64, Vec<f64>)>| -> Result<(), OracleError> {
        if set.contains(&x, ORACLE_CONTAINS_TOL) {
            let v = f.evaluate(&x)?;
            best.push((v, x));
            if best.len() > 4 * ORACLE_KEEP {
                prune(best);
            }
        }
        Ok(())
    };

    let total: usize = counts.iter().product();
    for code in 0..total {
        let mut rest = code;
        let x: Vec<f64> = (0..n)
            .map(|d| {
                let k = rest % counts[d];
                rest /= counts[d];
                if counts[d] == 1 {
                    0.5 * (lo[d] + hi[d])
                } else {
                    lo[d] + widths[d] * k as f64 / (counts[d] - 1) as f64
                }
            })
            .collect();
        consider(x, &mut best)?;
    }
    if let Ok(samples) = set.sample_points(64, 0) {
        for x in samples {
            consider(x, &mut best)?;
        }
    }
    prune(&mut best);
    if best.is_empty() {
        return Err(OracleError::NoPoints);
    }

    let mut spacing: Vec<f64> = widths
        .iter()
        .zip(&counts)
        .map(|(w, c)| if *c > 1 { w / (*c - 1) as f64 } else { 0.0 })
        .collect();
    let mut rounds = 0;
    while spacing.iter().any(|h| *h > resolution) && rounds < 40 {
        rounds += 1;
        for h in spacing.iter_mut() {
            *h /= 4.0;
        }
        let centers: Vec<Vec<f64>> = best.iter().map(|(_, x)| x.clone()).collect();
        for c in centers {
            let local = 9usize.pow(n as u32);
            for code in 0..local {
                let mut rest = code;
                let x: Vec<f64> = (0..n)
                    .map(|d| {
                        let k = (rest % 9) as f64 - 4.0;
                        rest /= 9;
                        (c[d] + k * spacing[d]).clamp(lo[d], hi[d])
                    })
                    .collect();
                consider(x, &mut best)?;
            }
        }
        prune(&mut best);
    }
    Ok(best[0].0)
}

fn prune(best: &mut Vec<(f64, Vec<f64>)>) {
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    best.dedup_by(|a, b| a.1 == b.1);
    best.truncate(ORACLE_KEEP);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn am_gm() -> Signomial {
        Signomial::new(vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]).unwrap()
    }

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

    const TOY_MIN: f64 = 1.395_528;

    #[test]
    fn am_gm_bound_on_unit_box() {
        let r = sage_bound(
            &am_gm(),
            &ConvexSet::unit_box(1, -1.0, 1.0),
            0,
            &SageOptions::default(),
        )
        .unwrap();
        assert_eq!(r.status, BoundStatus::Optimal);
        assert!((r.bound.unwrap() - 2.0).abs() < 1e-6, "{:?}", r.bound);
    }

    #[test]
    fn constant_bound_is_the_constant() {
        let f = Signomial::constant(2, 5.0).unwrap();
        let r = sage_bound(
            &f,
            &ConvexSet::unit_box(2, -1.0, 1.0),
            0,
            &SageOptions::default(),
        )
        .unwrap();
        assert!((r.bound.unwrap() - 5.0).abs() < 1e-8, "{:?}", r.bound);
    }

    #[test]
    fn toy_level_one_bound_brackets() {
        let (f, x) = toy();
        let r = sage_bound(&f, &x, 1, &SageOptions::default()).unwrap();
        let b = r.bound.unwrap();
        assert!((-1e-6..=TOY_MIN + 1e-6).contains(&b), "{b}");
        assert!(r.certificate.unwrap().residual < 1e-6);
    }

    #[test]
    fn scan_toy_is_monotone() {
        let (f, x) = toy();
        let scan = hierarchy_scan(&f, &x, 2, 0.0, &SageOptions::default()).unwrap();
        assert_eq!(scan.levels.len(), 3);
        assert!(scan.violations.is_empty(), "{:?}", scan.violations);
        let b: Vec<f64> = scan.levels.iter().map(|l| l.bound.unwrap()).collect();
        assert!(b[0] <= b[1] + 1e-6 && b[1] <= b[2] + 1e-6, "{b:?}");
    }

    #[test]
    fn scan_stops_when_tight() {
        let scan = hierarchy_scan(
            &am_gm(),
            &ConvexSet::unit_box(1, -1.0, 1.0),
            3,
            DEFAULT_STOP_GAP,
            &SageOptions::default(),
        )
        .unwrap();
        assert_eq!(scan.levels.len(), 2);
        assert!(scan.stopped_early);
    }

    #[test]
    fn scan_level_zero_only() {
        let scan = hierarchy_scan(
            &am_gm(),
            &ConvexSet::unit_box(1, -1.0, 1.0),
            0,
            DEFAULT_STOP_GAP,
            &SageOptions::default(),
        )
        .unwrap();
        assert_eq!(scan.levels.len(), 1);
    }

    #[test]
    fn oracle_values() {
        let v = grid_oracle(&am_gm(), &ConvexSet::unit_box(1, -1.0, 1.0), 1e-3).unwrap();
        assert!((v - 2.0).abs() < 1e-5, "{v}");
        let (f, x) = toy();
        let v = grid_oracle(&f, &x, 1e-3).unwrap();
        let exact = 1.5f64.exp() - 1f64.exp() - (-1f64).exp();
        assert!((v - exact).abs() < 1e-4, "{v} vs {exact}");
        assert!((v - TOY_MIN).abs() < 1e-4);
        let k = Signomial::constant(1, -3.0).unwrap();
        assert_eq!(
            grid_oracle(&k, &ConvexSet::unit_box(1, 0.0, 1.0), 1e-2).unwrap(),
            -3.0
        );
    }

    #[test]
    fn oracle_rejects_large_or_unbounded() {
        let f = Signomial::constant(4, 1.0).unwrap();
        let ball = ConvexSet::Ball {
            center: vec![0.0; 4],
            radius: 1.0,
        };
        assert!(matches!(
            grid_oracle(&f, &ball, 1e-2),
            Err(OracleError::DimensionCap(4))
        ));
        assert!(matches!(
            grid_oracle(&am_gm(), &ConvexSet::full_space(1), 1e-2),
            Err(OracleError::Unbounded)
        ));
    }
}
