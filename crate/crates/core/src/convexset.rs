//! Convex sets described declaratively, with support functions
//! `σ_X(λ) = sup_{x ∈ X} λ·x` and conic epigraph constraints `σ_X(λ) <= t`.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{
    AffineExpr, ClarabelBackend, ConicError, ConicProgram, SolveOptions, SolveStatus, Var,
};
use crate::signomial::dot;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("dimension mismatch: set lives in R^{expected}, got length {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid set description: {0}")]
    Invalid(String),
    #[error("set is empty")]
    Infeasible,
    #[error("set is unbounded; no bounding box")]
    Unbounded,
    #[error("rejection sampling produced {got} of {wanted} points within {attempts} attempts")]
    SamplingFailure {
        wanted: usize,
        got: usize,
        attempts: usize,
    },
    #[error("support computation failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// A closed convex set in `R^n`.
///
/// Equalities are written as two opposing polyhedron rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConvexSet {
    Box {
        #[serde(with = "ext_real")]
        lower: Vec<f64>,
        #[serde(with = "ext_real")]
        upper: Vec<f64>,
    },
    Polyhedron {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Intersection {
        members: Vec<ConvexSet>,
    },
    #[serde(rename = "fullspace")]
    FullSpace {
        n: usize,
    },
}

/// Reals with `"inf"` / `"-inf"` strings for infinities.
mod ext_real {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = v
            .iter()
            .map(|x| {
                if *x == f64::INFINITY {
                    Entry::Text("inf".into())
                } else if *x == f64::NEG_INFINITY {
                    Entry::Text("-inf".into())
                } else {
                    Entry::Num(*x)
                }
            })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        entries
            .into_iter()
            .map(|e| match e {
                Entry::Num(x) => Ok(x),
                Entry::Text(t) => match t.as_str() {
                    "inf" | "+inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(D::Error::custom(format!(
                        "expected number, \"inf\" or \"-inf\", found \"{other}\""
                    ))),
                },
            })
            .collect()
    }
}

impl ConvexSet {
    pub fn full_space(n: usize) -> Self {
        ConvexSet::FullSpace { n }
    }

    pub fn unit_box(n: usize, lo: f64, hi: f64) -> Self {
        ConvexSet::Box {
            lower: vec![lo; n],
            upper: vec![hi; n],
        }
    }

    /// Validates the description and returns its ambient dimension.
    pub fn validate(&self) -> Result<usize, SetError> {
        let invalid = |m: &str| Err(SetError::Invalid(m.to_string()));
        match self {
            ConvexSet::Box { lower, upper } => {
                if lower.is_empty() {
                    return invalid("box needs dimension >= 1");
                }
                if lower.len() != upper.len() {
                    return invalid("box lower/upper lengths differ");
                }
                for (l, u) in lower.iter().zip(upper) {
                    if l.is_nan() || u.is_nan() || l > u {
                        return invalid("box requires lower <= upper entrywise");
                    }
                    if *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return invalid("box bound infinite on the wrong side");
                    }
                }
                Ok(lower.len())
            }
            ConvexSet::Polyhedron { w, b } => {
                if w.is_empty() {
                    return invalid("polyhedron needs at least one row");
                }
                if w.len() != b.len() {
                    return invalid("polyhedron W and b row counts differ");
                }
                let n = w[0].len();
                if n == 0 {
                    return invalid("polyhedron needs dimension >= 1");
                }
                if w.iter().any(|r| r.len() != n) {
                    return invalid("polyhedron rows have unequal length");
                }
                if w.iter().flatten().chain(b).any(|x| !x.is_finite()) {
                    return invalid("polyhedron rows must be finite");
                }
                Ok(n)
            }
            ConvexSet::Ball { center, radius } => {
                if center.is_empty() {
                    return invalid("ball needs dimension >= 1");
                }
                if !(radius.is_finite() && *radius >= 0.0) {
                    return invalid("ball radius must be finite and >= 0");
                }
                if center.iter().any(|x| !x.is_finite()) {
                    return invalid("ball center must be finite");
                }
                Ok(center.len())
            }
            ConvexSet::Intersection { members } => {
                let Some(first) = members.first() else {
                    return invalid("intersection needs at least one member");
                };
                let n = first.validate()?;
                for m in &members[1..] {
                    if m.validate()? != n {
                        return invalid("intersection members differ in dimension");
                    }
                }
                Ok(n)
            }
            ConvexSet::FullSpace { n } => {
                if *n == 0 {
                    return invalid("fullspace needs n >= 1");
                }
                Ok(*n)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Polyhedron { w, .. } => w.first().map_or(0, |r| r.len()),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Intersection { members } => members.first().map_or(0, |m| m.dim()),
            ConvexSet::FullSpace { n } => *n,
        }
    }

    fn check_dim(&self, len: usize) -> Result<(), SetError> {
        let n = self.validate()?;
        if n != len {
            return Err(SetError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
        Ok(())
    }

    /// `σ_X(λ)`; `+∞` when the supremum is unbounded.
    pub fn support_value(&self, lam: &[f64]) -> Result<f64, SetError> {
        self.check_dim(lam.len())?;
        match self {
            ConvexSet::Box { lower, upper } => Ok(lam
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(l, (lo, hi))| {
                    if *l > 0.0 {
                        l * hi
                    } else if *l < 0.0 {
                        l * lo
                    } else {
                        0.0
                    }
                })
                .sum()),
            ConvexSet::Ball { center, radius } => {
                let norm = lam.iter().map(|x| x * x).sum::<f64>().sqrt();
                Ok(dot(lam, center) + radius * norm)
            }
            ConvexSet::FullSpace { .. } => {
                if lam.iter().all(|x| *x == 0.0) {
                    Ok(0.0)
                } else {
                    Ok(f64::INFINITY)
                }
            }
            ConvexSet::Polyhedron { w, b } => {
                polyhedron_argmax(w, b, lam).map(|sol| sol.map_or(f64::INFINITY, |(v, _)| v))
            }
            ConvexSet::Intersection { .. } => self.support_value_by_epigraph(lam),
        }
    }

    /// Solves `min t` subject to [`support_epigraph`](Self::support_epigraph)
    /// with `λ` fixed.
    pub fn support_value_by_epigraph(&self, lam: &[f64]) -> Result<f64, SetError> {
        self.check_dim(lam.len())?;
        let mut prog = ConicProgram::new();
        let lam_vars = prog.new_vars(lam.len());
        let t = prog.new_var();
        for (v, l) in lam_vars.iter().zip(lam) {
            prog.add_eq(AffineExpr::var(*v).add_constant(-l));
        }
        self.support_epigraph(&lam_vars, t, &mut prog)?;
        prog.minimize(AffineExpr::var(t));
        let opts = SolveOptions {
            feas_tol: 1e-9,
            gap_tol: 1e-10,
            ..SolveOptions::default()
        };
        let r = prog.solve(&ClarabelBackend, &opts)?;
        match r.status {
            SolveStatus::Optimal => Ok(r.value(t)),
            SolveStatus::Infeasible => Ok(f64::INFINITY),
            SolveStatus::Unbounded => Err(SetError::Infeasible),
            SolveStatus::NumericalTrouble => Err(SetError::Solver(
                "numerical trouble in support epigraph".to_string(),
            )),
        }
    }

    /// Appends constraints describing exactly `{(λ, t) : σ_X(λ) <= t}`.
    pub fn support_epigraph(
        &self,
        lam: &[Var],
        t: Var,
        prog: &mut ConicProgram,
    ) -> Result<(), SetError> {
        self.check_dim(lam.len())?;
        match self {
            ConvexSet::Box { lower, upper } => {
                let mut total = AffineExpr::zero();
                for ((l, lo), hi) in lam.iter().zip(lower).zip(upper) {
                    let s = prog.new_var();
                    total = total.add_term(s, 1.0);
                    let mut any_finite = false;
                    for bound in [*lo, *hi] {
                        if bound.is_finite() {
                            any_finite = true;
                            // bound·λ_i <= s_i
                            prog.add_le(AffineExpr::term(*l, bound).add_term(s, -1.0));
                        }
                    }
                    if *hi == f64::INFINITY {
                        prog.add_le(AffineExpr::var(*l));
                    }
                    if *lo == f64::NEG_INFINITY {
                        prog.add_ge(AffineExpr::var(*l));
                    }
                    if !any_finite {
                        prog.add_ge(AffineExpr::var(s));
                    }
                }
                prog.add_le(total.add_term(t, -1.0));
            }
            ConvexSet::Polyhedron { w, b } => {
                // σ(λ) = min { b·μ : Wᵀμ = λ, μ >= 0 }
                let mu = prog.new_vars(w.len());
                for m in &mu {
                    prog.add_ge(AffineExpr::var(*m));
                }
                for (k, l) in lam.iter().enumerate() {
                    let mut e = AffineExpr::term(*l, -1.0);
                    for (row, m) in w.iter().zip(&mu) {
                        e = e.add_term(*m, row[k]);
                    }
                    prog.add_eq(e);
                }
                let mut e = AffineExpr::term(t, -1.0);
                for (bk, m) in b.iter().zip(&mu) {
                    e = e.add_term(*m, *bk);
                }
                prog.add_le(e);
            }
            ConvexSet::Ball { center, radius } => {
                // radius·‖λ‖ <= t - center·λ
                let mut lhs = AffineExpr::var(t);
                for (l, c) in lam.iter().zip(center) {
                    lhs = lhs.add_term(*l, -c);
                }
                let u = lam.iter().map(|l| AffineExpr::term(*l, *radius)).collect();
                prog.add_soc(lhs, u);
            }
            ConvexSet::FullSpace { .. } => {
                for l in lam {
                    prog.add_eq(AffineExpr::var(*l));
                }
                prog.add_ge(AffineExpr::var(t));
            }
            ConvexSet::Intersection { members } => {
                // Infimal convolution: λ = Σ λ_k, Σ t_k <= t.
                let mut t_sum = AffineExpr::term(t, -1.0);
                let mut lam_sums: Vec<AffineExpr> =
                    lam.iter().map(|l| AffineExpr::term(*l, -1.0)).collect();
                for m in members {
                    let lk = prog.new_vars(lam.len());
                    let tk = prog.new_var();
                    m.support_epigraph(&lk, tk, prog)?;
                    t_sum = t_sum.add_term(tk, 1.0);
                    for (acc, v) in lam_sums.iter_mut().zip(&lk) {
                        *acc = std::mem::take(acc).add_term(*v, 1.0);
                    }
                }
                prog.add_le(t_sum);
                for e in lam_sums {
                    prog.add_eq(e);
                }
            }
        }
        Ok(())
    }

    /// True when `x` satisfies every defining inequality within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(xi, (lo, hi))| *xi >= lo - tol && *xi <= hi + tol),
            ConvexSet::Polyhedron { w, b } => {
                w.iter().zip(b).all(|(row, bk)| dot(row, x) <= bk + tol)
            }
            ConvexSet::Ball { center, radius } => {
                let d = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                d <= radius + tol
            }
            ConvexSet::Intersection { members } => members.iter().all(|m| m.contains(x, tol)),
            ConvexSet::FullSpace { .. } => true,
        }
    }

    /// Axis-aligned bounding box from `±σ_X(∓e_i)`.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>), SetError> {
        let n = self.validate()?;
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let up = self.support_value(&e)?;
            e[i] = -1.0;
            let down = -self.support_value(&e)?;
            if !up.is_finite() || !down.is_finite() {
                return Err(SetError::Unbounded);
            }
            lo.push(down.min(up));
            hi.push(up.max(down));
        }
        Ok((lo, hi))
    }

    /// Deterministic points of a bounded set, each inside within `1e-9`.
    ///
    /// Bounding-box corners projected onto the set come first (projected
    /// exactly for boxes and balls, replaced by the LP vertex maximizing the
    /// corner direction for polyhedra), followed by uniform rejection samples
    /// from the bounding box. Thin directions (width below `1e-12`) are
    /// pinned to the box midpoint. At most `1000 · count` rejection draws
    /// are attempted.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, SetError> {
        const TOL: f64 = 1e-9;
        if count == 0 {
            return Ok(Vec::new());
        }
        let (lo, hi) = self.bounding_box()?;
        let n = lo.len();
        let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let thin: Vec<bool> = lo.iter().zip(&hi).map(|(a, b)| b - a < 1e-12).collect();

        let mut points: Vec<Vec<f64>> = Vec::with_capacity(count);
        let corners = if n < 20 { 1usize << n } else { usize::MAX };
        for mask in 0..corners.min(count) {
            let corner: Vec<f64> = (0..n)
                .map(|i| {
                    if thin[i] {
                        mid[i]
                    } else if mask >> i & 1 == 1 {
                        hi[i]
                    } else {
                        lo[i]
                    }
                })
                .collect();
            if let Some(p) = self.project_corner(&corner, &mid)? {
                if self.contains(&p, TOL) && !points.contains(&p) {
                    points.push(p);
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = 1000 * count;
        let mut attempts = 0;
        while points.len() < count {
            if attempts >= budget {
                return Err(SetError::SamplingFailure {
                    wanted: count,
                    got: points.len(),
                    attempts,
                });
            }
            attempts += 1;
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    if thin[i] {
                        mid[i]
                    } else {
                        rng.random_range(lo[i]..=hi[i])
                    }
                })
                .collect();
            if self.contains(&x, TOL) {
                points.push(x);
            }
        }
        Ok(points)
    }

    fn project_corner(&self, corner: &[f64], mid: &[f64]) -> Result<Option<Vec<f64>>, SetError> {
        Ok(match self {
            ConvexSet::Box { lower, upper } => Some(
                corner
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(c, (lo, hi))| c.clamp(*lo, *hi))
                    .collect(),
            ),
            ConvexSet::Ball { center, radius } => {
                let d: Vec<f64> = corner.iter().zip(center).map(|(a, c)| a - c).collect();
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm <= *radius || norm == 0.0 {
                    Some(corner.to_vec())
                } else {
                    Some(
                        center
                            .iter()
                            .zip(&d)
                            .map(|(c, di)| c + radius * di / norm)
                            .collect(),
                    )
                }
            }
            ConvexSet::Polyhedron { w, b } => {
                let dir: Vec<f64> = corner.iter().zip(mid).map(|(a, m)| a - m).collect();
                polyhedron_argmax(w, b, &dir)?.map(|(_, x)| x)
            }
            ConvexSet::Intersection { .. } | ConvexSet::FullSpace { .. } => None,
        })
    }
}

/// `max {dir·x : Wx <= b}` by simplex. `Ok(None)` when unbounded.
fn polyhedron_argmax(
    w: &[Vec<f64>],
    b: &[f64],
    dir: &[f64],
) -> Result<Option<(f64, Vec<f64>)>, SetError> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = dir
        .iter()
        .map(|d| problem.add_var(*d, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for (row, bk) in w.iter().zip(b) {
        let terms: Vec<_> = vars.iter().copied().zip(row.iter().copied()).collect();
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, *bk);
    }
    match problem.solve() {
        Ok(outcome) => match outcome.into_solution() {
            Ok(sol) => {
                let x: Vec<f64> = vars.iter().map(|v| sol.var_value(*v)).collect();
                Ok(Some((sol.objective(), x)))
            }
            Err(_) => Err(SetError::Solver("LP interrupted".to_string())),
        },
        Err(microlp::Error::Infeasible) => Err(SetError::Infeasible),
        Err(microlp::Error::Unbounded) => Ok(None),
        Err(e) => Err(SetError::Solver(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_set() -> ConvexSet {
        ConvexSet::Polyhedron {
            w: vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            b: vec![1.0, -1.0, 1.0, 1.0],
        }
    }

    fn min_t(set: &ConvexSet, lam: &[f64]) -> Result<f64, SetError> {
        set.support_value_by_epigraph(lam)
    }

    #[test]
    fn support_values_for_simple_sets() {
        let bx = ConvexSet::unit_box(2, -1.0, 1.0);
        assert_eq!(bx.support_value(&[1.0, 1.0]).unwrap(), 2.0);
        let ball = ConvexSet::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert_eq!(ball.support_value(&[3.0, 4.0]).unwrap(), 5.0);
        let v = toy_set().support_value(&[1.5, 0.0]).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
        assert_eq!(
            ConvexSet::full_space(2).support_value(&[0.0, 1.0]).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn polyhedron_unbounded_and_empty() {
        let half = ConvexSet::Polyhedron {
            w: vec![vec![1.0]],
            b: vec![0.0],
        };
        assert_eq!(half.support_value(&[1.0]).unwrap(), 0.0);
        assert_eq!(half.support_value(&[-1.0]).unwrap(), f64::INFINITY);
        let empty = ConvexSet::Polyhedron {
            w: vec![vec![1.0], vec![-1.0]],
            b: vec![0.0, -1.0],
        };
        assert!(matches!(
            empty.support_value(&[1.0]),
            Err(SetError::Infeasible)
        ));
    }

    #[test]
    fn epigraph_fullspace_forces_zero_lambda() {
        let fs = ConvexSet::full_space(2);
        assert!(min_t(&fs, &[0.0, 0.0]).unwrap().abs() < 1e-8);
        assert_eq!(min_t(&fs, &[0.5, 0.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn epigraph_half_line_box() {
        let bx = ConvexSet::Box {
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
        };
        assert!(min_t(&bx, &[-2.0]).unwrap().abs() < 1e-8);
        assert_eq!(min_t(&bx, &[1.0]).unwrap(), f64::INFINITY);
        assert_eq!(bx.support_value(&[1.0]).unwrap(), f64::INFINITY);
        assert_eq!(bx.support_value(&[-2.0]).unwrap(), 0.0);
    }

    #[test]
    fn epigraph_toy_set_point_membership() {
        let check = |t: f64| {
            let mut prog = ConicProgram::new();
            let lam = prog.new_vars(2);
            let tv = prog.new_var();
            prog.add_eq(AffineExpr::var(lam[0]).add_constant(-1.5));
            prog.add_eq(AffineExpr::var(lam[1]));
            prog.add_eq(AffineExpr::var(tv).add_constant(-t));
            toy_set().support_epigraph(&lam, tv, &mut prog).unwrap();
            prog.solve(&ClarabelBackend, &SolveOptions::default())
                .unwrap()
                .status
        };
        assert_eq!(check(1.5 + 1e-9), SolveStatus::Optimal);
        assert_eq!(check(1.4), SolveStatus::Infeasible);
    }

    #[test]
    fn epigraph_matches_support_on_each_variant() {
        let sets = vec![
            ConvexSet::unit_box(2, -1.0, 2.0),
            toy_set(),
            ConvexSet::Ball {
                center: vec![0.5, -0.5],
                radius: 2.0,
            },
            ConvexSet::Intersection {
                members: vec![
                    ConvexSet::unit_box(2, -1.0, 1.0),
                    ConvexSet::Ball {
                        center: vec![0.0, 0.0],
                        radius: 1.2,
                    },
                ],
            },
        ];
        for set in &sets {
            for lam in [[1.0, 0.3], [-0.7, 2.0], [0.0, -1.0]] {
                let a = set.support_value(&lam).unwrap();
                let b = min_t(set, &lam).unwrap();
                assert!((a - b).abs() < 1e-7, "{set:?} {lam:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn contains_examples() {
        assert!(ConvexSet::unit_box(2, -1.0, 1.0).contains(&[0.0, 0.0], 0.0));
        assert!(toy_set().contains(&[1.0, 1.0000001], 1e-6));
        let ball = ConvexSet::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        assert!(!ball.contains(&[1.0, 1.0], 1e-9));
        assert!(!ball.contains(&[0.0], 1e-9));
    }

    #[test]
    fn sampling_stays_inside() {
        let bx = ConvexSet::unit_box(3, -1.0, 0.5);
        let pts = bx.sample_points(50, 7).unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts.iter().all(|p| bx.contains(p, 1e-9)));
        assert_eq!(pts, bx.sample_points(50, 7).unwrap());

        let seg = toy_set().sample_points(40, 3).unwrap();
        assert_eq!(seg.len(), 40);
        assert!(seg.iter().all(|p| (p[0] - 1.0).abs() <= 1e-9));

        assert!(bx.sample_points(0, 1).unwrap().is_empty());
    }

    #[test]
    fn sampling_rejects_unbounded() {
        assert!(matches!(
            ConvexSet::full_space(1).sample_points(3, 0),
            Err(SetError::Unbounded)
        ));
    }

    #[test]
    fn sampling_failure_on_lower_dimensional_diagonal() {
        // The diagonal segment x1 = x2 in [0,1]^2 has measure zero in its box;
        // only the LP-vertex corners land on it.
        let diag = ConvexSet::Polyhedron {
            w: vec![
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
            ],
            b: vec![0.0, 0.0, 1.0, 0.0],
        };
        assert!(matches!(
            diag.sample_points(10, 0),
            Err(SetError::SamplingFailure { .. })
        ));
    }

    #[test]
    fn validation_errors() {
        let bad_box = ConvexSet::Box {
            lower: vec![1.0],
            upper: vec![0.0],
        };
        assert!(bad_box.validate().is_err());
        let bad_ball = ConvexSet::Ball {
            center: vec![0.0],
            radius: -1.0,
        };
        assert!(bad_ball.validate().is_err());
        let mixed = ConvexSet::Intersection {
            members: vec![ConvexSet::full_space(1), ConvexSet::full_space(2)],
        };
        assert!(mixed.validate().is_err());
        assert!(matches!(
            ConvexSet::full_space(2).support_value(&[1.0]),
            Err(SetError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_forms() {
        let bx: ConvexSet =
            serde_json::from_str(r#"{"type":"box","lower":["-inf",0],"upper":[1,"inf"]}"#).unwrap();
        assert_eq!(
            bx,
            ConvexSet::Box {
                lower: vec![f64::NEG_INFINITY, 0.0],
                upper: vec![1.0, f64::INFINITY]
            }
        );
        let text = serde_json::to_string(&bx).unwrap();
        assert_eq!(
            text,
            r#"{"type":"box","lower":["-inf",0.0],"upper":[1.0,"inf"]}"#
        );
        let fs: ConvexSet = serde_json::from_str(r#"{"type":"fullspace","n":3}"#).unwrap();
        assert_eq!(fs, ConvexSet::full_space(3));
        let poly: ConvexSet =
            serde_json::from_str(r#"{"type":"polyhedron","W":[[1,0]],"b":[2]}"#).unwrap();
        assert_eq!(poly.dim(), 2);
        let inter: ConvexSet = serde_json::from_str(
            r#"{"type":"intersection","members":[{"type":"ball","center":[0],"radius":1},{"type":"fullspace","n":1}]}"#,
        )
        .unwrap();
        assert_eq!(inter.validate().unwrap(), 1);
    }
}
