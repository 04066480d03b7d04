mod common;

use rand::Rng;
use sage_core::{AffineExpr, ClarabelBackend, ConicProgram, SolveOptions, SolveStatus};

#[test]
fn relative_entropy_epigraph_is_tight() {
    let mut rng = common::rng(21);
    for _ in 0..100 {
        let v: f64 = rng.random_range(0.01..5.0);
        let c: f64 = rng.random_range(0.01..5.0);
        let mut prog = ConicProgram::new();
        let vv = prog.new_var();
        let cv = prog.new_var();
        let u = prog.new_var();
        prog.add_eq(AffineExpr::var(vv).add_constant(-v));
        prog.add_eq(AffineExpr::var(cv).add_constant(-c));
        prog.add_relative_entropy_epigraph(
            AffineExpr::var(vv),
            AffineExpr::var(cv),
            AffineExpr::var(u),
        );
        prog.minimize(AffineExpr::var(u));
        let r = prog
            .solve(&ClarabelBackend, &SolveOptions::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let expected = v * (v / c).ln();
        assert!(
            (r.value(u) - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
            "v={v} c={c}: {} vs {expected}",
            r.value(u)
        );
    }
}

#[test]
fn soc_distance_to_a_point() {
    let mut rng = common::rng(22);
    for _ in 0..20 {
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut prog = ConicProgram::new();
        let t = prog.new_var();
        let u: Vec<AffineExpr> = p.iter().map(|x| AffineExpr::constant(*x)).collect();
        prog.add_soc(AffineExpr::var(t), u);
        prog.minimize(AffineExpr::var(t));
        let r = prog
            .solve(&ClarabelBackend, &SolveOptions::default())
            .unwrap();
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((r.value(t) - norm).abs() < 1e-7);
    }
}

#[test]
fn json_round_trip_preserves_the_solution() {
    let mut rng = common::rng(23);
    for _ in 0..10 {
        let mut prog = ConicProgram::new();
        let x = prog.new_vars(3);
        for v in &x {
            prog.add_ge(AffineExpr::var(*v).add_constant(-rng.random_range(-1.0..1.0)));
            prog.add_le(AffineExpr::var(*v).add_constant(-5.0));
        }
        prog.add_exp_cone(
            AffineExpr::var(x[0]),
            AffineExpr::constant(1.0),
            AffineExpr::var(x[1]),
        );
        let weights: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..2.0)).collect();
        let mut obj = AffineExpr::zero();
        for (v, w) in x.iter().zip(&weights) {
            obj = obj.add_term(*v, *w);
        }
        prog.minimize(obj);
        let text = prog.to_json();
        let back = ConicProgram::from_json(&text).unwrap();
        assert_eq!(back, prog);
        assert_eq!(back.to_json(), text);
        let a = prog
            .solve(&ClarabelBackend, &SolveOptions::default())
            .unwrap();
        let b = back
            .solve(&ClarabelBackend, &SolveOptions::default())
            .unwrap();
        assert_eq!(a.primal, b.primal);
        assert!(prog.primal_residual(&a.primal) <= 1e-8);
    }
}
