//! Certificate checks on the disguised problem.
//!
//! Optimality of `y` is accepted iff, in order:
//!
//! 1. `‖A'y − b'‖∞ ≤ tol·max(1, ‖b'‖∞)`
//! 2. `min(B'y) ≥ −tol·max(1, ‖B'‖∞·‖y‖∞)`
//! 3. `min(t) ≥ −tol`
//! 4. `‖A'ᵀs + B'ᵀt − c'‖∞ ≤ tol·max(1, ‖c'‖∞)`
//! 5. `|c'ᵀy − b'ᵀs| ≤ gap_tol·max(1, |c'ᵀy|)`
//!
//! Only matrix-vector products are involved, so each check is `O(n²)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problem::{EncryptedProblem, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Equality,
    Inequality,
    DualSign,
    DualResidual,
    Gap,
    FarkasSign,
    FarkasResidual,
    FarkasStrict,
    RayNotInNullspace,
    RayInequality,
    RayNotImproving,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Equality => "equality",
            Condition::Inequality => "inequality",
            Condition::DualSign => "dual-sign",
            Condition::DualResidual => "dual-residual",
            Condition::Gap => "gap",
            Condition::FarkasSign => "farkas-sign",
            Condition::FarkasResidual => "farkas-residual",
            Condition::FarkasStrict => "farkas-strict",
            Condition::RayNotInNullspace => "ray-not-in-nullspace",
            Condition::RayInequality => "ray-inequality",
            Condition::RayNotImproving => "ray-not-improving",
        }
    }
}

/// First violated condition, with the measured residual and the bound it
/// exceeded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub condition: Condition,
    pub residual: f64,
    pub threshold: f64,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (residual {:e}, threshold {:e})",
            self.condition.name(),
            self.residual,
            self.threshold
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Accept,
    Reject(Rejection),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    pub fn rejection(&self) -> Option<Rejection> {
        match self {
            Verdict::Accept => None,
            Verdict::Reject(r) => Some(*r),
        }
    }
}

/// Floating-point operation tally for the verification kernels.
#[derive(Default)]
struct Flops(u64);

impl Flops {
    fn mul_vec(&mut self, a: &Matrix, x: &[f64]) -> Vec<f64> {
        self.0 += 2 * (a.rows() * a.cols()) as u64;
        a.mul_vec(x)
    }

    fn tr_mul_vec(&mut self, a: &Matrix, x: &[f64]) -> Vec<f64> {
        self.0 += 2 * (a.rows() * a.cols()) as u64;
        a.tr_mul_vec(x)
    }

    fn norm_inf(&mut self, a: &Matrix) -> f64 {
        self.0 += (a.rows() * a.cols()) as u64;
        a.norm_inf()
    }

    fn dot(&mut self, a: &[f64], b: &[f64]) -> f64 {
        self.0 += 2 * a.len() as u64;
        crate::linalg::dot(a, b)
    }

    fn vec_op(&mut self, len: usize) {
        self.0 += len as u64;
    }
}

fn max_abs(v: &[f64]) -> f64 {
    crate::linalg::norm_max(v)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn reject(condition: Condition, residual: f64, threshold: f64) -> Verdict {
    Verdict::Reject(Rejection {
        condition,
        residual,
        threshold,
    })
}

fn expect_len(name: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "{name} has length {}, expected {len}",
            v.len()
        )));
    }
    Ok(())
}

fn primal_checks(e: &EncryptedProblem, y: &[f64], tol: &Tolerance, ops: &mut Flops) -> Verdict {
    let ay = ops.mul_vec(&e.eq, y);
    ops.vec_op(ay.len());
    let eq_residual = ay
        .iter()
        .zip(&e.rhs)
        .fold(0.0, |acc, (l, r)| f64::max(acc, (l - r).abs()));
    let eq_bound = tol.feas_rel * max_abs(&e.rhs).max(1.0);
    if eq_residual > eq_bound || eq_residual.is_nan() {
        return reject(Condition::Equality, eq_residual, eq_bound);
    }

    let by = ops.mul_vec(&e.ineq, y);
    let ineq_min = min_of(&by);
    let ineq_bound = tol.feas_rel * (ops.norm_inf(&e.ineq) * max_abs(y)).max(1.0);
    if ineq_min < -ineq_bound || ineq_min.is_nan() {
        return reject(Condition::Inequality, -ineq_min, ineq_bound);
    }
    Verdict::Accept
}

fn optimal_checks(
    e: &EncryptedProblem,
    y: &[f64],
    s: &[f64],
    t: &[f64],
    tol: &Tolerance,
    ops: &mut Flops,
) -> Verdict {
    if let v @ Verdict::Reject(_) = primal_checks(e, y, tol, ops) {
        return v;
    }

    let t_min = min_of(t);
    if t_min < -tol.feas_rel || t_min.is_nan() {
        return reject(Condition::DualSign, -t_min, tol.feas_rel);
    }

    let mut stationarity = ops.tr_mul_vec(&e.eq, s);
    let bt = ops.tr_mul_vec(&e.ineq, t);
    ops.vec_op(2 * stationarity.len());
    for ((v, b), c) in stationarity.iter_mut().zip(&bt).zip(&e.cost) {
        *v += b - c;
    }
    let dual_residual = max_abs(&stationarity);
    let dual_bound = tol.feas_rel * max_abs(&e.cost).max(1.0);
    if dual_residual > dual_bound || dual_residual.is_nan() {
        return reject(Condition::DualResidual, dual_residual, dual_bound);
    }

    let primal_obj = ops.dot(&e.cost, y);
    let dual_obj = ops.dot(&e.rhs, s);
    let gap = (primal_obj - dual_obj).abs();
    let gap_bound = tol.gap_rel * primal_obj.abs().max(1.0);
    if gap > gap_bound || gap.is_nan() {
        return reject(Condition::Gap, gap, gap_bound);
    }
    Verdict::Accept
}

fn infeasible_checks(
    e: &EncryptedProblem,
    s: &[f64],
    t: &[f64],
    tol: &Tolerance,
    ops: &mut Flops,
) -> Verdict {
    // Certificates are scale-free; compare them at ‖s‖∞ = 1.
    let scale = max_abs(s);
    let (s, t): (Vec<f64>, Vec<f64>) = if scale > 0.0 && scale.is_finite() {
        ops.vec_op(s.len() + t.len());
        (
            s.iter().map(|v| v / scale).collect(),
            t.iter().map(|v| v / scale).collect(),
        )
    } else {
        (s.to_vec(), t.to_vec())
    };

    let t_min = min_of(&t);
    if t_min < -tol.feas_rel || t_min.is_nan() {
        return reject(Condition::FarkasSign, -t_min, tol.feas_rel);
    }

    let mut combo = ops.tr_mul_vec(&e.eq, &s);
    let bt = ops.tr_mul_vec(&e.ineq, &t);
    ops.vec_op(combo.len());
    for (v, b) in combo.iter_mut().zip(&bt) {
        *v += b;
    }
    let residual = max_abs(&combo);
    let bound = tol.feas_rel * max_abs(&s).max(1.0);
    if residual > bound || residual.is_nan() {
        return reject(Condition::FarkasResidual, residual, bound);
    }

    let bs = ops.dot(&e.rhs, &s);
    if bs < tol.strict || bs.is_nan() {
        return reject(Condition::FarkasStrict, bs, tol.strict);
    }
    Verdict::Accept
}

fn unbounded_checks(
    e: &EncryptedProblem,
    y0: &[f64],
    d: &[f64],
    tol: &Tolerance,
    ops: &mut Flops,
) -> Verdict {
    if let v @ Verdict::Reject(_) = primal_checks(e, y0, tol, ops) {
        return v;
    }

    // Rays are compared at ‖d‖∞ = 1.
    let scale = max_abs(d);
    let d: Vec<f64> = if scale > 0.0 && scale.is_finite() {
        ops.vec_op(d.len());
        d.iter().map(|v| v / scale).collect()
    } else {
        d.to_vec()
    };

    let ad = ops.mul_vec(&e.eq, &d);
    let null_residual = max_abs(&ad);
    if null_residual > tol.feas_rel || null_residual.is_nan() {
        return reject(Condition::RayNotInNullspace, null_residual, tol.feas_rel);
    }

    let bd = ops.mul_vec(&e.ineq, &d);
    let bd_min = min_of(&bd);
    let ineq_bound = tol.feas_rel * ops.norm_inf(&e.ineq) * max_abs(&d);
    if bd_min < -ineq_bound || bd_min.is_nan() {
        return reject(Condition::RayInequality, -bd_min, ineq_bound);
    }

    let slope = ops.dot(&e.cost, &d);
    let needed = -tol.strict * max_abs(&e.cost) * max_abs(&d);
    if slope > needed || slope >= 0.0 || slope.is_nan() {
        return reject(Condition::RayNotImproving, slope, needed);
    }
    Verdict::Accept
}

fn dims_optimal(e: &EncryptedProblem, y: &[f64], s: &[f64], t: &[f64]) -> Result<()> {
    expect_len("y", y, e.n)?;
    expect_len("s", s, e.m)?;
    expect_len("t", t, e.n)
}

/// Checks a claimed optimum `y` with dual certificate `(s, t)`.
pub fn check_optimal(
    e: &EncryptedProblem,
    y: &[f64],
    s: &[f64],
    t: &[f64],
    tol: &Tolerance,
) -> Result<Verdict> {
    Ok(check_optimal_counted(e, y, s, t, tol)?.0)
}

/// [`check_optimal`] plus the number of floating-point operations spent.
pub fn check_optimal_counted(
    e: &EncryptedProblem,
    y: &[f64],
    s: &[f64],
    t: &[f64],
    tol: &Tolerance,
) -> Result<(Verdict, u64)> {
    dims_optimal(e, y, s, t)?;
    let mut ops = Flops::default();
    let verdict = optimal_checks(e, y, s, t, tol, &mut ops);
    Ok((verdict, ops.0))
}

/// Checks a Farkas pair: `t ≥ 0`, `A'ᵀs + B'ᵀt = 0`, `b'ᵀs > 0`.
pub fn check_infeasible(
    e: &EncryptedProblem,
    s: &[f64],
    t: &[f64],
    tol: &Tolerance,
) -> Result<Verdict> {
    Ok(check_infeasible_counted(e, s, t, tol)?.0)
}

pub fn check_infeasible_counted(
    e: &EncryptedProblem,
    s: &[f64],
    t: &[f64],
    tol: &Tolerance,
) -> Result<(Verdict, u64)> {
    expect_len("s", s, e.m)?;
    expect_len("t", t, e.n)?;
    let mut ops = Flops::default();
    let verdict = infeasible_checks(e, s, t, tol, &mut ops);
    Ok((verdict, ops.0))
}

/// Checks a feasible point `y0` and a ray `d` with `A'd = 0`, `B'd ≥ 0`,
/// `c'ᵀd < 0`.
pub fn check_unbounded(
    e: &EncryptedProblem,
    y0: &[f64],
    d: &[f64],
    tol: &Tolerance,
) -> Result<Verdict> {
    Ok(check_unbounded_counted(e, y0, d, tol)?.0)
}

pub fn check_unbounded_counted(
    e: &EncryptedProblem,
    y0: &[f64],
    d: &[f64],
    tol: &Tolerance,
) -> Result<(Verdict, u64)> {
    expect_len("y0", y0, e.n)?;
    expect_len("d", d, e.n)?;
    let mut ops = Flops::default();
    let verdict = unbounded_checks(e, y0, d, tol, &mut ops);
    Ok((verdict, ops.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemDigest;

    fn encrypted(eq: Vec<Vec<f64>>, rhs: Vec<f64>, ineq: Vec<Vec<f64>>, cost: Vec<f64>) -> EncryptedProblem {
        let eq = Matrix::from_rows(&eq).unwrap();
        EncryptedProblem {
            m: eq.rows(),
            n: eq.cols(),
            eq,
            ineq: Matrix::from_rows(&ineq).unwrap(),
            rhs,
            cost,
            problem_digest: ProblemDigest::default(),
        }
    }

    fn hand() -> EncryptedProblem {
        encrypted(
            vec![vec![2.0, 2.0]],
            vec![4.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![2.0, 1.0],
        )
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn condition(v: Verdict) -> Condition {
        v.rejection().expect("expected a rejection").condition
    }

    #[test]
    fn hand_certificate_is_accepted() {
        let v = check_optimal(&hand(), &[0.0, 2.0], &[0.5], &[0.0, 1.0], &tol()).unwrap();
        assert_eq!(v, Verdict::Accept);
    }

    #[test]
    fn suboptimal_vertex_fails_only_the_gap() {
        let v = check_optimal(&hand(), &[2.0, 0.0], &[0.5], &[0.0, 1.0], &tol()).unwrap();
        let r = v.rejection().unwrap();
        assert_eq!(r.condition, Condition::Gap);
        assert_eq!(r.residual, 2.0);
    }

    #[test]
    fn negative_multiplier_fails_dual_sign() {
        let v = check_optimal(&hand(), &[0.0, 2.0], &[0.5], &[-0.01, 1.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::DualSign);
    }

    #[test]
    fn infeasible_point_fails_inequality() {
        // A'y = 4 holds but B'y = (−1, 3).
        let v = check_optimal(&hand(), &[3.0, -1.0], &[0.5], &[0.0, 1.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::Inequality);
    }

    #[test]
    fn wrong_multiplier_fails_dual_residual() {
        let v = check_optimal(&hand(), &[0.0, 2.0], &[0.6], &[0.0, 1.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::DualResidual);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(
            check_optimal(&hand(), &[0.0], &[0.5], &[0.0, 1.0], &tol()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(check_infeasible(&hand(), &[0.5, 1.0], &[0.0, 1.0], &tol()).is_err());
        assert!(check_unbounded(&hand(), &[0.0, 2.0], &[1.0], &tol()).is_err());
    }

    fn one_var_infeasible() -> EncryptedProblem {
        encrypted(vec![vec![1.0]], vec![-1.0], vec![vec![1.0]], vec![0.0])
    }

    #[test]
    fn farkas_pair_accepted() {
        let v = check_infeasible(&one_var_infeasible(), &[-1.0], &[1.0], &tol()).unwrap();
        assert_eq!(v, Verdict::Accept);
    }

    #[test]
    fn vacuous_farkas_pair_rejected() {
        let v = check_infeasible(&one_var_infeasible(), &[0.0], &[0.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::FarkasStrict);
    }

    #[test]
    fn sign_flipped_farkas_pair_rejected() {
        // b'ᵀs = −1; balancing A'ᵀs + B'ᵀt = 0 needs t = −1.
        let e = one_var_infeasible();
        let v = check_infeasible(&e, &[1.0], &[-1.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::FarkasSign);
        let v = check_infeasible(&e, &[1.0], &[0.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::FarkasResidual);
    }

    #[test]
    fn farkas_pair_is_scale_free() {
        let v = check_infeasible(&one_var_infeasible(), &[-1e-9], &[1e-9], &tol()).unwrap();
        assert_eq!(v, Verdict::Accept);
    }

    fn ray_problem() -> EncryptedProblem {
        encrypted(
            vec![vec![1.0, -1.0]],
            vec![0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![-1.0, 0.0],
        )
    }

    #[test]
    fn ray_accepted() {
        let v = check_unbounded(&ray_problem(), &[0.0, 0.0], &[1.0, 1.0], &tol()).unwrap();
        assert_eq!(v, Verdict::Accept);
    }

    #[test]
    fn zero_ray_rejected() {
        let v = check_unbounded(&ray_problem(), &[0.0, 0.0], &[0.0, 0.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::RayNotImproving);
    }

    #[test]
    fn ray_off_nullspace_rejected() {
        let v = check_unbounded(&ray_problem(), &[0.0, 0.0], &[1.0, 0.9], &tol()).unwrap();
        let r = v.rejection().unwrap();
        assert_eq!(r.condition, Condition::RayNotInNullspace);
        assert!((r.residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn ray_leaving_cone_rejected() {
        let v = check_unbounded(&ray_problem(), &[0.0, 0.0], &[-1.0, -1.0], &tol()).unwrap();
        assert_eq!(condition(v), Condition::RayInequality);
    }

    #[test]
    fn flop_count_is_quadratic() {
        let e = hand();
        let (_, flops) =
            check_optimal_counted(&e, &[0.0, 2.0], &[0.5], &[0.0, 1.0], &tol()).unwrap();
        let n = e.n as u64;
        assert!(flops > 0 && flops <= 16 * n * n);
    }
}
