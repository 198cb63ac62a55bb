//! Cloud-side solving and proof generation.
//!
//! The solver only ever sees an [`EncryptedProblem`]. Because `B'` is
//! square and nonsingular, the substitution `z = B'y` turns
//! `min c'ᵀy s.t. A'y = b', B'y ≥ 0` into the standard form
//! `min ĉᵀz s.t. Âz = b', z ≥ 0` with `Â = A'B'⁻¹` and `ĉ = B'⁻ᵀc'`.

mod basis;
mod simplex;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_max, Lu, Matrix};
use crate::problem::{EncryptedProblem, Tolerance};
use crate::verify::{check_infeasible, check_optimal, check_unbounded, Verdict};

pub use basis::REFACTOR_INTERVAL;
pub use simplex::{simplex_solve, SimplexSolution, SimplexStatus};

/// Solver answer plus the proof that lets the customer check it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudResult {
    #[serde(flatten)]
    pub outcome: Outcome,
    /// Simplex pivots across both phases.
    pub iterations: u64,
    /// Wall-clock seconds.
    pub solve_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    /// `y` with dual multipliers `s` (equalities) and `t ≥ 0` (inequalities).
    Optimal { y: Vec<f64>, s: Vec<f64>, t: Vec<f64> },
    /// Farkas pair: `t ≥ 0`, `A'ᵀs + B'ᵀt = 0`, `b'ᵀs > 0`.
    Infeasible { s: Vec<f64>, t: Vec<f64> },
    /// Feasible `y0` and improving ray `d`.
    Unbounded { y0: Vec<f64>, d: Vec<f64> },
}

/// `min ĉᵀz s.t. Âz = b̂, z ≥ 0` together with the back-map `y = B'⁻¹z`.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    back: Matrix,
}

impl StandardForm {
    pub fn to_original(&self, z: &[f64]) -> Vec<f64> {
        self.back.mul_vec(z)
    }
}

pub fn to_standard_form(e: &EncryptedProblem, tol: &Tolerance) -> Result<StandardForm> {
    e.check_shape()?;
    let lu = Lu::factor(&e.ineq);
    if lu.min_pivot() <= tol.pivot_eps * e.ineq.norm_inf().max(1.0) {
        return Err(Error::SingularMatrix("B'"));
    }
    let back = lu.inverse();
    Ok(StandardForm {
        a: e.eq.mul(&back),
        b: e.rhs.clone(),
        c: back.tr_mul_vec(&e.cost),
        back,
    })
}

/// Solves the disguised problem and attaches a certificate that passes the
/// customer's checks.
pub fn proof_gen(e: &EncryptedProblem, tol: &Tolerance) -> Result<CloudResult> {
    let start = Instant::now();
    let sf = to_standard_form(e, tol)?;
    let solution = simplex_solve(&sf.a, &sf.b, &sf.c, tol)?;
    let outcome = match solution.status {
        SimplexStatus::Optimal { z, dual, reduced } => Outcome::Optimal {
            y: sf.to_original(&z),
            s: dual,
            t: reduced,
        },
        SimplexStatus::Infeasible { farkas } => {
            let t = sf.a.tr_mul_vec(&farkas).into_iter().map(|v| -v).collect();
            Outcome::Infeasible { s: farkas, t }
        }
        SimplexStatus::Unbounded { z, ray } => {
            let d = sf.to_original(&ray);
            let scale = norm_max(&d);
            Outcome::Unbounded {
                y0: sf.to_original(&z),
                d: d.into_iter().map(|v| v / scale).collect(),
            }
        }
    };
    let verdict = match &outcome {
        Outcome::Optimal { y, s, t } => check_optimal(e, y, s, t, tol)?,
        Outcome::Infeasible { s, t } => check_infeasible(e, s, t, tol)?,
        Outcome::Unbounded { y0, d } => check_unbounded(e, y0, d, tol)?,
    };
    if let Verdict::Reject(rejection) = verdict {
        return Err(Error::SelfCheckFailed(rejection));
    }
    Ok(CloudResult {
        outcome,
        iterations: solution.iterations,
        solve_time: start.elapsed().as_secs_f64(),
    })
}
