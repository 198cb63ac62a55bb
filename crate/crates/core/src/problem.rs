//! Plaintext and disguised LP data, validation, canonical serialization and
//! content digests.
//!
//! Every problem has the form
//!
//! ```text
//! minimize cᵀx  subject to  A·x = b,  B·x ≥ 0
//! ```
//!
//! with `A` an `m × n` full-row-rank matrix and `B` square.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Read access shared by plaintext and disguised problems.
pub trait LinearProgram {
    fn eq_matrix(&self) -> &Matrix;
    fn eq_rhs(&self) -> &[f64];
    fn ineq_matrix(&self) -> &Matrix;
    fn cost(&self) -> &[f64];

    fn num_rows(&self) -> usize {
        self.eq_matrix().rows()
    }

    fn num_vars(&self) -> usize {
        self.eq_matrix().cols()
    }
}

/// The customer's plaintext problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub eq: Matrix,
    #[serde(rename = "B")]
    pub ineq: Matrix,
    #[serde(rename = "b")]
    pub rhs: Vec<f64>,
    #[serde(rename = "c")]
    pub cost: Vec<f64>,
}

impl LpProblem {
    /// Assembles and validates a problem with the default pivot tolerance.
    pub fn new(eq: Matrix, rhs: Vec<f64>, ineq: Matrix, cost: Vec<f64>) -> Result<Self> {
        let p = LpProblem {
            m: eq.rows(),
            n: eq.cols(),
            eq,
            ineq,
            rhs,
            cost,
        };
        validate_problem(&p)?;
        Ok(p)
    }

    /// Compact JSON with fixed key order; this is the digest input.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("problem serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: LpProblem = serde_json::from_str(text)?;
        validate_problem(&p)?;
        Ok(p)
    }

    pub fn digest(&self) -> ProblemDigest {
        digest(self)
    }
}

impl LinearProgram for LpProblem {
    fn eq_matrix(&self) -> &Matrix {
        &self.eq
    }
    fn eq_rhs(&self) -> &[f64] {
        &self.rhs
    }
    fn ineq_matrix(&self) -> &Matrix {
        &self.ineq
    }
    fn cost(&self) -> &[f64] {
        &self.cost
    }
}

/// The disguised problem handed to the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncryptedProblem {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "Ap")]
    pub eq: Matrix,
    #[serde(rename = "Bp")]
    pub ineq: Matrix,
    #[serde(rename = "bp")]
    pub rhs: Vec<f64>,
    #[serde(rename = "cp")]
    pub cost: Vec<f64>,
    pub problem_digest: ProblemDigest,
}

impl EncryptedProblem {
    /// Shape and finiteness checks. Rank and nonsingularity are properties
    /// of the key construction and are not re-derived here.
    pub fn check_shape(&self) -> Result<()> {
        check_dims(self.m, self.n, &self.eq, &self.ineq, &self.rhs, &self.cost)?;
        check_finite(&self.eq, &self.ineq, &self.rhs, &self.cost)
    }
}

impl LinearProgram for EncryptedProblem {
    fn eq_matrix(&self) -> &Matrix {
        &self.eq
    }
    fn eq_rhs(&self) -> &[f64] {
        &self.rhs
    }
    fn ineq_matrix(&self) -> &Matrix {
        &self.ineq
    }
    fn cost(&self) -> &[f64] {
        &self.cost
    }
}

/// SHA-256 of a problem's canonical serialization. Serialized as hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ProblemDigest(pub [u8; 32]);

impl fmt::Display for ProblemDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for ProblemDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProblemDigest({self})")
    }
}

impl FromStr for ProblemDigest {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)?;
        Ok(ProblemDigest(out))
    }
}

impl Serialize for ProblemDigest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ProblemDigest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Numerical tolerances shared by the solver and the verifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative feasibility tolerance.
    pub feas_rel: f64,
    /// Relative duality-gap tolerance.
    pub gap_rel: f64,
    /// Pivot threshold for factorizations and rank decisions.
    pub pivot_eps: f64,
    /// Margin for certificate conditions that must hold strictly.
    pub strict: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            feas_rel: 1e-6,
            gap_rel: 1e-6,
            pivot_eps: 1e-10,
            strict: 1e-6,
        }
    }
}

impl Tolerance {
    /// Uses `tol` for both the feasibility and gap tolerances.
    pub fn with_rel(tol: f64) -> Result<Self> {
        let t = Tolerance {
            feas_rel: tol,
            gap_rel: tol,
            ..Tolerance::default()
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.feas_rel, self.gap_rel, self.pivot_eps, self.strict];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidTolerance("tolerances must be finite and positive"));
        }
        if self.feas_rel >= 1.0 {
            return Err(Error::InvalidTolerance("feas_rel must be below 1"));
        }
        Ok(())
    }
}

fn check_dims(
    m: usize,
    n: usize,
    eq: &Matrix,
    ineq: &Matrix,
    rhs: &[f64],
    cost: &[f64],
) -> Result<()> {
    let mismatch = |what: String| Err(Error::DimensionMismatch(what));
    if m == 0 || n == 0 {
        return mismatch(format!("m = {m}, n = {n}; both must be at least 1"));
    }
    if n < m {
        return mismatch(format!("n = {n} is smaller than m = {m}"));
    }
    if eq.rows() != m || eq.cols() != n {
        return mismatch(format!("A is {}x{}, expected {m}x{n}", eq.rows(), eq.cols()));
    }
    if ineq.rows() != n || ineq.cols() != n {
        return mismatch(format!("B is {}x{}, expected {n}x{n}", ineq.rows(), ineq.cols()));
    }
    if rhs.len() != m {
        return mismatch(format!("b has length {}, expected {m}", rhs.len()));
    }
    if cost.len() != n {
        return mismatch(format!("c has length {}, expected {n}", cost.len()));
    }
    Ok(())
}

fn check_finite(eq: &Matrix, ineq: &Matrix, rhs: &[f64], cost: &[f64]) -> Result<()> {
    if !eq.all_finite() {
        return Err(Error::NonFinite("A"));
    }
    if !ineq.all_finite() {
        return Err(Error::NonFinite("B"));
    }
    if !rhs.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("b"));
    }
    if !cost.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("c"));
    }
    Ok(())
}

/// Numerical rank by Gaussian elimination with complete pivoting. A pivot
/// counts when it exceeds `pivot_eps · max(1, max|a_ij|)`.
pub fn numerical_rank(a: &Matrix, pivot_eps: f64) -> usize {
    let mut w = a.clone();
    let (rows, cols) = (w.rows(), w.cols());
    let threshold = pivot_eps * a.max_abs().max(1.0);
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for i in k..rows {
            for j in k..cols {
                let v = w[(i, col_perm[j])].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= threshold {
            break;
        }
        w.swap_rows(k, pi);
        col_perm.swap(k, pj);
        let pc = col_perm[k];
        let pivot = w[(k, pc)];
        for i in k + 1..rows {
            let l = w[(i, pc)] / pivot;
            if l == 0.0 {
                continue;
            }
            for &cj in &col_perm[k..] {
                let v = w[(k, cj)];
                w[(i, cj)] -= l * v;
            }
        }
        rank += 1;
    }
    rank
}

/// Checks dimensions, finiteness and full row rank of `A`.
pub fn validate_problem(p: &LpProblem) -> Result<()> {
    validate_with(p, &Tolerance::default())
}

pub fn validate_with(p: &LpProblem, tol: &Tolerance) -> Result<()> {
    check_dims(p.m, p.n, &p.eq, &p.ineq, &p.rhs, &p.cost)?;
    check_finite(&p.eq, &p.ineq, &p.rhs, &p.cost)?;
    let rank = numerical_rank(&p.eq, tol.pivot_eps);
    if rank < p.m {
        return Err(Error::RankDeficient { rank, rows: p.m });
    }
    Ok(())
}

/// SHA-256 of the canonical JSON form.
pub fn digest(p: &LpProblem) -> ProblemDigest {
    let hash = Sha256::digest(p.to_canonical_json().as_bytes());
    let mut out = [0u8; 32];
    out.copy_from_slice(&hash);
    ProblemDigest(out)
}
