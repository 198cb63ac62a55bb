//! Customer-side key generation, problem disguise and result decryption.
//!
//! A key `K = (Q, M, λ, γ)` maps `min cᵀx s.t. Ax = b, Bx ≥ 0` to
//!
//! ```text
//! A' = Q·A·M    b' = Q·b    B' = (B − λ·A)·M    c' = γ·Mᵀ·c
//! ```
//!
//! Feasible points correspond through `x = M·y`, and objectives through
//! `c'ᵀy = γ·cᵀx`.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_max, Matrix};
use crate::problem::{digest, validate_problem, EncryptedProblem, LpProblem, ProblemDigest, Tolerance};
use crate::random::{mixed_inequality_is_nonsingular, random_lambda, random_nonsingular};
use crate::solver::{CloudResult, Outcome};
use crate::verify::{check_infeasible, check_optimal, check_unbounded, Verdict};

/// One-time transformation key bound to a single problem digest.
#[derive(Debug, Serialize, Deserialize)]
pub struct SecretKey {
    #[serde(rename = "Q")]
    pub q: Matrix,
    #[serde(rename = "M")]
    pub m: Matrix,
    pub lambda: Matrix,
    pub gamma: f64,
    pub problem_digest: ProblemDigest,
    pub seed: u64,
    used: AtomicBool,
}

impl Clone for SecretKey {
    fn clone(&self) -> Self {
        SecretKey {
            q: self.q.clone(),
            m: self.m.clone(),
            lambda: self.lambda.clone(),
            gamma: self.gamma,
            problem_digest: self.problem_digest,
            seed: self.seed,
            used: AtomicBool::new(self.is_used()),
        }
    }
}

impl PartialEq for SecretKey {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
            && self.m == other.m
            && self.lambda == other.lambda
            && self.gamma == other.gamma
            && self.problem_digest == other.problem_digest
            && self.seed == other.seed
            && self.is_used() == other.is_used()
    }
}

impl SecretKey {
    /// Assembles a key from explicit parts, checking the invariants that
    /// involve the bound problem.
    pub fn from_parts(
        p: &LpProblem,
        q: Matrix,
        m: Matrix,
        lambda: Matrix,
        gamma: f64,
        seed: u64,
    ) -> Result<SecretKey> {
        let tol = Tolerance::default();
        if q.rows() != p.m || !q.is_square() {
            return Err(Error::DimensionMismatch(format!("Q must be {0}x{0}", p.m)));
        }
        if m.rows() != p.n || !m.is_square() {
            return Err(Error::DimensionMismatch(format!("M must be {0}x{0}", p.n)));
        }
        if lambda.rows() != p.n || lambda.cols() != p.m {
            return Err(Error::DimensionMismatch(format!("lambda must be {}x{}", p.n, p.m)));
        }
        if !(0.5..=2.0).contains(&gamma) {
            return Err(Error::DimensionMismatch(format!("gamma {gamma} outside [1/2, 2]")));
        }
        for (name, mat) in [("Q", &q), ("M", &m)] {
            let lu = crate::linalg::Lu::factor(mat);
            if lu.min_pivot() <= tol.pivot_eps * mat.norm_inf().max(1.0) {
                return Err(Error::SingularMatrix(name));
            }
        }
        let lb = lambda.mul_vec(&p.rhs);
        if norm_max(&lb) > 1e-12 * norm_max(&p.rhs).max(1.0) {
            return Err(Error::DimensionMismatch("lambda·b is not zero".into()));
        }
        if !mixed_inequality_is_nonsingular(p, &lambda, &tol) {
            return Err(Error::SingularMatrix("B - lambda*A"));
        }
        Ok(SecretKey {
            q,
            m,
            lambda,
            gamma,
            problem_digest: digest(p),
            seed,
            used: AtomicBool::new(false),
        })
    }

    /// `(I, I, 0, 1)`: encryption leaves the problem unchanged.
    pub fn identity(p: &LpProblem) -> SecretKey {
        SecretKey {
            q: Matrix::identity(p.m),
            m: Matrix::identity(p.n),
            lambda: Matrix::zeros(p.n, p.m),
            gamma: 1.0,
            problem_digest: digest(p),
            seed: 0,
            used: AtomicBool::new(false),
        }
    }

    pub fn is_used(&self) -> bool {
        self.used.load(Ordering::SeqCst)
    }

    /// Atomically flips the used flag; fails if it was already set.
    fn claim(&self) -> Result<()> {
        self.used
            .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
            .map(|_| ())
            .map_err(|_| Error::KeyReuse)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("key serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<SecretKey> {
        Ok(serde_json::from_str(text)?)
    }

    /// Maps a disguised-space point back to plaintext coordinates.
    pub fn decrypt_point(&self, y: &[f64]) -> Vec<f64> {
        self.m.mul_vec(y)
    }
}

/// Outcome reported to the customer after verification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifiedSolution {
    pub status: Status,
    /// Optimal point, or a feasible point when unbounded; empty when infeasible.
    pub x: Vec<f64>,
    /// `cᵀx` at the optimum.
    pub objective: Option<f64>,
    /// Improving direction in plaintext coordinates when unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ray: Option<Vec<f64>>,
}

/// Draws a fresh key for `p`. Deterministic in `(p, seed)`.
pub fn keygen(p: &LpProblem, seed: u64) -> Result<SecretKey> {
    validate_problem(p)?;
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_nonsingular(p.m, &mut rng);
    let m = random_nonsingular(p.n, &mut rng);
    let lambda = random_lambda(p, &tol, &mut rng)?;
    let gamma = rng.gen_range(0.5..=2.0);
    Ok(SecretKey {
        q,
        m,
        lambda,
        gamma,
        problem_digest: digest(p),
        seed,
        used: AtomicBool::new(false),
    })
}

/// Encrypts `p` under `k`, consuming the key's single use.
pub fn prob_enc(k: &SecretKey, p: &LpProblem) -> Result<EncryptedProblem> {
    if digest(p) != k.problem_digest {
        return Err(Error::KeyProblemMismatch);
    }
    k.claim()?;
    Ok(disguise(k, p))
}

/// The encryption map itself, without the digest or one-time checks.
pub fn disguise(k: &SecretKey, p: &LpProblem) -> EncryptedProblem {
    let eq = k.q.mul(&p.eq).mul(&k.m);
    let rhs = k.q.mul_vec(&p.rhs);
    let ineq = p.ineq.sub(&k.lambda.mul(&p.eq)).mul(&k.m);
    let cost = k
        .m
        .tr_mul_vec(&p.cost)
        .into_iter()
        .map(|v| k.gamma * v)
        .collect();
    EncryptedProblem {
        m: p.m,
        n: p.n,
        eq,
        ineq,
        rhs,
        cost,
        problem_digest: k.problem_digest,
    }
}

/// Views a plaintext problem as a solver input without disguising it.
pub fn identity_view(p: &LpProblem) -> EncryptedProblem {
    EncryptedProblem {
        m: p.m,
        n: p.n,
        eq: p.eq.clone(),
        ineq: p.ineq.clone(),
        rhs: p.rhs.clone(),
        cost: p.cost.clone(),
        problem_digest: digest(p),
    }
}

/// Verifies the cloud's answer and decrypts it.
pub fn result_dec(
    k: &SecretKey,
    p: &LpProblem,
    r: &CloudResult,
    tol: &Tolerance,
) -> Result<VerifiedSolution> {
    if digest(p) != k.problem_digest {
        return Err(Error::KeyProblemMismatch);
    }
    let e = disguise(k, p);
    result_dec_encrypted(k, &e, r, tol)
}

/// Same as [`result_dec`] when the customer kept the encrypted problem.
pub fn result_dec_encrypted(
    k: &SecretKey,
    e: &EncryptedProblem,
    r: &CloudResult,
    tol: &Tolerance,
) -> Result<VerifiedSolution> {
    if e.problem_digest != k.problem_digest {
        return Err(Error::KeyProblemMismatch);
    }
    let verdict = match &r.outcome {
        Outcome::Optimal { y, s, t } => check_optimal(e, y, s, t, tol)?,
        Outcome::Infeasible { s, t } => check_infeasible(e, s, t, tol)?,
        Outcome::Unbounded { y0, d } => check_unbounded(e, y0, d, tol)?,
    };
    if let Verdict::Reject(rejection) = verdict {
        return Err(Error::VerificationFailed(rejection));
    }
    Ok(decrypt(k, e, &r.outcome))
}

/// Decryption only; callers must have verified `outcome` already.
pub fn decrypt(k: &SecretKey, e: &EncryptedProblem, outcome: &Outcome) -> VerifiedSolution {
    match outcome {
        Outcome::Optimal { y, .. } => VerifiedSolution {
            status: Status::Optimal,
            x: k.decrypt_point(y),
            objective: Some(dot(&e.cost, y) / k.gamma),
            ray: None,
        },
        Outcome::Infeasible { .. } => VerifiedSolution {
            status: Status::Infeasible,
            x: Vec::new(),
            objective: None,
            ray: None,
        },
        Outcome::Unbounded { y0, d } => VerifiedSolution {
            status: Status::Unbounded,
            x: k.decrypt_point(y0),
            objective: None,
            ray: Some(k.decrypt_point(d)),
        },
    }
}
