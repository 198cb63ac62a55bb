//! Outsourcing linear programs to an untrusted solver.
//!
//! The customer disguises `min cᵀx s.t. Ax = b, Bx ≥ 0` with a one-time
//! secret key ([`transform`]), the cloud solves the disguised problem and
//! returns a duality certificate ([`solver`]), and the customer checks the
//! certificate in `O(n²)` ([`verify`]) before mapping the answer back.
//!
//! ```
//! use lpcloak::prelude::*;
//!
//! let p = generate(&GenOptions::new(8, 4, Mode::Feasible), 1).unwrap();
//! let key = keygen(&p, 7).unwrap();
//! let disguised = prob_enc(&key, &p).unwrap();
//! let answer = proof_gen(&disguised, &Tolerance::default()).unwrap();
//! let solution = result_dec(&key, &p, &answer, &Tolerance::default()).unwrap();
//! assert_eq!(solution.status, Status::Optimal);
//! ```

pub mod bench;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod random;
pub mod solver;
pub mod transform;
pub mod verify;
pub mod wire;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use problem::{EncryptedProblem, LinearProgram, LpProblem, ProblemDigest, Tolerance};
pub use solver::{CloudResult, Outcome};
pub use transform::{SecretKey, Status, VerifiedSolution};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::generate::{generate, generate_nondegenerate, GenOptions, Mode};
    pub use crate::linalg::Matrix;
    pub use crate::oracle::{enumerate_solve, OracleOutcome};
    pub use crate::problem::{
        digest, validate_problem, EncryptedProblem, LinearProgram, LpProblem, ProblemDigest,
        Tolerance,
    };
    pub use crate::random::{random_lambda, random_nonsingular};
    pub use crate::solver::{proof_gen, to_standard_form, CloudResult, Outcome};
    pub use crate::transform::{
        decrypt, disguise, identity_view, keygen, prob_enc, result_dec, result_dec_encrypted,
        SecretKey, Status, VerifiedSolution,
    };
    pub use crate::verify::{check_infeasible, check_optimal, check_unbounded, Condition, Verdict};
}
