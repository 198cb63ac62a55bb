//! Randomized key material: well-conditioned nonsingular matrices and the
//! row-space multiplier `λ` with `λ·b = 0`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, inverse_norm_one_estimate, Lu, Matrix};
use crate::problem::{LpProblem, Tolerance};

/// Condition-number cap (1-norm estimate) for generated matrices.
pub const MAX_CONDITION: f64 = 1e6;

/// Resampling budget for `λ`.
pub const LAMBDA_ATTEMPTS: usize = 32;

/// Draws `P·L·U` with `L` unit lower triangular and `U` upper triangular
/// with diagonal magnitudes in `[1/2, 2]`, so `|det| ≥ 2^-dim`.
///
/// Off-diagonal entries are uniform on `[-1, 1]` scaled by `1/√dim`;
/// unscaled random triangular factors are exponentially ill-conditioned in
/// the dimension. Draws whose estimated condition number exceeds
/// [`MAX_CONDITION`] are discarded.
pub fn random_nonsingular<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let candidate = draw_plu(dim, rng);
        let lu = Lu::factor(&candidate);
        let cond = candidate.norm_one() * inverse_norm_one_estimate(&lu);
        if cond.is_finite() && cond <= MAX_CONDITION {
            return candidate;
        }
    }
}

fn draw_plu<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.shuffle(rng);
    let mut lower = Matrix::identity(dim);
    let mut upper = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..i {
            lower[(i, j)] = scale * rng.gen_range(-1.0..=1.0);
        }
        let magnitude = rng.gen_range(0.5..=2.0);
        upper[(i, i)] = if rng.gen::<bool>() { magnitude } else { -magnitude };
        for j in i + 1..dim {
            upper[(i, j)] = scale * rng.gen_range(-1.0..=1.0);
        }
    }
    let lu = lower.mul(&upper);
    let mut out = Matrix::zeros(dim, dim);
    for (i, &target) in perm.iter().enumerate() {
        out.row_mut(target).copy_from_slice(lu.row(i));
    }
    out
}

/// Removes the component of `row` along `b`. Rows are left as drawn when
/// `b = 0`.
pub fn project_orthogonal(row: &mut [f64], b: &[f64]) {
    let bb = dot(b, b);
    if bb == 0.0 {
        return;
    }
    let coef = dot(row, b) / bb;
    for (r, bi) in row.iter_mut().zip(b) {
        *r -= coef * bi;
    }
}

/// Draws an `n × m` matrix `λ` with `λ·b = 0` and `B − λ·A` nonsingular.
///
/// A draw is accepted when every LU pivot of `B − λ·A` exceeds
/// `pivot_eps · max(1, ‖B − λA‖∞)`.
pub fn random_lambda<R: Rng + ?Sized>(
    p: &LpProblem,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Matrix> {
    for _ in 0..LAMBDA_ATTEMPTS {
        let mut lambda = Matrix::zeros(p.n, p.m);
        for i in 0..p.n {
            let row = lambda.row_mut(i);
            for v in row.iter_mut() {
                *v = rng.gen_range(-1.0..=1.0);
            }
            project_orthogonal(row, &p.rhs);
        }
        if mixed_inequality_is_nonsingular(p, &lambda, tol) {
            return Ok(lambda);
        }
    }
    Err(Error::SingularityExhausted(LAMBDA_ATTEMPTS))
}

pub(crate) fn mixed_inequality_is_nonsingular(
    p: &LpProblem,
    lambda: &Matrix,
    tol: &Tolerance,
) -> bool {
    let mixed = p.ineq.sub(&lambda.mul(&p.eq));
    let lu = Lu::factor(&mixed);
    lu.min_pivot() > tol.pivot_eps * mixed.norm_inf().max(1.0)
}
