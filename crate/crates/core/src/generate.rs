//! Seeded random instances with a known outcome.
//!
//! - feasible: `x₀ ∈ [1,2]ⁿ`, `b = A·x₀`, and `c = Aᵀp + Bᵀt` with `t ≥ 0`,
//!   so `cᵀx ≥ pᵀb` on the feasible set.
//! - infeasible: `A` is corrected so that `Aᵀs = −Bᵀt` with `t > 0`, and `b`
//!   so that `bᵀs = 1`; `(s, t)` is then a Farkas certificate.
//! - unbounded: a ray `d` with `B·d > 0` is put in the null space of `A`
//!   and `c` is tilted so `cᵀd < 0`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_max, Lu, Matrix};
use crate::problem::{validate_problem, LpProblem};
use crate::random::random_nonsingular;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Feasible,
    Infeasible,
    Unbounded,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "feasible" => Ok(Mode::Feasible),
            "infeasible" => Ok(Mode::Infeasible),
            "unbounded" => Ok(Mode::Unbounded),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Feasible => "feasible",
            Mode::Infeasible => "infeasible",
            Mode::Unbounded => "unbounded",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    /// Draw a random nonsingular `B` instead of the identity.
    pub random_ineq: bool,
}

impl GenOptions {
    pub fn new(n: usize, m: usize, mode: Mode) -> Self {
        GenOptions {
            n,
            m,
            mode,
            random_ineq: false,
        }
    }
}

fn uniform_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0))
}

fn uniform_vec<R: Rng>(len: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Random nonsingular `B` whose rows are signed so that `B·x > 0`.
fn positive_on<R: Rng>(x: &[f64], rng: &mut R) -> Matrix {
    loop {
        let mut b = random_nonsingular(x.len(), rng);
        let bx = b.mul_vec(x);
        let floor = 1e-3 * norm_max(&bx);
        if bx.iter().any(|v| v.abs() <= floor) {
            continue;
        }
        for (i, v) in bx.iter().enumerate() {
            if *v < 0.0 {
                b.row_mut(i).iter_mut().for_each(|e| *e = -*e);
            }
        }
        return b;
    }
}

/// Draws one instance. Deterministic in `(opts, seed)`.
pub fn generate(opts: &GenOptions, seed: u64) -> Result<LpProblem> {
    let GenOptions { n, m, mode, .. } = *opts;
    if m == 0 || n < m {
        return Err(Error::DimensionMismatch(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if mode == Mode::Unbounded && n == m {
        return Err(Error::DimensionMismatch("an unbounded instance needs n > m".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Redraw on the (measure-zero) rank-deficient case.
    for _ in 0..16 {
        let p = match mode {
            Mode::Feasible => feasible(opts, &mut rng),
            Mode::Infeasible => infeasible(opts, &mut rng),
            Mode::Unbounded => unbounded(opts, &mut rng),
        };
        if validate_problem(&p).is_ok() {
            return Ok(p);
        }
    }
    Err(Error::NumericalInstability("could not draw a full-rank instance".into()))
}

fn feasible<R: Rng>(opts: &GenOptions, rng: &mut R) -> LpProblem {
    let (n, m) = (opts.n, opts.m);
    let a = uniform_matrix(m, n, rng);
    let x0 = uniform_vec(n, 1.0, 2.0, rng);
    let ineq = if opts.random_ineq {
        positive_on(&x0, rng)
    } else {
        Matrix::identity(n)
    };
    let rhs = a.mul_vec(&x0);
    let p = uniform_vec(m, -1.0, 1.0, rng);
    let t = uniform_vec(n, 0.0, 1.0, rng);
    let cost = add(&a.tr_mul_vec(&p), &ineq.tr_mul_vec(&t));
    LpProblem {
        m,
        n,
        eq: a,
        ineq,
        rhs,
        cost,
    }
}

fn infeasible<R: Rng>(opts: &GenOptions, rng: &mut R) -> LpProblem {
    let (n, m) = (opts.n, opts.m);
    let ineq = if opts.random_ineq {
        let x = uniform_vec(n, 1.0, 2.0, rng);
        positive_on(&x, rng)
    } else {
        Matrix::identity(n)
    };
    let s = loop {
        let s = uniform_vec(m, -1.0, 1.0, rng);
        if norm_max(&s) > 0.1 {
            break s;
        }
    };
    let t = uniform_vec(n, 0.5, 1.5, rng);
    let ss = dot(&s, &s);
    // A ← A₀ − s·(sᵀA₀ + tᵀB)/(sᵀs), so that sᵀA = −tᵀB.
    let mut a = uniform_matrix(m, n, rng);
    let target = add(&a.tr_mul_vec(&s), &ineq.tr_mul_vec(&t));
    for (i, si) in s.iter().enumerate() {
        let f = si / ss;
        for (v, g) in a.row_mut(i).iter_mut().zip(&target) {
            *v -= f * g;
        }
    }
    let mut rhs = uniform_vec(m, -1.0, 1.0, rng);
    let shift = (1.0 - dot(&rhs, &s)) / ss;
    for (b, si) in rhs.iter_mut().zip(&s) {
        *b += shift * si;
    }
    let cost = uniform_vec(n, -1.0, 1.0, rng);
    LpProblem {
        m,
        n,
        eq: a,
        ineq,
        rhs,
        cost,
    }
}

fn unbounded<R: Rng>(opts: &GenOptions, rng: &mut R) -> LpProblem {
    let (n, m) = (opts.n, opts.m);
    let x0 = uniform_vec(n, 1.0, 2.0, rng);
    let ineq = if opts.random_ineq {
        positive_on(&x0, rng)
    } else {
        Matrix::identity(n)
    };
    let w = uniform_vec(n, 0.5, 1.5, rng);
    let d = Lu::factor(&ineq).solve(&w);
    let dd = dot(&d, &d);
    let mut a = uniform_matrix(m, n, rng);
    for i in 0..m {
        let f = dot(a.row(i), &d) / dd;
        for (v, dj) in a.row_mut(i).iter_mut().zip(&d) {
            *v -= f * dj;
        }
    }
    let rhs = a.mul_vec(&x0);
    let mut cost = uniform_vec(n, -1.0, 1.0, rng);
    let slope = dd.sqrt();
    let f = (dot(&cost, &d) + slope) / dd;
    for (c, dj) in cost.iter_mut().zip(&d) {
        *c -= f * dj;
    }
    LpProblem {
        m,
        n,
        eq: a,
        ineq,
        rhs,
        cost,
    }
}

/// An instance whose optimum is unique and nondegenerate, returned with
/// that optimum. `B = I`; `m` coordinates of `x*` lie in `[1, 2]`, the rest
/// are zero with reduced costs in `[1/2, 3/2]`.
pub fn generate_nondegenerate(n: usize, m: usize, seed: u64) -> Result<(LpProblem, Vec<f64>)> {
    if m == 0 || n < m {
        return Err(Error::DimensionMismatch(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let a = uniform_matrix(m, n, &mut rng);
        let basis = sample(&mut rng, n, m).into_vec();
        let basis_matrix = Matrix::from_fn(m, m, |i, k| a[(i, basis[k])]);
        let lu = Lu::factor(&basis_matrix);
        if lu.min_pivot() < 1e-2 {
            continue;
        }
        let mut x = vec![0.0; n];
        let mut t = vec![0.0; n];
        for j in 0..n {
            if basis.contains(&j) {
                x[j] = rng.gen_range(1.0..=2.0);
            } else {
                t[j] = rng.gen_range(0.5..=1.5);
            }
        }
        let p = uniform_vec(m, -1.0, 1.0, &mut rng);
        let problem = LpProblem {
            m,
            n,
            rhs: a.mul_vec(&x),
            cost: add(&a.tr_mul_vec(&p), &t),
            eq: a,
            ineq: Matrix::identity(n),
        };
        if validate_problem(&problem).is_ok() {
            return Ok((problem, x));
        }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
