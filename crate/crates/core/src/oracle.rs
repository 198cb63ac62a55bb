//! Brute-force LP oracle by vertex enumeration.
//!
//! Shares no code with the simplex path: the standard-form reduction is
//! redone here with Gauss-Jordan elimination under complete pivoting, and
//! every `m`-column basis of `Â` is examined directly.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problem::LinearProgram;

/// Combinatorial cutoff on the variable count.
pub const MAX_VARS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum OracleOutcome {
    /// Optimal value and every optimal vertex, in the problem's own
    /// coordinates.
    Optimal { value: f64, vertices: Vec<Vec<f64>> },
    Infeasible,
    Unbounded,
}

/// Solves `M·X = R` by Gauss-Jordan with complete pivoting. `None` when a
/// pivot falls below `eps · max(1, max|M|)`.
fn gauss_jordan(mat: &Matrix, rhs: &Matrix, eps: f64) -> Option<Matrix> {
    let n = mat.rows();
    let k = rhs.cols();
    let width = n + k;
    let mut w = Matrix::from_fn(n, width, |i, j| if j < n { mat[(i, j)] } else { rhs[(i, j - n)] });
    let threshold = eps * mat.max_abs().max(1.0);
    let mut col_of: Vec<usize> = (0..n).collect();
    for step in 0..n {
        let (mut pi, mut pj, mut best) = (step, step, -1.0);
        for i in step..n {
            for j in step..n {
                let v = w[(i, j)].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= threshold {
            return None;
        }
        w.swap_rows(step, pi);
        if pj != step {
            for i in 0..n {
                let tmp = w[(i, step)];
                w[(i, step)] = w[(i, pj)];
                w[(i, pj)] = tmp;
            }
            col_of.swap(step, pj);
        }
        let pivot = w[(step, step)];
        for j in 0..width {
            w[(step, j)] /= pivot;
        }
        for i in 0..n {
            if i == step {
                continue;
            }
            let f = w[(i, step)];
            if f != 0.0 {
                for j in 0..width {
                    let v = w[(step, j)];
                    w[(i, j)] -= f * v;
                }
            }
        }
    }
    // Row `i` now holds the solution for the unknown `col_of[i]`.
    let mut out = Matrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            out[(col_of[i], j)] = w[(i, n + j)];
        }
    }
    Some(out)
}

struct Reduced {
    a: Matrix,
    b: Vec<f64>,
    c: Vec<f64>,
    back: Matrix,
}

fn reduce<P: LinearProgram + ?Sized>(p: &P, eps: f64) -> Result<Reduced> {
    let n = p.num_vars();
    let back = gauss_jordan(p.ineq_matrix(), &Matrix::identity(n), eps)
        .ok_or(Error::SingularMatrix("B"))?;
    let a = p.eq_matrix();
    let a_hat = Matrix::from_fn(a.rows(), n, |i, j| (0..n).map(|k| a[(i, k)] * back[(k, j)]).sum());
    let c_hat = (0..n)
        .map(|j| (0..n).map(|k| back[(k, j)] * p.cost()[k]).sum())
        .collect();
    Ok(Reduced {
        a: a_hat,
        b: p.eq_rhs().to_vec(),
        c: c_hat,
        back,
    })
}

fn submatrix(a: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(a.rows(), cols.len(), |i, j| a[(i, cols[j])])
}

fn column_vector(v: &[f64]) -> Matrix {
    Matrix::from_fn(v.len(), 1, |i, _| v[i])
}

/// Basic solutions of `[A | I]` with artificials, minimizing their sum.
/// Returns the least total artificial value over feasible bases.
fn phase_one_value(a: &Matrix, b: &[f64], eps: f64, feas_tol: f64) -> f64 {
    let (m, n) = (a.rows(), a.cols());
    let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let ext = Matrix::from_fn(m, n + m, |i, j| {
        if j < n {
            sign[i] * a[(i, j)]
        } else if j - n == i {
            1.0
        } else {
            0.0
        }
    });
    let rhs = column_vector(&b.iter().zip(&sign).map(|(v, s)| v * s).collect::<Vec<_>>());
    let mut best = f64::INFINITY;
    for cols in (0..n + m).combinations(m) {
        let Some(sol) = gauss_jordan(&submatrix(&ext, &cols), &rhs, eps) else {
            continue;
        };
        let values = sol.column(0);
        if values.iter().any(|&v| v < -feas_tol) {
            continue;
        }
        let artificial: f64 = cols
            .iter()
            .zip(&values)
            .filter(|(&j, _)| j >= n)
            .map(|(_, &v)| v.max(0.0))
            .sum();
        best = best.min(artificial);
    }
    best
}

/// Enumerates every basis of the reduced problem.
pub fn enumerate_solve<P: LinearProgram + ?Sized>(p: &P, feas_tol: f64) -> Result<OracleOutcome> {
    let n = p.num_vars();
    if n > MAX_VARS {
        return Err(Error::TooLarge { n, limit: MAX_VARS });
    }
    let eps = 1e-10;
    let r = reduce(p, eps)?;
    let m = r.a.rows();
    let scale = r.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = feas_tol * scale;
    let rhs = column_vector(&r.b);

    let mut vertices: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut has_ray = false;
    for cols in (0..n).combinations(m) {
        let basis = submatrix(&r.a, &cols);
        let nonbasic: Vec<usize> = (0..n).filter(|j| !cols.contains(j)).collect();
        let mut rhs_block = Matrix::zeros(m, 1 + nonbasic.len());
        for i in 0..m {
            rhs_block[(i, 0)] = rhs[(i, 0)];
            for (k, &j) in nonbasic.iter().enumerate() {
                rhs_block[(i, k + 1)] = r.a[(i, j)];
            }
        }
        let Some(sol) = gauss_jordan(&basis, &rhs_block, eps) else {
            continue;
        };

        let basic_values = sol.column(0);
        if basic_values.iter().all(|&v| v >= -tol) {
            let mut z = vec![0.0; n];
            for (&j, &v) in cols.iter().zip(&basic_values) {
                z[j] = v.max(0.0);
            }
            let value: f64 = z.iter().zip(&r.c).map(|(a, b)| a * b).sum();
            vertices.push((value, z));
        }

        // Edge direction: raise nonbasic j, basics move by −B⁻¹a_j.
        for (k, &j) in nonbasic.iter().enumerate() {
            let step = sol.column(k + 1);
            if step.iter().all(|&v| v <= 1e-12) {
                let slope = r.c[j] - cols.iter().zip(&step).map(|(&b, &s)| r.c[b] * s).sum::<f64>();
                let length = step.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
                if slope < -1e-9 * length * r.c.iter().fold(1.0f64, |acc, v| acc.max(v.abs())) {
                    has_ray = true;
                }
            }
        }
    }

    if vertices.is_empty() {
        let artificial = phase_one_value(&r.a, &r.b, eps, tol);
        if artificial > tol {
            return Ok(OracleOutcome::Infeasible);
        }
        return Err(Error::NumericalInstability(
            "no feasible vertex although the auxiliary problem reaches zero".into(),
        ));
    }
    if has_ray {
        return Ok(OracleOutcome::Unbounded);
    }

    let best = vertices.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    let value_tol = 1e-9 * best.abs().max(1.0);
    let mut seen = std::collections::BTreeSet::new();
    let mut optimal = Vec::new();
    for (value, z) in &vertices {
        if *value > best + value_tol {
            continue;
        }
        let y = r.back.mul_vec(z);
        let key: Vec<i64> = y.iter().map(|v| (v * 1e9).round() as i64).collect();
        if seen.insert(key) {
            optimal.push(y);
        }
    }
    Ok(OracleOutcome::Optimal {
        value: best,
        vertices: optimal,
    })
}
