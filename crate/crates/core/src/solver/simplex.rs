//! Two-phase revised simplex for `min cᵀz s.t. A·z = b, z ≥ 0`.
//!
//! Phase 1 minimizes the sum of one artificial variable per row (rows are
//! sign-flipped first so `b ≥ 0`). Pricing is Dantzig's rule until
//! `3·(m+n)` consecutive degenerate pivots, then Bland's rule until the next
//! improving pivot. Ratio-test ties go to the smallest variable index.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_max, Matrix};
use crate::problem::Tolerance;

use super::basis::BasisFactor;

#[derive(Clone, Debug, PartialEq)]
pub enum SimplexStatus {
    /// Optimal basic solution with the dual `p` (from `Bᵀp = c_B`) and the
    /// reduced costs `c − Aᵀp`.
    Optimal {
        z: Vec<f64>,
        dual: Vec<f64>,
        reduced: Vec<f64>,
    },
    /// `farkas` satisfies `Aᵀs ≤ 0` and `bᵀs > 0`, normalized to `‖s‖∞ = 1`.
    Infeasible { farkas: Vec<f64> },
    /// Feasible `z` and ray `d ≥ 0` with `A·d = 0`, `cᵀd < 0`.
    Unbounded { z: Vec<f64>, ray: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexSolution {
    pub status: SimplexStatus,
    pub iterations: u64,
}

enum PhaseEnd {
    Optimal,
    Unbounded { entering: usize, alpha: Vec<f64> },
}

struct RevisedSimplex {
    m: usize,
    n: usize,
    /// Transpose of the constraint matrix, rows scaled by `sign` so that
    /// `rhs ≥ 0`.
    at: Matrix,
    rhs: Vec<f64>,
    sign: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    x_b: Vec<f64>,
    factor: BasisFactor,
    iterations: u64,
    max_iterations: u64,
    pivot_eps: f64,
}

impl RevisedSimplex {
    fn new(a: &Matrix, b: &[f64], pivot_eps: f64) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut flipped = a.clone();
        for (i, &s) in sign.iter().enumerate() {
            if s < 0.0 {
                flipped.row_mut(i).iter_mut().for_each(|v| *v = -*v);
            }
        }
        let rhs: Vec<f64> = b.iter().zip(&sign).map(|(v, s)| v * s).collect();
        let mut position = vec![None; n + m];
        for i in 0..m {
            position[n + i] = Some(i);
        }
        RevisedSimplex {
            m,
            n,
            at: flipped.transpose(),
            x_b: rhs.clone(),
            rhs,
            sign,
            basis: (n..n + m).collect(),
            position,
            factor: BasisFactor::new(&Matrix::identity(m)),
            iterations: 0,
            max_iterations: 10_000 + 100 * (m + n) as u64,
            pivot_eps,
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        if j < self.n {
            self.at.row(j).to_vec()
        } else {
            let mut e = vec![0.0; self.m];
            e[j - self.n] = 1.0;
            e
        }
    }

    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            dot(self.at.row(j), y)
        } else {
            y[j - self.n]
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let mut basis_matrix = Matrix::zeros(self.m, self.m);
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                basis_matrix[(i, k)] = v;
            }
        }
        self.factor = BasisFactor::new(&basis_matrix);
        if self.factor.min_pivot() <= self.pivot_eps * basis_matrix.norm_inf().max(1.0) {
            return Err(Error::NumericalInstability("basis became singular".into()));
        }
        self.x_b = self.factor.ftran(&self.rhs);
        let check = basis_matrix.mul_vec(&self.x_b);
        let residual = check
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |acc, (l, r)| f64::max(acc, (l - r).abs()));
        if residual.is_nan() || residual > 1e-6 * norm_max(&self.rhs).max(1.0) {
            return Err(Error::NumericalInstability(format!(
                "basis residual {residual:e} after refactorization"
            )));
        }
        Ok(())
    }

    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let c_b: Vec<f64> = self.basis.iter().map(|&j| costs[j]).collect();
        self.factor.btran(&c_b)
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: Vec<f64>, theta: f64) -> Result<()> {
        for (i, (x, a)) in self.x_b.iter_mut().zip(&alpha).enumerate() {
            if i != row {
                *x -= theta * a;
            }
        }
        self.x_b[row] = theta;
        let leaving = self.basis[row];
        self.position[leaving] = None;
        self.position[entering] = Some(row);
        self.basis[row] = entering;
        self.factor.push(row, alpha);
        self.iterations += 1;
        if self.factor.needs_refactor() {
            self.refactor()?;
        }
        Ok(())
    }

    /// Runs simplex iterations for `costs` (indexed over real then artificial
    /// variables), letting only real columns enter.
    fn run_phase(&mut self, costs: &[f64]) -> Result<PhaseEnd> {
        let opt_tol = 1e-9 * norm_max(&costs[..self.n]).max(1.0);
        let degenerate_limit = 3 * (self.m + self.n);
        let mut degenerate_run = 0;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::NumericalInstability("iteration limit reached".into()));
            }
            let y = self.duals(costs);

            let mut entering = None;
            let mut best = -opt_tol;
            for j in 0..self.n {
                if self.position[j].is_some() {
                    continue;
                }
                let d = costs[j] - self.column_dot(j, &y);
                if bland {
                    if d < -opt_tol {
                        entering = Some(j);
                        break;
                    }
                } else if d < best {
                    best = d;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let alpha = self.factor.ftran(&self.column(q));
            let piv_tol = 1e-9 * norm_max(&alpha).max(1.0);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &ai) in alpha.iter().enumerate() {
                if ai <= piv_tol {
                    continue;
                }
                let theta = self.x_b[i].max(0.0) / ai;
                leave = match leave {
                    None => Some((i, theta)),
                    Some((r, best_theta)) => {
                        let tie = 1e-12 * (1.0 + best_theta);
                        if theta < best_theta - tie
                            || (theta <= best_theta + tie && self.basis[i] < self.basis[r])
                        {
                            Some((i, theta))
                        } else {
                            Some((r, best_theta))
                        }
                    }
                };
            }
            let Some((row, theta)) = leave else {
                return Ok(PhaseEnd::Unbounded { entering: q, alpha });
            };

            if theta <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
            self.pivot(row, q, alpha, theta)?;
        }
    }

    /// Pivots zero-level artificial variables out of the basis.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for row in 0..self.m {
            if self.basis[row] < self.n {
                continue;
            }
            let mut e = vec![0.0; self.m];
            e[row] = 1.0;
            let rho = self.factor.btran(&e);
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.position[j].is_some() {
                    continue;
                }
                let v = self.column_dot(j, &rho).abs();
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, v)) if v > 1e-7 => {
                    let alpha = self.factor.ftran(&self.column(j));
                    let theta = self.x_b[row] / alpha[row];
                    self.pivot(row, j, alpha, theta)?;
                }
                _ => {
                    return Err(Error::NumericalInstability(
                        "equality rows are linearly dependent".into(),
                    ))
                }
            }
        }
        self.refactor()
    }

    fn primal(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        for (&j, &v) in self.basis.iter().zip(&self.x_b) {
            if j < self.n {
                z[j] = v;
            }
        }
        z
    }

    fn unflip(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.sign).map(|(v, s)| v * s).collect()
    }
}

/// Solves `min cᵀz s.t. A·z = b, z ≥ 0` for a full-row-rank `A`.
pub fn simplex_solve(a: &Matrix, b: &[f64], c: &[f64], tol: &Tolerance) -> Result<SimplexSolution> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m || c.len() != n || m == 0 || n < m {
        return Err(Error::DimensionMismatch(format!(
            "standard form with A {m}x{n}, b {}, c {}",
            b.len(),
            c.len()
        )));
    }
    let mut lp = RevisedSimplex::new(a, b, tol.pivot_eps);

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    if let PhaseEnd::Unbounded { .. } = lp.run_phase(&phase1)? {
        return Err(Error::NumericalInstability("phase 1 reported unbounded".into()));
    }
    lp.refactor()?;
    let infeasibility: f64 = lp
        .basis
        .iter()
        .zip(&lp.x_b)
        .filter(|(&j, _)| j >= n)
        .map(|(_, &v)| v.max(0.0))
        .sum();
    if infeasibility > tol.feas_rel * norm_max(b).max(1.0) {
        let y = lp.unflip(&lp.duals(&phase1));
        let scale = norm_max(&y);
        let farkas = y.iter().map(|v| v / scale).collect();
        return Ok(SimplexSolution {
            status: SimplexStatus::Infeasible { farkas },
            iterations: lp.iterations,
        });
    }
    lp.drive_out_artificials()?;

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    let status = match lp.run_phase(&phase2)? {
        PhaseEnd::Optimal => {
            lp.refactor()?;
            let dual = lp.unflip(&lp.duals(&phase2));
            let at_p = a.tr_mul_vec(&dual);
            let reduced = c.iter().zip(&at_p).map(|(c, v)| c - v).collect();
            SimplexStatus::Optimal {
                z: lp.primal(),
                dual,
                reduced,
            }
        }
        PhaseEnd::Unbounded { entering, alpha } => {
            let mut ray = vec![0.0; n];
            ray[entering] = 1.0;
            for (&j, &a) in lp.basis.iter().zip(&alpha) {
                if j < n {
                    ray[j] = -a;
                }
            }
            SimplexStatus::Unbounded {
                z: lp.primal(),
                ray,
            }
        }
    };
    Ok(SimplexSolution {
        status,
        iterations: lp.iterations,
    })
}
