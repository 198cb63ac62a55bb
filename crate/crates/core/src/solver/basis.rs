//! Dense LU of the simplex basis with product-form (eta) updates.

use crate::linalg::{Lu, Matrix};

/// Pivots between full refactorizations.
pub const REFACTOR_INTERVAL: usize = 50;

struct Eta {
    pos: usize,
    col: Vec<f64>,
}

/// Represents `B_k = B_0 · E_1 ⋯ E_k`, where each `E_i` is the identity with
/// column `pos` replaced by the entering column expressed in the previous
/// basis.
pub(crate) struct BasisFactor {
    lu: Lu,
    etas: Vec<Eta>,
}

impl BasisFactor {
    pub(crate) fn new(basis_matrix: &Matrix) -> Self {
        BasisFactor {
            lu: Lu::factor(basis_matrix),
            etas: Vec::new(),
        }
    }

    pub(crate) fn min_pivot(&self) -> f64 {
        self.lu.min_pivot()
    }

    pub(crate) fn needs_refactor(&self) -> bool {
        self.etas.len() >= REFACTOR_INTERVAL
    }

    pub(crate) fn push(&mut self, pos: usize, col: Vec<f64>) {
        self.etas.push(Eta { pos, col });
    }

    /// Solves `B·x = a`.
    pub(crate) fn ftran(&self, a: &[f64]) -> Vec<f64> {
        let mut x = self.lu.solve(a);
        for eta in &self.etas {
            let xr = x[eta.pos] / eta.col[eta.pos];
            if xr != 0.0 {
                for (i, (xi, ci)) in x.iter_mut().zip(&eta.col).enumerate() {
                    if i != eta.pos {
                        *xi -= ci * xr;
                    }
                }
            }
            x[eta.pos] = xr;
        }
        x
    }

    /// Solves `Bᵀ·y = c`.
    pub(crate) fn btran(&self, c: &[f64]) -> Vec<f64> {
        let mut v = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut acc = v[eta.pos];
            for (i, (vi, ci)) in v.iter().zip(&eta.col).enumerate() {
                if i != eta.pos {
                    acc -= ci * vi;
                }
            }
            v[eta.pos] = acc / eta.col[eta.pos];
        }
        self.lu.solve_transposed(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm_max, sub_vec};

    #[test]
    fn eta_updates_match_fresh_factorization() {
        let mut basis = Matrix::from_rows(&[
            vec![2.0, 0.0, 1.0],
            vec![1.0, 3.0, 0.0],
            vec![0.0, 1.0, 4.0],
        ])
        .unwrap();
        let mut factor = BasisFactor::new(&basis);
        let replacements = [(1, vec![1.0, -1.0, 2.0]), (0, vec![0.5, 2.0, 1.0])];
        for (pos, col) in replacements {
            let alpha = factor.ftran(&col);
            factor.push(pos, alpha);
            for i in 0..3 {
                basis[(i, pos)] = col[i];
            }
        }
        let fresh = Lu::factor(&basis);
        let rhs = [1.0, 2.0, 3.0];
        assert!(norm_max(&sub_vec(&factor.ftran(&rhs), &fresh.solve(&rhs))) < 1e-12);
        assert!(
            norm_max(&sub_vec(&factor.btran(&rhs), &fresh.solve_transposed(&rhs))) < 1e-12
        );
    }
}
