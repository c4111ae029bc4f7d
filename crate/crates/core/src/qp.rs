//! Quadratic forms and equality-constrained minimisation through the
//! first-order (KKT) system.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::RCOND_THRESHOLD;
use crate::util::norm1;

/// `f(x) = xᵀ H x + gᵀ x + c` with `H` symmetric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quadratic {
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
    pub c: f64,
}

impl Quadratic {
    pub fn zeros(n: usize) -> Self {
        Quadratic {
            h: DMatrix::zeros(n, n),
            g: DVector::zeros(n),
            c: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// Adds `w · (aᵀx + b)²` where `a` is given sparsely as (index, coefficient).
    pub fn add_square(&mut self, a: &[(usize, f64)], b: f64, w: f64) {
        for &(i, ai) in a {
            for &(j, aj) in a {
                self.h[(i, j)] += w * ai * aj;
            }
            self.g[i] += 2.0 * w * ai * b;
        }
        self.c += w * b * b;
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (x.transpose() * &self.h * &x)[(0, 0)] + self.g.dot(&x) + self.c
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (2.0 * &self.h * x + &self.g).as_slice().to_vec()
    }

    /// Minimiser with the variables in `pinned` held at zero.
    pub fn minimize_pinned(&self, pinned: &[usize]) -> Result<Vec<f64>> {
        let free: Vec<usize> = (0..self.dim()).filter(|i| !pinned.contains(i)).collect();
        let mut x = vec![0.0; self.dim()];
        if free.is_empty() {
            return Ok(x);
        }
        let a = DMatrix::from_fn(free.len(), free.len(), |r, s| {
            2.0 * self.h[(free[r], free[s])]
        });
        let b = DVector::from_fn(free.len(), |r, _| -self.g[free[r]]);
        let y = solve_checked(a, b)?;
        for (r, &i) in free.iter().enumerate() {
            x[i] = y[r];
        }
        Ok(x)
    }
}

/// Minimises `½ yᵀ Q y + qᵀ y` subject to `M y = r`.
pub fn equality_qp(
    q_mat: &DMatrix<f64>,
    q: &DVector<f64>,
    m: &DMatrix<f64>,
    r: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = q.len();
    let k = r.len();
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(q_mat);
    kkt.view_mut((n, 0), (k, n)).copy_from(m);
    kkt.view_mut((0, n), (n, k)).copy_from(&m.transpose());
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(&(-q));
    rhs.rows_mut(n, k).copy_from(r);
    let sol = solve_checked(kkt, rhs)?;
    Ok(sol.rows(0, n).into_owned())
}

fn solve_checked(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() == 0 {
        return Ok(b);
    }
    let norm = norm1(&a);
    let lu = a.lu();
    let rcond = match lu.try_inverse() {
        Some(inv) if norm > 0.0 => 1.0 / (norm * norm1(&inv)),
        _ => 0.0,
    };
    if rcond.is_nan() || rcond < RCOND_THRESHOLD {
        return Err(Error::ConstraintInconsistent { rcond });
    }
    Ok(lu.solve(&b).expect("nonsingular after condition check"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn squares_accumulate() {
        let mut f = Quadratic::zeros(2);
        f.add_square(&[(0, 1.0), (1, -1.0)], 1.0, 2.0);
        // 2 (x0 - x1 + 1)²
        assert_relative_eq!(f.value(&[3.0, 1.0]), 18.0);
        assert_eq!(f.gradient(&[3.0, 1.0]), vec![12.0, -12.0]);
        let x = f.minimize_pinned(&[1]).unwrap();
        assert_relative_eq!(x[0], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn constrained_minimum_on_a_line() {
        // min x² + y² subject to x + y = 2
        let q = DMatrix::identity(2, 2) * 2.0;
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let y = equality_qp(&q, &DVector::zeros(2), &m, &DVector::from_element(1, 2.0)).unwrap();
        assert_relative_eq!(y[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(y[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dependent_constraints_are_inconsistent() {
        let q = DMatrix::identity(2, 2);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let r = DVector::from_column_slice(&[1.0, 2.0]);
        assert!(matches!(
            equality_qp(&q, &DVector::zeros(2), &m, &r),
            Err(Error::ConstraintInconsistent { .. })
        ));
    }
}
