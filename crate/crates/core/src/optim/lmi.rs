//! Log-barrier interior-point solver for small linear matrix inequalities.
//!
//! Minimizes `c . y` subject to `F_k(y) = F_k0 + sum_i y_i F_ki > 0` for each
//! block `k`. At the end of each centering step `Z_k = F_k(y)^{-1} / t` is
//! dual feasible and the duality gap equals `sum_k dim_k / t`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qcore::matrix::{cholesky_pd, hermitize, identity, real_trace, trace_product};
use crate::qcore::{c, ComplexMatrix};

const MAX_NEWTON: usize = 200;
const MAX_OUTER: usize = 40;
const STALL: f64 = 1e-6;
const NEWTON_TOL: f64 = 1e-24;

#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub constant: ComplexMatrix,
    pub coefficients: Vec<ComplexMatrix>,
}

impl LmiBlock {
    fn eval(&self, y: &[f64]) -> ComplexMatrix {
        let mut f = self.constant.clone();
        for (yi, fi) in y.iter().zip(&self.coefficients) {
            if *yi != 0.0 {
                f += fi * c(*yi, 0.0);
            }
        }
        hermitize(&f)
    }
}

#[derive(Clone, Debug)]
pub struct LmiProblem {
    pub cost: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

#[derive(Clone, Debug)]
pub struct LmiSolution {
    pub y: Vec<f64>,
    pub objective: f64,
    /// Duality gap bound `sum_k dim_k / t` at the final centering.
    pub gap: f64,
    /// Dual matrices `Z_k`, one per block.
    pub duals: Vec<ComplexMatrix>,
    pub newton_steps: usize,
}

/// Inverse of `f` if it is positive definite.
fn pd_inverse(f: &ComplexMatrix) -> Option<ComplexMatrix> {
    let l = cholesky_pd(f)?;
    let linv = l.solve_lower_triangular(&identity(f.nrows()))?;
    Some(hermitize(&(linv.adjoint() * linv)))
}

impl LmiProblem {
    fn dims(&self) -> usize {
        self.blocks.iter().map(|b| b.constant.nrows()).sum()
    }

    fn inverses(&self, y: &[f64]) -> Option<Vec<ComplexMatrix>> {
        self.blocks.iter().map(|b| pd_inverse(&b.eval(y))).collect()
    }

    /// Minimizes from a strictly feasible `y0`, targeting a duality gap of
    /// `gap_tol`.
    pub fn solve(&self, y0: Vec<f64>, gap_tol: f64) -> Result<LmiSolution> {
        let n = self.cost.len();
        if self.inverses(&y0).is_none() {
            return Err(Error::Numerical("starting point is not strictly feasible".into()));
        }
        let m = self.dims() as f64;
        let mut y = y0;
        let mut t = 1.0;
        let mut steps = 0;
        for _ in 0..MAX_OUTER {
            let mut previous = f64::INFINITY;
            for _ in 0..MAX_NEWTON {
                let inv = self.inverses(&y).expect("iterate stays feasible");
                let mut grad: Vec<f64> = self.cost.iter().map(|ci| t * ci).collect();
                let mut hess = DMatrix::<f64>::zeros(n, n);
                for (b, finv) in self.blocks.iter().zip(&inv) {
                    let scaled: Vec<ComplexMatrix> =
                        b.coefficients.iter().map(|fi| finv * fi).collect();
                    for i in 0..n {
                        grad[i] -= real_trace(&scaled[i]);
                        for j in i..n {
                            let h = trace_product(&scaled[i], &scaled[j]);
                            hess[(i, j)] += h;
                            if i != j {
                                hess[(j, i)] += h;
                            }
                        }
                    }
                }
                let g = nalgebra::DVector::from_vec(grad.clone());
                // Jacobi scaling keeps barrier Hessians with widely spread
                // curvatures factorizable.
                let scale = hess.diagonal().map(|h| if h > 0.0 { 1.0 / h.sqrt() } else { 1.0 });
                let scaled = DMatrix::from_fn(n, n, |i, j| hess[(i, j)] * scale[i] * scale[j]);
                let gs = g.component_mul(&scale);
                let us = match scaled.clone().cholesky() {
                    Some(ch) => -ch.solve(&gs),
                    None => {
                        let reg = scaled + DMatrix::identity(n, n) * 1e-14;
                        -reg.lu().solve(&gs).ok_or_else(|| Error::Numerical("singular barrier Hessian".into()))?
                    }
                };
                let dy = us.component_mul(&scale);
                let decrement = -g.dot(&dy);
                steps += 1;
                // Near the optimum rounding in `t * cost` sets a floor on the
                // decrement; stop once it no longer shrinks.
                if decrement / 2.0 <= NEWTON_TOL || (decrement < STALL && decrement >= previous) {
                    break;
                }
                previous = decrement;
                // Damped Newton step; full steps inside the quadratic region.
                let lambda = decrement.max(0.0).sqrt();
                let mut step = if lambda < 0.25 { 1.0 } else { 1.0 / (1.0 + lambda) };
                loop {
                    let trial: Vec<f64> = y.iter().zip(dy.iter()).map(|(a, d)| a + step * d).collect();
                    if self.inverses(&trial).is_some() {
                        y = trial;
                        break;
                    }
                    step *= 0.5;
                    if step < 1e-12 {
                        break;
                    }
                }
                if step < 1e-12 {
                    break;
                }
            }
            if m / t <= gap_tol {
                break;
            }
            t *= 10.0;
        }
        let inv = self.inverses(&y).expect("iterate stays feasible");
        Ok(LmiSolution {
            objective: dot(&self.cost, &y),
            gap: m / t,
            duals: inv.into_iter().map(|z| z / c(t, 0.0)).collect(),
            newton_steps: steps,
            y,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_interval() {
        // min y s.t. y - 1 > 0 and 3 - y > 0.
        let one = |v: f64| ComplexMatrix::from_element(1, 1, c(v, 0.0));
        let p = LmiProblem {
            cost: vec![1.0],
            blocks: vec![
                LmiBlock { constant: one(-1.0), coefficients: vec![one(1.0)] },
                LmiBlock { constant: one(3.0), coefficients: vec![one(-1.0)] },
            ],
        };
        let s = p.solve(vec![2.0], 1e-11).unwrap();
        assert_abs_diff_eq!(s.y[0], 1.0, epsilon = 1e-10);
        assert!(s.gap <= 1e-11);
    }
}
