use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::lmi::{LmiBlock, LmiProblem};
use crate::error::{Error, Result};
use crate::qcore::matrix::{identity, min_eigenvalue};
use crate::qcore::{c, ComplexMatrix, Ensemble, Povm};

const GAP_TOL: f64 = 1e-12;
const KERNEL_CUT: f64 = 1e-12;

/// Weights `a_x` of rank-one conclusive elements `a_x Pi_x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    pub eta0: f64,
    /// Smallest eigenvalue of `1 - sum_x a_x Pi_x`.
    pub psd_margin: f64,
    pub duality_gap: f64,
}

impl WeightSolution {
    pub fn povm(&self, projectors: &[ComplexMatrix]) -> Result<Povm> {
        Povm::from_weighted_projectors(&self.weights, projectors)
    }
}

/// `sum_x a_x tr[rho Pi_x]` for the ensemble average `rho`.
pub fn detection_rate(e: &Ensemble, projectors: &[ComplexMatrix], weights: &[f64]) -> f64 {
    let rho = e.average();
    weights
        .iter()
        .zip(projectors)
        .map(|(a, p)| a * rho.expectation(p))
        .sum()
}

/// Smallest eigenvalue of `1 - sum_x a_x Pi_x`.
pub fn psd_margin(projectors: &[ComplexMatrix], weights: &[f64]) -> Result<f64> {
    let dim = projectors.first().map(|p| p.nrows()).unwrap_or(1);
    let mut m0 = identity(dim);
    for (a, p) in weights.iter().zip(projectors) {
        m0 -= p * c(*a, 0.0);
    }
    min_eigenvalue(&m0)
}

/// Maximizes the detection rate `sum_x a_x tr[rho Pi_x]` over `a_x >= 0`
/// with `1 - sum_x a_x Pi_x >= 0`.
///
/// Zero projectors (labels that are never detected) get weight 0. When the
/// optimum is not unique the interior-point path ends at the analytic center
/// of the optimal face, which is the symmetric solution for symmetric
/// ensembles.
pub fn min_inconclusive_rate(e: &Ensemble, projectors: &[ComplexMatrix]) -> Result<WeightSolution> {
    if projectors.len() != e.len() {
        return Err(Error::InvalidParameter(format!(
            "{} projectors for {} states",
            projectors.len(),
            e.len()
        )));
    }
    let dim = e.dim();
    for p in projectors {
        if p.nrows() != dim || p.ncols() != dim {
            return Err(Error::DimensionMismatch(dim, p.nrows()));
        }
    }
    let rho = e.average();
    let active: Vec<usize> = (0..projectors.len())
        .filter(|&x| projectors[x].norm() > 1e-12)
        .collect();
    let mut weights = vec![0.0; projectors.len()];
    if active.is_empty() {
        return Ok(WeightSolution {
            weights,
            eta0: 1.0,
            psd_margin: 1.0,
            duality_gap: 0.0,
        });
    }
    let n = active.len();
    let active_projectors: Vec<&ComplexMatrix> = active.iter().map(|&x| &projectors[x]).collect();
    // Work in the eigenbasis of the projector Gram matrix, so directions that
    // leave `sum_x a_x Pi_x` unchanged get exactly zero LMI coefficients.
    let vecs = vectorize(&active_projectors);
    let eig = SymmetricEigen::new(vecs.transpose() * &vecs);
    let top = eig.eigenvalues.amax().max(1.0);
    let q = &eig.eigenvectors;
    let scalar = |v: f64| ComplexMatrix::from_element(1, 1, c(v, 0.0));
    let mut blocks = vec![LmiBlock {
        constant: identity(dim),
        coefficients: (0..n)
            .map(|k| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                if eig.eigenvalues[k] > KERNEL_CUT * top {
                    for (i, p) in active_projectors.iter().enumerate() {
                        m -= *p * c(q[(i, k)], 0.0);
                    }
                }
                m
            })
            .collect(),
    }];
    for i in 0..n {
        blocks.push(LmiBlock {
            constant: scalar(0.0),
            coefficients: (0..n).map(|k| scalar(q[(i, k)])).collect(),
        });
    }
    let rates: Vec<f64> = active_projectors.iter().map(|p| rho.expectation(p)).collect();
    let cost: Vec<f64> = (0..n)
        .map(|k| {
            if eig.eigenvalues[k] > KERNEL_CUT * top {
                -(0..n).map(|i| q[(i, k)] * rates[i]).sum::<f64>()
            } else {
                0.0
            }
        })
        .collect();
    let largest = active_projectors
        .iter()
        .map(|p| crate::qcore::matrix::max_eigenvalue(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let start = DVector::from_element(n, 0.5 / (n as f64 * largest));
    let sol = LmiProblem { cost, blocks }.solve((q.transpose() * start).iter().copied().collect(), GAP_TOL)?;
    let y = q * DVector::from_vec(sol.y.clone());
    for (k, &x) in active.iter().enumerate() {
        weights[x] = y[k].max(0.0);
    }
    let detected = detection_rate(e, projectors, &weights);
    Ok(WeightSolution {
        psd_margin: psd_margin(projectors, &weights)?,
        eta0: (1.0 - detected).clamp(0.0, 1.0),
        duality_gap: sol.gap,
        weights,
    })
}

/// Real coordinates of the Hermitian matrices, one column each.
fn vectorize(projectors: &[&ComplexMatrix]) -> DMatrix<f64> {
    let dim = projectors[0].nrows();
    DMatrix::from_fn(dim * dim, projectors.len(), |r, k| {
        let (i, j) = (r / dim, r % dim);
        let z = projectors[k][(i.min(j), i.max(j))];
        if i <= j {
            z.re
        } else {
            z.im
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::PureState;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn equatorial(n: usize) -> (Ensemble, Vec<ComplexMatrix>) {
        let states: Vec<_> = (1..=n)
            .map(|x| PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / n as f64))
            .collect();
        let projectors = states.iter().map(PureState::projector).collect();
        (Ensemble::from_pure(vec![1.0 / n as f64; n], &states).unwrap(), projectors)
    }

    #[test]
    fn trine_weights() {
        let (e, p) = equatorial(3);
        let w = min_inconclusive_rate(&e, &p).unwrap();
        for a in &w.weights {
            assert_abs_diff_eq!(*a, 2.0 / 3.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(w.eta0, 0.0, epsilon = 1e-9);
        assert!(w.psd_margin >= -1e-9);
    }

    #[test]
    fn degenerate_square_is_symmetric() {
        let (e, p) = equatorial(4);
        let w = min_inconclusive_rate(&e, &p).unwrap();
        for a in &w.weights {
            assert_abs_diff_eq!(*a, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn degenerate_pentagon_is_symmetric() {
        let (e, p) = equatorial(5);
        let w = min_inconclusive_rate(&e, &p).unwrap();
        for a in &w.weights {
            assert_abs_diff_eq!(*a, 0.4, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(w.eta0, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn single_projector() {
        let zero = PureState::qubit(0.0, 0.0);
        let e = Ensemble::from_pure(vec![1.0], std::slice::from_ref(&zero)).unwrap();
        let w = min_inconclusive_rate(&e, &[zero.projector()]).unwrap();
        assert_abs_diff_eq!(w.weights[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.eta0, 0.0, epsilon = 1e-9);
    }
}
