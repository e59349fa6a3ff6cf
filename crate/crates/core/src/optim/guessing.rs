use serde::{Deserialize, Serialize};

use super::lmi::{LmiBlock, LmiProblem};
use crate::error::{Error, Result};
use crate::qcore::matrix::{hermitize, pinv_sqrt};
use crate::qcore::{c, ComplexMatrix, Ensemble, Povm, RANK_TOL};

pub const MAX_GUESSING_DIM: usize = 4;
pub const MAX_GUESSING_STATES: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GuessingSolution {
    pub p_guess: f64,
    /// Primal measurement recovered from the dual multipliers.
    pub povm: Povm,
    pub duality_gap: f64,
}

/// Real basis of the `d x d` Hermitian matrices.
fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(i, i)] = c(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(i, j)] = c(1.0, 0.0);
            re[(j, i)] = c(1.0, 0.0);
            basis.push(re);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(i, j)] = c(0.0, -1.0);
            im[(j, i)] = c(0.0, 1.0);
            basis.push(im);
        }
    }
    basis
}

/// Minimum-error guessing probability through the dual
/// `min tr[Y]` subject to `Y >= q_x rho_x`.
pub fn min_error_guessing(e: &Ensemble) -> Result<GuessingSolution> {
    let d = e.dim();
    if d > MAX_GUESSING_DIM || e.len() > MAX_GUESSING_STATES {
        return Err(Error::UnsupportedScale(format!(
            "guessing program supports d <= {MAX_GUESSING_DIM} and N <= {MAX_GUESSING_STATES}, got d = {d}, N = {}",
            e.len()
        )));
    }
    let basis = hermitian_basis(d);
    let cost: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
    let blocks = (0..e.len())
        .map(|x| LmiBlock {
            constant: -(e.state(x).matrix() * c(e.prior(x), 0.0)),
            coefficients: basis.clone(),
        })
        .collect();
    // Y = 2 * 1 is strictly feasible.
    let y0: Vec<f64> = (0..basis.len()).map(|i| if i < d { 2.0 } else { 0.0 }).collect();
    let sol = LmiProblem { cost, blocks }.solve(y0, 1e-12)?;
    // Rescale the multipliers by (sum Z)^{-1/2} on both sides so they sum
    // to identity exactly while staying PSD.
    let mut sum = ComplexMatrix::zeros(d, d);
    for z in &sol.duals {
        sum += z;
    }
    let (norm, _) = pinv_sqrt(&hermitize(&sum), RANK_TOL)?;
    let elements: Vec<(usize, ComplexMatrix)> = sol
        .duals
        .iter()
        .enumerate()
        .map(|(x, z)| (x, hermitize(&(&norm * z * &norm))))
        .collect();
    let povm = Povm::complete(elements)?;
    Ok(GuessingSolution {
        p_guess: sol.objective,
        povm,
        duality_gap: sol.gap,
    })
}
