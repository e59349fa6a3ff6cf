use serde::{Deserialize, Serialize};

use super::scalar::{bracketed_minimum, nelder_mead_restarts, Minimum};
use crate::error::{Error, Result};
use crate::qcore::PureState;
use crate::seqchan::RetargetContext;

pub const RESTARTS: usize = 8;

/// Retarget states as a function of a few symmetry-reduced angles.
pub trait RetargetFamily: Send + Sync {
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn states(&self, params: &[f64]) -> Result<Vec<Option<PureState>>>;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DisturbanceOptimum {
    /// Parameters minimizing the average trace distance.
    pub params: Vec<f64>,
    pub states: Vec<Option<PureState>>,
    pub disturbance: f64,
    /// Lower bound at `params`.
    pub lower_bound: f64,
    /// Parameters minimizing the lower bound instead.
    pub bound_params: Vec<f64>,
    /// Average trace distance at `bound_params`.
    pub disturbance_at_bound: f64,
    pub bound_value: f64,
    /// `disturbance_at_bound - disturbance`.
    pub gap: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn minimize(f: &dyn Fn(&[f64]) -> f64, bounds: &[(f64, f64)]) -> Result<Minimum> {
    match bounds.len() {
        1 => {
            let (lo, hi) = bounds[0];
            Ok(bracketed_minimum(&|t| f(&[t]), lo, hi, RESTARTS))
        }
        2 | 3 => Ok(nelder_mead_restarts(f, bounds, RESTARTS)),
        k => Err(Error::InvalidParameter(format!(
            "retarget families take 1 to 3 parameters, got {k}"
        ))),
    }
}

/// Minimizes the average trace distance between the incoming ensemble and
/// its image over the retarget family, and separately minimizes the lower
/// bound `||rho - rho'||_1`.
pub fn minimize_disturbance_numeric(ctx: &RetargetContext, family: &dyn RetargetFamily) -> Result<DisturbanceOptimum> {
    let bounds = family.bounds();
    let eval = |p: &[f64]| -> (f64, f64) {
        family
            .states(p)
            .and_then(|s| ctx.disturbance_for(&s))
            .unwrap_or((f64::INFINITY, f64::INFINITY))
    };
    let full = minimize(&|p| eval(p).0, &bounds)?;
    let bound = minimize(&|p| eval(p).1, &bounds)?;
    let (disturbance, lower_bound) = eval(&full.x);
    let (disturbance_at_bound, bound_value) = eval(&bound.x);
    if !disturbance.is_finite() {
        return Err(Error::Numerical("no valid retarget state found".into()));
    }
    Ok(DisturbanceOptimum {
        states: family.states(&full.x)?,
        params: full.x,
        disturbance,
        lower_bound,
        bound_params: bound.x,
        disturbance_at_bound,
        bound_value,
        gap: disturbance_at_bound - disturbance,
        converged: full.converged && bound.converged,
        iterations: full.iterations + bound.iterations,
    })
}
