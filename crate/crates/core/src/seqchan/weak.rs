use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::channel::{KrausChannel, KrausOperator, Outcome};
use crate::error::{Error, Result};
use crate::qcore::json::matrix_serde;
use crate::qcore::matrix::{eig_hermitian, identity, outer, sqrt_psd};
use crate::qcore::{c, trace_norm_distance, ComplexMatrix, Ensemble, Povm, PureState, POVM_TOL};

/// Relative eigenvalue cut used to decide ranks of POVM elements.
const RANK_CUT: f64 = 1e-9;

/// Scales each conclusive element by its `alpha` and recomputes `M0`.
pub fn weaken(povm: &Povm, alpha: &[f64]) -> Result<Povm> {
    if alpha.len() != povm.conclusive.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weakening factors for {} conclusive elements",
            alpha.len(),
            povm.conclusive.len()
        )));
    }
    if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidParameter(format!("weakening factor {a} outside [0, 1]")));
    }
    let weak = Povm::complete(
        povm.conclusive
            .iter()
            .zip(alpha)
            .map(|(el, a)| (el.label, &el.operator * c(*a, 0.0)))
            .collect(),
    )?;
    let margin = eig_hermitian(&weak.inconclusive)?.min();
    if margin < -POVM_TOL {
        return Err(Error::InfeasibleWeakening(margin));
    }
    Ok(weak)
}

/// Weakening factor that brings a measurement with inconclusive rate
/// `base_rate` up to `target`.
pub fn alpha_for_rate(base_rate: f64, target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidParameter(format!("inconclusive rate {target} outside [0, 1]")));
    }
    if target < base_rate - 1e-9 {
        return Err(Error::InfeasibleInconclusiveRate {
            requested: target,
            minimum: base_rate,
        });
    }
    if base_rate >= 1.0 {
        return Ok(0.0);
    }
    Ok(((1.0 - target) / (1.0 - base_rate)).clamp(0.0, 1.0))
}

/// A weakened measurement together with where each conclusive outcome
/// sends the state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakMcm {
    pub base: Povm,
    pub alpha: Vec<f64>,
    /// Retarget state per conclusive element; `None` keeps `sqrt(M_x)`.
    pub retarget: Vec<Option<PureState>>,
    #[serde(with = "matrix_serde")]
    pub v0: ComplexMatrix,
}

impl WeakMcm {
    pub fn uniform(base: Povm, alpha: f64, retarget: Vec<Option<PureState>>) -> Self {
        let n = base.conclusive.len();
        let dim = base.dim();
        WeakMcm {
            base,
            alpha: vec![alpha; n],
            retarget,
            v0: identity(dim),
        }
    }

    pub fn povm(&self) -> Result<Povm> {
        weaken(&self.base, &self.alpha)
    }
}

/// Top eigenpair of a PSD element when it is rank one.
fn rank_one(m: &ComplexMatrix) -> Result<Option<(f64, PureState)>> {
    let eig = eig_hermitian(m)?;
    let top = eig.max();
    if top <= 0.0 {
        return Ok(None);
    }
    let rank = eig.values.iter().filter(|&&l| l > RANK_CUT * top).count();
    Ok((rank == 1).then(|| (top, eig.vectors[0].clone())))
}

/// Kraus operators of a weak measurement.
///
/// Rank-one conclusive elements `a |phi><phi|` with a retarget state give
/// `sqrt(alpha a) |varphi><phi|`; other elements give `sqrt(alpha) sqrt(M)`.
/// The inconclusive operator is `V0 sqrt(M0~)`.
pub fn kraus_from_weak(w: &WeakMcm) -> Result<KrausChannel> {
    if w.retarget.len() != w.base.conclusive.len() {
        return Err(Error::InvalidParameter(format!(
            "{} retarget states for {} conclusive elements",
            w.retarget.len(),
            w.base.conclusive.len()
        )));
    }
    let weak = w.povm()?;
    let mut ops = Vec::with_capacity(weak.conclusive.len() + 1);
    for ((el, alpha), target) in w.base.conclusive.iter().zip(&w.alpha).zip(&w.retarget) {
        if *alpha == 0.0 {
            continue;
        }
        let operator = match (target, rank_one(&el.operator)?) {
            (Some(to), Some((a, from))) => {
                outer(to.amplitudes(), from.amplitudes()) * c((alpha * a).sqrt(), 0.0)
            }
            _ => sqrt_psd(&el.operator)? * c(alpha.sqrt(), 0.0),
        };
        ops.push(KrausOperator {
            outcome: Outcome::Label(el.label),
            operator,
        });
    }
    ops.push(KrausOperator {
        outcome: Outcome::Inconclusive,
        operator: &w.v0 * sqrt_psd(&weak.inconclusive)?,
    });
    KrausChannel::new(ops)
}

/// `sum_x q_x tr[rho_x M_x]`.
pub fn information_gain(e: &Ensemble, povm: &Povm) -> Result<f64> {
    let mut g = 0.0;
    for el in &povm.conclusive {
        e.check_label(el.label)?;
        g += e.prior(el.label) * e.state(el.label).expectation(&el.operator);
    }
    Ok(g)
}

/// `tr[rho M0]`.
pub fn inconclusive_rate(e: &Ensemble, povm: &Povm) -> f64 {
    e.average().expectation(&povm.inconclusive)
}

/// Whether the ranges of the conclusive elements are linearly independent.
///
/// Each element contributes the columns `sqrt(l_i) v_i` of its eigen
/// decomposition, and the test asks for full column rank at a singular
/// value cut of 1e-9 relative to the largest.
pub fn linear_independence(povm: &Povm) -> Result<bool> {
    let dim = povm.dim();
    let mut columns = Vec::new();
    for el in &povm.conclusive {
        let eig = eig_hermitian(&el.operator)?;
        let top = eig.max();
        for (l, v) in eig.values.iter().zip(&eig.vectors) {
            if top > 0.0 && *l > RANK_CUT * top {
                columns.push(v.amplitudes() * c(l.sqrt(), 0.0));
            }
        }
    }
    if columns.len() > dim {
        return Ok(false);
    }
    if columns.is_empty() {
        return Ok(true);
    }
    let m = DMatrix::from_columns(&columns);
    let sv = m.singular_values();
    let top = sv.max();
    Ok(sv.iter().all(|s| *s > RANK_CUT * top))
}

/// `(sum_x q_x ||rho_x - rho'_x||_1, ||rho - rho'||_1)`.
pub fn ensemble_distance(a: &Ensemble, b: &Ensemble) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::InvalidEnsemble(format!("{} states against {}", a.len(), b.len())));
    }
    if a.priors().iter().zip(b.priors()).any(|(p, q)| (p - q).abs() > 1e-12) {
        return Err(Error::InvalidEnsemble("ensembles have different priors".into()));
    }
    let mut d = 0.0;
    for x in 0..a.len() {
        d += a.prior(x) * trace_norm_distance(a.state(x), b.state(x))?;
    }
    let lower = trace_norm_distance(&a.average(), &b.average())?;
    Ok((d, lower))
}
