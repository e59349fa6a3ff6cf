use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::json::MatrixJson;
use super::matrix::{
    c, eig_hermitian, ensure_square, hermitian_defect, hermitize, pauli, projector, real_trace,
    trace_norm_hermitian, trace_product, ComplexMatrix, C64,
};
use super::MAX_DIM;
use crate::error::{Error, Result};

/// Trace and PSD tolerance for density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Entrywise Hermiticity required of a density matrix.
const DENSITY_HERMITIAN_TOL: f64 = 1e-12;

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateJson", into = "PureStateJson")]
pub struct PureState(DVector<C64>);

impl PureState {
    /// Accepts a vector whose norm is within 1e-12 of one.
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState(amplitudes))
    }

    /// Normalizes `v`; fails on the zero vector.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(PureState(v / c(norm, 0.0)))
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::normalized(DVector::from_column_slice(amplitudes))
    }

    pub(crate) fn from_vector_unchecked(v: DVector<C64>) -> Self {
        PureState(v)
    }

    /// Qubit state with Bloch angles `(polar, azimuth)`.
    pub fn qubit(polar: f64, azimuth: f64) -> Self {
        PureState(DVector::from_column_slice(&[
            c((polar / 2.0).cos(), 0.0),
            C64::from_polar((polar / 2.0).sin(), azimuth),
        ]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn projector(&self) -> ComplexMatrix {
        projector(&self.0)
    }

    /// The orthogonal qubit state `(-b*, a*)`.
    pub fn qubit_perp(&self) -> Result<PureState> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(self.dim(), 2));
        }
        let a = self.0[0];
        let b = self.0[1];
        Ok(PureState(DVector::from_column_slice(&[-b.conj(), a.conj()])))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PureStateJson {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl From<PureState> for PureStateJson {
    fn from(s: PureState) -> Self {
        PureStateJson {
            dim: s.dim(),
            amplitudes: s.0.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<PureStateJson> for PureState {
    type Error = Error;

    fn try_from(j: PureStateJson) -> Result<Self> {
        if j.amplitudes.len() != j.dim {
            return Err(Error::EntryCount {
                got: j.amplitudes.len(),
                expected: j.dim,
            });
        }
        let v: Vec<C64> = j.amplitudes.iter().map(|[re, im]| c(*re, *im)).collect();
        PureState::new(DVector::from_vec(v))
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let dim = ensure_square(&mat)?;
        if dim == 0 {
            return Err(Error::InvalidEnsemble("zero-dimensional state".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        let defect = hermitian_defect(&mat);
        if defect > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let mat = hermitize(&mat);
        let tr = real_trace(&mat);
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = eig_hermitian(&mat)?.min();
        if min < -STATE_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix(mat))
    }

    /// Symmetrizes and renormalizes the trace before validating; for
    /// outputs of channels and mixtures that carry rounding noise.
    pub fn from_noisy(mat: ComplexMatrix) -> Result<Self> {
        let mut mat = hermitize(&mat);
        let tr = real_trace(&mat);
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        mat /= c(tr, 0.0);
        Self::new(mat)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix(psi.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(dim, dim) / c(dim as f64, 0.0))
    }

    /// `1/2 (1 + r . sigma)`; fails when `|r| > 1 + 1e-10`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + STATE_TOL {
            return Err(Error::BlochOutOfRange(len));
        }
        let [x, y, z] = pauli();
        let m = (ComplexMatrix::identity(2, 2)
            + x * c(r[0], 0.0)
            + y * c(r[1], 0.0)
            + z * c(r[2], 0.0))
            * c(0.5, 0.0);
        Ok(DensityMatrix(m))
    }

    /// Bloch vector `(tr[rho X], tr[rho Y], tr[rho Z])` of a qubit state.
    pub fn bloch(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch(self.dim(), 2));
        }
        let [x, y, z] = pauli();
        Ok([
            trace_product(&self.0, &x),
            trace_product(&self.0, &y),
            trace_product(&self.0, &z),
        ])
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        trace_product(&self.0, &self.0)
    }

    /// `tr[rho A]`.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        trace_product(&self.0, a)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(d: DensityMatrix) -> Self {
        MatrixJson::from(&d.0)
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        DensityMatrix::new(ComplexMatrix::try_from(j)?)
    }
}

/// Trace norm of `rho - sigma`, without the conventional 1/2 factor.
///
/// Orthogonal pure states are at distance 2 under this convention.
pub fn trace_norm_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    trace_norm_hermitian(&(rho.matrix() - sigma.matrix()))
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn to_bloch(rho: &DensityMatrix) -> Result<[f64; 3]> {
    rho.bloch()
}

pub fn from_bloch(r: [f64; 3]) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(r)
}

/// Prior-weighted list of states `{q_x, rho_x}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleJson", into = "EnsembleJson")]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct EnsembleJson {
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl From<Ensemble> for EnsembleJson {
    fn from(e: Ensemble) -> Self {
        EnsembleJson {
            priors: e.priors,
            states: e.states,
        }
    }
}

impl TryFrom<EnsembleJson> for Ensemble {
    type Error = Error;

    fn try_from(j: EnsembleJson) -> Result<Self> {
        Ensemble::new(j.priors, j.states)
    }
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if priors.is_empty() {
            return Err(Error::InvalidEnsemble("no states".into()));
        }
        if priors.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if let Some(q) = priors.iter().find(|q| !(**q >= 0.0) || !q.is_finite()) {
            return Err(Error::InvalidEnsemble(format!("negative or non-finite prior {q}")));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!("priors sum to {total}")));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, s.dim()));
        }
        Ok(Ensemble { priors, states })
    }

    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len();
        Self::new(vec![1.0 / n as f64; n], states)
    }

    pub fn from_pure(priors: Vec<f64>, states: &[PureState]) -> Result<Self> {
        Self::new(priors, states.iter().map(DensityMatrix::from_pure).collect())
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn prior(&self, x: usize) -> f64 {
        self.priors[x]
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &DensityMatrix {
        &self.states[x]
    }

    /// `rho = sum_x q_x rho_x`.
    pub fn average(&self) -> DensityMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (q, s) in self.priors.iter().zip(&self.states) {
            acc += s.matrix() * c(*q, 0.0);
        }
        DensityMatrix(hermitize(&acc))
    }

    /// Same priors, new states.
    pub fn with_states(&self, states: Vec<DensityMatrix>) -> Result<Self> {
        Self::new(self.priors.clone(), states)
    }

    pub fn check_label(&self, x: usize) -> Result<()> {
        if x >= self.len() {
            return Err(Error::LabelOutOfRange(x));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn bloch_examples() {
        let mixed = from_bloch([0.0, 0.0, 0.0]).unwrap();
        assert_eq!(mixed, DensityMatrix::maximally_mixed(2));

        let plus = PureState::from_slice(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let from_r = from_bloch([1.0, 0.0, 0.0]).unwrap();
        assert!((from_r.matrix() - plus.projector()).norm() < 1e-15);

        assert!(matches!(from_bloch([1.0, 0.5, 0.0]), Err(Error::BlochOutOfRange(_))));
    }

    #[test]
    fn bloch_of_two_mixed_state() {
        // p = 1/2, theta = pi/2, x = 1: rho = 1/2 |psi><psi| + 1/4 1 with
        // |psi> = cos(pi/4)|0> + sin(pi/4)|1>, whose Bloch vector is +X.
        let p: f64 = 0.5;
        let half = PI / 4.0;
        let psi = PureState::from_slice(&[c(half.cos(), 0.0), c(half.sin(), 0.0)]).unwrap();
        let m = psi.projector() * c(p, 0.0) + ComplexMatrix::identity(2, 2) * c((1.0 - p) / 2.0, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        let r = rho.bloch().unwrap();
        assert_abs_diff_eq!(r[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[2], 0.0, epsilon = 1e-15);
        let back = from_bloch(r).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn purity_examples() {
        assert_abs_diff_eq!(DensityMatrix::from_pure(&PureState::qubit(0.3, 1.1)).purity(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(DensityMatrix::maximally_mixed(2).purity(), 0.5, epsilon = 1e-15);
        // Lifted state with lambda = 1 is pure: 1/2 (1 + sin^2 + cos^2) = 1.
        let theta = PI / 3.0;
        let rho = from_bloch([theta.sin(), 0.0, theta.cos()]).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = from_bloch([0.0, 0.0, 1.0]).unwrap();
        let one = from_bloch([0.0, 0.0, -1.0]).unwrap();
        assert_abs_diff_eq!(trace_norm_distance(&zero, &one).unwrap(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_norm_distance(&zero, &zero).unwrap(), 0.0);
        let a = from_bloch([0.0, 0.0, 0.6]).unwrap();
        let m = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(trace_norm_distance(&a, &m).unwrap(), 0.6, epsilon = 1e-14);
        let q3 = DensityMatrix::maximally_mixed(3);
        assert!(matches!(trace_norm_distance(&a, &q3), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidTrace(_))));
        let mut neg = ComplexMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::NotPsd(_))));
        assert!(matches!(
            DensityMatrix::new(ComplexMatrix::identity(9, 9) / c(9.0, 0.0)),
            Err(Error::DimensionTooLarge(9))
        ));
    }

    #[test]
    fn ensemble_validation() {
        let s = DensityMatrix::maximally_mixed(2);
        assert!(Ensemble::new(vec![0.5, 0.6], vec![s.clone(), s.clone()]).is_err());
        assert!(Ensemble::new(vec![1.0], vec![s.clone(), s.clone()]).is_err());
        assert!(Ensemble::new(vec![0.5, 0.5], vec![s.clone(), DensityMatrix::maximally_mixed(3)]).is_err());
        let e = Ensemble::new(vec![1.0, 0.0], vec![s.clone(), s]).unwrap();
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn ensemble_json_roundtrip() {
        let e = Ensemble::uniform(vec![
            from_bloch([0.0, 0.0, 1.0]).unwrap(),
            from_bloch([0.6, 0.0, 0.0]).unwrap(),
        ])
        .unwrap();
        let text = serde_json::to_string(&e).unwrap();
        let back: Ensemble = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
        let bad = text.replace("0.5,0.5", "0.5,0.7");
        assert!(serde_json::from_str::<Ensemble>(&bad).is_err());
    }

    #[test]
    fn pure_state_json_and_perp() {
        let psi = PureState::qubit(1.0, 0.4);
        let text = serde_json::to_string(&psi).unwrap();
        let back: PureState = serde_json::from_str(&text).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-15);
        assert!(psi.inner(&psi.qubit_perp().unwrap()).norm() < 1e-15);
    }
}
