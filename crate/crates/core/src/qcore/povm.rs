use serde::{Deserialize, Serialize};

use super::json::matrix_serde;
use super::matrix::{c, eig_hermitian, identity, max_abs, ComplexMatrix};
use crate::error::{Error, Result};

/// Tolerance for PSD margins and completeness of a POVM.
pub const POVM_TOL: f64 = 1e-10;

/// One conclusive element. `label` is the index of the state it guesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmElement {
    #[serde(with = "label_serde")]
    pub label: usize,
    #[serde(with = "matrix_serde")]
    pub operator: ComplexMatrix,
}

/// Labels are 0-based in code and 1-based in files; 0 is reserved for the
/// inconclusive outcome there.
pub(crate) mod label_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(label: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*label as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let v = u64::deserialize(d)?;
        if v == 0 {
            return Err(serde::de::Error::custom("conclusive labels start at 1"));
        }
        Ok(v as usize - 1)
    }
}

/// Conclusive elements plus the inconclusive element `M0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    pub conclusive: Vec<PovmElement>,
    #[serde(with = "matrix_serde")]
    pub inconclusive: ComplexMatrix,
}

impl Povm {
    /// Completes the conclusive elements with `M0 = 1 - sum_x M_x`.
    pub fn complete(conclusive: Vec<(usize, ComplexMatrix)>) -> Result<Self> {
        let dim = conclusive
            .first()
            .map(|(_, m)| m.nrows())
            .ok_or_else(|| Error::InvalidParameter("POVM without conclusive elements".into()))?;
        let mut m0 = identity(dim);
        for (_, m) in &conclusive {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(dim, m.nrows()));
            }
            m0 -= m;
        }
        Ok(Povm {
            conclusive: conclusive
                .into_iter()
                .map(|(label, operator)| PovmElement { label, operator })
                .collect(),
            inconclusive: m0,
        })
    }

    /// Rank-one MCM-style elements `a_x |phi_x><phi_x|`.
    pub fn from_weighted_projectors(weights: &[f64], projectors: &[ComplexMatrix]) -> Result<Self> {
        if weights.len() != projectors.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} projectors",
                weights.len(),
                projectors.len()
            )));
        }
        Self::complete(
            weights
                .iter()
                .zip(projectors)
                .enumerate()
                .map(|(x, (a, p))| (x, p * c(*a, 0.0)))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.inconclusive.nrows()
    }

    pub fn element(&self, label: usize) -> Option<&ComplexMatrix> {
        self.conclusive
            .iter()
            .find(|e| e.label == label)
            .map(|e| &e.operator)
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.conclusive.iter().map(|e| e.label)
    }
}

/// Outcome of [`validate_povm`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmReport {
    /// Smallest eigenvalue of each conclusive element, in element order.
    pub conclusive_min_eigenvalues: Vec<f64>,
    pub inconclusive_min_eigenvalue: f64,
    /// Largest entry of `|M0 + sum_x M_x - 1|`.
    pub completeness_residual: f64,
    pub passed: bool,
}

impl PovmReport {
    pub fn min_margin(&self) -> f64 {
        self.conclusive_min_eigenvalues
            .iter()
            .copied()
            .fold(self.inconclusive_min_eigenvalue, f64::min)
    }
}

pub fn validate_povm(p: &Povm) -> Result<PovmReport> {
    let dim = p.dim();
    let mut sum = p.inconclusive.clone();
    let mut mins = Vec::with_capacity(p.conclusive.len());
    for e in &p.conclusive {
        mins.push(eig_hermitian(&e.operator)?.min());
        sum += &e.operator;
    }
    let m0_min = eig_hermitian(&p.inconclusive)?.min();
    let residual = max_abs(&(sum - identity(dim)));
    let passed = residual <= POVM_TOL
        && m0_min >= -POVM_TOL
        && mins.iter().all(|&m| m >= -POVM_TOL);
    Ok(PovmReport {
        conclusive_min_eigenvalues: mins,
        inconclusive_min_eigenvalue: m0_min,
        completeness_residual: residual,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{DensityMatrix, PureState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn projective_measurement_passes() {
        let zero = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let one = DensityMatrix::from_bloch([0.0, 0.0, -1.0]).unwrap();
        let p = Povm::complete(vec![(0, zero.into_matrix()), (1, one.into_matrix())]).unwrap();
        let report = validate_povm(&p).unwrap();
        assert!(report.passed);
        assert!(p.inconclusive.norm() < 1e-15);
    }

    #[test]
    fn trine_povm_passes_without_inconclusive() {
        let elements = (1..=3)
            .map(|x| {
                let psi = PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / 3.0);
                (x - 1, psi.projector() * c(2.0 / 3.0, 0.0))
            })
            .collect();
        let p = Povm::complete(elements).unwrap();
        let report = validate_povm(&p).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.inconclusive_min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn overweighted_element_fails() {
        let zero = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap().into_matrix();
        let p = Povm::complete(vec![(0, zero * c(1.5, 0.0))]).unwrap();
        let report = validate_povm(&p).unwrap();
        assert!(!report.passed);
        assert_abs_diff_eq!(report.inconclusive_min_eigenvalue, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn json_labels_are_one_based() {
        let zero = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap().into_matrix();
        let p = Povm::complete(vec![(0, zero)]).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["conclusive"][0]["label"], 1);
        let back: Povm = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }
}
