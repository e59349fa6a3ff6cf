use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qcore::json::matrix_serde;
use crate::qcore::matrix::{hermitize, identity, max_abs};
use crate::qcore::{ComplexMatrix, DensityMatrix, Ensemble, Povm};

/// Completeness residual above which a channel is rejected.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Measurement outcome attached to a Kraus operator. Files use 0 for
/// inconclusive and `x + 1` for label `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Inconclusive,
    Label(usize),
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Outcome::Inconclusive => s.serialize_u64(0),
            Outcome::Label(x) => s.serialize_u64(*x as u64 + 1),
        }
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match u64::deserialize(d)? {
            0 => Outcome::Inconclusive,
            v => Outcome::Label(v as usize - 1),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausOperator {
    pub outcome: Outcome,
    #[serde(with = "matrix_serde")]
    pub operator: ComplexMatrix,
}

/// Operators `K_i` with `sum_i K_i^dag K_i = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrausChannel {
    operators: Vec<KrausOperator>,
}

impl<'de> Deserialize<'de> for KrausChannel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            operators: Vec<KrausOperator>,
        }
        let raw = Raw::deserialize(d)?;
        KrausChannel::new(raw.operators).map_err(serde::de::Error::custom)
    }
}

impl KrausChannel {
    pub fn new(operators: Vec<KrausOperator>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel without Kraus operators".into()))?;
        let dim = first.operator.ncols();
        for k in &operators {
            if k.operator.nrows() != dim || k.operator.ncols() != dim {
                return Err(Error::DimensionMismatch(dim, k.operator.nrows()));
            }
        }
        let ch = KrausChannel { operators };
        let residual = ch.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::IncompleteChannel(residual));
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            operators: vec![KrausOperator {
                outcome: Outcome::Inconclusive,
                operator: identity(dim),
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.operators[0].operator.ncols()
    }

    pub fn operators(&self) -> &[KrausOperator] {
        &self.operators
    }

    pub fn operators_for(&self, outcome: Outcome) -> impl Iterator<Item = &ComplexMatrix> + '_ {
        self.operators
            .iter()
            .filter(move |k| k.outcome == outcome)
            .map(|k| &k.operator)
    }

    /// Largest entry of `|sum_i K_i^dag K_i - 1|`.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &self.operators {
            sum += k.operator.adjoint() * &k.operator;
        }
        max_abs(&(sum - identity(dim)))
    }

    /// Unnormalized `sum_{K in outcome} K A K^dag`.
    pub fn apply_outcome(&self, outcome: Outcome, a: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for k in self.operators_for(outcome) {
            acc += k * a * k.adjoint();
        }
        acc
    }

    /// Heisenberg picture `sum_{K in outcome} K^dag A K`.
    pub fn pullback(&self, outcome: Outcome, a: &ComplexMatrix) -> ComplexMatrix {
        let dim = self.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for k in self.operators_for(outcome) {
            acc += k.adjoint() * a * k;
        }
        hermitize(&acc)
    }

    /// POVM element `sum_{K in outcome} K^dag K`.
    pub fn effect(&self, outcome: Outcome) -> ComplexMatrix {
        self.pullback(outcome, &identity(self.dim()))
    }

    /// `sum_i K_i rho K_i^dag`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), rho.dim()));
        }
        let mut acc = ComplexMatrix::zeros(rho.dim(), rho.dim());
        for k in &self.operators {
            acc += &k.operator * rho.matrix() * k.operator.adjoint();
        }
        DensityMatrix::from_noisy(acc)
    }

    pub fn apply_ensemble(&self, e: &Ensemble) -> Result<Ensemble> {
        let states = e.states().iter().map(|s| self.apply(s)).collect::<Result<Vec<_>>>()?;
        e.with_states(states)
    }

    /// Measurement implemented by the channel, with conclusive labels
    /// `0..labels`.
    pub fn povm(&self, labels: usize) -> Result<Povm> {
        let mut conclusive = Vec::with_capacity(labels);
        for x in 0..labels {
            conclusive.push((x, self.effect(Outcome::Label(x))));
        }
        let mut povm = Povm::complete(conclusive)?;
        povm.inconclusive = self.effect(Outcome::Inconclusive);
        Ok(povm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c, from_bloch};

    #[test]
    fn identity_channel_is_trivial() {
        let ch = KrausChannel::identity(2);
        let rho = from_bloch([0.1, 0.2, 0.3]).unwrap();
        assert_eq!(ch.apply(&rho).unwrap(), rho);
    }

    #[test]
    fn incomplete_channel_is_rejected() {
        let op = KrausOperator {
            outcome: Outcome::Label(0),
            operator: identity(2) * c(0.5, 0.0),
        };
        match KrausChannel::new(vec![op]) {
            Err(Error::IncompleteChannel(r)) => assert!((r - 0.75).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn outcome_json() {
        assert_eq!(serde_json::to_string(&Outcome::Inconclusive).unwrap(), "0");
        assert_eq!(serde_json::to_string(&Outcome::Label(2)).unwrap(), "3");
        let back: Outcome = serde_json::from_str("3").unwrap();
        assert_eq!(back, Outcome::Label(2));
    }
}
