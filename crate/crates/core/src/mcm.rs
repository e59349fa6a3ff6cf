//! Maximum confidences and the measurements that attain them.
//!
//! For label `x` the confidence is the largest eigenvalue of
//! `rho^{-1/2} q_x rho_x rho^{-1/2}`, where `rho` is the ensemble average and
//! the inverse square root is taken on the support of `rho`. The top
//! eigenvectors mapped back through `rho^{-1/2}` span the kernel of the
//! complementary state `sigma_x`, and any POVM element supported there is
//! optimal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::matrix::{
    eig_hermitian, fix_phase, hermitize, identity, pinv_sqrt, real_trace, sqrt_psd,
    support_projector, trace_norm_hermitian, trace_product,
};
use crate::qcore::povm::label_serde;
use crate::qcore::{c, ComplexMatrix, DensityMatrix, Ensemble, Povm, PureState, RANK_TOL};

/// Relative gap below which eigenvalues count as degenerate with the top one.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Weight on a state outside the support of another, above which the
/// support test fails.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Complementary weights at or below this are reported as absent.
const ABSENT_WEIGHT: f64 = 1e-12;

/// Optimal data for one label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McmEntry {
    #[serde(with = "label_serde")]
    pub label: usize,
    #[serde(rename = "C")]
    pub confidence: f64,
    /// Multiplicity of the top eigenvalue; 0 for a label with zero prior.
    pub degeneracy: usize,
    /// Normalized kernel vectors of `sigma_x`.
    pub basis: Vec<PureState>,
    pub sigma: Option<DensityMatrix>,
    pub r: f64,
    pub mu: f64,
}

impl McmEntry {
    /// Rank-one MCM projector on the first basis vector, or zero when the
    /// label cannot be detected.
    pub fn projector(&self, dim: usize) -> ComplexMatrix {
        self.basis
            .first()
            .map(PureState::projector)
            .unwrap_or_else(|| ComplexMatrix::zeros(dim, dim))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McmSolution {
    pub entries: Vec<McmEntry>,
}

impl McmSolution {
    pub fn entry(&self, label: usize) -> Option<&McmEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.confidence).collect()
    }

    pub fn projectors(&self, dim: usize) -> Vec<ComplexMatrix> {
        self.entries.iter().map(|e| e.projector(dim)).collect()
    }

    pub fn projector_states(&self) -> Vec<Option<PureState>> {
        self.entries.iter().map(|e| e.basis.first().cloned()).collect()
    }
}

/// Average state and its square roots, shared across labels.
struct AverageState {
    sqrt: ComplexMatrix,
    inv_sqrt: ComplexMatrix,
    kernel: ComplexMatrix,
}

impl AverageState {
    fn new(e: &Ensemble) -> Result<Self> {
        let rho = e.average();
        let (inv_sqrt, _) = pinv_sqrt(rho.matrix(), RANK_TOL)?;
        let (support, _) = support_projector(rho.matrix(), RANK_TOL)?;
        Ok(AverageState {
            sqrt: sqrt_psd(rho.matrix())?,
            kernel: identity(e.dim()) - support,
            inv_sqrt,
        })
    }

    fn entry(&self, e: &Ensemble, x: usize) -> Result<McmEntry> {
        e.check_label(x)?;
        let dim = e.dim();
        let q = e.prior(x);
        if q == 0.0 {
            return Ok(McmEntry {
                label: x,
                confidence: 0.0,
                degeneracy: 0,
                basis: vec![],
                sigma: None,
                r: 0.0,
                mu: 0.0,
            });
        }
        let rho_x = e.state(x);
        if rho_x.expectation(&self.kernel) > SUPPORT_TOL {
            return Err(Error::InfiniteConfidence(x));
        }
        let weighted = hermitize(&(&self.inv_sqrt * rho_x.matrix() * &self.inv_sqrt * c(q, 0.0)));
        let eig = eig_hermitian(&weighted)?;
        let top = eig.max();
        let degeneracy = eig
            .values
            .iter()
            .take_while(|&&l| l >= top - DEGENERACY_TOL * top.abs())
            .count();
        let basis = eig.vectors[..degeneracy]
            .iter()
            .map(|v| PureState::normalized(fix_phase(&self.inv_sqrt * v.amplitudes())))
            .collect::<Result<Vec<_>>>()?;

        // r sigma = sqrt(rho) (C 1 - weighted) sqrt(rho)
        let slack = identity(dim) * c(top, 0.0) - weighted;
        let r_sigma = hermitize(&(&self.sqrt * slack * &self.sqrt));
        let r = real_trace(&r_sigma);
        let (sigma, r) = if r > ABSENT_WEIGHT {
            (Some(DensityMatrix::from_noisy(r_sigma / c(r, 0.0))?), r)
        } else {
            (None, 0.0)
        };
        Ok(McmEntry {
            label: x,
            confidence: top,
            degeneracy,
            basis,
            sigma,
            r,
            mu: q / top,
        })
    }
}

/// Maximum confidence of label `x` with its projector basis and
/// complementary state.
pub fn max_confidence(e: &Ensemble, x: usize) -> Result<McmEntry> {
    AverageState::new(e)?.entry(e, x)
}

/// Solves every label of the ensemble.
pub fn solve(e: &Ensemble) -> Result<McmSolution> {
    let avg = AverageState::new(e)?;
    let entries = (0..e.len())
        .map(|x| avg.entry(e, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(McmSolution { entries })
}

/// `(sigma_x, r_x)` with `C_x rho = q_x rho_x + r_x sigma_x`.
pub fn complementary_state(e: &Ensemble, x: usize) -> Result<(Option<DensityMatrix>, f64)> {
    let entry = max_confidence(e, x)?;
    Ok((entry.sigma, entry.r))
}

/// Confidence `q_x tr[rho_x M] / tr[rho M]` of a single element.
pub fn confidence_of(e: &Ensemble, x: usize, m: &ComplexMatrix) -> f64 {
    let detect = e.average().expectation(m);
    if detect <= 0.0 {
        return 0.0;
    }
    e.prior(x) * e.state(x).expectation(m) / detect
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KktEntry {
    #[serde(with = "label_serde")]
    pub label: usize,
    /// `|| C_x rho - q_x rho_x - r_x sigma_x ||_1`
    pub stationarity: f64,
    /// `| r_x tr[sigma_x M_x] |`
    pub slackness: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KktReport {
    pub entries: Vec<KktEntry>,
    pub passed: bool,
}

/// Checks stationarity and complementary slackness for each conclusive
/// element of `povm`.
pub fn verify_kkt(e: &Ensemble, sol: &McmSolution, povm: &Povm, tol: f64) -> Result<KktReport> {
    let rho = e.average();
    let mut entries = Vec::new();
    for el in &povm.conclusive {
        let entry = sol
            .entry(el.label)
            .ok_or(Error::LabelOutOfRange(el.label))?;
        e.check_label(el.label)?;
        let mut residual = rho.matrix() * c(entry.confidence, 0.0)
            - e.state(el.label).matrix() * c(e.prior(el.label), 0.0);
        let mut slackness = 0.0;
        if let Some(sigma) = &entry.sigma {
            residual -= sigma.matrix() * c(entry.r, 0.0);
            slackness = (entry.r * trace_product(sigma.matrix(), &el.operator)).abs();
        }
        let stationarity = trace_norm_hermitian(&hermitize(&residual))?;
        entries.push(KktEntry {
            label: el.label,
            stationarity,
            slackness,
            passed: stationarity <= tol && slackness <= tol,
        });
    }
    let passed = entries.iter().all(|k| k.passed);
    Ok(KktReport { entries, passed })
}

/// `D_max(rho || sigma)` in bits; `+inf` when `rho` leaves the support of
/// `sigma`.
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let (support, _) = support_projector(sigma.matrix(), RANK_TOL)?;
    let kernel = identity(rho.dim()) - support;
    if rho.expectation(&kernel) > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let (inv_sqrt, _) = pinv_sqrt(sigma.matrix(), RANK_TOL)?;
    let top = eig_hermitian(&hermitize(&(&inv_sqrt * rho.matrix() * &inv_sqrt)))?.max();
    Ok(top.log2())
}

/// `(C_x, q_x 2^{D_max(rho_x || rho)})`; the two agree by strong duality.
pub fn confidence_entropy_identity(e: &Ensemble, x: usize) -> Result<(f64, f64)> {
    let entry = max_confidence(e, x)?;
    let q = e.prior(x);
    let entropic = if q == 0.0 {
        0.0
    } else {
        q * max_relative_entropy(e.state(x), &e.average())?.exp2()
    };
    Ok((entry.confidence, entropic))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Guessing {
    pub p_guess: f64,
    /// `-log2 P_guess` in bits.
    pub h_min: f64,
}

/// Minimum-error guessing probability and min-entropy.
///
/// Two states use `1/2 (1 + ||q_1 rho_1 - q_2 rho_2||_1)` with the trace norm
/// as a plain singular-value sum; larger ensembles go through
/// [`crate::optim::min_error_guessing`].
pub fn guessing_probability(e: &Ensemble) -> Result<Guessing> {
    let p_guess = match e.len() {
        1 => 1.0,
        2 => {
            let diff = e.state(0).matrix() * c(e.prior(0), 0.0)
                - e.state(1).matrix() * c(e.prior(1), 0.0);
            0.5 * (1.0 + trace_norm_hermitian(&hermitize(&diff))?)
        }
        _ => crate::optim::min_error_guessing(e)?.p_guess,
    };
    Ok(Guessing {
        p_guess,
        h_min: -p_guess.log2(),
    })
}

/// Helstrom measurement of a two-state ensemble: the projector onto the
/// positive part of `q_1 rho_1 - q_2 rho_2` guesses state 0.
pub fn helstrom_povm(e: &Ensemble) -> Result<Povm> {
    if e.len() != 2 {
        return Err(Error::InvalidEnsemble(format!(
            "Helstrom measurement needs 2 states, got {}",
            e.len()
        )));
    }
    let diff = e.state(0).matrix() * c(e.prior(0), 0.0) - e.state(1).matrix() * c(e.prior(1), 0.0);
    let positive = eig_hermitian(&hermitize(&diff))?.map(|l| if l > 0.0 { 1.0 } else { 0.0 });
    let negative = identity(e.dim()) - &positive;
    Povm::complete(vec![(0, positive), (1, negative)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::from_bloch;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn trine() -> Ensemble {
        let states: Vec<_> = (1..=3)
            .map(|x| PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / 3.0))
            .collect();
        Ensemble::from_pure(vec![1.0 / 3.0; 3], &states).unwrap()
    }

    /// Two-state family: rho_x = p |psi_x><psi_x| + (1-p)/2 1.
    fn two_mixed(p: f64, theta: f64) -> Ensemble {
        let states = [1.0, -1.0]
            .iter()
            .map(|sign| {
                let r = [p * sign * theta.sin(), 0.0, p * theta.cos()];
                from_bloch(r).unwrap()
            })
            .collect();
        Ensemble::uniform(states).unwrap()
    }

    #[test]
    fn orthogonal_pair_is_perfectly_distinguishable() {
        let e = Ensemble::uniform(vec![from_bloch([0.0, 0.0, 1.0]).unwrap(), from_bloch([0.0, 0.0, -1.0]).unwrap()]).unwrap();
        let sol = solve(&e).unwrap();
        for entry in &sol.entries {
            assert_abs_diff_eq!(entry.confidence, 1.0, epsilon = 1e-12);
        }
        // sigma_1 = rho_2 with r_1 = 1/2.
        let first = &sol.entries[0];
        assert_abs_diff_eq!(first.r, 0.5, epsilon = 1e-12);
        let sigma = first.sigma.as_ref().unwrap();
        assert!((sigma.matrix() - e.state(1).matrix()).norm() < 1e-12);
    }

    #[test]
    fn two_mixed_confidence() {
        let e = two_mixed(0.5, PI / 2.0);
        assert_abs_diff_eq!(max_confidence(&e, 0).unwrap().confidence, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(max_confidence(&e, 1).unwrap().confidence, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn geometrically_uniform_confidence_is_two_over_n() {
        let states: Vec<_> = (1..=4)
            .map(|x| PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / 4.0))
            .collect();
        let e = Ensemble::from_pure(vec![0.25; 4], &states).unwrap();
        for x in 0..4 {
            assert_abs_diff_eq!(max_confidence(&e, x).unwrap().confidence, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn complementary_state_reconstructs_average() {
        let e = trine();
        let rho = e.average();
        for x in 0..3 {
            let entry = max_confidence(&e, x).unwrap();
            let sigma = entry.sigma.clone().unwrap();
            let rebuilt = e.state(x).matrix() * c(e.prior(x), 0.0) + sigma.matrix() * c(entry.r, 0.0);
            assert!((rho.matrix() * c(entry.confidence, 0.0) - rebuilt).norm() < 1e-9);
            // Kernel property.
            for phi in &entry.basis {
                assert!(sigma.expectation(&phi.projector()) < 1e-9);
            }
        }
    }

    #[test]
    fn complementary_state_is_pure_on_projector_kernel() {
        // p = 1, theta = pi/3: states are pure, sigma_1 is rank one.
        let e = two_mixed(1.0, PI / 3.0);
        let entry = max_confidence(&e, 0).unwrap();
        let sigma = entry.sigma.unwrap();
        assert_abs_diff_eq!(sigma.purity(), 1.0, epsilon = 1e-9);
        let perp = entry.basis[0].qubit_perp().unwrap();
        assert!((sigma.matrix() - perp.projector()).norm() < 1e-9);
    }

    #[test]
    fn zero_prior_label() {
        let e = Ensemble::new(
            vec![1.0, 0.0],
            vec![from_bloch([0.0, 0.0, 1.0]).unwrap(), from_bloch([1.0, 0.0, 0.0]).unwrap()],
        )
        .unwrap();
        let sol = solve(&e).unwrap();
        assert_abs_diff_eq!(sol.entries[0].confidence, 1.0, epsilon = 1e-12);
        assert!(sol.entries[0].sigma.is_none());
        assert_eq!(sol.entries[1].confidence, 0.0);
        assert!(sol.entries[1].basis.is_empty());
    }

    #[test]
    fn full_degeneracy_has_no_complementary_state() {
        let e = Ensemble::uniform(vec![DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2)]).unwrap();
        let entry = max_confidence(&e, 0).unwrap();
        assert_eq!(entry.degeneracy, 2);
        assert_abs_diff_eq!(entry.confidence, 0.5, epsilon = 1e-12);
        assert!(entry.sigma.is_none());
        assert_eq!(entry.r, 0.0);
    }

    #[test]
    fn kkt_passes_for_mcm_and_flags_state_projector() {
        let e = trine();
        let sol = solve(&e).unwrap();
        let povm = Povm::from_weighted_projectors(&[2.0 / 3.0; 3], &sol.projectors(2)).unwrap();
        assert!(verify_kkt(&e, &sol, &povm, 1e-9).unwrap().passed);

        // With uniform priors the trine state projectors are MCM projectors,
        // so the violation needs a skewed prior.
        let states: Vec<_> = (1..=3)
            .map(|x| PureState::qubit(PI / 2.0, 2.0 * PI * x as f64 / 3.0))
            .collect();
        let e = Ensemble::from_pure(vec![0.5, 0.3, 0.2], &states).unwrap();
        let sol = solve(&e).unwrap();
        let weights = crate::optim::min_inconclusive_rate(&e, &sol.projectors(2)).unwrap();
        let povm = weights.povm(&sol.projectors(2)).unwrap();
        assert!(verify_kkt(&e, &sol, &povm, 1e-9).unwrap().passed);

        // Replace M_1 by the projector on the first state itself.
        let mut bad = povm.clone();
        bad.conclusive[0].operator = e.state(0).matrix().clone();
        let report = verify_kkt(&e, &sol, &bad, 1e-9).unwrap();
        assert!(!report.passed);
        let sigma = sol.entries[0].sigma.as_ref().unwrap();
        let expected = sol.entries[0].r * sigma.expectation(e.state(0).matrix());
        assert!(expected > 1e-4, "{expected}");
        assert_abs_diff_eq!(report.entries[0].slackness, expected, epsilon = 1e-12);
    }

    #[test]
    fn helstrom_measurement_is_not_a_confidence_optimum() {
        let pure = |theta: f64| from_bloch([theta.sin(), 0.0, theta.cos()]).unwrap();
        let e = Ensemble::new(vec![0.7, 0.3], vec![pure(0.4), pure(-0.4)]).unwrap();
        let sol = solve(&e).unwrap();
        let helstrom = helstrom_povm(&e).unwrap();
        let report = verify_kkt(&e, &sol, &helstrom, 1e-9).unwrap();
        assert!(!report.passed);
        assert!(report.entries.iter().any(|k| k.slackness > 1e-3));
    }

    #[test]
    fn max_relative_entropy_examples() {
        let zero = from_bloch([0.0, 0.0, 1.0]).unwrap();
        let one = from_bloch([0.0, 0.0, -1.0]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(max_relative_entropy(&zero, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(max_relative_entropy(&zero, &mixed).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(max_relative_entropy(&zero, &one).unwrap(), f64::INFINITY);
    }

    #[test]
    fn entropy_identity_examples() {
        let (conf, entropic) = confidence_entropy_identity(&trine(), 1).unwrap();
        assert_abs_diff_eq!(conf, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropic, 2.0 / 3.0, epsilon = 1e-12);
        let (conf, entropic) = confidence_entropy_identity(&two_mixed(0.5, PI / 2.0), 0).unwrap();
        assert_abs_diff_eq!(conf, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(entropic, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn guessing_probability_two_states() {
        let e = Ensemble::uniform(vec![from_bloch([0.0, 0.0, 1.0]).unwrap(), from_bloch([0.0, 0.0, -1.0]).unwrap()]).unwrap();
        let g = guessing_probability(&e).unwrap();
        assert_abs_diff_eq!(g.p_guess, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.h_min, 0.0, epsilon = 1e-12);
        for theta in [0.3, 1.0, PI / 2.0, 2.5] {
            let e = two_mixed(1.0, theta);
            let g = guessing_probability(&e).unwrap();
            assert_abs_diff_eq!(g.p_guess, 0.5 * (1.0 + theta.sin()), epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_state_projector_shortcut() {
        let e = trine();
        let avg = AverageState::new(&e).unwrap();
        for x in 0..3 {
            let entry = max_confidence(&e, x).unwrap();
            let psi = e.state(x).matrix().column(0).into_owned();
            // |psi> up to scale is any nonzero column of the pure projector.
            let shortcut = PureState::normalized(&avg.inv_sqrt * psi).unwrap();
            assert_abs_diff_eq!(entry.basis[0].inner(&shortcut).norm(), 1.0, epsilon = 1e-9);
        }
    }
}
