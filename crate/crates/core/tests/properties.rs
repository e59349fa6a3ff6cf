use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqmcm::mcm;
use seqmcm::optim::min_inconclusive_rate;
use seqmcm::qcore::matrix::{max_abs, min_eigenvalue, real_trace, support_projector};
use seqmcm::qcore::random;
use seqmcm::qcore::{c, eig_hermitian, identity, pinv_sqrt, trace_norm_distance, validate_povm, Ensemble, Povm, RANK_TOL};
use seqmcm::seqchan::{
    ensemble_distance, kraus_from_weak, weaken, KrausChannel, KrausOperator, Outcome, WeakMcm,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn channel(seed: u64, dim: usize, count: usize) -> KrausChannel {
    let ops = random::kraus_operators(&mut rng(seed), dim, count)
        .into_iter()
        .map(|k| KrausOperator { outcome: Outcome::Inconclusive, operator: k })
        .collect();
    KrausChannel::new(ops).unwrap()
}

fn mcm_povm(e: &Ensemble) -> Povm {
    let sol = mcm::solve(e).unwrap();
    let projectors = sol.projectors(e.dim());
    min_inconclusive_rate(e, &projectors).unwrap().povm(&projectors).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), dim in 1usize..=6) {
        let a = random::hermitian(&mut rng(seed), dim);
        let eig = eig_hermitian(&a).unwrap();
        prop_assert!(max_abs(&(eig.reconstruct() - &a)) < 1e-10 * (1.0 + max_abs(&a)));
        for w in eig.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn channels_preserve_trace_and_positivity(seed in any::<u64>(), dim in 1usize..=4, count in 1usize..=4, rank in 1usize..=4) {
        let k = channel(seed, dim, count);
        let rho = random::density_matrix(&mut rng(seed ^ 0x5eed), dim, rank.min(dim));
        let out = k.apply(&rho).unwrap();
        prop_assert!((real_trace(out.matrix()) - 1.0).abs() < 1e-10);
        prop_assert!(min_eigenvalue(out.matrix()).unwrap() > -1e-10);
        prop_assert!(k.completeness_residual() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn inverse_square_root_projects_onto_support(seed in any::<u64>(), dim in 1usize..=5, rank in 1usize..=5) {
        let rho = random::density_matrix(&mut rng(seed), dim, rank.min(dim));
        let (s, r) = pinv_sqrt(rho.matrix(), RANK_TOL).unwrap();
        let (p, r2) = support_projector(rho.matrix(), RANK_TOL).unwrap();
        prop_assert_eq!(r, r2);
        prop_assert_eq!(r, rank.min(dim));
        prop_assert!(max_abs(&(&s * rho.matrix() * &s - p)) < 1e-8);
    }

    #[test]
    fn trace_distance_triangle(seed in any::<u64>(), dim in 1usize..=4) {
        let mut g = rng(seed);
        let a = random::density_matrix(&mut g, dim, dim);
        let b = random::density_matrix(&mut g, dim, 1);
        let m = random::density_matrix(&mut g, dim, 2.min(dim));
        let ab = trace_norm_distance(&a, &b).unwrap();
        let am = trace_norm_distance(&a, &m).unwrap();
        let mb = trace_norm_distance(&m, &b).unwrap();
        prop_assert!(ab <= am + mb + 1e-10);
        prop_assert!(ab <= 2.0 + 1e-10);
    }

    #[test]
    fn confidences_never_rise_under_channels(seed in any::<u64>(), dim in 2usize..=3, n in 2usize..=4, count in 1usize..=3) {
        let e = random::ensemble(&mut rng(seed), dim, n);
        let out = channel(seed ^ 0xc4a7, dim, count).apply_ensemble(&e).unwrap();
        let before = mcm::solve(&e).unwrap().confidences();
        let after = mcm::solve(&out).unwrap().confidences();
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(*a <= b + 1e-9, "{a} > {b}");
        }
    }

    #[test]
    fn disturbance_dominates_its_lower_bound(seed in any::<u64>(), dim in 2usize..=3, n in 2usize..=5, count in 1usize..=3) {
        let e = random::ensemble(&mut rng(seed), dim, n);
        let out = channel(seed ^ 0xd157, dim, count).apply_ensemble(&e).unwrap();
        let (d, lower) = ensemble_distance(&e, &out).unwrap();
        prop_assert!(d >= lower - 1e-10);
    }

    #[test]
    fn confidence_is_a_max_relative_entropy(seed in any::<u64>(), n in 2usize..=5) {
        let e = random::ensemble(&mut rng(seed), 2, n);
        for x in 0..n {
            let (conf, entropic) = mcm::confidence_entropy_identity(&e, x).unwrap();
            prop_assert!((conf - entropic).abs() < 1e-9);
        }
    }

    #[test]
    fn mcm_povms_are_valid_and_optimal(seed in any::<u64>(), dim in 2usize..=3, n in 2usize..=4) {
        let e = random::ensemble(&mut rng(seed), dim, n);
        let sol = mcm::solve(&e).unwrap();
        let povm = mcm_povm(&e);
        prop_assert!(validate_povm(&povm).unwrap().passed);
        let kkt = mcm::verify_kkt(&e, &sol, &povm, 1e-9).unwrap();
        prop_assert!(kkt.passed, "{:?}", kkt);
    }

    #[test]
    fn weakening_keeps_confidences(seed in any::<u64>(), dim in 2usize..=3, n in 2usize..=4, alpha in 0.01f64..=1.0) {
        let e = random::ensemble(&mut rng(seed), dim, n);
        let sol = mcm::solve(&e).unwrap();
        let base = mcm_povm(&e);
        let weak = weaken(&base, &vec![alpha; base.conclusive.len()]).unwrap();
        prop_assert!(validate_povm(&weak).unwrap().passed);
        for el in &weak.conclusive {
            if e.average().expectation(&el.operator) > 1e-9 {
                let conf = mcm::confidence_of(&e, el.label, &el.operator);
                prop_assert!((conf - sol.confidences()[el.label]).abs() < 1e-9);
            }
        }
        let w = WeakMcm::uniform(base, alpha, sol.projector_states());
        let k = kraus_from_weak(&w).unwrap();
        prop_assert!(k.completeness_residual() < 1e-10);
        let induced = k.povm(n).unwrap();
        for (a, b) in induced.conclusive.iter().zip(&weak.conclusive) {
            prop_assert!(max_abs(&(&a.operator - &b.operator)) < 1e-10);
        }
    }

    #[test]
    fn complementary_decomposition_holds(seed in any::<u64>(), dim in 2usize..=3, n in 2usize..=4) {
        let e = random::ensemble(&mut rng(seed), dim, n);
        let rho = e.average();
        for x in 0..n {
            let entry = mcm::max_confidence(&e, x).unwrap();
            let mut rest = rho.matrix() * c(entry.confidence, 0.0) - e.state(x).matrix() * c(e.prior(x), 0.0);
            if let Some(sigma) = &entry.sigma {
                rest -= sigma.matrix() * c(entry.r, 0.0);
                prop_assert!(sigma.expectation(&entry.projector(dim)).abs() < 1e-9);
            }
            prop_assert!(max_abs(&rest) < 1e-9);
        }
    }
}

#[test]
fn identity_channel_changes_nothing() {
    let e = random::ensemble(&mut rng(3), 3, 3);
    let out = KrausChannel::identity(3).apply_ensemble(&e).unwrap();
    let (d, lower) = ensemble_distance(&e, &out).unwrap();
    assert!(d < 1e-14 && lower < 1e-14);
    assert!(max_abs(&(KrausChannel::identity(3).effect(Outcome::Inconclusive) - identity(3))) == 0.0);
}
