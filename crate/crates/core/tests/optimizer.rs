use holevo::channels::{amplitude_damping, depolarizing, identity_channel, unitary_channel};
use holevo::optimizer::{
    certify, evaluate_minmax, farthest_output, optimize_capacity, reweight_step, state_improvement_step,
    OptimizerConfig, PureState, INITIAL_STEP,
};
use holevo::random::{random_unitary, rng_for_stream, rng_from_seed};
use holevo::{Bits, CVector, DensityOperator, Ensemble, KrausChannel};
use num_complex::Complex64;

fn x_basis_outputs(ch: &KrausChannel) -> Ensemble {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = CVector::from_vec(vec![Complex64::from(s), Complex64::from(s)]);
    let minus = CVector::from_vec(vec![Complex64::from(s), Complex64::from(-s)]);
    Ensemble::uniform(vec![ch.apply_pure(&plus).unwrap(), ch.apply_pure(&minus).unwrap()]).unwrap()
}

fn cfg(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        ..Default::default()
    }
}

#[test]
fn identity_qubit_optimum() {
    let report = optimize_capacity(&identity_channel(2).unwrap(), &cfg(0)).unwrap();
    assert!((report.chi_star - 1.0).abs() < 1e-9);
    assert_eq!(report.ensemble.len(), 2);
    assert!(report.converged);
    for s in &report.ensemble {
        assert!((s.probability - 0.5).abs() < 1e-9);
    }
    let angle = report.ensemble[0].input.hilbert_angle_deg(&report.ensemble[1].input);
    assert!((angle - 90.0).abs() < 1e-6);
}

#[test]
fn traces_are_monotone_and_size_bound_holds() {
    let channels = [
        amplitude_damping(0.3).unwrap(),
        amplitude_damping(0.5).unwrap(),
        depolarizing(0.4, 2).unwrap(),
        depolarizing(0.2, 3).unwrap(),
    ];
    for ch in &channels {
        let report = optimize_capacity(ch, &cfg(5)).unwrap();
        assert!(report.restarts.iter().all(|r| r.monotone));
        assert!(report.trace.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9));
        let d = ch.dim();
        assert!(report.ensemble.len() <= d * d);
        assert!(report.converged, "{report}");
    }
}

#[test]
fn deterministic_for_fixed_seed() {
    let ch = amplitude_damping(0.5).unwrap();
    let a = optimize_capacity(&ch, &cfg(42)).unwrap();
    let b = optimize_capacity(&ch, &cfg(42)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unitary_channels_reach_log_d() {
    let mut rng = rng_from_seed(808);
    for d in [2usize, 3] {
        for _ in 0..3 {
            let ch = unitary_channel(random_unitary(d, &mut rng)).unwrap();
            let report = optimize_capacity(&ch, &cfg(1)).unwrap();
            assert!((report.chi_star - (d as f64).log2()).abs() <= 1e-6);
            assert!(report.converged);
        }
    }
}

#[test]
fn certify_examples() {
    let id = identity_channel(2).unwrap();
    let cert = certify(&id, &x_basis_outputs(&id), &cfg(0)).unwrap();
    assert!(cert.valid);
    assert!(cert.max_distance_residual <= Bits::Finite(1e-5));

    let ad = amplitude_damping(0.5).unwrap();
    let cert = certify(&ad, &x_basis_outputs(&ad), &cfg(0)).unwrap();
    assert!(!cert.valid);
    assert!(cert.max_distance_residual > Bits::Finite(1e-5));
    assert!((cert.chi_star - 0.4567).abs() < 5e-4);

    let single = Ensemble::new(vec![(1.0, DensityOperator::diagonal(&[1.0, 0.0]).unwrap())]).unwrap();
    let cert = certify(&id, &single, &cfg(0)).unwrap();
    assert!(!cert.valid);
    assert_eq!(cert.max_distance_residual, Bits::Infinite);
    assert_eq!(cert.support_rank_avg, 1);
    assert_eq!(cert.support_rank_set, 2);

    let wrong_dim = Ensemble::new(vec![(1.0, DensityOperator::maximally_mixed(3))]).unwrap();
    assert!(certify(&id, &wrong_dim, &cfg(0)).is_err());
}

#[test]
fn certificate_soundness_across_fresh_seeds() {
    let ad = amplitude_damping(0.5).unwrap();
    let report = optimize_capacity(&ad, &cfg(0)).unwrap();
    assert!(report.certificate.valid);
    let avg = report.average_output();
    for seed in 100..110 {
        let probe_cfg = OptimizerConfig {
            seed,
            probe_count: 1024,
            ..Default::default()
        };
        let far = farthest_output(&ad, &avg, &probe_cfg).unwrap();
        assert!(far.distance <= Bits::Finite(report.chi_star + 1e-5), "seed {seed}: {:?}", far.distance);
    }
}

#[test]
fn minmax_examples() {
    let id = identity_channel(2).unwrap();
    let v = evaluate_minmax(&id, &[DensityOperator::maximally_mixed(2)], &cfg(0)).unwrap();
    assert!((v.to_f64() - 1.0).abs() < 1e-12);

    let ad = amplitude_damping(0.5).unwrap();
    let report = optimize_capacity(&ad, &cfg(0)).unwrap();
    let rho_star = report.average_output();
    let at_opt = evaluate_minmax(&ad, std::slice::from_ref(&rho_star), &cfg(0)).unwrap().to_f64();
    assert!((at_opt - 0.4717).abs() < 1e-3);
    assert!((at_opt - report.chi_star).abs() <= 2e-5);

    // A far-off image point is a poor candidate, and adding it cannot lower
    // the minimum.
    let bad = ad.apply_pure(&PureState::basis(2, 0).vector().clone()).unwrap();
    let v_bad = evaluate_minmax(&ad, std::slice::from_ref(&bad), &cfg(0)).unwrap().to_f64();
    assert!(v_bad > report.chi_star + 1e-3);
    let both = evaluate_minmax(&ad, &[bad, rho_star], &cfg(0)).unwrap().to_f64();
    assert!((both - at_opt).abs() < 1e-12);

    assert!(evaluate_minmax(&ad, &[], &cfg(0)).is_err());
}

#[test]
fn reweighting_converges_on_optimal_inputs() {
    let ad = amplitude_damping(0.5).unwrap();
    let report = optimize_capacity(&ad, &cfg(0)).unwrap();
    let inputs: Vec<PureState> = report.ensemble.iter().map(|s| s.input.clone()).collect();
    let mut probs = vec![0.3, 0.7];
    let mut last = probs.clone();
    for _ in 0..500 {
        last = probs.clone();
        probs = reweight_step(&inputs, &probs, &ad).unwrap();
    }
    assert!(probs.iter().zip(&last).all(|(a, b)| (a - b).abs() <= 1e-7));
    let e = Ensemble::new(
        probs
            .iter()
            .zip(&inputs)
            .map(|(p, psi)| (*p, ad.apply_pure(psi.vector()).unwrap()))
            .collect(),
    )
    .unwrap();
    let chi = holevo::ensembles::holevo_chi(&e).unwrap();
    assert!((chi - report.chi_star).abs() < 1e-6);
}

#[test]
fn no_proposal_accepted_at_certified_optimum() {
    let ad = amplitude_damping(0.5).unwrap();
    let report = optimize_capacity(&ad, &cfg(0)).unwrap();
    let inputs: Vec<PureState> = report.ensemble.iter().map(|s| s.input.clone()).collect();
    let probs: Vec<f64> = report.ensemble.iter().map(|s| s.probability).collect();
    let chi_before = report.chi_star;
    let mut steps = vec![INITIAL_STEP; inputs.len()];
    let mut rng = rng_for_stream(3, 1);
    let mut current = inputs.clone();
    for _ in 0..20 {
        current = state_improvement_step(&current, &probs, &ad, &mut rng, &mut steps).unwrap();
    }
    let e = Ensemble::new(
        probs
            .iter()
            .zip(&current)
            .map(|(p, psi)| (*p, ad.apply_pure(psi.vector()).unwrap()))
            .collect(),
    )
    .unwrap();
    let chi_after = holevo::ensembles::holevo_chi(&e).unwrap();
    assert!(chi_after >= chi_before - 1e-12);
    assert!(chi_after - chi_before <= 1e-7);
}

#[test]
fn orthogonal_start_climbs_above_orthogonal_value() {
    let ad = amplitude_damping(0.5).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut inputs = vec![
        PureState::new(CVector::from_vec(vec![Complex64::from(s), Complex64::from(s)])).unwrap(),
        PureState::new(CVector::from_vec(vec![Complex64::from(s), Complex64::from(-s)])).unwrap(),
    ];
    let mut probs = vec![0.5, 0.5];
    let mut steps = vec![INITIAL_STEP; 2];
    let mut rng = rng_for_stream(4, 1);
    for _ in 0..500 {
        probs = reweight_step(&inputs, &probs, &ad).unwrap();
        inputs = state_improvement_step(&inputs, &probs, &ad, &mut rng, &mut steps).unwrap();
    }
    let e = Ensemble::new(
        probs
            .iter()
            .zip(&inputs)
            .map(|(p, psi)| (*p, ad.apply_pure(psi.vector()).unwrap()))
            .collect(),
    )
    .unwrap();
    assert!(holevo::ensembles::holevo_chi(&e).unwrap() > 0.4567 + 1e-3);
}
