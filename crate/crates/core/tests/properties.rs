use measurement_engine::channels::{
    polar_split, random_bare_measurement, to_superoperator, vectorize, unvectorize, KrausChannel,
};
use measurement_engine::config::{ChannelSpec, MatrixSpec};
use measurement_engine::engine::{
    entropy_budget, information_gain, run, CompositeOperation, ThermalContact,
};
use measurement_engine::operators::{hs_norm, tol, DensityOperator};
use measurement_engine::random::{
    random_density, random_hermitian, random_state_any_rank, random_unitary, rng_from_seed, SeededRng,
};
use measurement_engine::sampling::{
    random_bare_cycle, random_feedback, random_general_channel, random_thermal, CycleFamily,
};
use measurement_engine::spectral::{
    find_recurrences, peripheral_projector_or_cesaro, project_peripheral, steady_regime_burn_in, TAU_PERIP,
};
use measurement_engine::verify::{check_monotonicity, Check, Instance, Witness};
use proptest::prelude::*;

fn family(commuting: bool) -> CycleFamily {
    if commuting {
        CycleFamily::Commuting
    } else {
        CycleFamily::Generic
    }
}

fn any_channel(kind: u8, dim: usize, rng: &mut SeededRng) -> KrausChannel {
    match kind % 4 {
        0 => random_bare_measurement(dim, 2 + dim % 2, rng).unwrap(),
        1 => random_feedback(dim, 2, rng).unwrap(),
        2 => random_thermal(dim, rng).unwrap().0,
        _ => random_general_channel(dim, 3, rng).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn random_states_are_valid_with_bounded_entropy(dim in 2usize..=5, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let rho = random_state_any_rank(dim, &mut rng);
        let m = rho.matrix();
        prop_assert!(hs_norm(&(m - m.adjoint())) <= tol::HERM);
        prop_assert!((measurement_engine::operators::trace(m).re - 1.0).abs() <= tol::TRACE);
        let s = rho.entropy();
        prop_assert!(s >= -1e-12 && s <= (dim as f64).ln() + 1e-12);
        prop_assert!(rho.spectrum().eigenvalues.iter().all(|&p| p >= -tol::PSD));
    }

    #[test]
    fn kraus_application_matches_superoperator(kind: u8, dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let ch = any_channel(kind, dim, &mut rng);
        let rho = random_density(dim, dim, &mut rng);
        let direct = ch.apply(&rho).unwrap();
        let via = unvectorize(&(to_superoperator(&ch).matrix() * vectorize(rho.matrix())), dim);
        prop_assert!(hs_norm(&(direct.matrix() - via)) <= 1e-12);
    }

    #[test]
    fn polar_split_reconstructs_the_channel(dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let ch = random_feedback(dim, 2, &mut rng).unwrap();
        let (bare, us) = polar_split(&ch).unwrap();
        prop_assert!(bare.kraus_ops().iter().all(|m| hs_norm(&(m - m.adjoint())) <= tol::HERM));
        for ((k, m), u) in ch.kraus_ops().iter().zip(bare.kraus_ops()).zip(&us) {
            prop_assert!(hs_norm(&(k - u * m)) <= tol::RECON);
        }
    }

    #[test]
    fn bare_measurements_never_lower_entropy(dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let m = random_bare_measurement(dim, 2, &mut rng).unwrap();
        let rho = random_state_any_rank(dim, &mut rng);
        prop_assert!(m.apply(&rho).unwrap().entropy() - rho.entropy() >= -1e-10);
    }

    #[test]
    fn unitary_steps_preserve_entropy(dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let rho = random_state_any_rank(dim, &mut rng);
        let u = random_unitary(dim, &mut rng);
        prop_assert!((rho.conjugate(&u).unwrap().entropy() - rho.entropy()).abs() <= 1e-10);
    }

    #[test]
    fn information_gain_is_nonnegative(dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let m = random_bare_measurement(dim, 3, &mut rng).unwrap();
        let rho = random_state_any_rank(dim, &mut rng);
        prop_assert!(information_gain(&m, &rho).unwrap() >= -1e-10);
    }

    #[test]
    fn feedback_and_second_law_bounds_hold(dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let m = random_bare_measurement(dim, 2, &mut rng).unwrap();
        let us = (0..m.kraus_ops().len()).map(|_| random_unitary(dim, &mut rng)).collect();
        let (channel, hamiltonian, beta) = random_thermal(dim, &mut rng).unwrap();
        let op = CompositeOperation {
            measurement: Some(m),
            feedback: Some(us),
            unitary: Some(random_unitary(dim, &mut rng)),
            thermal: Some(ThermalContact { channel, hamiltonian, beta }),
        };
        let rho = random_state_any_rank(dim, &mut rng);
        let b = entropy_budget(&op, &rho).unwrap();
        prop_assert!(b.chi_ms >= -1e-10);
        prop_assert!(b.feedback_bound_residual >= -1e-10, "{:?}", b);
        prop_assert!(b.second_law_residual >= -1e-10, "{:?}", b);
        prop_assert!(b.ds_unitary.abs() <= 1e-10);
    }

    #[test]
    fn peripheral_projector_is_idempotent_and_commutes(dim in 2usize..=3, k in 1usize..=3, commuting: bool, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let cycle = random_bare_cycle(dim, k, family(commuting), &mut rng).unwrap();
        let e = cycle.superoperator().unwrap();
        let pd = peripheral_projector_or_cesaro(&e, TAU_PERIP).unwrap();
        let checks = pd.check(&e);
        prop_assert!(checks.all_within(1e-8), "{:?}", checks);
        let rho = random_density(dim, dim, &mut rng);
        let rho_phi = project_peripheral(&pd, &rho).unwrap();
        let p = &pd.projector;
        prop_assert!(hs_norm(&(p.apply_operator(rho_phi.matrix()) - rho_phi.matrix())) <= 1e-8);
        let next = e.apply(&rho_phi).unwrap();
        prop_assert!(hs_norm(&(p.apply_operator(next.matrix()) - next.matrix())) <= 1e-8);
    }

    #[test]
    fn contractive_channels_burn_in_to_the_projection(dim in 2usize..=3, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let (ch, _, _) = random_thermal(dim, &mut rng).unwrap();
        let e = to_superoperator(&ch);
        let pd = peripheral_projector_or_cesaro(&e, TAU_PERIP).unwrap();
        let rho = DensityOperator::pure(&random_unitary(dim, &mut rng).column(0).iter().copied().collect::<Vec<_>>()).unwrap();
        let rho_phi = project_peripheral(&pd, &rho).unwrap();
        prop_assert!(steady_regime_burn_in(&e, &rho, &rho_phi, 1e-6, 100_000).is_some());
    }

    #[test]
    fn contractive_orbits_recur_only_after_projection(dim in 2usize..=3, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let (ch, h, _) = random_thermal(dim, &mut rng).unwrap();
        let e = to_superoperator(&ch);
        let ground = measurement_engine::operators::HermitianOperator::spectrum(&h);
        let psi: Vec<_> = ground.eigenvectors.column(dim - 1).iter().copied().collect();
        let rho = DensityOperator::pure(&psi).unwrap();
        let pd = peripheral_projector_or_cesaro(&e, TAU_PERIP).unwrap();
        let rho_phi = project_peripheral(&pd, &rho).unwrap();
        prop_assert!(find_recurrences(&e, &rho_phi, 1e-6, 200).is_ok());
        if hs_norm(&(rho.matrix() - rho_phi.matrix())) > 1e-3 {
            prop_assert!(find_recurrences(&e, &rho, 1e-6, 200).is_err());
        }
    }

    #[test]
    fn ledger_bookkeeping_closes(dim in 2usize..=3, k in 1usize..=3, commuting: bool, n in 1usize..=6, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let cycle = random_bare_cycle(dim, k, family(commuting), &mut rng).unwrap();
        let rho = random_density(dim, dim, &mut rng);
        let ledger = run(&cycle, &rho, n).unwrap();
        prop_assert!(ledger.bookkeeping_residual(cycle.hamiltonian()).unwrap() <= 1e-10);
        prop_assert!(ledger.records.iter().all(|r| r.entropy_disturbance >= -1e-10));
        prop_assert!(ledger.records.iter().all(|r| (r.entropy_after - r.entropy_mid).abs() <= 1e-10));
    }

    #[test]
    fn witness_round_trips_and_reevaluates(dim in 2usize..=4, seed: u64) {
        let mut rng = rng_from_seed(seed);
        let ch = random_bare_measurement(dim, 2, &mut rng).unwrap();
        let mut raw = random_hermitian(dim, &mut rng);
        raw = &raw * &raw;
        let rho = DensityOperator::new(raw.unscale(measurement_engine::operators::trace(&raw).re)).unwrap();
        let outcome = check_monotonicity(&ch, &rho).unwrap();
        let witness = Witness {
            check: Check::Monotonicity,
            trial: 0,
            instance: Instance::State {
                channel: ChannelSpec::from_channel(&ch),
                state: MatrixSpec::from(rho.matrix()),
            },
            values: outcome.values.clone(),
            violation: outcome.violation,
        };
        let text = serde_json::to_string(&witness).unwrap();
        let back: Witness = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &witness);
        let again = back.reevaluate().unwrap();
        prop_assert!((again.violation - outcome.violation).abs() <= 1e-12);
        for (key, v) in &outcome.values {
            prop_assert!((again.values[key] - v).abs() <= 1e-12, "{}", key);
        }
    }
}
