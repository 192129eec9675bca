use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use passivize::battery::{
    ergotropy, power_upper_bound, smooth_discharge_schedule, transition_probabilities, BatterySpec,
    PowerScenario,
};
use passivize::multipartite::{
    catalysed_spec, collective_hamiltonian, tau_cqsl, tensor_power_diagonal, CollectiveSpec,
};
use passivize::operator::{evolve_constant, max_abs};
use passivize::oracle::numeric_min_distance;
use passivize::random::{
    random_degenerate_spec, random_hermitian, random_probabilities, random_strict_spec,
    random_unitary,
};
use passivize::speed_limits::{
    build_time_optimal_hamiltonian, distance_to_passivizing_set, tau_pas_nondegenerate, tau_qsl,
    tau_upper_from_permutation, HamiltonianMethod,
};
use passivize::system::{
    canonical_passivizing, cycle_decomposition, cycle_division, discrepancy,
    enumerate_passivizing_permutations, is_passive, is_passivizing, permutation_operator,
    reduce_and_order_involution,
};
use passivize::{
    bandwidth, expm_skew, geodesic_distance, principal_log, DensityOperator, Permutation,
    SystemSpec,
};

/// Fixed proptest seed so every run draws the same cases.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x9a55),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn exponential_is_additive(seed in any::<u64>(), n in 2usize..7, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let h = random_hermitian(n, &mut rng(seed));
        let lhs = expm_skew(&h, s).compose(&expm_skew(&h, t));
        let rhs = expm_skew(&h, s + t);
        prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) <= 1e-9);
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>(), n in 2usize..9) {
        let u = random_unitary(n, &mut rng(seed));
        let back = principal_log(&u).exp();
        prop_assert!(max_abs(&(back.matrix() - u.matrix())) <= 1e-9);
        prop_assert!(principal_log(&u).phases().iter().all(|&x| x > -PI && x <= PI));
    }

    #[test]
    fn geodesic_distance_is_a_bi_invariant_metric(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let (u, v, w) = (random_unitary(n, &mut r), random_unitary(n, &mut r), random_unitary(n, &mut r));
        let d = |x: &passivize::UnitaryOperator, y: &passivize::UnitaryOperator| geodesic_distance(x, y).unwrap();
        prop_assert!(d(&u, &w) <= d(&u, &v) + d(&v, &w) + 1e-8);
        prop_assert!((d(&w.compose(&u), &w.compose(&v)) - d(&u, &v)).abs() <= 1e-8);
        prop_assert!((d(&u.compose(&w), &v.compose(&w)) - d(&u, &v)).abs() <= 1e-8);
    }

    #[test]
    fn enumeration_matches_brute_force(seed in any::<u64>(), n in 2usize..8, levels in 2usize..4) {
        let spec = random_degenerate_spec(n, levels, &mut rng(seed));
        let listed = enumerate_passivizing_permutations(&spec).unwrap();
        let mut brute: Vec<Permutation> = all_permutations(n)
            .into_iter()
            .map(|images| Permutation::new(images).unwrap())
            .filter(|s| is_passivizing(s, &spec))
            .collect();
        brute.sort();
        prop_assert_eq!(&listed, &brute);
        for sigma in &listed {
            let rho = spec.initial_state().conjugated(&permutation_operator(sigma));
            prop_assert!(is_passive(&rho, &spec).unwrap());
        }
    }

    #[test]
    fn bivalent_discrepancy_is_even(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let cut = r.random_range(1..n);
        let a: Vec<f64> = (0..n).map(|k| if k < cut { 0.0 } else { 1.0 }).collect();
        let spec = SystemSpec::new(a, random_probabilities(n, &mut r), 1.0).unwrap();
        prop_assert_eq!(discrepancy(&spec) % 2, 0);
    }

    #[test]
    fn cycle_division_never_raises_the_bound(seed in any::<u64>(), n in 3usize..8) {
        let spec = random_degenerate_spec(n, 3, &mut rng(seed));
        for sigma in enumerate_passivizing_permutations(&spec).unwrap().iter().take(6) {
            let w = cycle_decomposition(sigma).flag_weight();
            for divided in cycle_division(sigma, &spec).unwrap() {
                prop_assert!(is_passivizing(&divided, &spec));
                prop_assert!(cycle_decomposition(&divided).flag_weight() <= w + 1e-12);
            }
        }
    }

    #[test]
    fn reduced_involution_lowers_energy_stepwise(seed in any::<u64>(), n in 2usize..9) {
        let spec = random_degenerate_spec(n, 3, &mut rng(seed));
        let involutions: Vec<Permutation> = enumerate_passivizing_permutations(&spec)
            .unwrap()
            .into_iter()
            .filter(|s| s.is_involution())
            .collect();
        for sigma in involutions {
            let pairs = reduce_and_order_involution(&sigma, &spec).unwrap();
            let mut p = spec.p().to_vec();
            let energy = |p: &[f64]| p.iter().zip(spec.a()).map(|(x, y)| x * y).sum::<f64>();
            let mut last = energy(&p);
            for (k1, k2) in pairs {
                p.swap(k1, k2);
                let e = energy(&p);
                prop_assert!(e <= last + 1e-12);
                last = e;
            }
        }
    }

    #[test]
    fn constructed_hamiltonians_saturate_and_annihilate(seed in any::<u64>(), n in 2usize..7) {
        let spec = random_strict_spec(n, &mut rng(seed));
        prop_assume!(discrepancy(&spec) > 0);
        let t = build_time_optimal_hamiltonian(&spec, HamiltonianMethod::Nondegenerate).unwrap();
        prop_assert!((bandwidth(&t.hamiltonian) - 1.0).abs() <= 1e-10);
        let m = t.hamiltonian.matrix();
        for k in 0..n {
            prop_assert!(m[(k, k)].norm() <= 1e-10);
        }
        prop_assert!(t.hamiltonian.trace().abs() <= 1e-10);
        let rho = evolve_constant(&t.hamiltonian, &spec.initial_state(), t.time);
        prop_assert!(is_passive(&rho, &spec).unwrap());
        let d = distance_to_passivizing_set(&spec, &canonical_passivizing(&spec), None).unwrap();
        prop_assert!((d.distance - tau_pas_nondegenerate(&spec).unwrap()).abs() <= 1e-10 * d.distance.max(1.0));
    }

    #[test]
    fn maximally_active_involution_is_minus_i_p(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let mut a: Vec<f64> = (0..n).map(|_| r.random_range(0..4) as f64).collect();
        a.sort_by(f64::total_cmp);
        let mut p = random_probabilities(n, &mut r);
        p.sort_by(f64::total_cmp);
        let spec = SystemSpec::new(a, p, 1.0).unwrap();
        prop_assume!(discrepancy(&spec) > 0);
        let t = build_time_optimal_hamiltonian(&spec, HamiltonianMethod::MaximallyActive).unwrap();
        prop_assert!((bandwidth(&t.hamiltonian) - 1.0).abs() <= 1e-10);
        let u = expm_skew(&t.hamiltonian, t.time);
        let target = permutation_operator(&t.permutation);
        for k in 0..n {
            let j = t.permutation.image(k);
            if j != k {
                let expected = target.matrix()[(k, j)] * num_complex::Complex64::new(0.0, -1.0);
                prop_assert!((u.matrix()[(k, j)] - expected).norm() <= 1e-10);
            }
        }
        let rho = evolve_constant(&t.hamiltonian, &spec.initial_state(), t.time);
        prop_assert!(is_passive(&rho, &spec).unwrap());
    }

    #[test]
    fn catalysts_do_not_lower_the_discrepancy(seed in any::<u64>(), n in 2usize..6, n_c in 1usize..5) {
        let mut r = rng(seed);
        let spec = random_degenerate_spec(n, 3, &mut r);
        let q = random_probabilities(n_c, &mut r);
        let joint = catalysed_spec(&spec, &q).unwrap();
        prop_assert!(discrepancy(&joint) >= discrepancy(&spec));
    }

    #[test]
    fn ergotropy_is_permutation_independent(seed in any::<u64>(), n in 2usize..7) {
        let spec = random_degenerate_spec(n, 3, &mut rng(seed));
        let b = BatterySpec::new(spec.a().to_vec(), spec.p().to_vec(), 1.0).unwrap();
        let w = ergotropy(&b);
        for sigma in enumerate_passivizing_permutations(&spec).unwrap().iter().take(20) {
            let s: f64 = (0..n).map(|k| b.eps()[k] * (b.p()[k] - b.p()[sigma.image(k)])).sum();
            prop_assert!((s - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn transition_marginals(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let spec = random_degenerate_spec(n, 3, &mut r);
        let b = BatterySpec::new(spec.a().to_vec(), spec.p().to_vec(), 1.0).unwrap();
        let u = passivize::random::random_passivizing_unitary(&spec, &mut r);
        let (e, probs) = transition_probabilities(&u, &b);
        let mut transferred = 0.0;
        for (k, g) in spec.a_groups().iter().enumerate() {
            let column: f64 = probs.iter().map(|row| row[k]).sum();
            let weight: f64 = g.clone().map(|j| spec.p()[j]).sum();
            prop_assert!((column - weight).abs() <= 1e-8);
            for (l, row) in probs.iter().enumerate() {
                transferred += row[k] * (e[k] - e[l]);
            }
        }
        prop_assert!((transferred - ergotropy(&b)).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn oracle_lies_between_speed_limit_and_upper_bound(seed in any::<u64>(), n in 2usize..5) {
        let spec = random_degenerate_spec(n, 3, &mut rng(seed));
        prop_assume!(discrepancy(&spec) > 0);
        let oracle = numeric_min_distance(&spec, 8, seed).unwrap();
        let sigma = canonical_passivizing(&spec);
        let (upper, _) = tau_upper_from_permutation(&sigma, &spec, true).unwrap();
        prop_assert!(tau_qsl(&spec) <= oracle.best_distance + 1e-6);
        prop_assert!(oracle.best_distance <= upper + 1e-6);
    }

    #[test]
    fn collective_evolution_stays_diagonal(seed in any::<u64>(), copies in 1usize..4) {
        let mut r = rng(seed);
        let mut p = random_probabilities(2, &mut r);
        p.sort_by(f64::total_cmp);
        prop_assume!(p[1] - p[0] > 1e-3);
        let base = SystemSpec::new(vec![0.0, 1.0], p, 1.0).unwrap();
        let c = CollectiveSpec::new(base.clone(), copies, None).unwrap();
        let sigma = canonical_passivizing(&base);
        let h = collective_hamiltonian(&c, &sigma).unwrap();
        let rho = DensityOperator::from_diagonal(&tensor_power_diagonal(base.p(), copies)).unwrap();
        let out = evolve_constant(&h, &rho, tau_cqsl(&c).unwrap());
        let m = out.matrix();
        let target = tensor_power_diagonal(&sigma.permuted(base.p()), copies);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let expected = if i == j { target[i] } else { 0.0 };
                prop_assert!((m[(i, j)].re - expected).abs() <= 1e-9 && m[(i, j)].im.abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn no_constructed_discharge_beats_the_power_bound(seed in any::<u64>(), n in 2usize..5, eps in 0.01f64..2.0) {
        let spec = random_strict_spec(n, &mut rng(seed));
        prop_assume!(discrepancy(&spec) > 0);
        let b = BatterySpec::new(spec.a().to_vec(), spec.p().to_vec(), 1.0).unwrap();
        let t = build_time_optimal_hamiltonian(&spec, HamiltonianMethod::Nondegenerate).unwrap();
        let s = smooth_discharge_schedule(&b, &t.hamiltonian, t.time, eps).unwrap();
        let bound = power_upper_bound(&b, PowerScenario::Generic).unwrap();
        prop_assert!(ergotropy(&b) / s.duration() <= bound.power * (1.0 + 1e-12));
        let final_state = spec.initial_state().conjugated(&s.implemented_unitary());
        prop_assert!(is_passive(&final_state, &spec).unwrap());
        let mut sorted_before = spec.p().to_vec();
        sorted_before.sort_by(f64::total_cmp);
        let after = final_state.spectrum();
        for (x, y) in sorted_before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }
}
